//! Sources of a finite sum of first-order plane waves, evaluated directly on
//! their sparse Fourier support.
//!
//! Every first-order metric term is `pattern g(tau) cos(k.x + phase)`, so the
//! quadratic sources are sums of products of time functions with fixed
//! spatial coefficient fields. Those coefficients are computed once by
//! polarizing the pointwise sources on complex plane-wave jets.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::pointwise::{point_sources, PointJet, SourceParts};
use super::sources::SourceTerms;
use crate::error::Result;
use crate::first_order::{FirstOrder, FirstOrderEvolution, TimeJet};
use crate::spectral::Grid3;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// One real plane-wave input of the quadratic form.
#[derive(Debug, Clone, Copy)]
enum Slot {
    /// Term `t` entering as `g`, `p` or `pp` (`order` 0, 1, 2).
    Term { t: usize, order: usize },
    /// Term `t` evaluated at the initial time, entering as `g0`.
    Initial { t: usize },
    /// Density contrast term `d`.
    Density { d: usize },
}

/// Whether `m` is the representative of the pair `{m, -m}`.
pub fn is_canonical(m: [i32; 3]) -> bool {
    for c in m {
        if c != 0 {
            return c > 0;
        }
    }
    true
}

#[derive(Debug, Clone)]
struct Entry {
    s1: usize,
    s2: usize,
    parts: [[C; 11]; 3],
}

/// Per-mode source sums keyed by slot pair.
type PairSums = BTreeMap<(usize, usize), [[C; 11]; 3]>;

/// Source coefficients at one instant on the canonical support modes.
#[derive(Debug, Clone)]
pub struct SparseSources {
    pub tau: f64,
    pub conf_h: f64,
    pub rho_a2: f64,
    /// Coefficient of `exp(i k.x)` per support mode, components ordered as
    /// [`SourceTerms::components`]; `-k` carries the conjugate.
    pub coeffs: Vec<[C; 11]>,
}

/// Provider of source coefficients on a fixed sparse support.
pub trait SourceProvider {
    fn grid(&self) -> &Grid3;
    fn support(&self) -> &[[i32; 3]];
    fn sources(&self, tau: f64) -> Result<SparseSources>;
}

/// Precomputed bilinear coefficients for a first-order setup.
#[derive(Debug, Clone)]
pub struct BilinearSources {
    grid: Grid3,
    slots: Vec<Slot>,
    support: Vec<[i32; 3]>,
    entries: Vec<Vec<Entry>>,
}

fn plane_jet(fo: &FirstOrder, slot: Slot, sign: f64) -> ([i32; 3], PointJet<C>) {
    let mut jet = PointJet::<C>::default();
    let i = C::new(0.0, 1.0);
    match slot {
        Slot::Term { t, .. } | Slot::Initial { t } => {
            let term = &fo.terms[t];
            let k = term.k.map(|c| sign * c);
            let amp = 0.5 * C::from_polar(1.0, sign * term.phase);
            let scale = match slot {
                Slot::Initial { .. } => fo.initial_jet().eval(term.time)[0],
                _ => 1.0,
            };
            let t0: [[C; 3]; 3] = term.pattern.map(|r| r.map(|v| amp * (v * scale)));
            let m = term.m.map(|c| if sign > 0.0 { c } else { -c });
            match slot {
                Slot::Term { order: 0, .. } => {
                    jet.g = t0;
                    jet.dg = std::array::from_fn(|c| t0.map(|r| r.map(|v| i * k[c] * v)));
                    jet.ddg = std::array::from_fn(|c| std::array::from_fn(|d| t0.map(|r| r.map(|v| -k[c] * k[d] * v))));
                }
                Slot::Term { order: 1, .. } => {
                    jet.p = t0;
                    jet.dp = std::array::from_fn(|c| t0.map(|r| r.map(|v| i * k[c] * v)));
                }
                Slot::Term { .. } => jet.pp = t0,
                Slot::Initial { .. } => jet.g0 = t0,
                Slot::Density { .. } => unreachable!(),
            }
            (m, jet)
        }
        Slot::Density { d } => {
            let term = &fo.delta0[d];
            jet.d0 = 0.5 * term.amp * C::from_polar(1.0, sign * term.phase);
            (term.m.map(|c| if sign > 0.0 { c } else { -c }), jet)
        }
    }
}

fn parts_array(p: &SourceParts<C>) -> [[C; 11]; 3] {
    [p.plain.to_array(), p.hubble.to_array(), p.density.to_array()]
}

impl BilinearSources {
    pub fn new(fo: &FirstOrder) -> Self {
        let mut slots = Vec::new();
        for t in 0..fo.terms.len() {
            for order in 0..3 {
                slots.push(Slot::Term { t, order });
            }
            slots.push(Slot::Initial { t });
        }
        for d in 0..fo.delta0.len() {
            slots.push(Slot::Density { d });
        }
        let grid = fo.grid.clone();
        let mut acc: BTreeMap<[i32; 3], PairSums> = BTreeMap::new();
        let jets: Vec<[([i32; 3], PointJet<C>); 2]> = slots
            .iter()
            .map(|&s| [plane_jet(fo, s, 1.0), plane_jet(fo, s, -1.0)])
            .collect();
        let q: Vec<[SourceParts<C>; 2]> = jets
            .iter()
            .map(|j| [point_sources(&j[0].1), point_sources(&j[1].1)])
            .collect();
        for s1 in 0..slots.len() {
            for s2 in s1..slots.len() {
                let mult = if s1 == s2 { 1.0 } else { 2.0 };
                for a in 0..2 {
                    for b in 0..2 {
                        let (m1, j1) = &jets[s1][a];
                        let (m2, j2) = &jets[s2][b];
                        let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]];
                        if !is_canonical(m) || !grid.in_dealiased_band(m) {
                            continue;
                        }
                        let both = parts_array(&point_sources(&j1.add(j2)));
                        let p1 = parts_array(&q[s1][a]);
                        let p2 = parts_array(&q[s2][b]);
                        let mut val = [[ZERO; 11]; 3];
                        let mut nonzero = false;
                        for part in 0..3 {
                            for c in 0..11 {
                                let v = (both[part][c] - p1[part][c] - p2[part][c]) * (0.5 * mult);
                                nonzero |= v != ZERO;
                                val[part][c] = v;
                            }
                        }
                        if !nonzero {
                            continue;
                        }
                        let e = acc.entry(m).or_default().entry((s1, s2)).or_insert([[ZERO; 11]; 3]);
                        for part in 0..3 {
                            for c in 0..11 {
                                e[part][c] += val[part][c];
                            }
                        }
                    }
                }
            }
        }
        let mut support = Vec::with_capacity(acc.len());
        let mut entries = Vec::with_capacity(acc.len());
        for (m, map) in acc {
            support.push(m);
            entries.push(
                map.into_iter()
                    .map(|((s1, s2), parts)| Entry { s1, s2, parts })
                    .collect(),
            );
        }
        Self {
            grid,
            slots,
            support,
            entries,
        }
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    fn weights(&self, jet: &TimeJet, fo: &FirstOrder) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Term { t, order } => jet.eval(fo.terms[t].time)[order],
                Slot::Initial { .. } | Slot::Density { .. } => 1.0,
            })
            .collect()
    }

    /// Coefficients for the given time functions and background values.
    pub fn evaluate(&self, fo: &FirstOrder, jet: &TimeJet, conf_h: f64, rho_a2: f64) -> SparseSources {
        let w = self.weights(jet, fo);
        let coeffs = self
            .entries
            .iter()
            .map(|list| {
                let mut out = [ZERO; 11];
                for e in list {
                    let ww = w[e.s1] * w[e.s2];
                    if ww == 0.0 {
                        continue;
                    }
                    for c in 0..11 {
                        out[c] += (e.parts[0][c] + e.parts[1][c] * conf_h + e.parts[2][c] * rho_a2) * ww;
                    }
                }
                out
            })
            .collect();
        SparseSources {
            tau: jet.tau,
            conf_h,
            rho_a2,
            coeffs,
        }
    }
}

/// Renders sparse coefficients on the full grid.
pub fn sparse_to_grid(grid: &Grid3, support: &[[i32; 3]], s: &SparseSources) -> SourceTerms {
    let mut out = SourceTerms::zeros(grid, s.tau);
    for (c, dst) in out.components_mut().into_iter().enumerate() {
        let mut spec = vec![ZERO; grid.len()];
        for (m, coef) in support.iter().zip(&s.coeffs) {
            let v = coef[c];
            let idx = grid.flat_mode_index(*m).expect("support inside grid");
            spec[idx] += v;
            if *m != [0, 0, 0] {
                let neg = grid.flat_mode_index(m.map(|x| -x)).expect("support inside grid");
                spec[neg] += v.conj();
            }
        }
        *dst = grid.inverse(&spec);
    }
    out
}

/// Sources of an evolved first-order solution on its sparse support.
pub struct FirstOrderSources<'a> {
    pub evolution: &'a FirstOrderEvolution,
    pub bilinear: BilinearSources,
}

impl<'a> FirstOrderSources<'a> {
    pub fn new(evolution: &'a FirstOrderEvolution) -> Self {
        Self {
            bilinear: BilinearSources::new(&evolution.setup),
            evolution,
        }
    }
}

impl SourceProvider for FirstOrderSources<'_> {
    fn grid(&self) -> &Grid3 {
        &self.bilinear.grid
    }

    fn support(&self) -> &[[i32; 3]] {
        &self.bilinear.support
    }

    fn sources(&self, tau: f64) -> Result<SparseSources> {
        let jet = self.evolution.time_jet(tau)?;
        let bg = &self.evolution.setup.bg;
        Ok(self
            .bilinear
            .evaluate(&self.evolution.setup, &jet, bg.conf_h(jet.y), bg.rho_a2(jet.y)))
    }
}

impl BilinearSources {
    pub fn support(&self) -> &[[i32; 3]] {
        &self.support
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{Background, BackgroundParams};
    use crate::first_order::{init_first_order, FirstOrderConfig, ModeSpec, Polarization};
    use crate::numerics::IntegratorSpec;
    use crate::second_order::sources::assemble_sources;

    #[test]
    fn canonical_half_space() {
        assert!(is_canonical([0, 0, 0]) && is_canonical([1, -3, 0]) && is_canonical([0, 0, 2]));
        assert!(!is_canonical([-1, 3, 0]) && !is_canonical([0, -1, 5]));
    }

    #[test]
    fn sparse_matches_grid_sources() {
        let grid = Grid3::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let bg = Background::dust(BackgroundParams::new(0.001, 0.01, 1.0).unwrap());
        let modes = vec![
            ModeSpec::scalar([1, 0, 0], 1e-3).with_rate(0.01),
            ModeSpec::scalar([0, 2, 1], 1e-3).with_phase(0.7),
            ModeSpec::vector([1, 1, 0], 5e-4, Polarization::Plus).with_phase(-0.3),
            ModeSpec::tensor([0, 1, 1], 1e-3, Polarization::Cross).with_phase(1.1),
        ];
        let fo = init_first_order(&FirstOrderConfig::new(modes), &grid, &bg).unwrap();
        let ev = fo
            .evolve(bg.tau0() / 10.0, &IntegratorSpec::adaptive(1e-14, 1e-12))
            .unwrap();
        let provider = FirstOrderSources::new(&ev);
        let tau = bg.tau0() / 4.0;
        let sparse = provider.sources(tau).unwrap();
        let rendered = sparse_to_grid(&grid, provider.support(), &sparse);
        let jet = ev.gamma_jet(tau).unwrap();
        let direct = assemble_sources(
            &jet,
            Some(&fo.gamma0()),
            Some(&fo.delta0_field()),
            sparse.conf_h,
            sparse.rho_a2,
        )
        .unwrap();
        let scale = direct.max_abs();
        assert!(scale > 0.0);
        for (a, b) in rendered.components().iter().zip(direct.components()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12 * scale, "{x} {y}");
            }
        }
    }
}
