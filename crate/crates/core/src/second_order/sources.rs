//! Sources evaluated on the grid with spectral derivatives and 2/3-rule
//! dealiased products.

use num_complex::Complex64;
use rayon::prelude::*;

use super::pointwise::{point_sources, PointJet, PointSources, SourceParts};
use crate::error::{Error, Result};
use crate::first_order::GammaJet;
use crate::spectral::{
    apply_derivative_symbol, dealias, Grid3, ScalarField, SymTensorField, VectorField, SYM_INDEX, SYM_PAIRS,
};

/// The four second-order sources on the grid. `n4` holds the mixed tensor
/// with its index lowered by the flat metric.
#[derive(Debug, Clone)]
pub struct SourceTerms {
    pub tau: f64,
    pub n1: ScalarField,
    pub n2: ScalarField,
    pub n3: VectorField,
    pub n4: SymTensorField,
}

impl SourceTerms {
    pub fn zeros(grid: &Grid3, tau: f64) -> Self {
        Self {
            tau,
            n1: ScalarField::zeros(grid),
            n2: ScalarField::zeros(grid),
            n3: VectorField::zeros(grid),
            n4: SymTensorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.n1.grid
    }

    /// Components in the order `n1, n2, n3_0..2, n4` (six stored slots).
    pub fn components(&self) -> [&[f64]; 11] {
        let n4 = &self.n4.comps;
        [
            &self.n1.data,
            &self.n2.data,
            &self.n3.comps[0],
            &self.n3.comps[1],
            &self.n3.comps[2],
            &n4[0],
            &n4[1],
            &n4[2],
            &n4[3],
            &n4[4],
            &n4[5],
        ]
    }

    pub fn components_mut(&mut self) -> [&mut Vec<f64>; 11] {
        let [a, b, c, d, e, f] = &mut self.n4.comps;
        let [x, y, z] = &mut self.n3.comps;
        [&mut self.n1.data, &mut self.n2.data, x, y, z, a, b, c, d, e, f]
    }

    pub fn max_abs(&self) -> f64 {
        self.n1
            .max_abs()
            .max(self.n2.max_abs())
            .max(self.n3.max_abs())
            .max(self.n4.max_abs())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        self.n1.ensure_finite()?;
        self.n2.ensure_finite()?;
        self.n3.ensure_finite()?;
        self.n4.ensure_finite()
    }

    /// Trace of the evolution-equation source.
    pub fn n4_trace(&self) -> ScalarField {
        self.n4.trace()
    }

    pub fn axpy(&mut self, s: f64, other: &SourceTerms) {
        let src = other.components();
        for (dst, src) in self.components_mut().into_iter().zip(src) {
            for (x, y) in dst.iter_mut().zip(src) {
                *x += s * y;
            }
        }
    }
}

/// Sources split by background coefficient.
#[derive(Debug, Clone)]
pub struct SourceFieldParts {
    pub plain: SourceTerms,
    pub hubble: SourceTerms,
    pub density: SourceTerms,
}

impl SourceFieldParts {
    pub fn combine(&self, conf_h: f64, rho_a2: f64) -> SourceTerms {
        let mut out = self.plain.clone();
        out.axpy(conf_h, &self.hubble);
        out.axpy(rho_a2, &self.density);
        out
    }
}

fn band_limited(grid: &Grid3, v: &[f64]) -> Vec<Complex64> {
    let mut s = grid.forward(v);
    dealias(grid, &mut s);
    s
}

fn derivative(grid: &Grid3, spec: &[Complex64], axes: &[usize]) -> Vec<f64> {
    let mut s = spec.to_vec();
    apply_derivative_symbol(grid, &mut s, axes);
    grid.inverse(&s)
}

fn filtered(grid: &Grid3, v: &mut Vec<f64>) {
    *v = grid.inverse(&band_limited(grid, v));
}

struct GridJet {
    g: [Vec<f64>; 6],
    dg: [[Vec<f64>; 6]; 3],
    ddg: [[Vec<f64>; 6]; 6],
    p: [Vec<f64>; 6],
    dp: [[Vec<f64>; 6]; 3],
    pp: [Vec<f64>; 6],
    g0: [Vec<f64>; 6],
    d0: Vec<f64>,
}

impl GridJet {
    fn new(jet: &GammaJet, g0: &SymTensorField, d0: &ScalarField) -> Self {
        let grid = &jet.g.grid;
        let gs: Vec<Vec<Complex64>> = jet.g.comps.iter().map(|c| band_limited(grid, c)).collect();
        let ps: Vec<Vec<Complex64>> = jet.p.comps.iter().map(|c| band_limited(grid, c)).collect();
        let back = |s: &[Vec<Complex64>]| -> [Vec<f64>; 6] { std::array::from_fn(|i| grid.inverse(&s[i])) };
        let pair = |q: usize| SYM_PAIRS[q];
        Self {
            g: back(&gs),
            dg: std::array::from_fn(|c| std::array::from_fn(|s| derivative(grid, &gs[s], &[c]))),
            ddg: std::array::from_fn(|q| {
                let (c, d) = pair(q);
                std::array::from_fn(|s| derivative(grid, &gs[s], &[c, d]))
            }),
            p: back(&ps),
            dp: std::array::from_fn(|c| std::array::from_fn(|s| derivative(grid, &ps[s], &[c]))),
            pp: std::array::from_fn(|s| grid.inverse(&band_limited(grid, &jet.pp.comps[s]))),
            g0: std::array::from_fn(|s| grid.inverse(&band_limited(grid, &g0.comps[s]))),
            d0: grid.inverse(&band_limited(grid, &d0.data)),
        }
    }

    fn at(&self, i: usize) -> PointJet<f64> {
        let m = |c: &[Vec<f64>; 6]| -> [[f64; 3]; 3] {
            std::array::from_fn(|a| std::array::from_fn(|b| c[SYM_INDEX[a][b]][i]))
        };
        PointJet {
            g: m(&self.g),
            dg: std::array::from_fn(|c| m(&self.dg[c])),
            ddg: std::array::from_fn(|c| std::array::from_fn(|d| m(&self.ddg[SYM_INDEX[c][d]]))),
            p: m(&self.p),
            dp: std::array::from_fn(|c| m(&self.dp[c])),
            pp: m(&self.pp),
            g0: m(&self.g0),
            d0: self.d0[i],
        }
    }
}

fn scatter(grid: &Grid3, tau: f64, vals: &[[f64; 11]]) -> SourceTerms {
    let mut out = SourceTerms::zeros(grid, tau);
    for (slot, dst) in out.components_mut().into_iter().enumerate() {
        for (d, v) in dst.iter_mut().zip(vals) {
            *d = v[slot];
        }
        filtered(grid, dst);
    }
    out
}

/// Sources on the grid split by background coefficient.
///
/// `g0` is the first-order perturbation at the initial time and `delta0` the
/// initial density contrast; `delta0` without `g0` is rejected.
pub fn assemble_source_parts(
    jet: &GammaJet,
    g0: Option<&SymTensorField>,
    delta0: Option<&ScalarField>,
) -> Result<SourceFieldParts> {
    let grid = &jet.g.grid;
    grid.ensure_same(&jet.p.grid)?;
    grid.ensure_same(&jet.pp.grid)?;
    if delta0.is_some() && g0.is_none() {
        return Err(Error::input(
            "initial density contrast given without the initial first-order snapshot",
        ));
    }
    let zero_t = SymTensorField::zeros(grid);
    let zero_s = ScalarField::zeros(grid);
    let g0 = g0.unwrap_or(&zero_t);
    let d0 = delta0.unwrap_or(&zero_s);
    grid.ensure_same(&g0.grid)?;
    grid.ensure_same(&d0.grid)?;
    for f in [&jet.g, &jet.p, &jet.pp, g0] {
        f.ensure_finite()?;
    }
    d0.ensure_finite()?;
    let gj = GridJet::new(jet, g0, d0);
    let vals: Vec<SourceParts<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| point_sources(&gj.at(i)))
        .collect();
    let pick = |f: fn(&SourceParts<f64>) -> &PointSources<f64>| -> Vec<[f64; 11]> {
        vals.iter().map(|v| f(v).to_array()).collect()
    };
    Ok(SourceFieldParts {
        plain: scatter(grid, jet.tau, &pick(|v| &v.plain)),
        hubble: scatter(grid, jet.tau, &pick(|v| &v.hubble)),
        density: scatter(grid, jet.tau, &pick(|v| &v.density)),
    })
}

/// Sources on the grid for background values `conf_h = a'/a` and
/// `rho_a2 = rho_B a^2`.
pub fn assemble_sources(
    jet: &GammaJet,
    g0: Option<&SymTensorField>,
    delta0: Option<&ScalarField>,
    conf_h: f64,
    rho_a2: f64,
) -> Result<SourceTerms> {
    Ok(assemble_source_parts(jet, g0, delta0)?.combine(conf_h, rho_a2))
}
