//! Kinematics and curvature of the assembled perturbed metric
//! `h_ab = a^2 (d_ab + gamma1_ab + gamma2_ab / 2)` in synchronous comoving
//! form, with cosmic time `dt = a dtau`.

pub mod geometry;
pub mod report;

use rayon::prelude::*;

use crate::background::{background_spec, Background};
use crate::error::{Error, Result};
use crate::first_order::FirstOrderEvolution;
use crate::second_order::bilinear::SourceProvider;
use crate::second_order::evolve::{evolve_second_order, SecondOrderOptions, SecondOrderTrajectory};
use crate::spectral::{apply_derivative_symbol, Grid3, ScalarField, SymTensorField, SYM_INDEX, SYM_PAIRS};
use geometry::{point_diagnostics, PointDiagnostics, PointGeometry, M3};

pub use report::{convergence_report, ConvergenceReport, ReportConfig, Theta2Target};

/// Spatial metric and its conformal-time derivative at one instant.
#[derive(Debug, Clone)]
pub struct MetricSlice {
    pub tau: f64,
    pub a: f64,
    pub h: SymTensorField,
    pub h_prime: SymTensorField,
}

impl MetricSlice {
    /// `dh/dt = h' / a`.
    pub fn h_dot(&self) -> SymTensorField {
        let mut f = self.h_prime.clone();
        f.scale(1.0 / self.a);
        f
    }

    /// Extrinsic curvature `K_ab = (dh_ab/dt) / 2`.
    pub fn extrinsic(&self) -> SymTensorField {
        let mut f = self.h_prime.clone();
        f.scale(0.5 / self.a);
        f
    }
}

/// Anything that can produce the metric at a requested time.
pub trait MetricSource {
    fn grid(&self) -> &Grid3;
    fn slice(&self, tau: f64) -> Result<MetricSlice>;
}

fn assemble(
    grid: &Grid3,
    tau: f64,
    a: f64,
    conf_h: f64,
    gamma: &SymTensorField,
    gamma_p: &SymTensorField,
) -> MetricSlice {
    let a2 = a * a;
    let mut h = gamma.clone();
    h.add_isotropic(1.0, &ScalarField::constant(grid, 1.0));
    h.scale(a2);
    let mut h_prime = h.clone();
    h_prime.scale(2.0 * conf_h);
    h_prime.axpy(a2, gamma_p);
    MetricSlice { tau, a, h, h_prime }
}

/// Unperturbed metric `a^2 d_ab`.
pub struct BackgroundMetric {
    pub grid: Grid3,
    pub bg: Background,
}

impl MetricSource for BackgroundMetric {
    fn grid(&self) -> &Grid3 {
        &self.grid
    }

    fn slice(&self, tau: f64) -> Result<MetricSlice> {
        let taus: Vec<f64> = if tau > self.bg.tau0() {
            vec![self.bg.tau0(), tau]
        } else {
            vec![tau]
        };
        let st = *self.bg.evolve(&taus, &background_spec())?.last().expect("one state");
        let z = SymTensorField::zeros(&self.grid);
        Ok(assemble(&self.grid, tau, st.a, st.conf_h, &z, &z))
    }
}

/// Background plus first-order perturbation.
pub struct FirstOrderMetric<'a> {
    pub first: &'a FirstOrderEvolution,
}

impl MetricSource for FirstOrderMetric<'_> {
    fn grid(&self) -> &Grid3 {
        &self.first.setup.grid
    }

    fn slice(&self, tau: f64) -> Result<MetricSlice> {
        let jet = self.first.time_jet(tau)?;
        let g = self.first.setup.gamma_jet_from(&jet);
        Ok(assemble(self.grid(), tau, 1.0 / jet.y, -jet.dy / jet.y, &g.g, &g.p))
    }
}

/// Background plus first- and second-order perturbations. The second-order
/// part is evolved once for a fixed set of times.
pub struct FullMetric<'a> {
    pub first: &'a FirstOrderEvolution,
    pub second: SecondOrderTrajectory,
}

impl<'a> FullMetric<'a> {
    /// Evolves the second order at `taus` (sorted, inside the first-order
    /// coverage).
    pub fn new<P: SourceProvider + ?Sized>(
        first: &'a FirstOrderEvolution,
        provider: &P,
        bg: &Background,
        taus: &[f64],
        opts: &SecondOrderOptions,
    ) -> Result<Self> {
        Ok(Self {
            first,
            second: evolve_second_order(provider, bg, taus, opts)?,
        })
    }
}

impl MetricSource for FullMetric<'_> {
    fn grid(&self) -> &Grid3 {
        &self.first.setup.grid
    }

    fn slice(&self, tau: f64) -> Result<MetricSlice> {
        let i = self
            .second
            .taus
            .iter()
            .position(|t| (t - tau).abs() <= 1e-13 * tau.abs())
            .ok_or_else(|| Error::range(format!("second order not sampled at tau = {tau}")))?;
        let jet = self.first.time_jet(tau)?;
        let g1 = self.first.setup.gamma_jet_from(&jet);
        let s2 = self.second.state_on_grid(i);
        let mut g = g1.g;
        g.axpy(0.5, &s2.chi2);
        g.add_isotropic(-1.0, &s2.phi2);
        let mut gp = g1.p;
        gp.axpy(0.5, &s2.chi2_prime);
        gp.add_isotropic(-1.0, &s2.phi2_prime);
        Ok(assemble(self.grid(), tau, 1.0 / jet.y, -jet.dy / jet.y, &g, &gp))
    }
}

/// Five equally spaced times centred on `tau` with spacing `rel_step |tau|`.
pub fn stencil(tau: f64, rel_step: f64) -> [f64; 5] {
    let d = rel_step * tau.abs();
    [tau - 2.0 * d, tau - d, tau, tau + d, tau + 2.0 * d]
}

/// Expansion scalar and shear scalar `sigma^2 = sigma^a_b sigma^b_a / 2`.
pub fn expansion_and_shear(h: &SymTensorField, h_dot: &SymTensorField) -> Result<(ScalarField, ScalarField)> {
    let pts = pointwise(h, h_dot, None, false)?;
    let grid = &h.grid;
    Ok((
        ScalarField {
            grid: grid.clone(),
            data: pts.iter().map(|p| p.theta).collect(),
        },
        ScalarField {
            grid: grid.clone(),
            data: pts.iter().map(|p| p.sigma2).collect(),
        },
    ))
}

/// Ricci tensor and scalar of the 3-metric.
pub fn spatial_curvature(h: &SymTensorField) -> Result<(SymTensorField, ScalarField)> {
    let pts = pointwise(h, &SymTensorField::zeros(&h.grid), None, true)?;
    let grid = &h.grid;
    let mut ric = SymTensorField::zeros(grid);
    for (s, (a, b)) in SYM_PAIRS.iter().enumerate() {
        ric.comps[s] = pts.iter().map(|p| p.rstar_ab[*a][*b]).collect();
    }
    Ok((
        ric,
        ScalarField {
            grid: grid.clone(),
            data: pts.iter().map(|p| p.rstar).collect(),
        },
    ))
}

/// Kinematic scalars of the comoving dust congruence.
#[derive(Debug, Clone)]
pub struct KinematicScalars {
    pub theta: ScalarField,
    pub sigma2: ScalarField,
    /// Identically zero: the congruence is hypersurface orthogonal.
    pub omega2: ScalarField,
    pub rstar: ScalarField,
    pub r4: ScalarField,
}

/// Electric and magnetic parts of the Weyl tensor, lower indices.
#[derive(Debug, Clone)]
pub struct WeylParts {
    pub e: SymTensorField,
    pub h: SymTensorField,
}

/// All diagnostics at the centre of a five-point stencil.
#[derive(Debug, Clone)]
pub struct SliceDiagnostics {
    pub tau: f64,
    pub kinematics: KinematicScalars,
    pub weyl: WeylParts,
    /// Electric part from the Gauss equation, without time derivatives.
    pub e_gauss: SymTensorField,
    pub e_norm: ScalarField,
    pub h_norm: ScalarField,
    /// `sqrt(h)`, used for the dust density.
    pub sqrt_det: ScalarField,
}

/// Diagnostics from five equally spaced slices; the time derivative of the
/// extrinsic curvature is a fourth-order centred difference.
pub fn diagnose_stencil(slices: &[MetricSlice]) -> Result<SliceDiagnostics> {
    if slices.len() != 5 {
        return Err(Error::range(format!(
            "time stencil needs 5 slices, got {}",
            slices.len()
        )));
    }
    let d = slices[1].tau - slices[0].tau;
    for w in slices.windows(2) {
        if !(d > 0.0) || ((w[1].tau - w[0].tau) - d).abs() > 1e-9 * d {
            return Err(Error::range("time stencil must be equally spaced and increasing"));
        }
        if w[1].h.grid != w[0].h.grid {
            return Err(Error::input("stencil slices on different grids"));
        }
    }
    let ks: Vec<SymTensorField> = slices.iter().map(MetricSlice::extrinsic).collect();
    let c = &slices[2];
    let mut dtk = SymTensorField::zeros(&c.h.grid);
    for (w, k) in [1.0, -8.0, 0.0, 8.0, -1.0].iter().zip(&ks) {
        dtk.axpy(*w / (12.0 * d * c.a), k);
    }
    let pts = pointwise(&c.h, &c.h_dot(), Some(&dtk), true)?;
    let grid = c.h.grid.clone();
    let scalar = |f: &dyn Fn(&PointDiagnostics) -> f64| ScalarField {
        grid: grid.clone(),
        data: pts.iter().map(f).collect(),
    };
    let tensor = |f: &dyn Fn(&PointDiagnostics) -> M3| {
        let mut t = SymTensorField::zeros(&grid);
        for (i, p) in pts.iter().enumerate() {
            let m = f(p);
            for (s, (a, b)) in SYM_PAIRS.iter().enumerate() {
                t.comps[s][i] = m[*a][*b];
            }
        }
        t
    };
    let sqrt_det = ScalarField {
        grid: grid.clone(),
        data: (0..grid.len())
            .map(|i| geometry::inverse_pd(&c.h.at(i)).map_or(f64::NAN, |(_, s)| s))
            .collect(),
    };
    Ok(SliceDiagnostics {
        tau: c.tau,
        kinematics: KinematicScalars {
            theta: scalar(&|p| p.theta),
            sigma2: scalar(&|p| p.sigma2),
            omega2: ScalarField::zeros(&grid),
            rstar: scalar(&|p| p.rstar),
            r4: scalar(&|p| p.r4.unwrap_or(f64::NAN)),
        },
        weyl: WeylParts {
            e: tensor(&|p| p.e.unwrap_or(p.e_gauss)),
            h: tensor(&|p| p.h_mag),
        },
        e_gauss: tensor(&|p| p.e_gauss),
        e_norm: scalar(&|p| p.e_norm),
        h_norm: scalar(&|p| p.h_norm),
        sqrt_det,
    })
}

/// Weyl parts at the centre of a five-slice stencil.
pub fn weyl_parts(slices: &[MetricSlice]) -> Result<WeylParts> {
    Ok(diagnose_stencil(slices)?.weyl)
}

/// Diagnostics at `tau` from a metric source.
pub fn diagnose_at(source: &dyn MetricSource, tau: f64, rel_step: f64) -> Result<SliceDiagnostics> {
    let slices = stencil(tau, rel_step)
        .iter()
        .map(|t| source.slice(*t))
        .collect::<Result<Vec<_>>>()?;
    diagnose_stencil(&slices)
}

/// First spatial derivatives `[axis][component]` and second derivatives
/// `[axis pair][component]` of a symmetric tensor field.
fn derivatives(f: &SymTensorField, second: bool) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let grid = &f.grid;
    let specs: Vec<_> = f.comps.iter().map(|c| grid.forward(c)).collect();
    let apply = |s: usize, axes: &[usize]| {
        let mut sp = specs[s].clone();
        apply_derivative_symbol(grid, &mut sp, axes);
        grid.inverse(&sp)
    };
    let first = (0..18).into_par_iter().map(|i| apply(i % 6, &[i / 6])).collect();
    let second = if second {
        (0..36)
            .into_par_iter()
            .map(|i| {
                let (a, b) = SYM_PAIRS[i / 6];
                apply(i % 6, &[a, b])
            })
            .collect()
    } else {
        Vec::new()
    };
    (first, second)
}

fn pointwise(
    h: &SymTensorField,
    h_dot: &SymTensorField,
    dtk: Option<&SymTensorField>,
    curvature: bool,
) -> Result<Vec<PointDiagnostics>> {
    if h.grid != h_dot.grid || dtk.is_some_and(|d| d.grid != h.grid) {
        return Err(Error::input("diagnostic inputs on different grids"));
    }
    let mut k = h_dot.clone();
    k.scale(0.5);
    let (dh, ddh) = derivatives(h, curvature);
    let (dk, _) = if curvature {
        derivatives(&k, false)
    } else {
        (Vec::new(), Vec::new())
    };
    let zero = [[0.0; 3]; 3];
    (0..h.grid.len())
        .into_par_iter()
        .map(|i| {
            let first = |d: &Vec<Vec<f64>>| -> [M3; 3] {
                if d.is_empty() {
                    return [zero; 3];
                }
                std::array::from_fn(|c| std::array::from_fn(|a| std::array::from_fn(|b| d[6 * c + SYM_INDEX[a][b]][i])))
            };
            let ddh: [[M3; 3]; 3] = if ddh.is_empty() {
                [[zero; 3]; 3]
            } else {
                std::array::from_fn(|c| {
                    std::array::from_fn(|d| {
                        let pair = SYM_INDEX[c][d];
                        std::array::from_fn(|a| std::array::from_fn(|b| ddh[6 * pair + SYM_INDEX[a][b]][i]))
                    })
                })
            };
            let p = PointGeometry {
                h: h.at(i),
                dh: first(&dh),
                ddh,
                k: k.at(i),
                dk: first(&dk),
                dtk: dtk.map(|d| d.at(i)),
            };
            point_diagnostics(&p).ok_or(Error::MetricDegeneracy { index: i })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{log_tau_grid, BackgroundParams};
    use crate::first_order::{init_first_order, FirstOrderConfig, ModeSpec, Polarization};
    use crate::numerics::IntegratorSpec;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 0.001;

    fn grid(n: usize) -> Grid3 {
        Grid3::new(n, 2.0 * PI).unwrap()
    }

    fn de_sitter() -> Background {
        Background::asymptotic(LAMBDA, 0.0, -(3.0 / LAMBDA).sqrt()).unwrap()
    }

    fn dust() -> Background {
        Background::dust(BackgroundParams::new(LAMBDA, 0.01, 1.0).unwrap())
    }

    #[test]
    fn flrw_is_isotropic_flat_and_conformally_flat() {
        let bg = dust();
        let src = BackgroundMetric { grid: grid(8), bg };
        let tau = bg.tau0() / 3.0;
        let d = diagnose_at(&src, tau, 1e-3).unwrap();
        let s = src.slice(tau).unwrap();
        let conf_h = s.h_prime.comps[0][0] / (2.0 * s.h.comps[0][0]);
        let theta = 3.0 * conf_h / s.a;
        assert!(d
            .kinematics
            .theta
            .data
            .iter()
            .all(|t| (t - theta).abs() < 1e-14 * theta));
        assert!(d.kinematics.sigma2.max_abs() == 0.0);
        assert!(d.kinematics.rstar.max_abs() == 0.0);
        assert!(d.e_norm.max_abs() < 1e-8 * LAMBDA);
        assert!(d.h_norm.max_abs() == 0.0);
    }

    #[test]
    fn de_sitter_expansion() {
        let bg = de_sitter();
        let src = BackgroundMetric { grid: grid(8), bg };
        for tau in [bg.tau0() / 2.0, bg.tau0() / 50.0] {
            let d = diagnose_at(&src, tau, 1e-3).unwrap();
            for t in &d.kinematics.theta.data {
                assert!((t * t / (3.0 * LAMBDA) - 1.0).abs() < 1e-8);
            }
            for r in &d.kinematics.r4.data {
                assert!((r / (4.0 * LAMBDA) - 1.0).abs() < 1e-8);
            }
        }
    }

    fn tensor_run(eps: f64) -> FirstOrderEvolution {
        let modes = vec![ModeSpec::tensor([0, 0, 1], eps, Polarization::Plus)];
        let fo = init_first_order(&FirstOrderConfig::new(modes), &grid(8), &dust()).unwrap();
        fo.evolve(-1.0, &IntegratorSpec::adaptive(1e-15, 1e-13)).unwrap()
    }

    #[test]
    fn shear_is_quadratic_in_amplitude() {
        let (r1, r2) = (tensor_run(1e-4), tensor_run(2e-4));
        let tau = -10.0;
        let (_, s1) = {
            let s = FirstOrderMetric { first: &r1 }.slice(tau).unwrap();
            expansion_and_shear(&s.h, &s.h_dot()).unwrap()
        };
        let (_, s2) = {
            let s = FirstOrderMetric { first: &r2 }.slice(tau).unwrap();
            expansion_and_shear(&s.h, &s.h_dot()).unwrap()
        };
        let p = (s2.max_abs() / s1.max_abs()).log2();
        assert!((p - 2.0).abs() < 0.05, "{p}");
        assert!(s1.data.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn conformally_flat_curvature() {
        let g = grid(32);
        let (a, eps) = (3.0, 0.01);
        let f = ScalarField::from_fn(&g, |x| eps * (x[0] + 2.0 * x[1]).sin());
        let mut h = SymTensorField::zeros(&g);
        let conf = ScalarField {
            grid: g.clone(),
            data: f.data.iter().map(|v| a * a * (2.0 * v).exp()).collect(),
        };
        h.add_isotropic(1.0, &conf);
        let (_, r) = spatial_curvature(&h).unwrap();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (i, v) in r.data.iter().enumerate() {
            let x = g.coords(i);
            let ph = x[0] + 2.0 * x[1];
            let lap = -5.0 * eps * ph.sin();
            let grad2 = 5.0 * (eps * ph.cos()).powi(2);
            let exact = -(-2.0 * f.data[i]).exp() * (4.0 * lap + 2.0 * grad2) / (a * a);
            worst = worst.max((v - exact).abs());
            scale = scale.max(exact.abs());
        }
        assert!(worst < 1e-6 * scale, "{worst} {scale}");
    }

    /// Linear plus-polarized wave `eps cos(kz) (cos x + x sin x)`, `x = k tau`,
    /// on the De Sitter background.
    struct Wave {
        grid: Grid3,
        eps: f64,
        k: f64,
    }

    impl Wave {
        fn profile(&self, tau: f64) -> (f64, f64) {
            let x = self.k * tau;
            (x.cos() + x * x.sin(), self.k * x * x.cos())
        }
    }

    impl MetricSource for Wave {
        fn grid(&self) -> &Grid3 {
            &self.grid
        }

        fn slice(&self, tau: f64) -> Result<MetricSlice> {
            let a = -(3.0 / LAMBDA).sqrt() / tau;
            let (f, fp) = self.profile(tau);
            let c = ScalarField::from_fn(&self.grid, |x| self.eps * (self.k * x[2]).cos());
            let mut g = SymTensorField::zeros(&self.grid);
            let mut gp = SymTensorField::zeros(&self.grid);
            g.comps[0] = c.data.iter().map(|v| v * f).collect();
            g.comps[3] = c.data.iter().map(|v| -v * f).collect();
            gp.comps[0] = c.data.iter().map(|v| v * fp).collect();
            gp.comps[3] = c.data.iter().map(|v| -v * fp).collect();
            Ok(assemble(&self.grid, tau, a, -1.0 / tau, &g, &gp))
        }
    }

    #[test]
    fn linear_wave_weyl_parts() {
        let w = Wave {
            grid: grid(16),
            eps: 1e-7,
            k: 2.0,
        };
        let tau = -3.0;
        let slices: Vec<MetricSlice> = stencil(tau, 1e-3).iter().map(|t| w.slice(*t).unwrap()).collect();
        let d = diagnose_stencil(&slices).unwrap();
        let (f, fp) = w.profile(tau);
        let conf_h = -1.0 / tau;
        let (mut e_err, mut e_scale, mut h_err, mut h_scale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..w.grid.len() {
            let z = w.grid.coords(i)[2];
            let (c, s) = ((w.k * z).cos(), (w.k * z).sin());
            let e_xx = 0.5 * w.eps * c * (w.k * w.k * f + conf_h * fp);
            let h_xy = -0.5 * w.k * w.eps * s * fp;
            let e = d.weyl.e.at(i);
            let h = d.weyl.h.at(i);
            e_err = e_err
                .max((e[0][0] - e_xx).abs())
                .max((e[1][1] + e_xx).abs())
                .max(e[2][2].abs());
            h_err = h_err.max((h[0][1] - h_xy).abs()).max(h[0][0].abs()).max(h[2][2].abs());
            e_scale = e_scale.max(e_xx.abs());
            h_scale = h_scale.max(h_xy.abs());
        }
        assert!(e_err < 1e-5 * e_scale, "{e_err} {e_scale}");
        assert!(h_err < 1e-5 * h_scale, "{h_err} {h_scale}");
    }

    #[test]
    fn weyl_parts_are_tracefree() {
        let run = tensor_run(1e-3);
        let src = FirstOrderMetric { first: &run };
        let tau = -5.0;
        let d = diagnose_at(&src, tau, 1e-3).unwrap();
        let h = src.slice(tau).unwrap().h;
        let (e_max, h_max) = (d.e_norm.max_abs(), d.h_norm.max_abs());
        assert!(e_max > 0.0 && h_max > 0.0);
        for i in 0..h.grid.len() {
            let (hinv, _) = geometry::inverse_pd(&h.at(i)).unwrap();
            for (t, nrm) in [(d.weyl.e.at(i), e_max), (d.weyl.h.at(i), h_max)] {
                let tr: f64 = (0..3)
                    .flat_map(|a| (0..3).map(move |b| (a, b)))
                    .map(|(a, b)| hinv[a][b] * t[a][b])
                    .sum();
                assert!(tr.abs() <= 1e-10 * nrm, "{tr} {nrm}");
            }
        }
    }

    #[test]
    fn stencil_and_metric_errors() {
        let bg = dust();
        let src = BackgroundMetric { grid: grid(8), bg };
        let tau = bg.tau0() / 2.0;
        let mut slices: Vec<MetricSlice> = stencil(tau, 1e-3).iter().map(|t| src.slice(*t).unwrap()).collect();
        assert!(matches!(diagnose_stencil(&slices[..4]), Err(Error::Range(_))));
        for s in &mut slices {
            s.h.comps[0][3] = -1.0;
        }
        assert!(matches!(
            diagnose_stencil(&slices),
            Err(Error::MetricDegeneracy { index: 3 })
        ));
    }

    #[test]
    fn indicators_ignore_rigid_translation() {
        let run = tensor_run(1e-3);
        let src = FirstOrderMetric { first: &run };
        let tau = -5.0;
        let slices: Vec<MetricSlice> = stencil(tau, 1e-3).iter().map(|t| src.slice(*t).unwrap()).collect();
        let g = &slices[0].h.grid;
        let n = g.n();
        let shift = |f: &Vec<f64>| -> Vec<f64> {
            (0..f.len())
                .map(|i| {
                    let [x, y, z] = g.unindex(i);
                    f[g.index((x + 1) % n, (y + 3) % n, (z + 5) % n)]
                })
                .collect()
        };
        let moved: Vec<MetricSlice> = slices
            .iter()
            .map(|s| {
                let mut m = s.clone();
                m.h.comps = std::array::from_fn(|c| shift(&s.h.comps[c]));
                m.h_prime.comps = std::array::from_fn(|c| shift(&s.h_prime.comps[c]));
                m
            })
            .collect();
        let (d0, d1) = (diagnose_stencil(&slices).unwrap(), diagnose_stencil(&moved).unwrap());
        for (a, b) in [
            (d0.kinematics.sigma2.max_abs(), d1.kinematics.sigma2.max_abs()),
            (d0.kinematics.rstar.max_abs(), d1.kinematics.rstar.max_abs()),
            (d0.e_norm.max_abs(), d1.e_norm.max_abs()),
            (d0.h_norm.max_abs(), d1.h_norm.max_abs()),
        ] {
            assert!((a - b).abs() <= 1e-12 * a, "{a} {b}");
        }
    }

    #[test]
    fn vacuum_report_passes() {
        let bg = de_sitter();
        let src = BackgroundMetric { grid: grid(8), bg };
        let taus = log_tau_grid(bg.tau0(), 3.0, 31)[1..].to_vec();
        let r = convergence_report(&src, &bg, &taus, &ReportConfig::default()).unwrap();
        assert!(r.pass, "{:?}", r.indicators);
        assert_eq!(r.to_table().rows.len(), taus.len());
        let short = log_tau_grid(bg.tau0(), 1.0, 11)[1..].to_vec();
        assert!(matches!(
            convergence_report(&src, &bg, &short, &ReportConfig::default()),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn lambda_target_fails_honestly() {
        let bg = de_sitter();
        let src = BackgroundMetric { grid: grid(8), bg };
        let taus = log_tau_grid(bg.tau0(), 3.0, 31)[1..].to_vec();
        let cfg = ReportConfig {
            theta2_target: Theta2Target::Lambda,
            ..Default::default()
        };
        let r = convergence_report(&src, &bg, &taus, &cfg).unwrap();
        assert!(!r.pass);
        let ind = r.indicators.iter().find(|i| i.name == "theta2_limit").unwrap();
        assert!((ind.value - 2.0).abs() < 1e-6);
    }
}
