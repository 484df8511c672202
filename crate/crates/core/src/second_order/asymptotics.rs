//! Late-time constants of the second-order fields.
//!
//! Every tracked series is fitted to `c + b tau^2` over the final decade of
//! the trajectory. The decay order comes from consecutive differences
//! `|f(tau_i) - f(tau_{i+1})|`, which scale like `|tau_i|^p` on log-spaced
//! samples independently of `c`.

use num_complex::Complex64 as C;
use serde::Serialize;

use super::evolve::{mat, wavevectors, SecondOrderTrajectory};
use crate::error::{Error, Result};
use crate::spectral::svt::split_mode;
use crate::spectral::{svt_decompose, Grid3, ScalarField, SvtParts, SymTensorField, VectorField, SYM_PAIRS};
use crate::table::Table;

pub const MIN_ASYMPTOTIC_SAMPLES: usize = 8;

/// Fitted orders outside this range flag the fit as failed.
pub const ORDER_RANGE: (f64, f64) = (1.0, 3.0);

/// Indices of the samples in the final decade, `|tau| <= 10 |tau_end|`.
pub fn asymptotic_window(taus: &[f64]) -> Result<std::ops::Range<usize>> {
    let (first, last) = match (taus.first(), taus.last()) {
        (Some(a), Some(b)) => (a.abs(), b.abs()),
        _ => return Err(Error::range("empty trajectory")),
    };
    if last > first / 100.0 {
        return Err(Error::range(format!(
            "trajectory ends at |tau| = {last}, needs <= {}",
            first / 100.0
        )));
    }
    let start = taus.iter().position(|t| t.abs() <= 10.0 * last).unwrap_or(taus.len());
    let n = taus.len() - start;
    if n < MIN_ASYMPTOTIC_SAMPLES {
        return Err(Error::range(format!(
            "{n} samples in the final decade, need {MIN_ASYMPTOTIC_SAMPLES}"
        )));
    }
    Ok(start..taus.len())
}

/// Least-squares `(c, b)` of `c + b tau^2`.
fn fit_quadratic(taus: &[f64], vals: &[f64]) -> (f64, f64) {
    let scale = taus.iter().fold(0.0f64, |m, t| m.max(t * t));
    let x: Vec<f64> = taus.iter().map(|t| t * t / scale).collect();
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sy: f64 = vals.iter().sum();
    let sxy: f64 = x.iter().zip(vals).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    if det == 0.0 {
        return (sy / n, 0.0);
    }
    ((sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det / scale)
}

/// Slope of `log |f_i - f_{i+1}|` against `log |tau_i|`; NaN when the series
/// does not vary.
fn decay_order(taus: &[f64], diffs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(diffs)
        .filter(|(t, d)| **d > 0.0 && **t != 0.0)
        .map(|(t, d)| (t.abs().ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Fit of one real series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesFit {
    pub constant: f64,
    pub tau2_coefficient: f64,
    pub order: f64,
}

/// Fits a real series over its final decade.
pub fn fit_series(taus: &[f64], values: &[f64]) -> Result<SeriesFit> {
    if taus.len() != values.len() {
        return Err(Error::input("one value per sample time required"));
    }
    let w = asymptotic_window(taus)?;
    let (t, v) = (&taus[w.clone()], &values[w]);
    let (constant, tau2_coefficient) = fit_quadratic(t, v);
    let diffs: Vec<f64> = v.windows(2).map(|p| (p[0] - p[1]).abs()).collect();
    Ok(SeriesFit {
        constant,
        tau2_coefficient,
        order: decay_order(&t[..t.len() - 1], &diffs),
    })
}

/// Constants of a block of complex series (`series[i][c]` at sample `i`,
/// component `c`) and their common decay order from the sup-norm of the
/// consecutive differences.
fn fit_block(taus: &[f64], series: &[Vec<C>]) -> (Vec<C>, f64) {
    let m = series.first().map_or(0, |s| s.len());
    let consts = (0..m)
        .map(|c| {
            let re: Vec<f64> = series.iter().map(|s| s[c].re).collect();
            let im: Vec<f64> = series.iter().map(|s| s[c].im).collect();
            C::new(fit_quadratic(taus, &re).0, fit_quadratic(taus, &im).0)
        })
        .collect();
    let diffs: Vec<f64> = series
        .windows(2)
        .map(|p| {
            p[0].iter()
                .zip(&p[1])
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()))
        })
        .collect();
    (consts, decay_order(&taus[..taus.len().saturating_sub(1)], &diffs))
}

/// Decay orders of the individually fitted quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOrders {
    pub phi: f64,
    pub chi: f64,
    pub q: f64,
    pub g: f64,
    pub z: f64,
    pub pi: f64,
}

impl FitOrders {
    fn all(&self) -> [f64; 6] {
        [self.phi, self.chi, self.q, self.g, self.z, self.pi]
    }
}

/// Late-time constants of a second-order run, stored per support mode.
#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub grid: Grid3,
    pub support: Vec<[i32; 3]>,
    /// `A^2` of the background.
    pub a2: f64,
    pub l_over_a2: Vec<C>,
    /// Divergence `d_a chi_ab`.
    pub q: Vec<[C; 3]>,
    /// Double divergence `d_a d_b chi_ab`.
    pub g: Vec<C>,
    pub chi: Vec<[C; 6]>,
    pub z: Vec<[C; 3]>,
    pub pi: Vec<[C; 6]>,
    /// `|k|` times the constant of the tensor potential per mode.
    pub e_amp: Vec<[C; 6]>,
    pub orders: FitOrders,
    /// Decay order of the scalar fit.
    pub fitted_order: f64,
    /// False when any measured order falls outside [`ORDER_RANGE`].
    pub converged: bool,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits `phi2`, the divergences of `chi2`, its vector and tensor parts and
/// the per-mode tensor amplitudes. `a2` is `A^2` of the background.
pub fn fit_asymptotics(traj: &SecondOrderTrajectory, a2: f64) -> Result<AsymptoticFit> {
    let w = asymptotic_window(&traj.taus)?;
    let taus = &traj.taus[w.clone()];
    let states = &traj.states[w];
    let ks = wavevectors(&traj.grid, &traj.support);
    let n = ks.len();
    let mut phi_s = Vec::new();
    let mut chi_s = Vec::new();
    let mut q_s = Vec::new();
    let mut g_s = Vec::new();
    let mut z_s = Vec::new();
    let mut pi_s = Vec::new();
    for st in states {
        phi_s.push(st.phi.clone());
        let mut chi = Vec::with_capacity(6 * n);
        let mut q = Vec::with_capacity(3 * n);
        let mut g = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(3 * n);
        let mut pi = Vec::with_capacity(6 * n);
        for (k, c) in ks.iter().zip(&st.chi) {
            let (qk, gk, zk, pik) = derived(k, c);
            chi.extend_from_slice(c);
            q.extend_from_slice(&qk);
            g.push(gk);
            z.extend_from_slice(&zk);
            pi.extend_from_slice(&pik);
        }
        chi_s.push(chi);
        q_s.push(q);
        g_s.push(g);
        z_s.push(z);
        pi_s.push(pi);
    }
    let (phi_c, phi_o) = fit_block(taus, &phi_s);
    let (chi_c, chi_o) = fit_block(taus, &chi_s);
    let (q_c, q_o) = fit_block(taus, &q_s);
    let (g_c, g_o) = fit_block(taus, &g_s);
    let (z_c, z_o) = fit_block(taus, &z_s);
    let (pi_c, pi_o) = fit_block(taus, &pi_s);
    let orders = FitOrders {
        phi: phi_o,
        chi: chi_o,
        q: q_o,
        g: g_o,
        z: z_o,
        pi: pi_o,
    };
    let converged = orders
        .all()
        .iter()
        .filter(|o| !o.is_nan())
        .all(|o| *o >= ORDER_RANGE.0 && *o <= ORDER_RANGE.1);
    let chi: Vec<[C; 6]> = (0..n).map(|j| std::array::from_fn(|s| chi_c[6 * j + s])).collect();
    let e_amp = ks
        .iter()
        .zip(&chi)
        .map(|(k, c)| {
            let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            c.map(|v| v * kn)
        })
        .collect();
    Ok(AsymptoticFit {
        grid: traj.grid.clone(),
        support: traj.support.clone(),
        a2,
        l_over_a2: phi_c,
        q: (0..n).map(|j| std::array::from_fn(|b| q_c[3 * j + b])).collect(),
        g: g_c,
        chi,
        z: (0..n).map(|j| std::array::from_fn(|b| z_c[3 * j + b])).collect(),
        pi: (0..n).map(|j| std::array::from_fn(|s| pi_c[6 * j + s])).collect(),
        e_amp,
        orders,
        fitted_order: phi_o,
        converged,
        window: (taus[0], *taus.last().unwrap()),
        samples: taus.len(),
    })
}

/// Divergence, double divergence, vector and tensor parts of one mode.
fn derived(k: &[f64; 3], c: &[C; 6]) -> ([C; 3], C, [C; 3], [C; 6]) {
    let i = C::new(0.0, 1.0);
    let m = mat(c);
    let q: [C; 3] = std::array::from_fn(|b| (0..3).map(|a| i * k[a] * m[a][b]).sum());
    let g: C = (0..3).map(|b| i * k[b] * q[b]).sum();
    let mut t = m;
    let third = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    for a in 0..3 {
        t[a][a] -= third;
    }
    let (_, z, pi) = split_mode(*k, &t);
    (q, g, z, std::array::from_fn(|s| pi[SYM_PAIRS[s].0][SYM_PAIRS[s].1]))
}

fn to_grid(grid: &Grid3, support: &[[i32; 3]], f: impl Fn(usize) -> C) -> Vec<f64> {
    super::evolve::modal_to_grid(grid, support, f)
}

impl AsymptoticFit {
    pub fn l_over_a2_field(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: to_grid(&self.grid, &self.support, |j| self.l_over_a2[j]),
        }
    }

    pub fn l_field(&self) -> ScalarField {
        let mut f = self.l_over_a2_field();
        f.scale(self.a2);
        f
    }

    pub fn q_field(&self) -> VectorField {
        VectorField {
            grid: self.grid.clone(),
            comps: std::array::from_fn(|b| to_grid(&self.grid, &self.support, |j| self.q[j][b])),
        }
    }

    pub fn g_field(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: to_grid(&self.grid, &self.support, |j| self.g[j]),
        }
    }

    pub fn z_field(&self) -> VectorField {
        VectorField {
            grid: self.grid.clone(),
            comps: std::array::from_fn(|b| to_grid(&self.grid, &self.support, |j| self.z[j][b])),
        }
    }

    pub fn pi_field(&self) -> SymTensorField {
        SymTensorField {
            grid: self.grid.clone(),
            comps: std::array::from_fn(|s| to_grid(&self.grid, &self.support, |j| self.pi[j][s])),
        }
    }

    /// Per-mode table: mode numbers, `|k|`, real and imaginary parts of the
    /// six `E_ab` components.
    pub fn e_amp_table(&self) -> Table {
        let mut header: Vec<String> = ["mx", "my", "mz", "k"].iter().map(|s| s.to_string()).collect();
        for part in ["re", "im"] {
            for (a, b) in SYM_PAIRS {
                header.push(format!("E{a}{b}_{part}"));
            }
        }
        let mut t = Table::new(&header);
        for ((m, k), e) in self
            .support
            .iter()
            .zip(wavevectors(&self.grid, &self.support))
            .zip(&self.e_amp)
        {
            let mut row = vec![
                m[0] as f64,
                m[1] as f64,
                m[2] as f64,
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt(),
            ];
            row.extend(e.iter().map(|v| v.re));
            row.extend(e.iter().map(|v| v.im));
            t.push(row).expect("row matches header");
        }
        t
    }

    /// JSON export with the modal coefficients of `L`, `L/A^2`, `Q`, `G`,
    /// the `E` amplitudes and the measured orders.
    pub fn to_json(&self) -> serde_json::Value {
        let modes = |vals: &dyn Fn(usize) -> Vec<C>| -> serde_json::Value {
            self.support
                .iter()
                .enumerate()
                .map(|(j, m)| {
                    let v = vals(j);
                    serde_json::json!({
                        "mode": m,
                        "re": v.iter().map(|c| c.re).collect::<Vec<_>>(),
                        "im": v.iter().map(|c| c.im).collect::<Vec<_>>(),
                    })
                })
                .collect()
        };
        serde_json::json!({
            "L": modes(&|j| vec![self.l_over_a2[j] * self.a2]),
            "L_over_A2": modes(&|j| vec![self.l_over_a2[j]]),
            "Q": modes(&|j| self.q[j].to_vec()),
            "G": modes(&|j| vec![self.g[j]]),
            "E_amp": modes(&|j| self.e_amp[j].to_vec()),
            "fitted_order": self.fitted_order,
            "orders": self.orders,
            "converged": self.converged,
            "A2": self.a2,
            "window": [self.window.0, self.window.1],
            "samples": self.samples,
        })
    }
}

/// Scalar, vector and tensor parts of a second-order tensor potential.
pub fn split_chi2(chi2: &SymTensorField) -> Result<SvtParts> {
    svt_decompose(chi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::log_tau_grid;
    use crate::spectral::{spectral_derivative, SYM_INDEX};
    use std::f64::consts::PI;

    fn taus() -> Vec<f64> {
        log_tau_grid(-1.0, 2.0, 41)
    }

    #[test]
    fn exact_quadratic_model() {
        let t = taus();
        let v: Vec<f64> = t.iter().map(|t| 5.0 + 3.0 * t * t).collect();
        let f = fit_series(&t, &v).unwrap();
        assert!((f.constant - 5.0).abs() < 1e-12);
        assert!((f.tau2_coefficient - 3.0).abs() < 1e-9);
        assert!((f.order - 2.0).abs() < 1e-9, "{}", f.order);
    }

    #[test]
    fn cubic_contamination() {
        let t = taus();
        let v: Vec<f64> = t.iter().map(|t| 5.0 + 3.0 * t * t + t * t * t).collect();
        let f = fit_series(&t, &v).unwrap();
        assert!((f.constant - 5.0).abs() < 1e-3, "{}", f.constant);
        assert!((f.order - 2.0).abs() < 0.2);
    }

    #[test]
    fn constant_series_has_no_order() {
        let t = taus();
        let f = fit_series(&t, &vec![1.5; t.len()]).unwrap();
        assert_eq!(f.constant, 1.5);
        assert!(f.order.is_nan());
    }

    #[test]
    fn short_or_early_trajectories_are_rejected() {
        let t = log_tau_grid(-1.0, 1.0, 41);
        assert!(matches!(fit_series(&t, &vec![0.0; 41]), Err(Error::Range(_))));
        let t = log_tau_grid(-1.0, 2.0, 9);
        assert!(matches!(fit_series(&t, &[0.0; 9]), Err(Error::Range(_))));
        assert!(fit_series(&taus(), &[1.0]).is_err());
    }

    #[test]
    fn linear_decay_is_flagged_by_order() {
        let t = taus();
        let v: Vec<f64> = t.iter().map(|t| 1.0 + t).collect();
        assert!((fit_series(&t, &v).unwrap().order - 1.0).abs() < 1e-9);
    }

    fn grid() -> Grid3 {
        Grid3::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn pure_tensor_has_no_vector_part() {
        let g = grid();
        let pi = SymTensorField::from_fn(&g, |x| {
            let s = (2.0 * x[2]).sin();
            let c = 0.5 * (x[2] + 0.3).cos();
            [[s, c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]]
        });
        let parts = split_chi2(&pi).unwrap();
        assert!(parts.z.max_abs() < 1e-10);
        let mut d = parts.pi.clone();
        d.axpy(-1.0, &pi);
        assert!(d.max_abs() < 1e-10);
    }

    #[test]
    fn pure_gradient_has_no_tensor_part() {
        let g = grid();
        let z = VectorField {
            grid: g.clone(),
            comps: [
                ScalarField::from_fn(&g, |x| (x[1] + 2.0 * x[2]).sin()).data,
                ScalarField::from_fn(&g, |x| (x[0] - x[2]).cos()).data,
                ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin()).data,
            ],
        };
        let mut chi = SymTensorField::zeros(&g);
        for a in 0..3 {
            for b in a..3 {
                let za = ScalarField {
                    grid: g.clone(),
                    data: z.comps[a].clone(),
                };
                let zb = ScalarField {
                    grid: g.clone(),
                    data: z.comps[b].clone(),
                };
                let dab = spectral_derivative(&zb, &[a]).unwrap();
                let dba = spectral_derivative(&za, &[b]).unwrap();
                chi.comps[SYM_INDEX[a][b]] = dab.data.iter().zip(&dba.data).map(|(p, q)| p + q).collect();
            }
        }
        let parts = split_chi2(&chi).unwrap();
        assert!(parts.pi.max_abs() < 1e-10);
        assert!(parts.trace.max_abs() < 1e-10);
    }
}
