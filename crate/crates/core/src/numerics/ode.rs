//! Explicit Runge-Kutta integration: Dormand-Prince 5(4) with adaptive steps
//! and classical fixed-step RK4.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Adapter so plain closures can be integrated.
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        (self.f)(t, y, dy);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Largest allowed step; for `Rk4Fixed` this is the step.
    pub max_step: f64,
    pub min_step: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    5_000_000
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            max_steps: default_max_steps(),
        }
    }
}

impl IntegratorSpec {
    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn rk4(step: f64) -> Self {
        Self {
            method: Method::Rk4Fixed,
            max_step: step,
            ..Self::default()
        }
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::input("integrator tolerances must be positive"));
        }
        if !(self.min_step > 0.0) || !(self.min_step < self.max_step) {
            return Err(Error::input("integrator requires 0 < min_step < max_step"));
        }
        Ok(())
    }
}

/// Samples of a solution at requested output times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.y.iter().map(|y| y[i]).collect()
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Workspace {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: vec![vec![0.0; n]; 7],
            tmp: vec![0.0; n],
        }
    }
}

fn check_finite(t: f64, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteRhs { t })
    }
}

/// One Dormand-Prince step. `ws.k[0]` must hold `f(t, y)` on entry. On return
/// `y_new` holds the fifth-order solution, `ws.k[6]` holds `f(t+h, y_new)` and
/// the scaled error norm is returned.
fn dopri_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    h: f64,
    y_new: &mut [f64],
    ws: &mut Workspace,
    spec: &IntegratorSpec,
) -> Result<f64> {
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[s][..s].iter().enumerate() {
                acc += a * ws.k[j][i];
            }
            ws.tmp[i] = y[i] + h * acc;
        }
        let (head, tail) = ws.k.split_at_mut(s);
        let _ = head;
        sys.rhs(t + C[s] * h, &ws.tmp, &mut tail[0])?;
        check_finite(t + C[s] * h, &tail[0])?;
    }
    // Stage 7 evaluates at the fifth-order solution (FSAL).
    y_new.copy_from_slice(&ws.tmp);
    let mut err = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for (s, es) in E.iter().enumerate() {
            e += es * ws.k[s][i];
        }
        e *= h;
        let sc = spec.abs_tol + spec.rel_tol * y[i].abs().max(y_new[i].abs());
        err += (e / sc) * (e / sc);
    }
    Ok((err / n.max(1) as f64).sqrt())
}

fn rk4_step<S: OdeSystem + ?Sized>(sys: &S, t: f64, y: &mut [f64], h: f64, ws: &mut Workspace) -> Result<()> {
    let n = y.len();
    sys.rhs(t, y, &mut ws.k[0])?;
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k[0][i];
    }
    let (a, b) = ws.k.split_at_mut(1);
    sys.rhs(t + 0.5 * h, &ws.tmp, &mut b[0])?;
    let _ = a;
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k[1][i];
    }
    let (_, b) = ws.k.split_at_mut(2);
    sys.rhs(t + 0.5 * h, &ws.tmp, &mut b[0])?;
    for i in 0..n {
        ws.tmp[i] = y[i] + h * ws.k[2][i];
    }
    let (_, b) = ws.k.split_at_mut(3);
    sys.rhs(t + h, &ws.tmp, &mut b[0])?;
    for i in 0..n {
        y[i] += h / 6.0 * (ws.k[0][i] + 2.0 * ws.k[1][i] + 2.0 * ws.k[2][i] + ws.k[3][i]);
    }
    check_finite(t + h, y)
}

fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    spec: &IntegratorSpec,
) -> Result<f64> {
    let n = y0.len().max(1) as f64;
    let sc = |i: usize| spec.abs_tol + spec.rel_tol * y0[i].abs();
    let d0 = (y0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span).min(spec.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    sys.rhs(t0 + h0, &y1, &mut f1)?;
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / sc(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span).min(spec.max_step).max(spec.min_step))
}

/// Accepted adaptive steps; re-evaluating inside a step takes one
/// Dormand-Prince step from the step's start, so no interpolation is involved.
pub struct CheckpointedSolution<S> {
    sys: S,
    spec: IntegratorSpec,
    t: Vec<f64>,
    y: Vec<Vec<f64>>,
}

impl<S: OdeSystem> CheckpointedSolution<S> {
    pub fn system(&self) -> &S {
        &self.sys
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }

    /// State at `t` within the covered interval.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.t_start(), self.t_end());
        let tol = 1e-12 * (t1 - t0).abs().max(t0.abs());
        if t < t0 - tol || t > t1 + tol {
            return Err(Error::range(format!("t = {t} outside solution interval [{t0}, {t1}]")));
        }
        let idx = match self.t.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
            Ok(i) => return Ok(self.y[i].clone()),
            Err(i) => i.saturating_sub(1).min(self.t.len() - 2),
        };
        let h = t - self.t[idx];
        if h == 0.0 {
            return Ok(self.y[idx].clone());
        }
        let n = self.sys.dim();
        let mut ws = Workspace::new(n);
        self.sys.rhs(self.t[idx], &self.y[idx], &mut ws.k[0])?;
        let mut out = vec![0.0; n];
        dopri_step(&self.sys, self.t[idx], &self.y[idx], h, &mut out, &mut ws, &self.spec)?;
        Ok(out)
    }

    /// State and its time derivative at `t`.
    pub fn eval_with_rhs(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let y = self.eval(t)?;
        let mut dy = vec![0.0; y.len()];
        self.sys.rhs(t, &y, &mut dy)?;
        Ok((y, dy))
    }
}

fn validate_times(t0: f64, outputs: &[f64]) -> Result<()> {
    let mut prev = t0;
    for &t in outputs {
        if !t.is_finite() || t < prev {
            return Err(Error::input("output times must be finite and non-decreasing from t0"));
        }
        prev = t;
    }
    Ok(())
}

/// Adaptive integration from `t0` to `t_end` keeping every accepted step.
pub fn integrate_checkpointed<S: OdeSystem>(
    sys: S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    spec: IntegratorSpec,
) -> Result<CheckpointedSolution<S>> {
    spec.validate()?;
    if !(t_end > t0) {
        return Err(Error::input("integration interval must have t_end > t0"));
    }
    let mut ts = vec![t0];
    let mut ys = vec![y0.to_vec()];
    adaptive_drive(&sys, t0, y0, &[t_end], &spec, |t, y, _| {
        ts.push(t);
        ys.push(y.to_vec());
    })?;
    Ok(CheckpointedSolution {
        sys,
        spec,
        t: ts,
        y: ys,
    })
}

/// Integrates and samples the solution at `outputs` (non-decreasing, `>= t0`).
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    spec: &IntegratorSpec,
) -> Result<Trajectory> {
    spec.validate()?;
    validate_times(t0, outputs)?;
    if y0.len() != sys.dim() {
        return Err(Error::input("initial state length does not match system dimension"));
    }
    let mut traj = Trajectory {
        t: Vec::with_capacity(outputs.len()),
        y: Vec::with_capacity(outputs.len()),
    };
    match spec.method {
        Method::Rk4Fixed => {
            let mut ws = Workspace::new(y0.len());
            let mut y = y0.to_vec();
            let mut t = t0;
            for &target in outputs {
                let span = target - t;
                if span > 0.0 {
                    let nsteps = (span / spec.max_step).ceil().max(1.0) as usize;
                    let h = span / nsteps as f64;
                    for i in 0..nsteps {
                        let ti = t + i as f64 * h;
                        rk4_step(sys, ti, &mut y, h, &mut ws)?;
                    }
                    t = target;
                }
                traj.t.push(target);
                traj.y.push(y.clone());
            }
        }
        Method::Rk45Adaptive => {
            let mut pending = outputs.iter().copied().peekable();
            while let Some(&t) = pending.peek() {
                if t == t0 {
                    traj.t.push(t);
                    traj.y.push(y0.to_vec());
                    pending.next();
                } else {
                    break;
                }
            }
            let rest: Vec<f64> = pending.collect();
            if !rest.is_empty() {
                adaptive_drive(sys, t0, y0, &rest, spec, |t, y, at_output| {
                    if at_output {
                        traj.t.push(t);
                        traj.y.push(y.to_vec());
                    }
                })?;
            }
        }
    }
    Ok(traj)
}

/// Core adaptive loop; steps are clipped to land on every output time.
fn adaptive_drive<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    spec: &IntegratorSpec,
    mut on_step: impl FnMut(f64, &[f64], bool),
) -> Result<()> {
    let n = y0.len();
    let mut ws = Workspace::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut t = t0;
    sys.rhs(t, &y, &mut ws.k[0])?;
    check_finite(t, &ws.k[0])?;
    let t_final = *outputs.last().unwrap();
    let mut h = initial_step(sys, t, &y, &ws.k[0].clone(), t_final - t, spec)?;
    let mut steps = 0usize;
    for &target in outputs {
        while t < target {
            if steps >= spec.max_steps {
                return Err(Error::Divergence {
                    last_tau: t,
                    reason: "maximum step count exceeded".into(),
                });
            }
            let remaining = target - t;
            let mut hs = h.min(spec.max_step);
            let mut lands = false;
            if hs >= remaining * (1.0 - 1e-12) {
                hs = remaining;
                lands = true;
            }
            let err = dopri_step(sys, t, &y, hs, &mut y_new, &mut ws, spec);
            let err = match err {
                Ok(e) => e,
                Err(Error::NonFiniteRhs { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            steps += 1;
            if err <= 1.0 {
                t = if lands { target } else { t + hs };
                std::mem::swap(&mut y, &mut y_new);
                let k6 = std::mem::take(&mut ws.k[6]);
                ws.k[0].copy_from_slice(&k6);
                ws.k[6] = k6;
                on_step(t, &y, lands);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !lands || hs == h {
                    h = hs * fac;
                }
            } else {
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = hs * fac;
                if h < spec.min_step {
                    return Err(Error::Divergence {
                        last_tau: t,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sys = FnSystem::new(1, |_t, y: &[f64], dy: &mut [f64]| dy[0] = -y[0]);
        let tr = integrate(&sys, 0.0, &[1.0], &[1.0], &IntegratorSpec::default()).unwrap();
        assert!((tr.y[0][0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_energy_over_hundred_periods() {
        let sys = FnSystem::new(2, |_t, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        });
        let t_end = 200.0 * std::f64::consts::PI;
        let spec = IntegratorSpec::adaptive(1e-14, 1e-13);
        let tr = integrate(&sys, 0.0, &[1.0, 0.0], &[t_end], &spec).unwrap();
        let e = 0.5 * (tr.y[0][0].powi(2) + tr.y[0][1].powi(2));
        assert!((e - 0.5).abs() / 0.5 < 1e-8, "energy drift {}", (e - 0.5).abs() / 0.5);
    }

    #[test]
    fn rk4_fourth_order() {
        let sys = FnSystem::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * t.cos());
        let exact = (2.0f64).sin().exp();
        let err = |h: f64| {
            let tr = integrate(&sys, 0.0, &[1.0], &[2.0], &IntegratorSpec::rk4(h)).unwrap();
            (tr.y[0][0] - exact).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.6, "ratio {ratio}");
    }

    #[test]
    fn rk4_is_deterministic() {
        let sys = FnSystem::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = (t * y[0]).sin());
        let a = integrate(&sys, 0.0, &[0.3], &[0.5, 1.0, 3.0], &IntegratorSpec::rk4(0.01)).unwrap();
        let b = integrate(&sys, 0.0, &[0.3], &[0.5, 1.0, 3.0], &IntegratorSpec::rk4(0.01)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_eval_matches_direct_sampling() {
        let sys = FnSystem::new(2, |_t, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -4.0 * y[0];
        });
        let spec = IntegratorSpec::adaptive(1e-13, 1e-12);
        let sol = integrate_checkpointed(sys, 0.0, &[1.0, 0.0], 5.0, spec).unwrap();
        for &t in &[0.0, 0.123, 1.7, 3.3333, 5.0] {
            let y = sol.eval(t).unwrap();
            assert!((y[0] - (2.0 * t).cos()).abs() < 1e-10, "t={t}");
        }
        assert!(sol.eval(5.5).is_err());
    }

    #[test]
    fn nan_rhs_is_reported() {
        let sys = FnSystem::new(1, |_t, _y: &[f64], dy: &mut [f64]| dy[0] = f64::NAN);
        let r = integrate(&sys, 0.0, &[1.0], &[1.0], &IntegratorSpec::default());
        assert!(matches!(r, Err(Error::NonFiniteRhs { .. })));
    }
}
