//! Flat dust FLRW background with a positive cosmological constant, evolved
//! in conformal time.
//!
//! Conformal time runs over negative values and the far future is
//! `tau -> 0-`. Internally the evolved variable is `y = 1/a`, which obeys
//! `y' = -sqrt((M y^3 + Lambda) / 3)` with `M = rho0 a0^3`; this stays smooth
//! up to the future singularity where `y` vanishes linearly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, FnSystem, IntegratorSpec};

/// Background model used to supply `a'/a` and `rho_B a^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    /// Full Friedmann evolution with dust and Lambda.
    #[default]
    Dust,
    /// The pure late-time form `a = -sqrt(3/Lambda)/tau` with dust density
    /// still scaling as `a^-3`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundParams {
    lambda: f64,
    rho0: f64,
    a0: f64,
    tau0: f64,
}

impl BackgroundParams {
    /// Fixes `a0` at the initial time and places the future singularity at
    /// `tau = 0`, which determines `tau0`.
    pub fn new(lambda: f64, rho0: f64, a0: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_rho0(rho0)?;
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::domain(format!("a0 must be positive, got {a0}")));
        }
        let tau0 = -singularity_integral(lambda, rho0) / a0;
        Ok(Self { lambda, rho0, a0, tau0 })
    }

    /// Fixes the initial conformal time; `a0` follows from requiring the
    /// future singularity at `tau = 0`. For `rho0 = 0` this is the exact
    /// de Sitter relation `a0 = -sqrt(3/Lambda)/tau0`.
    pub fn from_tau0(lambda: f64, rho0: f64, tau0: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_rho0(rho0)?;
        if !(tau0 < 0.0) || !tau0.is_finite() {
            return Err(Error::domain(format!("tau0 must be negative, got {tau0}")));
        }
        let a0 = singularity_integral(lambda, rho0) / -tau0;
        Ok(Self { lambda, rho0, a0, tau0 })
    }

    /// Raw parameters with no consistency between `a0` and `tau0` and
    /// `Lambda = 0` allowed. Meant for comparisons against closed-form
    /// solutions such as Einstein-de Sitter.
    pub fn new_unchecked(lambda: f64, rho0: f64, a0: f64, tau0: f64) -> Self {
        Self { lambda, rho0, a0, tau0 }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Conserved dust mass `rho_B a^3`.
    pub fn dust_mass(&self) -> f64 {
        self.rho0 * self.a0.powi(3)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("Lambda must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_rho0(rho0: f64) -> Result<()> {
    if !(rho0 >= 0.0) || !rho0.is_finite() {
        return Err(Error::domain(format!("rho0 must be non-negative, got {rho0}")));
    }
    Ok(())
}

// Composite 5-point Gauss-Legendre.
const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gauss_legendre(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (x, w) in GL_X.iter().zip(GL_W) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// `a0 * |tau0|` for a background whose singularity sits at `tau = 0`:
/// `int_0^1 sqrt(3) dw / sqrt(rho0 w^3 + Lambda)` with `w = a0/a`.
fn singularity_integral(lambda: f64, rho0: f64) -> f64 {
    gauss_legendre(|w| 3f64.sqrt() / (rho0 * w * w * w + lambda).sqrt(), 0.0, 1.0, 64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundState {
    pub tau: f64,
    pub a: f64,
    pub a_prime: f64,
    pub rho_b: f64,
    /// Conformal Hubble rate `a'/a`.
    pub conf_h: f64,
}

impl BackgroundState {
    /// `s = -tau`, the positive time-to-singularity reported in outputs.
    pub fn s(&self) -> f64 {
        -self.tau
    }

    /// Expansion scalar of the comoving congruence, `theta = 3 a'/a^2`.
    pub fn theta(&self) -> f64 {
        3.0 * self.a_prime / (self.a * self.a)
    }

    pub fn rho_a2(&self) -> f64 {
        self.rho_b * self.a * self.a
    }
}

/// Background model: parameters plus the choice of dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub params: BackgroundParams,
    pub kind: BackgroundKind,
}

impl Background {
    pub fn dust(params: BackgroundParams) -> Self {
        Self {
            params,
            kind: BackgroundKind::Dust,
        }
    }

    /// Late-time background `a = -sqrt(3/Lambda)/tau`; `a0` is reset to be
    /// consistent with `tau0`.
    pub fn asymptotic(lambda: f64, rho0: f64, tau0: f64) -> Result<Self> {
        let params = BackgroundParams::from_tau0(lambda, 0.0, tau0)?;
        let params = BackgroundParams { rho0, ..params };
        Ok(Self {
            params,
            kind: BackgroundKind::Asymptotic,
        })
    }

    pub fn with_kind(params: BackgroundParams, kind: BackgroundKind) -> Result<Self> {
        match kind {
            BackgroundKind::Dust => Ok(Self::dust(params)),
            BackgroundKind::Asymptotic => Self::asymptotic(params.lambda, params.rho0, params.tau0),
        }
    }

    pub fn tau0(&self) -> f64 {
        self.params.tau0
    }

    pub fn y0(&self) -> f64 {
        1.0 / self.params.a0
    }

    /// `dy/dtau` for `y = 1/a`.
    pub fn dy(&self, y: f64) -> f64 {
        let lambda = self.params.lambda;
        match self.kind {
            BackgroundKind::Dust => -((self.params.dust_mass() * y * y * y + lambda) / 3.0).sqrt(),
            BackgroundKind::Asymptotic => -(lambda / 3.0).sqrt(),
        }
    }

    /// `d^2 y / dtau^2`.
    pub fn d2y(&self, y: f64) -> f64 {
        match self.kind {
            BackgroundKind::Dust => 0.5 * self.params.dust_mass() * y * y,
            BackgroundKind::Asymptotic => 0.0,
        }
    }

    /// `a'/a = -y'/y`.
    pub fn conf_h(&self, y: f64) -> f64 {
        -self.dy(y) / y
    }

    /// `d(a'/a)/dtau`.
    pub fn conf_h_prime(&self, y: f64) -> f64 {
        let dy = self.dy(y);
        -self.d2y(y) / y + dy * dy / (y * y)
    }

    /// `rho_B a^2 = M y`.
    pub fn rho_a2(&self, y: f64) -> f64 {
        self.params.dust_mass() * y
    }

    pub fn state_from_y(&self, tau: f64, y: f64) -> BackgroundState {
        let a = 1.0 / y;
        let dy = self.dy(y);
        BackgroundState {
            tau,
            a,
            a_prime: -dy / (y * y),
            rho_b: self.params.dust_mass() * y * y * y,
            conf_h: -dy / y,
        }
    }

    /// `a''` from `y`.
    pub fn a_second(&self, y: f64) -> f64 {
        let dy = self.dy(y);
        -self.d2y(y) / (y * y) + 2.0 * dy * dy / (y * y * y)
    }

    /// Checks `tau` lies in `[tau0, 0)`.
    pub fn check_tau(&self, tau: f64) -> Result<()> {
        let tol = 1e-12 * self.params.tau0.abs();
        if !(tau >= self.params.tau0 - tol && tau < 0.0) {
            return Err(Error::range(format!(
                "tau = {tau} outside background coverage [{}, 0)",
                self.params.tau0
            )));
        }
        Ok(())
    }

    /// Conformal time at which the dust background reaches scale factor `a`,
    /// by quadrature. Independent of the ODE route.
    pub fn conformal_time_at_scale(&self, a: f64) -> f64 {
        let p = self.params;
        match self.kind {
            BackgroundKind::Dust => {
                let upper = p.a0 / a;
                -gauss_legendre(|w| 3f64.sqrt() / (p.rho0 * w * w * w + p.lambda).sqrt(), 0.0, upper, 64) / p.a0
            }
            BackgroundKind::Asymptotic => -(3.0 / p.lambda).sqrt() / a,
        }
    }

    /// Integrates the background on a strictly increasing grid in `[tau0, 0)`.
    pub fn evolve(&self, tau_grid: &[f64], spec: &IntegratorSpec) -> Result<Vec<BackgroundState>> {
        for w in tau_grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::input("tau grid must be strictly increasing"));
            }
        }
        if let Some(&first) = tau_grid.first() {
            self.check_tau(first)?;
        }
        if let Some(&last) = tau_grid.last() {
            if !(last < 0.0) {
                return Err(Error::range(format!("tau grid reaches {last}; coverage ends before 0")));
            }
        }
        let sys = FnSystem::new(1, |_t, y: &[f64], dy: &mut [f64]| dy[0] = self.dy(y[0]));
        let traj = integrate(&sys, self.params.tau0, &[self.y0()], tau_grid, spec).map_err(|e| match e {
            Error::NonFiniteRhs { t } => Error::Divergence {
                last_tau: t,
                reason: "scale factor diverged".into(),
            },
            other => other,
        })?;
        let mut out = Vec::with_capacity(traj.len());
        for (tau, y) in traj.t.iter().zip(&traj.y) {
            if !(y[0] > 0.0) {
                let last = out.last().map(|s: &BackgroundState| s.tau).unwrap_or(self.params.tau0);
                return Err(Error::Divergence {
                    last_tau: last,
                    reason: "scale factor diverged inside the grid".into(),
                });
            }
            out.push(self.state_from_y(*tau, y[0]));
        }
        Ok(out)
    }
}

/// Default background tolerances. Errors in `y` stay absolute while `y`
/// shrinks toward the singularity, so these are tighter than the generic
/// perturbation tolerances.
pub fn background_spec() -> IntegratorSpec {
    IntegratorSpec::adaptive(1e-16, 1e-13)
}

/// Evolves the full dust background on `tau_grid`.
pub fn evolve_background(params: BackgroundParams, tau_grid: &[f64]) -> Result<Vec<BackgroundState>> {
    Background::dust(params).evolve(tau_grid, &background_spec())
}

/// Late-time scale factor `a = -sqrt(3/Lambda)/tau`.
pub fn asymptotic_scale_factor(lambda: f64, tau: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(tau < 0.0) {
        return Err(Error::domain(format!("tau must be negative, got {tau}")));
    }
    Ok(-(3.0 / lambda).sqrt() / tau)
}

/// `A = sqrt(rho0 sqrt(Lambda/3) / 2)`, the scale of the Bessel argument in
/// the scalar solution.
pub fn coefficient_a(lambda: f64, rho0: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_rho0(rho0)?;
    Ok((0.5 * rho0 * (lambda / 3.0).sqrt()).sqrt())
}

/// Log-spaced grid in `|tau|` from `tau0` to `tau0 / 10^decades`.
pub fn log_tau_grid(tau0: f64, decades: f64, samples: usize) -> Vec<f64> {
    let s0 = -tau0;
    let n = samples.max(2);
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if i == 0 {
                tau0
            } else {
                -s0 * 10f64.powf(-decades * f)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymptotic_scale_factor_values() {
        assert!((asymptotic_scale_factor(3.0, -1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((asymptotic_scale_factor(0.001, -1.0).unwrap() - 54.77226).abs() < 1e-4);
        assert!((asymptotic_scale_factor(0.001, -0.01).unwrap() - 5477.226).abs() < 1e-2);
        assert!(asymptotic_scale_factor(0.001, 0.0).is_err());
        assert!(asymptotic_scale_factor(0.0, -1.0).is_err());
    }

    #[test]
    fn coefficient_a_values() {
        assert!((coefficient_a(3.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(coefficient_a(0.001, 0.0).unwrap(), 0.0);
        let a = coefficient_a(0.001, 0.01).unwrap();
        assert!((a * a - 9.12871e-5).abs() < 1e-9);
        assert!((a - 9.5545e-3).abs() < 1e-7);
        assert!(coefficient_a(0.001, -1.0).is_err());
    }

    #[test]
    fn vacuum_is_exact_de_sitter() {
        let p = BackgroundParams::from_tau0(3.0, 0.0, -2.0).unwrap();
        assert!((p.a0() - 0.5).abs() < 1e-14);
        let grid = log_tau_grid(-2.0, 3.0, 50);
        for s in evolve_background(p, &grid).unwrap() {
            assert!((s.a - (-1.0 / s.tau)).abs() / s.a < 1e-8, "tau={}", s.tau);
        }
    }

    #[test]
    fn rejects_non_monotone_grid() {
        let p = BackgroundParams::new(0.001, 0.01, 1.0).unwrap();
        let t0 = p.tau0();
        assert!(evolve_background(p, &[t0, 0.5 * t0, 0.6 * t0]).is_err());
        assert!(evolve_background(p, &[t0, 0.0]).is_err());
    }

    #[test]
    fn einstein_de_sitter_closed_form() {
        // Lambda = 0: a = (M/12) (tau - tau_c)^2.
        let (rho0, a0, tau0) = (0.01, 1.0, -10.0);
        let p = BackgroundParams::new_unchecked(0.0, rho0, a0, tau0);
        let m = rho0 * a0.powi(3);
        let tau_c = tau0 - (12.0 * a0 / m).sqrt();
        let grid: Vec<f64> = (0..40).map(|i| tau0 + 9.5 * i as f64 / 39.0).collect();
        for s in evolve_background(p, &grid).unwrap() {
            let exact = m / 12.0 * (s.tau - tau_c).powi(2);
            assert!((s.a - exact).abs() / exact < 1e-6, "tau={}", s.tau);
        }
    }

    #[test]
    fn quadrature_and_ode_routes_agree() {
        let p = BackgroundParams::new(0.001, 0.01, 1.0).unwrap();
        let bg = Background::dust(p);
        let grid = log_tau_grid(p.tau0(), 3.0, 30);
        for s in bg.evolve(&grid, &background_spec()).unwrap() {
            let tau_q = bg.conformal_time_at_scale(s.a);
            assert!(
                (tau_q - s.tau).abs() < 1e-8 * s.tau.abs().max(1e-3),
                "tau={} quad={}",
                s.tau,
                tau_q
            );
        }
    }
}
