//! Closed-form first-order solutions on the late-time background.

use crate::background::BackgroundState;
use crate::error::{Error, Result};
use crate::numerics::bessel_ik;
use crate::spectral::VectorField;

const NU: f64 = 2.0 / 3.0;

fn bessel_arg(a_coef: f64, tau: f64) -> Result<(f64, f64)> {
    if !(a_coef > 0.0) || !a_coef.is_finite() {
        return Err(Error::domain(format!("Bessel scale A must be positive, got {a_coef}")));
    }
    if !(tau < 0.0) {
        return Err(Error::domain(format!("tau must be negative, got {tau}")));
    }
    let s = -tau;
    Ok((s, 2.0 / 3.0 * a_coef * s.powf(1.5)))
}

/// Scalar solution `C1 tau K_{2/3}(z) + C2 tau I_{2/3}(z)` with
/// `z = (2/3) A |tau|^{3/2}`. The `C1` branch tends to a constant and the
/// `C2` branch vanishes like `tau^2` as `tau -> 0-`.
pub fn analytic_scalar_1(c1: f64, c2: f64, a_coef: f64, tau: f64) -> Result<f64> {
    Ok(analytic_scalar_1_jet(c1, c2, a_coef, tau)?.0)
}

/// Value and `d/dtau` of [`analytic_scalar_1`].
pub fn analytic_scalar_1_jet(c1: f64, c2: f64, a_coef: f64, tau: f64) -> Result<(f64, f64)> {
    if a_coef < 0.0 {
        return Err(Error::domain(format!(
            "Bessel scale A must be non-negative, got {a_coef}"
        )));
    }
    if c1 == 0.0 && c2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (s, z) = bessel_arg(a_coef, tau)?;
    let b = bessel_ik(NU, z)?;
    let dz = -a_coef * s.sqrt();
    let value = tau * (c1 * b.k + c2 * b.i);
    let deriv = c1 * (b.k + tau * b.kp * dz) + c2 * (b.i + tau * b.ip * dz);
    Ok((value, deriv))
}

/// Constants `(C1, C2)` reproducing value `phi` and derivative `dphi` at `tau`.
pub fn scalar_constants_from_data(a_coef: f64, tau: f64, phi: f64, dphi: f64) -> Result<(f64, f64)> {
    let (k, dk) = analytic_scalar_1_jet(1.0, 0.0, a_coef, tau)?;
    let (i, di) = analytic_scalar_1_jet(0.0, 1.0, a_coef, tau)?;
    let det = k * di - i * dk;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::domain("degenerate scalar basis"));
    }
    Ok(((phi * di - i * dphi) / det, (k * dphi - phi * dk) / det))
}

pub type Mat3 = [[f64; 3]; 3];

/// Tensor mode amplitudes `K_ab`, `F_ab` of wavenumber `q` along `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorModeAmplitudes {
    pub q: f64,
    pub dir: [f64; 3],
    pub k: Mat3,
    pub f: Mat3,
}

fn tt_defect(m: &Mat3, dir: &[f64; 3]) -> f64 {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let mut worst = tr.abs();
    for b in 0..3 {
        let t: f64 = (0..3).map(|a| dir[a] * m[a][b]).sum();
        worst = worst.max(t.abs());
        for a in 0..3 {
            worst = worst.max((m[a][b] - m[b][a]).abs());
        }
    }
    worst
}

fn mat_scale(m: &Mat3) -> f64 {
    m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

impl TensorModeAmplitudes {
    pub fn new(q: f64, dir: [f64; 3], k: Mat3, f: Mat3) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::input(format!("tensor wavenumber must be positive, got {q}")));
        }
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::input("tensor mode direction must be non-zero"));
        }
        let dir = dir.map(|d| d / norm);
        for m in [&k, &f] {
            if tt_defect(m, &dir) > 1e-12 * mat_scale(m).max(f64::MIN_POSITIVE) {
                return Err(Error::input(
                    "tensor amplitudes must be symmetric, transverse and tracefree",
                ));
            }
        }
        Ok(Self { q, dir, k, f })
    }

    /// Amplitudes matching the value `amp * e` and rate `rate * e` at `tau`.
    pub fn from_data(q: f64, dir: [f64; 3], e: Mat3, tau: f64, amp: f64, rate: f64) -> Result<Self> {
        let x = q * tau;
        let (s, c) = x.sin_cos();
        let b1 = s - x * c;
        let b2 = c + x * s;
        let d1 = q * x * s;
        let d2 = q * x * c;
        let det = b1 * d2 - b2 * d1;
        if det == 0.0 {
            return Err(Error::domain("tensor matching time must be non-zero"));
        }
        let ck = (amp * d2 - b2 * rate) / det;
        let cf = (b1 * rate - d1 * amp) / det;
        Self::new(q, dir, e.map(|r| r.map(|v| ck * v)), e.map(|r| r.map(|v| cf * v)))
    }

    pub fn value(&self, tau: f64) -> Mat3 {
        let x = self.q * tau;
        let (s, c) = x.sin_cos();
        combine(&self.k, s - x * c, &self.f, c + x * s)
    }

    pub fn derivative(&self, tau: f64) -> Mat3 {
        let x = self.q * tau;
        let (s, c) = x.sin_cos();
        combine(&self.k, self.q * x * s, &self.f, self.q * x * c)
    }
}

fn combine(k: &Mat3, ck: f64, f: &Mat3, cf: f64) -> Mat3 {
    std::array::from_fn(|a| std::array::from_fn(|b| k[a][b] * ck + f[a][b] * cf))
}

/// `K_ab (sin q tau - q tau cos q tau) + F_ab (cos q tau + q tau sin q tau)`.
pub fn analytic_tensor_mode(mode: &TensorModeAmplitudes, tau: f64) -> Mat3 {
    mode.value(tau)
}

/// Vector solution `C(x) / a`.
pub fn analytic_vector_1(c_field: &VectorField, state: &BackgroundState) -> Result<VectorField> {
    if !(state.a > 0.0) || !state.a.is_finite() {
        return Err(Error::domain(format!("scale factor must be positive, got {}", state.a)));
    }
    let mut out = c_field.clone();
    out.scale(1.0 / state.a);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.05;

    #[test]
    fn zero_constants_give_zero() {
        assert_eq!(analytic_scalar_1(0.0, 0.0, A, -3.0).unwrap(), 0.0);
        assert!(analytic_scalar_1(1.0, 0.0, -1.0, -3.0).is_err());
        assert!(analytic_scalar_1(1.0, 0.0, A, 0.5).is_err());
    }

    #[test]
    fn growing_branch_slope_is_two() {
        let f = |t: f64| analytic_scalar_1(0.0, 1.0, A, t).unwrap().abs();
        let slope = (f(-1e-2).ln() - f(-1e-4).ln()) / (1e-2f64.ln() - 1e-4f64.ln());
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn satisfies_scalar_equation_on_late_background() {
        // late background: a'/a = -1/tau, rho a^2 = 2 A^2 |tau|
        for (c1, c2) in [(1.0, 0.0), (0.0, 1.0), (0.3, -2.0)] {
            for tau in [-30.0f64, -4.0, -0.5] {
                let h = 2e-5 * tau.abs();
                let v = |t: f64| analytic_scalar_1_jet(c1, c2, A, t).unwrap();
                let (p, dp) = v(tau);
                let ddp = (v(tau + h).1 - v(tau - h).1) / (2.0 * h);
                let res = ddp + (-1.0 / tau) * dp - 0.5 * (2.0 * A * A * -tau) * p;
                let scale = ddp.abs() + (dp / tau).abs() + (A * A * tau * p).abs();
                assert!(res.abs() < 1e-7 * scale, "{res} {scale}");
            }
        }
    }

    #[test]
    fn scalar_constants_round_trip() {
        let (c1, c2) = scalar_constants_from_data(A, -20.0, 0.7, -0.01).unwrap();
        let (p, dp) = analytic_scalar_1_jet(c1, c2, A, -20.0).unwrap();
        assert!((p - 0.7).abs() < 1e-13 && (dp + 0.01).abs() < 1e-13);
    }

    fn plus() -> Mat3 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [[0.0, 0.0, 0.0], [0.0, r, 0.0], [0.0, 0.0, -r]]
    }

    #[test]
    fn tensor_limits() {
        let zero = [[0.0; 3]; 3];
        let m = TensorModeAmplitudes::new(1.0, [1.0, 0.0, 0.0], plus(), zero).unwrap();
        let v = m.value(std::f64::consts::PI);
        assert!((v[1][1] - plus()[1][1] * std::f64::consts::PI).abs() < 1e-14);
        let f = TensorModeAmplitudes::new(1.0, [1.0, 0.0, 0.0], zero, plus()).unwrap();
        assert!((f.value(-1e-6)[2][2] - plus()[2][2]).abs() < 1e-12);
        let bad = [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(TensorModeAmplitudes::new(1.0, [1.0, 0.0, 0.0], bad, zero).is_err());
    }

    #[test]
    fn tensor_matching_reproduces_data() {
        let m = TensorModeAmplitudes::from_data(2.0, [1.0, 0.0, 0.0], plus(), -7.0, 0.3, 0.05).unwrap();
        let r = plus()[1][1];
        assert!((m.value(-7.0)[1][1] - 0.3 * r).abs() < 1e-13);
        assert!((m.derivative(-7.0)[1][1] - 0.05 * r).abs() < 1e-13);
    }

    #[test]
    fn vector_scales_with_inverse_a() {
        let g = crate::spectral::Grid3::new(4, 1.0).unwrap();
        let c = VectorField::from_fn(&g, |x| [0.0, x[0].sin(), 0.0]);
        let st = |a: f64| BackgroundState {
            tau: -1.0,
            a,
            a_prime: 1.0,
            rho_b: 1.0,
            conf_h: 1.0,
        };
        let v1 = analytic_vector_1(&c, &st(2.0)).unwrap();
        let v2 = analytic_vector_1(&c, &st(4.0)).unwrap();
        for i in 0..g.len() {
            assert_eq!(v1.comps[1][i], 2.0 * v2.comps[1][i]);
        }
        assert!(analytic_vector_1(&c, &st(0.0)).is_err());
    }
}
