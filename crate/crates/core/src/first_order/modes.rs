//! Mode specifications and their metric patterns on the torus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid3;

use super::analytic::Mat3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFamily {
    Scalar,
    Vector,
    Tensor,
}

/// Polarization label. For vector modes `plus` selects `e1` and `cross`
/// selects `e2` of the transverse basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    #[default]
    Plus,
    Cross,
}

/// One Fourier mode of the first-order perturbation.
///
/// Spatial profile `cos(k.x + phase)` with `k = 2 pi m / box_len`.
/// * scalar: `phi = amplitude T(tau)` with `T(tau0) = 1`, `T'(tau0) = rate`;
///   the tracefree potential is `amplitude ((6/k^2) T + offset)`. By default
///   the offset is `(9 rho_B a^2 + 18 (a'/a) rate) / k^4` at `tau0`, the value
///   for which the energy constraint holds at all times with `delta = 3 phi`.
///   Setting `chi0` replaces `6/k^2 + offset` and generally breaks that.
/// * vector: `Z = amplitude e (a0/a)`.
/// * tensor: `pi = amplitude e_ab T(tau)` with `T(tau0) = 1`, `T'(tau0) = rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub family: ModeFamily,
    pub k: [i32; 3],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub polarization: Polarization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi0: Option<f64>,
}

impl ModeSpec {
    pub fn scalar(k: [i32; 3], amplitude: f64) -> Self {
        Self {
            family: ModeFamily::Scalar,
            k,
            amplitude,
            phase: 0.0,
            rate: 0.0,
            polarization: Polarization::Plus,
            chi0: None,
        }
    }

    pub fn vector(k: [i32; 3], amplitude: f64, polarization: Polarization) -> Self {
        Self {
            family: ModeFamily::Vector,
            polarization,
            ..Self::scalar(k, amplitude)
        }
    }

    pub fn tensor(k: [i32; 3], amplitude: f64, polarization: Polarization) -> Self {
        Self {
            family: ModeFamily::Tensor,
            polarization,
            ..Self::scalar(k, amplitude)
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn wavevector(&self, grid: &Grid3) -> [f64; 3] {
        let kf = grid.k_fundamental();
        self.k.map(|m| kf * m as f64)
    }

    pub fn validate(&self, grid: &Grid3) -> Result<()> {
        if self.k == [0, 0, 0] {
            return Err(Error::input("mode wavevector must be non-zero"));
        }
        if !grid.in_dealiased_band(self.k) {
            return Err(Error::Aliasing(format!(
                "mode {:?} lies outside the dealiased band |m| < {:.3} of an n = {} grid",
                self.k,
                grid.n() as f64 / 3.0,
                grid.n()
            )));
        }
        for (name, v) in [
            ("amplitude", self.amplitude),
            ("phase", self.phase),
            ("rate", self.rate),
        ] {
            if !v.is_finite() {
                return Err(Error::input(format!("mode {name} must be finite")));
            }
        }
        if let Some(c) = self.chi0 {
            if !c.is_finite() {
                return Err(Error::input("mode chi0 must be finite"));
            }
        }
        Ok(())
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal `(e1, e2)` with `e1 x e2 = k/|k|`.
pub fn transverse_basis(k: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let khat = normalize(k);
    let mut axis = 0;
    for a in 1..3 {
        if khat[a].abs() < khat[axis].abs() {
            axis = a;
        }
    }
    let mut u = [0.0; 3];
    u[axis] = 1.0;
    let e1 = normalize(cross(khat, u));
    let e2 = cross(khat, e1);
    (e1, e2)
}

/// Unit tracefree transverse polarization tensor.
pub fn tensor_polarization(k: [f64; 3], pol: Polarization) -> Mat3 {
    let (e1, e2) = transverse_basis(k);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    std::array::from_fn(|a| {
        std::array::from_fn(|b| match pol {
            Polarization::Plus => r * (e1[a] * e1[b] - e2[a] * e2[b]),
            Polarization::Cross => r * (e1[a] * e2[b] + e2[a] * e1[b]),
        })
    })
}

pub fn vector_polarization(k: [f64; 3], pol: Polarization) -> [f64; 3] {
    let (e1, e2) = transverse_basis(k);
    match pol {
        Polarization::Plus => e1,
        Polarization::Cross => e2,
    }
}

/// Time dependence attached to a metric term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeFn {
    /// Identically one.
    Const,
    /// `a0 / a`.
    InverseScale,
    /// Evolved amplitude number `i`.
    Evolved(usize),
}

/// `pattern_ab g(tau) cos(k.x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub m: [i32; 3],
    pub k: [f64; 3],
    pub phase: f64,
    pub pattern: Mat3,
    pub time: TimeFn,
}

/// `amp cos(k.x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarTerm {
    pub m: [i32; 3],
    pub k: [f64; 3],
    pub phase: f64,
    pub amp: f64,
}

/// Which linear equation an evolved amplitude obeys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolvedKind {
    Scalar,
    Tensor { q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedAmplitude {
    pub kind: EvolvedKind,
    pub value0: f64,
    pub rate0: f64,
}

/// Constant part of the scalar potential per unit amplitude, given the
/// initial `a'/a` and `rho_B a^2`.
pub fn scalar_offset(mode: &ModeSpec, k2: f64, conf_h0: f64, rho_a2_0: f64) -> f64 {
    match mode.chi0 {
        Some(c) => c - 6.0 / k2,
        None => (9.0 * rho_a2_0 + 18.0 * conf_h0 * mode.rate) / (k2 * k2),
    }
}

/// Metric terms of all modes plus the amplitudes to evolve.
pub(crate) fn build_terms(
    grid: &Grid3,
    modes: &[ModeSpec],
    conf_h0: f64,
    rho_a2_0: f64,
) -> Result<(Vec<GammaTerm>, Vec<EvolvedAmplitude>)> {
    let mut terms = Vec::new();
    let mut evolved = Vec::new();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for mode in modes {
        mode.validate(grid)?;
        let k = mode.wavevector(grid);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let amp = mode.amplitude;
        let base = GammaTerm {
            m: mode.k,
            k,
            phase: mode.phase,
            pattern: [[0.0; 3]; 3],
            time: TimeFn::Const,
        };
        match mode.family {
            ModeFamily::Scalar => {
                let id = evolved.len();
                evolved.push(EvolvedAmplitude {
                    kind: EvolvedKind::Scalar,
                    value0: 1.0,
                    rate0: mode.rate,
                });
                let shear: Mat3 =
                    std::array::from_fn(|a| std::array::from_fn(|b| -(k[a] * k[b] - delta(a, b) * k2 / 3.0)));
                let pattern = std::array::from_fn(|a| {
                    std::array::from_fn(|b| amp * (-2.0 * delta(a, b) + 6.0 / k2 * shear[a][b]))
                });
                terms.push(GammaTerm {
                    pattern,
                    time: TimeFn::Evolved(id),
                    ..base
                });
                let offset = scalar_offset(mode, k2, conf_h0, rho_a2_0);
                if offset != 0.0 {
                    let pattern = shear.map(|r| r.map(|v| amp * offset * v));
                    terms.push(GammaTerm { pattern, ..base });
                }
            }
            ModeFamily::Vector => {
                let e = vector_polarization(k, mode.polarization);
                let pattern = std::array::from_fn(|a| std::array::from_fn(|b| amp * (k[a] * e[b] + k[b] * e[a])));
                terms.push(GammaTerm {
                    phase: mode.phase + std::f64::consts::FRAC_PI_2,
                    pattern,
                    time: TimeFn::InverseScale,
                    ..base
                });
            }
            ModeFamily::Tensor => {
                let id = evolved.len();
                evolved.push(EvolvedAmplitude {
                    kind: EvolvedKind::Tensor { q: k2.sqrt() },
                    value0: 1.0,
                    rate0: mode.rate,
                });
                let e = tensor_polarization(k, mode.polarization);
                terms.push(GammaTerm {
                    pattern: e.map(|r| r.map(|v| amp * v)),
                    time: TimeFn::Evolved(id),
                    ..base
                });
            }
        }
    }
    Ok((terms, evolved))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_right_handed() {
        for k in [[1.0, 0.0, 0.0], [0.0, 0.0, 3.0], [1.0, -2.0, 2.0], [0.3, 0.3, 0.3]] {
            let (e1, e2) = transverse_basis(k);
            let khat = normalize(k);
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert!(dot(e1, khat).abs() < 1e-15 && dot(e2, khat).abs() < 1e-15 && dot(e1, e2).abs() < 1e-15);
            assert!((dot(e1, e1) - 1.0).abs() < 1e-15);
            let c = cross(e1, e2);
            assert!((0..3).all(|a| (c[a] - khat[a]).abs() < 1e-15));
        }
    }

    #[test]
    fn polarizations_are_transverse_tracefree_unit() {
        let k = [1.0, 2.0, -1.0];
        for pol in [Polarization::Plus, Polarization::Cross] {
            let e = tensor_polarization(k, pol);
            assert!((e[0][0] + e[1][1] + e[2][2]).abs() < 1e-15);
            for b in 0..3 {
                assert!((0..3).map(|a| k[a] * e[a][b]).sum::<f64>().abs() < 1e-14);
            }
            let norm: f64 = e.iter().flatten().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_zero_and_aliased_modes() {
        let g = Grid3::new(8, 1.0).unwrap();
        assert!(ModeSpec::scalar([0, 0, 0], 1e-3).validate(&g).is_err());
        assert!(matches!(
            ModeSpec::scalar([3, 0, 0], 1e-3).validate(&g),
            Err(Error::Aliasing(_))
        ));
        assert!(ModeSpec::scalar([2, -2, 1], 1e-3).validate(&g).is_ok());
    }

    #[test]
    fn scalar_pattern_trace_is_minus_six_amp() {
        let g = Grid3::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let (terms, evolved) = build_terms(&g, &[ModeSpec::scalar([1, 2, 0], 0.01)], 0.1, 0.02).unwrap();
        assert_eq!(evolved.len(), 1);
        let p = terms[0].pattern;
        assert!((p[0][0] + p[1][1] + p[2][2] + 0.06).abs() < 1e-15);
    }
}
