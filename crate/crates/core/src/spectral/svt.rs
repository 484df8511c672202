use num_complex::Complex64;

use super::field::{derivative_wavevector, ScalarField, SymTensorField, VectorField, SYM_INDEX, SYM_PAIRS};
use super::grid::Grid3;
use crate::error::Result;

/// Scalar, vector and tensor parts of a symmetric tensor field.
///
/// `T_ab = trace d_ab + (d_a d_b - d_ab Lap/3) chi + d_a Z_b + d_b Z_a + pi_ab`
#[derive(Debug, Clone)]
pub struct SvtParts {
    /// One third of the trace of the input.
    pub trace: ScalarField,
    /// Scalar potential with zero mean.
    pub chi: ScalarField,
    /// Divergence-free vector.
    pub z: VectorField,
    /// Transverse tracefree tensor.
    pub pi: SymTensorField,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-mode split of a tracefree symmetric tensor amplitude `t`.
/// Returns `(chi, z, pi)`.
pub fn split_mode(k: [f64; 3], t: &[[Complex64; 3]; 3]) -> (Complex64, [Complex64; 3], [[Complex64; 3]; 3]) {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return (ZERO, [ZERO; 3], *t);
    }
    let mut tk = [ZERO; 3];
    for a in 0..3 {
        for b in 0..3 {
            tk[b] += t[a][b] * k[a];
        }
    }
    let ktk: Complex64 = (0..3).map(|b| tk[b] * k[b]).sum();
    let chi = -1.5 * ktk / (k2 * k2);
    let mut z = [ZERO; 3];
    for c in 0..3 {
        let pt = tk[c] - k[c] * ktk / k2;
        z[c] = -I * pt / k2;
    }
    let mut pi = [[ZERO; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let d = if a == b { 1.0 } else { 0.0 };
            let s = -(k[a] * k[b] - d * k2 / 3.0) * chi;
            let v = I * (k[a] * z[b] + k[b] * z[a]);
            pi[a][b] = t[a][b] - s - v;
        }
    }
    (chi, z, pi)
}

fn finite_check(t: &SymTensorField) -> Result<()> {
    t.ensure_finite()
}

/// Splits `t` into trace, scalar, vector and tensor parts.
pub fn svt_decompose(t: &SymTensorField) -> Result<SvtParts> {
    finite_check(t)?;
    let grid = &t.grid;
    let specs: Vec<Vec<Complex64>> = t.comps.iter().map(|c| grid.forward(c)).collect();
    let len = grid.len();
    let mut tr = vec![ZERO; len];
    let mut chi = vec![ZERO; len];
    let mut z: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![ZERO; len]);
    let mut pi: [Vec<Complex64>; 6] = std::array::from_fn(|_| vec![ZERO; len]);
    for idx in 0..len {
        let mut m = [[ZERO; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] = specs[SYM_INDEX[a][b]][idx];
            }
        }
        let third = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        for a in 0..3 {
            m[a][a] -= third;
        }
        tr[idx] = third;
        let (c, zz, p) = split_mode(derivative_wavevector(grid, idx), &m);
        chi[idx] = c;
        for a in 0..3 {
            z[a][idx] = zz[a];
        }
        for (s, &(a, b)) in SYM_PAIRS.iter().enumerate() {
            pi[s][idx] = p[a][b];
        }
    }
    Ok(SvtParts {
        trace: ScalarField::from_spectrum(grid, &tr),
        chi: ScalarField::from_spectrum(grid, &chi),
        z: VectorField {
            grid: grid.clone(),
            comps: z.map(|c| grid.inverse(&c)),
        },
        pi: SymTensorField {
            grid: grid.clone(),
            comps: pi.map(|c| grid.inverse(&c)),
        },
    })
}

/// Scalar part `(d_a d_b - d_ab Lap/3) chi`.
pub fn scalar_part(chi: &ScalarField) -> SymTensorField {
    let grid = &chi.grid;
    let spec = chi.spectrum();
    let mut out = SymTensorField::zeros(grid);
    for (s, &(a, b)) in SYM_PAIRS.iter().enumerate() {
        let mut c = vec![ZERO; grid.len()];
        for idx in 0..grid.len() {
            let k = derivative_wavevector(grid, idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let d = if a == b { 1.0 } else { 0.0 };
            c[idx] = -(k[a] * k[b] - d * k2 / 3.0) * spec[idx];
        }
        out.comps[s] = grid.inverse(&c);
    }
    out
}

/// Vector part `d_a Z_b + d_b Z_a`.
pub fn vector_part(z: &VectorField) -> SymTensorField {
    let grid = &z.grid;
    let specs: Vec<Vec<Complex64>> = z.comps.iter().map(|c| grid.forward(c)).collect();
    let mut out = SymTensorField::zeros(grid);
    for (s, &(a, b)) in SYM_PAIRS.iter().enumerate() {
        let mut c = vec![ZERO; grid.len()];
        for idx in 0..grid.len() {
            let k = derivative_wavevector(grid, idx);
            c[idx] = I * (k[a] * specs[b][idx] + k[b] * specs[a][idx]);
        }
        out.comps[s] = grid.inverse(&c);
    }
    out
}

/// Reassembles a tensor from its parts.
pub fn svt_recompose(parts: &SvtParts) -> Result<SymTensorField> {
    let grid: &Grid3 = &parts.trace.grid;
    grid.ensure_same(&parts.chi.grid)?;
    grid.ensure_same(&parts.z.grid)?;
    grid.ensure_same(&parts.pi.grid)?;
    let mut out = parts.pi.clone();
    out.axpy(1.0, &scalar_part(&parts.chi));
    out.axpy(1.0, &vector_part(&parts.z));
    out.add_isotropic(1.0, &parts.trace);
    Ok(out)
}
