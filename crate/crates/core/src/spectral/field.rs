use num_complex::Complex64;

use super::grid::Grid3;
use crate::error::{Error, Result};

/// Storage slot of component `(a, b)` of a symmetric tensor.
pub const SYM_INDEX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
/// Index pairs of the six stored components.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid3,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid3,
    pub comps: [Vec<f64>; 3],
}

/// Symmetric 3-tensor field storing its six independent components.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    pub grid: Grid3,
    pub comps: [Vec<f64>; 6],
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn ensure_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("field contains non-finite values"))
    }
}

impl ScalarField {
    pub fn zeros(grid: &Grid3) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid3, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn constant(grid: &Grid3, v: f64) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![v; grid.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        ensure_finite(&self.data)
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn axpy(&mut self, s: f64, other: &ScalarField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.data)
    }

    pub fn from_spectrum(grid: &Grid3, spec: &[Complex64]) -> Self {
        Self {
            grid: grid.clone(),
            data: grid.inverse(spec),
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

impl VectorField {
    pub fn zeros(grid: &Grid3) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid: grid.clone(),
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_fn(grid: &Grid3, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let v = f(grid.coords(i));
            for a in 0..3 {
                out.comps[a][i] = v[a];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        self.comps.iter().try_for_each(|c| ensure_finite(c))
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn axpy(&mut self, s: f64, other: &VectorField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    /// Spectral divergence.
    pub fn divergence(&self) -> ScalarField {
        let mut out = ScalarField::zeros(&self.grid);
        for a in 0..3 {
            let d = derivative_values(&self.grid, &self.comps[a], &[a]);
            for (o, v) in out.data.iter_mut().zip(d) {
                *o += v;
            }
        }
        out
    }
}

impl SymTensorField {
    pub fn zeros(grid: &Grid3) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid: grid.clone(),
            comps: std::array::from_fn(|_| z.clone()),
        }
    }

    pub fn from_fn(grid: &Grid3, f: impl Fn([f64; 3]) -> [[f64; 3]; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let m = f(grid.coords(i));
            for (s, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                out.comps[s][i] = 0.5 * (m[a][b] + m[b][a]);
            }
        }
        out
    }

    /// Component `T_ab`; symmetric access.
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> &[f64] {
        &self.comps[SYM_INDEX[a][b]]
    }

    #[inline]
    pub fn get_mut(&mut self, a: usize, b: usize) -> &mut Vec<f64> {
        &mut self.comps[SYM_INDEX[a][b]]
    }

    /// 3x3 matrix at grid point `i`.
    #[inline]
    pub fn at(&self, i: usize) -> [[f64; 3]; 3] {
        let c = &self.comps;
        [
            [c[0][i], c[1][i], c[2][i]],
            [c[1][i], c[3][i], c[4][i]],
            [c[2][i], c[4][i], c[5][i]],
        ]
    }

    pub fn trace(&self) -> ScalarField {
        let data = (0..self.grid.len())
            .map(|i| self.comps[0][i] + self.comps[3][i] + self.comps[5][i])
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        self.comps.iter().try_for_each(|c| ensure_finite(c))
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn axpy(&mut self, s: f64, other: &SymTensorField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    /// Adds `s * f * delta_ab`.
    pub fn add_isotropic(&mut self, s: f64, f: &ScalarField) {
        for a in 0..3 {
            let slot = SYM_INDEX[a][a];
            for (x, y) in self.comps[slot].iter_mut().zip(&f.data) {
                *x += s * y;
            }
        }
    }

    pub fn sub(&self, other: &SymTensorField) -> SymTensorField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Divergence `d_a T_ab`.
    pub fn divergence(&self) -> VectorField {
        let mut out = VectorField::zeros(&self.grid);
        for b in 0..3 {
            for a in 0..3 {
                let d = derivative_values(&self.grid, self.get(a, b), &[a]);
                for (o, v) in out.comps[b].iter_mut().zip(d) {
                    *o += v;
                }
            }
        }
        out
    }

    /// L2 inner product `sum_ab <T_ab, U_ab>` averaged over the grid.
    pub fn inner(&self, other: &SymTensorField) -> f64 {
        let mut s = 0.0;
        for (slot, &(a, b)) in SYM_PAIRS.iter().enumerate() {
            let w = if a == b { 1.0 } else { 2.0 };
            s += w * self.comps[slot]
                .iter()
                .zip(&other.comps[slot])
                .map(|(x, y)| x * y)
                .sum::<f64>();
        }
        s / self.grid.len() as f64
    }
}

/// Wavevector used by every derivative symbol: Nyquist components are zero.
pub fn derivative_wavevector(grid: &Grid3, idx: usize) -> [f64; 3] {
    let ijk = grid.unindex(idx);
    let k = grid.wavevector(idx);
    std::array::from_fn(|a| if grid.is_nyquist(ijk[a]) { 0.0 } else { k[a] })
}

/// Multiplies a spectrum by the symbol of `d_{axes[0]} d_{axes[1]} ...`.
pub fn apply_derivative_symbol(grid: &Grid3, spec: &mut [Complex64], axes: &[usize]) {
    for (idx, c) in spec.iter_mut().enumerate() {
        let k = derivative_wavevector(grid, idx);
        let mut factor = Complex64::new(1.0, 0.0);
        for &a in axes {
            factor *= Complex64::new(0.0, k[a]);
        }
        *c *= factor;
    }
}

pub(crate) fn derivative_values(grid: &Grid3, values: &[f64], axes: &[usize]) -> Vec<f64> {
    let mut spec = grid.forward(values);
    apply_derivative_symbol(grid, &mut spec, axes);
    grid.inverse(&spec)
}

/// Exact derivative of the band-limited interpolant of `field` along the
/// listed axes (order at most 2).
pub fn spectral_derivative(field: &ScalarField, axes: &[usize]) -> Result<ScalarField> {
    if axes.len() > 2 {
        return Err(Error::input(format!(
            "derivative order {} unsupported (max 2)",
            axes.len()
        )));
    }
    if axes.iter().any(|&a| a > 2) {
        return Err(Error::input("derivative axis must be 0, 1 or 2"));
    }
    Ok(ScalarField {
        grid: field.grid.clone(),
        data: derivative_values(&field.grid, &field.data, axes),
    })
}

/// Spectral Laplacian.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let mut spec = field.spectrum();
    for (idx, c) in spec.iter_mut().enumerate() {
        let k = derivative_wavevector(&field.grid, idx);
        *c *= -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    }
    ScalarField::from_spectrum(&field.grid, &spec)
}

/// Zeroes every mode outside the 2/3-rule band.
pub fn dealias(grid: &Grid3, spec: &mut [Complex64]) {
    for (idx, c) in spec.iter_mut().enumerate() {
        if !grid.in_dealiased_band(grid.modes(idx)) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivatives_of_plane_wave_are_exact() {
        let g = Grid3::new(16, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0] - 3.0 * x[1] + x[2]).sin());
        let dx = spectral_derivative(&f, &[0]).unwrap();
        let dxy = spectral_derivative(&f, &[0, 1]).unwrap();
        let lap = laplacian(&f);
        for i in 0..g.len() {
            let x = g.coords(i);
            let ph = 2.0 * x[0] - 3.0 * x[1] + x[2];
            assert!((dx.data[i] - 2.0 * ph.cos()).abs() < 1e-12);
            assert!((dxy.data[i] - 6.0 * ph.sin()).abs() < 1e-12);
            assert!((lap.data[i] + 14.0 * ph.sin()).abs() < 1e-12);
        }
        assert!(spectral_derivative(&f, &[0, 1, 2]).is_err());
    }

    #[test]
    fn box_length_scales_wavenumbers() {
        let g = Grid3::new(8, 4.0).unwrap();
        let k = 2.0 * PI / 4.0;
        let f = ScalarField::from_fn(&g, |x| (k * x[2]).cos());
        let d = spectral_derivative(&f, &[2, 2]).unwrap();
        for i in 0..g.len() {
            assert!((d.data[i] + k * k * f.data[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_trace_and_divergence() {
        let g = Grid3::new(8, 2.0 * PI).unwrap();
        let t = SymTensorField::from_fn(&g, |x| {
            let s = x[0].sin();
            [[s, 0.0, 0.0], [0.0, 2.0 * s, 0.0], [0.0, 0.0, 0.5]]
        });
        let tr = t.trace();
        let div = t.divergence();
        for i in 0..g.len() {
            let x = g.coords(i);
            assert!((tr.data[i] - 3.0 * x[0].sin() - 0.5).abs() < 1e-13);
            assert!((div.comps[0][i] - x[0].cos()).abs() < 1e-12);
            assert!(div.comps[1][i].abs() < 1e-12);
        }
    }
}
