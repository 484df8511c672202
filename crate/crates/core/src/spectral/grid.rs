use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Periodic cube with `n` points per axis and side `box_len`.
#[derive(Clone)]
pub struct Grid3 {
    n: usize,
    box_len: f64,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid3")
            .field("n", &self.n)
            .field("box_len", &self.box_len)
            .finish()
    }
}

impl PartialEq for Grid3 {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.box_len == other.box_len
    }
}

impl Grid3 {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::input(format!("grid size must be a power of two >= 4, got {n}")));
        }
        if !(box_len > 0.0) || !box_len.is_finite() {
            return Err(Error::input(format!("box length must be positive, got {box_len}")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            box_len,
            plans: Arc::new(plans),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    /// Fundamental wavenumber `2 pi / L`.
    pub fn k_fundamental(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let [i, j, k] = self.unindex(idx);
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    /// Signed integer mode number of FFT index `i` (Nyquist reported as `+n/2`).
    #[inline]
    pub fn mode_number(&self, i: usize) -> i32 {
        if i <= self.n / 2 {
            i as i32
        } else {
            i as i32 - self.n as i32
        }
    }

    /// FFT index of signed mode number `m`, if representable.
    pub fn mode_index(&self, m: i32) -> Option<usize> {
        let n = self.n as i32;
        if m > n / 2 || m <= -n / 2 {
            return None;
        }
        Some(m.rem_euclid(n) as usize)
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    pub fn modes(&self, idx: usize) -> [i32; 3] {
        let [i, j, k] = self.unindex(idx);
        [self.mode_number(i), self.mode_number(j), self.mode_number(k)]
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let kf = self.k_fundamental();
        let m = self.modes(idx);
        [kf * m[0] as f64, kf * m[1] as f64, kf * m[2] as f64]
    }

    /// Flat index of the integer wavevector `m`.
    pub fn flat_mode_index(&self, m: [i32; 3]) -> Option<usize> {
        Some(self.index(self.mode_index(m[0])?, self.mode_index(m[1])?, self.mode_index(m[2])?))
    }

    /// Whether any axis of `idx` sits on the Nyquist plane.
    pub fn on_nyquist_plane(&self, idx: usize) -> bool {
        self.unindex(idx).iter().any(|&i| self.is_nyquist(i))
    }

    /// Whether a mode survives the 2/3-rule truncation (`|m| < n/3` on every axis).
    pub fn in_dealiased_band(&self, m: [i32; 3]) -> bool {
        let lim = self.n as f64 / 3.0;
        m.iter().all(|&c| (c.abs() as f64) < lim)
    }

    fn fft3(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.plans.inv } else { &self.plans.fwd };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // z lines are contiguous
        for line in data.chunks_mut(n) {
            plan.process_with_scratch(line, &mut scratch);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    buf[j] = data[self.index(i, j, k)];
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for j in 0..n {
                    data[self.index(i, j, k)] = buf[j];
                }
            }
        }
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    buf[i] = data[self.index(i, j, k)];
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for i in 0..n {
                    data[self.index(i, j, k)] = buf[i];
                }
            }
        }
    }

    /// Fourier coefficients `c_k` with `f(x) = sum_k c_k exp(i k.x)`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft3(&mut data, false);
        let norm = 1.0 / self.len() as f64;
        for c in &mut data {
            *c *= norm;
        }
        data
    }

    /// Real part of the synthesis `sum_k c_k exp(i k.x)`.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.len());
        let mut data = coeffs.to_vec();
        self.fft3(&mut data, true);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Checks two grids match.
    pub fn ensure_same(&self, other: &Grid3) -> Result<()> {
        if self != other {
            return Err(Error::input(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}
