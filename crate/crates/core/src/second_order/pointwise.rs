//! Quadratic source terms at a single point, written over any scalar ring so
//! the same transcription serves real grid values and complex plane-wave
//! amplitudes.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Ring:
    Copy
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
}

impl Ring for f64 {}
impl Ring for Complex64 {}

pub type T3<T> = [[T; 3]; 3];

/// Local data of the first-order perturbation: `g` with its first and second
/// spatial derivatives (`dg[c][a][b] = d_c g_ab`), its first and second time
/// derivatives `p`, `pp`, the initial snapshot `g0` and initial contrast `d0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointJet<T> {
    pub g: T3<T>,
    pub dg: [T3<T>; 3],
    pub ddg: [[T3<T>; 3]; 3],
    pub p: T3<T>,
    pub dp: [T3<T>; 3],
    pub pp: T3<T>,
    pub g0: T3<T>,
    pub d0: T,
}

impl<T: Ring> PointJet<T> {
    pub fn add(&self, o: &Self) -> Self {
        let add3 =
            |a: &T3<T>, b: &T3<T>| -> T3<T> { std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j])) };
        Self {
            g: add3(&self.g, &o.g),
            dg: std::array::from_fn(|c| add3(&self.dg[c], &o.dg[c])),
            ddg: std::array::from_fn(|c| std::array::from_fn(|d| add3(&self.ddg[c][d], &o.ddg[c][d]))),
            p: add3(&self.p, &o.p),
            dp: std::array::from_fn(|c| add3(&self.dp[c], &o.dp[c])),
            pp: add3(&self.pp, &o.pp),
            g0: add3(&self.g0, &o.g0),
            d0: self.d0 + o.d0,
        }
    }
}

/// The four sources at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointSources<T> {
    pub n1: T,
    pub n2: T,
    pub n3: [T; 3],
    pub n4: T3<T>,
}

impl<T: Ring> PointSources<T> {
    pub fn axpy(&mut self, s: T, o: &Self) {
        self.n1 += s * o.n1;
        self.n2 += s * o.n2;
        for b in 0..3 {
            self.n3[b] += s * o.n3[b];
            for a in 0..3 {
                self.n4[a][b] += s * o.n4[a][b];
            }
        }
    }

    /// Flattened as `[n1, n2, n3_0..2, n4_00, n4_01, n4_02, n4_11, n4_12, n4_22]`.
    pub fn to_array(&self) -> [T; 11] {
        let n = &self.n4;
        [
            self.n1, self.n2, self.n3[0], self.n3[1], self.n3[2], n[0][0], n[0][1], n[0][2], n[1][1], n[1][2], n[2][2],
        ]
    }

    pub fn from_array(v: &[T; 11]) -> Self {
        Self {
            n1: v[0],
            n2: v[1],
            n3: [v[2], v[3], v[4]],
            n4: [[v[5], v[6], v[7]], [v[6], v[8], v[9]], [v[7], v[9], v[10]]],
        }
    }
}

/// Sources split by background coefficient: the full value is
/// `plain + (a'/a) hubble + (rho_B a^2) density`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SourceParts<T> {
    pub plain: PointSources<T>,
    pub hubble: PointSources<T>,
    pub density: PointSources<T>,
}

impl<T: Ring> SourceParts<T> {
    pub fn combine(&self, conf_h: f64, rho_a2: f64) -> PointSources<T> {
        let mut out = self.plain;
        out.n1 += self.hubble.n1 * conf_h + self.density.n1 * rho_a2;
        out.n2 += self.hubble.n2 * conf_h + self.density.n2 * rho_a2;
        for b in 0..3 {
            out.n3[b] += self.hubble.n3[b] * conf_h + self.density.n3[b] * rho_a2;
            for a in 0..3 {
                out.n4[a][b] += self.hubble.n4[a][b] * conf_h + self.density.n4[a][b] * rho_a2;
            }
        }
        out
    }
}

fn dot<T: Ring>(a: &T3<T>, b: &T3<T>) -> T {
    let mut s = T::default();
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

fn tr<T: Ring>(a: &T3<T>) -> T {
    a[0][0] + a[1][1] + a[2][2]
}

/// Evaluates all four sources, split by background coefficient.
pub fn point_sources<T: Ring>(j: &PointJet<T>) -> SourceParts<T> {
    let z = T::default();
    let (g, dg, ddg, p, dp, pp) = (&j.g, &j.dg, &j.ddg, &j.p, &j.dp, &j.pp);
    let trg = tr(g);
    let trp = tr(p);
    let dtr: [T; 3] = std::array::from_fn(|c| tr(&dg[c]));
    let ddtr: T3<T> = std::array::from_fn(|c| std::array::from_fn(|d| tr(&ddg[c][d])));
    let lap_g: T3<T> =
        std::array::from_fn(|a| std::array::from_fn(|b| ddg[0][0][a][b] + ddg[1][1][a][b] + ddg[2][2][a][b]));
    let lap_tr = ddtr[0][0] + ddtr[1][1] + ddtr[2][2];
    // div[n] = d_d g_dn
    let div: [T; 3] = std::array::from_fn(|n| dg[0][0][n] + dg[1][1][n] + dg[2][2][n]);
    let ddiv = {
        let mut s = z;
        for d in 0..3 {
            for n in 0..3 {
                s += ddg[n][d][d][n];
            }
        }
        s
    };
    let pp_dot = dot(p, p);
    let dg2 = {
        let mut s = z;
        for c in 0..3 {
            s += dot(&dg[c], &dg[c]);
        }
        s
    };
    // d_m g_dn d_n g_md
    let dg_cross = {
        let mut s = z;
        for m in 0..3 {
            for d in 0..3 {
                for n in 0..3 {
                    s += dg[m][d][n] * dg[n][m][d];
                }
            }
        }
        s
    };
    let dtr2 = dtr[0] * dtr[0] + dtr[1] * dtr[1] + dtr[2] * dtr[2];

    let dtrace = trg - tr(&j.g0);
    let density_bracket = dtrace * dtrace * -0.25 - (dot(g, g) - dot(&j.g0, &j.g0)) * 0.5 + j.d0 * dtrace;

    // g_ab (Lap g_ab + d_a d_b tr - 2 d_b d_d g_da) + d_d g_da (d_a tr - d_b g_ab)
    let mut gradient_bracket = z;
    for a in 0..3 {
        for b in 0..3 {
            let mut inner = lap_g[a][b] + ddtr[a][b];
            for d in 0..3 {
                inner = inner - ddg[b][d][d][a] * 2.0;
            }
            gradient_bracket += g[a][b] * inner;
        }
        let mut inner = dtr[a];
        for b in 0..3 {
            inner = inner - dg[b][a][b];
        }
        gradient_bracket += div[a] * inner;
    }
    gradient_bracket += dg2 * 0.75 - dg_cross * 0.5 - dtr2 * 0.25;

    let mut out = SourceParts::<T>::default();

    out.plain.n1 = pp_dot * (-1.0 / 6.0) - dot(g, pp) * (1.0 / 3.0);
    out.hubble.n1 = dot(p, g) * (-1.0 / 3.0);
    out.density.n1 = density_bracket * (-1.0 / 6.0);

    out.plain.n2 = (pp_dot - trp * trp) * (-1.0 / 24.0) + gradient_bracket * (1.0 / 6.0);
    out.hubble.n2 = dot(g, p) * (-1.0 / 3.0);
    out.density.n2 = density_bracket * (1.0 / 6.0);

    for b in 0..3 {
        let mut s = z;
        for a in 0..3 {
            for d in 0..3 {
                s += g[a][d] * (dp[a][b][d] - dp[b][a][d]);
                s += dg[a][a][d] * p[b][d];
                s = s - dg[b][a][d] * p[a][d] * 0.5;
            }
        }
        for d in 0..3 {
            s = s - dtr[d] * p[d][b] * 0.5;
        }
        out.plain.n3[b] = s;
    }

    // Isotropic pieces of the evolution-equation bracket.
    let mut iso = z;
    for d in 0..3 {
        for n in 0..3 {
            let mut inner = lap_g[d][n] + ddtr[d][n];
            for m in 0..3 {
                inner = inner - ddg[m][n][m][d] * 2.0;
            }
            iso = iso - g[d][n] * inner;
        }
        let mut inner = dtr[d];
        for m in 0..3 {
            inner = inner - dg[m][d][m];
        }
        iso = iso - div[d] * inner;
    }
    iso += dg2 * -0.75 + dg_cross * 0.5 + dtr2 * 0.25;

    let pdp = (trp * trp - pp_dot) * 0.125;
    for a in 0..3 {
        for b in 0..3 {
            let mut br = g[a][b] * (lap_tr - ddiv);
            for d in 0..3 {
                for n in 0..3 {
                    br += g[d][n] * (ddg[d][n][a][b] + ddg[a][b][d][n] - ddg[b][d][a][n] - ddg[a][d][n][b]) * 2.0;
                }
            }
            for n in 0..3 {
                br += div[n] * (dg[n][a][b] - dg[b][a][n] - dg[a][b][n]) * 2.0;
            }
            for e in 0..3 {
                for n in 0..3 {
                    br += dg[n][e][a] * dg[n][b][e] * 2.0;
                    br = br - dg[n][e][a] * dg[e][n][b] * 2.0;
                    br += dg[b][e][n] * dg[a][e][n];
                }
                br += dtr[e] * (dg[b][e][a] + dg[a][e][b] - dg[e][a][b]);
            }
            if a == b {
                br += iso;
            }
            let mut s = z;
            for d in 0..3 {
                s += p[a][d] * p[d][b];
            }
            s = s - trp * p[a][b] * 0.5 - br * 0.5;
            if a == b {
                s += pdp;
            }
            out.plain.n4[a][b] = s;
        }
    }
    out
}
