//! Brute-force evaluation of the four quadratic sources on the grid, with
//! every spatial derivative taken by an eighth-order periodic finite
//! difference and each term written out as printed.

use crate::spectral::{Grid3, ScalarField, SymTensorField};

const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

fn shift(grid: &Grid3, idx: usize, axis: usize, by: isize) -> usize {
    let n = grid.n() as isize;
    let mut ijk = grid.unindex(idx).map(|v| v as isize);
    ijk[axis] = (ijk[axis] + by).rem_euclid(n);
    grid.index(ijk[0] as usize, ijk[1] as usize, ijk[2] as usize)
}

fn d1(grid: &Grid3, f: &[f64], axis: usize) -> Vec<f64> {
    let h = grid.spacing();
    (0..f.len())
        .map(|i| {
            let mut s = 0.0;
            for (o, c) in D1.iter().enumerate() {
                let o = o as isize + 1;
                s += c * (f[shift(grid, i, axis, o)] - f[shift(grid, i, axis, -o)]);
            }
            s / h
        })
        .collect()
}

fn d2(grid: &Grid3, f: &[f64], a: usize, b: usize) -> Vec<f64> {
    if a != b {
        return d1(grid, &d1(grid, f, a), b);
    }
    let h = grid.spacing();
    (0..f.len())
        .map(|i| {
            let mut s = D2[0] * f[i];
            for (o, c) in D2.iter().enumerate().skip(1) {
                let o = o as isize;
                s += c * (f[shift(grid, i, a, o)] + f[shift(grid, i, a, -o)]);
            }
            s / (h * h)
        })
        .collect()
}

/// Grid data entering the sources.
pub struct OracleInput<'a> {
    pub g: &'a SymTensorField,
    pub p: &'a SymTensorField,
    pub pp: &'a SymTensorField,
    pub g0: &'a SymTensorField,
    pub d0: &'a ScalarField,
    pub conf_h: f64,
    pub rho_a2: f64,
}

/// Returns `[N1, N2, N3_x, N3_y, N3_z, N4_xx, N4_xy, N4_xz, N4_yy, N4_yz, N4_zz]`.
pub fn fd_sources(inp: &OracleInput) -> [Vec<f64>; 11] {
    let grid = &inp.g.grid;
    let len = grid.len();
    let comp = |t: &SymTensorField, a: usize, b: usize| t.get(a, b).to_vec();
    // gd[a][b][c] = g_ab,c ; gdd[a][b][c][d] = g_ab,cd ; pd[a][b][c] = p_ab,c
    let mut gd = vec![vec![vec![Vec::new(); 3]; 3]; 3];
    let mut gdd = vec![vec![vec![vec![Vec::new(); 3]; 3]; 3]; 3];
    let mut pd = vec![vec![vec![Vec::new(); 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let ga = comp(inp.g, a, b);
            let pa = comp(inp.p, a, b);
            for c in 0..3 {
                gd[a][b][c] = d1(grid, &ga, c);
                pd[a][b][c] = d1(grid, &pa, c);
                for d in 0..3 {
                    gdd[a][b][c][d] = d2(grid, &ga, c, d);
                }
            }
        }
    }
    let mut out: [Vec<f64>; 11] = std::array::from_fn(|_| vec![0.0; len]);
    for i in 0..len {
        let g = |a: usize, b: usize| inp.g.get(a, b)[i];
        let g0 = |a: usize, b: usize| inp.g0.get(a, b)[i];
        let p = |a: usize, b: usize| inp.p.get(a, b)[i];
        let pp = |a: usize, b: usize| inp.pp.get(a, b)[i];
        let gc = |a: usize, b: usize, c: usize| gd[a][b][c][i];
        let gcc = |a: usize, b: usize, c: usize, d: usize| gdd[a][b][c][d][i];
        let pc = |a: usize, b: usize, c: usize| pd[a][b][c][i];
        let tr_c = |c: usize| (0..3).map(|d| gc(d, d, c)).sum::<f64>();
        let tr_cc = |c: usize, e: usize| (0..3).map(|d| gcc(d, d, c, e)).sum::<f64>();
        let lap = |a: usize, b: usize| (0..3).map(|c| gcc(a, b, c, c)).sum::<f64>();
        let lap_tr: f64 = (0..3).map(|c| tr_cc(c, c)).sum();
        let (h, rho) = (inp.conf_h, inp.rho_a2);
        let d0 = inp.d0.data[i];

        let mut sum_pp = 0.0;
        let mut sum_g_pp = 0.0;
        let mut sum_p_g = 0.0;
        let mut gg = 0.0;
        let mut gg0 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                sum_pp += p(a, b) * p(a, b);
                sum_g_pp += g(a, b) * pp(a, b);
                sum_p_g += p(a, b) * g(a, b);
                gg += g(a, b) * g(a, b);
                gg0 += g0(a, b) * g0(a, b);
            }
        }
        let trg: f64 = (0..3).map(|a| g(a, a)).sum();
        let trg0: f64 = (0..3).map(|a| g0(a, a)).sum();
        let trp: f64 = (0..3).map(|a| p(a, a)).sum();
        let dtr = trg - trg0;
        let bracket = -0.25 * dtr * dtr - 0.5 * (gg - gg0) + d0 * dtr;

        // Raychaudhuri.
        let mut n1 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                n1 += -(1.0 / 6.0) * p(a, b) * (p(a, b) + 2.0 * h * g(a, b));
            }
        }
        n1 += -(1.0 / 3.0) * sum_g_pp - (1.0 / 6.0) * rho * bracket;
        out[0][i] = n1;

        // Energy constraint.
        let mut sq = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let mut inner = lap(a, b) + tr_cc(a, b);
                for d in 0..3 {
                    inner -= 2.0 * gcc(d, a, b, d);
                }
                sq += g(a, b) * inner;
            }
        }
        for a in 0..3 {
            let div_a: f64 = (0..3).map(|d| gc(d, a, d)).sum();
            let mut inner = tr_c(a);
            for b in 0..3 {
                inner -= gc(b, a, b);
            }
            sq += div_a * inner;
        }
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    sq += 0.75 * gc(a, b, d) * gc(a, b, d);
                    sq -= 0.5 * gc(a, b, d) * gc(d, a, b);
                }
            }
        }
        for d in 0..3 {
            sq -= 0.25 * tr_c(d) * tr_c(d);
        }
        out[1][i] = -(1.0 / 3.0) * h * sum_p_g - (1.0 / 24.0) * (sum_pp - trp * trp) + sq / 6.0 + rho / 6.0 * bracket;

        // Momentum constraint.
        for b in 0..3 {
            let mut s = 0.0;
            for a in 0..3 {
                for d in 0..3 {
                    s += g(a, d) * (pc(b, d, a) - pc(a, d, b));
                    s += gc(a, d, a) * p(b, d);
                    s -= 0.5 * gc(a, d, b) * p(a, d);
                }
            }
            for d in 0..3 {
                s -= 0.5 * tr_c(d) * p(d, b);
            }
            out[2 + b][i] = s;
        }

        // Evolution equation.
        let mut slot = 5;
        for a in 0..3 {
            for b in a..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                let mut s = 0.0;
                for d in 0..3 {
                    s += p(a, d) * p(d, b);
                }
                s -= 0.5 * trp * p(a, b);
                s += 0.125 * (trp * trp - sum_pp) * delta;
                let mut br = 0.0;
                let ddiv: f64 = (0..3)
                    .flat_map(|d| (0..3).map(move |n| (d, n)))
                    .map(|(d, n)| gcc(d, n, n, d))
                    .sum();
                br -= g(a, b) * (ddiv - lap_tr);
                for d in 0..3 {
                    for n in 0..3 {
                        br += 2.0 * g(d, n) * (gcc(a, b, d, n) + gcc(d, n, a, b) - gcc(a, n, b, d) - gcc(n, b, a, d));
                        br += 2.0 * gc(d, n, d) * (gc(a, b, n) - gc(a, n, b) - gc(b, n, a));
                    }
                }
                for e in 0..3 {
                    for n in 0..3 {
                        br += 2.0 * gc(e, a, n) * gc(b, e, n);
                        br -= 2.0 * gc(e, a, n) * gc(n, b, e);
                        br += gc(e, n, b) * gc(e, n, a);
                        br += gc(n, n, e) * (gc(e, a, b) + gc(e, b, a) - gc(a, b, e));
                    }
                }
                let mut iso = 0.0;
                for d in 0..3 {
                    for n in 0..3 {
                        let mut inner = lap(d, n) + tr_cc(d, n);
                        for m in 0..3 {
                            inner -= 2.0 * gcc(m, d, m, n);
                        }
                        iso -= g(d, n) * inner;
                        iso -= gc(n, d, n) * (tr_c(d) - (0..3).map(|m| gc(m, d, m)).sum::<f64>());
                        for m in 0..3 {
                            iso -= 0.75 * gc(d, n, m) * gc(d, n, m);
                            iso += 0.5 * gc(d, n, m) * gc(m, d, n);
                        }
                    }
                    iso += 0.25 * tr_c(d) * tr_c(d);
                }
                br += iso * delta;
                out[slot][i] = s - 0.5 * br;
                slot += 1;
            }
        }
    }
    out
}
