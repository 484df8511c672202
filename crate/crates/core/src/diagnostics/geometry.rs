//! Pointwise 3+1 geometry of a synchronous comoving metric
//! `ds^2 = -dt^2 + h_ab dx^a dx^b`.

pub type M3 = [[f64; 3]; 3];

/// Inverse and square root of the determinant of a positive-definite matrix;
/// `None` when a leading minor is not positive.
pub fn inverse_pd(h: &M3) -> Option<(M3, f64)> {
    let m1 = h[0][0];
    let m2 = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let c00 = h[1][1] * h[2][2] - h[1][2] * h[2][1];
    let c01 = h[1][2] * h[2][0] - h[1][0] * h[2][2];
    let c02 = h[1][0] * h[2][1] - h[1][1] * h[2][0];
    let det = h[0][0] * c00 + h[0][1] * c01 + h[0][2] * c02;
    if !(m1 > 0.0 && m2 > 0.0 && det > 0.0) || !det.is_finite() {
        return None;
    }
    let inv = [
        [
            c00 / det,
            (h[0][2] * h[2][1] - h[0][1] * h[2][2]) / det,
            (h[0][1] * h[1][2] - h[0][2] * h[1][1]) / det,
        ],
        [
            c01 / det,
            (h[0][0] * h[2][2] - h[0][2] * h[2][0]) / det,
            (h[0][2] * h[1][0] - h[0][0] * h[1][2]) / det,
        ],
        [
            c02 / det,
            (h[0][1] * h[2][0] - h[0][0] * h[2][1]) / det,
            (h[0][0] * h[1][1] - h[0][1] * h[1][0]) / det,
        ],
    ];
    Some((inv, det.sqrt()))
}

fn mul(a: &M3, b: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn trace(a: &M3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

fn sym(a: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (a[i][j] + a[j][i])))
}

/// `X_ab - h_ab h^cd X_cd / 3`.
fn tracefree(x: &M3, h: &M3, hinv: &M3) -> M3 {
    let t = trace(&mul(hinv, x)) / 3.0;
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][j] - t * h[i][j]))
}

/// `sqrt(X^a_b X^b_a)` of a symmetric lower-index tensor.
pub fn norm(x: &M3, hinv: &M3) -> f64 {
    let m = mul(hinv, x);
    trace(&mul(&m, &m)).max(0.0).sqrt()
}

/// Christoffel symbols `Gamma^c_ab` and those of the first kind `Gamma_dab`.
fn christoffel(hinv: &M3, dh: &[M3; 3]) -> ([M3; 3], [M3; 3]) {
    let first: [M3; 3] = std::array::from_fn(|d| {
        std::array::from_fn(|a| std::array::from_fn(|b| 0.5 * (dh[a][d][b] + dh[b][d][a] - dh[d][a][b])))
    });
    let second = std::array::from_fn(|c| {
        std::array::from_fn(|a| std::array::from_fn(|b| (0..3).map(|d| hinv[c][d] * first[d][a][b]).sum()))
    });
    (second, first)
}

/// Ricci tensor of the 3-metric from `h`, `d_c h_ab` and `d_c d_d h_ab`.
pub fn ricci3(hinv: &M3, dh: &[M3; 3], ddh: &[[M3; 3]; 3]) -> M3 {
    let (g2, g1) = christoffel(hinv, dh);
    // d_c h^{de}
    let dhinv: [M3; 3] = std::array::from_fn(|c| {
        let t = mul(&mul(hinv, &dh[c]), hinv);
        std::array::from_fn(|i| std::array::from_fn(|j| -t[i][j]))
    });
    // d_c Gamma_dab
    let dg1 = |c: usize, d: usize, a: usize, b: usize| 0.5 * (ddh[c][a][d][b] + ddh[c][b][d][a] - ddh[c][d][a][b]);
    // d_c Gamma^e_ab
    let dg2 = |c: usize, e: usize, a: usize, b: usize| -> f64 {
        (0..3)
            .map(|d| dhinv[c][e][d] * g1[d][a][b] + hinv[e][d] * dg1(c, d, a, b))
            .sum()
    };
    let r: M3 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for c in 0..3 {
                s += dg2(c, c, a, b) - dg2(b, c, a, c);
                for d in 0..3 {
                    s += g2[c][c][d] * g2[d][a][b] - g2[c][b][d] * g2[d][a][c];
                }
            }
            s
        })
    });
    sym(&r)
}

/// Inputs at one grid point. `k` is the extrinsic curvature `dh_ab/dt / 2`,
/// `dk` its spatial derivatives and `dtk` its cosmic-time derivative.
pub struct PointGeometry {
    pub h: M3,
    pub dh: [M3; 3],
    pub ddh: [[M3; 3]; 3],
    pub k: M3,
    pub dk: [M3; 3],
    pub dtk: Option<M3>,
}

/// Kinematic and curvature quantities at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    pub theta: f64,
    pub sigma2: f64,
    pub rstar: f64,
    pub rstar_ab: M3,
    /// Electric Weyl part from the Gauss equation.
    pub e_gauss: M3,
    /// Electric Weyl part from the four-dimensional Riemann tensor; needs `dtk`.
    pub e: Option<M3>,
    pub h_mag: M3,
    pub r4: Option<f64>,
    pub e_norm: f64,
    pub h_norm: f64,
}

/// Evaluates every pointwise diagnostic; `None` for a degenerate metric.
pub fn point_diagnostics(p: &PointGeometry) -> Option<PointDiagnostics> {
    let (hinv, sqrt_det) = inverse_pd(&p.h)?;
    let kmix = mul(&hinv, &p.k);
    let theta = trace(&kmix);
    let sig: M3 = std::array::from_fn(|a| std::array::from_fn(|b| kmix[a][b] - if a == b { theta / 3.0 } else { 0.0 }));
    let sigma2 = 0.5 * trace(&mul(&sig, &sig));
    let ric = ricci3(&hinv, &p.dh, &p.ddh);
    let rstar = trace(&mul(&hinv, &ric));
    // K_ac K^c_b
    let kk = mul(&p.k, &kmix);
    let gauss: M3 = std::array::from_fn(|a| std::array::from_fn(|b| ric[a][b] + theta * p.k[a][b] - kk[a][b]));
    let e_gauss = tracefree(&gauss, &p.h, &hinv);
    let (e, r4) = match p.dtk {
        Some(dtk) => {
            let rtt: M3 = std::array::from_fn(|a| std::array::from_fn(|b| -dtk[a][b] + kk[a][b]));
            let r_ab: M3 = std::array::from_fn(|a| std::array::from_fn(|b| gauss[a][b] - rtt[a][b]));
            let r_tt = trace(&mul(&hinv, &rtt));
            let r4 = -r_tt + trace(&mul(&hinv, &r_ab));
            let e: M3 = std::array::from_fn(|a| {
                std::array::from_fn(|b| rtt[a][b] - 0.5 * (p.h[a][b] * r_tt - r_ab[a][b]) - r4 / 6.0 * p.h[a][b])
            });
            (Some(sym(&e)), Some(r4))
        }
        None => (None, None),
    };
    // D_c K_db
    let (g2, _) = christoffel(&hinv, &p.dh);
    let dk: [M3; 3] = std::array::from_fn(|c| {
        std::array::from_fn(|d| {
            std::array::from_fn(|b| {
                p.dk[c][d][b]
                    - (0..3)
                        .map(|e| g2[e][c][d] * p.k[e][b] + g2[e][c][b] * p.k[d][e])
                        .sum::<f64>()
            })
        })
    });
    let lc = |a: usize, b: usize, c: usize| -> f64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    // eps_a^{cd} = h_ae [ecd] / sqrt(h)
    let curl: M3 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for e in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let l = lc(e, c, d);
                        if l != 0.0 {
                            s += p.h[a][e] * l * dk[c][d][b];
                        }
                    }
                }
            }
            s / sqrt_det
        })
    });
    let h_mag = sym(&curl);
    let e_norm = norm(e.as_ref().unwrap_or(&e_gauss), &hinv);
    let h_norm = norm(&h_mag, &hinv);
    Some(PointDiagnostics {
        theta,
        sigma2,
        rstar,
        rstar_ab: ric,
        e_gauss,
        e,
        h_mag,
        r4,
        e_norm,
        h_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(a: f64) -> M3 {
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { a * a } else { 0.0 }))
    }

    #[test]
    fn inverse_of_general_metric() {
        let h = [[2.0, 0.3, -0.1], [0.3, 1.5, 0.2], [-0.1, 0.2, 1.1]];
        let (inv, sd) = inverse_pd(&h).unwrap();
        let p = mul(&h, &inv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((p[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(sd > 0.0);
        assert!(inverse_pd(&[[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn flrw_point() {
        // a = 2, da/dt = 0.3, d2a/dt2 = 0.05
        let (a, ad, add) = (2.0, 0.3, 0.05);
        let z = [[[0.0; 3]; 3]; 3];
        let k: M3 = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { a * ad } else { 0.0 }));
        let dtk: M3 = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { ad * ad + a * add } else { 0.0 }));
        let p = PointGeometry {
            h: flat(a),
            dh: z,
            ddh: [z; 3],
            k,
            dk: z,
            dtk: Some(dtk),
        };
        let d = point_diagnostics(&p).unwrap();
        assert!((d.theta - 3.0 * ad / a).abs() < 1e-15);
        assert_eq!(d.sigma2, 0.0);
        assert_eq!(d.rstar, 0.0);
        assert!((d.r4.unwrap() - 6.0 * (add / a + ad * ad / (a * a))).abs() < 1e-14);
        assert!(d.e_norm < 1e-15 && d.h_norm == 0.0);
    }
}
