use std::f64::consts::PI;

use num_complex::Complex64 as C;

use super::Metric;
use crate::background::{coefficient_a, log_tau_grid, Background, BackgroundParams};
use crate::error::Result;
use crate::first_order::{
    analytic_scalar_1, init_first_order, scalar_constants_from_data, FirstOrderConfig, ModeSpec, Polarization,
};
use crate::numerics::IntegratorSpec;
use crate::second_order::bilinear::FirstOrderSources;
use crate::second_order::evolve::{
    evolve_second_order, FnSourceProvider, ModalState, SecondOrderInit, SecondOrderOptions,
};
use crate::spectral::field::SYM_PAIRS;
use crate::spectral::Grid3;

const LAMBDA: f64 = 0.001;
const RHO0: f64 = 0.01;
const ZERO: C = C::new(0.0, 0.0);

type T3 = [[C; 3]; 3];

fn late() -> Result<Background> {
    Background::asymptotic(LAMBDA, RHO0, -(3.0 / LAMBDA).sqrt())
}

/// Planted per-mode history: value and two time derivatives.
#[derive(Clone, Copy)]
struct Jet<T> {
    v: T,
    d: T,
    dd: T,
}

struct Planted {
    k: [f64; 3],
    phi: fn(f64) -> Jet<C>,
    chi: Box<dyn Fn(f64) -> Jet<T3>>,
}

fn poly(c: [f64; 3], t: f64) -> Jet<f64> {
    Jet {
        v: c[0] + c[1] * t + c[2] * t * t,
        d: c[1] + 2.0 * c[2] * t,
        dd: 2.0 * c[2],
    }
}

/// Left-hand sides of the four second-order equations for one Fourier mode.
fn left_hand_sides(k: &[f64; 3], h: f64, rho: f64, phi: Jet<C>, chi: Jet<T3>) -> [C; 11] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let i = C::new(0.0, 1.0);
    let mut out = [ZERO; 11];
    out[0] = phi.dd + phi.d * h - phi.v * (0.5 * rho);
    let mut kkchi = ZERO;
    for a in 0..3 {
        for b in 0..3 {
            kkchi += chi.v[a][b] * (k[a] * k[b]);
        }
    }
    out[1] = phi.d * h + phi.v * (k2 / 3.0) + phi.v * (0.5 * rho) + kkchi / 12.0;
    for b in 0..3 {
        let mut s = i * k[b] * phi.d * 2.0;
        for a in 0..3 {
            s += i * k[a] * chi.d[a][b] * 0.5;
        }
        out[2 + b] = s;
    }
    for (slot, &(a, b)) in SYM_PAIRS.iter().enumerate() {
        let delta = if a == b { 1.0 } else { 0.0 };
        let mut s = -(phi.dd + phi.d * (2.0 * h)) * delta + (chi.dd[a][b] + chi.d[a][b] * (2.0 * h)) * 0.5;
        s -= phi.v * (k[a] * k[b]);
        s += kkchi * (0.25 * delta);
        for d in 0..3 {
            s -= chi.v[d][a] * (0.5 * k[d] * k[b]);
            s -= chi.v[b][d] * (0.5 * k[a] * k[d]);
        }
        s += chi.v[a][b] * (0.5 * k2);
        out[5 + slot] = s;
    }
    out
}

fn sym6(m: &T3) -> [C; 6] {
    std::array::from_fn(|s| m[SYM_PAIRS[s].0][SYM_PAIRS[s].1])
}

fn manufactured() -> Result<(f64, f64)> {
    let bg = late()?;
    let grid = Grid3::new(8, 2.0 * PI)?;
    let k = [1.0, 2.0, 0.0];
    let k2 = 5.0;
    // transverse directions
    let e1 = [0.0, 0.0, 1.0];
    let e2 = [2.0 / 5f64.sqrt(), -1.0 / 5f64.sqrt(), 0.0];
    let modes: Vec<Planted> = vec![
        Planted {
            k: [0.0; 3],
            phi: |t| {
                let p = poly([0.0, 0.0, 3e-4], t);
                Jet {
                    v: C::from(p.v),
                    d: C::from(p.d),
                    dd: C::from(p.dd),
                }
            },
            chi: Box::new(|_| Jet {
                v: [[ZERO; 3]; 3],
                d: [[ZERO; 3]; 3],
                dd: [[ZERO; 3]; 3],
            }),
        },
        Planted {
            k,
            phi: |t| {
                let p = poly([1e-3, 2e-5, 1e-4], t);
                let c = C::new(0.6, -0.8);
                Jet {
                    v: c * p.v,
                    d: c * p.d,
                    dd: c * p.dd,
                }
            },
            chi: Box::new(move |t| {
                let s = poly([2e-4, -1e-5, 5e-5], t);
                let v = poly([0.0, 3e-5, 2e-5], t);
                let w = poly([1e-3, 0.0, 4e-4], t);
                let build = |s: f64, v: f64, w: f64| -> T3 {
                    std::array::from_fn(|a| {
                        std::array::from_fn(|b| {
                            let delta = if a == b { 1.0 } else { 0.0 };
                            let scalar = -(k[a] * k[b] - delta * k2 / 3.0) * s;
                            let vector = C::new(0.0, k[a] * e1[b] + k[b] * e1[a]) * v;
                            let tensor = (e2[a] * e2[b] - e1[a] * e1[b]) * w;
                            scalar + vector + tensor
                        })
                    })
                };
                Jet {
                    v: build(s.v, v.v, w.v),
                    d: build(s.d, v.d, w.d),
                    dd: build(s.dd, v.dd, w.dd),
                }
            }),
        },
    ];
    let support: Vec<[i32; 3]> = vec![[0, 0, 0], [1, 2, 0]];
    let m = bg.params.dust_mass();
    let slope = (LAMBDA / 3.0).sqrt();
    let modes = std::rc::Rc::new(modes);
    let src_modes = modes.clone();
    let f = move |t: f64| -> Result<Vec<[C; 11]>> {
        // a = -sqrt(3/Lambda)/tau on this background
        let h = -1.0 / t;
        let rho = m * (-slope * t);
        Ok(src_modes
            .iter()
            .map(|p| left_hand_sides(&p.k, h, rho, (p.phi)(t), (p.chi)(t)))
            .collect())
    };
    let provider = FnSourceProvider { grid, support, bg, f };
    let t0 = bg.tau0();
    let init = ModalState {
        phi: modes.iter().map(|p| (p.phi)(t0).v).collect(),
        dphi: modes.iter().map(|p| (p.phi)(t0).d).collect(),
        chi: modes.iter().map(|p| sym6(&(p.chi)(t0).v)).collect(),
        dchi: modes.iter().map(|p| sym6(&(p.chi)(t0).d)).collect(),
    };
    let taus = log_tau_grid(t0, 2.0, 21);
    let opts = SecondOrderOptions {
        init: SecondOrderInit::Explicit(init),
        spec: IntegratorSpec::adaptive(1e-15, 1e-13),
        abort_residual: None,
    };
    let tr = evolve_second_order(&provider, &bg, &taus, &opts)?;
    let mut worst = 0.0f64;
    for (t, st) in taus.iter().zip(&tr.states) {
        for (j, p) in modes.iter().enumerate() {
            let (ph, ch) = ((p.phi)(*t), (p.chi)(*t));
            let scale =
                ph.v.norm()
                    .max(ch.v.iter().flatten().fold(0.0f64, |a, c| a.max(c.norm())));
            worst = worst.max((st.phi[j] - ph.v).norm() / scale);
            let exact = sym6(&ch.v);
            for s in 0..6 {
                worst = worst.max((st.chi[j][s] - exact[s]).norm() / scale);
            }
        }
    }
    let (e, mm) = tr.max_residual();
    Ok((worst, e.max(mm)))
}

fn bessel_free() -> Result<f64> {
    let bg = late()?;
    let grid = Grid3::new(8, 2.0 * PI)?;
    let a_coef = coefficient_a(LAMBDA, RHO0)?;
    let support = vec![[0, 0, 0], [1, 0, 0]];
    let provider = FnSourceProvider {
        grid,
        support,
        bg,
        f: |_| Ok(vec![[ZERO; 11]; 2]),
    };
    let mut st = ModalState::zeros(2);
    st.phi = vec![C::new(1e-4, 0.0), C::new(0.0, -2e-5)];
    st.dphi = vec![C::new(3e-6, 0.0), C::new(0.0, 1e-6)];
    let taus = log_tau_grid(bg.tau0(), 3.0, 31);
    let opts = SecondOrderOptions {
        init: SecondOrderInit::Explicit(st),
        ..Default::default()
    };
    let tr = evolve_second_order(&provider, &bg, &taus, &opts)?;
    let consts = [
        scalar_constants_from_data(a_coef, bg.tau0(), 1e-4, 3e-6)?,
        scalar_constants_from_data(a_coef, bg.tau0(), -2e-5, 1e-6)?,
    ];
    let mut worst = 0.0f64;
    for (t, s) in taus.iter().zip(&tr.states) {
        for (j, (c1, c2)) in consts.iter().enumerate() {
            let exact = analytic_scalar_1(*c1, *c2, a_coef, *t)?;
            let got = if j == 0 { s.phi[j].re } else { s.phi[j].im };
            worst = worst.max((got - exact).abs() / exact.abs());
        }
    }
    Ok(worst)
}

fn constraint_drift() -> Result<f64> {
    let bg = Background::dust(BackgroundParams::new(LAMBDA, RHO0, 1.0)?);
    let modes = vec![
        ModeSpec::scalar([1, 0, 0], 1e-3),
        ModeSpec::scalar([0, 1, 1], 5e-4).with_phase(0.7),
        ModeSpec::tensor([0, 1, 0], 1e-3, Polarization::Plus).with_phase(0.3),
        ModeSpec::tensor([1, 0, 1], 5e-4, Polarization::Cross),
    ];
    let fo = init_first_order(&FirstOrderConfig::new(modes), &Grid3::new(16, 2.0 * PI)?, &bg)?;
    let taus = log_tau_grid(bg.tau0(), 3.0, 31);
    let ev = fo.evolve(*taus.last().expect("samples"), &IntegratorSpec::adaptive(1e-15, 1e-13))?;
    let tr = evolve_second_order(&FirstOrderSources::new(&ev), &bg, &taus, &SecondOrderOptions::default())?;
    let (e, m) = tr.max_residual();
    Ok(e.max(m))
}

pub fn run() -> Result<Vec<Metric>> {
    let (recovery, residual) = manufactured()?;
    Ok(vec![
        Metric::at_most("manufactured_recovery", recovery, 1e-7),
        Metric::at_most("manufactured_constraints", residual, 1e-7),
        Metric::at_most("free_scalar_vs_bessel", bessel_free()?, 1e-6),
        Metric::at_most("constraint_drift", constraint_drift()?, 1e-4),
    ])
}
