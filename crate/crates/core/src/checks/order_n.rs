use std::f64::consts::PI;

use num_complex::Complex64 as C;

use super::Metric;
use crate::background::{log_tau_grid, Background, BackgroundParams};
use crate::error::Result;
use crate::first_order::{init_first_order, FirstOrderConfig, ModeSpec, Polarization};
use crate::numerics::IntegratorSpec;
use crate::second_order::asymptotics::fit_series;
use crate::second_order::bilinear::{FirstOrderSources, SourceProvider};
use crate::second_order::evolve::{
    evolve_scalar_n, evolve_second_order, FnScalarSource, RaychaudhuriSource, SecondOrderInit, SecondOrderOptions,
};
use crate::spectral::Grid3;

const ZERO: C = C::new(0.0, 0.0);

fn dust() -> Result<Background> {
    Ok(Background::dust(BackgroundParams::new(0.001, 0.01, 1.0)?))
}

/// Scalar of order two through the generic driver against the dedicated
/// second-order evolution.
fn driver_consistency() -> Result<f64> {
    let bg = dust()?;
    let modes = vec![
        ModeSpec::scalar([1, 0, 0], 1e-3),
        ModeSpec::scalar([0, 1, 1], 5e-4).with_phase(0.7),
        ModeSpec::tensor([0, 1, 0], 1e-3, Polarization::Plus).with_phase(0.3),
    ];
    let fo = init_first_order(&FirstOrderConfig::new(modes), &Grid3::new(16, 2.0 * PI)?, &bg)?;
    let taus = log_tau_grid(bg.tau0(), 3.0, 31);
    let ev = fo.evolve(*taus.last().expect("samples"), &IntegratorSpec::adaptive(1e-15, 1e-13))?;
    let p = FirstOrderSources::new(&ev);
    let opts = SecondOrderOptions {
        init: SecondOrderInit::Zero,
        ..Default::default()
    };
    let full = evolve_second_order(&p, &bg, &taus, &opts)?;
    let init = vec![(ZERO, ZERO); p.support().len()];
    let sc = evolve_scalar_n(2, &RaychaudhuriSource(&p), &bg, &init, &taus, &opts.spec)?;
    let scale = full
        .states
        .iter()
        .flat_map(|s| s.phi.iter())
        .fold(0.0f64, |a, c| a.max(c.norm()));
    let mut worst = 0.0f64;
    for (st, vals) in full.states.iter().zip(&sc.values) {
        for (a, (b, _)) in st.phi.iter().zip(vals) {
            worst = worst.max((a - b).norm() / scale);
        }
    }
    Ok(worst)
}

/// Third-order scalar driven by a source that tends to a constant.
fn third_order() -> Result<(f64, f64)> {
    let bg = dust()?;
    let support = vec![[0, 0, 0], [1, 0, 0], [0, 2, 1]];
    let src = FnScalarSource {
        grid: Grid3::new(8, 2.0 * PI)?,
        support,
        f: |t: f64| {
            Ok(vec![
                C::new(2e-9 * (1.0 + 0.3 * t * t), 0.0),
                C::new(1e-9 + 4e-12 * t * t, -5e-10),
                C::new(0.0, 3e-10 * (1.0 - 0.01 * t * t)),
            ])
        },
    };
    let taus = log_tau_grid(bg.tau0(), 3.0, 121);
    let init = vec![(ZERO, ZERO); 3];
    let tr = evolve_scalar_n(3, &src, &bg, &init, &taus, &IntegratorSpec::adaptive(1e-18, 1e-12))?;
    let mut worst_order = f64::INFINITY;
    let mut smallest = f64::INFINITY;
    for j in 0..3 {
        for part in [|c: C| c.re, |c: C| c.im] {
            let v: Vec<f64> = tr.values.iter().map(|m| part(m[j].0)).collect();
            if v.iter().all(|x| *x == 0.0) {
                continue;
            }
            let fit = fit_series(&taus, &v)?;
            worst_order = worst_order.min(fit.order);
            smallest = smallest.min(fit.constant.abs());
        }
    }
    Ok((worst_order, smallest))
}

pub fn run() -> Result<Vec<Metric>> {
    let (order, constant) = third_order()?;
    Ok(vec![
        Metric::at_most("order2_driver_vs_dedicated", driver_consistency()?, 1e-10),
        Metric::at_least("phi3_order", order, 1.5),
        Metric::info("phi3_smallest_limit", constant),
    ])
}
