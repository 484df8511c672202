use super::{max_rel, Metric};
use crate::background::{background_spec, coefficient_a, log_tau_grid, Background, BackgroundParams};
use crate::error::Result;
use crate::first_order::{
    analytic_scalar_1, evolve_mode_ode, scalar_constants_from_data, tensor_polarization, ModeFamily, Polarization,
    TensorModeAmplitudes,
};
use crate::numerics::IntegratorSpec;
use crate::scenario::figures::{figure1, preset};

const LAMBDA: f64 = 0.001;
const RHO0: f64 = 0.01;

pub fn run() -> Result<Vec<Metric>> {
    let spec = IntegratorSpec::adaptive(1e-15, 1e-13);
    let mut out = Vec::new();

    // Scalar mode on the late-time background against the Bessel solution.
    let late = Background::asymptotic(LAMBDA, RHO0, -(3.0 / LAMBDA).sqrt())?;
    let a_coef = coefficient_a(LAMBDA, RHO0)?;
    let taus = log_tau_grid(late.tau0(), 3.0, 31);
    let (c1, c2) = scalar_constants_from_data(a_coef, late.tau0(), 1.0, 0.02)?;
    let tr = evolve_mode_ode(&late, ModeFamily::Scalar, 0.0, &[1.0, 0.02], &taus, &spec)?;
    let mut worst = 0.0f64;
    for (t, y) in tr.t.iter().zip(&tr.y) {
        let exact = analytic_scalar_1(c1, c2, a_coef, *t)?;
        worst = worst.max((y[0] - exact).abs() / exact.abs());
    }
    out.push(Metric::at_most("scalar_vs_bessel", worst, 1e-6));

    // Vector mode times the scale factor is constant.
    let bg = Background::dust(BackgroundParams::new(LAMBDA, RHO0, 1.0)?);
    let taus = log_tau_grid(bg.tau0(), 3.0, 31);
    let tr = evolve_mode_ode(&bg, ModeFamily::Vector, 0.0, &[0.7], &taus, &spec)?;
    let states = bg.evolve(&taus, &background_spec())?;
    let c = 0.7 * states[0].a;
    let za: Vec<f64> = tr.y.iter().zip(&states).map(|(y, s)| y[0] * s.a / c).collect();
    out.push(Metric::at_most(
        "vector_times_a",
        max_rel(za, std::iter::repeat(1.0), 1.0),
        1e-8,
    ));

    // Tensor mode q = 1 in the last decade against the closed form matched at
    // the start of that decade.
    let cfg = preset("figure1")?;
    let t = figure1(&cfg, &bg)?;
    let tau = t.column("tau").expect("tau column");
    let u = t.column("pi_component").expect("pi column");
    let start = tau
        .iter()
        .position(|x| x.abs() <= bg.tau0().abs() / 100.0 * (1.0 + 1e-12))
        .expect("late samples");
    let decade: Vec<f64> = tau[start..].to_vec();
    let tr = evolve_mode_ode(&bg, ModeFamily::Tensor, 1.0, &[1.0, 0.0], &[decade[0]], &spec)?;
    let (u0, du0) = (tr.y[0][0], tr.y[0][1]);
    let e = tensor_polarization([1.0, 0.0, 0.0], Polarization::Plus);
    let m = TensorModeAmplitudes::from_data(1.0, [1.0, 0.0, 0.0], e, decade[0], u0, du0)?;
    let closed: Vec<f64> = decade.iter().map(|t| m.value(*t)[1][1] / e[1][1]).collect();
    let scale = u[start..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let i_end = tau
        .iter()
        .position(|x| x.abs() <= bg.tau0().abs() / 1000.0 * (1.0 + 1e-12))
        .expect("samples");
    out.push(Metric::at_most(
        "tensor_vs_closed_form",
        max_rel(u[start..i_end].iter().copied(), closed, scale),
        1e-4,
    ));

    // Oscillation followed by settling.
    let sign_changes = u.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    out.push(Metric::at_least("tensor_sign_changes", sign_changes as f64, 2.0));
    let bound = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    out.push(Metric::at_most("tensor_max_abs", bound, 1.0 + 1e-9));
    let n = u.len();
    let last = tau
        .iter()
        .position(|x| x.abs() <= tau[n - 1].abs() * 10.0 * (1.0 + 1e-12))
        .expect("last decade");
    out.push(Metric::at_most(
        "tensor_last_decade_change",
        ((u[n - 1] - u[last]) / u[n - 1]).abs(),
        1e-3,
    ));
    Ok(out)
}
