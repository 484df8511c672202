use super::Metric;
use crate::error::Result;
use crate::first_order::init_first_order;
use crate::scenario::run::a_squared;
use crate::scenario::ScenarioConfig;
use crate::second_order::asymptotics::fit_asymptotics;
use crate::second_order::bilinear::FirstOrderSources;
use crate::second_order::evolve::evolve_second_order;

const SCALAR_TENSOR: &str = r#"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 32
[sampling]
decades = 3.0
samples = 121
[[first_order.modes]]
family = "scalar"
k = [1, 0, 0]
amplitude = 1e-3
[[first_order.modes]]
family = "scalar"
k = [0, 1, 1]
amplitude = 5e-4
phase = 0.7
[[first_order.modes]]
family = "tensor"
k = [0, 1, 0]
amplitude = 1e-3
phase = 0.3
[[first_order.modes]]
family = "tensor"
k = [1, 1, 0]
amplitude = 5e-4
polarization = "cross"
"#;

pub fn run() -> Result<Vec<Metric>> {
    let cfg = ScenarioConfig::from_toml_str(SCALAR_TENSOR)?;
    let bg = cfg.background.build()?;
    let taus = cfg.sampling.taus(bg.tau0());
    let fo = init_first_order(&cfg.first_order_config()?, &cfg.grid()?, &bg)?;
    let ev = fo.evolve(*taus.last().expect("samples"), &cfg.integrator)?;
    let tr = evolve_second_order(&FirstOrderSources::new(&ev), &bg, &taus, &cfg.second_order.options())?;
    let fit = fit_asymptotics(&tr, a_squared(&bg))?;
    let o = fit.orders;
    Ok(vec![
        Metric::within("phi2_order", o.phi, 1.8, 2.2),
        Metric::within("div_chi2_order", o.q, 1.8, 2.2),
        Metric::within("div_div_chi2_order", o.g, 1.8, 2.2),
        Metric::at_least("chi2_mode_order", o.chi, 1.5),
        Metric::at_least("z2_order", o.z, 1.5),
        Metric::at_least("pi2_order", o.pi, 1.5),
        Metric::info("modes", fit.support.len() as f64),
    ])
}
