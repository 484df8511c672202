use super::Metric;
use crate::error::Result;
use crate::scenario::run::{convergence, evolve_first_order};
use crate::scenario::ScenarioConfig;

const MIXED: &str = r#"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 32
[sampling]
decades = 3.0
samples = 31
[diagnostics]
samples = 30
[[first_order.modes]]
family = "scalar"
k = [1, 0, 0]
amplitude = 1e-3
[[first_order.modes]]
family = "scalar"
k = [0, 1, 1]
amplitude = 1e-3
phase = 0.7
[[first_order.modes]]
family = "vector"
k = [0, 0, 1]
amplitude = 1e-3
polarization = "cross"
phase = 1.3
[[first_order.modes]]
family = "tensor"
k = [0, 1, 0]
amplitude = 1e-3
phase = 0.3
[[first_order.modes]]
family = "tensor"
k = [1, 1, 0]
amplitude = 1e-3
polarization = "cross"
"#;

pub fn run() -> Result<Vec<Metric>> {
    let cfg = ScenarioConfig::from_toml_str(MIXED)?;
    let ev = evolve_first_order(&cfg)?;
    let rep = convergence(&cfg, &ev)?;
    let floor = cfg.diagnostics.report.floor * rep.lambda;
    let mut out = Vec::new();
    for ind in &rep.indicators {
        let m = match ind.name.as_str() {
            "omega2" => Metric::at_most("omega2_max", ind.value, 0.0),
            "theta2_limit" | "r4_limit" => Metric::at_most(format!("{}_rel", ind.name), ind.value, ind.threshold),
            name if ind.value <= floor => Metric::at_most(format!("{name}_max"), ind.value, floor),
            name => Metric::at_least(format!("{name}_order"), ind.order, ind.threshold),
        };
        out.push(m);
        if ind.order.is_finite() && ind.value <= floor {
            out.push(Metric::info(format!("{}_order", ind.name), ind.order));
        }
    }
    let check = rep
        .rows
        .iter()
        .position(|r| r.tau.abs() <= ev.setup.bg.tau0().abs() / 100.0 * (1.0 + 1e-9));
    if let Some(i) = check {
        out.push(Metric::info(
            "theta2_minus_lambda_over_lambda",
            rep.rows[i].theta2_minus_lambda / rep.lambda,
        ));
    }
    Ok(out)
}
