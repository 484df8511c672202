//! Fixed presets producing the figure series.

use num_complex::Complex64 as C;

use super::config::ScenarioConfig;
use super::output::ArtifactWriter;
use super::run::mean_and_origin;
use crate::background::Background;
use crate::error::{Error, Result};
use crate::first_order::{evolve_mode_ode, init_first_order, ModeFamily};
use crate::second_order::bilinear::FirstOrderSources;
use crate::second_order::evolve::{evolve_scalar_n, RaychaudhuriSource};
use crate::table::Table;

pub const PRESETS: [&str; 2] = ["figure1", "figure2"];

const FIGURE1: &str = r#"
name = "figure1"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 16
[sampling]
decades = 4.0
samples = 401
"#;

const FIGURE2: &str = r#"
name = "figure2"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 16
[sampling]
decades = 3.0
samples = 200
[[first_order.modes]]
family = "scalar"
k = [1, 0, 0]
amplitude = 1e-3
[[first_order.modes]]
family = "scalar"
k = [0, 1, 1]
amplitude = 5e-4
phase = 0.7
"#;

/// Configuration of a named preset.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "figure1" => ScenarioConfig::from_toml_str(FIGURE1),
        "figure2" => ScenarioConfig::from_toml_str(FIGURE2),
        _ => Err(Error::input(format!(
            "unknown preset {name:?}; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

/// Runs a preset and writes its CSV. Returns the file name.
pub fn run_preset(cfg: &ScenarioConfig, name: &str, w: &mut ArtifactWriter) -> Result<&'static str> {
    let bg = cfg.background.build()?;
    match name {
        "figure1" => {
            w.write_table("fig1.csv", &figure1(cfg, &bg)?)?;
            Ok("fig1.csv")
        }
        "figure2" => {
            w.write_table("fig2.csv", &figure2(cfg, &bg)?)?;
            Ok("fig2.csv")
        }
        _ => Err(Error::input(format!(
            "unknown preset {name:?}; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

/// Single tensor mode `q = 1` starting from unit amplitude at rest.
pub fn figure1(cfg: &ScenarioConfig, bg: &Background) -> Result<Table> {
    let taus = cfg.sampling.taus(bg.tau0());
    let traj = evolve_mode_ode(bg, ModeFamily::Tensor, 1.0, &[1.0, 0.0], &taus, &cfg.integrator)?;
    let mut t = Table::new(&["tau", "s", "pi_component"]);
    for (tau, y) in traj.t.iter().zip(&traj.y) {
        t.push(vec![*tau, -tau, y[0]])?;
    }
    Ok(t)
}

/// Second-order scalar sourced by the configured first-order modes, from
/// vanishing data.
pub fn figure2(cfg: &ScenarioConfig, bg: &Background) -> Result<Table> {
    let taus = cfg.sampling.taus(bg.tau0());
    let grid = cfg.grid()?;
    let fo = init_first_order(&cfg.first_order_config()?, &grid, bg)?;
    let ev = fo.evolve(*taus.last().expect("samples"), &cfg.integrator)?;
    let provider = FirstOrderSources::new(&ev);
    let src = RaychaudhuriSource(&provider);
    let n = crate::second_order::evolve::ScalarSource::support(&src).len();
    let init = vec![(C::new(0.0, 0.0), C::new(0.0, 0.0)); n];
    let traj = evolve_scalar_n(2, &src, bg, &init, &taus, &cfg.second_order.options().spec)?;
    let mut t = Table::new(&["tau", "s", "phi2", "phi2_mean"]);
    for (tau, vals) in traj.taus.iter().zip(&traj.values) {
        let phi: Vec<C> = vals.iter().map(|v| v.0).collect();
        let (mean, origin) = mean_and_origin(&traj.support, &phi);
        t.push(vec![*tau, -tau, origin, mean])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_mode_settles() {
        let cfg = preset("figure1").unwrap();
        let bg = cfg.background.build().unwrap();
        let t = figure1(&cfg, &bg).unwrap();
        let u = t.column("pi_component").unwrap();
        let n = u.len();
        let sign_changes = u.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert!(sign_changes >= 2, "{sign_changes}");
        let tail = (u[n - 1] - u[n - 2]).abs() / u[n - 1].abs();
        assert!(tail < 1e-4, "{tail}");
    }

    #[test]
    fn second_order_scalar_settles() {
        let cfg = preset("figure2").unwrap();
        let bg = cfg.background.build().unwrap();
        let t = figure2(&cfg, &bg).unwrap();
        let phi = t.column("phi2").unwrap();
        let n = phi.len();
        assert!(phi[0].abs() < 1e-14);
        assert!(phi[n - 1].abs() > 1e-9);
        assert!((phi[n - 1] - phi[n - 2]).abs() < 1e-3 * phi[n - 1].abs());
    }

    #[test]
    fn unknown_preset_is_input_error() {
        assert!(matches!(preset("figure3"), Err(Error::Input(_))));
    }
}
