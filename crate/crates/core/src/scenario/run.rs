//! Pipeline stages: background, first order, second order, diagnostics.

use std::path::Path;

use num_complex::Complex64 as C;
use serde_json::json;

use super::config::ScenarioConfig;
use super::output::ArtifactWriter;
use crate::background::{background_spec, Background, BackgroundKind};
use crate::diagnostics::{convergence_report, stencil, ConvergenceReport, FullMetric};
use crate::error::{Error, Result};
use crate::first_order::{init_first_order, FirstOrderEvolution};
use crate::second_order::asymptotics::{fit_asymptotics, AsymptoticFit};
use crate::second_order::bilinear::FirstOrderSources;
use crate::second_order::evolve::{evolve_second_order, modal_to_grid, SecondOrderTrajectory};
use crate::spectral::io::Snapshot;
use crate::spectral::Grid3;
use crate::table::Table;

/// `A^2 = M sqrt(Lambda/3) / 2` with `M = rho0 a0^3`.
pub fn a_squared(bg: &Background) -> f64 {
    0.5 * bg.params.dust_mass() * (bg.params.lambda() / 3.0).sqrt()
}

/// Sample times of the perturbation stages.
pub fn sample_taus(cfg: &ScenarioConfig, bg: &Background) -> Vec<f64> {
    cfg.sampling.taus(bg.tau0())
}

/// Latest time any stage evaluates, including the diagnostic stencil.
fn coverage_end(cfg: &ScenarioConfig, bg: &Background) -> f64 {
    let last = *sample_taus(cfg, bg).last().expect("at least two samples");
    let report_last = *cfg.report_taus(bg.tau0()).last().expect("report samples");
    last.max(stencil(report_last, cfg.diagnostics.report.rel_step)[4])
}

pub struct BackgroundSummary {
    pub dust_conservation: f64,
    pub friedmann: f64,
    /// `|a |tau| sqrt(Lambda/3) - 1|` at the sample closest to `tau0/100`.
    pub de_sitter_ratio: f64,
}

impl BackgroundSummary {
    pub fn pass(&self) -> bool {
        self.dust_conservation <= 1e-10 && self.friedmann <= 1e-8 && self.de_sitter_ratio <= 0.01
    }
}

pub fn run_background(cfg: &ScenarioConfig, w: &mut ArtifactWriter) -> Result<BackgroundSummary> {
    let (t, sum) = background_table(cfg)?;
    w.write_table("background.csv", &t)?;
    w.record("background", sum.pass());
    Ok(sum)
}

/// Background samples with their conservation and constraint residuals.
pub fn background_table(cfg: &ScenarioConfig) -> Result<(Table, BackgroundSummary)> {
    let bg = cfg.background.build()?;
    let taus = sample_taus(cfg, &bg);
    let states = bg.evolve(&taus, &background_spec())?;
    let lambda = bg.params.lambda();
    let m = bg.params.dust_mass();
    let mut t = Table::new(&[
        "tau",
        "s",
        "a",
        "a_prime",
        "conf_h",
        "rho_b",
        "dust_conservation",
        "friedmann",
        "a_tau_ratio",
    ]);
    let mut sum = BackgroundSummary {
        dust_conservation: 0.0,
        friedmann: 0.0,
        de_sitter_ratio: f64::INFINITY,
    };
    let target = (bg.tau0().abs() / 100.0).ln();
    let mut best = f64::INFINITY;
    for s in &states {
        let cons = (s.rho_b * s.a.powi(3) / m - 1.0).abs();
        let rhs = (s.rho_b + lambda) * s.a * s.a / 3.0;
        let fried = match bg.kind {
            BackgroundKind::Dust => (s.conf_h * s.conf_h / rhs - 1.0).abs(),
            BackgroundKind::Asymptotic => 0.0,
        };
        let ratio = s.a * s.tau.abs() * (lambda / 3.0).sqrt();
        sum.dust_conservation = sum.dust_conservation.max(cons);
        sum.friedmann = sum.friedmann.max(fried);
        let dist = (s.tau.abs().ln() - target).abs();
        if dist < best {
            best = dist;
            sum.de_sitter_ratio = (ratio - 1.0).abs();
        }
        t.push(vec![
            s.tau,
            s.s(),
            s.a,
            s.a_prime,
            s.conf_h,
            s.rho_b,
            cons,
            fried,
            ratio,
        ])?;
    }
    Ok((t, sum))
}

/// First-order solution covering every time later stages evaluate.
pub fn evolve_first_order(cfg: &ScenarioConfig) -> Result<FirstOrderEvolution> {
    let bg = cfg.background.build()?;
    let fo = init_first_order(&cfg.first_order_config()?, &cfg.grid()?, &bg)?;
    fo.evolve(coverage_end(cfg, &bg), &cfg.integrator)
}

pub fn run_first_order(cfg: &ScenarioConfig, w: &mut ArtifactWriter) -> Result<FirstOrderEvolution> {
    let bg = cfg.background.build()?;
    let grid = cfg.grid()?;
    let ev = evolve_first_order(cfg)?;
    let n = ev.setup.evolved.len();
    let mut header = vec!["tau".to_string(), "s".to_string()];
    for i in 0..n {
        header.push(format!("amp{i}"));
        header.push(format!("amp{i}_rate"));
    }
    let mut t = Table::new(&header);
    for tau in sample_taus(cfg, &bg) {
        let jet = ev.time_jet(tau)?;
        let mut row = vec![tau, -tau];
        for a in &jet.amps {
            row.extend_from_slice(&a[..2]);
        }
        t.push(row)?;
    }
    w.write_table("first_order.csv", &t)?;
    let tau_end = *sample_taus(cfg, &bg).last().unwrap();
    let g = ev.gamma_jet(tau_end)?;
    let snap = Snapshot::new(&grid, tau_end, g.g.comps.to_vec())?;
    w.write_bytes("gamma1_final.bin", &snap.to_bytes())?;
    Ok(ev)
}

/// Spatial mean and value at the origin of a real field given by half-space
/// modal coefficients.
pub fn mean_and_origin(support: &[[i32; 3]], values: &[C]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut origin = 0.0;
    for (m, c) in support.iter().zip(values) {
        if *m == [0, 0, 0] {
            mean += c.re;
            origin += c.re;
        } else {
            origin += 2.0 * c.re;
        }
    }
    (mean, origin)
}

pub struct SecondOrderRun {
    pub trajectory: SecondOrderTrajectory,
    pub fit: AsymptoticFit,
}

pub fn run_second_order(
    cfg: &ScenarioConfig,
    w: &mut ArtifactWriter,
    ev: &FirstOrderEvolution,
) -> Result<SecondOrderRun> {
    let bg = cfg.background.build()?;
    let taus = sample_taus(cfg, &bg);
    let provider = FirstOrderSources::new(ev);
    let traj = evolve_second_order(&provider, &bg, &taus, &cfg.second_order.options())?;
    let mut t = Table::new(&[
        "tau",
        "s",
        "phi2_mean",
        "phi2_origin",
        "phi2_max",
        "chi2_max",
        "energy_residual",
        "momentum_residual",
    ]);
    for (i, (st, r)) in traj.states.iter().zip(&traj.residuals).enumerate() {
        let (mean, origin) = mean_and_origin(&traj.support, &st.phi);
        let phi_max = st.phi.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let chi_max = st.chi.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        t.push(vec![
            traj.taus[i],
            -traj.taus[i],
            mean,
            origin,
            phi_max,
            chi_max,
            r.energy_normalized,
            r.momentum_normalized,
        ])?;
    }
    w.write_table("second_order.csv", &t)?;
    let fit = fit_asymptotics(&traj, a_squared(&bg))?;
    w.write_json("asymptotic_fit.json", &fit.to_json())?;
    w.write_table("e_amp.csv", &fit.e_amp_table())?;
    let last = traj.states.len() - 1;
    let st = traj.state_on_grid(last);
    let mut comps = vec![st.phi2.data];
    comps.extend(st.chi2.comps);
    w.write_bytes(
        "second_order_final.bin",
        &Snapshot::new(&traj.grid, st.tau, comps)?.to_bytes(),
    )?;
    let (e, m) = traj.max_residual();
    w.record("second_order_constraints", e <= 1e-4 && m <= 1e-4);
    w.record("asymptotic_fit", fit.converged && (fit.fitted_order - 2.0).abs() <= 0.2);
    Ok(SecondOrderRun { trajectory: traj, fit })
}

pub fn run_diagnostics(
    cfg: &ScenarioConfig,
    w: &mut ArtifactWriter,
    ev: &FirstOrderEvolution,
) -> Result<ConvergenceReport> {
    let report = convergence(cfg, ev)?;
    w.write_json("convergence_report.json", &report.to_json())?;
    w.write_table("convergence_report.csv", &report.to_table())?;
    w.record("de_sitter_convergence", report.pass);
    Ok(report)
}

/// Diagnostics of the full metric at the report times.
pub fn convergence(cfg: &ScenarioConfig, ev: &FirstOrderEvolution) -> Result<ConvergenceReport> {
    let bg = cfg.background.build()?;
    let report_taus = cfg.report_taus(bg.tau0());
    let mut times = vec![bg.tau0()];
    for t in &report_taus {
        times.extend(stencil(*t, cfg.diagnostics.report.rel_step));
    }
    let provider = FirstOrderSources::new(ev);
    let full = FullMetric::new(ev, &provider, &bg, &times, &cfg.second_order.options())?;
    convergence_report(&full, &bg, &report_taus, &cfg.diagnostics.report)
}

/// Named quantities [`emit_figure_data`] can extract from a run directory.
pub const SELECTORS: [&str; 2] = ["theta2", "phi2_asymptote"];

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn need(run_dir: &Path, name: &str) -> Result<std::path::PathBuf> {
    let p = run_dir.join(name);
    if !p.is_file() {
        return Err(Error::input(format!(
            "{} has no {name}; run the producing stage first",
            run_dir.display()
        )));
    }
    Ok(p)
}

/// Extracts one figure series from the artifacts in `run_dir` and writes it
/// through `w`.
pub fn emit_figure_data(run_dir: &Path, selector: &str, w: &mut ArtifactWriter) -> Result<()> {
    if !SELECTORS.contains(&selector) {
        return Err(Error::input(format!(
            "unknown selector {selector:?}; available: {}",
            SELECTORS.join(", ")
        )));
    }
    if !run_dir.is_dir() || std::fs::read_dir(run_dir)?.next().is_none() {
        return Err(Error::input(format!("run directory {} is empty", run_dir.display())));
    }
    match selector {
        "theta2" => {
            let rep = Table::read(&need(run_dir, "convergence_report.csv")?)?;
            let meta = read_json(&need(run_dir, "convergence_report.json")?)?;
            let lambda = meta["lambda"]
                .as_f64()
                .ok_or_else(|| Error::input("report lacks lambda"))?;
            let target = match meta["theta2_target"].as_str() {
                Some("lambda") => lambda,
                _ => 3.0 * lambda,
            };
            let col = |n: &str| {
                rep.column(n)
                    .ok_or_else(|| Error::input(format!("report lacks column {n}")))
            };
            let (tau, th2) = (col("tau")?, col("theta2_mean")?);
            let mut t = Table::new(&["tau", "theta2", "target", "deviation"]);
            for (a, b) in tau.iter().zip(&th2) {
                t.push(vec![*a, *b, target, b - target])?;
            }
            w.write_table("theta2.csv", &t)?;
        }
        _ => {
            let so = Table::read(&need(run_dir, "second_order.csv")?)?;
            let fit = read_json(&need(run_dir, "asymptotic_fit.json")?)?;
            let l = fit["L_over_A2"][0]["re"][0]
                .as_f64()
                .ok_or_else(|| Error::input("fit lacks L_over_A2"))?;
            let tau = so
                .column("tau")
                .ok_or_else(|| Error::input("second_order.csv lacks tau"))?;
            let phi = so
                .column("phi2_mean")
                .ok_or_else(|| Error::input("second_order.csv lacks phi2_mean"))?;
            let mut t = Table::new(&["tau", "s", "phi2_mean", "residual"]);
            for (a, b) in tau.iter().zip(&phi) {
                t.push(vec![*a, -a, *b, b - l])?;
            }
            w.write_table("phi2_asymptote.csv", &t)?;
            w.write_json(
                "phi2_asymptote.json",
                &json!({ "L_over_A2": l, "fitted_order": fit["fitted_order"], "orders": fit["orders"] }),
            )?;
        }
    }
    Ok(())
}

/// Fills a real field from modal coefficients on the second-order support.
pub fn modal_field(grid: &Grid3, support: &[[i32; 3]], values: &[C]) -> Vec<f64> {
    modal_to_grid(grid, support, |j| values[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 16
[sampling]
decades = 3.0
samples = 40
[diagnostics]
samples = 24
[[first_order.modes]]
family = "scalar"
k = [1, 0, 0]
amplitude = 1e-3
[[first_order.modes]]
family = "tensor"
k = [0, 1, 0]
amplitude = 1e-3
phase = 0.3
"#;

    #[test]
    fn full_pipeline_writes_artifacts() {
        let cfg = ScenarioConfig::from_toml_str(SMALL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::create(dir.path(), "test", SMALL).unwrap();
        assert!(run_background(&cfg, &mut w).unwrap().pass());
        let ev = run_first_order(&cfg, &mut w).unwrap();
        let so = run_second_order(&cfg, &mut w, &ev).unwrap();
        assert!(so.fit.converged);
        let rep = run_diagnostics(&cfg, &mut w, &ev).unwrap();
        assert!(rep.pass);
        let m = w.finish().unwrap();
        assert!(m.summary.values().all(|p| *p), "{:?}", m.summary);

        let out = dir.path().join("figs");
        let mut w = ArtifactWriter::create(&out, "emit", "").unwrap();
        for s in SELECTORS {
            emit_figure_data(dir.path(), s, &mut w).unwrap();
        }
        let t = Table::read(&out.join("theta2.csv")).unwrap();
        let dev = t.column("deviation").unwrap();
        assert!(dev.last().unwrap().abs() < 1e-3 * 3.0 * 0.001);
        assert!(matches!(
            emit_figure_data(dir.path(), "shear", &mut w),
            Err(Error::Input(_))
        ));
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_figure_data(empty.path(), "theta2", &mut w),
            Err(Error::Input(_))
        ));
    }
}
