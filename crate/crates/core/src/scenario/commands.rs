//! Command layer behind the `desitter` binary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::config::ScenarioConfig;
use super::figures::{preset, run_preset};
use super::output::{resolve_output_dir, ArtifactWriter};
use super::run::{emit_figure_data, run_background, run_diagnostics, run_first_order, run_second_order};
use crate::checks::run_checks;
use crate::error::Result;

/// Scenario used when no configuration file is given.
pub const DEFAULT_CONFIG: &str = r#"name = "default"
[background]
lambda = 0.001
rho0 = 0.01
[grid]
n = 16
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

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Background,
    FirstOrder,
    SecondOrder,
    Diagnose,
    /// A preset name, or with `from` a selector applied to that run directory.
    Figures {
        name: String,
        from: Option<PathBuf>,
    },
    Check {
        ids: Vec<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Background => "background",
            Command::FirstOrder => "first-order",
            Command::SecondOrder => "second-order",
            Command::Diagnose => "diagnose",
            Command::Figures { .. } => "figures",
            Command::Check { .. } => "check",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub grid_n: Option<usize>,
    pub seed: Option<u64>,
    /// Treat any failed verdict as an error.
    pub check: bool,
}

#[derive(Debug, Default)]
pub struct Report {
    pub out_dir: Option<PathBuf>,
    pub verdicts: BTreeMap<String, bool>,
    pub lines: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| *v)
    }
}

fn apply_overrides(mut cfg: ScenarioConfig, opts: &Options) -> Result<ScenarioConfig> {
    if let Some(n) = opts.grid_n {
        cfg.grid.n = n;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Configuration after command-line overrides.
pub fn load_config(opts: &Options) -> Result<ScenarioConfig> {
    let cfg = match &opts.config {
        Some(p) => ScenarioConfig::from_file(p)?,
        None => ScenarioConfig::from_toml_str(DEFAULT_CONFIG)?,
    };
    apply_overrides(cfg, opts)
}

fn out_root(opts: &Options, cfg: Option<&ScenarioConfig>) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| resolve_output_dir(None))
}

fn finish(w: ArtifactWriter, mut report: Report) -> Result<Report> {
    report.out_dir = Some(w.root().to_path_buf());
    let manifest = w.finish()?;
    report.verdicts = manifest.summary;
    Ok(report)
}

/// Runs one command. Configuration problems surface before any file is
/// written.
pub fn execute(cmd: &Command, opts: &Options) -> Result<Report> {
    match cmd {
        Command::Check { ids } => {
            let mut report = Report::default();
            for o in run_checks(ids) {
                report.lines.push(o.to_string());
                report.verdicts.insert(format!("criterion_{}", o.id), o.pass());
            }
            Ok(report)
        }
        Command::Figures { name, from: Some(dir) } => {
            let out = out_root(opts, None).join("figures").join(name);
            let mut w = ArtifactWriter::create(&out, "figures", "")?;
            emit_figure_data(dir, name, &mut w)?;
            finish(w, Report::default())
        }
        Command::Figures { name, from: None } => {
            let cfg = apply_overrides(preset(name)?, opts)?;
            let out = out_root(opts, None).join("figures").join(name);
            let mut w = ArtifactWriter::create(&out, &format!("figures {name}"), &cfg.to_toml())?;
            let file = w.stage(name, |w| run_preset(&cfg, name, w))?;
            finish(
                w,
                Report {
                    lines: vec![format!("wrote {}", out.join(file).display())],
                    ..Default::default()
                },
            )
        }
        _ => {
            let cfg = load_config(opts)?;
            let out = out_root(opts, Some(&cfg)).join(cmd.name());
            let mut w = ArtifactWriter::create(&out, cmd.name(), &cfg.to_toml())?;
            let mut lines = Vec::new();
            match cmd {
                Command::Background => {
                    let s = w.stage("background", |w| run_background(&cfg, w))?;
                    lines.push(format!(
                        "dust conservation {:.3e}, friedmann {:.3e}, a|tau|sqrt(L/3)-1 at tau0/100 {:.3e}",
                        s.dust_conservation, s.friedmann, s.de_sitter_ratio
                    ));
                }
                Command::FirstOrder => {
                    w.stage("first_order", |w| run_first_order(&cfg, w))?;
                }
                Command::SecondOrder => {
                    let ev = w.stage("first_order", |w| run_first_order(&cfg, w))?;
                    let so = w.stage("second_order", |w| run_second_order(&cfg, w, &ev))?;
                    lines.push(format!(
                        "phi2 decay order {:.3}, converged {}",
                        so.fit.fitted_order, so.fit.converged
                    ));
                }
                Command::Diagnose => {
                    let ev = w.stage("first_order", |w| run_first_order(&cfg, w))?;
                    let rep = w.stage("diagnostics", |w| run_diagnostics(&cfg, w, &ev))?;
                    for i in &rep.indicators {
                        lines.push(format!(
                            "{}: value {:.3e}, order {:.3}, pass {}",
                            i.name, i.value, i.order, i.pass
                        ));
                    }
                }
                _ => unreachable!("handled above"),
            }
            finish(
                w,
                Report {
                    lines,
                    ..Default::default()
                },
            )
        }
    }
}

/// Exit status for a finished command: 4 when `--check` is set (or the
/// command is `check`) and a verdict failed.
pub fn exit_status(cmd: &Command, opts: &Options, report: &Report) -> u8 {
    let strict = opts.check || matches!(cmd, Command::Check { .. });
    if strict && !report.passed() {
        4
    } else {
        0
    }
}
