//! Scenario description read from TOML; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::background::{log_tau_grid, Background, BackgroundKind, BackgroundParams};
use crate::diagnostics::ReportConfig;
use crate::error::{Error, Result};
use crate::first_order::{FirstOrderConfig, ModeFamily, ModeSpec, Polarization};
use crate::numerics::IntegratorSpec;
use crate::second_order::evolve::{SecondOrderInit, SecondOrderOptions};
use crate::spectral::Grid3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    pub lambda: f64,
    pub rho0: f64,
    /// Give at most one of `a0` and `tau0`; `a0 = 1` when both are absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default)]
    pub kind: BackgroundKind,
}

impl BackgroundConfig {
    pub fn build(&self) -> Result<Background> {
        let params = match (self.a0, self.tau0) {
            (Some(_), Some(_)) => return Err(Error::Config("give either a0 or tau0, not both".into())),
            (None, Some(t)) => BackgroundParams::from_tau0(self.lambda, self.rho0, t)?,
            (a0, None) => BackgroundParams::new(self.lambda, self.rho0, a0.unwrap_or(1.0))?,
        };
        Background::with_kind(params, self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub box_len: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 32,
            box_len: 2.0 * PI,
        }
    }
}

/// Randomly drawn first-order modes, reproducible from the scenario seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomModes {
    pub count: usize,
    pub amplitude: f64,
    pub k_max: i32,
    #[serde(default = "all_families")]
    pub families: Vec<ModeFamily>,
}

fn all_families() -> Vec<ModeFamily> {
    vec![ModeFamily::Scalar, ModeFamily::Vector, ModeFamily::Tensor]
}

impl RandomModes {
    pub fn draw(&self, seed: u64) -> Result<Vec<ModeSpec>> {
        if self.k_max < 1 || self.families.is_empty() {
            return Err(Error::Config(
                "random_modes needs k_max >= 1 and at least one family".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.count);
        while out.len() < self.count {
            let k: [i32; 3] = std::array::from_fn(|_| rng.gen_range(-self.k_max..=self.k_max));
            if k == [0, 0, 0] {
                continue;
            }
            let family = self.families[rng.gen_range(0..self.families.len())];
            let amp = self.amplitude * rng.gen_range(0.5..1.0);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let polarization = if rng.gen_bool(0.5) {
                Polarization::Plus
            } else {
                Polarization::Cross
            };
            out.push(ModeSpec {
                family,
                k,
                amplitude: amp,
                phase,
                rate: 0.0,
                polarization,
                chi0: None,
            });
        }
        Ok(out)
    }
}

/// Log-spaced sample times in `|tau|` starting at `tau0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub decades: f64,
    pub samples: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            decades: 3.0,
            samples: 200,
        }
    }
}

impl Sampling {
    pub fn taus(&self, tau0: f64) -> Vec<f64> {
        log_tau_grid(tau0, self.decades, self.samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Zero,
    #[default]
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SecondOrderConfig {
    pub init: InitKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_residual: Option<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for SecondOrderConfig {
    fn default() -> Self {
        let d = SecondOrderOptions::default();
        Self {
            init: InitKind::Constrained,
            abort_residual: None,
            abs_tol: d.spec.abs_tol,
            rel_tol: d.spec.rel_tol,
        }
    }
}

impl SecondOrderConfig {
    pub fn options(&self) -> SecondOrderOptions {
        SecondOrderOptions {
            init: match self.init {
                InitKind::Zero => SecondOrderInit::Zero,
                InitKind::Constrained => SecondOrderInit::Constrained,
            },
            spec: IntegratorSpec::adaptive(self.abs_tol, self.rel_tol),
            abort_residual: self.abort_residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Report times, log-spaced over the sampling decades.
    pub samples: usize,
    pub report: ReportConfig,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            samples: 31,
            report: ReportConfig::default(),
        }
    }
}

fn default_integrator() -> IntegratorSpec {
    IntegratorSpec::adaptive(1e-15, 1e-13)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub background: BackgroundConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub first_order: FirstOrderConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_modes: Option<RandomModes>,
    #[serde(default)]
    pub sampling: Sampling,
    /// First-order integrator.
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub second_order: SecondOrderConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every value against the preconditions of the stages, so that a
    /// bad file fails before anything is written.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let bg = self.background.build().map_err(cfg)?;
        let grid = self.grid().map_err(cfg)?;
        if !(self.sampling.decades > 0.0) || self.sampling.samples < 2 {
            return Err(Error::Config(
                "sampling needs decades > 0 and at least 2 samples".into(),
            ));
        }
        if self.diagnostics.samples < 2 {
            return Err(Error::Config("diagnostics need at least 2 samples".into()));
        }
        self.integrator.validate().map_err(cfg)?;
        self.second_order.options().spec.validate().map_err(cfg)?;
        for m in self.modes()? {
            m.validate(&grid).map_err(cfg)?;
        }
        crate::first_order::init_first_order(&self.first_order_config()?, &grid, &bg).map_err(cfg)?;
        bg.check_tau(*self.sampling.taus(bg.tau0()).last().unwrap())
            .map_err(cfg)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid3> {
        Grid3::new(self.grid.n, self.grid.box_len)
    }

    /// Listed modes followed by the random draw, if any.
    pub fn modes(&self) -> Result<Vec<ModeSpec>> {
        let mut modes = self.first_order.modes.clone();
        if let Some(r) = &self.random_modes {
            modes.extend(r.draw(self.seed)?);
        }
        Ok(modes)
    }

    pub fn first_order_config(&self) -> Result<FirstOrderConfig> {
        Ok(FirstOrderConfig {
            modes: self.modes()?,
            ..self.first_order.clone()
        })
    }

    /// Report times for the diagnostics: log-spaced, excluding `tau0`.
    pub fn report_taus(&self, tau0: f64) -> Vec<f64> {
        log_tau_grid(tau0, self.sampling.decades, self.diagnostics.samples + 1)[1..].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[background]\nlambda = 0.001\nrho0 = 0.01\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.grid.n, 32);
        assert_eq!(c.sampling.samples, 200);
        assert!(c.modes().unwrap().is_empty());
        let back = ScenarioConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for extra in [
            "colour = 1\n",
            "[grid]\nn = 16\nsize = 3\n",
            "[second_order]\ninit = \"random\"\n",
        ] {
            let e = ScenarioConfig::from_toml_str(&format!("{MINIMAL}{extra}")).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{e}");
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for bad in [
            "[background]\nlambda = -1.0\nrho0 = 0.01\n",
            "[background]\nlambda = 0.001\nrho0 = 0.01\na0 = 1.0\ntau0 = -40.0\n",
            &format!("{MINIMAL}[grid]\nn = 12\n"),
            &format!("{MINIMAL}[[first_order.modes]]\nfamily = \"tensor\"\nk = [20, 0, 0]\namplitude = 1e-3\n"),
        ] {
            assert!(
                matches!(ScenarioConfig::from_toml_str(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn modes_and_random_draw() {
        let text = format!(
            "seed = 7\n{MINIMAL}[[first_order.modes]]\nfamily = \"scalar\"\nk = [1, 0, 0]\namplitude = 1e-3\n\
             [random_modes]\ncount = 4\namplitude = 1e-4\nk_max = 2\n"
        );
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        let m = c.modes().unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m, c.modes().unwrap());
        let other = ScenarioConfig { seed: 8, ..c.clone() };
        assert_ne!(other.modes().unwrap(), m);
    }
}
