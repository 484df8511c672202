use super::Metric;
use crate::error::Result;
use crate::scenario::run::background_table;
use crate::scenario::ScenarioConfig;

pub fn run() -> Result<Vec<Metric>> {
    let cfg = ScenarioConfig::from_toml_str(
        "[background]\nlambda = 0.001\nrho0 = 0.01\n[sampling]\ndecades = 3.0\nsamples = 301\n",
    )?;
    let (_, s) = background_table(&cfg)?;
    Ok(vec![
        Metric::at_most("dust_conservation", s.dust_conservation, 1e-10),
        Metric::at_most("friedmann", s.friedmann, 1e-8),
        Metric::at_most("a_tau_ratio_dev", s.de_sitter_ratio, 0.01),
    ])
}
