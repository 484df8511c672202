use super::Metric;
use crate::error::Result;
use crate::scenario::figures::{figure1, figure2, preset, PRESETS};
use crate::scenario::output::sha256_hex;

const REPEATS: usize = 3;

pub fn run() -> Result<Vec<Metric>> {
    let mut out = Vec::new();
    for name in PRESETS {
        let cfg = preset(name)?;
        let bg = cfg.background.build()?;
        let mut hashes = Vec::new();
        for _ in 0..REPEATS {
            let table = if name == "figure1" {
                figure1(&cfg, &bg)?
            } else {
                figure2(&cfg, &bg)?
            };
            hashes.push(sha256_hex(table.to_csv().as_bytes()));
        }
        let distinct = hashes.iter().filter(|h| **h != hashes[0]).count();
        out.push(Metric::at_most(format!("{name}_differing_runs"), distinct as f64, 0.0));
    }
    Ok(out)
}
