//! Prints a figure preset as CSV on stdout.

use desitter::scenario::figures::{figure1, figure2, preset};

fn main() -> desitter::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "figure1".into());
    let cfg = preset(&name)?;
    let bg = cfg.background.build()?;
    let table = if name == "figure1" {
        figure1(&cfg, &bg)?
    } else {
        figure2(&cfg, &bg)?
    };
    print!("{}", table.to_csv());
    Ok(())
}
