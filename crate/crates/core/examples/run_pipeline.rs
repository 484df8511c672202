//! Runs the command layer end to end into a scratch directory and prints the
//! verdicts of each stage.

use desitter::scenario::commands::{execute, Command, Options};

fn main() -> desitter::Result<()> {
    let root = std::env::temp_dir().join("desitter-example");
    let opts = Options {
        out: Some(root.clone()),
        grid_n: Some(8),
        ..Options::default()
    };
    for cmd in [
        Command::Background,
        Command::FirstOrder,
        Command::SecondOrder,
        Command::Diagnose,
    ] {
        let report = execute(&cmd, &opts)?;
        println!("{}", cmd.name());
        for line in &report.lines {
            println!("  {line}");
        }
        for (name, ok) in &report.verdicts {
            println!("  {name}: {}", if *ok { "pass" } else { "fail" });
        }
    }
    println!("outputs in {}", root.display());
    Ok(())
}
