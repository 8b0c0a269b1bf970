//! The whole flow for the three stakeholder groups, written to a directory.
//!
//! `cargo run --example pipeline -- [OUT_DIR]`

use choquet_smaa::pipeline::{run, ProfileOutcome, RunConfig};

fn main() -> choquet_smaa::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("choquet-smaa-example"));
    let mut cfg = RunConfig::bundled(out);
    cfg.samples = 2000;
    cfg.nodes = Some(vec!["root".into()]);
    let report = run(&cfg)?;
    for p in &report.profiles {
        if let ProfileOutcome::Ranked { root, .. } = &p.outcome {
            let mut top: Vec<usize> = (0..root.len()).collect();
            top.sort_by_key(|&a| root[a].ordinal);
            let names: Vec<&str> = top.iter().take(5).map(|&a| report.alternatives[a].as_str()).collect();
            println!("{}: ε* = {:.4}, top five {}", p.name, p.epsilon_star, names.join(" "));
        }
    }
    println!("reports in {}", cfg.out.display());
    Ok(())
}
