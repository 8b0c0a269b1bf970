//! Compile a stakeholder profile and find the largest margin ε* it allows.
//!
//! `cargo run --example compatibility`

use choquet_smaa::capacity::{base_constraints, shapley};
use choquet_smaa::lp::{solve_epsilon_max_with_cuts, to_mps, Cuts, COMPATIBILITY_THRESHOLD};
use choquet_smaa::pipeline::{bundled_data_dir, load_inputs};
use choquet_smaa::preferences::{compile, PreferenceProfile};

fn main() -> choquet_smaa::Result<()> {
    let dir = bundled_data_dir();
    let (h, table) = load_inputs(&dir.join("eis_hierarchy.json"), &dir.join("eis_raw.csv"))?;
    let root = h.root().id.clone();
    for name in ["dmu", "dmi", "dmg"] {
        let profile = PreferenceProfile::load(dir.join(format!("{name}.prefs")), &h, Some(table.alternatives()))?;
        let mut c = base_constraints(&h);
        c.extend(&compile(&profile, &h, Some(&table))?)?;
        let mut cuts = Cuts::default();
        let s = solve_epsilon_max_with_cuts(&c, &mut cuts)?;
        println!(
            "{name}: {} statements, {} rows, ε* = {:.6} ({})",
            profile.statements.len(),
            c.rows().len(),
            s.epsilon_star,
            if s.epsilon_star >= COMPATIBILITY_THRESHOLD { "compatible" } else { "incompatible" }
        );
        if let Some(m) = &s.witness {
            let weights: Vec<String> = h
                .children(&root)?
                .iter()
                .map(|c| Ok(format!("{} {:.3}", c.label, shapley(m, &h, &root, &c.id)?)))
                .collect::<choquet_smaa::Result<_>>()?;
            println!("  witness importance at the root: {}", weights.join(", "));
        }
        if name == "dmu" {
            let mps = to_mps(&c, &cuts, name);
            println!("  MPS dump: {} lines, first rows:", mps.lines().count());
            for line in mps.lines().take(5) {
                println!("    {line}");
            }
        }
    }
    Ok(())
}
