//! Add a statement that contradicts a profile and locate the conflict.
//!
//! `cargo run --example diagnose`

use choquet_smaa::capacity::base_constraints;
use choquet_smaa::lp::{diagnose, solve_epsilon_max};
use choquet_smaa::pipeline::bundled_data_dir;
use choquet_smaa::hierarchy::Hierarchy;
use choquet_smaa::preferences::{compile, parse_profile};

fn main() -> choquet_smaa::Result<()> {
    let dir = bundled_data_dir();
    let h = Hierarchy::load(dir.join("eis_hierarchy.json"))?;
    let mut text = std::fs::read_to_string(dir.join("dmu.prefs"))?;
    // The university group ranks FC and IN above IA and IMP.
    text.push_str("injected: importance > node=root : IMP | FC\n");
    let profile = parse_profile("dmu+injected", text.as_bytes(), &h, None)?;

    let mut c = base_constraints(&h);
    c.extend(&compile(&profile, &h, None)?)?;
    println!("ε* with the injected statement: {:.3e}", solve_epsilon_max(&c)?.epsilon_star);
    let conflict = diagnose(&c)?;
    println!("irreducible conflict: {}", conflict.join(", "));
    for id in &conflict {
        for clause in &profile.statement(id).expect("ids come from the profile").clauses {
            println!("  {id}: {clause}");
        }
    }
    Ok(())
}
