//! Choquet scores, Shapley importance and interaction on the scoreboard tree.
//!
//! `cargo run --example choquet_indices`

use choquet_smaa::capacity::{capacity_of, choquet, interaction, shapley, MobiusVector};
use choquet_smaa::pipeline::{bundled_data_dir, load_inputs};

fn main() -> choquet_smaa::Result<()> {
    let dir = bundled_data_dir();
    let (h, table) = load_inputs(&dir.join("eis_hierarchy.json"), &dir.join("eis_raw.csv"))?;
    let n = h.leaf_count();
    let root = h.root().id.clone();
    let fc = h.find("FC")?.id.clone();
    let inv = h.find("IN")?.id.clone();

    // Equal weights: the Choquet integral is the plain mean.
    let mean = MobiusVector::uniform_additive(n);
    let se = table.alternative_index("SE").expect("Sweden is in the table");
    let row = table.row(se);
    println!(
        "SE root score, equal weights: {:.4} (row mean {:.4})",
        choquet(&mean, &h, &root, row)?,
        row.iter().sum::<f64>() / n as f64
    );

    // Shift weight onto a synergy between the first indicators of FC and IN.
    let (a, b) = (h.elementary_descendants(&fc)?.start, h.elementary_descendants(&inv)?.start);
    let mut m = mean.clone();
    m.set_singleton(a, m.singleton(a) - 0.01);
    m.set_singleton(b, m.singleton(b) - 0.01);
    m.set_pair(a, b, 0.02);
    assert!(m.is_feasible(1e-12));
    println!("μ(all) = {:.6}", capacity_of(&m, &(0..n).collect::<Vec<_>>())?);
    println!("SE root score with the synergy: {:.4}", choquet(&m, &h, &root, row)?);
    println!("SE score on FC alone: {:.4}", choquet(&m, &h, &fc, row)?);

    for child in h.children(&root)? {
        println!("Shapley({}) at the root: {:.4}", child.label, shapley(&m, &h, &root, &child.id)?);
    }
    println!("interaction(FC, IN) at the root: {:.4}", interaction(&m, &h, &root, &fc, &inv)?);
    Ok(())
}
