//! Normalize the raw scoreboard and compare it with the published table.
//!
//! `cargo run --example normalize`

use choquet_smaa::dataset::{column_stats, load_table_file, normalize, NormalizedTable};
use choquet_smaa::hierarchy::Hierarchy;
use choquet_smaa::pipeline::{bundled_data_dir, verify_tables, VERIFY_TOLERANCE};

fn main() -> choquet_smaa::Result<()> {
    let dir = bundled_data_dir();
    let h = Hierarchy::load(dir.join("eis_hierarchy.json"))?;
    let raw = load_table_file(&dir.join("eis_raw.csv"), &h)?;
    let stats = column_stats(&raw);
    let table = normalize(&raw, &stats, &h)?;

    println!("{} countries × {} indicators", table.alternative_count(), table.criterion_count());
    for c in 0..3 {
        println!(
            "{:<7} mean {:>9.3}  sd {:>8.3}  direction {:?}",
            table.criteria()[c],
            stats.mean[c],
            stats.sd[c],
            h.leaf(c).direction
        );
    }
    let se = table.alternative_index("SE").expect("Sweden is in the table");
    let shown: Vec<String> = table.row(se)[..6].iter().map(|v| format!("{v:.2}")).collect();
    println!("SE, first six indicators: {}", shown.join(" "));

    let golden = NormalizedTable::load(dir.join("eis_normalized_expected.csv"), &h)?;
    let report = verify_tables(&table, &golden, VERIFY_TOLERANCE)?;
    println!("largest deviation from the published table: {:.4}", report.max_error());
    for c in report.columns.iter().filter(|c| c.max_error > VERIFY_TOLERANCE) {
        println!("  {} differs at {} by {:.4}", c.criterion, c.worst_alternative, c.max_error);
    }
    Ok(())
}
