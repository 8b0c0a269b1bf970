//! Rank acceptability and pairwise winning indices for one profile.
//!
//! `cargo run --example smaa`

use choquet_smaa::capacity::base_constraints;
use choquet_smaa::pipeline::{bundled_data_dir, load_inputs};
use choquet_smaa::preferences::{compile, PreferenceProfile};
use choquet_smaa::sampler::{sample, SamplerOptions};
use choquet_smaa::smaa::{analyze, summarize};

fn main() -> choquet_smaa::Result<()> {
    let dir = bundled_data_dir();
    let (h, table) = load_inputs(&dir.join("eis_hierarchy.json"), &dir.join("eis_raw.csv"))?;
    let profile = PreferenceProfile::load(dir.join("dmi.prefs"), &h, None)?;
    let mut c = base_constraints(&h);
    c.extend(&compile(&profile, &h, None)?)?;
    let samples = sample(&c, 2000, 42, &SamplerOptions::default())?;

    for label in ["root", "IMP"] {
        let node = h.find(label)?.id.clone();
        let st = analyze(&samples.vectors, &table, &h, &node)?;
        let summary = summarize(&st.ranks);
        let mut order: Vec<usize> = (0..table.alternative_count()).collect();
        order.sort_by_key(|&a| summary[a].ordinal);
        println!("industry profile, node {label}:");
        for &a in order.iter().take(5) {
            let s = &summary[a];
            let (p, r) = s.high[0];
            println!(
                "  {:>2}. {}  best {:>2} worst {:>2}  most often {:>2} ({:.1}%)  E = {:.3}",
                s.ordinal,
                table.alternatives()[a],
                s.best,
                s.worst,
                p,
                100.0 * r,
                s.expected
            );
        }
    }
    let root = h.root().id.clone();
    let wins = analyze(&samples.vectors, &table, &h, &root)?.wins;
    let (fi, dk) = (table.alternative_index("FI").unwrap(), table.alternative_index("DK").unwrap());
    println!("P(FI above DK) = {:.3}, P(DK above FI) = {:.3}", wins.pwi(fi, dk), wins.pwi(dk, fi));
    Ok(())
}
