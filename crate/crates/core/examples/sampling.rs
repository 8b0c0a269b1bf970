//! Draw compatible capacities by hit-and-run.
//!
//! `cargo run --example sampling`

use choquet_smaa::capacity::base_constraints;
use choquet_smaa::hierarchy::{Hierarchy, HierarchySpec};
use choquet_smaa::lp::solve_epsilon_max;
use choquet_smaa::pipeline::bundled_data_dir;
use choquet_smaa::preferences::{compile, PreferenceProfile};
use choquet_smaa::sampler::{sample, sample_with_solution, SamplerOptions};

fn main() -> choquet_smaa::Result<()> {
    // Two criteria: the polytope is the triangle m1, m2 ≥ 0, m12 = 1 - m1 - m2 ≥ -min(m1, m2).
    let h = Hierarchy::build(&HierarchySpec::node(
        "root",
        vec![HierarchySpec::leaf("x"), HierarchySpec::leaf("y")],
    ))?;
    let s = sample(&base_constraints(&h), 5000, 7, &SamplerOptions::default())?;
    let mean = |k: usize| s.vectors.iter().map(|v| v.coefficients()[k]).sum::<f64>() / s.len() as f64;
    println!("two criteria: mean m1 {:.3}, m2 {:.3}, m12 {:.3}", mean(0), mean(1), mean(2));

    let dir = bundled_data_dir();
    let h = Hierarchy::load(dir.join("eis_hierarchy.json"))?;
    let profile = PreferenceProfile::load(dir.join("dmg.prefs"), &h, None)?;
    let mut c = base_constraints(&h);
    c.extend(&compile(&profile, &h, None)?)?;
    let solution = solve_epsilon_max(&c)?;
    let opts = SamplerOptions {
        chains: 2,
        ..SamplerOptions::default()
    };
    let s = sample_with_solution(&c, &solution, 2000, 42, &opts)?;
    println!(
        "government profile: {} capacities over {} coordinates, strict rows held at ε = {:.1e}",
        s.len(),
        s.vectors[0].coefficients().len(),
        s.epsilon
    );
    let worst = s.vectors.iter().map(|m| c.min_slack(m, s.epsilon)).fold(f64::INFINITY, f64::min);
    println!("smallest constraint slack over all samples: {worst:.3e}");
    Ok(())
}
