#![allow(dead_code)]

use choquet_smaa::capacity::{base_constraints, ConstraintSet};
use choquet_smaa::dataset::NormalizedTable;
use choquet_smaa::hierarchy::{Hierarchy, HierarchySpec};
use choquet_smaa::pipeline::{bundled_data_dir, load_inputs};
use choquet_smaa::preferences::{compile, PreferenceProfile};

/// One root with `n` leaves named `a0, a1, …`.
pub fn flat(n: usize) -> Hierarchy {
    let leaves = (0..n).map(|i| HierarchySpec::leaf(format!("a{i}"))).collect();
    Hierarchy::build(&HierarchySpec::node("root", leaves)).unwrap()
}

pub fn eis() -> (Hierarchy, NormalizedTable) {
    let dir = bundled_data_dir();
    load_inputs(&dir.join("eis_hierarchy.json"), &dir.join("eis_raw.csv")).unwrap()
}

/// Base rows plus the bundled profile `name`.
pub fn profile_constraints(h: &Hierarchy, table: &NormalizedTable, name: &str) -> ConstraintSet {
    let path = bundled_data_dir().join(format!("{name}.prefs"));
    let profile = PreferenceProfile::load(path, h, Some(table.alternatives())).unwrap();
    let mut c = base_constraints(h);
    c.extend(&compile(&profile, h, Some(table)).unwrap()).unwrap();
    c
}

/// Möbius mass of a set, summed pair by pair without library help.
pub fn mass(m: &[f64], n: usize, set: &[usize]) -> f64 {
    let mut total = 0.0;
    for (k, &i) in set.iter().enumerate() {
        total += m[i];
        for &j in &set[k + 1..] {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            let mut idx = n;
            for r in 0..a {
                idx += n - r - 1;
            }
            total += m[idx + b - a - 1];
        }
    }
    total
}

/// Discrete Choquet integral from capacity values: sort the evaluations
/// decreasingly and weight each drop by the capacity of the upper set.
pub fn lovasz(m: &[f64], n: usize, x: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut total = 0.0;
    for k in 0..n {
        let next = if k + 1 < n { x[order[k + 1]] } else { 0.0 };
        total += (x[order[k]] - next) * mass(m, n, &order[..=k]);
    }
    total
}

/// Every monotonicity and normalization condition checked on all subsets.
pub fn brute_force_feasible(m: &[f64], n: usize, slack: f64) -> bool {
    let all: Vec<usize> = (0..n).collect();
    if (mass(m, n, &all) - 1.0).abs() > slack {
        return false;
    }
    for bits in 0u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        let v = mass(m, n, &set);
        for t in (0..n).filter(|i| bits >> i & 1 == 0) {
            let mut bigger = set.clone();
            bigger.push(t);
            if mass(m, n, &bigger) < v - slack {
                return false;
            }
        }
    }
    true
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}
