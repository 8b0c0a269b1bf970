use std::fs;
use std::path::Path;

use choquet_smaa::pipeline::{run, ProfileOutcome, RunConfig};

fn small(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::bundled(out);
    cfg.samples = 400;
    cfg.burn_in = 2000;
    cfg.thinning = 5;
    cfg
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn identical_config_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&small(&dir.path().join("a"))).unwrap();
    let b = run(&small(&dir.path().join("b"))).unwrap();
    let (fa, fb) = (files(&dir.path().join("a")), files(&dir.path().join("b")));
    assert_eq!(fa.len(), 3 * 15 + 2);
    assert_eq!(fa, fb);
    for (p, q) in a.profiles.iter().zip(&b.profiles) {
        assert_eq!(p.epsilon_star.to_bits(), q.epsilon_star.to_bits());
    }
}

#[test]
fn default_nodes_and_report_identities() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&small(dir.path())).unwrap();
    for p in &report.profiles {
        let ProfileOutcome::Ranked { nodes, root, .. } = &p.outcome else {
            panic!("{} incompatible", p.name);
        };
        let labels: Vec<&str> = nodes.iter().map(|n| n.label.as_str()).collect();
        assert_eq!(labels, ["root", "FC", "IN", "IA", "IMP"]);
        assert_eq!(root, &nodes[0].summary);

        for node in nodes {
            let (rm, wm) = (&node.statistics.ranks, &node.statistics.wins);
            let n = rm.alternatives();
            if wm.tie_count() == 0 {
                // Strict wins counted two ways.
                for a in 0..n {
                    let wins: u64 = (0..n).map(|b| wm.wins(a, b)).sum();
                    let by_rank: u64 = (1..=n).map(|s| (n - s) as u64 * rm.count(a, s)).sum();
                    assert_eq!(wins, by_rank, "{} {}", p.name, node.label);
                }
            }
            // The ordinal order is the order of any increasing transform of E.
            let f = |e: f64| (3.0 * e).exp() + e;
            let mut by_f: Vec<usize> = (0..n).collect();
            by_f.sort_by(|&x, &y| f(node.summary[y].expected).total_cmp(&f(node.summary[x].expected)));
            let mut by_ordinal: Vec<usize> = (0..n).collect();
            by_ordinal.sort_by_key(|&a| node.summary[a].ordinal);
            assert_eq!(by_f, by_ordinal);
        }
    }
}
