mod common;

use choquet_smaa::capacity::{base_constraints, Comparator, ConstraintSet, LinearRow, RowOrigin};
use choquet_smaa::lp::{diagnose, solve_epsilon_max, LpStatus, COMPATIBILITY_THRESHOLD, VALIDATION_SLACK};
use choquet_smaa::pipeline::bundled_data_dir;
use choquet_smaa::preferences::{compile, parse_profile};
use common::{brute_force_feasible, eis, flat, profile_constraints};
use proptest::prelude::*;

fn with_statements(n: usize, text: &str) -> ConstraintSet {
    let h = flat(n);
    let p = parse_profile("t", text.as_bytes(), &h, None).unwrap();
    let mut c = base_constraints(&h);
    c.extend(&compile(&p, &h, None).unwrap()).unwrap();
    c
}

/// Sign rule: the tightest monotonicity row for `t` keeps only the negative pairs.
fn monotone(m: &[f64], n: usize, slack: f64) -> bool {
    (0..n).all(|t| {
        let mut v = m[t];
        for u in (0..n).filter(|&u| u != t) {
            let (i, j) = if t < u { (t, u) } else { (u, t) };
            let idx = n + i * (2 * n - i - 1) / 2 + (j - i - 1);
            v += m[idx].min(0.0);
        }
        v >= -slack
    })
}

#[test]
fn two_leaf_margin_matches_hand_solution() {
    // With m1 = 1 the margin is min(1 - m2, m2), best at m2 = 1/2.
    let c = with_statements(2, "s1: importance > node=root : a0 | a1\ns2: negative node=root : a0 | a1\n");
    let s = solve_epsilon_max(&c).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.epsilon_star - 0.5).abs() < 1e-9, "{}", s.epsilon_star);
    let w = s.witness.unwrap();
    assert!((w.coefficients()[0] - 1.0).abs() < 1e-9);
    assert!((w.coefficients()[1] - 0.5).abs() < 1e-9);
}

#[test]
fn contradictory_pair_is_incompatible() {
    let c = with_statements(3, "x: importance > node=root : a0 | a1\ny: importance > node=root : a1 | a0\n");
    let s = solve_epsilon_max(&c).unwrap();
    assert!(!s.is_compatible());
    let mut conflict = diagnose(&c).unwrap();
    conflict.sort();
    assert_eq!(conflict, ["x", "y"]);
}

#[test]
fn bundled_profiles_are_compatible_with_valid_witnesses() {
    let (h, table) = eis();
    let n = h.leaf_count();
    for name in ["dmu", "dmi", "dmg"] {
        let c = profile_constraints(&h, &table, name);
        let s = solve_epsilon_max(&c).unwrap();
        assert!(s.epsilon_star >= COMPATIBILITY_THRESHOLD, "{name}: {}", s.epsilon_star);
        let w = s.witness.unwrap();
        let m = w.coefficients();
        assert!(monotone(m, n, VALIDATION_SLACK), "{name}");
        for row in c.rows() {
            assert!(row.slack(m, s.epsilon_star) >= -VALIDATION_SLACK, "{name}: {:?}", row.origin);
        }
    }
}

#[test]
fn injected_contradiction_yields_an_irreducible_conflict() {
    let (h, table) = eis();
    let mut text = std::fs::read_to_string(bundled_data_dir().join("dmu.prefs")).unwrap();
    text.push_str("injected: importance > node=root : IMP | FC\n");
    let p = parse_profile("dmu", text.as_bytes(), &h, Some(table.alternatives())).unwrap();
    let mut c = base_constraints(&h);
    c.extend(&compile(&p, &h, Some(&table)).unwrap()).unwrap();
    assert!(!solve_epsilon_max(&c).unwrap().is_compatible());

    let conflict = diagnose(&c).unwrap();
    assert!(conflict.contains(&"injected".to_string()), "{conflict:?}");
    let others: Vec<String> = c.statement_ids().into_iter().filter(|id| !conflict.contains(id)).collect();
    let core = c.without_statements(&others);
    assert!(!solve_epsilon_max(&core).unwrap().is_compatible());
    for id in &conflict {
        let relaxed = core.without_statements(std::slice::from_ref(id));
        assert!(solve_epsilon_max(&relaxed).unwrap().is_compatible(), "dropping {id}");
    }
}

fn random_row(n: usize) -> impl Strategy<Value = LinearRow> {
    let d = n + n * (n - 1) / 2;
    (prop::collection::vec(-1i32..=1, d), 0usize..1000).prop_map(move |(coeffs, tag)| {
        let mut c: Vec<f64> = coeffs.into_iter().map(f64::from).collect();
        c.push(-1.0);
        LinearRow { coeffs: c, cmp: Comparator::Ge, rhs: 0.0, origin: RowOrigin::Statement(format!("r{tag}")) }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witness_satisfies_every_subset_condition(
        (n, rows) in (2usize..5).prop_flat_map(|n| (Just(n), prop::collection::vec(random_row(n), 1..4)))
    ) {
        let mut c = base_constraints(&flat(n));
        for r in rows {
            c.push(r).unwrap();
        }
        let s = solve_epsilon_max(&c).unwrap();
        if let Some(w) = &s.witness {
            let m = w.coefficients();
            prop_assert!(brute_force_feasible(m, n, 1e-9));
            for row in c.rows() {
                prop_assert!(row.slack(m, s.epsilon_star) >= -1e-9);
            }
        }
        if s.is_compatible() {
            // Asking for a visibly larger margin must fail.
            let mut tighter = c.clone();
            let mut coeffs = vec![0.0; c.dimension() + 1];
            coeffs[c.dimension()] = 1.0;
            tighter.push(LinearRow { coeffs, cmp: Comparator::Ge, rhs: s.epsilon_star + 1e-4, origin: RowOrigin::Base }).unwrap();
            let t = solve_epsilon_max(&tighter).unwrap();
            prop_assert!(t.status == LpStatus::Infeasible || t.epsilon_star < s.epsilon_star + 1e-6);
        }
    }
}
