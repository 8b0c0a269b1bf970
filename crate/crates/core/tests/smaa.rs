mod common;

use choquet_smaa::capacity::{choquet, MobiusVector};
use choquet_smaa::dataset::NormalizedTable;
use choquet_smaa::hierarchy::CriterionId;
use choquet_smaa::smaa::{analyze, rank_of, summarize};
use common::flat;
use proptest::prelude::*;

const LEAVES: usize = 3;

/// Quarter-valued evaluations and eighth-valued weights keep every score
/// exact, so ties are real ties.
fn case() -> impl Strategy<Value = (usize, Vec<f64>, Vec<Vec<f64>>)> {
    (2usize..7).prop_flat_map(|alts| {
        (
            Just(alts),
            prop::collection::vec((0u8..=4).prop_map(|q| f64::from(q) / 4.0), alts * LEAVES),
            prop::collection::vec(prop::collection::vec(0u8..=8, LEAVES), 1..40).prop_map(|ws| {
                ws.into_iter()
                    .filter(|w| w.iter().any(|&x| x > 0))
                    .map(|w| {
                        let total: u32 = w.iter().map(|&x| u32::from(x)).sum();
                        let mut m = vec![0.0; LEAVES + LEAVES * (LEAVES - 1) / 2];
                        // Keep the weights dyadic: scale by a power of two, fold the rest into the last leaf.
                        let scale = f64::from(total.next_power_of_two());
                        for (k, &x) in w.iter().enumerate() {
                            m[k] = f64::from(x) / scale;
                        }
                        m[LEAVES - 1] += 1.0 - f64::from(total) / scale;
                        m
                    })
                    .collect::<Vec<_>>()
            }),
        )
    })
}

proptest! {
    #[test]
    fn rank_is_one_plus_strict_majorants(values in prop::collection::vec(0u8..5, 1..12)) {
        let v: Vec<f64> = values.iter().map(|&x| f64::from(x)).collect();
        for a in 0..v.len() {
            let above = v.iter().filter(|&&x| x > v[a]).count();
            prop_assert_eq!(rank_of(&v, a), above + 1);
        }
    }

    #[test]
    fn counters_match_direct_ranking((alts, cells, weights) in case()) {
        prop_assume!(!weights.is_empty());
        let h = flat(LEAVES);
        let names: Vec<String> = (0..alts).map(|a| format!("x{a}")).collect();
        let labels: Vec<String> = (0..LEAVES).map(|i| format!("a{i}")).collect();
        let table = NormalizedTable::new(names, labels, cells).unwrap();
        let samples: Vec<MobiusVector> = weights.into_iter().map(|m| MobiusVector::new(LEAVES, m).unwrap()).collect();
        let root = CriterionId::root();
        let stats = analyze(&samples, &table, &h, &root).unwrap();
        let (rm, wm) = (&stats.ranks, &stats.wins);

        let mut counts = vec![vec![0u64; alts + 1]; alts];
        let mut wins = vec![vec![0u64; alts]; alts];
        let mut ties = 0u64;
        for m in &samples {
            let s: Vec<f64> = (0..alts).map(|a| choquet(m, &h, &root, table.row(a)).unwrap()).collect();
            for a in 0..alts {
                counts[a][1 + s.iter().filter(|&&x| x > s[a]).count()] += 1;
                for b in 0..alts {
                    if s[a] > s[b] {
                        wins[a][b] += 1;
                    } else if a < b && s[a] == s[b] {
                        ties += 1;
                    }
                }
            }
        }
        prop_assert_eq!(wm.tie_count(), ties);
        for a in 0..alts {
            prop_assert_eq!((1..=alts).map(|p| rm.count(a, p)).sum::<u64>(), samples.len() as u64);
            for p in 1..=alts {
                prop_assert_eq!(rm.count(a, p), counts[a][p]);
            }
            for b in 0..alts {
                prop_assert_eq!(wm.wins(a, b), wins[a][b]);
                if a != b {
                    let total = wm.pwi(a, b) + wm.pwi(b, a) + wm.tie_frequency(a, b);
                    prop_assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }

        let summary = summarize(rm);
        let mut ordinals: Vec<usize> = summary.iter().map(|s| s.ordinal).collect();
        ordinals.sort_unstable();
        prop_assert_eq!(ordinals, (1..=alts).collect::<Vec<_>>());
        for (a, s) in summary.iter().enumerate() {
            let e: f64 = -(1..=alts).map(|p| p as f64 * rm.rai(a, p)).sum::<f64>();
            prop_assert!((s.expected - e).abs() < 1e-9);
            prop_assert!(s.best <= s.worst);
            prop_assert!(s.high.iter().all(|&(p, r)| r > 0.0 && rm.rai(a, p) == r));
        }
        for x in 0..alts {
            for y in 0..alts {
                if summary[x].ordinal < summary[y].ordinal {
                    prop_assert!(summary[x].expected >= summary[y].expected);
                    if summary[x].expected == summary[y].expected {
                        prop_assert!(x < y);
                    }
                }
            }
        }
    }
}
