//! Rank acceptability, pairwise winning and ranking summaries.
//!
//! For every sampled capacity the alternatives are scored with the Choquet
//! integral at one node of the tree, ranked by counting strict majorants, and
//! the outcome is accumulated in integer counters. Counters are summed
//! across shards, so results do not depend on how the work is split.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::capacity::{choquet_form, MobiusVector};
use crate::dataset::NormalizedTable;
use crate::error::{Error, Result};
use crate::hierarchy::{CriterionId, Hierarchy};

/// `1 + #{b : values[b] > values[a]}`; tied alternatives share the better rank.
pub fn rank_of(values: &[f64], a: usize) -> usize {
    1 + values.iter().filter(|&&v| v > values[a]).count()
}

pub fn ranks(values: &[f64]) -> Vec<usize> {
    (0..values.len()).map(|a| rank_of(values, a)).collect()
}

/// `rai[a][s]`: share of samples placing alternative `a` at position `s + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankMatrix {
    pub node: CriterionId,
    alternatives: usize,
    samples: u64,
    counts: Vec<u64>,
}

impl RankMatrix {
    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Number of samples placing `a` at 1-based `position`.
    pub fn count(&self, a: usize, position: usize) -> u64 {
        self.counts[a * self.alternatives + position - 1]
    }

    /// Acceptability of 1-based `position` for alternative `a`.
    pub fn rai(&self, a: usize, position: usize) -> f64 {
        self.count(a, position) as f64 / self.samples as f64
    }

    pub fn row(&self, a: usize) -> Vec<f64> {
        (1..=self.alternatives).map(|s| self.rai(a, s)).collect()
    }
}

/// `pwi[a][b]`: share of samples with `a` strictly above `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct WinMatrix {
    pub node: CriterionId,
    alternatives: usize,
    samples: u64,
    wins: Vec<u64>,
    ties: Vec<u64>,
}

impl WinMatrix {
    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn wins(&self, a: usize, b: usize) -> u64 {
        self.wins[a * self.alternatives + b]
    }

    pub fn pwi(&self, a: usize, b: usize) -> f64 {
        self.wins(a, b) as f64 / self.samples as f64
    }

    /// Share of samples where `a` and `b` (distinct) score exactly the same.
    pub fn tie_frequency(&self, a: usize, b: usize) -> f64 {
        self.ties[a * self.alternatives + b] as f64 / self.samples as f64
    }

    /// Exact ties over unordered pairs of distinct alternatives, summed over samples.
    pub fn tie_count(&self) -> u64 {
        let n = self.alternatives;
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| self.ties[a * n + b]).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeStatistics {
    pub ranks: RankMatrix,
    pub wins: WinMatrix,
}

#[derive(Clone, Debug, Default)]
struct Counters {
    samples: u64,
    ranks: Vec<u64>,
    wins: Vec<u64>,
    ties: Vec<u64>,
}

impl Counters {
    fn new(n: usize) -> Self {
        Counters {
            samples: 0,
            ranks: vec![0; n * n],
            wins: vec![0; n * n],
            ties: vec![0; n * n],
        }
    }

    fn record(&mut self, values: &[f64]) {
        let n = values.len();
        self.samples += 1;
        for a in 0..n {
            let mut above = 0;
            for b in 0..n {
                if values[b] > values[a] {
                    above += 1;
                } else if values[a] > values[b] {
                    self.wins[a * n + b] += 1;
                } else if a != b {
                    self.ties[a * n + b] += 1;
                }
            }
            self.ranks[a * n + above] += 1;
        }
    }

    fn merge(mut self, other: Counters) -> Counters {
        if self.ranks.is_empty() {
            return other;
        }
        self.samples += other.samples;
        for (x, y) in [(&mut self.ranks, &other.ranks), (&mut self.wins, &other.wins), (&mut self.ties, &other.ties)] {
            x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
        }
        self
    }
}

/// Choquet scores of every alternative at `node` under one capacity.
pub fn scores(forms: &[Vec<f64>], m: &MobiusVector) -> Vec<f64> {
    forms.iter().map(|f| m.dot(f)).collect()
}

/// Linear forms of `Ch_node(a)` for every alternative of the table.
pub fn node_forms(table: &NormalizedTable, h: &Hierarchy, node: &CriterionId) -> Result<Vec<Vec<f64>>> {
    (0..table.alternative_count())
        .map(|a| choquet_form(h, node, table.row(a)))
        .collect()
}

/// RAI and PWI at `node` in one pass over the samples.
pub fn analyze(
    samples: &[MobiusVector],
    table: &NormalizedTable,
    h: &Hierarchy,
    node: &CriterionId,
) -> Result<NodeStatistics> {
    if samples.is_empty() {
        return Err(Error::Sampler("no samples to analyze".into()));
    }
    let n = table.alternative_count();
    let forms = node_forms(table, h, node)?;
    let totals = samples
        .par_iter()
        .fold(
            || Counters::new(n),
            |mut acc, m| {
                acc.record(&scores(&forms, m));
                acc
            },
        )
        .reduce(Counters::default, Counters::merge);
    Ok(NodeStatistics {
        ranks: RankMatrix {
            node: node.clone(),
            alternatives: n,
            samples: totals.samples,
            counts: totals.ranks,
        },
        wins: WinMatrix {
            node: node.clone(),
            alternatives: n,
            samples: totals.samples,
            wins: totals.wins,
            ties: totals.ties,
        },
    })
}

pub fn rank_acceptability(
    samples: &[MobiusVector],
    table: &NormalizedTable,
    h: &Hierarchy,
    node: &CriterionId,
) -> Result<RankMatrix> {
    Ok(analyze(samples, table, h, node)?.ranks)
}

pub fn pairwise_winning(
    samples: &[MobiusVector],
    table: &NormalizedTable,
    h: &Hierarchy,
    node: &CriterionId,
) -> Result<WinMatrix> {
    Ok(analyze(samples, table, h, node)?.wins)
}

/// Positions are 1-based throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct RankSummary {
    pub best: usize,
    pub best_rai: f64,
    pub worst: usize,
    pub worst_rai: f64,
    /// Up to three positions with the largest positive acceptability, most
    /// frequent first; equal shares go to the better position.
    pub high: Vec<(usize, f64)>,
    /// `-Σ_s s·rai(s)`; larger is better.
    pub expected: f64,
    /// Position by descending `expected`, ties kept in table order.
    pub ordinal: usize,
}

pub fn summarize(rm: &RankMatrix) -> Vec<RankSummary> {
    let n = rm.alternatives();
    let mut out: Vec<RankSummary> = (0..n)
        .map(|a| {
            let reached: Vec<usize> = (1..=n).filter(|&s| rm.count(a, s) > 0).collect();
            let best = *reached.first().expect("every alternative holds some position");
            let worst = *reached.last().expect("every alternative holds some position");
            let mut high = reached.clone();
            high.sort_by(|&x, &y| rm.count(a, y).cmp(&rm.count(a, x)).then(x.cmp(&y)));
            high.truncate(3);
            let weighted: u64 = (1..=n).map(|s| s as u64 * rm.count(a, s)).sum();
            RankSummary {
                best,
                best_rai: rm.rai(a, best),
                worst,
                worst_rai: rm.rai(a, worst),
                high: high.into_iter().map(|s| (s, rm.rai(a, s))).collect(),
                expected: -(weighted as f64) / rm.samples() as f64,
                ordinal: 0,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| out[y].expected.total_cmp(&out[x].expected));
    for (pos, a) in order.into_iter().enumerate() {
        out[a].ordinal = pos + 1;
    }
    out
}

fn four(v: f64) -> String {
    format!("{v:.4}")
}

/// Alternatives × positions.
pub fn rai_csv(rm: &RankMatrix, alternatives: &[String]) -> String {
    let n = rm.alternatives();
    let mut out = String::from("alternative");
    for s in 1..=n {
        let _ = write!(out, ",{s}");
    }
    out.push('\n');
    for (a, label) in alternatives.iter().enumerate() {
        out.push_str(label);
        for s in 1..=n {
            let _ = write!(out, ",{}", four(rm.rai(a, s)));
        }
        out.push('\n');
    }
    out
}

/// Row `a`, column `b` holds `p(a, b)`.
pub fn pwi_csv(wm: &WinMatrix, alternatives: &[String]) -> String {
    let mut out = String::from("alternative");
    for label in alternatives {
        let _ = write!(out, ",{label}");
    }
    out.push('\n');
    for (a, label) in alternatives.iter().enumerate() {
        out.push_str(label);
        for b in 0..alternatives.len() {
            let _ = write!(out, ",{}", four(wm.pwi(a, b)));
        }
        out.push('\n');
    }
    out
}

pub fn summary_csv(summary: &[RankSummary], alternatives: &[String]) -> String {
    let mut out = String::from(
        "alternative,best,best_rai,worst,worst_rai,high1,high1_rai,high2,high2_rai,high3,high3_rai,expected,ordinal\n",
    );
    for (s, label) in summary.iter().zip(alternatives) {
        let _ = write!(
            out,
            "{label},{},{},{},{}",
            s.best,
            four(s.best_rai),
            s.worst,
            four(s.worst_rai)
        );
        for k in 0..3 {
            match s.high.get(k) {
                Some((p, r)) => {
                    let _ = write!(out, ",{p},{}", four(*r));
                }
                None => out.push_str(",,"),
            }
        }
        let _ = writeln!(out, ",{},{}", four(s.expected), s.ordinal);
    }
    out
}
