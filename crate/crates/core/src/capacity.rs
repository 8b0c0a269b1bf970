//! 2-additive capacities in Möbius form and the indices computed from them.
//!
//! A [`MobiusVector`] over `n` elementary criteria stores the `n` singleton
//! coefficients followed by the `n(n-1)/2` pair coefficients in lexicographic
//! order `(0,1), (0,2), …, (n-2,n-1)`. Linear constraints over these
//! coordinates carry one extra trailing variable, the margin ε.

use std::fmt::Write as _;
use std::io::Read;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::hierarchy::{CriterionId, Hierarchy};

/// Number of Möbius coordinates of a 2-additive capacity on `n` criteria.
pub fn dimension(n: usize) -> usize {
    n + n * n.saturating_sub(1) / 2
}

/// Coordinate of the pair `{i, j}`, `i != j`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    n + i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Pairs `(i, j)`, `i < j`, in coordinate order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusVector {
    leaves: usize,
    coeffs: Vec<f64>,
}

impl MobiusVector {
    pub fn new(leaves: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dimension(leaves) {
            return Err(Error::Capacity(format!(
                "expected {} coefficients for {} criteria, got {}",
                dimension(leaves),
                leaves,
                coeffs.len()
            )));
        }
        Ok(MobiusVector { leaves, coeffs })
    }

    pub fn zeros(leaves: usize) -> Self {
        MobiusVector {
            leaves,
            coeffs: vec![0.0; dimension(leaves)],
        }
    }

    /// Equal weights, no interaction: the plain arithmetic mean.
    pub fn uniform_additive(leaves: usize) -> Self {
        let mut m = Self::zeros(leaves);
        for t in 0..leaves {
            m.coeffs[t] = 1.0 / leaves as f64;
        }
        m
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn singleton(&self, t: usize) -> f64 {
        self.coeffs[t]
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.coeffs[pair_index(self.leaves, i, j)]
    }

    pub fn set_singleton(&mut self, t: usize, v: f64) {
        self.coeffs[t] = v;
    }

    pub fn set_pair(&mut self, i: usize, j: usize, v: f64) {
        let k = pair_index(self.leaves, i, j);
        self.coeffs[k] = v;
    }

    pub fn dot(&self, form: &[f64]) -> f64 {
        self.coeffs.iter().zip(form).map(|(a, b)| a * b).sum()
    }

    /// `m({t}) + Σ_{t1} min(0, m({t, t1}))`: the tightest monotonicity
    /// left-hand side for leaf `t` over every partner subset.
    pub fn monotonicity_slack(&self, t: usize) -> f64 {
        let mut s = self.coeffs[t];
        for u in (0..self.leaves).filter(|&u| u != t) {
            s += self.pair(t, u).min(0.0);
        }
        s
    }

    /// Largest violation of the base constraints (0 when feasible).
    pub fn base_violation(&self) -> f64 {
        let mut worst = (self.coeffs.iter().sum::<f64>() - 1.0).abs();
        for t in 0..self.leaves {
            worst = worst.max(-self.singleton(t)).max(-self.monotonicity_slack(t));
        }
        worst.max(0.0)
    }

    pub fn is_feasible(&self, slack: f64) -> bool {
        self.base_violation() <= slack
    }

    /// Writes `subset,coefficient` rows; pairs join their labels with `|`.
    pub fn to_csv(&self, h: &Hierarchy) -> String {
        let labels = h.leaf_labels();
        let mut out = String::from("subset,coefficient\n");
        for t in 0..self.leaves {
            let _ = writeln!(out, "{},{}", labels[t], self.coeffs[t]);
        }
        for (i, j) in pairs(self.leaves) {
            let _ = writeln!(out, "{}|{},{}", labels[i], labels[j], self.pair(i, j));
        }
        out
    }

    pub fn from_csv(source: impl Read, h: &Hierarchy) -> Result<Self> {
        let labels = h.leaf_labels();
        let leaf = |s: &str| {
            labels
                .iter()
                .position(|l| *l == s)
                .ok_or_else(|| Error::UnknownCriterion(s.to_string()))
        };
        let mut m = MobiusVector::zeros(h.leaf_count());
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        for record in reader.records() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Capacity("expected `subset,coefficient` rows".into()));
            }
            let v: f64 = record[1]
                .parse()
                .map_err(|_| Error::Capacity(format!("bad coefficient `{}`", &record[1])))?;
            match record[0].split_once('|') {
                None => m.set_singleton(leaf(&record[0])?, v),
                Some((a, b)) => {
                    let (i, j) = (leaf(a)?, leaf(b)?);
                    if i == j {
                        return Err(Error::Capacity(format!("degenerate pair `{}`", &record[0])));
                    }
                    m.set_pair(i, j, v)
                }
            }
        }
        Ok(m)
    }
}

/// `μ(B) = Σ_{C ⊆ B} m(C)` for a set of leaf indices.
pub fn capacity_of(m: &MobiusVector, subset: &[usize]) -> Result<f64> {
    if let Some(&bad) = subset.iter().find(|&&t| t >= m.leaves) {
        return Err(Error::Capacity(format!("leaf index {bad} outside the criteria set")));
    }
    let mut set: Vec<usize> = subset.to_vec();
    set.sort_unstable();
    set.dedup();
    let mut total = 0.0;
    for (k, &i) in set.iter().enumerate() {
        total += m.singleton(i);
        for &j in &set[k + 1..] {
            total += m.pair(i, j);
        }
    }
    Ok(total)
}

fn capacity_of_range(m: &MobiusVector, leaves: Range<usize>) -> f64 {
    let mut total = 0.0;
    for i in leaves.clone() {
        total += m.singleton(i);
        for j in i + 1..leaves.end {
            total += m.pair(i, j);
        }
    }
    total
}

/// 2-additive Choquet integral of one alternative on criterion `node`.
///
/// `row` holds the normalized evaluations of the alternative on every leaf.
/// Only leaves in `E(node)` enter the sum; `m` is not renormalized.
pub fn choquet(m: &MobiusVector, h: &Hierarchy, node: &CriterionId, row: &[f64]) -> Result<f64> {
    if row.len() != m.leaves {
        return Err(Error::Capacity(format!(
            "evaluation row has {} values, expected {}",
            row.len(),
            m.leaves
        )));
    }
    let leaves = h.elementary_descendants(node)?;
    let mut total = 0.0;
    for i in leaves.clone() {
        total += m.singleton(i) * row[i];
        for j in i + 1..leaves.end {
            total += m.pair(i, j) * row[i].min(row[j]);
        }
    }
    Ok(total)
}

fn check_below(h: &Hierarchy, node: &CriterionId, child: &CriterionId) -> Result<()> {
    h.node(child)?;
    h.node(node)?;
    if !child.is_below(node) {
        return Err(Error::Capacity(format!("{child} is not a sub-criterion of {node}")));
    }
    Ok(())
}

/// Leaf ranges of the other members of `G_node^l`, `l` being `child`'s level.
fn sibling_ranges(h: &Hierarchy, node: &CriterionId, child: &CriterionId) -> Result<Vec<Range<usize>>> {
    let peers = h.children_at(node, child.level())?;
    peers
        .iter()
        .filter(|p| *p != child)
        .map(|p| h.elementary_descendants(p))
        .collect()
}

/// Linear form (over Möbius coordinates) of the Shapley numerator of `child`
/// as a sub-criterion of `node`.
pub fn shapley_numerator_form(h: &Hierarchy, node: &CriterionId, child: &CriterionId) -> Result<Vec<f64>> {
    check_below(h, node, child)?;
    let n = h.leaf_count();
    let own = h.elementary_descendants(child)?;
    let mut form = vec![0.0; dimension(n)];
    for i in own.clone() {
        form[i] += 1.0;
        for j in i + 1..own.end {
            form[pair_index(n, i, j)] += 1.0;
        }
    }
    for other in sibling_ranges(h, node, child)? {
        for i in own.clone() {
            for j in other.clone() {
                form[pair_index(n, i, j)] += 0.5;
            }
        }
    }
    Ok(form)
}

/// Linear form of the interaction numerator between two peers under `node`.
pub fn interaction_numerator_form(
    h: &Hierarchy,
    node: &CriterionId,
    first: &CriterionId,
    second: &CriterionId,
) -> Result<Vec<f64>> {
    check_below(h, node, first)?;
    check_below(h, node, second)?;
    if first == second {
        return Err(Error::Capacity(format!("{first} cannot interact with itself")));
    }
    if first.level() != second.level() {
        return Err(Error::Capacity(format!("{first} and {second} are not at the same level")));
    }
    let n = h.leaf_count();
    let mut form = vec![0.0; dimension(n)];
    for i in h.elementary_descendants(first)? {
        for j in h.elementary_descendants(second)? {
            form[pair_index(n, i, j)] += 1.0;
        }
    }
    Ok(form)
}

/// Linear form of `Ch_node(a)` given the alternative's evaluations.
pub fn choquet_form(h: &Hierarchy, node: &CriterionId, row: &[f64]) -> Result<Vec<f64>> {
    let n = h.leaf_count();
    if row.len() != n {
        return Err(Error::Capacity("evaluation row does not match the hierarchy".into()));
    }
    let leaves = h.elementary_descendants(node)?;
    let mut form = vec![0.0; dimension(n)];
    for i in leaves.clone() {
        form[i] = row[i];
        for j in i + 1..leaves.end {
            form[pair_index(n, i, j)] = row[i].min(row[j]);
        }
    }
    Ok(form)
}

fn node_capacity(m: &MobiusVector, h: &Hierarchy, node: &CriterionId) -> Result<f64> {
    let mu = capacity_of_range(m, h.elementary_descendants(node)?);
    if mu <= 0.0 {
        return Err(Error::Capacity(format!("μ(E({node})) = {mu} is not positive")));
    }
    Ok(mu)
}

/// Shapley importance of `child` as a sub-criterion of `node`.
pub fn shapley(m: &MobiusVector, h: &Hierarchy, node: &CriterionId, child: &CriterionId) -> Result<f64> {
    let form = shapley_numerator_form(h, node, child)?;
    Ok(m.dot(&form) / node_capacity(m, h, node)?)
}

/// Murofushi–Soneda interaction between two peers under `node`.
pub fn interaction(
    m: &MobiusVector,
    h: &Hierarchy,
    node: &CriterionId,
    first: &CriterionId,
    second: &CriterionId,
) -> Result<f64> {
    let form = interaction_numerator_form(h, node, first, second)?;
    Ok(m.dot(&form) / node_capacity(m, h, node)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparator {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowOrigin {
    Base,
    Statement(String),
}

/// `coeffs · (m, ε)  cmp  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub cmp: Comparator,
    pub rhs: f64,
    pub origin: RowOrigin,
}

impl LinearRow {
    pub fn lhs(&self, m: &[f64], epsilon: f64) -> f64 {
        let d = m.len();
        let mut s: f64 = self.coeffs[..d].iter().zip(m).map(|(a, b)| a * b).sum();
        s += self.coeffs[d] * epsilon;
        s
    }

    /// Signed slack: non-negative iff the row holds.
    pub fn slack(&self, m: &[f64], epsilon: f64) -> f64 {
        let v = self.lhs(m, epsilon) - self.rhs;
        match self.cmp {
            Comparator::Ge => v,
            Comparator::Le => -v,
            Comparator::Eq => -v.abs(),
        }
    }

    pub fn uses_epsilon(&self) -> bool {
        *self.coeffs.last().unwrap() != 0.0
    }
}

/// Linear relations over `(m, ε)`.
///
/// When `full_monotonicity` is set, the set additionally stands for the whole
/// exponential family `m({t}) + Σ_{t1∈T} m({t,t1}) ≥ 0`, `T ⊆ G_EL∖{t}`,
/// which solvers enforce through the sign rule rather than as explicit rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    leaves: usize,
    rows: Vec<LinearRow>,
    full_monotonicity: bool,
}

impl ConstraintSet {
    pub fn empty(leaves: usize) -> Self {
        ConstraintSet {
            leaves,
            rows: Vec::new(),
            full_monotonicity: false,
        }
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    /// Number of Möbius coordinates (ε excluded).
    pub fn dimension(&self) -> usize {
        dimension(self.leaves)
    }

    pub fn epsilon_index(&self) -> usize {
        self.dimension()
    }

    pub fn full_monotonicity(&self) -> bool {
        self.full_monotonicity
    }

    pub fn rows(&self) -> &[LinearRow] {
        &self.rows
    }

    pub fn push(&mut self, row: LinearRow) -> Result<()> {
        if row.coeffs.len() != self.dimension() + 1 {
            return Err(Error::Capacity(format!(
                "row references {} variables, expected {}",
                row.coeffs.len(),
                self.dimension() + 1
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: &ConstraintSet) -> Result<()> {
        if other.leaves != self.leaves {
            return Err(Error::Capacity("constraint sets over different criteria".into()));
        }
        for r in &other.rows {
            self.push(r.clone())?;
        }
        self.full_monotonicity |= other.full_monotonicity;
        Ok(())
    }

    /// Statement ids in first-appearance order.
    pub fn statement_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for r in &self.rows {
            if let RowOrigin::Statement(id) = &r.origin {
                if !ids.contains(id) {
                    ids.push(id.clone());
                }
            }
        }
        ids
    }

    pub fn without_statements(&self, drop: &[String]) -> ConstraintSet {
        ConstraintSet {
            leaves: self.leaves,
            rows: self
                .rows
                .iter()
                .filter(|r| !matches!(&r.origin, RowOrigin::Statement(id) if drop.contains(id)))
                .cloned()
                .collect(),
            full_monotonicity: self.full_monotonicity,
        }
    }

    /// Smallest signed slack over every row, including the implicit
    /// monotonicity family when enabled.
    pub fn min_slack(&self, m: &MobiusVector, epsilon: f64) -> f64 {
        let mut worst = f64::INFINITY;
        for r in &self.rows {
            worst = worst.min(r.slack(m.coefficients(), epsilon));
        }
        if self.full_monotonicity {
            for t in 0..self.leaves {
                worst = worst.min(m.monotonicity_slack(t));
            }
        }
        worst
    }

    /// Row (if any) that fails by more than `slack`, described for reports.
    pub fn first_violation(&self, m: &MobiusVector, epsilon: f64, slack: f64) -> Option<String> {
        for (k, r) in self.rows.iter().enumerate() {
            let s = r.slack(m.coefficients(), epsilon);
            if s < -slack {
                return Some(format!("row {k} ({:?}) violated by {:.3e}", r.origin, -s));
            }
        }
        if self.full_monotonicity {
            for t in 0..self.leaves {
                let s = m.monotonicity_slack(t);
                if s < -slack {
                    return Some(format!("monotonicity of leaf {t} violated by {:.3e}", -s));
                }
            }
        }
        None
    }

    pub fn is_satisfied(&self, m: &MobiusVector, epsilon: f64, slack: f64) -> bool {
        self.min_slack(m, epsilon) >= -slack
    }
}

/// Monotonicity row for leaf `t` with partner subset `partners`.
pub fn monotonicity_row(leaves: usize, t: usize, partners: impl IntoIterator<Item = usize>) -> LinearRow {
    let mut coeffs = vec![0.0; dimension(leaves) + 1];
    coeffs[t] = 1.0;
    for u in partners {
        coeffs[pair_index(leaves, t, u)] = 1.0;
    }
    LinearRow {
        coeffs,
        cmp: Comparator::Ge,
        rhs: 0.0,
        origin: RowOrigin::Base,
    }
}

/// Sign rule: the partner subset minimizing leaf `t`'s monotonicity sum at
/// `m` is exactly the set of negative pair coefficients.
pub fn most_violated_monotonicity_row(m: &MobiusVector, t: usize) -> LinearRow {
    let n = m.leaves();
    monotonicity_row(n, t, (0..n).filter(|&u| u != t && m.pair(t, u) < 0.0))
}

/// Base constraints: singleton non-negativity, one all-partners monotonicity
/// row per leaf, and normalization. The remaining monotonicity rows are
/// implicit (see [`ConstraintSet`]).
pub fn base_constraints(h: &Hierarchy) -> ConstraintSet {
    let n = h.leaf_count();
    let d = dimension(n);
    let mut set = ConstraintSet::empty(n);
    set.full_monotonicity = true;
    for t in 0..n {
        set.rows.push(monotonicity_row(n, t, std::iter::empty()));
    }
    if n >= 2 {
        for t in 0..n {
            set.rows.push(monotonicity_row(n, t, (0..n).filter(|&u| u != t)));
        }
    }
    let mut norm = vec![1.0; d + 1];
    norm[d] = 0.0;
    set.rows.push(LinearRow {
        coeffs: norm,
        cmp: Comparator::Eq,
        rhs: 1.0,
        origin: RowOrigin::Base,
    });
    set
}
