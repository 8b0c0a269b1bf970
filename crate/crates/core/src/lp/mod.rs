//! ε-maximization over `E = E^Base ∪ E^DM` and infeasibility diagnosis.
//!
//! The program is `max ε` over the Möbius coordinates and `0 ≤ ε ≤ 1`.
//! When the constraint set carries the full monotonicity family, every pair
//! coefficient is split into positive and negative parts, `m_tu = p_tu - q_tu`
//! with `p, q ∈ [0, 1]`, and the family collapses to one row per leaf,
//! `m_t - Σ_u q_tu ≥ 0`. That row holds for some split exactly when
//! `m_t + Σ_u min(0, m_tu) ≥ 0`, so the feasible set in `(m, ε)` is unchanged.
//! The witness is still checked with the sign rule; any violation left by
//! round-off becomes an explicit cut and the program is re-solved.

pub mod simplex;

use std::fmt::Write as _;

use crate::capacity::{
    most_violated_monotonicity_row, pair_index, Comparator, ConstraintSet, LinearRow, MobiusVector, RowOrigin,
};
use crate::error::{Error, Result};
use simplex::{LinearProgram, Outcome};

/// `ε* ≥` this value means a compatible model exists.
pub const COMPATIBILITY_THRESHOLD: f64 = 1e-6;
/// Upper bound on ε; keeps the preference-free program bounded.
pub const EPSILON_CAP: f64 = 1.0;
/// Slack allowed when re-validating witnesses and generated rows.
pub const VALIDATION_SLACK: f64 = 1e-9;

const MAX_ROUNDS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub epsilon_star: f64,
    pub witness: Option<MobiusVector>,
    /// Monotonicity rows added after the witness check.
    pub generated_rows: usize,
}

impl LpSolution {
    pub fn is_compatible(&self) -> bool {
        self.status == LpStatus::Optimal && self.epsilon_star >= COMPATIBILITY_THRESHOLD
    }
}

/// Working set of generated monotonicity rows, reusable across solves of
/// constraint sets sharing the same base.
#[derive(Clone, Debug, Default)]
pub struct Cuts {
    rows: Vec<LinearRow>,
}

impl Cuts {
    pub fn rows(&self) -> &[LinearRow] {
        &self.rows
    }

    fn add(&mut self, row: LinearRow) -> bool {
        if self.rows.iter().any(|r| r.coeffs == row.coeffs) {
            return false;
        }
        self.rows.push(row);
        true
    }
}

/// Column layout of programs over `(m, z)`, `z` being one trailing variable
/// (ε, or a radius), optionally followed by the negative parts `q` of the
/// pair coefficients. With the split, columns `0..d` hold the singletons and
/// the positive parts `p`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    leaves: usize,
    dim: usize,
    split: bool,
}

impl Layout {
    pub(crate) fn new(c: &ConstraintSet) -> Self {
        Layout {
            leaves: c.leaves(),
            dim: c.dimension(),
            split: c.full_monotonicity() && c.leaves() >= 2,
        }
    }

    pub(crate) fn columns(&self) -> usize {
        if self.split {
            2 * self.dim + 1 - self.leaves
        } else {
            self.dim + 1
        }
    }

    fn negative_part(&self, pair: usize) -> usize {
        self.dim + 1 + (pair - self.leaves)
    }

    /// Program with the layout's bounds; `z` is bounded by `[0, z_cap]`.
    pub(crate) fn program(&self, z_cap: f64) -> LinearProgram {
        let mut objective = vec![0.0; self.columns()];
        objective[self.dim] = 1.0;
        let mut lp = LinearProgram::new(objective);
        for j in 0..self.dim {
            match (self.split, j < self.leaves) {
                (true, true) => lp.set_bounds(j, 0.0, 1.0),
                (true, false) => {
                    lp.set_bounds(j, 0.0, 1.0);
                    lp.set_bounds(self.negative_part(j), 0.0, 1.0);
                }
                (false, _) => lp.set_free(j),
            }
        }
        lp.set_bounds(self.dim, 0.0, z_cap);
        lp
    }

    /// Row over `(m, z)` rewritten for the program's columns.
    pub(crate) fn lift(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut row = coeffs.to_vec();
        row.resize(self.columns(), 0.0);
        if self.split {
            for j in self.leaves..self.dim {
                row[self.negative_part(j)] = -coeffs[j];
            }
        }
        row
    }

    /// `m_t - Σ_u q_tu - w·z ≥ 0`, the collapsed monotonicity family of
    /// leaf `t`; `None` without the split.
    pub(crate) fn leaf_row(&self, t: usize, w: f64) -> Option<Vec<f64>> {
        if !self.split {
            return None;
        }
        let mut row = vec![0.0; self.columns()];
        row[t] = 1.0;
        for u in (0..self.leaves).filter(|&u| u != t) {
            row[self.negative_part(pair_index(self.leaves, t, u))] = -1.0;
        }
        row[self.dim] = -w;
        Some(row)
    }

    /// Möbius coordinates of a solution.
    pub(crate) fn recover(&self, x: &[f64]) -> Vec<f64> {
        let mut m = x[..self.dim].to_vec();
        if self.split {
            for j in self.leaves..self.dim {
                m[j] -= x[self.negative_part(j)];
            }
        }
        m
    }

    fn column_name(&self, j: usize) -> String {
        if j < self.dim {
            format!("M{:04}", j + 1)
        } else if j == self.dim {
            "EPS".to_string()
        } else {
            format!("Q{:04}", j - self.dim)
        }
    }
}

fn build_program(c: &ConstraintSet, cuts: &Cuts) -> LinearProgram {
    let layout = Layout::new(c);
    let mut lp = layout.program(EPSILON_CAP);
    for r in c.rows().iter().chain(cuts.rows()) {
        lp.add_row(layout.lift(&r.coeffs), r.cmp, r.rhs);
    }
    for t in 0..c.leaves() {
        if let Some(row) = layout.leaf_row(t, 0.0) {
            lp.add_row(row, Comparator::Ge, 0.0);
        }
    }
    lp
}

/// Solves `ε* = max ε` subject to `c`.
pub fn solve_epsilon_max(c: &ConstraintSet) -> Result<LpSolution> {
    solve_epsilon_max_with_cuts(c, &mut Cuts::default())
}

/// As [`solve_epsilon_max`], seeding the program with `cuts` and leaving any
/// rows added by the witness check in it.
pub fn solve_epsilon_max_with_cuts(c: &ConstraintSet, cuts: &mut Cuts) -> Result<LpSolution> {
    let layout = Layout::new(c);
    let d = c.dimension();
    let before = cuts.rows.len();
    for _ in 0..MAX_ROUNDS {
        let outcome = build_program(c, cuts).solve()?;
        let x = match outcome {
            Outcome::Optimal { x, .. } => x,
            Outcome::Infeasible | Outcome::Unbounded => {
                let unbounded = outcome == Outcome::Unbounded;
                return Ok(LpSolution {
                    status: if unbounded { LpStatus::Unbounded } else { LpStatus::Infeasible },
                    epsilon_star: if unbounded { f64::INFINITY } else { 0.0 },
                    witness: None,
                    generated_rows: cuts.rows.len() - before,
                });
            }
        };
        let eps = x[d];
        let m = MobiusVector::new(c.leaves(), layout.recover(&x))?;
        let mut added = false;
        if c.full_monotonicity() {
            for t in 0..c.leaves() {
                if m.monotonicity_slack(t) < -VALIDATION_SLACK {
                    added |= cuts.add(most_violated_monotonicity_row(&m, t));
                }
            }
        }
        if !added {
            if let Some(v) = c.first_violation(&m, eps, VALIDATION_SLACK) {
                return Err(Error::Lp(format!("witness fails validation: {v}")));
            }
            return Ok(LpSolution {
                status: LpStatus::Optimal,
                epsilon_star: eps,
                witness: Some(m),
                generated_rows: cuts.rows.len() - before,
            });
        }
    }
    Err(Error::Lp("monotonicity check did not settle".into()))
}

/// Deletion filter over preference statements: returns an irreducible set of
/// statement ids that, together with the base rows, admits no compatible model.
pub fn diagnose(c: &ConstraintSet) -> Result<Vec<String>> {
    let mut cuts = Cuts::default();
    if solve_epsilon_max_with_cuts(c, &mut cuts)?.is_compatible() {
        return Err(Error::Lp("the constraint system is compatible; nothing to diagnose".into()));
    }
    let all = c.statement_ids();
    let mut kept = all.clone();
    for id in &all {
        let trial: Vec<String> = kept.iter().filter(|k| *k != id).cloned().collect();
        let dropped: Vec<String> = all.iter().filter(|a| !trial.contains(a)).cloned().collect();
        let sub = c.without_statements(&dropped);
        if !solve_epsilon_max_with_cuts(&sub, &mut cuts)?.is_compatible() {
            kept = trial;
        }
    }
    Ok(kept)
}

fn mps_number(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.5e}")
    }
}

fn mps_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
    let _ = writeln!(out, "{}", line.trim_end());
}

/// Fixed-column MPS text of the ε-max program (maximization expressed as
/// minimizing `-ε`). Columns `M0001…` are Möbius coordinates in canonical
/// order (positive parts for pairs when split), `EPS` is the margin and
/// `Q0001…` the negative parts of the pairs. Row names carry no provenance;
/// the trailing comment block maps rows to statement ids.
pub fn to_mps(c: &ConstraintSet, cuts: &Cuts, name: &str) -> String {
    let layout = Layout::new(c);
    let lp = build_program(c, cuts);
    let origins: Vec<&RowOrigin> = c.rows().iter().chain(cuts.rows()).map(|r| &r.origin).collect();
    let row_name = |i: usize| format!("R{:05}", i + 1);
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", name.chars().take(8).collect::<String>());
    let _ = writeln!(out, "ROWS");
    mps_line(&mut out, "N", "OBJ", "", "");
    for (i, r) in lp.rows.iter().enumerate() {
        let t = match r.cmp {
            Comparator::Ge => "G",
            Comparator::Le => "L",
            Comparator::Eq => "E",
        };
        mps_line(&mut out, t, &row_name(i), "", "");
    }
    let _ = writeln!(out, "COLUMNS");
    for j in 0..lp.var_count() {
        let col = layout.column_name(j);
        if lp.objective[j] != 0.0 {
            mps_line(&mut out, "", &col, "OBJ", &mps_number(-lp.objective[j]));
        }
        for (i, r) in lp.rows.iter().enumerate() {
            if r.coeffs[j] != 0.0 {
                mps_line(&mut out, "", &col, &row_name(i), &mps_number(r.coeffs[j]));
            }
        }
    }
    let _ = writeln!(out, "RHS");
    for (i, r) in lp.rows.iter().enumerate() {
        if r.rhs != 0.0 {
            mps_line(&mut out, "", "RHS", &row_name(i), &mps_number(r.rhs));
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let col = layout.column_name(j);
        if !lo.is_finite() && !hi.is_finite() {
            mps_line(&mut out, "FR", "BND", &col, "");
            continue;
        }
        if lo != 0.0 {
            mps_line(&mut out, "LO", "BND", &col, &mps_number(lo));
        }
        if hi.is_finite() {
            mps_line(&mut out, "UP", "BND", &col, &mps_number(hi));
        }
    }
    let _ = writeln!(out, "ENDATA");
    for (i, origin) in origins.iter().enumerate() {
        if let RowOrigin::Statement(id) = origin {
            let _ = writeln!(out, "* {} {}", row_name(i), id);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::base_constraints;
    use crate::hierarchy::{Hierarchy, HierarchySpec};
    use crate::preferences::{compile, parse_profile};

    fn flat(n: usize) -> Hierarchy {
        Hierarchy::build(&HierarchySpec::node(
            "root",
            (0..n).map(|i| HierarchySpec::leaf(format!("c{i}"))).collect(),
        ))
        .unwrap()
    }

    fn with_prefs(h: &Hierarchy, text: &str) -> ConstraintSet {
        let mut c = base_constraints(h);
        let p = parse_profile("t", text.as_bytes(), h, None).unwrap();
        c.extend(&compile(&p, h, None).unwrap()).unwrap();
        c
    }

    #[test]
    fn base_alone_is_capped() {
        let h = flat(4);
        let s = solve_epsilon_max(&base_constraints(&h)).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.epsilon_star, 1.0);
        assert!(s.witness.unwrap().is_feasible(VALIDATION_SLACK));
    }

    #[test]
    fn symmetric_contradiction_has_zero_margin() {
        let h = flat(2);
        let c = with_prefs(&h, "a: importance > node=root : c0 | c1\nb: importance > node=root : c1 | c0\n");
        let s = solve_epsilon_max(&c).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.epsilon_star.abs() < 1e-12);
        assert!(!s.is_compatible());
        assert_eq!(diagnose(&c).unwrap(), vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn equality_against_strict_is_reported() {
        let h = flat(3);
        let c = with_prefs(
            &h,
            "eq: importance = node=root : c0 | c1\ngt: importance > node=root : c0 | c1\nok: positive node=root : c1 | c2\n",
        );
        assert_eq!(diagnose(&c).unwrap(), vec!["eq".to_string(), "gt".to_string()]);
    }

    #[test]
    fn diagnose_rejects_feasible_systems() {
        let h = flat(3);
        let c = with_prefs(&h, "importance > node=root : c0 | c1\n");
        assert!(diagnose(&c).is_err());
    }

    #[test]
    fn row_generation_enforces_full_monotonicity() {
        let h = flat(5);
        // push pair mass negative so the sign rule must bite
        let c = with_prefs(
            &h,
            "negative node=root : c0 | c1\nnegative node=root : c0 | c2\nnegative node=root : c0 | c3\nimportance > node=root : c0 | c4\n",
        );
        let s = solve_epsilon_max(&c).unwrap();
        assert!(s.is_compatible());
        let m = s.witness.unwrap();
        assert!(c.is_satisfied(&m, s.epsilon_star, VALIDATION_SLACK));
        assert!(s.epsilon_star <= 1.0);
    }

    #[test]
    fn mps_layout() {
        let h = flat(2);
        let text = to_mps(&with_prefs(&h, "x: importance > node=root : c0 | c1"), &Cuts::default(), "tiny");
        assert!(text.starts_with("NAME          tiny\nROWS\n N  OBJ\n G  R00001\n"));
        assert!(text.contains("\n    EPS       OBJ                 -1\n"));
        assert!(text.contains(" UP BND       EPS                  1\n"));
        assert!(text.contains(" UP BND       M0001                1\n"));
        // two leaves give one pair, split into M0003 and Q0001
        assert!(text.contains("\n    Q0001     R00003              -1\n"));
        assert!(text.contains(" UP BND       Q0001                1\n"));
        assert!(!text.contains(" FR "));
        assert!(text.contains("* R00006 x"));
    }
}
