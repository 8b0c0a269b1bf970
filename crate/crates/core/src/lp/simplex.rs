//! Dense two-phase tableau simplex with bounded variables.
//!
//! Maximizes `c·x` subject to rows `a·x {≥,≤,=} b` and per-variable bounds
//! `lo ≤ x ≤ hi` (either side may be infinite). Every column is kept in an
//! orientation `x = base + sign·y` with `y ≥ 0` and `y` nonbasic at zero;
//! reaching an upper bound is handled by re-orienting the column instead of
//! pivoting. Free columns may enter in either direction and never leave.
//!
//! Pricing is Dantzig's rule with a Harris ratio test; after a run of
//! degenerate pivots the solver switches to Bland's rule for the rest of the
//! phase, which rules out cycling.
//!
//! Rows with zero right-hand side make these programs massively degenerate,
//! so every inequality is relaxed by a small distinct amount while pivoting.
//! The optimal basis is then re-evaluated against the true right-hand side
//! by Gaussian elimination on the original rows, and any basic variable left
//! out of bounds is repaired by dual simplex. The reported point therefore
//! carries no accumulated tableau error.

use crate::capacity::Comparator;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-11;
/// An entering column without a limiting row proves unboundedness only if
/// its reduced cost clears this; below it the column is noise and is skipped.
const RAY_TOL: f64 = 1e-7;
/// Inequalities are relaxed by a distinct multiple of this while pivoting.
const PERTURBATION: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub cmp: Comparator,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// `(lo, hi)` per variable; infinite entries mean no bound on that side.
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    /// All variables start non-negative.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            bounds: vec![(0.0, f64::INFINITY); n],
            rows: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        assert!(lo <= hi, "empty bound interval for variable {j}");
        self.bounds[j] = (lo, hi);
    }

    pub fn set_free(&mut self, j: usize) {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, cmp: Comparator, rhs: f64) {
        assert_eq!(coeffs.len(), self.var_count());
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    pub fn solve(&self) -> Result<Outcome> {
        Tableau::build(self).run(self)
    }
}

fn perturbation(row: usize, rhs: f64) -> f64 {
    let spread = (row.wrapping_mul(2_654_435_761) % 1009) as f64 / 1009.0;
    PERTURBATION * (1.0 + spread) * (1.0 + rhs.abs())
}

enum Step {
    /// the entering column runs into its own upper bound
    Flip,
    /// pivot on row `r`; its basic variable leaves at its upper bound if `upper`
    Pivot { r: usize, upper: bool, ratio: f64 },
}

struct Tableau {
    m: usize,
    cols: usize,
    width: usize,
    /// `m` constraint rows then the reduced-cost row (positive = improving);
    /// the last entry of each row is the rhs
    data: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// per column: `x = base + sign·y`, `0 ≤ y ≤ upper`
    base: Vec<f64>,
    sign: Vec<f64>,
    upper: Vec<f64>,
    free: Vec<bool>,
    allowed: Vec<bool>,
    artificial: Vec<bool>,
    vars: usize,
    /// original rows in x-space after sign normalization
    std_rows: Vec<Vec<f64>>,
    std_rhs: Vec<f64>,
    live_rows: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let vars = lp.var_count();
        let mut base = Vec::with_capacity(vars);
        let mut sign = Vec::with_capacity(vars);
        let mut upper = Vec::with_capacity(vars);
        let mut free = Vec::with_capacity(vars);
        for &(lo, hi) in &lp.bounds {
            let (b, s, u, f) = match (lo.is_finite(), hi.is_finite()) {
                (true, _) => (lo, 1.0, hi - lo, false),
                (false, true) => (hi, -1.0, f64::INFINITY, false),
                (false, false) => (0.0, 1.0, f64::INFINITY, true),
            };
            base.push(b);
            sign.push(s);
            upper.push(u);
            free.push(f);
        }

        // rows in y-space, relaxed, sign-normalized so the relaxed rhs is ≥ 0
        struct Prepared {
            x_coeffs: Vec<f64>,
            cmp: Comparator,
            rhs: f64,
            relaxed: f64,
        }
        let prepared: Vec<Prepared> = lp
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let shift: f64 = r.coeffs.iter().zip(&base).map(|(a, b)| a * b).sum();
                let rhs = r.rhs - shift;
                let relaxed = match r.cmp {
                    Comparator::Ge => rhs - perturbation(i, r.rhs),
                    Comparator::Le => rhs + perturbation(i, r.rhs),
                    Comparator::Eq => rhs,
                };
                if relaxed < 0.0 {
                    let cmp = match r.cmp {
                        Comparator::Ge => Comparator::Le,
                        Comparator::Le => Comparator::Ge,
                        Comparator::Eq => Comparator::Eq,
                    };
                    Prepared {
                        x_coeffs: r.coeffs.iter().map(|a| -a).collect(),
                        cmp,
                        rhs: -r.rhs,
                        relaxed: -relaxed,
                    }
                } else {
                    Prepared {
                        x_coeffs: r.coeffs.clone(),
                        cmp: r.cmp,
                        rhs: r.rhs,
                        relaxed,
                    }
                }
            })
            .collect();

        let m = prepared.len();
        let extra: usize = prepared
            .iter()
            .map(|p| if p.cmp == Comparator::Ge { 2 } else { 1 })
            .sum();
        let cols = vars + extra;
        let width = cols + 1;
        base.resize(cols, 0.0);
        sign.resize(cols, 1.0);
        upper.resize(cols, f64::INFINITY);
        free.resize(cols, false);
        let mut t = Tableau {
            m,
            cols,
            width,
            data: vec![0.0; (m + 1) * width],
            basis: vec![0; m],
            is_basic: vec![false; cols],
            base,
            sign,
            upper,
            free,
            allowed: vec![true; cols],
            artificial: vec![false; cols],
            vars,
            std_rows: Vec::with_capacity(m),
            std_rhs: Vec::with_capacity(m),
            live_rows: (0..m).collect(),
        };
        let mut next = vars;
        for (i, p) in prepared.into_iter().enumerate() {
            let mut std = p.x_coeffs;
            std.resize(cols, 0.0);
            let row = &mut t.data[i * width..(i + 1) * width];
            for j in 0..vars {
                row[j] = std[j] * t.sign[j];
            }
            let (slack, art) = match p.cmp {
                Comparator::Le => (Some((next, 1.0)), None),
                Comparator::Ge => (Some((next, -1.0)), Some(next + 1)),
                Comparator::Eq => (None, Some(next)),
            };
            if let Some((s, v)) = slack {
                std[s] = v;
                row[s] = v;
                next += 1;
            }
            if let Some(a) = art {
                std[a] = 1.0;
                row[a] = 1.0;
                t.artificial[a] = true;
                next += 1;
            }
            row[cols] = p.relaxed;
            t.basis[i] = art.or(slack.map(|s| s.0)).expect("every row has a basic column");
            t.is_basic[t.basis[i]] = true;
            t.std_rows.push(std);
            t.std_rhs.push(p.rhs);
        }
        t
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.cols]
    }

    fn cost(&self, j: usize) -> f64 {
        self.data[self.m * self.width + j]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        let obj = self.m * w;
        for j in 0..w {
            self.data[obj + j] = if j < self.cols { cost[j] } else { 0.0 };
        }
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.data[obj + j] -= cb * self.data[i * w + j];
                }
            }
        }
    }

    /// Re-orients nonbasic column `c` around `y = shift` (0 or its upper bound).
    fn flip_column(&mut self, c: usize, shift: f64) {
        let w = self.width;
        for i in 0..=self.m {
            let a = self.data[i * w + c];
            if a != 0.0 {
                if shift != 0.0 {
                    self.data[i * w + self.cols] -= a * shift;
                }
                self.data[i * w + c] = -a;
            }
        }
        self.base[c] += self.sign[c] * shift;
        self.sign[c] = -self.sign[c];
    }

    /// Re-orients the basic variable of row `r` around its upper bound.
    fn flip_basic(&mut self, r: usize) {
        let b = self.basis[r];
        let u = self.upper[b];
        let w = self.width;
        for v in &mut self.data[r * w..r * w + self.cols] {
            *v = -*v;
        }
        self.data[r * w + b] = 1.0;
        self.data[r * w + self.cols] = u - self.data[r * w + self.cols];
        self.base[b] += self.sign[b] * u;
        self.sign[b] = -self.sign[b];
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[c] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        self.is_basic[self.basis[r]] = false;
        self.is_basic[c] = true;
        self.basis[r] = c;
    }

    /// Limits on increasing `y_c`: `(row, room, |pivot|, leaves at upper)`.
    fn limits(&self, c: usize) -> impl Iterator<Item = (usize, f64, f64, bool)> + '_ {
        (0..self.m).filter_map(move |i| {
            let b = self.basis[i];
            if self.free[b] {
                return None;
            }
            let a = self.at(i, c);
            if a > PIVOT_TOL {
                Some((i, self.rhs(i).max(0.0), a, false))
            } else if a < -PIVOT_TOL && self.upper[b].is_finite() {
                Some((i, (self.upper[b] - self.rhs(i)).max(0.0), -a, true))
            } else {
                None
            }
        })
    }

    fn ratio_test(&self, c: usize, bland: bool) -> Option<Step> {
        let min_ratio = self.limits(c).map(|(_, s, a, _)| s / a).fold(f64::INFINITY, f64::min);
        if self.upper[c] <= min_ratio {
            return self.upper[c].is_finite().then_some(Step::Flip);
        }
        let pick = if bland {
            self.limits(c)
                .filter(|&(_, s, a, _)| s / a <= min_ratio + 1e-12)
                .min_by_key(|&(i, ..)| self.basis[i])
        } else {
            let bound = self
                .limits(c)
                .map(|(_, s, a, _)| (s + HARRIS_TOL) / a)
                .fold(f64::INFINITY, f64::min);
            self.limits(c)
                .filter(|&(_, s, a, _)| s / a <= bound)
                .max_by(|x, y| x.2.total_cmp(&y.2))
        };
        pick.map(|(r, s, a, upper)| Step::Pivot { r, upper, ratio: s / a })
    }

    fn gain(&self, j: usize) -> f64 {
        let c = self.cost(j);
        if c > COST_TOL {
            c
        } else if self.free[j] && -c > COST_TOL {
            -c
        } else {
            0.0
        }
    }

    /// Primal simplex on the current cost row. Returns false if unbounded.
    fn optimize(&mut self) -> Result<bool> {
        let mut banned = vec![false; self.cols];
        let mut bland = false;
        let mut degenerate = 0;
        for _ in 0..MAX_PIVOTS {
            let eligible = (0..self.cols).filter(|&j| self.allowed[j] && !banned[j] && !self.is_basic[j]);
            let entering = if bland {
                eligible.clone().find(|&j| self.gain(j) > 0.0)
            } else {
                eligible
                    .filter(|&j| self.gain(j) > 0.0)
                    .max_by(|&a, &b| self.gain(a).total_cmp(&self.gain(b)))
            };
            let Some(c) = entering else {
                return Ok(true);
            };
            if self.cost(c) < 0.0 {
                self.flip_column(c, 0.0);
            }
            match self.ratio_test(c, bland) {
                None => {
                    if self.cost(c) > RAY_TOL {
                        return Ok(false);
                    }
                    banned[c] = true;
                }
                Some(Step::Flip) => {
                    degenerate = 0;
                    self.flip_column(c, self.upper[c]);
                }
                Some(Step::Pivot { r, upper, ratio }) => {
                    if ratio <= 1e-12 {
                        degenerate += 1;
                        if degenerate > DEGENERATE_RUN {
                            bland = true;
                        }
                    } else {
                        degenerate = 0;
                    }
                    if upper {
                        self.flip_basic(r);
                    }
                    self.pivot(r, c);
                }
            }
        }
        Err(Error::Lp(format!("simplex did not converge in {MAX_PIVOTS} pivots")))
    }

    fn bound_violation(&self, i: usize) -> f64 {
        let b = self.basis[i];
        if self.free[b] {
            return 0.0;
        }
        let v = self.rhs(i);
        (-v).max(v - self.upper[b]).max(0.0)
    }

    /// Dual simplex from a dual-feasible basis. Returns false if infeasible.
    fn dual(&mut self) -> Result<bool> {
        let mut bland = false;
        let mut degenerate = 0;
        for _ in 0..MAX_PIVOTS {
            let violated = (0..self.m).filter(|&i| self.bound_violation(i) > FEAS_TOL);
            let leaving = if bland {
                violated.min_by_key(|&i| self.basis[i])
            } else {
                violated.max_by(|&a, &b| self.bound_violation(a).total_cmp(&self.bound_violation(b)))
            };
            let Some(r) = leaving else {
                return Ok(true);
            };
            if self.rhs(r) > 0.0 {
                self.flip_basic(r);
            }
            let mut best: Option<(usize, f64, f64)> = None;
            for j in (0..self.cols).filter(|&j| self.allowed[j] && !self.is_basic[j]) {
                let a = self.at(r, j);
                let (ratio, size) = if a < -PIVOT_TOL {
                    ((-self.cost(j)).max(0.0) / -a, -a)
                } else if self.free[j] && a > PIVOT_TOL {
                    (self.cost(j).max(0.0) / a, a)
                } else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some((_, br, bs)) => ratio < br - 1e-12 || (!bland && ratio <= br + 1e-12 && size > bs),
                };
                if better {
                    best = Some((j, ratio, size));
                }
            }
            let Some((c, ratio, _)) = best else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            if self.at(r, c) > 0.0 {
                self.flip_column(c, 0.0);
            }
            self.pivot(r, c);
        }
        Err(Error::Lp(format!("dual simplex did not converge in {MAX_PIVOTS} pivots")))
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.data.drain(r * w..(r + 1) * w);
        self.is_basic[self.basis[r]] = false;
        self.basis.remove(r);
        self.live_rows.remove(r);
        self.m -= 1;
    }

    fn run(mut self, lp: &LinearProgram) -> Result<Outcome> {
        if self.artificial.iter().any(|&a| a) {
            let cost: Vec<f64> = self.artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
            self.set_costs(&cost);
            self.optimize()?;
            let infeasibility: f64 = (0..self.m)
                .filter(|&i| self.artificial[self.basis[i]])
                .map(|i| self.rhs(i))
                .sum();
            let scale = 1.0 + self.std_rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if infeasibility > 1e-8 * scale {
                return Ok(Outcome::Infeasible);
            }
            let mut i = 0;
            while i < self.m {
                if self.artificial[self.basis[i]] {
                    let col = (0..self.cols)
                        .filter(|&j| !self.artificial[j] && !self.is_basic[j] && self.at(i, j).abs() > PIVOT_TOL)
                        .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
                    match col {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.remove_row(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
            for j in 0..self.cols {
                if self.artificial[j] {
                    self.allowed[j] = false;
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        for (j, &c) in lp.objective.iter().enumerate() {
            cost[j] = c * self.sign[j];
        }
        self.set_costs(&cost);
        if !self.optimize()? {
            return Ok(Outcome::Unbounded);
        }

        // drop the relaxation
        let Some(y) = self.basic_values() else {
            return Err(Error::Lp("singular final basis".into()));
        };
        for (i, v) in y.into_iter().enumerate() {
            self.data[i * self.width + self.cols] = v;
        }
        if !self.dual()? {
            return Ok(Outcome::Infeasible);
        }
        if !self.optimize()? {
            return Ok(Outcome::Unbounded);
        }
        let Some(y) = self.basic_values() else {
            return Err(Error::Lp("singular final basis".into()));
        };
        let mut x: Vec<f64> = self.base[..self.vars].to_vec();
        for (i, v) in y.into_iter().enumerate() {
            let b = self.basis[i];
            if b < self.vars {
                x[b] = self.base[b] + self.sign[b] * v;
            }
        }
        for (j, v) in x.iter_mut().enumerate() {
            let (lo, hi) = lp.bounds[j];
            *v = v.clamp(lo, hi);
        }
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        Ok(Outcome::Optimal { x, value })
    }

    /// Basic `y` values for the true right-hand side, from the original rows
    /// by Gaussian elimination with partial pivoting.
    fn basic_values(&self) -> Option<Vec<f64>> {
        let m = self.m;
        let w = m + 1;
        let mut a = vec![0.0; m * w];
        for (r, &orig) in self.live_rows.iter().enumerate() {
            let row = &self.std_rows[orig];
            let mut rhs = self.std_rhs[orig];
            for j in (0..self.cols).filter(|&j| !self.is_basic[j] && row[j] != 0.0) {
                rhs -= row[j] * self.base[j];
            }
            for (k, &col) in self.basis.iter().enumerate() {
                a[r * w + k] = row[col];
            }
            a[r * w + m] = rhs;
        }
        for k in 0..m {
            let p = (k..m).max_by(|&i, &j| a[i * w + k].abs().total_cmp(&a[j * w + k].abs()))?;
            if a[p * w + k].abs() < 1e-12 {
                return None;
            }
            if p != k {
                for j in 0..w {
                    a.swap(k * w + j, p * w + j);
                }
            }
            let (top, bottom) = a.split_at_mut((k + 1) * w);
            let pivot_row = &top[k * w..];
            for row in bottom.chunks_mut(w) {
                let f = row[k] / pivot_row[k];
                if f != 0.0 {
                    for j in k..w {
                        row[j] -= f * pivot_row[j];
                    }
                }
            }
        }
        let mut x = vec![0.0; m];
        for k in (0..m).rev() {
            let mut s = a[k * w + m];
            for j in k + 1..m {
                s -= a[k * w + j] * x[j];
            }
            x[k] = s / a[k * w + k];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        // x-space → y-space
        Some(
            self.basis
                .iter()
                .zip(x)
                .map(|(&b, v)| (v - self.base[b]) * self.sign[b])
                .collect(),
        )
    }
}
