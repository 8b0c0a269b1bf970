//! Decision-maker preference statements and their linear encoding.
//!
//! # Statement file grammar
//!
//! One clause per line; `#` starts a comment.
//!
//! ```text
//! [id:] prefer       node=LABEL : ALT [ALT…] | ALT [ALT…] [| …]
//! [id:] importance > node=LABEL : CRIT [CRIT…] | CRIT [CRIT…] [| …]
//! [id:] importance = node=LABEL : CRIT | CRIT [| …]
//! [id:] positive     node=LABEL : CRIT | CRIT
//! [id:] negative     node=LABEL : CRIT | CRIT
//! [id:] intensity >  node=LABEL : CRIT CRIT | CRIT CRIT [| …]
//! ```
//!
//! `|` separates ordered groups. Consecutive groups form a chain
//! (`A | B | C` reads A ≻ B ≻ C) and each link is distributed over the group
//! members, so `FC IN | IA IMP` yields the four clauses FC≻IA, FC≻IMP, IN≻IA,
//! IN≻IMP. For `intensity` every group is one pair of criteria.
//!
//! Criteria operands must be sub-criteria of `node` on one common level;
//! `prefer` operands are alternative labels. Lines sharing an `id` belong to
//! one statement; without an id, a line gets `L<line number>`.
//!
//! # Encoding
//!
//! Importance and interaction clauses are encoded on the numerators of the
//! Shapley and Murofushi–Soneda indices. Within one node both indices share
//! the positive denominator `μ(E(g_r))`, so signs and orderings carry over
//! exactly and every row stays linear in the Möbius coordinates; the margin ε
//! is rescaled by that denominator, which does not affect whether ε* > 0.

use std::fmt;
use std::io::Read;
use std::path::Path;

use crate::capacity::{
    choquet_form, interaction_numerator_form, shapley_numerator_form, Comparator, ConstraintSet, LinearRow,
    RowOrigin,
};
use crate::dataset::NormalizedTable;
use crate::error::{Error, Result};
use crate::hierarchy::{CriterionId, Hierarchy};

#[derive(Clone, Debug, PartialEq)]
pub enum Clause {
    /// `better` is preferred to `worse` on `node`.
    Prefer {
        node: CriterionId,
        better: String,
        worse: String,
    },
    MoreImportant {
        node: CriterionId,
        more: CriterionId,
        less: CriterionId,
    },
    EquallyImportant {
        node: CriterionId,
        first: CriterionId,
        second: CriterionId,
    },
    PositiveInteraction {
        node: CriterionId,
        first: CriterionId,
        second: CriterionId,
    },
    NegativeInteraction {
        node: CriterionId,
        first: CriterionId,
        second: CriterionId,
    },
    /// Interaction within `stronger` exceeds interaction within `weaker`.
    StrongerInteraction {
        node: CriterionId,
        stronger: (CriterionId, CriterionId),
        weaker: (CriterionId, CriterionId),
    },
}

impl Clause {
    pub fn node(&self) -> &CriterionId {
        match self {
            Clause::Prefer { node, .. }
            | Clause::MoreImportant { node, .. }
            | Clause::EquallyImportant { node, .. }
            | Clause::PositiveInteraction { node, .. }
            | Clause::NegativeInteraction { node, .. }
            | Clause::StrongerInteraction { node, .. } => node,
        }
    }

    pub fn is_strict(&self) -> bool {
        !matches!(self, Clause::EquallyImportant { .. })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Prefer { node, better, worse } => write!(f, "{better} ≻ {worse} on {node}"),
            Clause::MoreImportant { node, more, less } => write!(f, "{more} more important than {less} under {node}"),
            Clause::EquallyImportant { node, first, second } => {
                write!(f, "{first} as important as {second} under {node}")
            }
            Clause::PositiveInteraction { node, first, second } => {
                write!(f, "{first} and {second} interact positively under {node}")
            }
            Clause::NegativeInteraction { node, first, second } => {
                write!(f, "{first} and {second} interact negatively under {node}")
            }
            Clause::StrongerInteraction { node, stronger, weaker } => write!(
                f,
                "interaction {}-{} exceeds {}-{} under {node}",
                stronger.0, stronger.1, weaker.0, weaker.1
            ),
        }
    }
}

/// One identified preference statement, possibly expanding to several clauses.
#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceStatement {
    pub id: String,
    /// First source line of the statement.
    pub line: usize,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PreferenceProfile {
    pub name: String,
    pub statements: Vec<PreferenceStatement>,
}

impl PreferenceProfile {
    pub fn clause_count(&self) -> usize {
        self.statements.iter().map(|s| s.clauses.len()).sum()
    }

    pub fn statement(&self, id: &str) -> Option<&PreferenceStatement> {
        self.statements.iter().find(|s| s.id == id)
    }

    pub fn load(path: impl AsRef<Path>, h: &Hierarchy, alternatives: Option<&[String]>) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
        parse_profile(name, file, h, alternatives).map_err(|e| e.in_file(path))
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Preference {
        line,
        message: message.into(),
    }
}

/// Parses a statement file. When `alternatives` is given, `prefer` operands
/// are checked against it.
pub fn parse_profile(
    name: impl Into<String>,
    mut source: impl Read,
    h: &Hierarchy,
    alternatives: Option<&[String]>,
) -> Result<PreferenceProfile> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let mut profile = PreferenceProfile {
        name: name.into(),
        statements: Vec::new(),
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (id, clauses) = parse_line(content, line, h, alternatives)?;
        let id = id.unwrap_or_else(|| format!("L{line}"));
        match profile.statements.iter_mut().find(|s| s.id == id) {
            Some(s) => s.clauses.extend(clauses),
            None => profile.statements.push(PreferenceStatement { id, line, clauses }),
        }
    }
    Ok(profile)
}

const KINDS: [&str; 5] = ["prefer", "importance", "positive", "negative", "intensity"];

fn parse_line(
    content: &str,
    line: usize,
    h: &Hierarchy,
    alternatives: Option<&[String]>,
) -> Result<(Option<String>, Vec<Clause>)> {
    let (head, body) = content
        .split_once(" : ")
        .or_else(|| content.split_once(":\t"))
        .ok_or_else(|| perr(line, "expected `… node=LABEL : operands`"))?;
    let mut tokens: Vec<&str> = head.split_whitespace().collect();
    let mut id = None;
    if let Some(first) = tokens.first() {
        if !KINDS.contains(first) {
            let t = first.strip_suffix(':').unwrap_or(first);
            if t.is_empty() {
                return Err(perr(line, "empty statement id"));
            }
            id = Some(t.to_string());
            tokens.remove(0);
        }
    }
    let kind = *tokens.first().ok_or_else(|| perr(line, "missing statement kind"))?;
    if !KINDS.contains(&kind) {
        return Err(perr(line, format!("unknown statement kind `{kind}`")));
    }
    let (cmp, node_tok) = match tokens.as_slice() {
        [_, cmp, node] if *cmp == ">" || *cmp == "=" => (Some(*cmp), *node),
        [_, node] => (None, *node),
        _ => return Err(perr(line, "malformed statement head")),
    };
    let node_label = node_tok
        .strip_prefix("node=")
        .ok_or_else(|| perr(line, "expected `node=LABEL`"))?;
    let node = resolve_node(h, node_label).map_err(|e| perr(line, e.to_string()))?;

    let groups: Vec<Vec<&str>> = body.split('|').map(|g| g.split_whitespace().collect()).collect();
    if groups.iter().any(|g| g.is_empty()) {
        return Err(perr(line, "empty operand group"));
    }

    let criteria = |groups: &[Vec<&str>]| -> Result<Vec<Vec<CriterionId>>> {
        let resolved: Vec<Vec<CriterionId>> = groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|l| {
                        h.find(l)
                            .map(|n| n.id.clone())
                            .map_err(|_| perr(line, format!("unknown criterion `{l}`")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let flat: Vec<&CriterionId> = resolved.iter().flatten().collect();
        let level = flat[0].level();
        for c in &flat {
            if !c.is_below(&node) {
                return Err(perr(
                    line,
                    format!("`{}` is not a sub-criterion of `{node_label}`", h.label(c).unwrap_or("?")),
                ));
            }
            if c.level() != level {
                return Err(perr(line, "operands are not on a common level"));
            }
        }
        Ok(resolved)
    };

    let mut clauses = Vec::new();
    match (kind, cmp) {
        ("prefer", None) => {
            if groups.len() < 2 {
                return Err(perr(line, "`prefer` needs at least two groups"));
            }
            for g in groups.iter().flatten() {
                if let Some(alts) = alternatives {
                    if !alts.iter().any(|a| a == g) {
                        return Err(perr(line, format!("unknown alternative `{g}`")));
                    }
                }
            }
            for w in groups.windows(2) {
                for a in &w[0] {
                    for b in &w[1] {
                        if a == b {
                            return Err(perr(line, format!("`{a}` compared with itself")));
                        }
                        clauses.push(Clause::Prefer {
                            node: node.clone(),
                            better: a.to_string(),
                            worse: b.to_string(),
                        });
                    }
                }
            }
        }
        ("importance", Some(op)) => {
            if groups.len() < 2 {
                return Err(perr(line, "`importance` needs at least two groups"));
            }
            let resolved = criteria(&groups)?;
            for w in resolved.windows(2) {
                for a in &w[0] {
                    for b in &w[1] {
                        if a == b {
                            return Err(perr(line, "criterion compared with itself"));
                        }
                        clauses.push(if op == ">" {
                            Clause::MoreImportant {
                                node: node.clone(),
                                more: a.clone(),
                                less: b.clone(),
                            }
                        } else {
                            Clause::EquallyImportant {
                                node: node.clone(),
                                first: a.clone(),
                                second: b.clone(),
                            }
                        });
                    }
                }
            }
        }
        ("positive" | "negative", None) => {
            let flat: Vec<Vec<&str>> = vec![groups.iter().flatten().copied().collect()];
            if flat[0].len() != 2 {
                return Err(perr(line, "interaction needs exactly two criteria"));
            }
            let r = criteria(&flat)?;
            let (first, second) = (r[0][0].clone(), r[0][1].clone());
            if first == second {
                return Err(perr(line, "criterion paired with itself"));
            }
            clauses.push(if kind == "positive" {
                Clause::PositiveInteraction { node, first, second }
            } else {
                Clause::NegativeInteraction { node, first, second }
            });
        }
        ("intensity", Some(">")) => {
            if groups.len() < 2 || groups.iter().any(|g| g.len() != 2) {
                return Err(perr(line, "`intensity` needs at least two groups of two criteria"));
            }
            let resolved = criteria(&groups)?;
            for p in &resolved {
                if p[0] == p[1] {
                    return Err(perr(line, "criterion paired with itself"));
                }
            }
            for w in resolved.windows(2) {
                clauses.push(Clause::StrongerInteraction {
                    node: node.clone(),
                    stronger: (w[0][0].clone(), w[0][1].clone()),
                    weaker: (w[1][0].clone(), w[1][1].clone()),
                });
            }
        }
        _ => return Err(perr(line, format!("`{kind}` does not take that comparator"))),
    }
    Ok((id, clauses))
}

fn resolve_node(h: &Hierarchy, label: &str) -> Result<CriterionId> {
    if label == "root" || label == "g_0" {
        return Ok(CriterionId::root());
    }
    let node = h.find(label)?;
    if node.is_leaf() {
        return Err(Error::Hierarchy(format!("`{label}` has no sub-criteria")));
    }
    Ok(node.id.clone())
}

fn row(form: Vec<f64>, epsilon: f64, cmp: Comparator, id: &str) -> LinearRow {
    let mut coeffs = form;
    coeffs.push(epsilon);
    LinearRow {
        coeffs,
        cmp,
        rhs: 0.0,
        origin: RowOrigin::Statement(id.to_string()),
    }
}

fn minus(a: Vec<f64>, b: &[f64]) -> Vec<f64> {
    a.into_iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Linear rows of one clause over `(m, ε)`.
pub fn compile_clause(
    clause: &Clause,
    id: &str,
    h: &Hierarchy,
    table: Option<&NormalizedTable>,
) -> Result<LinearRow> {
    Ok(match clause {
        Clause::Prefer { node, better, worse } => {
            let t = table.ok_or_else(|| Error::Capacity("alternative comparisons need a table".into()))?;
            let idx = |label: &str| {
                t.alternative_index(label)
                    .ok_or_else(|| Error::Table(format!("unknown alternative `{label}`")))
            };
            let a = choquet_form(h, node, t.row(idx(better)?))?;
            let b = choquet_form(h, node, t.row(idx(worse)?))?;
            row(minus(a, &b), -1.0, Comparator::Ge, id)
        }
        Clause::MoreImportant { node, more, less } => {
            let a = shapley_numerator_form(h, node, more)?;
            let b = shapley_numerator_form(h, node, less)?;
            row(minus(a, &b), -1.0, Comparator::Ge, id)
        }
        Clause::EquallyImportant { node, first, second } => {
            let a = shapley_numerator_form(h, node, first)?;
            let b = shapley_numerator_form(h, node, second)?;
            row(minus(a, &b), 0.0, Comparator::Eq, id)
        }
        Clause::PositiveInteraction { node, first, second } => {
            row(interaction_numerator_form(h, node, first, second)?, -1.0, Comparator::Ge, id)
        }
        Clause::NegativeInteraction { node, first, second } => {
            row(interaction_numerator_form(h, node, first, second)?, 1.0, Comparator::Le, id)
        }
        Clause::StrongerInteraction { node, stronger, weaker } => {
            let a = interaction_numerator_form(h, node, &stronger.0, &stronger.1)?;
            let b = interaction_numerator_form(h, node, &weaker.0, &weaker.1)?;
            row(minus(a, &b), -1.0, Comparator::Ge, id)
        }
    })
}

/// Compiles every clause of a profile into rows tagged with the statement id.
pub fn compile(p: &PreferenceProfile, h: &Hierarchy, table: Option<&NormalizedTable>) -> Result<ConstraintSet> {
    let mut set = ConstraintSet::empty(h.leaf_count());
    for s in &p.statements {
        for c in &s.clauses {
            set.push(compile_clause(c, &s.id, h, table)?)?;
        }
    }
    Ok(set)
}
