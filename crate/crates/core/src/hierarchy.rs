//! Multi-level criteria tree.
//!
//! Criteria are identified by their structural path from the root: the empty
//! path is the root criterion, `(1, 2)` is the second child of the first
//! macro-criterion, and so on. Labels are for display and lookup only.
//!
//! Leaves (elementary criteria) are numbered `0..leaf_count()` in depth-first
//! declaration order. Because the numbering is depth-first, the elementary
//! descendants of any node form a contiguous range of leaf indices.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural path of a criterion, 1-based child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CriterionId(Vec<usize>);

impl CriterionId {
    pub fn root() -> Self {
        CriterionId(Vec::new())
    }

    pub fn new(path: Vec<usize>) -> Self {
        CriterionId(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    /// Level of the criterion; the root sits at level 0.
    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Self {
        let mut path = self.0.clone();
        path.push(index);
        CriterionId(path)
    }

    /// True when `self` is a strict descendant of `other`.
    pub fn is_below(&self, other: &CriterionId) -> bool {
        self.0.len() > other.0.len() && self.0.starts_with(&other.0)
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "g_0");
        }
        write!(f, "g_(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Preference direction of an elementary criterion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// More is better.
    #[default]
    Max,
    /// Less is better.
    Min,
}

/// Nested description of a hierarchy as stored in the JSON spec file.
///
/// A node without a `children` key is a leaf; a node with an empty
/// `children` array is rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<HierarchySpec>>,
}

impl HierarchySpec {
    pub fn leaf(label: impl Into<String>) -> Self {
        HierarchySpec {
            label: label.into(),
            description: None,
            direction: None,
            children: None,
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<HierarchySpec>) -> Self {
        HierarchySpec {
            label: label.into(),
            description: None,
            direction: None,
            children: Some(children),
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = Some(direction);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub id: CriterionId,
    pub label: String,
    pub description: Option<String>,
    /// Only meaningful for leaves.
    pub direction: Direction,
    children: Vec<usize>,
    leaves: Range<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaf indices of the elementary criteria below this node.
    pub fn leaf_range(&self) -> Range<usize> {
        self.leaves.clone()
    }
}

/// Validated, immutable criteria tree.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    nodes: Vec<Node>,
    by_id: HashMap<CriterionId, usize>,
    by_label: HashMap<String, usize>,
    leaf_nodes: Vec<usize>,
    levels: usize,
}

impl Hierarchy {
    /// Validates a nested spec and builds the tree in declaration order.
    pub fn build(spec: &HierarchySpec) -> Result<Self> {
        match &spec.children {
            Some(c) if !c.is_empty() => {}
            _ => {
                return Err(Error::Hierarchy(
                    "the root must have at least one sub-criterion".into(),
                ))
            }
        }
        let mut h = Hierarchy {
            nodes: Vec::new(),
            by_id: HashMap::new(),
            by_label: HashMap::new(),
            leaf_nodes: Vec::new(),
            levels: 0,
        };
        h.push(spec, CriterionId::root())?;
        h.levels = h.nodes.iter().map(|n| n.id.level()).max().unwrap_or(0);
        Ok(h)
    }

    fn push(&mut self, spec: &HierarchySpec, id: CriterionId) -> Result<usize> {
        if self.by_label.contains_key(&spec.label) {
            return Err(Error::Hierarchy(format!("duplicate label `{}`", spec.label)));
        }
        let index = self.nodes.len();
        let first_leaf = self.leaf_nodes.len();
        self.by_label.insert(spec.label.clone(), index);
        self.by_id.insert(id.clone(), index);
        self.nodes.push(Node {
            id: id.clone(),
            label: spec.label.clone(),
            description: spec.description.clone(),
            direction: spec.direction.unwrap_or_default(),
            children: Vec::new(),
            leaves: first_leaf..first_leaf,
        });
        match &spec.children {
            None => self.leaf_nodes.push(index),
            Some(children) if children.is_empty() => {
                return Err(Error::Hierarchy(format!(
                    "criterion `{}` has no sub-criteria",
                    spec.label
                )))
            }
            Some(children) => {
                if spec.direction.is_some() {
                    return Err(Error::Hierarchy(format!(
                        "direction declared on non-elementary criterion `{}`",
                        spec.label
                    )));
                }
                let mut kids = Vec::with_capacity(children.len());
                for (i, child) in children.iter().enumerate() {
                    kids.push(self.push(child, id.child(i + 1))?);
                }
                self.nodes[index].children = kids;
            }
        }
        self.nodes[index].leaves = first_leaf..self.leaf_nodes.len();
        Ok(index)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: HierarchySpec = serde_json::from_str(text)?;
        Self::build(&spec)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let spec: HierarchySpec = serde_json::from_reader(reader)?;
        Self::build(&spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    /// Number of levels below the root: the longest path length. The root
    /// sits at level 0 and is not counted.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_nodes.len()
    }

    /// Elementary criteria in leaf-index order.
    pub fn leaves(&self) -> impl Iterator<Item = &Node> + '_ {
        self.leaf_nodes.iter().map(move |&i| &self.nodes[i])
    }

    pub fn leaf(&self, index: usize) -> &Node {
        &self.nodes[self.leaf_nodes[index]]
    }

    pub fn leaf_labels(&self) -> Vec<&str> {
        self.leaves().map(|n| n.label.as_str()).collect()
    }

    /// All nodes in depth-first declaration order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter()
    }

    /// Non-elementary criteria in depth-first order, root first.
    pub fn internal_nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    pub fn node(&self, id: &CriterionId) -> Result<&Node> {
        self.by_id
            .get(id)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| Error::UnknownCriterion(id.to_string()))
    }

    pub fn find(&self, label: &str) -> Result<&Node> {
        self.by_label
            .get(label)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| Error::UnknownCriterion(label.to_string()))
    }

    /// Direct children of a node, in declaration order.
    pub fn children(&self, id: &CriterionId) -> Result<Vec<&Node>> {
        let node = self.node(id)?;
        Ok(node.children.iter().map(|&i| &self.nodes[i]).collect())
    }

    /// Leaf indices of the elementary criteria descending from `id`.
    pub fn elementary_descendants(&self, id: &CriterionId) -> Result<Range<usize>> {
        Ok(self.node(id)?.leaf_range())
    }

    /// Sub-criteria of `id` sitting at absolute `level`, in declaration order.
    pub fn children_at(&self, id: &CriterionId, level: usize) -> Result<Vec<CriterionId>> {
        let node = self.node(id)?;
        if level <= id.level() || level > self.levels {
            return Err(Error::InvalidLevel {
                node: node.label.clone(),
                level,
            });
        }
        let mut out = Vec::new();
        self.collect_at(node, level, &mut out);
        if out.is_empty() {
            return Err(Error::InvalidLevel {
                node: node.label.clone(),
                level,
            });
        }
        Ok(out)
    }

    fn collect_at(&self, node: &Node, level: usize, out: &mut Vec<CriterionId>) {
        for &c in &node.children {
            let child = &self.nodes[c];
            if child.id.level() == level {
                out.push(child.id.clone());
            } else {
                self.collect_at(child, level, out);
            }
        }
    }

    pub fn label(&self, id: &CriterionId) -> Result<&str> {
        Ok(self.node(id)?.label.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_leaves() -> HierarchySpec {
        HierarchySpec::node("root", vec![HierarchySpec::leaf("a"), HierarchySpec::leaf("b")])
    }

    #[test]
    fn minimal_tree() {
        let h = Hierarchy::build(&two_leaves()).unwrap();
        assert_eq!(h.levels(), 1);
        assert_eq!(h.leaf_count(), 2);
        assert_eq!(h.elementary_descendants(&CriterionId::root()).unwrap(), 0..2);
        let b = h.find("b").unwrap();
        assert_eq!(b.id, CriterionId::new(vec![2]));
        assert_eq!(h.elementary_descendants(&b.id).unwrap(), 1..2);
    }

    #[test]
    fn empty_subcriterion_is_rejected() {
        let spec = HierarchySpec::node(
            "root",
            vec![HierarchySpec::leaf("a"), HierarchySpec::node("x", vec![])],
        );
        assert!(matches!(Hierarchy::build(&spec), Err(Error::Hierarchy(_))));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let spec = HierarchySpec::node("root", vec![HierarchySpec::leaf("a"), HierarchySpec::leaf("a")]);
        assert!(Hierarchy::build(&spec).is_err());
    }

    #[test]
    fn direction_on_internal_node_is_rejected() {
        let spec = HierarchySpec::node(
            "root",
            vec![HierarchySpec::node("x", vec![HierarchySpec::leaf("a")]).with_direction(Direction::Min)],
        );
        assert!(Hierarchy::build(&spec).is_err());
    }

    #[test]
    fn ragged_tree() {
        // root -> { a, x -> { b, c } }
        let spec = HierarchySpec::node(
            "root",
            vec![
                HierarchySpec::leaf("a"),
                HierarchySpec::node("x", vec![HierarchySpec::leaf("b"), HierarchySpec::leaf("c")]),
            ],
        );
        let h = Hierarchy::build(&spec).unwrap();
        assert_eq!(h.levels(), 2);
        assert_eq!(h.leaf_labels(), vec!["a", "b", "c"]);
        let x = h.find("x").unwrap().id.clone();
        assert_eq!(h.elementary_descendants(&x).unwrap(), 1..3);
        let at2 = h.children_at(&CriterionId::root(), 2).unwrap();
        assert_eq!(at2, vec![CriterionId::new(vec![2, 1]), CriterionId::new(vec![2, 2])]);
    }

    #[test]
    fn children_below_a_leaf_is_an_error() {
        let h = Hierarchy::build(&two_leaves()).unwrap();
        let a = h.find("a").unwrap().id.clone();
        assert!(matches!(h.children_at(&a, 2), Err(Error::InvalidLevel { .. })));
        assert!(h.children_at(&CriterionId::root(), 0).is_err());
    }

    #[test]
    fn unknown_id() {
        let h = Hierarchy::build(&two_leaves()).unwrap();
        assert!(h.elementary_descendants(&CriterionId::new(vec![7])).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(CriterionId::root().to_string(), "g_0");
        assert_eq!(CriterionId::new(vec![1, 2]).to_string(), "g_(1,2)");
    }
}
