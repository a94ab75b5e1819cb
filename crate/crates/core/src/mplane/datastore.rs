//! Generic hierarchical datastore with text leaves.
//!
//! Paths are `/`-separated node names, e.g. `carriers/tx-array-carrier-0/active`.
//! Containers are ordered maps so every rendering is canonical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf(String),
    Container(BTreeMap<String, Node>),
}

impl Node {
    pub fn empty() -> Self {
        Node::Container(BTreeMap::new())
    }

    pub fn is_empty_container(&self) -> bool {
        matches!(self, Node::Container(m) if m.is_empty())
    }

    pub fn as_leaf(&self) -> Option<&str> {
        match self {
            Node::Leaf(s) => Some(s),
            Node::Container(_) => None,
        }
    }

    pub fn child(&self, name: &str) -> Option<&Node> {
        match self {
            Node::Container(m) => m.get(name),
            Node::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = (&String, &Node)> {
        let map = match self {
            Node::Container(m) => Some(m),
            Node::Leaf(_) => None,
        };
        map.into_iter().flat_map(|m| m.iter())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("datastore nodes always serialize")
    }
}

pub fn split_path(path: &str) -> impl Iterator<Item = &str> {
    path.split('/').filter(|s| !s.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Datastore {
    root: Node,
}

impl Default for Datastore {
    fn default() -> Self {
        Self {
            root: Node::empty(),
        }
    }
}

impl Datastore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn get(&self, path: &str) -> Option<&Node> {
        split_path(path).try_fold(&self.root, |node, seg| node.child(seg))
    }

    pub fn leaf(&self, path: &str) -> Option<&str> {
        self.get(path).and_then(Node::as_leaf)
    }

    /// Sets a leaf, creating intermediate containers. A leaf standing where a
    /// container is needed gets replaced.
    pub fn set_leaf(&mut self, path: &str, value: impl Into<String>) {
        let segs: Vec<&str> = split_path(path).collect();
        let Some((last, parents)) = segs.split_last() else {
            return;
        };
        let mut node = &mut self.root;
        for seg in parents {
            node = container_mut(node)
                .entry(seg.to_string())
                .or_insert_with(Node::empty);
        }
        container_mut(node).insert(last.to_string(), Node::Leaf(value.into()));
    }

    /// Replaces the subtree at `path` (creating parents).
    pub fn set_subtree(&mut self, path: &str, subtree: Node) {
        let segs: Vec<&str> = split_path(path).collect();
        let Some((last, parents)) = segs.split_last() else {
            self.root = subtree;
            return;
        };
        let mut node = &mut self.root;
        for seg in parents {
            node = container_mut(node)
                .entry(seg.to_string())
                .or_insert_with(Node::empty);
        }
        container_mut(node).insert(last.to_string(), subtree);
    }

    pub fn remove(&mut self, path: &str) -> Option<Node> {
        let segs: Vec<&str> = split_path(path).collect();
        let (last, parents) = segs.split_last()?;
        let mut node = &mut self.root;
        for seg in parents {
            node = match node {
                Node::Container(m) => m.get_mut(*seg)?,
                Node::Leaf(_) => return None,
            };
        }
        match node {
            Node::Container(m) => m.remove(*last),
            Node::Leaf(_) => None,
        }
    }

    /// Retrieval result: the whole tree without a filter, otherwise the
    /// subtree at the filter path wrapped in its ancestors. A filter that
    /// matches nothing yields an empty fragment.
    pub fn fragment(&self, filter: Option<&str>) -> Node {
        let Some(filter) = filter else {
            return self.root.clone();
        };
        let segs: Vec<&str> = split_path(filter).collect();
        let Some(found) = self.get(filter) else {
            return Node::empty();
        };
        segs.iter().rev().fold(found.clone(), |acc, seg| {
            let mut m = BTreeMap::new();
            m.insert(seg.to_string(), acc);
            Node::Container(m)
        })
    }

    /// Every leaf as `(path, value)`, in canonical order.
    pub fn leaves(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        collect_leaves(&self.root, String::new(), &mut out);
        out
    }
}

fn container_mut(node: &mut Node) -> &mut BTreeMap<String, Node> {
    if let Node::Leaf(_) = node {
        *node = Node::empty();
    }
    match node {
        Node::Container(m) => m,
        Node::Leaf(_) => unreachable!(),
    }
}

fn collect_leaves(node: &Node, prefix: String, out: &mut Vec<(String, String)>) {
    match node {
        Node::Leaf(v) => out.push((prefix, v.clone())),
        Node::Container(m) => {
            for (k, child) in m {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}/{k}")
                };
                collect_leaves(child, p, out);
            }
        }
    }
}

/// Value domain of a writable leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeafKind {
    Bool,
    IntRange { min: i64, max: i64 },
    OneOf(&'static [&'static str]),
    Text,
}

impl LeafKind {
    pub fn accepts(&self, value: &str) -> bool {
        match self {
            LeafKind::Bool => value == "true" || value == "false",
            LeafKind::IntRange { min, max } => value
                .parse::<i64>()
                .is_ok_and(|v| (*min..=*max).contains(&v)),
            LeafKind::OneOf(options) => options.contains(&value),
            LeafKind::Text => !value.is_empty(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            LeafKind::Bool => "true|false".into(),
            LeafKind::IntRange { min, max } => format!("integer in [{min}, {max}]"),
            LeafKind::OneOf(options) => options.join("|"),
            LeafKind::Text => "non-empty text".into(),
        }
    }
}

/// Writable-leaf rule; `*` in the pattern matches any single node name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafRule {
    pub pattern: &'static str,
    pub kind: LeafKind,
}

impl LeafRule {
    pub fn matches(&self, path: &str) -> bool {
        let pat: Vec<&str> = split_path(self.pattern).collect();
        let segs: Vec<&str> = split_path(path).collect();
        pat.len() == segs.len() && pat.iter().zip(&segs).all(|(p, s)| *p == "*" || p == s)
    }
}

/// Configuration schema: the set of leaves an edit may touch.
#[derive(Debug, Clone, Default)]
pub struct ConfigSchema {
    rules: Vec<LeafRule>,
}

impl ConfigSchema {
    pub fn new(rules: Vec<LeafRule>) -> Self {
        Self { rules }
    }

    pub fn rule_for(&self, path: &str) -> Option<&LeafRule> {
        self.rules.iter().find(|r| r.matches(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Datastore {
        let mut ds = Datastore::new();
        ds.set_leaf("sync/sync-state", "LOCKED");
        ds.set_leaf("sync/ptp/domain-number", "24");
        ds.set_leaf("carriers/tx0/active", "false");
        ds
    }

    #[test]
    fn filter_returns_wrapped_subtree() {
        let ds = sample();
        let frag = ds.fragment(Some("sync"));
        assert_eq!(frag.child("sync"), ds.get("sync"));
        assert!(frag.child("carriers").is_none());

        let deep = ds.fragment(Some("sync/ptp"));
        assert_eq!(deep.child("sync").unwrap().child("ptp"), ds.get("sync/ptp"));
        assert!(deep.child("sync").unwrap().child("sync-state").is_none());
    }

    #[test]
    fn unmatched_filter_is_empty_not_error() {
        assert!(sample().fragment(Some("nonexistent")).is_empty_container());
    }

    #[test]
    fn no_filter_is_whole_tree() {
        let ds = sample();
        assert_eq!(&ds.fragment(None), ds.root());
    }

    #[test]
    fn leaves_are_canonical() {
        let leaves = sample().leaves();
        let paths: Vec<&str> = leaves.iter().map(|(p, _)| p.as_str()).collect();
        assert_eq!(
            paths,
            [
                "carriers/tx0/active",
                "sync/ptp/domain-number",
                "sync/sync-state"
            ]
        );
    }

    #[test]
    fn remove_and_json_shape() {
        let mut ds = sample();
        assert!(ds.remove("carriers/tx0").is_some());
        assert!(ds.get("carriers/tx0").is_none());
        let json = ds.fragment(Some("sync/sync-state")).to_json();
        assert_eq!(json, serde_json::json!({"sync": {"sync-state": "LOCKED"}}));
    }

    #[test]
    fn rule_patterns() {
        let rule = LeafRule {
            pattern: "carriers/*/active",
            kind: LeafKind::Bool,
        };
        assert!(rule.matches("carriers/tx0/active"));
        assert!(!rule.matches("carriers/tx0/power"));
        assert!(!rule.matches("carriers/active"));
        assert!(LeafKind::IntRange { min: 0, max: 40 }.accepts("40"));
        assert!(!LeafKind::IntRange { min: 0, max: 40 }.accepts("41"));
        assert!(!LeafKind::Bool.accepts("yes"));
    }
}
