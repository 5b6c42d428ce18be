//! Prime forests presenting semilocal finite-dimensional Bézout domains.
//!
//! Nodes are the nonzero primes, each labeled by the rank-one group of the
//! edge from its parent (or from the zero ideal for roots). Leaves are the
//! maximal ideals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ordgroups::{RankOneGroup, ValueGroup};

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub struct PrimeId(pub usize);

/// Index of a tree of the forest, i.e. of a dependence class of maximal ideals.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub struct BranchId(pub usize);

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Node {
    pub name: String,
    pub parent: Option<PrimeId>,
    pub children: Vec<PrimeId>,
    pub group: RankOneGroup,
    pub depth: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpectralForest {
    nodes: Vec<Node>,
    roots: Vec<PrimeId>,
    leaves: Vec<PrimeId>,
    leaf_pos: Vec<Option<usize>>,
    by_name: BTreeMap<String, PrimeId>,
    groups: Vec<ValueGroup>,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ForestIssue {
    #[error("empty forest")]
    Empty,
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("node `{node}` has unknown parent `{parent}`")]
    Orphan { node: String, parent: String },
    #[error("cycle through node `{0}`")]
    Cycle(String),
    #[error("internal node marked maximal: `{0}`")]
    InternalMarkedMaximal(String),
    #[error("node `{node}`: {message}")]
    BadGroup { node: String, message: String },
}

impl ForestIssue {
    /// The node the issue is about, if any.
    pub fn node(&self) -> Option<&str> {
        match self {
            ForestIssue::Empty => None,
            ForestIssue::DuplicateName(n)
            | ForestIssue::Cycle(n)
            | ForestIssue::InternalMarkedMaximal(n) => Some(n),
            ForestIssue::Orphan { node, .. } | ForestIssue::BadGroup { node, .. } => Some(node),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ForestError {
    #[error("unknown prime `{0}`")]
    UnknownPrime(String),
    #[error("`{0}` is a maximal ideal; cannot cut there")]
    CutAtLeaf(String),
    #[error("`{0}` is not below every maximal ideal of the forest")]
    NotCommonLowerBound(String),
}

/// One entry of a flat parent-map presentation.
#[derive(Clone, Debug)]
pub struct FlatNode {
    pub name: String,
    pub parent: Option<String>,
    pub group: String,
    pub maximal: Option<bool>,
}

/// Nested node object of the domain-spec file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub group: String,
    #[serde(default)]
    pub children: Vec<NodeSpec>,
    #[serde(default)]
    pub maximal: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub forest: Vec<NodeSpec>,
}

/// Where the forest core sits for a single tree.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum CorePrime {
    Prime(PrimeId),
    /// A lone depth-one leaf: already a rank-one valuation domain.
    RankOneLocal,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub id: BranchId,
    pub root: PrimeId,
    pub forest: Arc<SpectralForest>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JaffardReport {
    pub covers_every_maximal: bool,
    /// A pair of maximal ideals in different parts that share a nonzero prime.
    pub product_not_k: Option<(String, String)>,
}

impl JaffardReport {
    pub fn holds(&self) -> bool {
        self.covers_every_maximal && self.product_not_k.is_none()
    }
}

impl SpectralForest {
    pub fn from_flat(entries: &[FlatNode]) -> Result<Self, Vec<ForestIssue>> {
        let mut issues = Vec::new();
        if entries.is_empty() {
            return Err(vec![ForestIssue::Empty]);
        }
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.name.as_str(), i).is_some() {
                issues.push(ForestIssue::DuplicateName(e.name.clone()));
            }
        }
        let mut groups = Vec::with_capacity(entries.len());
        for e in entries {
            match RankOneGroup::parse(&e.group) {
                Ok(g) => groups.push(g),
                Err(err) => {
                    issues.push(ForestIssue::BadGroup { node: e.name.clone(), message: err.to_string() });
                    groups.push(RankOneGroup::integers());
                }
            }
        }
        let mut parent: Vec<Option<usize>> = Vec::with_capacity(entries.len());
        for e in entries {
            parent.push(match &e.parent {
                None => None,
                Some(p) => match index.get(p.as_str()) {
                    Some(&j) => Some(j),
                    None => {
                        issues.push(ForestIssue::Orphan { node: e.name.clone(), parent: p.clone() });
                        None
                    }
                },
            });
        }
        for start in 0..entries.len() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(start);
            while let Some(c) = cur {
                if !seen.insert(c) {
                    issues.push(ForestIssue::Cycle(entries[start].name.clone()));
                    break;
                }
                cur = parent[c];
            }
        }
        let mut has_child = vec![false; entries.len()];
        for p in parent.iter().flatten() {
            has_child[*p] = true;
        }
        for (i, e) in entries.iter().enumerate() {
            if has_child[i] && e.maximal == Some(true) {
                issues.push(ForestIssue::InternalMarkedMaximal(e.name.clone()));
            }
        }
        if !issues.is_empty() {
            return Err(issues);
        }
        // preorder numbering, roots and children in input order
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); entries.len()];
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        let mut order = Vec::with_capacity(entries.len());
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(children[i].iter().rev());
        }
        let mut new_id = vec![0; entries.len()];
        for (k, &i) in order.iter().enumerate() {
            new_id[i] = k;
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(entries.len());
        for &i in &order {
            let parent_id = parent[i].map(|p| PrimeId(new_id[p]));
            let depth = parent_id.map_or(1, |p| nodes[p.0].depth + 1);
            nodes.push(Node {
                name: entries[i].name.clone(),
                parent: parent_id,
                children: children[i].iter().map(|&c| PrimeId(new_id[c])).collect(),
                group: groups[i].clone(),
                depth,
            });
        }
        Ok(Self::assemble(nodes))
    }

    fn assemble(nodes: Vec<Node>) -> Self {
        let roots = (0..nodes.len()).filter(|&i| nodes[i].parent.is_none()).map(PrimeId).collect();
        let leaves: Vec<PrimeId> =
            (0..nodes.len()).filter(|&i| nodes[i].children.is_empty()).map(PrimeId).collect();
        let mut leaf_pos = vec![None; nodes.len()];
        for (k, l) in leaves.iter().enumerate() {
            leaf_pos[l.0] = Some(k);
        }
        let by_name = nodes.iter().enumerate().map(|(i, n)| (n.name.clone(), PrimeId(i))).collect();
        let mut groups: Vec<ValueGroup> = Vec::with_capacity(nodes.len());
        for n in &nodes {
            let mut comps = n.parent.map_or_else(Vec::new, |p| groups[p.0].components().to_vec());
            comps.push(n.group.clone());
            groups.push(ValueGroup::new(comps));
        }
        SpectralForest { nodes, roots, leaves, leaf_pos, by_name, groups }
    }

    pub fn from_specs(trees: &[NodeSpec]) -> Result<Self, Vec<ForestIssue>> {
        fn walk(n: &NodeSpec, parent: Option<&str>, out: &mut Vec<FlatNode>) {
            out.push(FlatNode {
                name: n.name.clone(),
                parent: parent.map(str::to_string),
                group: n.group.clone(),
                maximal: n.maximal,
            });
            for c in &n.children {
                walk(c, Some(&n.name), out);
            }
        }
        let mut flat = Vec::new();
        for t in trees {
            walk(t, None, &mut flat);
        }
        Self::from_flat(&flat)
    }

    /// Builds chains and trees from a compact description, for tests and fixtures.
    /// Each entry is `(name, parent, group literal)`.
    pub fn build(entries: &[(&str, Option<&str>, &str)]) -> Self {
        let flat: Vec<FlatNode> = entries
            .iter()
            .map(|(n, p, g)| FlatNode {
                name: n.to_string(),
                parent: p.map(str::to_string),
                group: g.to_string(),
                maximal: None,
            })
            .collect();
        Self::from_flat(&flat).unwrap_or_else(|e| panic!("invalid forest: {e:?}"))
    }

    /// A single chain whose edges carry the given groups, root first.
    pub fn chain(groups: &[&str]) -> Self {
        let names: Vec<String> = (1..=groups.len())
            .map(|i| if i == groups.len() { "M".to_string() } else { format!("P{i}") })
            .collect();
        let entries: Vec<(&str, Option<&str>, &str)> = (0..groups.len())
            .map(|i| (names[i].as_str(), (i > 0).then(|| names[i - 1].as_str()), groups[i]))
            .collect();
        Self::build(&entries)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, p: PrimeId) -> &Node {
        &self.nodes[p.0]
    }

    pub fn name(&self, p: PrimeId) -> &str {
        &self.nodes[p.0].name
    }

    pub fn primes(&self) -> impl Iterator<Item = PrimeId> {
        (0..self.nodes.len()).map(PrimeId)
    }

    pub fn id(&self, name: &str) -> Option<PrimeId> {
        self.by_name.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<PrimeId, ForestError> {
        self.id(name).ok_or_else(|| ForestError::UnknownPrime(name.to_string()))
    }

    pub fn roots(&self) -> &[PrimeId] {
        &self.roots
    }

    pub fn leaves(&self) -> &[PrimeId] {
        &self.leaves
    }

    pub fn is_leaf(&self, p: PrimeId) -> bool {
        self.nodes[p.0].children.is_empty()
    }

    /// Position of a maximal ideal in [`SpectralForest::leaves`].
    pub fn leaf_index(&self, p: PrimeId) -> Option<usize> {
        self.leaf_pos[p.0]
    }

    pub fn depth(&self, p: PrimeId) -> usize {
        self.nodes[p.0].depth
    }

    pub fn group(&self, p: PrimeId) -> &RankOneGroup {
        &self.nodes[p.0].group
    }

    /// Nodes from the root down to `p`, inclusive.
    pub fn path(&self, p: PrimeId) -> Vec<PrimeId> {
        let mut out = vec![p];
        let mut cur = p;
        while let Some(q) = self.nodes[cur.0].parent {
            out.push(q);
            cur = q;
        }
        out.reverse();
        out
    }

    pub fn value_group(&self, p: PrimeId) -> &ValueGroup {
        &self.groups[p.0]
    }

    /// `a ⊆ b` as primes: `a` lies on the path to `b`.
    pub fn is_below(&self, a: PrimeId, b: PrimeId) -> bool {
        let da = self.depth(a);
        let mut cur = b;
        while self.depth(cur) > da {
            cur = self.nodes[cur.0].parent.expect("depth > 1 has a parent");
        }
        cur == a
    }

    /// Largest prime contained in both, if any.
    pub fn meet(&self, a: PrimeId, b: PrimeId) -> Option<PrimeId> {
        let (mut x, mut y) = (a, b);
        while self.depth(x) > self.depth(y) {
            x = self.nodes[x.0].parent?;
        }
        while self.depth(y) > self.depth(x) {
            y = self.nodes[y.0].parent?;
        }
        while x != y {
            x = self.nodes[x.0].parent?;
            y = self.nodes[y.0].parent?;
        }
        Some(x)
    }

    pub fn leaves_above(&self, p: PrimeId) -> Vec<PrimeId> {
        self.leaves.iter().copied().filter(|&l| self.is_below(p, l)).collect()
    }

    pub fn tree_root(&self, p: PrimeId) -> PrimeId {
        self.path(p)[0]
    }

    pub fn branch_of(&self, p: PrimeId) -> BranchId {
        let r = self.tree_root(p);
        BranchId(self.roots.iter().position(|&x| x == r).expect("root listed"))
    }

    pub fn branch_root(&self, b: BranchId) -> PrimeId {
        self.roots[b.0]
    }

    pub fn branch_count(&self) -> usize {
        self.roots.len()
    }

    pub fn dependence_classes(&self) -> Vec<Vec<PrimeId>> {
        self.roots.iter().map(|&r| self.leaves_above(r)).collect()
    }

    pub fn dependence_class_names(&self) -> Vec<Vec<String>> {
        self.dependence_classes()
            .iter()
            .map(|c| c.iter().map(|&l| self.name(l).to_string()).collect())
            .collect()
    }

    /// The subforest of everything at or above `root`, with names kept.
    pub fn subtree(&self, root: PrimeId) -> SpectralForest {
        let keep: Vec<PrimeId> = self.primes().filter(|&p| self.is_below(root, p)).collect();
        self.restricted(&keep, |p| p != root)
    }

    /// The chain from the root of `p`'s tree up to `p`; `p` becomes maximal.
    pub fn chain_to(&self, p: PrimeId) -> SpectralForest {
        let keep = self.path(p);
        self.restricted(&keep, |q| q != keep[0])
    }

    /// Keeps `keep` (closed under parents among themselves); nodes failing
    /// `keeps_parent` become roots.
    fn restricted(&self, keep: &[PrimeId], keeps_parent: impl Fn(PrimeId) -> bool) -> SpectralForest {
        let flat: Vec<FlatNode> = keep
            .iter()
            .map(|&p| FlatNode {
                name: self.name(p).to_string(),
                parent: if keeps_parent(p) {
                    self.nodes[p.0].parent.map(|q| self.name(q).to_string())
                } else {
                    None
                },
                group: self.group(p).name(),
                maximal: None,
            })
            .collect();
        Self::from_flat(&flat).expect("restriction of a valid forest is valid")
    }

    pub fn standard_decomposition(&self) -> Vec<Branch> {
        self.roots
            .iter()
            .enumerate()
            .map(|(i, &r)| Branch { id: BranchId(i), root: r, forest: Arc::new(self.subtree(r)) })
            .collect()
    }

    pub fn is_h_local(&self) -> bool {
        self.nodes.iter().all(|n| n.children.len() <= 1)
    }

    /// For a single tree: the largest non-maximal prime below every maximal ideal.
    pub fn core_prime(&self) -> Option<CorePrime> {
        if self.roots.len() != 1 {
            return None;
        }
        let mut cur = self.roots[0];
        if self.is_leaf(cur) {
            return Some(CorePrime::RankOneLocal);
        }
        loop {
            let ch = &self.nodes[cur.0].children;
            if ch.len() == 1 && !self.is_leaf(ch[0]) {
                cur = ch[0];
            } else {
                return Some(CorePrime::Prime(cur));
            }
        }
    }

    /// The forest presenting `R_Q/Q R_Q`'s overring structure above `q`:
    /// the children of `q` become roots.
    pub fn cut_branch(&self, q: PrimeId) -> Result<SpectralForest, ForestError> {
        if self.is_leaf(q) {
            return Err(ForestError::CutAtLeaf(self.name(q).to_string()));
        }
        if !self.leaves.iter().all(|&l| self.is_below(q, l)) {
            return Err(ForestError::NotCommonLowerBound(self.name(q).to_string()));
        }
        let keep: Vec<PrimeId> =
            self.primes().filter(|&p| p != q && self.is_below(q, p)).collect();
        Ok(self.restricted(&keep, |p| self.nodes[p.0].parent != Some(q)))
    }

    /// Checks the Jaffard axioms for the family `{∩_{M∈part} R_M}`.
    pub fn check_jaffard_laws(&self, parts: &[Vec<PrimeId>]) -> JaffardReport {
        let covered: BTreeSet<PrimeId> = parts.iter().flatten().copied().collect();
        let covers_every_maximal = self.leaves.iter().all(|l| covered.contains(l));
        let mut product_not_k = None;
        'outer: for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                for &m in a {
                    for &n in b {
                        if self.meet(m, n).is_some() {
                            product_not_k =
                                Some((self.name(m).to_string(), self.name(n).to_string()));
                            break 'outer;
                        }
                    }
                }
            }
        }
        JaffardReport { covers_every_maximal, product_not_k }
    }

    /// Domain-spec rendering of the forest.
    pub fn to_spec_json(&self) -> serde_json::Value {
        fn node(f: &SpectralForest, p: PrimeId) -> serde_json::Value {
            let n = f.node(p);
            let mut obj = serde_json::json!({"name": n.name, "group": n.group.name()});
            if !n.children.is_empty() {
                obj["children"] = n.children.iter().map(|&c| node(f, c)).collect();
            }
            obj
        }
        serde_json::json!({"forest": self.roots.iter().map(|&r| node(self, r)).collect::<Vec<_>>()})
    }
}

impl fmt::Display for SpectralForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn node(fo: &SpectralForest, p: PrimeId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let n = fo.node(p);
            write!(f, "{}[{}]", n.name, n.group)?;
            if !n.children.is_empty() {
                f.write_str("(")?;
                for (i, &c) in n.children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    node(fo, c, f)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        for (i, &r) in self.roots.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            node(self, r, f)?;
        }
        Ok(())
    }
}

/// A diagnostic anchored to a line of the domain-spec text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

/// Parses and validates a domain-spec file.
pub fn parse_domain(text: &str) -> Result<SpectralForest, Vec<Diagnostic>> {
    let file: DomainFile = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic { line: e.line(), column: e.column(), message: e.to_string() }]
    })?;
    SpectralForest::from_specs(&file.forest).map_err(|issues| {
        issues
            .iter()
            .map(|issue| {
                let (line, column) = issue.node().map_or((1, 1), |n| locate_name(text, n));
                Diagnostic { line, column, message: issue.to_string() }
            })
            .collect()
    })
}

fn locate_name(text: &str, name: &str) -> (usize, usize) {
    let quoted = format!("\"{name}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(col) = line.find(&quoted) {
            if line[..col].contains("\"name\"") {
                return (i + 1, col + 1);
            }
        }
    }
    (1, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx_b() -> SpectralForest {
        SpectralForest::build(&[("P", None, "Z"), ("M1", Some("P"), "Q"), ("M2", Some("P"), "Z")])
    }

    #[test]
    fn validation_errors() {
        assert_eq!(SpectralForest::from_flat(&[]).unwrap_err(), vec![ForestIssue::Empty]);
        let flat = |n: &str, p: Option<&str>, m| FlatNode {
            name: n.into(),
            parent: p.map(Into::into),
            group: "Z".into(),
            maximal: m,
        };
        let err = SpectralForest::from_flat(&[flat("A", None, Some(true)), flat("B", Some("A"), None)])
            .unwrap_err();
        assert_eq!(err, vec![ForestIssue::InternalMarkedMaximal("A".into())]);
        let err = SpectralForest::from_flat(&[flat("A", Some("B"), None), flat("B", Some("A"), None)])
            .unwrap_err();
        assert!(matches!(err[0], ForestIssue::Cycle(_)));
        let err = SpectralForest::from_flat(&[flat("A", Some("X"), None)]).unwrap_err();
        assert!(matches!(err[0], ForestIssue::Orphan { .. }));
    }

    #[test]
    fn diagnostics_point_at_the_node() {
        let text = "{\"forest\": [\n  {\"name\": \"P\", \"group\": \"Z\", \"maximal\": true,\n   \"children\": [{\"name\": \"M\", \"group\": \"Q\"}]}\n]}";
        let diags = parse_domain(text).unwrap_err();
        assert_eq!(diags[0].line, 2);
        assert!(diags[0].message.contains("internal node marked maximal"));
        let diags = parse_domain("{\"forest\": [\n  {\"name\": \"P\", \"group\": \"W\"}]}").unwrap_err();
        assert_eq!(diags[0].line, 2);
        assert!(parse_domain("{\"forest\": [").is_err());
    }

    #[test]
    fn decomposition_of_shared_root() {
        let f = fx_b();
        assert_eq!(f.dependence_class_names(), vec![vec!["M1".to_string(), "M2".to_string()]]);
        assert!(!f.is_h_local());
        let p = f.id("P").unwrap();
        assert_eq!(f.core_prime(), Some(CorePrime::Prime(p)));
        let cut = f.cut_branch(p).unwrap();
        assert_eq!(cut.to_string(), "M1[Q]; M2[Z]");
        assert_eq!(cut.dependence_classes().len(), 2);
        assert!(f.cut_branch(f.id("M1").unwrap()).is_err());
    }

    #[test]
    fn chain_core_and_cut() {
        let c = SpectralForest::build(&[("P", None, "Z"), ("M", Some("P"), "Q")]);
        assert_eq!(c.core_prime(), Some(CorePrime::Prime(c.id("P").unwrap())));
        assert_eq!(c.cut_branch(c.id("P").unwrap()).unwrap().to_string(), "M[Q]");
        let a = SpectralForest::build(&[("M1", None, "Q"), ("M2", None, "Z")]);
        assert_eq!(a.standard_decomposition()[1].forest.core_prime(), Some(CorePrime::RankOneLocal));
    }

    #[test]
    fn jaffard_partitions() {
        let a = SpectralForest::build(&[("M1", None, "Q"), ("M2", None, "Z")]);
        let merged = vec![a.leaves().to_vec()];
        assert!(a.check_jaffard_laws(&merged).holds());
        let b = fx_b();
        let split: Vec<Vec<PrimeId>> = b.leaves().iter().map(|&l| vec![l]).collect();
        assert!(b.check_jaffard_laws(&split).product_not_k.is_some());
    }
}
