//! Grid topology model, named generators, and hop-count metrics.
//!
//! Nodes are indexed `0..v` with every generator before every load, so the
//! generator/load block split of the admittance matrix is plain index
//! arithmetic. Edges are undirected and simple.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::numerics::Cx;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid has no generator")]
    NoGenerator,
    #[error("node {0} is a generator but follows a load")]
    GeneratorAfterLoad(usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {a}-{b} references a node outside 0..{v}")]
    NodeOutOfRange { a: usize, b: usize, v: usize },
    #[error("non-finite admittance on {0}")]
    NonFinite(String),
    #[error("circulant graphs need an odd node count, got {0}")]
    OddRequired(usize),
    #[error("hop count {k} outside 1..={max}")]
    HopOutOfRange { k: usize, max: usize },
    #[error("{kind} needs at least {min} nodes, got {n}")]
    TooFewNodes { kind: &'static str, n: usize, min: usize },
    #[error("invalid Pruefer code: {0}")]
    InvalidCode(String),
    #[error("node {0} is not reachable from node {1}")]
    Unreachable(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is not a tree")]
    NotATree,
    #[error("nodes {0} and {1} are already adjacent")]
    AlreadyAdjacent(usize, usize),
    #[error("expected an all-generator grid, found {0} loads")]
    UnexpectedLoads(usize),
    #[error("node index {0} out of range")]
    BadNode(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Generator,
    Load,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    /// Admittance to the implicit reference node.
    pub shunt: Cx,
}

impl Node {
    pub fn generator(shunt: Cx) -> Self {
        Self {
            kind: NodeKind::Generator,
            shunt,
        }
    }

    pub fn load(shunt: Cx) -> Self {
        Self {
            kind: NodeKind::Load,
            shunt,
        }
    }
}

/// Undirected branch. Stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub admittance: Cx,
}

impl Edge {
    pub fn new(a: usize, b: usize, admittance: Cx) -> Self {
        Self {
            a: a.min(b),
            b: a.max(b),
            admittance,
        }
    }
}

/// Immutable, validated grid description.
#[derive(Clone, PartialEq)]
pub struct GridSpec {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("generators", &self.n_generators())
            .field("loads", &self.n_loads())
            .field("edges", &self.edge_pairs())
            .finish()
    }
}

impl GridSpec {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GridError> {
        if !nodes.iter().any(|n| n.kind == NodeKind::Generator) {
            return Err(GridError::NoGenerator);
        }
        let mut seen_load = false;
        for (i, node) in nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Load => seen_load = true,
                NodeKind::Generator if seen_load => return Err(GridError::GeneratorAfterLoad(i)),
                NodeKind::Generator => {}
            }
            if !(node.shunt.re.is_finite() && node.shunt.im.is_finite()) {
                return Err(GridError::NonFinite(format!("shunt of node {i}")));
            }
        }
        let v = nodes.len();
        let mut pairs = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); v];
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let e = Edge::new(e.a, e.b, e.admittance);
            if e.b >= v {
                return Err(GridError::NodeOutOfRange { a: e.a, b: e.b, v });
            }
            if e.a == e.b {
                return Err(GridError::SelfLoop(e.a));
            }
            if !pairs.insert((e.a, e.b)) {
                return Err(GridError::DuplicateEdge(e.a, e.b));
            }
            if !(e.admittance.re.is_finite() && e.admittance.im.is_finite()) {
                return Err(GridError::NonFinite(format!("edge {}-{}", e.a, e.b)));
            }
            adjacency[e.a].push(e.b);
            adjacency[e.b].push(e.a);
            normalized.push(e);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            nodes,
            edges: normalized,
            adjacency,
        })
    }

    /// Builds a grid from nodes in arbitrary order, moving generators in
    /// front of loads (stable within each kind). Returns the grid and the
    /// old-to-new index map.
    pub fn reordered(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<(Self, Vec<usize>), GridError> {
        let mut order: Vec<usize> = (0..nodes.len())
            .filter(|&i| nodes[i].kind == NodeKind::Generator)
            .collect();
        order.extend((0..nodes.len()).filter(|&i| nodes[i].kind == NodeKind::Load));
        let mut old_to_new = vec![0; nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            old_to_new[old] = new;
        }
        let v = nodes.len();
        let new_nodes = order.iter().map(|&old| nodes[old]).collect();
        let new_edges = edges
            .into_iter()
            .map(|e| {
                if e.a >= v || e.b >= v {
                    Err(GridError::NodeOutOfRange { a: e.a, b: e.b, v })
                } else {
                    Ok(Edge::new(old_to_new[e.a], old_to_new[e.b], e.admittance))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Self::new(new_nodes, new_edges)?, old_to_new))
    }

    /// All-generator grid with uniform edge admittance and shunt.
    pub fn uniform(n: usize, pairs: &[(usize, usize)], edge_admittance: Cx, shunt: Cx) -> Result<Self, GridError> {
        let nodes = vec![Node::generator(shunt); n];
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge::new(a, b, edge_admittance))
            .collect();
        Self::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_generators(&self) -> usize {
        self.nodes
            .iter()
            .take_while(|n| n.kind == NodeKind::Generator)
            .count()
    }

    pub fn n_loads(&self) -> usize {
        self.nodes.len() - self.n_generators()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Sorted `(a, b)` pairs with `a < b`.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<_> = self.edges.iter().map(|e| (e.a, e.b)).collect();
        p.sort_unstable();
        p
    }

    /// Copy of this grid with one more edge.
    pub fn with_edge(&self, a: usize, b: usize, admittance: Cx) -> Result<Self, GridError> {
        let mut edges = self.edges.clone();
        edges.push(Edge::new(a, b, admittance));
        Self::new(self.nodes.clone(), edges)
    }

    /// BFS hop counts from `src`; `None` for unreachable nodes.
    pub fn hops_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.nodes.is_empty() || self.hops_from(0).iter().all(Option::is_some)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.nodes.len() && self.is_connected()
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<usize, GridError> {
        self.check_node(x)?;
        self.check_node(y)?;
        self.hops_from(x)[y].ok_or(GridError::Unreachable(y, x))
    }

    /// Largest hop count from `x` to any node.
    pub fn eccentricity(&self, x: usize) -> Result<usize, GridError> {
        self.check_node(x)?;
        self.hops_from(x)
            .into_iter()
            .try_fold(0, |m, d| d.map(|d| m.max(d)).ok_or(GridError::Disconnected))
    }

    pub fn diameter(&self) -> Result<usize, GridError> {
        (0..self.nodes.len()).try_fold(0, |m, x| self.eccentricity(x).map(|e| m.max(e)))
    }

    /// Lowest-index node of minimum eccentricity.
    pub fn center(&self) -> Result<usize, GridError> {
        let mut best = (usize::MAX, 0);
        for x in 0..self.nodes.len() {
            let e = self.eccentricity(x)?;
            if e < best.0 {
                best = (e, x);
            }
        }
        Ok(best.1)
    }

    /// Length of the unique cycle created by adding edge `a`-`b` to a tree.
    pub fn cycle_length_of_edge(&self, a: usize, b: usize) -> Result<usize, GridError> {
        if !self.is_tree() {
            return Err(GridError::NotATree);
        }
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Err(GridError::SelfLoop(a));
        }
        if self.is_adjacent(a, b) {
            return Err(GridError::AlreadyAdjacent(a, b));
        }
        Ok(self.distance(a, b)? + 1)
    }

    fn check_node(&self, x: usize) -> Result<(), GridError> {
        if x < self.nodes.len() {
            Ok(())
        } else {
            Err(GridError::BadNode(x))
        }
    }
}

/// Named all-generator topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Star,
    Path,
    Ring,
    Complete,
    /// Each node joined to every node within `k` hops around the ring.
    Circulant { k: usize },
}

impl Topology {
    fn name(&self) -> &'static str {
        match self {
            Topology::Star => "star",
            Topology::Path => "path",
            Topology::Ring => "ring",
            Topology::Complete => "complete",
            Topology::Circulant { .. } => "circulant",
        }
    }

    /// Unordered edge list `(a, b)` with `a < b`, sorted.
    pub fn edge_pairs(&self, n: usize) -> Result<Vec<(usize, usize)>, GridError> {
        let min = match self {
            Topology::Ring | Topology::Circulant { .. } => 3,
            _ => 2,
        };
        if n < min {
            return Err(GridError::TooFewNodes {
                kind: self.name(),
                n,
                min,
            });
        }
        let mut set = BTreeSet::new();
        let mut add = |a: usize, b: usize| {
            set.insert((a.min(b), a.max(b)));
        };
        match *self {
            Topology::Star => (1..n).for_each(|i| add(0, i)),
            Topology::Path => (1..n).for_each(|i| add(i - 1, i)),
            Topology::Ring => (0..n).for_each(|i| add(i, (i + 1) % n)),
            Topology::Complete => {
                for a in 0..n {
                    for b in (a + 1)..n {
                        add(a, b);
                    }
                }
            }
            Topology::Circulant { k } => {
                if n.is_multiple_of(2) {
                    return Err(GridError::OddRequired(n));
                }
                let max = (n - 1) / 2;
                if k < 1 || k > max {
                    return Err(GridError::HopOutOfRange { k, max });
                }
                for i in 0..n {
                    for h in 1..=k {
                        add(i, (i + h) % n);
                    }
                }
            }
        }
        Ok(set.into_iter().collect())
    }
}

pub fn generate_named(topology: Topology, n: usize, edge_admittance: Cx, shunt: Cx) -> Result<GridSpec, GridError> {
    let pairs = topology.edge_pairs(n)?;
    GridSpec::uniform(n, &pairs, edge_admittance, shunt)
}

/// Length `n - 2` sequence of labels in `0..n`, in bijection with labeled
/// trees on `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrueferCode {
    n: usize,
    code: Vec<usize>,
}

impl PrueferCode {
    pub fn new(n: usize, code: Vec<usize>) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::InvalidCode(format!("trees need n >= 2, got {n}")));
        }
        if code.len() != n - 2 {
            return Err(GridError::InvalidCode(format!(
                "length {} for n = {n}, expected {}",
                code.len(),
                n - 2
            )));
        }
        if let Some(&bad) = code.iter().find(|&&c| c >= n) {
            return Err(GridError::InvalidCode(format!("label {bad} not below {n}")));
        }
        Ok(Self { n, code })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[usize] {
        &self.code
    }

    /// Decodes to the sorted edge list of the labeled tree.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut degree = vec![1usize; n];
        for &c in &self.code {
            degree[c] += 1;
        }
        let mut leaves: BTreeSet<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
        let mut edges = Vec::with_capacity(n - 1);
        for &c in &self.code {
            let leaf = *leaves.iter().next().expect("a tree always has a leaf");
            leaves.remove(&leaf);
            edges.push((leaf.min(c), leaf.max(c)));
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.insert(c);
            }
        }
        let rest: Vec<usize> = leaves.into_iter().collect();
        edges.push((rest[0], rest[1]));
        edges.sort_unstable();
        edges
    }

    /// Every code for `n` nodes in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = PrueferCode> {
        let len = n.saturating_sub(2);
        let total = if n < 2 { 0 } else { n.pow(len as u32) };
        (0..total).map(move |mut idx| {
            let mut code = vec![0; len];
            for slot in code.iter_mut().rev() {
                *slot = idx % n;
                idx /= n;
            }
            PrueferCode { n, code }
        })
    }
}

impl fmt::Display for PrueferCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.code.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join("-"))
    }
}

pub fn tree_from_pruefer(code: &PrueferCode, edge_admittance: Cx) -> Result<GridSpec, GridError> {
    GridSpec::uniform(code.n(), &code.edges(), edge_admittance, Cx::new(0.0, 0.0))
}
