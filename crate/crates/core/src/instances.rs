//! Small reference grids used by the experiments, the CLI and the tests.

use crate::grid_model::{Edge, GridError, GridSpec, Node, NodeKind};
use crate::numerics::Cx;

fn j() -> Cx {
    Cx::new(0.0, 1.0)
}

/// Two generators (nodes 0, 1) and one load (node 2), every branch present.
///
/// Arguments are inductive weights `k = -susceptance`: generator shunts
/// `ka`, `kb` and branches `k12`, `k13`, `k23` (1-based names). A zero
/// branch weight drops that branch from the topology.
pub fn two_generator_one_load(ka: f64, kb: f64, k12: f64, k13: f64, k23: f64) -> Result<GridSpec, GridError> {
    let nodes = vec![
        Node::generator(-ka * j()),
        Node::generator(-kb * j()),
        Node::load(Cx::new(0.0, 0.0)),
    ];
    let edges = [(0, 1, k12), (0, 2, k13), (1, 2, k23)]
        .into_iter()
        .filter(|&(_, _, k)| k != 0.0)
        .map(|(a, b, k)| Edge::new(a, b, -k * j()))
        .collect();
    GridSpec::new(nodes, edges)
}

/// Two generators joined by a single lossless branch of susceptance `b`.
pub fn two_generator_line(b: f64) -> Result<GridSpec, GridError> {
    GridSpec::new(
        vec![Node::generator(Cx::new(0.0, 0.0)); 2],
        vec![Edge::new(0, 1, Cx::new(0.0, b))],
    )
}

/// Attaches to every generator of an all-generator `core` a load of its own,
/// joined by a branch of admittance `load_admittance`. Load `i` is numbered
/// `n + i`.
pub fn with_dedicated_loads(core: &GridSpec, load_admittance: Cx) -> Result<GridSpec, GridError> {
    let n = core.node_count();
    if core.n_loads() != 0 {
        return Err(GridError::UnexpectedLoads(core.n_loads()));
    }
    let mut nodes: Vec<Node> = core.nodes().to_vec();
    nodes.extend((0..n).map(|_| Node {
        kind: NodeKind::Load,
        shunt: Cx::new(0.0, 0.0),
    }));
    let mut edges = core.edges().to_vec();
    edges.extend((0..n).map(|i| Edge::new(i, n + i, load_admittance)));
    GridSpec::new(nodes, edges)
}
