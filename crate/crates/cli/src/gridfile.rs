//! JSON grid files.
//!
//! ```json
//! {
//!   "nodes": [{"id": 0, "kind": "generator", "shunt_b": 0.0, "shunt_g": 0.0}],
//!   "edges": [{"from": 0, "to": 1, "b": -1.0, "g": 0.0}]
//! }
//! ```
//!
//! Node ids are arbitrary distinct integers; nodes are numbered by position.
//! Loads listed before a generator are moved behind the generators.

use std::collections::HashMap;
use std::path::Path;

use gridstab::{Cx, Edge, GridSpec, Node, NodeKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Generator,
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: u64,
    pub kind: Kind,
    pub shunt_b: f64,
    #[serde(default)]
    pub shunt_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: u64,
    pub to: u64,
    /// Branch susceptance; negative is inductive.
    pub b: f64,
    #[serde(default)]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

/// Parsed grid; `reordered` is set when nodes had to be renumbered.
pub struct Loaded {
    pub grid: GridSpec,
    pub reordered: bool,
}

impl GridFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_grid(&self) -> Result<Loaded, CliError> {
        let mut index = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(CliError::Parse(format!("duplicate node id {}", n.id)));
            }
        }
        let lookup = |id: u64| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| CliError::Parse(format!("edge refers to unknown node id {id}")))
        };
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .map(|n| {
                let shunt = Cx::new(n.shunt_g, n.shunt_b);
                match n.kind {
                    Kind::Generator => Node::generator(shunt),
                    Kind::Load => Node::load(shunt),
                }
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(Edge::new(lookup(e.from)?, lookup(e.to)?, Cx::new(e.g, e.b))))
            .collect::<Result<Vec<_>, CliError>>()?;
        let (grid, old_to_new) = GridSpec::reordered(nodes, edges).map_err(|e| CliError::Parse(e.to_string()))?;
        let reordered = old_to_new.iter().enumerate().any(|(i, &j)| i != j);
        Ok(Loaded { grid, reordered })
    }

    pub fn from_grid(g: &GridSpec) -> Self {
        let nodes = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| NodeEntry {
                id: i as u64,
                kind: match n.kind {
                    NodeKind::Generator => Kind::Generator,
                    NodeKind::Load => Kind::Load,
                },
                shunt_b: n.shunt.im,
                shunt_g: n.shunt.re,
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .map(|e| EdgeEntry {
                from: e.a as u64,
                to: e.b as u64,
                b: e.admittance.im,
                g: e.admittance.re,
            })
            .collect();
        GridFile { nodes, edges }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("grid file serializes");
        s.push('\n');
        s
    }
}

/// Reads a grid file, warning on stderr when nodes had to be reordered.
pub fn load_grid(path: &Path) -> Result<GridSpec, CliError> {
    let loaded = GridFile::read(path)?.to_grid()?;
    if loaded.reordered {
        eprintln!(
            "warning: {}: loads listed before generators; nodes renumbered with generators first",
            path.display()
        );
    }
    Ok(loaded.grid)
}
