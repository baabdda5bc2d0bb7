//! Nodal admittance matrix of a grid.
//!
//! Standard nodal-analysis sign convention: the off-diagonal entry `(r, s)`
//! is the negated branch admittance between `r` and `s`, and the diagonal
//! entry `(r, r)` is the node's shunt plus the sum of its branch admittances.
//! For a lossless branch of susceptance `b` this puts `-b·j = k·j` off the
//! diagonal, where `k = -b` is the branch's positive inductive weight.
//! The reference (ground) node is implicit; shunts connect to it.

use thiserror::Error;

use crate::grid_model::GridSpec;
use crate::numerics::{Cx, CxMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdmittanceError {
    #[error("grid is disconnected")]
    Disconnected,
}

/// `Y₀` with generators in rows `0..n_generators`, loads after.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    pub matrix: CxMatrix,
    pub n_generators: usize,
    /// Per-node shunt admittance, kept for row-sum diagnostics.
    pub shunts: Vec<Cx>,
}

impl AdmittanceMatrix {
    pub fn n_loads(&self) -> usize {
        self.matrix.rows() - self.n_generators
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
}

pub fn build_y0(g: &GridSpec) -> Result<AdmittanceMatrix, AdmittanceError> {
    if !g.is_connected() {
        return Err(AdmittanceError::Disconnected);
    }
    let v = g.node_count();
    let mut m = CxMatrix::zeros(v, v);
    for (i, node) in g.nodes().iter().enumerate() {
        m[(i, i)] = node.shunt;
    }
    for e in g.edges() {
        m[(e.a, e.b)] -= e.admittance;
        m[(e.b, e.a)] -= e.admittance;
        m[(e.a, e.a)] += e.admittance;
        m[(e.b, e.b)] += e.admittance;
    }
    Ok(AdmittanceMatrix {
        matrix: m,
        n_generators: g.n_generators(),
        shunts: g.nodes().iter().map(|n| n.shunt).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Y0Diagnostics {
    /// Largest `|Y_rs - Y_sr|`.
    pub symmetry_residual: f64,
    /// Largest `|Σ_s Y_rs - shunt_r|`.
    pub row_sum_residual: f64,
    /// `|Y_rr| >= Σ_{s≠r} |Y_rs|` on every row.
    pub diagonally_dominant: bool,
    /// Rows where the dominance is strict.
    pub strict_rows: usize,
}

impl Y0Diagnostics {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_residual <= tol
    }
}

pub fn validate_y0(y: &AdmittanceMatrix) -> Y0Diagnostics {
    let m = &y.matrix;
    let v = m.rows();
    let scale = m.max_abs().max(1.0);
    let mut row_sum_residual: f64 = 0.0;
    let mut dominant = true;
    let mut strict_rows = 0;
    for r in 0..v {
        let sum: Cx = m.row(r).iter().sum();
        let shunt = y.shunts.get(r).copied().unwrap_or_default();
        row_sum_residual = row_sum_residual.max((sum - shunt).norm());
        let off: f64 = (0..v).filter(|&s| s != r).map(|s| m[(r, s)].norm()).sum();
        let diag = m[(r, r)].norm();
        if diag + 1e-12 * scale < off {
            dominant = false;
        } else if diag > off + 1e-12 * scale {
            strict_rows += 1;
        }
    }
    Y0Diagnostics {
        symmetry_residual: m.symmetry_residual(),
        row_sum_residual,
        diagonally_dominant: dominant,
        strict_rows,
    }
}
