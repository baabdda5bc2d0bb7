//! Kron reduction: elimination of the load nodes from `Y₀`.
//!
//! With `Y₀ = [[A, B], [C, D]]` split at the generator/load boundary, the
//! reduced generator matrix is the Schur complement `Y = A - B D⁻¹ C`. The
//! same matrix results from eliminating loads one at a time, each step a
//! Schur complement on a 1×1 pivot. Both routes are exposed so they can be
//! checked against each other.

use thiserror::Error;

use crate::admittance::AdmittanceMatrix;
use crate::numerics::{cx_lu_solve, matmul, Cx, CxMatrix, NumericsError, PIVOT_TOL};

/// Tolerance used when snapping entries to multiples of the common admittance.
pub const COEFF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KronError {
    #[error("load block is singular")]
    SingularLoadBlock,
    #[error("elimination pivot of load node {0} is zero")]
    SingularPivot(usize),
    #[error("elimination order is not a permutation of the load nodes")]
    BadOrder,
    #[error("admittance matrix is not uniform in the common value: {0}")]
    NotUniform(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `n×n` generator admittance matrix after all loads are eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedAdmittance {
    pub matrix: CxMatrix,
}

impl ReducedAdmittance {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    /// Conductance `G_rs` (real part).
    pub fn conductance(&self, r: usize, s: usize) -> f64 {
        self.matrix[(r, s)].re
    }

    /// Susceptance `B_rs` (imaginary part).
    pub fn susceptance(&self, r: usize, s: usize) -> f64 {
        self.matrix[(r, s)].im
    }
}

/// One-shot Schur complement `A - B D⁻¹ C`.
pub fn schur_reduce(y: &AdmittanceMatrix) -> Result<ReducedAdmittance, KronError> {
    let n = y.n_generators;
    let v = y.size();
    let a = y.matrix.block(0, n, 0, n);
    if v == n {
        return Ok(ReducedAdmittance { matrix: a });
    }
    let b = y.matrix.block(0, n, n, v);
    let c = y.matrix.block(n, v, 0, n);
    let d = y.matrix.block(n, v, n, v);
    let d_inv_c = cx_lu_solve(&d, &c).map_err(|e| match e {
        NumericsError::SingularMatrix { .. } => KronError::SingularLoadBlock,
        other => KronError::Numerics(other),
    })?;
    let correction = matmul(&b, &d_inv_c)?;
    Ok(ReducedAdmittance {
        matrix: a.sub(&correction)?,
    })
}

/// Eliminates loads one at a time, last load first.
pub fn iterative_reduce(y: &AdmittanceMatrix) -> Result<ReducedAdmittance, KronError> {
    let order: Vec<usize> = (y.n_generators..y.size()).rev().collect();
    iterative_reduce_in_order(y, &order)
}

/// Eliminates the load nodes in the given order (original node indices).
pub fn iterative_reduce_in_order(y: &AdmittanceMatrix, order: &[usize]) -> Result<ReducedAdmittance, KronError> {
    let n = y.n_generators;
    let v = y.size();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (n..v).collect::<Vec<_>>() {
        return Err(KronError::BadOrder);
    }

    let mut m = y.matrix.clone();
    // original index of each row/column still present in `m`
    let mut alive: Vec<usize> = (0..v).collect();
    for &node in order {
        let p = alive
            .iter()
            .position(|&x| x == node)
            .expect("order was validated");
        let size = alive.len();
        let pivot = m[(p, p)];
        let scale = (0..size).map(|s| m[(p, s)].norm()).sum::<f64>();
        if pivot.norm().is_nan() || pivot.norm() <= PIVOT_TOL * scale {
            return Err(KronError::SingularPivot(node));
        }
        let keep: Vec<usize> = (0..size).filter(|&i| i != p).collect();
        let mut next = CxMatrix::zeros(size - 1, size - 1);
        for (ni, &i) in keep.iter().enumerate() {
            let f = m[(i, p)] / pivot;
            for (nj, &jx) in keep.iter().enumerate() {
                next[(ni, nj)] = m[(i, jx)] - f * m[(p, jx)];
            }
        }
        m = next;
        alive.remove(p);
    }
    Ok(ReducedAdmittance { matrix: m })
}

/// Outcome of the five structural checks on a reduced uniform matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreservationReport {
    pub symmetric: bool,
    pub invertible: bool,
    pub off_diagonal_nonpositive: bool,
    pub diagonal_dominates_row: bool,
    pub diagonal_positive: bool,
}

impl PreservationReport {
    pub fn all_hold(&self) -> bool {
        self.symmetric
            && self.invertible
            && self.off_diagonal_nonpositive
            && self.diagonal_dominates_row
            && self.diagonal_positive
    }
}

/// Real coefficient of `z` as a multiple of `common`, if it is one.
fn coefficient(z: Cx, common: Cx) -> Option<f64> {
    let q = z / common;
    (q.im.abs() <= COEFF_TOL * q.re.abs().max(1.0)).then_some(q.re)
}

/// Checks that Kron reduction kept the structure of a uniform `Y₀`.
///
/// `y0` must have every branch equal to `common_value` and every shunt a
/// real multiple of it; its off-diagonal coefficients must be integers.
pub fn preservation_report(
    y0: &AdmittanceMatrix,
    y: &ReducedAdmittance,
    common_value: Cx,
) -> Result<PreservationReport, KronError> {
    if common_value.norm() == 0.0 {
        return Err(KronError::NotUniform("common value is zero".to_string()));
    }
    let v = y0.size();
    for r in 0..v {
        for s in 0..v {
            let c = coefficient(y0.matrix[(r, s)], common_value).ok_or_else(|| {
                KronError::NotUniform(format!("Y0[{r}][{s}] is not a real multiple"))
            })?;
            if r != s && (c - c.round()).abs() > COEFF_TOL {
                return Err(KronError::NotUniform(format!(
                    "Y0[{r}][{s}] has non-integer coefficient {c}"
                )));
            }
        }
    }

    let n = y.n();
    let mut coeff = vec![0.0; n * n];
    for r in 0..n {
        for s in 0..n {
            coeff[r * n + s] = coefficient(y.matrix[(r, s)], common_value).ok_or_else(|| {
                KronError::NotUniform(format!("Y[{r}][{s}] is not a real multiple"))
            })?;
        }
    }
    let scale = coeff.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = COEFF_TOL * scale;

    let mut report = PreservationReport {
        symmetric: true,
        invertible: cx_lu_solve(&y.matrix, &CxMatrix::identity(n)).is_ok(),
        off_diagonal_nonpositive: true,
        diagonal_dominates_row: true,
        diagonal_positive: true,
    };
    for r in 0..n {
        let mut off_sum = 0.0;
        for s in 0..n {
            if r == s {
                continue;
            }
            let c = coeff[r * n + s];
            off_sum += c;
            if (c - coeff[s * n + r]).abs() > tol {
                report.symmetric = false;
            }
            if c > tol {
                report.off_diagonal_nonpositive = false;
            }
        }
        let d = coeff[r * n + r];
        if d < -off_sum - tol {
            report.diagonal_dominates_row = false;
        }
        if d <= tol {
            report.diagonal_positive = false;
        }
    }
    Ok(report)
}
