//! Coupling matrix of the linearized swing dynamics and its stability value.
//!
//! Off-diagonal entries are `P_ij = κ (G_ij sin δ_ij − B_ij cos δ_ij)` with
//! `δ_ij = δ_i − δ_j`; each diagonal entry is the negated sum of the other
//! entries in its row. The stability value is the smallest eigenvalue of `P`
//! once the structural zero mode (all-ones eigenvector) is set aside.

use thiserror::Error;

use crate::admittance::build_y0;
use crate::grid_model::GridSpec;
use crate::kron::{schur_reduce, KronError, ReducedAdmittance};
use crate::numerics::{eig_symmetric_vectors, Cx, CxMatrix, NumericsError, RealSymMatrix, Spectrum};

/// Relative zero-mode tolerance: `τ₀ = ZERO_TOL · max(1, ‖P‖∞)`.
pub const ZERO_TOL: f64 = 1e-8;

/// Elementwise tolerance of the load transparency check.
pub const TRANSPARENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplingError {
    #[error("coupling needs at least two generators, got {0}")]
    TooFewGenerators(usize),
    #[error("kappa must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error("expected {expected} phases, got {got}")]
    PhaseCount { expected: usize, got: usize },
    #[error("coupling matrix is not symmetric (asymmetry {0:e})")]
    NonSymmetricResult(f64),
    #[error("{0} eigenvalues lie within the zero tolerance and the coupling graph is disconnected")]
    MultipleZeroModes(usize),
    #[error("no eigenvalue within the zero tolerance (closest {0:e})")]
    NoZeroMode(f64),
    #[error("grid edges are not a uniform pure susceptance: {0}")]
    NotUniform(String),
    #[error("uniform admittance is zero")]
    ZeroAdmittance,
    #[error("grid is disconnected")]
    Disconnected,
    #[error("reduced matrix deviates from A + jI by {0:e}")]
    Mismatch(f64),
    #[error(transparent)]
    Kron(#[from] KronError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Machine constants of the coupling: the common factor `ω_R E_i E_j / 2H_i`
/// and optional steady-state phases in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConstants {
    pub kappa: f64,
    pub phases: Option<Vec<f64>>,
}

impl Default for CouplingConstants {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            phases: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub matrix: RealSymMatrix,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Largest absolute row sum.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.n())
            .map(|i| self.matrix.row(i).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

pub fn build_coupling(y: &ReducedAdmittance, c: &CouplingConstants) -> Result<CouplingMatrix, CouplingError> {
    let n = y.n();
    if n < 2 {
        return Err(CouplingError::TooFewGenerators(n));
    }
    if !(c.kappa > 0.0 && c.kappa.is_finite()) {
        return Err(CouplingError::BadKappa(c.kappa));
    }
    if let Some(ph) = &c.phases {
        if ph.len() != n {
            return Err(CouplingError::PhaseCount {
                expected: n,
                got: ph.len(),
            });
        }
    }
    let phase = |i: usize| c.phases.as_ref().map_or(0.0, |p| p[i]);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for jx in 0..n {
            if i == jx {
                continue;
            }
            let d = phase(i) - phase(jx);
            let p = if d == 0.0 {
                -c.kappa * y.susceptance(i, jx)
            } else {
                c.kappa * (y.conductance(i, jx) * d.sin() - y.susceptance(i, jx) * d.cos())
            };
            data[i * n + jx] = p;
            row_sum += p;
        }
        data[i * n + i] = -row_sum;
    }
    match RealSymMatrix::new(n, data) {
        Ok(matrix) => Ok(CouplingMatrix { matrix }),
        Err(NumericsError::NotSymmetric(a)) => Err(CouplingError::NonSymmetricResult(a)),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Marginal => "Marginal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub spectrum: Spectrum,
    /// Eigenvalue designated as the structural zero.
    pub zero_mode_value: f64,
    pub alpha2: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
}

/// Extracts the stability value.
///
/// The structural zero is the eigenvalue closest to zero; on ties inside the
/// tolerance the one whose eigenvector is best aligned with the all-ones
/// vector is taken. Several eigenvalues inside the tolerance are an error
/// only when the coupling graph (nonzero off-diagonal pattern of `P`) is
/// disconnected; otherwise the second one is a marginal stability value.
pub fn stability_value(p: &CouplingMatrix) -> Result<StabilityReport, CouplingError> {
    let n = p.n();
    if n < 2 {
        return Err(CouplingError::TooFewGenerators(n));
    }
    let tau = ZERO_TOL * p.matrix.norm_inf().max(1.0);
    let (spectrum, vectors) = eig_symmetric_vectors(&p.matrix)?;
    let near: Vec<usize> = (0..n).filter(|&k| spectrum.eigenvalues[k].abs() <= tau).collect();
    let zero_idx = match near.len() {
        0 => {
            let closest = spectrum
                .eigenvalues
                .iter()
                .copied()
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(f64::NAN);
            return Err(CouplingError::NoZeroMode(closest));
        }
        1 => near[0],
        count => {
            if !coupling_graph_connected(&p.matrix, tau) {
                return Err(CouplingError::MultipleZeroModes(count));
            }
            let alignment = |k: usize| -> f64 { vectors.column(k).iter().sum::<f64>().abs() };
            *near
                .iter()
                .max_by(|&&a, &&b| alignment(a).total_cmp(&alignment(b)))
                .expect("non-empty")
        }
    };
    let zero_mode_value = spectrum.eigenvalues[zero_idx];
    let alpha2 = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != zero_idx)
        .map(|(_, &x)| x)
        .fold(f64::INFINITY, f64::min);
    let verdict = if alpha2 > tau {
        Verdict::Stable
    } else if alpha2 < -tau {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    };
    Ok(StabilityReport {
        spectrum,
        zero_mode_value,
        alpha2,
        verdict,
        tolerance: tau,
    })
}

fn coupling_graph_connected(p: &RealSymMatrix, tau: f64) -> bool {
    let n = p.n();
    let edge_tol = tau * 1e-4;
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for w in 0..n {
            if !seen[w] && w != u && p[(u, w)].abs() > edge_tol {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Everything the analysis pipeline produces for one grid.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub y0: crate::admittance::AdmittanceMatrix,
    pub reduced: ReducedAdmittance,
    pub coupling: CouplingMatrix,
    pub report: StabilityReport,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Admittance(#[from] crate::admittance::AdmittanceError),
    #[error(transparent)]
    Kron(#[from] KronError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
}

/// Grid → `Y₀` → Kron reduction → `P` → stability value.
pub fn analyze(g: &GridSpec, c: &CouplingConstants) -> Result<Analysis, AnalysisError> {
    let y0 = build_y0(g)?;
    let reduced = schur_reduce(&y0)?;
    let coupling = build_coupling(&reduced, c)?;
    let report = stability_value(&coupling)?;
    Ok(Analysis {
        y0,
        reduced,
        coupling,
        report,
    })
}

/// Stability value of a grid with default constants.
pub fn alpha2_of(g: &GridSpec) -> Result<f64, AnalysisError> {
    analyze(g, &CouplingConstants::default()).map(|a| a.report.alpha2)
}

/// Sign classification of a connected grid whose branches all carry the same
/// pure susceptance `c_scalar·j`: inductive (`c < 0`) is stable, capacitive
/// (`c > 0`) unstable. No eigensolve is performed.
pub fn gershgorin_classify_uniform(g: &GridSpec, c_scalar: f64) -> Result<Verdict, CouplingError> {
    if c_scalar == 0.0 {
        return Err(CouplingError::ZeroAdmittance);
    }
    let tol = 1e-12 * c_scalar.abs();
    for e in g.edges() {
        let z = e.admittance;
        if z.re.abs() > tol || (z.im - c_scalar).abs() > tol {
            return Err(CouplingError::NotUniform(format!(
                "edge {}-{} has admittance {}{:+}j",
                e.a, e.b, z.re, z.im
            )));
        }
    }
    if !g.is_connected() {
        return Err(CouplingError::Disconnected);
    }
    if g.n_generators() < 2 {
        return Err(CouplingError::TooFewGenerators(g.n_generators()));
    }
    Ok(if c_scalar < 0.0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransparencyReport {
    /// Largest `|Y - (A + jI)|` entry.
    pub max_deviation: f64,
    /// Largest entry of `|P(Y) - P(A)|`.
    pub coupling_deviation: f64,
}

/// Attaches a dedicated load to every generator of the generator-only matrix
/// `a` (all branches `-j`), reduces, and confirms `Y = A + jI` and that the
/// coupling matrices of `Y` and `A` coincide.
pub fn load_transparency_check(a_gen_only: &ReducedAdmittance) -> Result<TransparencyReport, CouplingError> {
    let n = a_gen_only.n();
    if n < 2 {
        return Err(CouplingError::TooFewGenerators(n));
    }
    let j = Cx::new(0.0, 1.0);
    let v = 2 * n;
    let mut y0 = CxMatrix::zeros(v, v);
    for r in 0..n {
        for s in 0..n {
            y0[(r, s)] = a_gen_only.matrix[(r, s)];
        }
        y0[(r, n + r)] = j;
        y0[(n + r, r)] = j;
        y0[(n + r, n + r)] = -j;
    }
    let y0 = crate::admittance::AdmittanceMatrix {
        matrix: y0,
        n_generators: n,
        shunts: vec![Cx::new(0.0, 0.0); v],
    };
    let y = schur_reduce(&y0)?;
    let expected = a_gen_only.matrix.sub(&CxMatrix::identity(n).scale(-j))?;
    let max_deviation = y.matrix.max_abs_diff(&expected);
    if max_deviation > TRANSPARENCY_TOL {
        return Err(CouplingError::Mismatch(max_deviation));
    }
    let c = CouplingConstants::default();
    let py = build_coupling(&y, &c)?;
    let pa = build_coupling(a_gen_only, &c)?;
    let coupling_deviation = py
        .matrix
        .as_slice()
        .iter()
        .zip(pa.matrix.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if coupling_deviation > TRANSPARENCY_TOL {
        return Err(CouplingError::Mismatch(coupling_deviation));
    }
    Ok(TransparencyReport {
        max_deviation,
        coupling_deviation,
    })
}
