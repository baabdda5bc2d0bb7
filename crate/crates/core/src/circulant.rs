//! Stability values of regular circulant grids.
//!
//! For odd `n` and hop count `k`, the circulant grid joining every node to
//! the `2k` nodes within `k` hops has the closed-form stability value
//! `(2k + 1) − sin((2k + 1)π/n) / sin(π/n)`. The sweep compares it with the
//! eigensolver pipeline; the surface fit regresses it on `{1, n, d, n², nd, d²}`
//! with `d = 2k`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::coupling::{alpha2_of, AnalysisError};
use crate::grid_model::{generate_named, GridError, Topology};
use crate::numerics::{real_solve, Cx};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CirculantError {
    #[error("circulant grids need an odd node count >= 3, got {0}")]
    OddRequired(usize),
    #[error("hop count {k} outside 1..={max}")]
    HopOutOfRange { k: usize, max: usize },
    #[error("quadratic fit needs at least 7 points, got {0}")]
    TooFewPoints(usize),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn check(n: usize, k: usize) -> Result<(), CirculantError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(CirculantError::OddRequired(n));
    }
    let max = (n - 1) / 2;
    if k < 1 || k > max {
        return Err(CirculantError::HopOutOfRange { k, max });
    }
    Ok(())
}

pub fn alpha2_closed_form(n: usize, k: usize) -> Result<f64, CirculantError> {
    check(n, k)?;
    if 2 * k + 1 == n {
        // sin(π) vanishes exactly; avoid its rounding residue
        return Ok(n as f64);
    }
    let m = (2 * k + 1) as f64;
    let nf = n as f64;
    Ok(m - (m * PI / nf).sin() / (PI / nf).sin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantPoint {
    pub n: usize,
    pub k: usize,
    pub degree: usize,
    pub alpha2_closed: f64,
    pub alpha2_numeric: f64,
}

impl CirculantPoint {
    pub fn abs_err(&self) -> f64 {
        (self.alpha2_closed - self.alpha2_numeric).abs()
    }
}

/// Closed-form and numeric stability values for every odd `3 <= n <= n_max`
/// and every admissible `k`, using unit inductive branches.
pub fn circulant_sweep(n_max: usize) -> Result<Vec<CirculantPoint>, CirculantError> {
    if n_max < 3 || n_max.is_multiple_of(2) {
        return Err(CirculantError::OddRequired(n_max));
    }
    let mut out = Vec::new();
    for n in (3..=n_max).step_by(2) {
        for k in 1..=(n - 1) / 2 {
            let g = generate_named(Topology::Circulant { k }, n, Cx::new(0.0, -1.0), Cx::new(0.0, 0.0))?;
            out.push(CirculantPoint {
                n,
                k,
                degree: 2 * k,
                alpha2_closed: alpha2_closed_form(n, k)?,
                alpha2_numeric: alpha2_of(&g)?,
            });
        }
    }
    Ok(out)
}

pub const SWEEP_CSV_HEADER: &str = "n,k,degree,alpha2_closed,alpha2_numeric,abs_err";

pub fn sweep_to_csv(points: &[CirculantPoint]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.n,
            p.k,
            p.degree,
            crate::fmt_sig(p.alpha2_closed),
            crate::fmt_sig(p.alpha2_numeric),
            crate::fmt_sig(p.abs_err())
        ));
    }
    s
}

/// `z ≈ c0 + c1 n + c2 d + c3 n² + c4 n d + c5 d²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSurface {
    /// Coefficients of `1, n, d, n², n·d, d²`.
    pub coefficients: [f64; 6],
    pub r2: f64,
}

impl QuadraticSurface {
    pub fn eval(&self, n: f64, d: f64) -> f64 {
        let c = &self.coefficients;
        c[0] + c[1] * n + c[2] * d + c[3] * n * n + c[4] * n * d + c[5] * d * d
    }
}

fn monomials(n: f64, d: f64) -> [f64; 6] {
    [1.0, n, d, n * n, n * d, d * d]
}

/// Ordinary least squares over the six quadratic monomials, solved through
/// column-scaled normal equations. `r²` is 1 when the data has no variance.
pub fn quadratic_fit(points: &[(f64, f64, f64)]) -> Result<QuadraticSurface, CirculantError> {
    if points.len() < 7 {
        return Err(CirculantError::TooFewPoints(points.len()));
    }
    let rows: Vec<[f64; 6]> = points.iter().map(|&(n, d, _)| monomials(n, d)).collect();
    let mut scale = [0.0_f64; 6];
    for r in &rows {
        for (s, x) in scale.iter_mut().zip(r) {
            *s += x * x;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let mut gram = vec![0.0; 36];
    let mut rhs = vec![0.0; 6];
    for (r, &(_, _, z)) in rows.iter().zip(points) {
        for a in 0..6 {
            let xa = r[a] / scale[a];
            rhs[a] += xa * z;
            for b in 0..6 {
                gram[a * 6 + b] += xa * r[b] / scale[b];
            }
        }
    }
    let sol = real_solve(&gram, 6, &rhs).map_err(|_| CirculantError::RankDeficient)?;
    let mut coefficients = [0.0; 6];
    for a in 0..6 {
        coefficients[a] = sol[a] / scale[a];
    }
    let surface = QuadraticSurface { coefficients, r2: 1.0 };

    let mean = points.iter().map(|p| p.2).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|p| (p.2 - mean).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|&(n, d, z)| (z - surface.eval(n, d)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(QuadraticSurface { r2, ..surface })
}

/// `(n, degree, alpha2_closed)` triples of a sweep.
pub fn fit_points(points: &[CirculantPoint]) -> Vec<(f64, f64, f64)> {
    points
        .iter()
        .map(|p| (p.n as f64, p.degree as f64, p.alpha2_closed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_case_equals_n() {
        assert_eq!(alpha2_closed_form(7, 3).unwrap(), 7.0);
        for n in (3..=19).step_by(2) {
            assert_eq!(alpha2_closed_form(n, (n - 1) / 2).unwrap(), n as f64);
        }
    }

    #[test]
    fn ring_case_trig_identity() {
        for n in (3..=41).step_by(2) {
            let want = 2.0 - 2.0 * (2.0 * PI / n as f64).cos();
            assert!((alpha2_closed_form(n, 1).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn n7_k2_value() {
        let v = alpha2_closed_form(7, 2).unwrap();
        assert!((v - 3.198).abs() < 5e-4);
        let direct = 5.0 - (5.0 * PI / 7.0).sin() / (PI / 7.0).sin();
        assert_eq!(v, direct);
    }

    #[test]
    fn argument_errors() {
        assert_eq!(alpha2_closed_form(8, 1), Err(CirculantError::OddRequired(8)));
        assert_eq!(alpha2_closed_form(1, 1), Err(CirculantError::OddRequired(1)));
        assert_eq!(
            alpha2_closed_form(7, 4),
            Err(CirculantError::HopOutOfRange { k: 4, max: 3 })
        );
        assert!(circulant_sweep(4).is_err());
    }

    #[test]
    fn smallest_sweep() {
        let pts = circulant_sweep(3).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].n, pts[0].k, pts[0].degree), (3, 1, 2));
        assert!((pts[0].alpha2_numeric - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_quadratic_recovered() {
        let c = [0.5, -1.25, 2.0, 0.125, -0.375, 0.0625];
        let mut pts = Vec::new();
        for n in (3..=19).step_by(2) {
            for k in 1..=(n - 1) / 2 {
                let (nf, d) = (n as f64, 2.0 * k as f64);
                let z = c[0] + c[1] * nf + c[2] * d + c[3] * nf * nf + c[4] * nf * d + c[5] * d * d;
                pts.push((nf, d, z));
            }
        }
        let s = quadratic_fit(&pts).unwrap();
        for (got, want) in s.coefficients.iter().zip(c) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!((s.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let pts: Vec<_> = (0..9).map(|i| ((i % 3) as f64, (i / 3) as f64, 4.0)).collect();
        let s = quadratic_fit(&pts).unwrap();
        assert!((s.coefficients[0] - 4.0).abs() < 1e-10);
        assert!(s.coefficients[1..].iter().all(|c| c.abs() < 1e-10));
        assert_eq!(s.r2, 1.0);
    }

    #[test]
    fn degenerate_designs() {
        let few: Vec<_> = (0..6).map(|i| (i as f64, 0.0, 1.0)).collect();
        assert_eq!(quadratic_fit(&few), Err(CirculantError::TooFewPoints(6)));
        // all points on the line d = n
        let line: Vec<_> = (0..10).map(|i| (i as f64, i as f64, i as f64)).collect();
        assert_eq!(quadratic_fit(&line), Err(CirculantError::RankDeficient));
    }
}
