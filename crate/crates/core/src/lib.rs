//! Small-signal stability analysis of power grids.
//!
//! A grid of generator and load nodes is turned into its nodal admittance
//! matrix, the loads are removed by Kron reduction, and the reduced matrix
//! defines a real symmetric coupling matrix whose second-smallest eigenvalue
//! measures how strongly the generators are held together.

pub mod admittance;
pub mod circulant;
pub mod coupling;
pub mod experiments;
pub mod grid_model;
pub mod instances;
pub mod kron;
pub mod numerics;
pub mod swing_sim;

pub use admittance::{build_y0, validate_y0, AdmittanceError, AdmittanceMatrix, Y0Diagnostics};
pub use coupling::{
    alpha2_of, analyze, build_coupling, stability_value, Analysis, AnalysisError, CouplingConstants,
    CouplingError, CouplingMatrix, StabilityReport, Verdict,
};
pub use grid_model::{Edge, GridError, GridSpec, Node, NodeKind, PrueferCode, Topology};
pub use kron::{iterative_reduce, schur_reduce, KronError, ReducedAdmittance};
pub use numerics::Cx;

/// Formats `x` with 12 significant digits in the style of C's `%.12g`.
///
/// The output is deterministic across platforms; negative zero prints as `0`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
