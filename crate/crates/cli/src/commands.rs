use std::fmt::Write as _;
use std::path::Path;

use gridstab::circulant::{circulant_sweep, quadratic_fit, sweep_to_csv, SWEEP_CSV_HEADER};
use gridstab::coupling::{analyze, CouplingConstants};
use gridstab::experiments::{
    best_join_edge, cycle_addition_experiment, tree_diameter_experiment, ConjectureVerdict,
};
use gridstab::fmt_sig;
use gridstab::grid_model::{generate_named, Topology};
use gridstab::numerics::CxMatrix;
use gridstab::swing_sim::{divergence_detect, ripple_metric, simulate, trajectory_to_csv, Pulse, SimConfig};
use gridstab::{Analysis, Cx};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::gridfile::{load_grid, GridFile};

pub const EXIT_COUNTEREXAMPLE: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Star,
    Path,
    Ring,
    Complete,
    Circulant,
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Rounds to the 12 significant digits used by every text output.
fn r12(x: f64) -> Value {
    fmt_sig(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

fn cx_text(z: Cx) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", fmt_sig(z.re), sign, fmt_sig(z.im.abs()))
}

fn cx_matrix_text(out: &mut String, title: &str, m: &CxMatrix) {
    let _ = writeln!(out, "{title}:");
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|&z| cx_text(z)).collect();
        let _ = writeln!(out, "  [{}]", row.join(", "));
    }
}

fn cx_matrix_json(m: &CxMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(|z| json!([r12(z.re), r12(z.im)])).collect()))
            .collect(),
    )
}

fn cx_matrix_csv(out: &mut String, name: &str, m: &CxMatrix) {
    for r in 0..m.rows() {
        for (c, z) in m.row(r).iter().enumerate() {
            let _ = writeln!(out, "{name},{r},{c},{},{}", fmt_sig(z.re), fmt_sig(z.im));
        }
    }
}

pub fn render_analysis(a: &Analysis, format: Format) -> String {
    let p = &a.coupling.matrix;
    let rep = &a.report;
    let mut out = String::new();
    match format {
        Format::Text => {
            let _ = writeln!(out, "generators: {}  loads: {}", a.y0.n_generators, a.y0.n_loads());
            cx_matrix_text(&mut out, "Y0", &a.y0.matrix);
            cx_matrix_text(&mut out, "Y", &a.reduced.matrix);
            let _ = writeln!(out, "P:");
            for r in 0..p.n() {
                let row: Vec<String> = p.row(r).iter().map(|&x| fmt_sig(x)).collect();
                let _ = writeln!(out, "  [{}]", row.join(", "));
            }
            let spec: Vec<String> = rep.spectrum.eigenvalues.iter().map(|&x| fmt_sig(x)).collect();
            let _ = writeln!(out, "spectrum: [{}]", spec.join(", "));
            let _ = writeln!(out, "zero mode: {}", fmt_sig(rep.zero_mode_value));
            let _ = writeln!(out, "alpha2: {}", fmt_sig(rep.alpha2));
            let _ = writeln!(out, "verdict: {}", rep.verdict.as_str());
        }
        Format::Json => {
            let coupling: Vec<Value> = (0..p.n())
                .map(|r| Value::Array(p.row(r).iter().map(|&x| r12(x)).collect()))
                .collect();
            let doc = json!({
                "n_generators": a.y0.n_generators,
                "n_loads": a.y0.n_loads(),
                "y0": cx_matrix_json(&a.y0.matrix),
                "reduced": cx_matrix_json(&a.reduced.matrix),
                "coupling": coupling,
                "spectrum": rep.spectrum.eigenvalues.iter().map(|&x| r12(x)).collect::<Vec<_>>(),
                "zero_mode": r12(rep.zero_mode_value),
                "alpha2": r12(rep.alpha2),
                "verdict": rep.verdict.as_str(),
            });
            out = serde_json::to_string_pretty(&doc).expect("report serializes");
            out.push('\n');
        }
        Format::Csv => {
            out.push_str("quantity,i,j,re,im\n");
            cx_matrix_csv(&mut out, "y0", &a.y0.matrix);
            cx_matrix_csv(&mut out, "reduced", &a.reduced.matrix);
            for r in 0..p.n() {
                for (c, &x) in p.row(r).iter().enumerate() {
                    let _ = writeln!(out, "coupling,{r},{c},{},0", fmt_sig(x));
                }
            }
            for (k, &x) in rep.spectrum.eigenvalues.iter().enumerate() {
                let _ = writeln!(out, "eigenvalue,{k},,{},0", fmt_sig(x));
            }
            let _ = writeln!(out, "alpha2,,,{},0", fmt_sig(rep.alpha2));
            let _ = writeln!(out, "verdict,,,{},", rep.verdict.as_str());
        }
    }
    out
}

pub fn analyze_cmd(path: &Path, format: Format, kappa: f64) -> Result<u8, CliError> {
    let g = load_grid(path)?;
    let c = CouplingConstants { kappa, phases: None };
    let a = analyze(&g, &c)?;
    emit(None, &render_analysis(&a, format))?;
    Ok(0)
}

pub fn circulant_cmd(n_max: usize, out: Option<&Path>) -> Result<u8, CliError> {
    let pts = circulant_sweep(n_max).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(out, &sweep_to_csv(&pts))?;
    if out.is_some() {
        let worst = pts.iter().map(|p| p.abs_err()).fold(0.0, f64::max);
        println!("points: {}  max_abs_err: {}", pts.len(), fmt_sig(worst));
    }
    Ok(0)
}

#[derive(Deserialize)]
struct SweepRow {
    n: f64,
    degree: f64,
    alpha2_closed: f64,
}

pub fn fit_cmd(input: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let mut rdr = csv::Reader::from_path(input).map_err(|e| CliError::Parse(format!("{}: {e}", input.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::Parse(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != SWEEP_CSV_HEADER {
        return Err(CliError::Parse(format!("expected header `{SWEEP_CSV_HEADER}`, got `{header}`")));
    }
    let mut pts = Vec::new();
    for row in rdr.deserialize::<SweepRow>() {
        let r = row.map_err(|e| CliError::Parse(e.to_string()))?;
        pts.push((r.n, r.degree, r.alpha2_closed));
    }
    let s = quadratic_fit(&pts).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut text = String::from("term,coefficient\n");
    for (name, c) in ["1", "n", "d", "n^2", "n*d", "d^2"].iter().zip(s.coefficients) {
        let _ = writeln!(text, "{name},{}", fmt_sig(c));
    }
    let _ = writeln!(text, "r2,{}", fmt_sig(s.r2));
    emit(out, &text)?;
    Ok(0)
}

pub fn trees_cmd(n: usize, out: Option<&Path>) -> Result<u8, CliError> {
    let rep = tree_diameter_experiment(n)?;
    if let Some(p) = out {
        emit(Some(p), &rep.records_csv())?;
    }
    println!("trees: {}", rep.instance_count);
    println!("diameter,count,min_alpha2,max_alpha2");
    for (d, lo, hi, count) in rep.by_diameter() {
        println!("{d},{count},{},{}", fmt_sig(lo), fmt_sig(hi));
    }
    println!("violating_pairs: {}", rep.violation_pairs);
    match &rep.verdict {
        ConjectureVerdict::NoCounterexample => {
            println!("verdict: NoCounterexample");
            Ok(0)
        }
        ConjectureVerdict::Counterexamples(list) => {
            println!("verdict: Counterexamples");
            for v in list {
                let (s, l) = (&v.smaller_diameter, &v.larger_diameter);
                println!(
                    "witness: {} (diameter {}, alpha2 {}) vs {} (diameter {}, alpha2 {})",
                    s.code,
                    s.diameter,
                    fmt_sig(s.alpha2),
                    l.code,
                    l.diameter,
                    fmt_sig(l.alpha2)
                );
            }
            Ok(EXIT_COUNTEREXAMPLE)
        }
    }
}

pub fn cycles_cmd(tree: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let rep = cycle_addition_experiment(&load_grid(tree)?)?;
    emit(out, &rep.to_csv())?;
    let summary = format!(
        "tree_alpha2: {}\nadditions: {}\nviolating_pairs: {}\nverdict: {}\n",
        fmt_sig(rep.tree_alpha2),
        rep.findings.len(),
        rep.violations.len(),
        if rep.is_monotone() { "NoCounterexample" } else { "Counterexamples" }
    );
    summary_out(out, &summary);
    Ok(if rep.is_monotone() { 0 } else { EXIT_COUNTEREXAMPLE })
}

pub fn join_cmd(t1: &Path, t2: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let rep = best_join_edge(&load_grid(t1)?, &load_grid(t2)?)?;
    emit(out, &rep.to_csv())?;
    let summary = format!(
        "best_edge: {}-{}\nalpha2: {}\ndiameter: {}\nmin_diameter: {}\ncenters: {}-{}\ncenter_join_wins: {}\nargmax_matches_min_diameter: {}\n",
        rep.best.a,
        rep.best.b,
        fmt_sig(rep.best.alpha2),
        rep.best.diameter,
        rep.min_diameter,
        rep.centers.0,
        rep.centers.1,
        rep.center_join_wins,
        rep.argmax_matches_min_diameter
    );
    summary_out(out, &summary);
    Ok(if rep.argmax_matches_min_diameter { 0 } else { EXIT_COUNTEREXAMPLE })
}

/// Summaries go to stdout when the table went to a file, else to stderr.
fn summary_out(out: Option<&Path>, summary: &str) {
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
}

pub struct SimArgs {
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub pulse_gen: usize,
    pub pulse_mag: f64,
    pub t_on: f64,
    pub t_off: f64,
}

pub fn simulate_cmd(grid: &Path, a: &SimArgs, out: Option<&Path>) -> Result<u8, CliError> {
    let g = load_grid(grid)?;
    let analysis = analyze(&g, &CouplingConstants::default())?;
    let cfg = SimConfig {
        gamma: a.gamma,
        dt: a.dt,
        t_end: a.t_end,
        pulse: Pulse {
            target: a.pulse_gen,
            magnitude: a.pulse_mag,
            t_on: a.t_on,
            t_off: a.t_off,
        },
    };
    let traj = simulate(&analysis.coupling, &cfg)?;
    emit(out, &trajectory_to_csv(&traj))?;
    let ripple = ripple_metric(&traj, cfg.pulse.t_off).map_or("n/a".to_string(), fmt_sig);
    let summary = format!(
        "alpha2: {}\nripple: {ripple}\nresponse: {}\n",
        fmt_sig(analysis.report.alpha2),
        divergence_detect(&traj).as_str()
    );
    summary_out(out, &summary);
    Ok(0)
}

pub fn gen_cmd(kind: Kind, n: usize, k: Option<usize>, b: f64, shunt_b: f64, out: Option<&Path>) -> Result<u8, CliError> {
    let topology = match (kind, k) {
        (Kind::Circulant, Some(k)) => Topology::Circulant { k },
        (Kind::Circulant, None) => return Err(CliError::Usage("--k is required for circulant grids".into())),
        (_, Some(_)) => return Err(CliError::Usage("--k only applies to circulant grids".into())),
        (Kind::Star, None) => Topology::Star,
        (Kind::Path, None) => Topology::Path,
        (Kind::Ring, None) => Topology::Ring,
        (Kind::Complete, None) => Topology::Complete,
    };
    let g = generate_named(topology, n, Cx::new(0.0, b), Cx::new(0.0, shunt_b))?;
    emit(out, &GridFile::from_grid(&g).to_json())?;
    Ok(0)
}
