//! Search harnesses for the tree conjectures.
//!
//! Each harness evaluates stability values through the full analysis
//! pipeline with unit inductive branches and reports what it finds; the
//! conjectures are under test, never assumed.

use std::collections::BTreeMap;
use std::thread;

use thiserror::Error;

use crate::coupling::{alpha2_of, AnalysisError};
use crate::grid_model::{tree_from_pruefer, Edge, GridError, GridSpec, PrueferCode};
use crate::numerics::Cx;

/// Largest node count accepted for exhaustive labeled-tree sweeps.
pub const MAX_TREE_NODES: usize = 8;

/// Agreement required when a reported violation is recomputed.
pub const RECOMPUTE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("exhaustive sweeps are limited to n <= {MAX_TREE_NODES}, got {0}")]
    NTooLarge(usize),
    #[error("need at least {min} nodes, got {n}")]
    NTooSmall { n: usize, min: usize },
    #[error("input grid is not a tree")]
    NotATree,
    #[error("input tree contains load nodes")]
    HasLoads,
    #[error("recomputation disagrees for {0}")]
    Unreproducible(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn unit_inductive() -> Cx {
    Cx::new(0.0, -1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeRecord {
    pub code: PrueferCode,
    pub diameter: usize,
    pub alpha2: f64,
}

/// A pair of trees where the smaller diameter does not give the larger
/// stability value.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub smaller_diameter: TreeRecord,
    pub larger_diameter: TreeRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConjectureVerdict {
    NoCounterexample,
    /// One witness per violating diameter pair (the widest gap).
    Counterexamples(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub n: usize,
    pub instance_count: usize,
    /// Number of violating tree pairs over all diameter pairs.
    pub violation_pairs: u64,
    pub verdict: ConjectureVerdict,
    pub records: Vec<TreeRecord>,
}

impl ConjectureReport {
    pub fn found_counterexample(&self) -> bool {
        matches!(self.verdict, ConjectureVerdict::Counterexamples(_))
    }

    /// `(diameter, min α₂, max α₂, count)` per diameter, ascending.
    pub fn by_diameter(&self) -> Vec<(usize, f64, f64, usize)> {
        let mut groups: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
        for r in &self.records {
            let e = groups
                .entry(r.diameter)
                .or_insert((f64::INFINITY, f64::NEG_INFINITY, 0));
            e.0 = e.0.min(r.alpha2);
            e.1 = e.1.max(r.alpha2);
            e.2 += 1;
        }
        groups.into_iter().map(|(d, (lo, hi, c))| (d, lo, hi, c)).collect()
    }

    pub fn records_csv(&self) -> String {
        let mut s = String::from("code,diameter,alpha2\n");
        for r in &self.records {
            s.push_str(&format!("{},{},{}\n", r.code, r.diameter, crate::fmt_sig(r.alpha2)));
        }
        s
    }
}

fn tree_record(code: PrueferCode) -> Result<TreeRecord, ExperimentError> {
    let g = tree_from_pruefer(&code, unit_inductive())?;
    Ok(TreeRecord {
        diameter: g.diameter()?,
        alpha2: alpha2_of(&g)?,
        code,
    })
}

fn evaluate_all(n: usize) -> Result<Vec<TreeRecord>, ExperimentError> {
    let codes: Vec<PrueferCode> = PrueferCode::all(n).collect();
    let workers = thread::available_parallelism().map_or(1, |p| p.get()).min(16);
    let chunk = codes.len().div_ceil(workers).max(1);
    thread::scope(|scope| {
        let handles: Vec<_> = codes
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().cloned().map(tree_record).collect::<Result<Vec<_>, _>>()))
            .collect();
        let mut out = Vec::with_capacity(codes.len());
        for h in handles {
            out.extend(h.join().expect("tree worker panicked")?);
        }
        Ok(out)
    })
}

/// Tests, over every labeled tree on `n` nodes, that a strictly smaller
/// diameter always gives a strictly larger stability value.
pub fn tree_diameter_experiment(n: usize) -> Result<ConjectureReport, ExperimentError> {
    if n > MAX_TREE_NODES {
        return Err(ExperimentError::NTooLarge(n));
    }
    if n < 3 {
        return Err(ExperimentError::NTooSmall { n, min: 3 });
    }
    let records = evaluate_all(n)?;

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry(r.diameter).or_default().push(i);
    }
    for idx in groups.values_mut() {
        idx.sort_by(|&a, &b| records[a].alpha2.total_cmp(&records[b].alpha2));
    }

    let mut violation_pairs = 0u64;
    let mut witnesses = Vec::new();
    let diameters: Vec<usize> = groups.keys().copied().collect();
    for (x, d1) in diameters.iter().enumerate() {
        let small = &groups[d1];
        for d2 in &diameters[x + 1..] {
            let large = &groups[d2];
            // pairs with alpha(small) <= alpha(large)
            let count: u64 = large
                .iter()
                .map(|&b| small.partition_point(|&a| records[a].alpha2 <= records[b].alpha2) as u64)
                .sum();
            if count == 0 {
                continue;
            }
            violation_pairs += count;
            let lo = &records[small[0]];
            let hi = &records[*large.last().expect("non-empty group")];
            witnesses.push(verify_violation(lo, hi)?);
        }
    }

    let verdict = if witnesses.is_empty() {
        ConjectureVerdict::NoCounterexample
    } else {
        ConjectureVerdict::Counterexamples(witnesses)
    };
    Ok(ConjectureReport {
        n,
        instance_count: records.len(),
        violation_pairs,
        verdict,
        records,
    })
}

fn verify_violation(small: &TreeRecord, large: &TreeRecord) -> Result<Violation, ExperimentError> {
    let fresh_small = tree_record(small.code.clone())?;
    let fresh_large = tree_record(large.code.clone())?;
    for (old, new) in [(small, &fresh_small), (large, &fresh_large)] {
        if (old.alpha2 - new.alpha2).abs() > RECOMPUTE_TOL || old.diameter != new.diameter {
            return Err(ExperimentError::Unreproducible(old.code.to_string()));
        }
    }
    if !(fresh_small.diameter < fresh_large.diameter && fresh_small.alpha2 <= fresh_large.alpha2) {
        return Err(ExperimentError::Unreproducible(format!(
            "{} vs {}",
            small.code, large.code
        )));
    }
    Ok(Violation {
        smaller_diameter: fresh_small,
        larger_diameter: fresh_large,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleFinding {
    pub a: usize,
    pub b: usize,
    pub cycle_length: usize,
    pub alpha2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub tree_alpha2: f64,
    /// One entry per absent edge, ordered by cycle length then endpoints.
    pub findings: Vec<CycleFinding>,
    /// `(longer, shorter)` pairs where the longer cycle is not more stable.
    pub violations: Vec<(CycleFinding, CycleFinding)>,
}

impl CycleReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,cycle_length,alpha2\n");
        for f in &self.findings {
            s.push_str(&format!("{},{},{},{}\n", f.a, f.b, f.cycle_length, crate::fmt_sig(f.alpha2)));
        }
        s
    }
}

fn check_tree(g: &GridSpec) -> Result<Cx, ExperimentError> {
    if g.n_loads() != 0 {
        return Err(ExperimentError::HasLoads);
    }
    if !g.is_tree() {
        return Err(ExperimentError::NotATree);
    }
    Ok(g.edges().first().map_or(unit_inductive(), |e| e.admittance))
}

/// Adds every absent edge to `tree` in turn and checks that longer cycles
/// give larger stability values.
pub fn cycle_addition_experiment(tree: &GridSpec) -> Result<CycleReport, ExperimentError> {
    let admittance = check_tree(tree)?;
    let n = tree.node_count();
    if n < 3 {
        return Err(ExperimentError::NTooSmall { n, min: 3 });
    }
    let mut findings = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if tree.is_adjacent(a, b) {
                continue;
            }
            let cycle_length = tree.cycle_length_of_edge(a, b)?;
            let alpha2 = alpha2_of(&tree.with_edge(a, b, admittance)?)?;
            findings.push(CycleFinding {
                a,
                b,
                cycle_length,
                alpha2,
            });
        }
    }
    findings.sort_by_key(|f| (f.cycle_length, f.a, f.b));
    let mut violations = Vec::new();
    for long in &findings {
        for short in &findings {
            if long.cycle_length > short.cycle_length && long.alpha2 <= short.alpha2 {
                violations.push((long.clone(), short.clone()));
            }
        }
    }
    Ok(CycleReport {
        tree_alpha2: alpha2_of(tree)?,
        findings,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinCandidate {
    /// Node of the first tree.
    pub a: usize,
    /// Node of the second tree, in its own numbering.
    pub b: usize,
    pub alpha2: f64,
    pub diameter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinReport {
    pub best: JoinCandidate,
    /// All candidates, best stability value first.
    pub ranking: Vec<JoinCandidate>,
    pub min_diameter: usize,
    /// The stability maximizer also minimizes the diameter.
    pub argmax_matches_min_diameter: bool,
    /// Lowest-index minimum-eccentricity node of each tree.
    pub centers: (usize, usize),
    pub center_join_wins: bool,
}

impl JoinReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,diameter,alpha2\n");
        for c in &self.ranking {
            s.push_str(&format!("{},{},{},{}\n", c.a, c.b, c.diameter, crate::fmt_sig(c.alpha2)));
        }
        s
    }
}

/// Disjoint union of `t1` and `t2` plus the edge `a`–`b` (`b` numbered in `t2`).
pub fn join_trees(t1: &GridSpec, t2: &GridSpec, a: usize, b: usize, admittance: Cx) -> Result<GridSpec, GridError> {
    let off = t1.node_count();
    let mut nodes = t1.nodes().to_vec();
    nodes.extend_from_slice(t2.nodes());
    let mut edges = t1.edges().to_vec();
    edges.extend(t2.edges().iter().map(|e| Edge::new(e.a + off, e.b + off, e.admittance)));
    edges.push(Edge::new(a, b + off, admittance));
    GridSpec::new(nodes, edges)
}

/// Ranks every single edge joining `t1` to `t2` by the stability value of
/// the joined tree.
pub fn best_join_edge(t1: &GridSpec, t2: &GridSpec) -> Result<JoinReport, ExperimentError> {
    let adm1 = check_tree(t1)?;
    let adm2 = check_tree(t2)?;
    let admittance = if t1.edges().is_empty() { adm2 } else { adm1 };
    let mut ranking = Vec::new();
    for a in 0..t1.node_count() {
        for b in 0..t2.node_count() {
            let g = join_trees(t1, t2, a, b, admittance)?;
            ranking.push(JoinCandidate {
                a,
                b,
                alpha2: alpha2_of(&g)?,
                diameter: g.diameter()?,
            });
        }
    }
    ranking.sort_by(|x, y| y.alpha2.total_cmp(&x.alpha2).then((x.a, x.b).cmp(&(y.a, y.b))));
    let best = ranking[0].clone();
    let min_diameter = ranking.iter().map(|c| c.diameter).min().unwrap_or(0);
    let centers = (t1.center()?, t2.center()?);
    Ok(JoinReport {
        argmax_matches_min_diameter: best.diameter == min_diameter,
        center_join_wins: (best.a, best.b) == centers,
        best,
        ranking,
        min_diameter,
        centers,
    })
}
