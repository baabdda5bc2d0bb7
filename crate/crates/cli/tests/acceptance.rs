//! End-to-end acceptance checks; prints one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use gridstab::admittance::build_y0;
use gridstab::circulant::circulant_sweep;
use gridstab::coupling::{analyze, gershgorin_classify_uniform, load_transparency_check, CouplingConstants};
use gridstab::experiments::{best_join_edge, cycle_addition_experiment, tree_diameter_experiment};
use gridstab::grid_model::{generate_named, Topology};
use gridstab::instances::{two_generator_line, two_generator_one_load, with_dedicated_loads};
use gridstab::kron::{iterative_reduce, iterative_reduce_in_order, preservation_report, schur_reduce};
use gridstab::numerics::CxMatrix;
use gridstab::swing_sim::{divergence_detect, ripple_metric, simulate, Response, SimConfig};
use gridstab::{Cx, Edge, GridSpec, Node, Verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn j() -> Cx {
    Cx::new(0.0, 1.0)
}

fn default_constants() -> CouplingConstants {
    CouplingConstants::default()
}

fn pipeline_alpha2(g: &GridSpec) -> Result<(f64, Verdict), String> {
    let a = analyze(g, &default_constants()).map_err(|e| e.to_string())?;
    Ok((a.report.alpha2, a.report.verdict))
}

fn two_generator_formula() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0_f64;
    let mut draws = 0;
    while draws < 200 {
        let k12: f64 = rng.gen_range(-2.0..3.0);
        let k13: f64 = rng.gen_range(-3.0..3.0);
        let k23: f64 = rng.gen_range(-3.0..3.0);
        let want = 2.0 * (k12 + k13 * k23 / (k13 + k23));
        // keep the load pivot and the stability value away from zero
        if (k13 + k23).abs() < 0.1 || want.abs() < 1e-3 {
            continue;
        }
        draws += 1;
        let (ka, kb) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let g = two_generator_one_load(ka, kb, k12, k13, k23).map_err(|e| e.to_string())?;
        let (got, _) = pipeline_alpha2(&g)?;
        let rel = (got - want).abs() / want.abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("k=({k12}, {k13}, {k23}): {got} vs {want}"))?;
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("200 draws, worst relative error {worst:.1e}"))
}

fn circulant_closed_form() -> Outcome {
    let start = Instant::now();
    let pts = circulant_sweep(19).map_err(|e| e.to_string())?;
    // odd n in 3..=19 with 1 <= k <= (n-1)/2
    ensure(pts.len() == 45, || format!("{} points", pts.len()))?;
    let worst = pts.iter().map(|p| p.abs_err()).fold(0.0, f64::max);
    ensure(worst <= 1e-9, || format!("max |closed - numeric| = {worst:e}"))?;
    for w in pts.windows(2) {
        if w[0].n == w[1].n {
            ensure(w[1].alpha2_closed > w[0].alpha2_closed, || {
                format!("not increasing in k at n = {}, k = {}", w[1].n, w[1].k)
            })?;
        }
    }
    for p in pts.iter().filter(|p| 2 * p.k + 1 == p.n) {
        let nf = p.n as f64;
        ensure((p.alpha2_closed - nf).abs() <= 1e-9 && (p.alpha2_numeric - nf).abs() <= 1e-9, || {
            format!("complete grid n = {}: {} / {}", p.n, p.alpha2_closed, p.alpha2_numeric)
        })?;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("{} points, max abs error {worst:.1e}", pts.len()))
}

fn stability_regimes() -> Outcome {
    let cases = [
        ((1.0, -0.25, 1.0), 4.0 / 3.0, Verdict::Stable),
        ((1.0, 0.0, 1.0), 2.0, Verdict::Stable),
        ((0.0, -0.25, 1.0), -2.0 / 3.0, Verdict::Unstable),
    ];
    for ((k12, k13, k23), want, verdict) in cases {
        let g = two_generator_one_load(0.0, 0.0, k12, k13, k23).map_err(|e| e.to_string())?;
        let (got, v) = pipeline_alpha2(&g)?;
        ensure((got - want).abs() <= 1e-12 && v == verdict, || {
            format!("k=({k12}, {k13}, {k23}): {got} {v:?}, want {want} {verdict:?}")
        })?;
    }
    Ok("4/3 Stable, 2 Stable, -2/3 Unstable".into())
}

fn load_transparency() -> Outcome {
    let mut worst = 0.0_f64;
    for (topology, n) in [(Topology::Ring, 5), (Topology::Complete, 4)] {
        let core = generate_named(topology, n, -j(), Cx::new(0.0, 0.0)).map_err(|e| e.to_string())?;
        let a_core = schur_reduce(&build_y0(&core).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let rep = load_transparency_check(&a_core).map_err(|e| e.to_string())?;

        // same check through grid construction: Y0 = [[A, jI], [jI, -jI]]
        let g = with_dedicated_loads(&core, -j()).map_err(|e| e.to_string())?;
        let y0 = build_y0(&g).map_err(|e| e.to_string())?;
        let a = y0.matrix.block(0, n, 0, n);
        let y = schur_reduce(&y0).map_err(|e| e.to_string())?;
        let want = a.sub(&CxMatrix::identity(n).scale(-j())).map_err(|e| e.to_string())?;
        let dev = y.matrix.max_abs_diff(&want);
        let c = default_constants();
        let py = gridstab::build_coupling(&y, &c).map_err(|e| e.to_string())?;
        let pa = gridstab::build_coupling(&gridstab::ReducedAdmittance { matrix: a }, &c).map_err(|e| e.to_string())?;
        let identical = py.matrix == pa.matrix;
        ensure(dev <= 1e-12 && identical, || {
            format!("{topology:?}({n}): deviation {dev:e}, coupling identical {identical}")
        })?;
        worst = worst.max(dev).max(rep.max_deviation).max(rep.coupling_deviation);
    }
    Ok(format!("ring(5), complete(4): max deviation {worst:.1e}"))
}

/// Random connected grid with every branch `c·j`, 3..=12 nodes, at least
/// two generators, small positive generator shunts.
fn random_uniform_grid(rng: &mut ChaCha8Rng, c: f64) -> GridSpec {
    let v = rng.gen_range(3..=12);
    let n_gen = rng.gen_range(2..=v);
    let branch = Cx::new(0.0, c);
    let mut nodes: Vec<Node> = (0..n_gen)
        .map(|_| Node::generator(branch * rng.gen_range(0.05..1.0)))
        .collect();
    nodes.extend((n_gen..v).map(|_| Node::load(Cx::new(0.0, 0.0))));
    let mut order: Vec<usize> = (0..v).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..v {
        let parent = order[rng.gen_range(0..i)];
        pairs.push((order[i].min(parent), order[i].max(parent)));
    }
    let chord_p = rng.gen_range(0.0..0.4);
    for a in 0..v {
        for b in (a + 1)..v {
            if !pairs.contains(&(a, b)) && rng.gen_bool(chord_p) {
                pairs.push((a, b));
            }
        }
    }
    let edges = pairs.into_iter().map(|(a, b)| Edge::new(a, b, branch)).collect();
    GridSpec::new(nodes, edges).expect("generated grid is valid")
}

const GRID_SEED: u64 = 0x5eed_0005;

/// The 100 grids of the reduction checks, built with branch value `c·j`.
/// The topology does not depend on `c`.
fn random_grids(c: f64) -> Vec<GridSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED);
    (0..100).map(|_| random_uniform_grid(&mut rng, c)).collect()
}

fn reduction_paths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0105);
    let mut worst = 0.0_f64;
    let mut with_loads = 0;
    for (i, g) in random_grids(-1.0).iter().enumerate() {
        let y0 = build_y0(g).map_err(|e| e.to_string())?;
        with_loads += usize::from(y0.n_loads() > 0);
        let s = schur_reduce(&y0).map_err(|e| e.to_string())?.matrix;
        let scale = s.max_abs().max(1.0);
        let mut compare = |m: &CxMatrix, what: &str| {
            let d = s.max_abs_diff(m) / scale;
            worst = worst.max(d);
            ensure(d <= 1e-9, || format!("grid {i}: {what} differs by {d:e}"))
        };
        compare(&iterative_reduce(&y0).map_err(|e| e.to_string())?.matrix, "iterative")?;
        for _ in 0..3 {
            let mut order: Vec<usize> = (y0.n_generators..y0.size()).collect();
            order.shuffle(&mut rng);
            let m = iterative_reduce_in_order(&y0, &order).map_err(|e| e.to_string())?.matrix;
            compare(&m, "shuffled elimination order")?;
        }
    }
    Ok(format!("100 grids ({with_loads} with loads), max relative difference {worst:.1e}"))
}

fn preservation_and_gershgorin() -> Outcome {
    for c in [-1.0, 1.0] {
        for (i, g) in random_grids(c).iter().enumerate() {
            let y0 = build_y0(g).map_err(|e| e.to_string())?;
            let y = schur_reduce(&y0).map_err(|e| e.to_string())?;
            let rep = preservation_report(&y0, &y, Cx::new(0.0, c)).map_err(|e| e.to_string())?;
            ensure(rep.all_hold(), || format!("c = {c}, grid {i}: {rep:?}"))?;
            let quick = gershgorin_classify_uniform(g, c).map_err(|e| e.to_string())?;
            let (_, full) = pipeline_alpha2(g)?;
            ensure(quick == full, || format!("c = {c}, grid {i}: Gershgorin {quick:?}, eigensolve {full:?}"))?;
        }
    }
    Ok("200 instances (c = -1, +1): five properties hold, verdicts agree".into())
}

fn swing_trend() -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig::default();
    let mut lines = Vec::new();
    let mut ripples = Vec::new();
    let mut responses = Vec::new();
    for alpha in [0.0532, 0.264, 5.3] {
        // inductive susceptance of magnitude alpha/2
        let g = two_generator_line(-alpha / 2.0).map_err(|e| e.to_string())?;
        let a = analyze(&g, &default_constants()).map_err(|e| e.to_string())?;
        let t = simulate(&a.coupling, &cfg).map_err(|e| e.to_string())?;
        let r = ripple_metric(&t, cfg.pulse.t_off).map_err(|e| e.to_string())?;
        let resp = divergence_detect(&t);
        lines.push(format!("alpha2 {alpha}: ripple {r:.4}, {}", resp.as_str()));
        ripples.push(r);
        responses.push(resp);
    }
    let summary = lines.join("; ");
    within(start.elapsed(), 10.0)?;
    ensure(ripples.windows(2).all(|w| w[1] < w[0]), || {
        format!("ripple not strictly decreasing: {summary}")
    })?;
    ensure(responses.iter().all(|&r| r == Response::Decayed), || {
        format!("not all Decayed: {summary}")
    })?;
    Ok(summary)
}

fn tree_experiments() -> Outcome {
    let start = Instant::now();
    let rep = tree_diameter_experiment(7).map_err(|e| e.to_string())?;
    ensure(rep.instance_count == 16807, || format!("{} trees", rep.instance_count))?;
    let max = rep.records.iter().map(|r| r.alpha2).fold(f64::NEG_INFINITY, f64::max);
    let min = rep.records.iter().map(|r| r.alpha2).fold(f64::INFINITY, f64::min);
    let path_min = 2.0 - 2.0 * (PI / 7.0).cos();
    ensure((max - 1.0).abs() < 1e-12, || format!("max alpha2 {max}"))?;
    ensure((min - path_min).abs() < 1e-12, || format!("min alpha2 {min}, path {path_min}"))?;
    // every maximizer is a star, every minimizer a path
    for r in &rep.records {
        let is_max = (r.alpha2 - max).abs() < 1e-9;
        ensure(is_max == (r.diameter == 2), || format!("{} (diameter {}) alpha2 {}", r.code, r.diameter, r.alpha2))?;
        let is_min = (r.alpha2 - min).abs() < 1e-9;
        ensure(is_min == (r.diameter == 6), || format!("{} (diameter {}) alpha2 {}", r.code, r.diameter, r.alpha2))?;
    }

    // path on five nodes: closing the ends (5-cycle) beats every 3-cycle chord
    let inductive = Cx::new(0.0, -1.0);
    let path5 = generate_named(Topology::Path, 5, inductive, Cx::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let cyc = cycle_addition_experiment(&path5).map_err(|e| e.to_string())?;
    let five = cyc.findings.iter().find(|f| f.cycle_length == 5).ok_or("no 5-cycle")?;
    let ring5 = 2.0 - 2.0 * (2.0 * PI / 5.0).cos();
    ensure((five.alpha2 - ring5).abs() < 1e-12, || format!("5-cycle alpha2 {}", five.alpha2))?;
    for f in cyc.findings.iter().filter(|f| f.cycle_length == 3) {
        ensure(five.alpha2 > f.alpha2, || format!("chord {}-{} alpha2 {}", f.a, f.b, f.alpha2))?;
    }
    // 3-cycle chords; independent Laplacian eigensolve values
    let chord = |a, b| cyc.findings.iter().find(|f| (f.a, f.b) == (a, b)).map(|f| f.alpha2);
    ensure((chord(0, 2).unwrap_or(0.0) - 0.5188056959079836).abs() < 1e-12, || "chord 0-2".into())?;
    ensure((chord(1, 3).unwrap_or(0.0) - 0.6972243622680055).abs() < 1e-12, || "chord 1-3".into())?;

    // two 4-node stars: the center-to-center edge wins
    let star4 = generate_named(Topology::Star, 4, inductive, Cx::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let join = best_join_edge(&star4, &star4).map_err(|e| e.to_string())?;
    ensure(join.center_join_wins && join.argmax_matches_min_diameter && join.best.diameter == 3, || {
        format!("{:?}", join.best)
    })?;
    ensure((join.best.alpha2 - 0.35424868893540956).abs() < 1e-12, || format!("join alpha2 {}", join.best.alpha2))?;
    ensure(join.ranking[1..].iter().all(|c| c.alpha2 < join.best.alpha2 - 1e-9), || "tie in join ranking".into())?;

    // exit status: no counterexample on 7 nodes, one on 8
    let bin = env!("CARGO_BIN_EXE_gridstab");
    let code = |n: &str| Command::new(bin).args(["trees", "--n", n]).output().map(|o| o.status.code());
    let (c7, c8) = (code("7").map_err(|e| e.to_string())?, code("8").map_err(|e| e.to_string())?);
    ensure(c7 == Some(0) && c8 == Some(4), || format!("exit status n=7 {c7:?}, n=8 {c8:?}"))?;

    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "n=7 extremes 1 / {min:.6}; 5-cycle {:.4} > 3-cycles; center join {:.4}; exit 0 (n=7) / 4 (n=8)",
        five.alpha2, join.best.alpha2
    ))
}

fn rk4_order() -> Outcome {
    let g = two_generator_one_load(0.0, 0.0, 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let p = analyze(&g, &default_constants()).map_err(|e| e.to_string())?.coupling;
    let final_state = |dt: f64| -> Result<Vec<f64>, String> {
        let cfg = SimConfig { dt, ..SimConfig::default() };
        let t = simulate(&p, &cfg).map_err(|e| e.to_string())?;
        let last = t.times.len() - 1;
        ensure((t.times[last] - cfg.t_end).abs() < 1e-9, || "run ended early".into())?;
        Ok(t.delta[last].iter().chain(&t.omega[last]).copied().collect())
    };
    let reference = final_state(1e-3 / 16.0)?;
    let dts = [4e-3, 2e-3, 1e-3];
    let mut errs = Vec::new();
    for dt in dts {
        let s = final_state(dt)?;
        errs.push(s.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    // least-squares slope of log(err) against log(dt)
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    ensure((slope - 4.0).abs() <= 0.5, || format!("slope {slope:.3}, errors {errs:?}"))?;
    Ok(format!("slope {slope:.3} (errors {:.2e}, {:.2e}, {:.2e})", errs[0], errs[1], errs[2]))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("two-generator pipeline formula", two_generator_formula),
        ("circulant closed form", circulant_closed_form),
        ("two-generator stability regimes", stability_regimes),
        ("load transparency", load_transparency),
        ("reduction path equivalence", reduction_paths),
        ("preservation and Gershgorin", preservation_and_gershgorin),
        ("swing ripple trend", swing_trend),
        ("tree extremes and harness", tree_experiments),
        ("RK4 order", rk4_order),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
