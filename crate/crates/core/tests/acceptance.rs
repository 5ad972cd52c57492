//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use fracspread::cascade::{
    estimate_spread, exact_spread_small, run_cascade_realized, spread_of_set, CascadeModel, InfluenceVector,
    Realization, ThresholdVector,
};
use fracspread::graph::{assign_weights, random_dag, DirectedGraph, NodeId, WeightModel};
use fracspread::harness::{pointwise_gain, run_experiment, write_csv, Algorithm, ExperimentConfig, GraphSource, ResultRow, SyntheticGraph};
use fracspread::optimize::{dag_single_node_spread, greedy_fractional, BudgetedProblem, Estimator, GreedyMode};
use fracspread::reductions::{
    amplify_instance, make_cycle_gap, make_path_gap, reduce_fractional_to_integral, reduce_independent_set,
    reduce_max_coverage, GridStep,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Check = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, Check); 10] = [
        (1, "path gap", 1, path_gap),
        (2, "cycle gap formula", 30, cycle_gap),
        (3, "activator coupling", 120, coupling),
        (4, "grid submodularity and monotonicity", 120, submodularity),
        (5, "greedy quality", 120, greedy_quality),
        (6, "discretization loss", 300, discretization_loss),
        (7, "dag single-node spread", 120, dag_dp),
        (8, "hardness instances", 120, hardness),
        (9, "fractional vs integral sweep", 900, sweep),
        (10, "sweep determinism", 900, determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {:.1}s, limit {limit}s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        let (verdict, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{verdict} [{id:>2}] {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    }
    if failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fmt_err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Random digraph on `n` nodes: each ordered pair is an arc with probability 1/2,
/// and each node's in-weights are scaled to a random total below one.
fn random_linear_graph(rng: &mut ChaCha8Rng, n: usize) -> DirectedGraph {
    let mut arcs = Vec::new();
    for v in 0..n {
        let sources: Vec<usize> = (0..n).filter(|&u| u != v && rng.gen_bool(0.5)).collect();
        let raw: Vec<f64> = sources.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let scale = rng.gen_range(0.3..1.0) / total.max(1.0);
        for (&u, w) in sources.iter().zip(raw) {
            arcs.push((u as NodeId, v as NodeId, w * scale));
        }
    }
    DirectedGraph::from_arcs(n, arcs).expect("valid arcs")
}

/// Every vector in `{0..=steps}^n`, as unit counts.
fn grid_points(n: usize, steps: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=steps).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

fn to_vector(units: &[u32], grid: GridStep) -> InfluenceVector {
    InfluenceVector::new(units.iter().map(|&k| grid.value(k)).collect()).expect("grid values are in [0,1]")
}

fn path_gap() -> Result<String, String> {
    for n in [4usize, 10, 50] {
        let gap = make_path_gap(n).map_err(fmt_err)?;
        let model = CascadeModel::linear(gap.graph.clone()).map_err(fmt_err)?;
        let draw = Realization::fixed(gap.thresholds.clone());
        ensure((gap.witness.budget_used() - 1.0).abs() < 1e-12, || {
            format!("n={n}: witness spends {}", gap.witness.budget_used())
        })?;
        let frac = run_cascade_realized(&model, &[], &gap.witness, &draw).map_err(fmt_err)?;
        ensure(frac.spread == n as f64, || format!("n={n}: witness activates {}", frac.spread))?;
        let zero = InfluenceVector::zeros(n);
        let mut best = 0.0f64;
        for v in 0..n as NodeId {
            best = best.max(run_cascade_realized(&model, &[v], &zero, &draw).map_err(fmt_err)?.spread);
        }
        ensure(best == 1.0, || format!("n={n}: best single seed reaches {best}"))?;
    }
    Ok("fractional spread n, integral spread 1 for n in {4, 10, 50}".into())
}

fn cycle_gap() -> Result<String, String> {
    let g = make_cycle_gap(4, 2.0).map_err(fmt_err)?;
    let model = CascadeModel::linear(g).map_err(fmt_err)?;
    let x = InfluenceVector::uniform(4, 0.5).map_err(fmt_err)?;
    let est = estimate_spread(&model, &x, 1_000_000, 0xC1C1E).map_err(fmt_err)?;
    let expected = 4.0 * (1.0 - 0.5f64.powi(4));
    let z = (est.mean - expected) / est.stderr;
    ensure(z.abs() <= 3.0, || format!("n=4: {} ± {} vs {expected}", est.mean, est.stderr))?;

    let g = make_cycle_gap(3, 1.5).map_err(fmt_err)?;
    let model = CascadeModel::linear(g).map_err(fmt_err)?;
    let exact = exact_spread_small(&model, &InfluenceVector::uniform(3, 0.5).map_err(fmt_err)?).map_err(fmt_err)?;
    ensure((exact - 2.625).abs() <= 1e-9, || format!("n=3: exact {exact} vs 2.625"))?;
    Ok(format!(
        "n=4: {:.5} ± {:.5} vs 3.75 (z = {z:.2}); n=3 exact {exact}",
        est.mean, est.stderr
    ))
}

fn coupling() -> Result<String, String> {
    const REPLICATES: u64 = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runs = 0u64;
    for instance in 0..100u64 {
        let n = rng.gen_range(1..=4);
        let g = random_linear_graph(&mut rng, n);
        let grid = GridStep::new(if instance % 2 == 0 { 2 } else { 3 }).map_err(fmt_err)?;
        let base = CascadeModel::linear(g.clone()).map_err(fmt_err)?;
        let reduced = reduce_fractional_to_integral(&g, grid).map_err(fmt_err)?;
        let zero = InfluenceVector::zeros(reduced.model().node_count());
        let allocations: Vec<(InfluenceVector, Vec<NodeId>)> = grid_points(n, grid.steps())
            .iter()
            .map(|units| {
                let x = to_vector(units, grid);
                let seeds = reduced.map_allocation(&x).expect("on grid");
                (x, seeds)
            })
            .collect();
        for rep in 0..REPLICATES {
            let draw = Realization::sample(reduced.model(), instance, rep);
            let shared =
                Realization::fixed(ThresholdVector::fixed(draw.thresholds.values()[..n].to_vec()).map_err(fmt_err)?);
            for (x, seeds) in &allocations {
                let frac = run_cascade_realized(&base, &[], x, &shared).map_err(fmt_err)?;
                let int = run_cascade_realized(reduced.model(), seeds, &zero, &draw).map_err(fmt_err)?;
                // Stage i of the integral run (seeds at stage 0) against stage i of the fractional run.
                let stages = frac.stage_trace.len().max(int.stage_trace.len());
                for stage in 0..=stages {
                    let restricted: Vec<NodeId> =
                        int.active_after(stage).into_iter().filter(|&v| (v as usize) < n).collect();
                    ensure(restricted == frac.active_after(stage), || {
                        format!("instance {instance}, replicate {rep}, x = {:?}, stage {stage}", x.values())
                    })?;
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} paired runs, all stagewise identical on V"))
}

/// Exact spread at every grid point, indexed in `grid_points` order.
fn grid_spreads(model: &CascadeModel, n: usize, grid: GridStep) -> Result<Vec<f64>, String> {
    grid_points(n, grid.steps())
        .iter()
        .map(|units| exact_spread_small(model, &to_vector(units, grid)).map_err(fmt_err))
        .collect()
}

fn index_of(units: &[u32], steps: u32) -> usize {
    units.iter().fold(0, |acc, &k| acc * (steps as usize + 1) + k as usize)
}

fn submodularity() -> Result<String, String> {
    let grid = GridStep::new(2).map_err(fmt_err)?;
    let steps = grid.steps();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0u64;
    for instance in 0..50 {
        let n = rng.gen_range(1..=5);
        let g = random_linear_graph(&mut rng, n);
        let model = CascadeModel::linear(g).map_err(fmt_err)?;
        let sigma = grid_spreads(&model, n, grid)?;
        let points = grid_points(n, steps);
        let gain = |units: &[u32], v: usize| {
            let mut up = units.to_vec();
            up[v] += 1;
            sigma[index_of(&up, steps)] - sigma[index_of(units, steps)]
        };
        for b in &points {
            for v in (0..n).filter(|&v| b[v] < steps) {
                let gb = gain(b, v);
                ensure(gb >= -1e-9, || format!("instance {instance}: not monotone at {b:?} along {v}: {gb}"))?;
                for a in points.iter().filter(|a| a.iter().zip(b).all(|(x, y)| x <= y)) {
                    let ga = gain(a, v);
                    ensure(ga >= gb - 1e-9, || {
                        format!("instance {instance}: gain along {v} is {ga} at {a:?} but {gb} at {b:?}")
                    })?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} diminishing-return comparisons, no violations"))
}

/// `(n, K)` for the brute-forced greedy instances.
fn greedy_instances() -> Vec<(DirectedGraph, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..30)
        .map(|i| {
            let n = 1 + i % 6;
            let budget: f64 = if (i / 6) % 2 == 0 { 1.0 } else { 2.0 };
            (random_linear_graph(&mut rng, n), budget.min(n as f64))
        })
        .collect()
}

/// Best exact spread over grid allocations with at most `budget` in total.
fn grid_optimum(model: &CascadeModel, n: usize, grid: GridStep, budget: f64) -> Result<f64, String> {
    let cap = grid.count_in(budget).ok_or("budget off grid")?;
    let mut best = 0.0f64;
    for units in grid_points(n, grid.steps()) {
        if units.iter().map(|&k| k as u64).sum::<u64>() <= cap {
            best = best.max(exact_spread_small(model, &to_vector(&units, grid)).map_err(fmt_err)?);
        }
    }
    Ok(best)
}

/// Unit vectors in `{0..=steps}^n` summing to exactly `total`.
fn compositions(n: usize, steps: u32, total: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=steps.min(total) {
        for mut rest in compositions(n - 1, steps, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn greedy_quality() -> Result<String, String> {
    let grid = GridStep::new(2).map_err(fmt_err)?;
    let ratio = 1.0 - (-1.0f64).exp();
    let mut worst = f64::INFINITY;
    for (i, (g, budget)) in greedy_instances().into_iter().enumerate() {
        let n = g.node_count();
        let model = CascadeModel::linear(g).map_err(fmt_err)?;
        let opt = grid_optimum(&model, n, grid, budget)?;
        let problem = BudgetedProblem::new(model.clone(), budget, grid, Estimator::Exact).map_err(fmt_err)?;
        let result = greedy_fractional(&problem, GreedyMode::Lazy).map_err(fmt_err)?;
        let got = exact_spread_small(&model, &result.x).map_err(fmt_err)?;
        ensure(got >= ratio * opt - 1e-9, || format!("instance {i}: greedy {got} < (1-1/e)·{opt}"))?;
        if opt > 0.0 {
            worst = worst.min(got / opt);
        }
    }
    Ok(format!("30 instances, worst greedy/OPT = {worst:.4}"))
}

fn discretization_loss() -> Result<String, String> {
    let coarse = GridStep::new(2).map_err(fmt_err)?;
    let fine = GridStep::new(20).map_err(fmt_err)?;
    let mut binding = 0;
    let mut vacuous = 0;
    let mut worst = f64::INFINITY;
    for (i, (g, budget)) in greedy_instances().into_iter().enumerate() {
        let n = g.node_count();
        let factor = 1.0 - coarse.delta() * n as f64 / budget;
        if factor <= 0.0 {
            // Spread is nonnegative, so the bound holds without the fine optimum.
            vacuous += 1;
            continue;
        }
        let model = CascadeModel::linear(g).map_err(fmt_err)?;
        let opt_coarse = grid_optimum(&model, n, coarse, budget)?;
        // Spread is monotone, so the fine optimum spends the whole budget.
        let total = fine.count_in(budget).ok_or("budget off grid")? as u32;
        let mut opt_fine = 0.0f64;
        for units in compositions(n, fine.steps(), total) {
            opt_fine = opt_fine.max(exact_spread_small(&model, &to_vector(&units, fine)).map_err(fmt_err)?);
        }
        ensure(opt_coarse >= factor * opt_fine - 1e-9, || {
            format!("instance {i}: OPT(1/2) = {opt_coarse} < {factor}·OPT(1/20) = {}", factor * opt_fine)
        })?;
        binding += 1;
        worst = worst.min(opt_coarse / opt_fine);
    }
    ensure(binding > 0, || "no instance has a positive bound factor".into())?;
    Ok(format!(
        "{binding} instances with a positive factor (min OPT(1/2)/OPT(1/20) = {worst:.4}), {vacuous} with factor <= 0"
    ))
}

fn dag_dp() -> Result<String, String> {
    let mut worst_exact = 0.0f64;
    for seed in 0..100u64 {
        let n = 1 + (seed % 8) as usize;
        let g = assign_weights(&random_dag(n, 3, seed), WeightModel::WeightedCascade, seed).map_err(fmt_err)?;
        let model = CascadeModel::linear(g.clone()).map_err(fmt_err)?;
        for v in g.nodes() {
            let dp = dag_single_node_spread(&g, v).map_err(fmt_err)?;
            let exact = exact_spread_small(&model, &InfluenceVector::indicator(n, &[v]).map_err(fmt_err)?)
                .map_err(fmt_err)?;
            ensure((dp - exact).abs() <= 1e-9, || format!("dag {seed}, node {v}: dp {dp} vs exact {exact}"))?;
            worst_exact = worst_exact.max((dp - exact).abs());
        }
    }
    let mut worst_z = 0.0f64;
    for seed in 0..10u64 {
        let g = assign_weights(&random_dag(200, 3, 1000 + seed), WeightModel::WeightedCascade, seed).map_err(fmt_err)?;
        let model = CascadeModel::linear(g.clone()).map_err(fmt_err)?;
        let spreads: Vec<f64> = g.nodes().map(|v| dag_single_node_spread(&g, v)).collect::<Result<_, _>>().map_err(fmt_err)?;
        let top = (0..200).max_by(|&a, &b| spreads[a].total_cmp(&spreads[b])).unwrap() as NodeId;
        for v in [0, top] {
            let est = spread_of_set(&model, &[v], 20_000, 77 + seed).map_err(fmt_err)?;
            let dp = spreads[v as usize];
            let z = if est.stderr > 0.0 { (est.mean - dp).abs() / est.stderr } else { (est.mean - dp).abs() * f64::INFINITY };
            ensure(z.is_nan() || z <= 4.0, || format!("dag n=200 #{seed}, node {v}: dp {dp} vs {} ± {}", est.mean, est.stderr))?;
            if z.is_finite() {
                worst_z = worst_z.max(z);
            }
        }
    }
    Ok(format!("max |dp - exact| = {worst_exact:.1e}; n=200 max |z| = {worst_z:.2}"))
}

fn subsets(items: &[NodeId]) -> impl Iterator<Item = Vec<NodeId>> + '_ {
    (0u32..1 << items.len())
        .map(move |mask| (0..items.len()).filter(|&i| mask >> i & 1 == 1).map(|i| items[i]).collect())
}

fn hardness() -> Result<String, String> {
    // Independent set: every simple graph on at most five nodes, every seed set.
    let mut graphs = 0;
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let inst = reduce_independent_set(n, &edges, 1).map_err(fmt_err)?;
            for s in subsets(&inst.layers[0]) {
                let inside = edges
                    .iter()
                    .filter(|(u, v)| s.contains(&(*u as NodeId)) && s.contains(&(*v as NodeId)))
                    .count();
                let expected = (n * s.len() - inside) as f64;
                let got = inst.spread(&s).map_err(fmt_err)?;
                ensure(got == expected, || format!("IS n={n}, edges {edges:?}, S={s:?}: {got} vs {expected}"))?;
            }
            graphs += 1;
        }
    }

    // Max coverage: random set systems, every W; with OR-trees only the bound is pinned.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for system in 0..20 {
        let m = rng.gen_range(1..=5);
        let universe = rng.gen_range(1..=6);
        let copies = rng.gen_range(1..=3);
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..universe).filter(|_| rng.gen_bool(0.4)).collect())
            .collect();
        let or_tree = system % 2 == 1;
        let inst = reduce_max_coverage(&sets, universe, 1, copies, or_tree).map_err(fmt_err)?;
        let gates = inst.graph().node_count() - m - universe * copies;
        let max_in = inst.graph().nodes().map(|v| inst.graph().in_degree(v)).max().unwrap_or(0);
        ensure(!or_tree || max_in <= 2, || format!("system {system}: triggering set of size {max_in}"))?;
        for w in subsets(&inst.layers[0]) {
            let mut covered: Vec<usize> = w.iter().flat_map(|&j| sets[j as usize].iter().copied()).collect();
            covered.sort_unstable();
            covered.dedup();
            let expected = (w.len() + copies * covered.len()) as f64;
            let got = inst.spread(&w).map_err(fmt_err)?;
            let ok = if or_tree { got >= expected && got <= expected + gates as f64 } else { got == expected };
            ensure(ok, || format!("max coverage {sets:?}, W={w:?}: {got} vs {expected}"))?;
        }
    }

    // Amplification: yes-instances clear T + sinks, no-instances stay below T.
    let (mut yes, mut no) = (0, 0);
    for i in 0..10 {
        let n = 4 + i % 2;
        let k = 2 + (i / 2) % 2;
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        let inst = reduce_independent_set(n, &edges, k).map_err(fmt_err)?;
        let sinks = 100;
        let amplified = amplify_instance(&inst, inst.target, sinks).map_err(fmt_err)?;
        let mut best = 0.0f64;
        let mut has_independent_set = false;
        for s in subsets(&inst.layers[0]).filter(|s| s.len() == k) {
            best = best.max(amplified.spread(&s).map_err(fmt_err)?);
            has_independent_set |= !edges
                .iter()
                .any(|(u, v)| s.contains(&(*u as NodeId)) && s.contains(&(*v as NodeId)));
        }
        if has_independent_set {
            yes += 1;
            ensure(best >= inst.target + sinks as f64, || format!("yes-instance {i}: best {best}"))?;
        } else {
            no += 1;
            ensure(best < inst.target, || format!("no-instance {i}: best {best} >= {}", inst.target))?;
        }
    }
    ensure(yes > 0 && no > 0, || format!("amplification saw {yes} yes and {no} no instances"))?;
    Ok(format!("{graphs} IS graphs, 20 set systems, amplification {yes} yes / {no} no"))
}

const SWEEP_GRAPHS: [(&str, SyntheticGraph); 3] = [
    (
        "pa-1000",
        SyntheticGraph::PreferentialAttachment {
            nodes: 1000,
            edges_per_node: 2,
        },
    ),
    (
        "dag-1000",
        SyntheticGraph::RandomDag {
            nodes: 1000,
            max_parents: 3,
        },
    ),
    ("grid-30x30", SyntheticGraph::Grid { rows: 30, cols: 30 }),
];

fn sweep_rows() -> Result<Vec<ResultRow>, String> {
    let mut rows = Vec::new();
    for (name, kind) in SWEEP_GRAPHS {
        let mut cfg = ExperimentConfig::new(name, GraphSource::Synthetic(kind));
        cfg.weights = WeightModel::WeightedCascade;
        cfg.algorithms = Algorithm::HEURISTICS.to_vec();
        cfg.budgets = vec![1.0, 5.0, 10.0, 20.0, 50.0];
        cfg.replicates = 2000;
        cfg.master_seed = 2016;
        cfg.record_wallclock = false;
        rows.extend(run_experiment(&cfg).map_err(fmt_err)?);
    }
    Ok(rows)
}

fn sweep() -> Result<String, String> {
    let rows = sweep_rows()?;
    let table = pointwise_gain(&rows).map_err(fmt_err)?;
    let mut violations = Vec::new();
    for g in &table.rows {
        let best = |fractional: bool| {
            rows.iter()
                .filter(|r| r.dataset == g.dataset && r.budget == g.budget)
                .filter(|r| r.algorithm.parse::<Algorithm>().is_ok_and(|a| a.is_fractional() == fractional))
                .max_by(|a, b| a.mean_spread.total_cmp(&b.mean_spread))
                .expect("both sides present")
        };
        let (f, i) = (best(true), best(false));
        let slack = 4.0 * (f.stderr.powi(2) + i.stderr.powi(2)).sqrt();
        if f.mean_spread < i.mean_spread - slack {
            violations.push(format!(
                "{} at B={}: {} {:.2} < {} {:.2} - {slack:.2}",
                g.dataset, g.budget, f.algorithm, f.mean_spread, i.algorithm, i.mean_spread
            ));
        }
    }
    let per_graph: Vec<String> = SWEEP_GRAPHS
        .iter()
        .map(|(name, _)| {
            let gains: Vec<f64> = table.rows.iter().filter(|r| r.dataset == *name).map(|r| r.gain).collect();
            format!("{name} {:+.1}%", 100.0 * gains.iter().sum::<f64>() / gains.len() as f64)
        })
        .collect();
    let summary = format!(
        "mean gain {:+.1}%, median {:+.1}% ({})",
        100.0 * table.mean,
        100.0 * table.median,
        per_graph.join(", ")
    );
    if table.mean <= 0.0 {
        violations.push("mean gain is not positive".into());
    }
    if violations.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", violations.join("; ")))
    }
}

fn determinism() -> Result<String, String> {
    let mut first = Vec::new();
    write_csv(&sweep_rows()?, &mut first).map_err(fmt_err)?;
    let mut second = Vec::new();
    write_csv(&sweep_rows()?, &mut second).map_err(fmt_err)?;
    ensure(first == second, || "CSV output differs between runs".into())?;
    Ok(format!("{} identical bytes", first.len()))
}
