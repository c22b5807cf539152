//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use vqls_core::bench::{
    execute_plan, generate_initializations, summarize_records, write_runs_csv, ExperimentPlan, RunRecord,
};
use vqls_core::cost::{CallKind, CostEvaluator, NoiseBackend, NoiseLevel, DEFAULT_SHOTS};
use vqls_core::optim::{minimize, FnObjective, Method, Objective, ObjectiveError, OptimizerConfig};
use vqls_core::problem::{instance, AnsatzCircuit, LinearCombinationOperator, LinearSystemProblem, DEFAULT_DEPTH};

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn evaluator(problem: LinearSystemProblem, backend: NoiseBackend) -> CostEvaluator {
    let n = problem.n_qubits();
    CostEvaluator::new(problem, AnsatzCircuit::new(n, DEFAULT_DEPTH), backend).unwrap()
}

fn builtin(name: &str) -> CostEvaluator {
    evaluator(instance(name).unwrap(), NoiseBackend::Exact)
}

/// The 100 seeded θ per instance shared by the oracle and bounds checks.
fn oracle_thetas(k: usize, len: usize) -> Vec<Vec<f64>> {
    common::thetas(100, len, 1000 + k as u64)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (k, (name, terms)) in common::INSTANCES.iter().enumerate() {
        let mut ev = builtin(name);
        for theta in oracle_thetas(k, ev.param_count()) {
            let got = ev.evaluate_cost(&theta).unwrap();
            let want = common::local_cost(terms, DEFAULT_DEPTH, &theta);
            worst = worst.max((got - want).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("300 samples, max |C_L - oracle| = {worst:.2e} (tol 1e-9), {elapsed:.2?} (limit 10 s)"),
    )
}

fn bounds() -> Outcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, (name, _)) in common::INSTANCES.iter().enumerate() {
        let mut ev = builtin(name);
        for theta in oracle_thetas(k, ev.param_count()) {
            let c = ev.evaluate_cost(&theta).unwrap();
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    // A = I: Ry(π/2) on every qubit prepares |b⟩ = H⊗H⊗H|000⟩; the CX
    // ladders leave |+++⟩ unchanged and the remaining angles are zero.
    let identity = LinearSystemProblem::new("I3", LinearCombinationOperator::from_real(&[(1.0, "III")]).unwrap());
    let mut ev = evaluator(identity, NoiseBackend::Exact);
    let mut theta = vec![0.0; ev.param_count()];
    theta[..3].fill(FRAC_PI_2);
    let at_solution = ev.evaluate_cost(&theta).unwrap();
    outcome(
        lo >= 0.0 && hi <= 1.0 && at_solution.abs() <= 1e-12,
        format!("C_L in [{lo:.3e}, {hi:.3e}] over 300 samples; C_L at A = I solution = {at_solution:.1e} (tol 1e-12)"),
    )
}

fn gradient_fidelity() -> Outcome {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (k, (name, terms)) in common::INSTANCES.iter().enumerate() {
        let mut ev = builtin(name);
        for theta in common::thetas(20, ev.param_count(), 2000 + k as u64) {
            let g = ev.evaluate_gradient(&theta).unwrap();
            let mut t = theta.clone();
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..theta.len() {
                t[i] = theta[i] + h;
                let fp = common::local_cost(terms, DEFAULT_DEPTH, &t);
                t[i] = theta[i] - h;
                let fm = common::local_cost(terms, DEFAULT_DEPTH, &t);
                t[i] = theta[i];
                let fd = (fp - fm) / (2.0 * h);
                err = err.max((g[i] - fd).abs());
                scale = scale.max(fd.abs());
            }
            worst = worst.max(err / scale);
        }
    }
    outcome(
        worst < 1e-6,
        format!("60 samples, max relative error {worst:.2e} (tol 1e-6)"),
    )
}

/// Counts the calls an optimizer makes, independently of the ledger.
struct Counting<'a> {
    inner: &'a mut CostEvaluator,
    costs: u64,
    gradients: u64,
}

impl Objective for Counting<'_> {
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    fn cost(&mut self, theta: &[f64]) -> Result<f64, ObjectiveError> {
        self.costs += 1;
        Objective::cost(self.inner, theta)
    }

    fn gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        self.gradients += 1;
        Objective::gradient(self.inner, theta)
    }

    fn units(&self) -> u64 {
        Objective::units(&*self.inner)
    }
}

fn ledger_exactness() -> Outcome {
    let mut ev = builtin("A1");
    let theta0 = generate_initializations(5, "A1", 1, ev.param_count()).remove(0);
    let mut counting = Counting {
        inner: &mut ev,
        costs: 0,
        gradients: 0,
    };
    let run = minimize(Method::Bfgs, &mut counting, &theta0, &OptimizerConfig::with_budget(600)).unwrap();
    let (costs, gradients) = (counting.costs, counting.gradients);
    let units = ev.ledger().units();
    let ledger_ok = ev.param_count() == 9
        && units == costs + 18 * gradients
        && units == run.units_used()
        && ev.ledger().count(CallKind::Cost) as u64 == costs
        && ev.ledger().count(CallKind::Gradient) as u64 == gradients;

    let mut plan = ExperimentPlan::new(
        ["A1", "A2", "A3"].iter().map(|n| instance(n).unwrap()).collect(),
        Method::ALL.to_vec(),
        NoiseLevel::ALL.to_vec(),
    );
    plan.runs_per_cell = 1;
    plan.top_k = 1;
    plan.master_seed = 17;
    let records = execute_plan(&plan, threads()).unwrap();
    let over: Vec<String> = records
        .iter()
        .filter(|r| r.run.units_used() > [600, 800, 1000][r.theta0.len() / 3 - 3])
        .map(|r| format!("{} used {}", r.cell(), r.run.units_used()))
        .collect();
    let peak = |name: &str| {
        records
            .iter()
            .filter(|r| r.problem == name)
            .map(|r| r.run.units_used())
            .max()
            .unwrap()
    };
    outcome(
        ledger_ok && over.is_empty() && records.len() == 72,
        format!(
            "BFGS: {costs} cost + {gradients} gradient calls, ledger {units} = {costs} + 18*{gradients}: {ledger_ok}; \
             matrix of {} runs, peak units A1 {} / 600, A2 {} / 800, A3 {} / 1000{}",
            records.len(),
            peak("A1"),
            peak("A2"),
            peak("A3"),
            if over.is_empty() {
                String::new()
            } else {
                format!("; over budget: {}", over.join(", "))
            }
        ),
    )
}

fn shot_statistics() -> Outcome {
    let start = Instant::now();
    let e = 0.3;
    let repeats = 200;
    let mut backend = NoiseBackend::shot_sampling(DEFAULT_SHOTS, 77).unwrap();
    let xs: Vec<f64> = (0..repeats).map(|_| backend.estimate_expectation(e)).collect();
    let mean = xs.iter().sum::<f64>() / repeats as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64).sqrt();
    let sigma = ((1.0 - e * e) / DEFAULT_SHOTS as f64).sqrt();
    let se = sigma / (repeats as f64).sqrt();
    let elapsed = start.elapsed();
    let ratio = sd / sigma;
    outcome(
        (mean - e).abs() <= 5.0 * se && (1.0 / 3.0..=3.0).contains(&ratio) && elapsed < Duration::from_secs(5),
        format!(
            "mean {mean:.5} ({:.2} standard errors from 0.3), sd/expected {ratio:.3}, {elapsed:.2?}",
            (mean - e).abs() / se
        ),
    )
}

fn initialization_sharing() -> Outcome {
    let mut plan = ExperimentPlan::new(
        ["A1", "A2", "A3"].iter().map(|n| instance(n).unwrap()).collect(),
        Method::ALL.to_vec(),
        NoiseLevel::ALL.to_vec(),
    );
    plan.runs_per_cell = 4;
    plan.top_k = 4;
    plan.master_seed = 99;
    for name in ["A1", "A2", "A3"] {
        plan.budgets.insert(name.into(), 12);
    }
    let records = execute_plan(&plan, threads()).unwrap();
    let mut mismatches = 0;
    for p in &plan.problems {
        let p_count = AnsatzCircuit::new(p.n_qubits(), plan.depth).param_count();
        let expected = generate_initializations(plan.master_seed, p.name(), plan.runs_per_cell, p_count);
        let cells: Vec<&RunRecord> = records.iter().filter(|r| r.problem == p.name()).collect();
        for r in &cells {
            let same = r.theta0.len() == p_count
                && r.theta0
                    .iter()
                    .zip(&expected[r.run_index])
                    .all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0 && records.len() == 3 * 8 * 3 * 4,
        format!(
            "{} records over 3 problems x 8 optimizers x 3 noise levels, {mismatches} theta0 mismatches",
            records.len()
        ),
    )
}

/// f(x) = ½ Σ sᵢ (xᵢ − tᵢ)² on nine parameters, with sᵢ = 0.5 + 0.05i and
/// tᵢ = 0.3i − 1; the start sits 0.25 from the minimizer in every
/// coordinate, with alternating signs.
fn sanity_quadratic() -> (FnObjective, Vec<f64>) {
    const P: usize = 9;
    let s = |i: usize| 0.5 + 0.05 * i as f64;
    let t = |i: usize| 0.3 * i as f64 - 1.0;
    let obj = FnObjective::new(P, move |x: &[f64]| {
        x.iter().enumerate().map(|(i, v)| 0.5 * s(i) * (v - t(i)).powi(2)).sum()
    })
    .with_gradient(move |x: &[f64]| x.iter().enumerate().map(|(i, v)| s(i) * (v - t(i))).collect());
    let x0 = (0..P).map(|i| t(i) + if i % 2 == 0 { 0.25 } else { -0.25 }).collect();
    (obj, x0)
}

fn optimizer_sanity() -> Outcome {
    let seeds = 20;
    let mut worst = Vec::new();
    let mut pass = true;
    for m in Method::ALL {
        let mut max_f = 0.0f64;
        for seed in 0..seeds {
            let (mut obj, x0) = sanity_quadratic();
            let run = minimize(m, &mut obj, &x0, &OptimizerConfig::with_budget(600).seed(seed)).unwrap();
            pass &= run.units_used() <= 600 && obj.ledger().units() == run.units_used();
            max_f = max_f.max(run.final_best_cost);
        }
        pass &= max_f < 1e-2;
        worst.push(format!("{m} {max_f:.1e}"));
    }
    outcome(
        pass,
        format!("worst f over {seeds} seeds (tol 1e-2): {}", worst.join(", ")),
    )
}

fn median(plan: &ExperimentPlan, records: &[RunRecord], m: Method) -> f64 {
    let rows = summarize_records(records, plan.top_k).unwrap();
    rows.iter().find(|r| r.cell.optimizer == m).unwrap().stats.median
}

fn trend_plan(optimizers: Vec<Method>, noise: NoiseLevel) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(vec![instance("A1").unwrap()], optimizers, vec![noise]);
    plan.runs_per_cell = 20;
    plan.top_k = 10;
    plan.master_seed = 2021;
    plan
}

fn trend_shots() -> Outcome {
    let plan = trend_plan(vec![Method::Bfgs, Method::NelderMead], NoiseLevel::Shots);
    let records = execute_plan(&plan, threads()).unwrap();
    let (bfgs, nm) = (
        median(&plan, &records, Method::Bfgs),
        median(&plan, &records, Method::NelderMead),
    );
    outcome(
        bfgs <= nm,
        format!("A1 shots, top 10 of 20: median BFGS {bfgs:.4e} <= Nelder-Mead {nm:.4e}"),
    )
}

fn trend_device() -> Outcome {
    let plan = trend_plan(vec![Method::Spsa, Method::Cg], NoiseLevel::Device);
    let records = execute_plan(&plan, threads()).unwrap();
    let (spsa, cg) = (
        median(&plan, &records, Method::Spsa),
        median(&plan, &records, Method::Cg),
    );
    outcome(
        spsa <= cg,
        format!("A1 device, top 10 of 20: median SPSA {spsa:.4e} <= CG {cg:.4e}"),
    )
}

fn determinism() -> Outcome {
    let mut plan = ExperimentPlan::new(
        vec![instance("A1").unwrap(), instance("A2").unwrap()],
        Method::ALL.to_vec(),
        NoiseLevel::ALL.to_vec(),
    );
    plan.runs_per_cell = 2;
    plan.top_k = 2;
    plan.master_seed = 4242;
    plan.budgets.insert("A1".into(), 150);
    plan.budgets.insert("A2".into(), 120);
    let csv = |parallel: usize| {
        let mut bytes = Vec::new();
        write_runs_csv(&execute_plan(&plan, parallel).unwrap(), &mut bytes).unwrap();
        bytes
    };
    let first = csv(1);
    let second = csv(threads().max(2));
    outcome(
        first == second && !first.is_empty(),
        format!(
            "runs.csv of {} bytes, byte-identical across reruns: {}",
            first.len(),
            first == second
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("cost-oracle equivalence", oracle_equivalence),
        ("cost bounds", bounds),
        ("gradient fidelity", gradient_fidelity),
        ("ledger exactness and budget audit", ledger_exactness),
        ("shot-noise statistics", shot_statistics),
        ("initialization sharing", initialization_sharing),
        ("optimizer sanity suite", optimizer_sanity),
        ("trend (a): shots, BFGS vs Nelder-Mead", trend_shots),
        ("trend (b): device, SPSA vs CG", trend_device),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} [{:.1?}]", o.detail, start.elapsed());
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
