use proptest::prelude::*;
use vqls_core::bench::*;
use vqls_core::cost::NoiseLevel;
use vqls_core::optim::{Method, OptimizerRun, Termination, TracePoint};
use vqls_core::problem::instance;

fn plan(optimizers: Vec<Method>, noise: Vec<NoiseLevel>, runs: usize, seed: u64) -> ExperimentPlan {
    let mut p = ExperimentPlan::new(vec![instance("A1").unwrap()], optimizers, noise);
    p.runs_per_cell = runs;
    p.top_k = runs;
    p.master_seed = seed;
    p
}

#[test]
fn one_record_per_run_in_canonical_order() {
    let mut p = plan(vec![Method::Bfgs, Method::Spsa], vec![NoiseLevel::Exact], 3, 1);
    p.budgets.insert("A1".into(), 60);
    let records = execute_plan(&p, 4).unwrap();
    assert_eq!(records.len(), 6);
    let keys: Vec<(Method, usize)> = records.iter().map(|r| (r.optimizer, r.run_index)).collect();
    assert_eq!(
        keys,
        vec![
            (Method::Bfgs, 0),
            (Method::Bfgs, 1),
            (Method::Bfgs, 2),
            (Method::Spsa, 0),
            (Method::Spsa, 1),
            (Method::Spsa, 2)
        ]
    );
}

#[test]
fn execution_is_deterministic_and_thread_count_independent() {
    let mut p = plan(vec![Method::Spsa, Method::Adam], NoiseLevel::ALL.to_vec(), 3, 9);
    p.budgets.insert("A1".into(), 80);
    let a = execute_plan(&p, 1).unwrap();
    let b = execute_plan(&p, 4).unwrap();
    assert_eq!(a, b);
    let mut x = Vec::new();
    let mut y = Vec::new();
    write_runs_csv(&a, &mut x).unwrap();
    write_runs_csv(&b, &mut y).unwrap();
    assert_eq!(x, y);
}

#[test]
fn initial_points_shared_across_cells() {
    let mut p = plan(vec![Method::Spsa, Method::NelderMead], NoiseLevel::ALL.to_vec(), 4, 3);
    p.budgets.insert("A1".into(), 10);
    let records = execute_plan(&p, 2).unwrap();
    let expected = generate_initializations(3, "A1", 4, 9);
    for r in &records {
        let same = r
            .theta0
            .iter()
            .zip(&expected[r.run_index])
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same, "{} run {}", r.cell(), r.run_index);
    }
}

#[test]
fn full_matrix_respects_budgets() {
    let mut p = ExperimentPlan::new(
        vec![instance("A1").unwrap(), instance("A2").unwrap()],
        Method::ALL.to_vec(),
        NoiseLevel::ALL.to_vec(),
    );
    p.runs_per_cell = 2;
    p.top_k = 2;
    p.budgets.insert("A1".into(), 120);
    p.budgets.insert("A2".into(), 90);
    let records = execute_plan(&p, 8).unwrap();
    assert_eq!(records.len(), 2 * 8 * 3 * 2);
    for r in &records {
        let budget = p.budgets[&r.problem];
        assert!(r.run.units_used() <= budget, "{} used {}", r.cell(), r.run.units_used());
        assert!(!r.run.trace.is_empty());
        if r.run.termination == Termination::BudgetExhausted {
            // The next call would not have fit.
            let p_count = r.theta0.len() as u64;
            assert!(r.run.units_used() + 2 * p_count > budget, "{}", r.cell());
        }
    }
}

#[test]
fn summary_round_trips_through_runs_csv() {
    let mut p = plan(
        vec![Method::Spsa, Method::Cg],
        vec![NoiseLevel::Shots, NoiseLevel::Exact],
        5,
        21,
    );
    p.budgets.insert("A1".into(), 70);
    let records = execute_plan(&p, 3).unwrap();
    let mut runs = Vec::new();
    write_runs_csv(&records, &mut runs).unwrap();
    assert!(!runs.contains(&b'\r'));
    let rows = read_runs_csv(runs.as_slice()).unwrap();
    for k in [1, 3, 5] {
        let direct = summarize_records(&records, k).unwrap();
        let reread = summarize_rows(&rows, k).unwrap();
        assert_eq!(direct, reread);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_summary_csv(&direct, &mut a).unwrap();
        write_summary_csv(&reread, &mut b).unwrap();
        assert_eq!(a, b);
    }
    let text = String::from_utf8(runs).unwrap();
    assert!(text.starts_with("problem,optimizer,noise,run_index,units,best_cost\n"));
}

#[test]
fn bfgs_solves_a1_exactly_in_some_run() {
    let p = plan(vec![Method::Bfgs], vec![NoiseLevel::Exact], 20, 0);
    let records = execute_plan(&p, 8).unwrap();
    let best = records
        .iter()
        .map(|r| r.final_best_cost())
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-2, "best {best}");
    assert!(records.iter().all(|r| r.run.units_used() <= 600));
}

fn record(run_index: usize, trace: Vec<(u64, f64)>) -> RunRecord {
    let trace: Vec<TracePoint> = trace
        .into_iter()
        .map(|(units, best_cost)| TracePoint { units, best_cost })
        .collect();
    RunRecord {
        problem: "A1".into(),
        optimizer: Method::Spsa,
        noise: NoiseLevel::Exact,
        run_index,
        theta0: vec![],
        run: OptimizerRun {
            final_best_cost: trace.last().unwrap().best_cost,
            trace,
            final_theta: vec![],
            termination: Termination::BudgetExhausted,
        },
    }
}

/// Random monotone traces within a budget of 50 units.
fn arb_records() -> impl Strategy<Value = Vec<RunRecord>> {
    proptest::collection::vec(proptest::collection::vec((1u64..5, 0.0..0.3f64), 1..10), 1..12).prop_map(|runs| {
        runs.into_iter()
            .enumerate()
            .map(|(i, steps)| {
                let mut units = 0;
                let mut best = 1.0;
                let trace = steps
                    .into_iter()
                    .map(|(du, drop)| {
                        units += du;
                        best *= 1.0 - drop;
                        (units, best)
                    })
                    .collect();
                record(i, trace)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn statistics_ignore_record_order(records in arb_records(), k_frac in 0.0..1.0f64, shuffle in any::<u64>()) {
        let k = 1 + ((records.len() - 1) as f64 * k_frac) as usize;
        let refs: Vec<&RunRecord> = records.iter().collect();
        let mut shuffled = refs.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (shuffle.wrapping_mul(i as u64 + 7) >> 3) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let a = boxplot_stats(&select_top_k(&refs, k).unwrap()).unwrap();
        let b = boxplot_stats(&select_top_k(&shuffled, k).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.min <= a.q1 && a.q1 <= a.median && a.median <= a.q3 && a.q3 <= a.max);
    }

    #[test]
    fn convergence_curve_shape(records in arb_records(), k_frac in 0.0..1.0f64) {
        let k = 1 + ((records.len() - 1) as f64 * k_frac) as usize;
        let refs: Vec<&RunRecord> = records.iter().collect();
        let chosen = select_top_k(&refs, k).unwrap();
        let curve = average_convergence(&chosen, 50).unwrap();
        prop_assert_eq!(curve.values.len(), 50);
        for w in curve.values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15);
        }
        let mean = chosen.iter().map(|r| r.final_best_cost()).sum::<f64>() / k as f64;
        prop_assert!((curve.values[49] - mean).abs() < 1e-12);
    }
}
