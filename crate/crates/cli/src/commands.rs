use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use vqls_core::bench::{
    execute_plan, format_float, read_runs_csv, summarize_records, summarize_rows, write_runs_csv, write_summary_csv,
    BenchError, CellKey, ExperimentPlan, SummaryRow, DEFAULT_TOP_K,
};
use vqls_core::cost::{NoiseLevel, DEFAULT_SHOTS};
use vqls_core::optim::{Method, OptimizerConfig};
use vqls_core::problem::{
    classical_solution, instance, parse_problem, AnsatzCircuit, LinearSystemProblem, DEFAULT_DEPTH, INSTANCE_NAMES,
};
use vqls_core::quantum::NoiseParams;

use crate::config::parse_config;

pub const OUT_ENV: &str = "VQLSBENCH_OUT";
const MANIFEST: &str = "manifest.txt";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config or input files.
    Input(String),
    /// Anything that went wrong while computing or writing results.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn runtime(context: impl fmt::Display) -> impl FnOnce(BenchError) -> CliError {
    move |e| CliError::Runtime(format!("{context}: {e}"))
}

fn io_runtime(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> Result<(), BenchError>) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_runtime(path))?);
    fill(&mut w).map_err(runtime(path.display()))?;
    w.flush().map_err(io_runtime(path))
}

pub fn run(config_path: &Path, parallel: Option<usize>) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", config_path.display())))?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let config = parse_config(&text, base).map_err(|e| CliError::Input(format!("{}: {e}", config_path.display())))?;
    let out_dir = std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| config.output_dir.clone());
    let parallel = parallel.unwrap_or(config.parallel);
    let plan = &config.plan;

    let records = execute_plan(plan, parallel).map_err(|e| match e {
        BenchError::Plan(_) | BenchError::TopK { .. } => CliError::Input(e.to_string()),
        other => CliError::Runtime(format!("run failed: {other}")),
    })?;
    let summary = summarize_records(&records, plan.top_k).map_err(runtime("summary"))?;

    fs::create_dir_all(&out_dir).map_err(io_runtime(&out_dir))?;
    write_file(&out_dir.join("runs.csv"), |w| write_runs_csv(&records, w))?;
    write_file(&out_dir.join("summary.csv"), |w| write_summary_csv(&summary, w))?;
    let manifest = out_dir.join(MANIFEST);
    fs::write(&manifest, manifest_text(config_path, &text, plan, records.len())).map_err(io_runtime(&manifest))?;

    print_summary(&summary);
    println!("{} runs written to {}", records.len(), out_dir.display());
    Ok(())
}

fn manifest_text(config_path: &Path, config_text: &str, plan: &ExperimentPlan, records: usize) -> String {
    let mut s = String::new();
    s.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("config = {}\n", config_path.display()));
    s.push_str(&format!("master_seed = {}\n", plan.master_seed));
    s.push_str(&format!("runs_per_cell = {}\n", plan.runs_per_cell));
    s.push_str(&format!("top_k = {}\n", plan.top_k));
    s.push_str(&format!("records = {records}\n"));
    s.push_str("--- config ---\n");
    s.push_str(config_text);
    if !config_text.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// top_k recorded in the manifest next to a runs file, if there is one.
fn manifest_top_k(runs_path: &Path) -> Option<usize> {
    let text = fs::read_to_string(runs_path.parent()?.join(MANIFEST)).ok()?;
    text.lines()
        .take_while(|l| !l.starts_with("---"))
        .find_map(|l| l.strip_prefix("top_k = ")?.trim().parse().ok())
}

fn print_summary(rows: &[SummaryRow]) {
    let width = rows.iter().map(|r| r.cell.to_string().len()).max().unwrap_or(4).max(4);
    println!(
        "{:<width$}  {:>4}  {:>12}  {:>12}  {:>12}",
        "cell", "n", "min", "median", "max"
    );
    for r in rows {
        println!(
            "{:<width$}  {:>4}  {:>12}  {:>12}  {:>12}",
            r.cell.to_string(),
            r.n_selected,
            format_float(r.stats.min),
            format_float(r.stats.median),
            format_float(r.stats.max),
        );
    }
}

pub fn stats(runs_path: &Path, top_k: Option<usize>, out: Option<&Path>) -> Result<(), CliError> {
    let bytes =
        fs::read(runs_path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", runs_path.display())))?;
    let rows = read_runs_csv(bytes.as_slice()).map_err(|e| CliError::Input(format!("{}: {e}", runs_path.display())))?;
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no runs recorded", runs_path.display())));
    }
    let k = match top_k {
        Some(k) => {
            let mut runs: HashMap<&CellKey, Vec<usize>> = HashMap::new();
            for row in &rows {
                let ids = runs.entry(&row.cell).or_default();
                if ids.last() != Some(&row.run_index) {
                    ids.push(row.run_index);
                }
            }
            if let Some((cell, ids)) = runs.iter().filter(|(_, ids)| ids.len() < k).min_by_key(|(c, _)| *c) {
                return Err(CliError::Input(format!(
                    "--top-k {k} exceeds the {} runs of cell {cell}",
                    ids.len()
                )));
            }
            k
        }
        None => manifest_top_k(runs_path).unwrap_or(DEFAULT_TOP_K),
    };
    let summary = summarize_rows(&rows, k).map_err(runtime("summary"))?;
    match out {
        Some(path) => write_file(path, |w| write_summary_csv(&summary, w)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_summary_csv(&summary, &mut lock).map_err(runtime("stdout"))?;
            lock.flush().map_err(|e| CliError::Runtime(format!("stdout: {e}")))
        }
    }
}

pub struct SolveArgs {
    pub problem: String,
    pub optimizer: String,
    pub noise: String,
    pub seed: u64,
    pub shots: u64,
    pub budget: Option<u64>,
    pub depth: usize,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p_readout: Option<f64>,
}

fn load_problem(arg: &str) -> Result<LinearSystemProblem, CliError> {
    if INSTANCE_NAMES.iter().any(|n| n.eq_ignore_ascii_case(arg)) {
        return instance(arg).map_err(|e| CliError::Input(e.to_string()));
    }
    let path = Path::new(arg);
    if !path.is_file() {
        return Err(CliError::Input(format!(
            "unknown problem {arg:?} (built-in: A1, A2, A3, or a problem file path)"
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {arg}: {e}")))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty() && !s.contains([',', '"']))
        .unwrap_or("custom");
    parse_problem(name, &text).map_err(|e| CliError::Input(format!("{arg}: {e}")))
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let problem = load_problem(&args.problem)?;
    let method: Method = args.optimizer.parse().map_err(|e| CliError::Input(format!("{e}")))?;
    let noise: NoiseLevel = args.noise.parse().map_err(|e| CliError::Input(format!("{e}")))?;
    let defaults = NoiseParams::default();
    let params = NoiseParams::new(
        args.p1.unwrap_or(defaults.p1),
        args.p2.unwrap_or(defaults.p2),
        args.p_readout.unwrap_or(defaults.p_readout),
    )
    .map_err(|e| CliError::Input(format!("noise parameters: {e}")))?;

    let solution = classical_solution(&problem)
        .map_err(|e| CliError::Runtime(format!("{}: no classical reference solution: {e}", problem.name())))?;

    let mut plan = ExperimentPlan::new(vec![problem.clone()], vec![method], vec![noise]);
    plan.runs_per_cell = 1;
    plan.top_k = 1;
    plan.master_seed = args.seed;
    plan.shots = args.shots;
    plan.depth = args.depth;
    plan.noise = params;
    plan.optimizer = OptimizerConfig::default();
    if let Some(b) = args.budget {
        plan.budgets.insert(problem.name().to_string(), b);
    }
    let budget = plan.budget_for(&problem);
    let record = execute_plan(&plan, 1)
        .map_err(|e| match e {
            BenchError::Plan(_) | BenchError::TopK { .. } => CliError::Input(e.to_string()),
            other => CliError::Runtime(format!("solve failed: {other}")),
        })?
        .pop()
        .ok_or_else(|| CliError::Runtime("solve produced no run".into()))?;

    let ansatz = AnsatzCircuit::new(problem.n_qubits(), args.depth);
    let phi = ansatz
        .prepare(&record.run.final_theta)
        .map_err(|e| CliError::Runtime(format!("preparing the final state: {e}")))?;
    let fidelity = solution.inner(&phi).norm_sqr().clamp(0.0, 1.0);

    println!("problem      {}", problem.name());
    println!("optimizer    {method}");
    println!("noise        {noise}");
    println!("seed         {}", args.seed);
    println!("parameters   {}", ansatz.param_count());
    println!("final cost   {}", format_float(record.run.final_best_cost));
    println!("units        {} / {budget}", record.run.units_used());
    println!("fidelity     {}", format_float(fidelity));
    println!("termination  {}", record.run.termination);
    Ok(())
}

pub fn list() -> Result<(), CliError> {
    println!("problems:");
    for name in INSTANCE_NAMES {
        let p = instance(name).expect("built-in instance");
        let terms: Vec<String> = p
            .operator()
            .terms()
            .iter()
            .map(|(c, w)| format!("{} {w}", format_float(c.re)))
            .collect();
        let params = AnsatzCircuit::new(p.n_qubits(), DEFAULT_DEPTH).param_count();
        println!(
            "  {name}  qubits {}  parameters {params}  budget {}  A = {}",
            p.n_qubits(),
            p.default_budget(),
            terms.join(" + ")
        );
    }
    println!("optimizers:");
    for m in Method::ALL {
        let kind = if m.uses_gradient() { "gradient" } else { "gradient-free" };
        println!("  {:<12} {kind}", m.name());
    }
    let n = NoiseParams::default();
    println!("noise levels:");
    println!("  exact   exact expectation values");
    println!("  shots   {DEFAULT_SHOTS} shots per expectation term");
    println!(
        "  device  shots plus depolarizing noise (p1 {}, p2 {}, p_readout {})",
        n.p1, n.p2, n.p_readout
    );
    Ok(())
}
