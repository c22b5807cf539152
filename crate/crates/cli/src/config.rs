//! Benchmark configuration files.
//!
//! The format is line based: `[section]` headers, `key = value` pairs and
//! `#` comments. Lists are comma separated. See the README for the full
//! list of sections and keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vqls_core::bench::{BenchError, ExperimentPlan, DEFAULT_RUNS, DEFAULT_TOP_K};
use vqls_core::cost::NoiseLevel;
use vqls_core::optim::{Method, OptimizerConfig};
use vqls_core::problem::{instance, parse_problem, LinearSystemProblem, INSTANCE_NAMES};
use vqls_core::quantum::NoiseParams;

pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// A configuration error, anchored to a line when one is to blame.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// A parsed configuration: the plan plus where and how to run it.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub plan: ExperimentPlan,
    pub output_dir: PathBuf,
    pub parallel: usize,
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

type Section = BTreeMap<String, Entry>;

const SECTIONS: [&str; 11] = [
    "plan",
    "budgets",
    "noise",
    "ansatz",
    "output",
    "problems",
    "spsa",
    "nelder-mead",
    "powell",
    "gradient",
    "adam",
];

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line_no, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::at(
                    line_no,
                    format!("unknown section [{name}] (known: {})", SECTIONS.join(", ")),
                ));
            }
            if sections.contains_key(&name) {
                return Err(ConfigError::at(line_no, format!("section [{name}] appears twice")));
            }
            sections.insert(name.clone(), Section::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::at(line_no, "expected `key = value` or `[section]`"));
        };
        let Some(section) = &current else {
            return Err(ConfigError::at(line_no, "key outside of any section"));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::at(line_no, "empty key"));
        }
        let entries = sections.get_mut(section).expect("section was inserted");
        if entries.contains_key(key) {
            return Err(ConfigError::at(
                line_no,
                format!("duplicate key {key:?} in [{section}]"),
            ));
        }
        entries.insert(
            key.to_string(),
            Entry {
                line: line_no,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(sections)
}

/// Typed access to one section; reports unknown keys at the end.
struct Reader<'a> {
    name: &'a str,
    entries: Section,
}

impl<'a> Reader<'a> {
    fn new(sections: &mut BTreeMap<String, Section>, name: &'a str) -> Self {
        Self {
            name,
            entries: sections.remove(name).unwrap_or_default(),
        }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn parse<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<(T, usize)>, ConfigError> {
        let Some(e) = self.take(key) else { return Ok(None) };
        let v = e
            .value
            .parse()
            .map_err(|_| ConfigError::at(e.line, format!("{key}: expected {what}, got {:?}", e.value)))?;
        Ok(Some((v, e.line)))
    }

    fn positive_int<T: FromStr + PartialOrd + Default>(&mut self, key: &str, slot: &mut T) -> Result<(), ConfigError> {
        if let Some((v, line)) = self.parse::<T>(key, "a positive integer")? {
            if v <= T::default() {
                return Err(ConfigError::at(line, format!("{key} must be positive")));
            }
            *slot = v;
        }
        Ok(())
    }

    fn positive_float(&mut self, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
        if let Some((v, line)) = self.parse::<f64>(key, "a number")? {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::at(line, format!("{key} must be a positive finite number")));
            }
            *slot = v;
        }
        Ok(())
    }

    fn probability(&mut self, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
        if let Some((v, line)) = self.parse::<f64>(key, "a number")? {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::at(line, format!("{key} must lie in [0, 1]")));
            }
            *slot = v;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            Some((key, e)) => Err(ConfigError::at(
                e.line,
                format!("unknown key {key:?} in [{}]", self.name),
            )),
            None => Ok(()),
        }
    }
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Parses a configuration. `base` is the directory that relative problem
/// file paths are resolved against.
pub fn parse_config(text: &str, base: &Path) -> Result<BenchConfig, ConfigError> {
    let mut sections = split_sections(text)?;

    let mut custom: BTreeMap<String, LinearSystemProblem> = BTreeMap::new();
    let mut problems_section = Reader::new(&mut sections, "problems");
    for (name, e) in std::mem::take(&mut problems_section.entries) {
        if INSTANCE_NAMES.iter().any(|b| b.eq_ignore_ascii_case(&name)) {
            return Err(ConfigError::at(e.line, format!("{name} is a built-in instance name")));
        }
        let path = base.join(&e.value);
        let body = std::fs::read_to_string(&path)
            .map_err(|err| ConfigError::at(e.line, format!("cannot read {}: {err}", path.display())))?;
        let problem = parse_problem(&name, &body)
            .map_err(|err| ConfigError::at(e.line, format!("problem file {}: {err}", path.display())))?;
        custom.insert(name, problem);
    }

    let mut plan_section = Reader::new(&mut sections, "plan");
    let required = |r: &mut Reader<'_>, key: &str| {
        r.take(key)
            .ok_or_else(|| ConfigError::general(format!("[plan] is missing required key {key:?}")))
    };

    let e = required(&mut plan_section, "problems")?;
    let mut problems = Vec::new();
    for name in list(&e.value) {
        let problem = if let Some(p) = custom.get(name) {
            p.clone()
        } else {
            instance(name).map_err(|_| {
                ConfigError::at(
                    e.line,
                    format!("unknown problem {name:?} (built-in: A1, A2, A3, or a name from [problems])"),
                )
            })?
        };
        if problems
            .iter()
            .any(|p: &LinearSystemProblem| p.name() == problem.name())
        {
            return Err(ConfigError::at(e.line, format!("problem {name} listed twice")));
        }
        problems.push(problem);
    }
    if problems.is_empty() {
        return Err(ConfigError::at(e.line, "no problems listed"));
    }

    let e = required(&mut plan_section, "optimizers")?;
    let mut optimizers = Vec::new();
    if e.value.trim().eq_ignore_ascii_case("all") {
        optimizers.extend(Method::ALL);
    } else {
        for name in list(&e.value) {
            let m: Method = name.parse().map_err(|err| ConfigError::at(e.line, format!("{err}")))?;
            if optimizers.contains(&m) {
                return Err(ConfigError::at(e.line, format!("optimizer {m} listed twice")));
            }
            optimizers.push(m);
        }
    }
    if optimizers.is_empty() {
        return Err(ConfigError::at(e.line, "no optimizers listed"));
    }

    let e = required(&mut plan_section, "noise")?;
    let mut noise_levels = Vec::new();
    if e.value.trim().eq_ignore_ascii_case("all") {
        noise_levels.extend(NoiseLevel::ALL);
    } else {
        for name in list(&e.value) {
            let n: NoiseLevel = name.parse().map_err(|err| ConfigError::at(e.line, format!("{err}")))?;
            if noise_levels.contains(&n) {
                return Err(ConfigError::at(e.line, format!("noise level {n} listed twice")));
            }
            noise_levels.push(n);
        }
    }
    if noise_levels.is_empty() {
        return Err(ConfigError::at(e.line, "no noise levels listed"));
    }

    let mut plan = ExperimentPlan::new(problems, optimizers, noise_levels);
    plan.runs_per_cell = DEFAULT_RUNS;
    plan_section.positive_int("runs", &mut plan.runs_per_cell)?;
    plan.top_k = DEFAULT_TOP_K.min(plan.runs_per_cell);
    if let Some((k, line)) = plan_section.parse::<usize>("top_k", "a positive integer")? {
        if k == 0 {
            return Err(ConfigError::at(line, "top_k must be positive"));
        }
        if k > plan.runs_per_cell {
            return Err(ConfigError::at(
                line,
                format!("top_k = {k} exceeds runs = {}", plan.runs_per_cell),
            ));
        }
        plan.top_k = k;
    }
    if let Some((seed, _)) = plan_section.parse::<u64>("seed", "a non-negative integer")? {
        plan.master_seed = seed;
    }
    plan_section.positive_int("shots", &mut plan.shots)?;
    plan_section.finish()?;

    let mut budgets = Reader::new(&mut sections, "budgets");
    for (name, e) in std::mem::take(&mut budgets.entries) {
        let Some(problem) = plan.problems.iter().find(|p| p.name().eq_ignore_ascii_case(&name)) else {
            return Err(ConfigError::at(
                e.line,
                format!("budget for {name}, which is not in the plan"),
            ));
        };
        let units: u64 = e
            .value
            .parse()
            .ok()
            .filter(|&u| u > 0)
            .ok_or_else(|| ConfigError::at(e.line, format!("budget for {name} must be a positive integer")))?;
        plan.budgets.insert(problem.name().to_string(), units);
    }

    let mut noise = Reader::new(&mut sections, "noise");
    let mut np = NoiseParams::default();
    noise.probability("p1", &mut np.p1)?;
    noise.probability("p2", &mut np.p2)?;
    noise.probability("p_readout", &mut np.p_readout)?;
    noise.finish()?;
    plan.noise = np;

    let mut ansatz = Reader::new(&mut sections, "ansatz");
    if let Some((depth, _)) = ansatz.parse::<usize>("depth", "a non-negative integer")? {
        plan.depth = depth;
    }
    ansatz.finish()?;

    plan.optimizer = optimizer_config(&mut sections)?;

    let mut output = Reader::new(&mut sections, "output");
    let output_dir = output
        .take("dir")
        .map(|e| PathBuf::from(e.value))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let mut parallel = 1;
    output.positive_int("parallel", &mut parallel)?;
    output.finish()?;

    plan.validate().map_err(|err| match err {
        BenchError::Plan(m) => ConfigError::general(m),
        other => ConfigError::general(other.to_string()),
    })?;

    Ok(BenchConfig {
        plan,
        output_dir,
        parallel,
    })
}

fn optimizer_config(sections: &mut BTreeMap<String, Section>) -> Result<OptimizerConfig, ConfigError> {
    let mut cfg = OptimizerConfig::default();

    let mut r = Reader::new(sections, "spsa");
    r.positive_float("a", &mut cfg.spsa.a)?;
    r.positive_float("c", &mut cfg.spsa.c)?;
    r.positive_float("alpha", &mut cfg.spsa.alpha)?;
    r.positive_float("gamma", &mut cfg.spsa.gamma)?;
    r.positive_float("stability_fraction", &mut cfg.spsa.stability_fraction)?;
    r.finish()?;

    let mut r = Reader::new(sections, "nelder-mead");
    r.positive_float("reflection", &mut cfg.nelder_mead.reflection)?;
    r.positive_float("expansion", &mut cfg.nelder_mead.expansion)?;
    r.positive_float("contraction", &mut cfg.nelder_mead.contraction)?;
    r.positive_float("shrink", &mut cfg.nelder_mead.shrink)?;
    r.positive_float("initial_step", &mut cfg.nelder_mead.initial_step)?;
    r.positive_float("fatol", &mut cfg.nelder_mead.fatol)?;
    r.finish()?;

    let mut r = Reader::new(sections, "powell");
    r.positive_float("line_tol", &mut cfg.powell.line_tol)?;
    r.positive_int("max_line_evals", &mut cfg.powell.max_line_evals)?;
    r.positive_float("ftol", &mut cfg.powell.ftol)?;
    r.finish()?;

    let mut r = Reader::new(sections, "gradient");
    r.positive_float("gtol", &mut cfg.gradient.gtol)?;
    r.positive_float("c1", &mut cfg.gradient.c1)?;
    r.positive_float("c2_quasi_newton", &mut cfg.gradient.c2_quasi_newton)?;
    r.positive_float("c2_cg", &mut cfg.gradient.c2_cg)?;
    r.positive_int("max_line_trials", &mut cfg.gradient.max_line_trials)?;
    r.positive_int("lbfgs_memory", &mut cfg.gradient.lbfgs_memory)?;
    r.finish()?;

    let mut r = Reader::new(sections, "adam");
    r.positive_float("lr", &mut cfg.adam.lr)?;
    r.probability("beta1", &mut cfg.adam.beta1)?;
    r.probability("beta2", &mut cfg.adam.beta2)?;
    r.positive_float("eps", &mut cfg.adam.eps)?;
    r.finish()?;

    Ok(cfg)
}
