//! Eight classical optimizers behind one budgeted minimization interface.
//!
//! Every optimizer talks to its objective through [`Budgeted`], which
//! refuses any call that would push the ledger past the budget, records the
//! best-so-far trace at every ledger increment, and turns non-finite values
//! into failures. Optimizers signal the end of a run by returning a
//! [`Halt`] through `?`.

mod adam;
mod bfgs;
mod cg;
mod lbfgs;
mod line_search;
mod nelder_mead;
mod powell;
mod spsa;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cost::{gradient_units, CostError, EvaluationLedger};

pub use adam::{AdamConfig, AdamState};
pub use line_search::{line_search_wolfe, LineSearchError, LineSearchParams, LineStep};
pub use nelder_mead::NelderMeadConfig;
pub use powell::PowellConfig;
pub use spsa::SpsaConfig;

/// Error raised by an objective handle.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct ObjectiveError(pub String);

impl From<CostError> for ObjectiveError {
    fn from(e: CostError) -> Self {
        ObjectiveError(e.to_string())
    }
}

/// A function to minimize, with resource accounting.
///
/// Calling `cost` charges one unit and `gradient` two units per parameter;
/// `units` reports the running total.
pub trait Objective {
    fn param_count(&self) -> usize;
    fn cost(&mut self, theta: &[f64]) -> Result<f64, ObjectiveError>;
    fn gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>, ObjectiveError>;
    fn units(&self) -> u64;

    fn has_gradient(&self) -> bool {
        true
    }
}

type CostFn = Box<dyn FnMut(&[f64]) -> f64 + Send>;
type GradFn = Box<dyn FnMut(&[f64]) -> Vec<f64> + Send>;

/// Classical objective from closures, charged like the quantum one.
pub struct FnObjective {
    param_count: usize,
    cost: CostFn,
    gradient: Option<GradFn>,
    ledger: EvaluationLedger,
}

impl FnObjective {
    pub fn new(param_count: usize, cost: impl FnMut(&[f64]) -> f64 + Send + 'static) -> Self {
        Self {
            param_count,
            cost: Box::new(cost),
            gradient: None,
            ledger: EvaluationLedger::new(),
        }
    }

    pub fn with_gradient(mut self, gradient: impl FnMut(&[f64]) -> Vec<f64> + Send + 'static) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    pub fn ledger(&self) -> &EvaluationLedger {
        &self.ledger
    }
}

impl Objective for FnObjective {
    fn param_count(&self) -> usize {
        self.param_count
    }

    fn cost(&mut self, theta: &[f64]) -> Result<f64, ObjectiveError> {
        self.ledger.charge_cost();
        Ok((self.cost)(theta))
    }

    fn gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        let g = self
            .gradient
            .as_mut()
            .ok_or_else(|| ObjectiveError("objective has no gradient".into()))?;
        self.ledger.charge_gradient(self.param_count);
        Ok(g(theta))
    }

    fn units(&self) -> u64 {
        self.ledger.units()
    }

    fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Spsa,
    NelderMead,
    Powell,
    Bfgs,
    LBfgs,
    Cg,
    Adam,
    AmsGrad,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Spsa,
        Method::NelderMead,
        Method::Powell,
        Method::Bfgs,
        Method::LBfgs,
        Method::Cg,
        Method::Adam,
        Method::AmsGrad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spsa => "spsa",
            Method::NelderMead => "nelder-mead",
            Method::Powell => "powell",
            Method::Bfgs => "bfgs",
            Method::LBfgs => "l-bfgs",
            Method::Cg => "cg",
            Method::Adam => "adam",
            Method::AmsGrad => "amsgrad",
        }
    }

    pub fn uses_gradient(self) -> bool {
        !matches!(self, Method::Spsa | Method::NelderMead | Method::Powell)
    }

    pub fn supported_names() -> String {
        Self::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = OptimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == key || m.name().replace('-', "") == key.replace(['-', '_'], ""))
            .ok_or_else(|| OptimError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("unknown optimizer {0:?} (supported: {names})", names = Method::supported_names())]
    UnknownMethod(String),
    #[error("initial point has length {got}, objective expects {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("{0} needs a gradient but the objective has none")]
    GradientUnavailable(Method),
    #[error("budget must be positive")]
    ZeroBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    BudgetExhausted,
    Converged,
    InternalFailure(String),
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::BudgetExhausted => f.write_str("budget exhausted"),
            Termination::Converged => f.write_str("converged"),
            Termination::InternalFailure(r) => write!(f, "failed: {r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub units: u64,
    pub best_cost: f64,
}

/// Outcome of one minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerRun {
    pub trace: Vec<TracePoint>,
    /// Point with the lowest observed cost (θ₀ if nothing was observed).
    pub final_theta: Vec<f64>,
    /// Last trace value; NaN when no cost was ever observed.
    pub final_best_cost: f64,
    pub termination: Termination,
}

impl OptimizerRun {
    pub fn units_used(&self) -> u64 {
        self.trace.last().map_or(0, |p| p.units)
    }
}

/// Gradient-method settings shared by BFGS, L-BFGS and CG.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientConfig {
    /// Converged when the gradient ∞-norm drops below this.
    pub gtol: f64,
    pub c1: f64,
    /// Curvature constant for BFGS and L-BFGS.
    pub c2_quasi_newton: f64,
    pub c2_cg: f64,
    pub max_line_trials: usize,
    pub lbfgs_memory: usize,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            gtol: 1e-6,
            c1: 1e-4,
            c2_quasi_newton: 0.9,
            c2_cg: 0.4,
            max_line_trials: 10,
            lbfgs_memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Maximum ledger units a run may consume.
    pub budget: u64,
    /// Seed for the stochastic methods' internal randomness.
    pub seed: u64,
    pub spsa: SpsaConfig,
    pub nelder_mead: NelderMeadConfig,
    pub powell: PowellConfig,
    pub gradient: GradientConfig,
    pub adam: AdamConfig,
}

impl OptimizerConfig {
    pub fn with_budget(budget: u64) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            budget: 600,
            seed: 0,
            spsa: SpsaConfig::default(),
            nelder_mead: NelderMeadConfig::default(),
            powell: PowellConfig::default(),
            gradient: GradientConfig::default(),
            adam: AdamConfig::default(),
        }
    }
}

/// Why an optimizer loop stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum Halt {
    /// The next call would have exceeded the budget.
    Budget,
    Failure(String),
}

/// Budget-enforcing, trace-recording view of an objective.
pub struct Budgeted<'a> {
    objective: &'a mut dyn Objective,
    budget: u64,
    trace: Vec<TracePoint>,
    best: Option<(f64, Vec<f64>)>,
}

impl<'a> Budgeted<'a> {
    pub fn new(objective: &'a mut dyn Objective, budget: u64) -> Self {
        Self {
            objective,
            budget,
            trace: Vec::new(),
            best: None,
        }
    }

    pub fn param_count(&self) -> usize {
        self.objective.param_count()
    }

    pub fn units(&self) -> u64 {
        self.objective.units()
    }

    pub fn gradient_units(&self) -> u64 {
        gradient_units(self.param_count())
    }

    /// Whether `units` more can be spent.
    pub fn affords(&self, units: u64) -> bool {
        self.units() + units <= self.budget
    }

    pub fn best(&self) -> Option<(f64, &[f64])> {
        self.best.as_ref().map(|(f, x)| (*f, x.as_slice()))
    }

    pub fn cost(&mut self, theta: &[f64]) -> Result<f64, Halt> {
        if !self.affords(1) {
            return Err(Halt::Budget);
        }
        let f = self.objective.cost(theta).map_err(|e| Halt::Failure(e.0))?;
        if !f.is_finite() {
            return Err(Halt::Failure(format!("objective returned non-finite cost {f}")));
        }
        if self.best.as_ref().is_none_or(|(b, _)| f < *b) {
            self.best = Some((f, theta.to_vec()));
        }
        self.record();
        Ok(f)
    }

    pub fn gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>, Halt> {
        if !self.affords(self.gradient_units()) {
            return Err(Halt::Budget);
        }
        let g = self.objective.gradient(theta).map_err(|e| Halt::Failure(e.0))?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Halt::Failure("objective returned a non-finite gradient".into()));
        }
        self.record();
        Ok(g)
    }

    fn record(&mut self) {
        let Some((best, _)) = &self.best else { return };
        let units = self.units();
        if self.trace.last().is_none_or(|p| units > p.units) {
            self.trace.push(TracePoint {
                units,
                best_cost: *best,
            });
        }
    }

    fn finish(self, theta0: &[f64], outcome: Result<(), Halt>) -> OptimizerRun {
        let termination = match outcome {
            Ok(()) => Termination::Converged,
            Err(Halt::Budget) => Termination::BudgetExhausted,
            Err(Halt::Failure(reason)) => Termination::InternalFailure(reason),
        };
        let (final_best_cost, final_theta) = self.best.unwrap_or((f64::NAN, theta0.to_vec()));
        OptimizerRun {
            trace: self.trace,
            final_theta,
            final_best_cost,
            termination,
        }
    }
}

/// Runs `method` from `theta0` until it converges, fails, or the next call
/// would exceed `config.budget`.
pub fn minimize(
    method: Method,
    objective: &mut dyn Objective,
    theta0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimizerRun, OptimError> {
    if theta0.len() != objective.param_count() {
        return Err(OptimError::ParamLength {
            expected: objective.param_count(),
            got: theta0.len(),
        });
    }
    if config.budget == 0 {
        return Err(OptimError::ZeroBudget);
    }
    if method.uses_gradient() && !objective.has_gradient() {
        return Err(OptimError::GradientUnavailable(method));
    }
    let mut session = Budgeted::new(objective, config.budget);
    let outcome = match method {
        Method::Spsa => spsa::run(&mut session, theta0, &config.spsa, config.budget, config.seed),
        Method::NelderMead => nelder_mead::run(&mut session, theta0, &config.nelder_mead),
        Method::Powell => powell::run(&mut session, theta0, &config.powell),
        Method::Bfgs => bfgs::run(&mut session, theta0, &config.gradient),
        Method::LBfgs => lbfgs::run(&mut session, theta0, &config.gradient),
        Method::Cg => cg::run(&mut session, theta0, &config.gradient),
        Method::Adam => adam::run(&mut session, theta0, &config.adam, false),
        Method::AmsGrad => adam::run(&mut session, theta0, &config.adam, true),
    };
    Ok(session.finish(theta0, outcome))
}

macro_rules! method_entry {
    ($($name:ident => $method:expr),* $(,)?) => {
        $(
            pub fn $name(objective: &mut dyn Objective, theta0: &[f64], config: &OptimizerConfig) -> Result<OptimizerRun, OptimError> {
                minimize($method, objective, theta0, config)
            }
        )*
    };
}

method_entry! {
    spsa_minimize => Method::Spsa,
    nelder_mead_minimize => Method::NelderMead,
    powell_minimize => Method::Powell,
    bfgs_minimize => Method::Bfgs,
    lbfgs_minimize => Method::LBfgs,
    cg_minimize => Method::Cg,
    adam_minimize => Method::Adam,
    amsgrad_minimize => Method::AmsGrad,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// a + t·d
pub(crate) fn axpy(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

/// Initial trial step for the Wolfe line search: the step that would repeat
/// the previous decrease along a quadratic model, capped at one.
pub(crate) fn initial_step(f: f64, previous_f: f64, slope: f64) -> f64 {
    let a = 1.01 * 2.0 * (f - previous_f) / slope;
    if a.is_finite() && a > 0.0 {
        a.min(1.0)
    } else {
        1.0
    }
}
