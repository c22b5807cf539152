//! Local VQLS cost C_L and its parameter-shift gradient.
//!
//! With φ = V(θ)|0⟩ and |0ⱼ⟩⟨0ⱼ| = (I + Zⱼ)/2 the local cost reduces to
//!
//! ```text
//! C_L = 1/2 − B / (2·n·D)
//! D   = Σ_{l,m} c_l* c_m ⟨φ|A_l† A_m|φ⟩
//! B   = Σ_j Σ_{l,m} c_l* c_m ⟨φ|A_l† U Z_j U† A_m|φ⟩
//! ```
//!
//! Each ⟨φ|W|φ⟩ is an ingredient. Coefficients, words and the ansatz are
//! real, so the (l, m) and (m, l) ingredients are complex conjugates and
//! only real parts are needed: pairs are visited once with l ≤ m and the
//! off-diagonal ones are weighted twice. On sampling backends every
//! ingredient is a Hadamard-test estimate; V is never controlled.

mod backend;
mod ledger;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

pub use backend::{NoiseBackend, NoiseLevel, DEFAULT_SHOTS};
pub use ledger::{gradient_units, CallKind, EvaluationLedger, LedgerEntry};

use crate::problem::{bind_ansatz, classical_solution, AnsatzCircuit, LinearSystemProblem, ProblemError};
use crate::quantum::{ancilla_prob0, DensityMatrix, Gate, NoiseParams, QuantumError, Statevector, UnitaryWord};

/// Default fidelity |⟨x|x'⟩|² at which a solution counts as found.
pub const DEFAULT_FIDELITY_THRESHOLD: f64 = 0.99;

/// |D| below this means A|φ⟩ ≈ 0 and the cost is undefined.
const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Exact-backend results in [−CLAMP_WINDOW, 0) are rounded up to zero.
const CLAMP_WINDOW: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("denominator ⟨φ|A†A|φ⟩ = {0:.3e} is degenerate")]
    DegenerateDenominator(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("term index {index} out of range ({terms} terms)")]
    TermOutOfRange { index: usize, terms: usize },
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("unknown noise level {0:?} (known: exact, shots, device)")]
    UnknownNoiseLevel(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// The two sums the cost is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ingredients {
    pub b: f64,
    pub d: f64,
}

impl Ingredients {
    fn cost(&self, n_qubits: usize) -> Result<f64, CostError> {
        if self.d.abs() < DEGENERATE_DENOMINATOR {
            return Err(CostError::DegenerateDenominator(self.d));
        }
        Ok(0.5 - self.b / (2.0 * n_qubits as f64 * self.d))
    }
}

/// One Hadamard-test ingredient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ingredient {
    /// ⟨φ|A_l† A_m|φ⟩
    Delta { l: usize, m: usize },
    /// ⟨φ|A_l† U Z_j U† A_m|φ⟩
    Beta { l: usize, m: usize, j: usize },
}

/// Exact intermediate states for one θ.
struct ExactStates {
    /// A_m|φ⟩
    a_phi: Vec<Statevector>,
    /// U† A_m|φ⟩
    u_a_phi: Vec<Statevector>,
}

pub struct CostEvaluator {
    problem: LinearSystemProblem,
    ansatz: AnsatzCircuit,
    backend: NoiseBackend,
    ledger: EvaluationLedger,
    coefficients: Vec<f64>,
    words: Vec<UnitaryWord>,
    last: Option<(Vec<f64>, Ingredients)>,
}

impl CostEvaluator {
    pub fn new(problem: LinearSystemProblem, ansatz: AnsatzCircuit, backend: NoiseBackend) -> Result<Self, CostError> {
        if ansatz.n_qubits() != problem.n_qubits() {
            return Err(ProblemError::QubitMismatch {
                ansatz: ansatz.n_qubits(),
                problem: problem.n_qubits(),
            }
            .into());
        }
        if !problem.operator().is_real() {
            return Err(CostError::Unsupported(
                "complex coefficients (only real-valued problems are simulated)".into(),
            ));
        }
        let (coefficients, words) = problem
            .operator()
            .terms()
            .iter()
            .map(|(c, w)| (c.re, w.clone()))
            .unzip();
        Ok(Self {
            problem,
            ansatz,
            backend,
            ledger: EvaluationLedger::new(),
            coefficients,
            words,
            last: None,
        })
    }

    pub fn problem(&self) -> &LinearSystemProblem {
        &self.problem
    }

    pub fn ansatz(&self) -> &AnsatzCircuit {
        &self.ansatz
    }

    pub fn backend(&self) -> &NoiseBackend {
        &self.backend
    }

    pub fn ledger(&self) -> &EvaluationLedger {
        &self.ledger
    }

    pub fn param_count(&self) -> usize {
        self.ansatz.param_count()
    }

    fn n_qubits(&self) -> usize {
        self.problem.n_qubits()
    }

    fn check_terms(&self, indices: &[usize]) -> Result<(), CostError> {
        let terms = self.words.len();
        match indices.iter().find(|&&i| i >= terms) {
            Some(&index) => Err(CostError::TermOutOfRange { index, terms }),
            None => Ok(()),
        }
    }

    /// C_L(θ). Charges one unit.
    pub fn evaluate_cost(&mut self, theta: &[f64]) -> Result<f64, CostError> {
        let ingredients = self.ingredients(theta)?;
        self.ledger.charge_cost();
        self.last = Some((theta.to_vec(), ingredients));
        let c = ingredients.cost(self.n_qubits())?;
        if self.backend.is_exact() && (-CLAMP_WINDOW..0.0).contains(&c) {
            return Ok(0.0);
        }
        Ok(c)
    }

    /// ∇C_L(θ) by the two-term parameter shift on every ingredient. Charges
    /// two units per parameter. The unshifted (B, D) are taken from the last
    /// cost evaluation when it was at the same θ and recomputed otherwise;
    /// neither case is charged beyond the shifted evaluations.
    pub fn evaluate_gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>, CostError> {
        self.check_len(theta)?;
        let center = match &self.last {
            Some((t, ing)) if t.as_slice() == theta => *ing,
            _ => self.ingredients(theta)?,
        };
        if center.d.abs() < DEGENERATE_DENOMINATOR {
            return Err(CostError::DegenerateDenominator(center.d));
        }
        let mut shifted = theta.to_vec();
        let mut grad = Vec::with_capacity(theta.len());
        for k in 0..theta.len() {
            shifted[k] = theta[k] + FRAC_PI_2;
            let plus = self.ingredients(&shifted)?;
            shifted[k] = theta[k] - FRAC_PI_2;
            let minus = self.ingredients(&shifted)?;
            shifted[k] = theta[k];
            let db = 0.5 * (plus.b - minus.b);
            let dd = 0.5 * (plus.d - minus.d);
            let n = self.n_qubits() as f64;
            grad.push(-(db * center.d - center.b * dd) / (2.0 * n * center.d * center.d));
        }
        self.ledger.charge_gradient(theta.len());
        Ok(grad)
    }

    /// Estimate of ⟨φ|A_l† A_m|φ⟩. Not charged to the ledger.
    pub fn delta_term(&mut self, theta: &[f64], l: usize, m: usize) -> Result<Complex64, CostError> {
        self.check_terms(&[l, m])?;
        self.term(theta, Ingredient::Delta { l, m })
    }

    /// Estimate of ⟨φ|A_l† U Z_j U† A_m|φ⟩. Not charged to the ledger.
    pub fn beta_term(&mut self, theta: &[f64], l: usize, m: usize, j: usize) -> Result<Complex64, CostError> {
        self.check_terms(&[l, m])?;
        if j >= self.n_qubits() {
            return Err(QuantumError::QubitOutOfRange {
                index: j,
                n_qubits: self.n_qubits(),
            }
            .into());
        }
        self.term(theta, Ingredient::Beta { l, m, j })
    }

    fn term(&mut self, theta: &[f64], which: Ingredient) -> Result<Complex64, CostError> {
        let states = self.exact_states(theta)?;
        let exact = exact_value(&states, which)?;
        match self.backend {
            NoiseBackend::Exact => Ok(exact),
            NoiseBackend::ShotSampling { .. } => Ok(Complex64::new(self.backend.estimate_expectation(exact.re), 0.0)),
            NoiseBackend::DeviceNoise { noise, .. } => {
                let rho_v = self.noisy_ansatz(theta, &noise)?;
                let p0 = self.hadamard_test_p0(&rho_v, which, &noise)?;
                Ok(Complex64::new(self.backend.sample_p0(p0), 0.0))
            }
        }
    }

    /// (B, D) at θ under the configured backend.
    pub fn ingredients(&mut self, theta: &[f64]) -> Result<Ingredients, CostError> {
        let states = self.exact_states(theta)?;
        let rho_v = match &self.backend {
            NoiseBackend::DeviceNoise { noise, .. } => Some(self.noisy_ansatz(theta, &noise.clone())?),
            _ => None,
        };
        let terms = self.words.len();
        let mut acc = Ingredients { b: 0.0, d: 0.0 };
        for l in 0..terms {
            for m in l..terms {
                let weight = self.coefficients[l] * self.coefficients[m] * if l == m { 1.0 } else { 2.0 };
                acc.d += weight * self.estimate(&states, rho_v.as_ref(), Ingredient::Delta { l, m })?;
                for j in 0..self.n_qubits() {
                    acc.b += weight * self.estimate(&states, rho_v.as_ref(), Ingredient::Beta { l, m, j })?;
                }
            }
        }
        Ok(acc)
    }

    fn estimate(
        &mut self,
        states: &ExactStates,
        rho_v: Option<&DensityMatrix>,
        which: Ingredient,
    ) -> Result<f64, CostError> {
        match (&self.backend, rho_v) {
            (NoiseBackend::DeviceNoise { noise, .. }, Some(rho_v)) => {
                let noise = *noise;
                let p0 = self.hadamard_test_p0(rho_v, which, &noise)?;
                Ok(self.backend.sample_p0(p0))
            }
            _ => {
                let exact = exact_value(states, which)?.re;
                Ok(self.backend.estimate_expectation(exact))
            }
        }
    }

    fn check_len(&self, theta: &[f64]) -> Result<(), CostError> {
        if theta.len() != self.param_count() {
            return Err(ProblemError::ParamLength {
                expected: self.param_count(),
                got: theta.len(),
            }
            .into());
        }
        Ok(())
    }

    fn exact_states(&self, theta: &[f64]) -> Result<ExactStates, CostError> {
        self.check_len(theta)?;
        let phi = self.ansatz.prepare(theta)?;
        let mut a_phi = Vec::with_capacity(self.words.len());
        let mut u_a_phi = Vec::with_capacity(self.words.len());
        for w in &self.words {
            let mut s = phi.clone();
            s.apply_word(w)?;
            let mut t = s.clone();
            // U = b_prep is a word of self-adjoint factors, so U† = U.
            t.apply_word(self.problem.b_prep())?;
            a_phi.push(s);
            u_a_phi.push(t);
        }
        Ok(ExactStates { a_phi, u_a_phi })
    }

    /// Noisy V(θ)|0⟩⟨0|V(θ)† on the system register.
    fn noisy_ansatz(&self, theta: &[f64], noise: &NoiseParams) -> Result<DensityMatrix, CostError> {
        let mut rho = DensityMatrix::zero(self.n_qubits())?;
        for g in bind_ansatz(&self.ansatz, theta)? {
            rho.apply(&g, Some(noise))?;
        }
        Ok(rho)
    }

    /// Controlled words of the Hadamard test for one ingredient, in circuit
    /// order.
    fn controlled_sequence(&self, which: Ingredient) -> Vec<UnitaryWord> {
        let n = self.n_qubits();
        match which {
            Ingredient::Delta { l, m } => vec![self.words[m].clone(), self.words[l].clone()],
            Ingredient::Beta { l, m, j } => vec![
                self.words[m].clone(),
                self.problem.b_prep().clone(),
                UnitaryWord::single(n, j, crate::quantum::Factor::Z),
                self.problem.b_prep().clone(),
                self.words[l].clone(),
            ],
        }
    }

    /// Ancilla P(0) of the noisy Hadamard test, including readout error.
    ///
    /// The ancilla is appended as the last qubit. Its |+⟩ preparation acts
    /// on a different qubit than V, so the prepared state factorizes as
    /// ρ_V ⊗ ρ_+ and ρ_V can be shared across ingredients.
    fn hadamard_test_p0(
        &self,
        rho_v: &DensityMatrix,
        which: Ingredient,
        noise: &NoiseParams,
    ) -> Result<f64, CostError> {
        let n = self.n_qubits();
        let mut ancilla = DensityMatrix::zero(1)?;
        ancilla.apply(&Gate::H(0), Some(noise))?;
        let mut rho = rho_v.tensor(&ancilla);
        for word in self.controlled_sequence(which) {
            rho.apply(&Gate::ControlledWord { control: n, word }, Some(noise))?;
        }
        rho.apply(&Gate::H(n), Some(noise))?;
        Ok(ancilla_prob0(&rho, n, noise.p_readout)?)
    }

    /// Noiseless, readout-free ancilla P(0) of the Hadamard test circuit for
    /// ⟨φ|A_l† A_m|φ⟩ (`j = None`) or ⟨φ|A_l† U Z_j U† A_m|φ⟩.
    pub fn ideal_hadamard_p0(&self, theta: &[f64], l: usize, m: usize, j: Option<usize>) -> Result<f64, CostError> {
        self.check_terms(&[l, m])?;
        let which = match j {
            None => Ingredient::Delta { l, m },
            Some(j) => Ingredient::Beta { l, m, j },
        };
        let rho_v = self.noisy_ansatz(theta, &NoiseParams::NONE)?;
        self.hadamard_test_p0(&rho_v, which, &NoiseParams::NONE)
    }

    /// |⟨x|V(θ)|0⟩|² against the dense classical solution.
    pub fn fidelity(&self, theta: &[f64]) -> Result<f64, CostError> {
        let x = classical_solution(&self.problem)?;
        let phi = self.ansatz.prepare(theta)?;
        Ok(x.inner(&phi).norm_sqr())
    }
}

fn exact_value(states: &ExactStates, which: Ingredient) -> Result<Complex64, CostError> {
    Ok(match which {
        Ingredient::Delta { l, m } => states.a_phi[l].inner(&states.a_phi[m]),
        Ingredient::Beta { l, m, j } => states.u_a_phi[l].z_overlap(&states.u_a_phi[m], j)?,
    })
}

impl crate::optim::Objective for CostEvaluator {
    fn param_count(&self) -> usize {
        CostEvaluator::param_count(self)
    }

    fn cost(&mut self, theta: &[f64]) -> Result<f64, crate::optim::ObjectiveError> {
        Ok(self.evaluate_cost(theta)?)
    }

    fn gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>, crate::optim::ObjectiveError> {
        Ok(self.evaluate_gradient(theta)?)
    }

    fn units(&self) -> u64 {
        self.ledger.units()
    }
}
