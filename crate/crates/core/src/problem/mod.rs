//! Linear-system instances given as linear combinations of unitary words,
//! the layered Ry/CX ansatz, and dense-matrix oracles.

mod ansatz;
mod file;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub use crate::quantum::{Factor, UnitaryWord};
use crate::quantum::{QuantumError, Statevector};
pub use ansatz::{bind_ansatz, AnsatzCircuit, DEFAULT_DEPTH};
pub use file::parse_problem;

pub const INSTANCE_NAMES: [&str; 3] = ["A1", "A2", "A3"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem instance {0:?} (known: A1, A2, A3)")]
    UnknownInstance(String),
    #[error("operator needs at least one term")]
    NoTerms,
    #[error("term {index}: word {word} has {got} qubits, expected {expected}")]
    WordLength {
        index: usize,
        word: String,
        got: usize,
        expected: usize,
    },
    #[error("term {0}: coefficient is not finite")]
    NonFiniteCoefficient(usize),
    #[error("matrix is singular (smallest singular value {smallest:.3e})")]
    Singular { smallest: f64 },
    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("ansatz acts on {ansatz} qubits but the problem has {problem}")]
    QubitMismatch { ansatz: usize, problem: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// A = Σ cᵢ Aᵢ with each Aᵢ a unitary word.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCombinationOperator {
    n_qubits: usize,
    terms: Vec<(Complex64, UnitaryWord)>,
}

impl LinearCombinationOperator {
    pub fn new(terms: Vec<(Complex64, UnitaryWord)>) -> Result<Self, ProblemError> {
        let n_qubits = terms.first().ok_or(ProblemError::NoTerms)?.1.n_qubits();
        for (index, (c, w)) in terms.iter().enumerate() {
            if w.n_qubits() != n_qubits {
                return Err(ProblemError::WordLength {
                    index,
                    word: w.to_string(),
                    got: w.n_qubits(),
                    expected: n_qubits,
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(ProblemError::NonFiniteCoefficient(index));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Convenience constructor for real coefficients and word strings.
    pub fn from_real(terms: &[(f64, &str)]) -> Result<Self, ProblemError> {
        let terms = terms
            .iter()
            .map(|(c, w)| Ok((Complex64::new(*c, 0.0), w.parse::<UnitaryWord>()?)))
            .collect::<Result<Vec<_>, ProblemError>>()?;
        Self::new(terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, UnitaryWord)] {
        &self.terms
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im == 0.0)
    }
}

impl fmt::Display for LinearCombinationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, w)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}·{}", c.re, w)?;
            } else {
                write!(f, "({}{:+}i)·{}", c.re, c.im, w)?;
            }
        }
        Ok(())
    }
}

/// A linear system A|x⟩ ∝ |b⟩ with |b⟩ = H^⊗n|0⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystemProblem {
    name: String,
    a: LinearCombinationOperator,
    b_prep: UnitaryWord,
}

impl LinearSystemProblem {
    pub fn new(name: impl Into<String>, a: LinearCombinationOperator) -> Self {
        let b_prep = UnitaryWord::uniform(a.n_qubits(), Factor::H);
        Self {
            name: name.into(),
            a,
            b_prep,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operator(&self) -> &LinearCombinationOperator {
        &self.a
    }

    pub fn n_qubits(&self) -> usize {
        self.a.n_qubits()
    }

    /// The word U with U|0⟩ = |b⟩.
    pub fn b_prep(&self) -> &UnitaryWord {
        &self.b_prep
    }

    /// Cost-evaluation budget used for this problem when none is configured:
    /// 200 units per qubit (600/800/1000 for the built-in instances).
    pub fn default_budget(&self) -> u64 {
        200 * self.n_qubits() as u64
    }
}

/// Built-in instances. Qubit labels are shifted from 1-based to 0-based,
/// so e.g. a Z on the second qubit becomes the word `IZI`.
pub fn instance(name: &str) -> Result<LinearSystemProblem, ProblemError> {
    let terms: &[(f64, &str)] = match name.to_ascii_uppercase().as_str() {
        "A1" => &[(1.0, "III"), (0.25, "IZI"), (0.15, "IIH")],
        "A2" => &[(1.0, "ZIII"), (0.15, "IIZI"), (0.5, "IIIH")],
        "A3" => &[(1.0, "HIIII"), (0.25, "IIZII"), (0.5, "IIIXI")],
        _ => return Err(ProblemError::UnknownInstance(name.to_string())),
    };
    Ok(LinearSystemProblem::new(
        name.to_ascii_uppercase(),
        LinearCombinationOperator::from_real(terms)?,
    ))
}

fn factor_dense(f: Factor) -> DMatrix<Complex64> {
    let m = f.matrix();
    DMatrix::from_fn(2, 2, |i, j| m[i][j])
}

/// Dense matrix of a single word, qubit 0 as the leftmost Kronecker factor.
pub fn word_matrix(word: &UnitaryWord) -> DMatrix<Complex64> {
    word.factors()
        .iter()
        .skip(1)
        .fold(factor_dense(word.factors()[0]), |acc, f| {
            acc.kronecker(&factor_dense(*f))
        })
}

/// Σ cᵢ·(⊗ factors). Verification oracle; not used on the cost path.
pub fn dense_matrix(op: &LinearCombinationOperator) -> DMatrix<Complex64> {
    let dim = 1 << op.n_qubits();
    op.terms()
        .iter()
        .fold(DMatrix::zeros(dim, dim), |acc, (c, w)| acc + word_matrix(w) * *c)
}

/// H^⊗n|0⟩: every amplitude equals 2^(−n/2).
pub fn prepare_b(n_qubits: usize) -> Result<Statevector, ProblemError> {
    let mut s = Statevector::zero(n_qubits)?;
    s.apply_word(&UnitaryWord::uniform(n_qubits, Factor::H))?;
    Ok(s)
}

/// Normalized A⁻¹|b⟩ by dense solve.
pub fn classical_solution(problem: &LinearSystemProblem) -> Result<Statevector, ProblemError> {
    let a = dense_matrix(problem.operator());
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax.max(1e-300) {
        return Err(ProblemError::Singular { smallest: smin });
    }
    let mut b = Statevector::zero(problem.n_qubits())?;
    b.apply_word(problem.b_prep())?;
    let rhs = DVector::from_column_slice(b.amplitudes());
    let x = a.lu().solve(&rhs).ok_or(ProblemError::Singular { smallest: smin })?;
    let norm = x.norm();
    Ok(Statevector::from_amplitudes(x.iter().map(|v| v / norm).collect())?)
}
