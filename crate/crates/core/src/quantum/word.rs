use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{Mat2, QuantumError};

/// Single-qubit factor of a unitary word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    I,
    X,
    Y,
    Z,
    H,
}

impl Factor {
    pub fn matrix(self) -> Mat2 {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            Factor::I => [[l, o], [o, l]],
            Factor::X => [[o, l], [l, o]],
            Factor::Y => [[o, -i], [i, o]],
            Factor::Z => [[l, o], [o, -l]],
            Factor::H => [[s, s], [s, -s]],
        }
    }

    pub fn label(self) -> char {
        match self {
            Factor::I => 'I',
            Factor::X => 'X',
            Factor::Y => 'Y',
            Factor::Z => 'Z',
            Factor::H => 'H',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        match c {
            'I' => Some(Factor::I),
            'X' => Some(Factor::X),
            'Y' => Some(Factor::Y),
            'Z' => Some(Factor::Z),
            'H' => Some(Factor::H),
            _ => None,
        }
    }
}

/// Tensor product of single-qubit factors; factor `k` acts on qubit `k`.
///
/// Every factor is Hermitian as well as unitary, so a word is its own
/// adjoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitaryWord {
    factors: Vec<Factor>,
}

impl UnitaryWord {
    pub fn new(factors: Vec<Factor>) -> Result<Self, QuantumError> {
        if factors.is_empty() {
            return Err(QuantumError::EmptyWord);
        }
        Ok(Self { factors })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            factors: vec![Factor::I; n_qubits.max(1)],
        }
    }

    /// Word with `factor` on `qubit` and identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, factor: Factor) -> Self {
        let mut w = Self::identity(n_qubits);
        w.factors[qubit] = factor;
        w
    }

    /// `factor` on every qubit.
    pub fn uniform(n_qubits: usize, factor: Factor) -> Self {
        Self {
            factors: vec![factor; n_qubits.max(1)],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|f| *f == Factor::I)
    }

    /// Iterator over (qubit, factor) pairs with a non-identity factor.
    pub fn active(&self) -> impl Iterator<Item = (usize, Factor)> + '_ {
        self.factors
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, f)| *f != Factor::I)
    }
}

impl fmt::Display for UnitaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for factor in &self.factors {
            write!(f, "{}", factor.label())?;
        }
        Ok(())
    }
}

impl FromStr for UnitaryWord {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors = s
            .chars()
            .map(|c| Factor::from_label(c.to_ascii_uppercase()).ok_or(QuantumError::BadFactor(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors)
    }
}
