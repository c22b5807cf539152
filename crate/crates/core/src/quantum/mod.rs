//! Small simulation kernel: pure states, density matrices, a fixed gate
//! alphabet, depolarizing noise and Z expectations.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
//! an amplitude index. For an `n`-qubit register, qubit `q` toggles index
//! bit `1 << (n - 1 - q)`.

mod density;
mod gate;
mod noise;
mod statevector;
mod word;

use num_complex::Complex64;
use thiserror::Error;

pub(crate) use density::readout_prob0;
pub use density::{ancilla_prob0, apply_gate_dm, DensityMatrix};
pub use gate::Gate;
pub use noise::NoiseParams;
pub use statevector::{apply_gate, Statevector};
pub use word::{Factor, UnitaryWord};

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("qubit index {index} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("control qubit {0} coincides with a target")]
    ControlIsTarget(usize),
    #[error("register must hold at least one qubit")]
    NoQubits,
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("unitary word must have at least one factor")]
    EmptyWord,
    #[error("unknown factor label {0:?}")]
    BadFactor(char),
    #[error("probability {name} = {value} outside [0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    #[error("register sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
}

#[inline]
pub(crate) fn bit(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

pub(crate) fn check_qubit(n_qubits: usize, index: usize) -> Result<(), QuantumError> {
    if index < n_qubits {
        Ok(())
    } else {
        Err(QuantumError::QubitOutOfRange { index, n_qubits })
    }
}

pub fn ry_matrix(angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// Applies `m` to `qubit` of a vector laid out as `2^n` blocks of `stride`
/// contiguous entries. With `stride == 1` this is a plain state vector.
pub(crate) fn apply_1q(data: &mut [Complex64], n_qubits: usize, qubit: usize, m: &Mat2, control: Option<usize>) {
    let step = bit(n_qubits, qubit);
    let cmask = control.map_or(0, |c| bit(n_qubits, c));
    let dim = 1usize << n_qubits;
    for i in 0..dim {
        if i & step != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | step;
        let (a0, a1) = (data[i], data[j]);
        data[i] = m[0][0] * a0 + m[0][1] * a1;
        data[j] = m[1][0] * a0 + m[1][1] * a1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut sv = Statevector::zero(3).unwrap();
        sv.apply(&Gate::X(0)).unwrap();
        assert_eq!(sv.amplitudes()[0b100], Complex64::new(1.0, 0.0));
        let mut sv = Statevector::zero(3).unwrap();
        sv.apply(&Gate::X(2)).unwrap();
        assert_eq!(sv.amplitudes()[0b001], Complex64::new(1.0, 0.0));
    }
}
