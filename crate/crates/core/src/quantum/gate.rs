use super::{check_qubit, ry_matrix, Factor, Mat2, QuantumError, UnitaryWord};

/// Gate alphabet of the simulator. Qubit indices are 0-based.
///
/// `ControlledWord` applies factor `k` of the word to qubit `k`, each
/// controlled on `control`, which must lie outside the word's span.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Ry { target: usize, angle: f64 },
    H(usize),
    X(usize),
    Z(usize),
    Cx { control: usize, target: usize },
    ControlledWord { control: usize, word: UnitaryWord },
}

/// One primitive step a gate decomposes into: a (possibly controlled)
/// single-qubit matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Primitive {
    pub control: Option<usize>,
    pub target: usize,
    pub matrix: Mat2,
}

impl Gate {
    pub fn validate(&self, n_qubits: usize) -> Result<(), QuantumError> {
        match self {
            Gate::Ry { target, .. } | Gate::H(target) | Gate::X(target) | Gate::Z(target) => {
                check_qubit(n_qubits, *target)
            }
            Gate::Cx { control, target } => {
                check_qubit(n_qubits, *control)?;
                check_qubit(n_qubits, *target)?;
                if control == target {
                    return Err(QuantumError::ControlIsTarget(*control));
                }
                Ok(())
            }
            Gate::ControlledWord { control, word } => {
                check_qubit(n_qubits, *control)?;
                if word.n_qubits() > 0 {
                    check_qubit(n_qubits, word.n_qubits() - 1)?;
                }
                if *control < word.n_qubits() {
                    return Err(QuantumError::ControlIsTarget(*control));
                }
                Ok(())
            }
        }
    }

    /// Number of qubits the gate acts on for noise purposes (1 or 2).
    pub fn arity(&self) -> usize {
        match self {
            Gate::Ry { .. } | Gate::H(_) | Gate::X(_) | Gate::Z(_) => 1,
            Gate::Cx { .. } | Gate::ControlledWord { .. } => 2,
        }
    }

    pub(crate) fn primitives(&self) -> Vec<Primitive> {
        let single = |target: usize, matrix: Mat2| Primitive {
            control: None,
            target,
            matrix,
        };
        match self {
            Gate::Ry { target, angle } => vec![single(*target, ry_matrix(*angle))],
            Gate::H(t) => vec![single(*t, Factor::H.matrix())],
            Gate::X(t) => vec![single(*t, Factor::X.matrix())],
            Gate::Z(t) => vec![single(*t, Factor::Z.matrix())],
            Gate::Cx { control, target } => vec![Primitive {
                control: Some(*control),
                target: *target,
                matrix: Factor::X.matrix(),
            }],
            Gate::ControlledWord { control, word } => word
                .active()
                .map(|(q, f)| Primitive {
                    control: Some(*control),
                    target: q,
                    matrix: f.matrix(),
                })
                .collect(),
        }
    }
}
