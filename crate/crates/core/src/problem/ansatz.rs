use crate::quantum::{Gate, Statevector};

use super::ProblemError;

pub const DEFAULT_DEPTH: usize = 2;

/// Layered hardware-efficient ansatz V(θ).
///
/// Layout: an Ry layer on every qubit, then `depth` blocks of
/// [CX ladder on adjacent pairs, Ry layer]. Block `b` pairs
/// (i, i+1) for i ≡ b (mod 2), control on the lower index. Parameter `k`
/// belongs to layer `k / n` and qubit `k % n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzCircuit {
    n_qubits: usize,
    depth: usize,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize, depth: usize) -> Self {
        Self { n_qubits, depth }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn param_count(&self) -> usize {
        self.n_qubits * (self.depth + 1)
    }

    /// Adjacent CX pairs of block `block`.
    pub fn entangling_pairs(&self, block: usize) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n_qubits;
        (block % 2..n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1))
    }

    /// V(θ)|0…0⟩.
    pub fn prepare(&self, theta: &[f64]) -> Result<Statevector, ProblemError> {
        let mut s = Statevector::zero(self.n_qubits)?;
        s.apply_all(&bind_ansatz(self, theta)?)?;
        Ok(s)
    }
}

pub fn bind_ansatz(ansatz: &AnsatzCircuit, theta: &[f64]) -> Result<Vec<Gate>, ProblemError> {
    if theta.len() != ansatz.param_count() {
        return Err(ProblemError::ParamLength {
            expected: ansatz.param_count(),
            got: theta.len(),
        });
    }
    let n = ansatz.n_qubits;
    let mut gates = Vec::with_capacity(ansatz.param_count() + ansatz.depth * n);
    let ry_layer = |gates: &mut Vec<Gate>, layer: usize| {
        gates.extend((0..n).map(|q| Gate::Ry {
            target: q,
            angle: theta[layer * n + q],
        }));
    };
    ry_layer(&mut gates, 0);
    for block in 0..ansatz.depth {
        gates.extend(
            ansatz
                .entangling_pairs(block)
                .map(|(control, target)| Gate::Cx { control, target }),
        );
        ry_layer(&mut gates, block + 1);
    }
    Ok(gates)
}
