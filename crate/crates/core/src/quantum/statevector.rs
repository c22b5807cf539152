use num_complex::Complex64;

use super::{apply_1q, bit, check_qubit, Gate, QuantumError, UnitaryWord};

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self, QuantumError> {
        if n_qubits == 0 {
            return Err(QuantumError::NoQubits);
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps a normalized amplitude vector.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, QuantumError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::BadLength(len));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<(), QuantumError> {
        gate.validate(self.n_qubits)?;
        for p in gate.primitives() {
            apply_1q(&mut self.amps, self.n_qubits, p.target, &p.matrix, p.control);
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<(), QuantumError> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Applies an uncontrolled word; factor `k` acts on qubit `k`.
    pub fn apply_word(&mut self, word: &UnitaryWord) -> Result<(), QuantumError> {
        if word.n_qubits() > self.n_qubits {
            return Err(QuantumError::SizeMismatch(word.n_qubits(), self.n_qubits));
        }
        for (q, f) in word.active() {
            apply_1q(&mut self.amps, self.n_qubits, q, &f.matrix(), None);
        }
        Ok(())
    }

    /// Exact ⟨Z_qubit⟩.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64, QuantumError> {
        check_qubit(self.n_qubits, qubit)?;
        Ok(z_weighted(self.n_qubits, qubit, &self.amps, |a| a.norm_sqr()))
    }

    /// ⟨self|Z_qubit|other⟩.
    pub fn z_overlap(&self, other: &Statevector, qubit: usize) -> Result<Complex64, QuantumError> {
        check_qubit(self.n_qubits, qubit)?;
        if other.n_qubits != self.n_qubits {
            return Err(QuantumError::SizeMismatch(self.n_qubits, other.n_qubits));
        }
        let m = bit(self.n_qubits, qubit);
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .enumerate()
            .map(|(i, (a, b))| {
                let v = a.conj() * b;
                if i & m == 0 {
                    v
                } else {
                    -v
                }
            })
            .sum())
    }
}

fn z_weighted(n_qubits: usize, qubit: usize, amps: &[Complex64], w: impl Fn(&Complex64) -> f64) -> f64 {
    let m = bit(n_qubits, qubit);
    amps.iter()
        .enumerate()
        .map(|(i, a)| if i & m == 0 { w(a) } else { -w(a) })
        .sum()
}

/// Returns `gate` applied to a copy of `state`.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector, QuantumError> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}
