use num_complex::Complex64;

use super::{bit, check_qubit, Gate, Mat2, NoiseParams, QuantumError, Statevector};

/// Dense `2^n × 2^n` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero(n_qubits: usize) -> Result<Self, QuantumError> {
        Ok(Self::from_pure(&Statevector::zero(n_qubits)?))
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(state: &Statevector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in amps {
            for b in amps {
                data.push(a * b.conj());
            }
        }
        Self {
            n_qubits: state.n_qubits(),
            data,
        }
    }

    /// Builds from a row-major matrix; the caller is responsible for it
    /// being a valid state.
    pub fn from_rows(n_qubits: usize, data: Vec<Complex64>) -> Result<Self, QuantumError> {
        if n_qubits == 0 {
            return Err(QuantumError::NoQubits);
        }
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(QuantumError::BadLength(data.len()));
        }
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity_with(&self, state: &Statevector) -> f64 {
        let a = state.amplitudes();
        let dim = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += a[i].conj() * self.get(i, j) * a[j];
            }
        }
        acc.re
    }

    /// ρ ⊗ σ, with `self` on the leading (more significant) qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        data[(i * db + k) * dim + j * db + l] = a * other.get(k, l);
                    }
                }
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            data,
        }
    }

    pub fn expectation_z(&self, qubit: usize) -> Result<f64, QuantumError> {
        check_qubit(self.n_qubits, qubit)?;
        let m = bit(self.n_qubits, qubit);
        Ok((0..self.dim())
            .map(|i| {
                let p = self.get(i, i).re;
                if i & m == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }

    /// Probability of reading 0 on `qubit`, before readout error.
    pub fn prob0(&self, qubit: usize) -> Result<f64, QuantumError> {
        Ok(0.5 * (1.0 + self.expectation_z(qubit)?))
    }

    /// In-place gate application with an optional depolarizing channel after
    /// each primitive step.
    pub fn apply(&mut self, gate: &Gate, noise: Option<&NoiseParams>) -> Result<(), QuantumError> {
        gate.validate(self.n_qubits)?;
        for p in gate.primitives() {
            self.conjugate_by(p.target, &p.matrix, p.control);
            if let Some(noise) = noise {
                match p.control {
                    Some(c) => self.depolarize(&[c, p.target], noise.p2)?,
                    None => self.depolarize(&[p.target], noise.p1)?,
                }
            }
        }
        Ok(())
    }

    /// ρ ← UρU† for a (controlled) single-qubit U.
    fn conjugate_by(&mut self, target: usize, m: &Mat2, control: Option<usize>) {
        let n = self.n_qubits;
        let dim = self.dim();
        let step = bit(n, target);
        let cmask = control.map_or(0, |c| bit(n, c));
        let mc = [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]];
        // rows: ρ ← Uρ
        for i in 0..dim {
            if i & step != 0 || i & cmask != cmask {
                continue;
            }
            let k = i | step;
            for j in 0..dim {
                let (a, b) = (self.data[i * dim + j], self.data[k * dim + j]);
                self.data[i * dim + j] = m[0][0] * a + m[0][1] * b;
                self.data[k * dim + j] = m[1][0] * a + m[1][1] * b;
            }
        }
        // columns: ρ ← ρU†
        for r in 0..dim {
            let row = &mut self.data[r * dim..(r + 1) * dim];
            for j in 0..dim {
                if j & step != 0 || j & cmask != cmask {
                    continue;
                }
                let l = j | step;
                let (a, b) = (row[j], row[l]);
                row[j] = mc[0][0] * a + mc[0][1] * b;
                row[l] = mc[1][0] * a + mc[1][1] * b;
            }
        }
    }

    /// D_p(ρ) = (1 − p)ρ + p·(I/2^k ⊗ Tr_k ρ) over the listed qubits.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) -> Result<(), QuantumError> {
        for &q in qubits {
            check_qubit(self.n_qubits, q)?;
        }
        if p == 0.0 {
            return Ok(());
        }
        let n = self.n_qubits;
        let dim = self.dim();
        let masks: Vec<usize> = qubits.iter().map(|&q| bit(n, q)).collect();
        let full = masks.iter().fold(0, |acc, m| acc | m);
        let subsets: Vec<usize> = (0..1usize << masks.len())
            .map(|s| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| s >> b & 1 == 1)
                    .fold(0, |acc, (_, m)| acc | m)
            })
            .collect();
        let weight = 1.0 / subsets.len() as f64;
        let src = self.data.clone();
        for i in 0..dim {
            for j in 0..dim {
                let idx = i * dim + j;
                let mut v = src[idx] * (1.0 - p);
                if (i ^ j) & full == 0 {
                    let (bi, bj) = (i & !full, j & !full);
                    let avg: Complex64 = subsets.iter().map(|s| src[(bi | s) * dim + (bj | s)]).sum();
                    v += avg * (p * weight);
                }
                self.data[idx] = v;
            }
        }
        Ok(())
    }
}

/// Returns `gate` applied to a copy of `rho`, followed by the depolarizing
/// channel for its arity when `noise` is given. Controlled words decompose
/// into one controlled two-qubit gate per non-identity factor, each charged
/// `p2`.
pub fn apply_gate_dm(
    rho: &DensityMatrix,
    gate: &Gate,
    noise: Option<&NoiseParams>,
) -> Result<DensityMatrix, QuantumError> {
    let mut out = rho.clone();
    out.apply(gate, noise)?;
    Ok(out)
}

/// Probability of reading 0 on `ancilla` after a symmetric readout flip.
pub fn ancilla_prob0(rho: &DensityMatrix, ancilla: usize, p_readout: f64) -> Result<f64, QuantumError> {
    let p0 = rho.prob0(ancilla)?;
    Ok(readout_prob0(p0, p_readout))
}

pub(crate) fn readout_prob0(p0: f64, p_readout: f64) -> f64 {
    p0 * (1.0 - p_readout) + (1.0 - p0) * p_readout
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::quantum::{apply_gate, Factor};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis_dm(n: usize, index: usize) -> DensityMatrix {
        let mut amps = vec![c(0.0); 1 << n];
        amps[index] = c(1.0);
        DensityMatrix::from_pure(&Statevector::from_amplitudes(amps).unwrap())
    }

    fn random_rho(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
        let dim = 1 << n;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let mut rho = &g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        let data = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| rho[(i, j)])
            .collect();
        DensityMatrix::from_rows(n, data).unwrap()
    }

    fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
        let dim = rho.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| rho.get(i, j));
        m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn hadamard_noiseless() {
        let rho = apply_gate_dm(&DensityMatrix::zero(1).unwrap(), &Gate::H(0), None).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.get(i, j) - c(0.5)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn full_single_qubit_depolarization() {
        let noise = NoiseParams::new(1.0, 0.0, 0.0).unwrap();
        let rho = apply_gate_dm(&DensityMatrix::zero(1).unwrap(), &Gate::X(0), Some(&noise)).unwrap();
        assert!((rho.get(0, 0) - c(0.5)).norm() < 1e-15);
        assert!((rho.get(1, 1) - c(0.5)).norm() < 1e-15);
        assert!(rho.get(0, 1).norm() < 1e-15);
    }

    /// Two-qubit depolarizing channel written as an explicit Pauli-Kraus sum.
    fn pauli_kraus_oracle(rho: &DMatrix<Complex64>, p: f64) -> DMatrix<Complex64> {
        let paulis = [Factor::I, Factor::X, Factor::Y, Factor::Z].map(|f| {
            let m = f.matrix();
            DMatrix::from_fn(2, 2, |i, j| m[i][j])
        });
        let mut acc = rho * c(1.0 - p);
        for a in &paulis {
            for b in &paulis {
                let k = a.kronecker(b);
                acc += (&k * rho * k.adjoint()) * c(p / 16.0);
            }
        }
        acc
    }

    #[test]
    fn cx_with_two_qubit_noise_matches_kraus_oracle() {
        let noise = NoiseParams::new(0.0, 0.01, 0.0).unwrap();
        let rho = apply_gate_dm(&basis_dm(2, 0b10), &Gate::Cx { control: 0, target: 1 }, Some(&noise)).unwrap();
        assert!((rho.trace() - c(1.0)).norm() < 1e-12);

        let ideal = DMatrix::from_fn(4, 4, |i, j| if i == 3 && j == 3 { c(1.0) } else { c(0.0) });
        let oracle = pauli_kraus_oracle(&ideal, 0.01);
        for i in 0..4 {
            for j in 0..4 {
                assert!((rho.get(i, j) - oracle[(i, j)]).norm() < 1e-14);
            }
        }
        // 1 − p·(1 − 1/4)
        assert!((rho.get(3, 3).re - 0.9925).abs() < 1e-14);
    }

    #[test]
    fn single_qubit_channel_matches_kraus_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let paulis = [Factor::I, Factor::X, Factor::Y, Factor::Z];
        for _ in 0..20 {
            let rho = random_rho(&mut rng, 2);
            let p = rng.random_range(0.0..1.0);
            let mut out = rho.clone();
            out.depolarize(&[1], p).unwrap();
            let m = DMatrix::from_fn(4, 4, |i, j| rho.get(i, j));
            let mut oracle = &m * c(1.0 - p);
            for f in paulis {
                let pm = f.matrix();
                let k = DMatrix::<Complex64>::identity(2, 2).kronecker(&DMatrix::from_fn(2, 2, |i, j| pm[i][j]));
                oracle += (&k * &m * k.adjoint()) * c(p / 4.0);
            }
            for i in 0..4 {
                for j in 0..4 {
                    assert!((out.get(i, j) - oracle[(i, j)]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn channel_preserves_trace_and_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..1000 {
            let n = 1 + trial % 3;
            let mut rho = random_rho(&mut rng, n);
            let q = rng.random_range(0..n);
            let p = rng.random_range(0.0..1.0);
            if n > 1 {
                let r = (q + 1 + rng.random_range(0..n - 1)) % n;
                rho.depolarize(&[q, r], p).unwrap();
            } else {
                rho.depolarize(&[q], p).unwrap();
            }
            assert!((rho.trace() - c(1.0)).norm() < 1e-10);
            assert!(rho.hermiticity_defect() < 1e-10);
            assert!(min_eigenvalue(&rho) > -1e-9);
        }
    }

    #[test]
    fn readout_formula() {
        let rho = DensityMatrix::zero(2).unwrap();
        assert_eq!(ancilla_prob0(&rho, 1, 0.0).unwrap(), 1.0);
        assert!((ancilla_prob0(&rho, 1, 0.02).unwrap() - 0.98).abs() < 1e-15);
        let plus = DensityMatrix::from_pure(&apply_gate(&Statevector::zero(1).unwrap(), &Gate::H(0)).unwrap());
        for pr in [0.0, 0.1, 0.37, 1.0] {
            assert!((ancilla_prob0(&plus, 0, pr).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(ancilla_prob0(&rho, 2, 0.0).is_err());
    }

    #[test]
    fn tensor_places_second_factor_last() {
        let a = basis_dm(1, 1);
        let b = DensityMatrix::zero(1).unwrap();
        let t = a.tensor(&b);
        assert_eq!(t.n_qubits(), 2);
        assert_eq!(t.get(0b10, 0b10), c(1.0));
        assert!((t.expectation_z(0).unwrap() + 1.0).abs() < 1e-15);
        assert!((t.expectation_z(1).unwrap() - 1.0).abs() < 1e-15);
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let q = 0..n;
        prop_oneof![
            (q.clone(), -2.0 * PI..2.0 * PI).prop_map(|(target, angle)| Gate::Ry { target, angle }),
            q.clone().prop_map(Gate::H),
            q.clone().prop_map(Gate::X),
            q.clone().prop_map(Gate::Z),
            (q.clone(), 1..n).prop_map(move |(c, off)| Gate::Cx {
                control: c,
                target: (c + off) % n
            }),
            "[IXYZH]{3}".prop_map(|w| Gate::ControlledWord {
                control: 3,
                word: w.parse().unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn noiseless_dm_matches_statevector(gates in proptest::collection::vec(arb_gate(4), 1..25)) {
            let mut sv = Statevector::zero(4).unwrap();
            let mut rho = DensityMatrix::zero(4).unwrap();
            for g in &gates {
                sv.apply(g).unwrap();
                rho = apply_gate_dm(&rho, g, None).unwrap();
            }
            let pure = DensityMatrix::from_pure(&sv);
            for (a, b) in rho.as_slice().iter().zip(pure.as_slice()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
        }

        #[test]
        fn noisy_gates_keep_a_valid_state(gates in proptest::collection::vec(arb_gate(4), 1..15)) {
            let noise = NoiseParams::new(0.05, 0.2, 0.0).unwrap();
            let mut rho = DensityMatrix::zero(4).unwrap();
            for g in &gates {
                rho.apply(g, Some(&noise)).unwrap();
            }
            prop_assert!((rho.trace() - c(1.0)).norm() < 1e-10);
            prop_assert!(rho.hermiticity_defect() < 1e-10);
        }
    }
}
