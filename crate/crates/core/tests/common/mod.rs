//! Dense-matrix reference implementations, built from scratch so that they
//! share no code with the simulator.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

pub const A1: &[(f64, &str)] = &[(1.0, "III"), (0.25, "IZI"), (0.15, "IIH")];
pub const A2: &[(f64, &str)] = &[(1.0, "ZIII"), (0.15, "IIZI"), (0.5, "IIIH")];
pub const A3: &[(f64, &str)] = &[(1.0, "HIIII"), (0.25, "IIZII"), (0.5, "IIIXI")];
pub const INSTANCES: [(&str, &[(f64, &str)]); 3] = [("A1", A1), ("A2", A2), ("A3", A3)];

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn single(label: char) -> DMatrix<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b, cc, d) = match label {
        'I' => (c(1.0), c(0.0), c(0.0), c(1.0)),
        'X' => (c(0.0), c(1.0), c(1.0), c(0.0)),
        'Y' => (c(0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), c(0.0)),
        'Z' => (c(1.0), c(0.0), c(0.0), c(-1.0)),
        'H' => (c(s), c(s), c(s), c(-s)),
        other => panic!("unknown label {other}"),
    };
    DMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// Leftmost label is the most significant tensor factor.
pub fn kron_all(factors: &[DMatrix<C>]) -> DMatrix<C> {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

pub fn word(label: &str) -> DMatrix<C> {
    kron_all(&label.chars().map(single).collect::<Vec<_>>())
}

pub fn operator(terms: &[(f64, &str)]) -> DMatrix<C> {
    terms.iter().map(|(k, w)| word(w) * c(*k)).reduce(|a, b| a + b).unwrap()
}

fn ry(angle: f64) -> DMatrix<C> {
    let (s, co) = (angle / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

/// CNOT as a permutation of basis states.
fn cx(n: usize, control: usize, target: usize) -> DMatrix<C> {
    let dim = 1 << n;
    let cbit = 1 << (n - 1 - control);
    let tbit = 1 << (n - 1 - target);
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let j = if i & cbit != 0 { i ^ tbit } else { i };
        m[(j, i)] = c(1.0);
    }
    m
}

/// The layered Ry/CX ansatz applied to |0…0⟩.
pub fn ansatz_state(n: usize, depth: usize, theta: &[f64]) -> DVector<C> {
    assert_eq!(theta.len(), n * (depth + 1));
    let mut psi = DVector::zeros(1 << n);
    psi[0] = c(1.0);
    let layer = |l: usize| kron_all(&(0..n).map(|q| ry(theta[l * n + q])).collect::<Vec<_>>());
    psi = layer(0) * psi;
    for block in 0..depth {
        let mut i = block % 2;
        while i + 1 < n {
            psi = cx(n, i, i + 1) * psi;
            i += 2;
        }
        psi = layer(block + 1) * psi;
    }
    psi
}

/// |0⟩⟨0| on qubit j, identity elsewhere.
fn zero_projector(n: usize, j: usize) -> DMatrix<C> {
    let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    kron_all(
        &(0..n)
            .map(|q| if q == j { p0.clone() } else { single('I') })
            .collect::<Vec<_>>(),
    )
}

/// H_L = A†U(I − (1/n)Σⱼ|0ⱼ⟩⟨0ⱼ| ⊗ 1)U†A with U = H^⊗n.
pub fn local_hamiltonian(terms: &[(f64, &str)]) -> DMatrix<C> {
    let n = terms[0].1.len();
    let a = operator(terms);
    let u = word(&"H".repeat(n));
    let dim = 1 << n;
    let mut inner = DMatrix::<C>::identity(dim, dim);
    for j in 0..n {
        inner -= zero_projector(n, j) * c(1.0 / n as f64);
    }
    a.adjoint() * &u * inner * u.adjoint() * a
}

/// ⟨x|H_L|x⟩ / ⟨x|A†A|x⟩.
pub fn local_cost(terms: &[(f64, &str)], depth: usize, theta: &[f64]) -> f64 {
    let n = terms[0].1.len();
    let x = ansatz_state(n, depth, theta);
    let a = operator(terms);
    let num = (x.adjoint() * local_hamiltonian(terms) * &x)[(0, 0)];
    let den = (x.adjoint() * a.adjoint() * a * &x)[(0, 0)];
    (num / den).re
}

/// ⟨φ|W|φ⟩ for φ the ansatz state.
pub fn expectation(n: usize, depth: usize, theta: &[f64], w: &DMatrix<C>) -> C {
    let x = ansatz_state(n, depth, theta);
    (x.adjoint() * w * &x)[(0, 0)]
}

/// Deterministic θ vectors in [0, 2π) from a tiny LCG, independent of the
/// crate's RNG plumbing.
pub fn thetas(count: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..count)
        .map(|_| (0..len).map(|_| next() * std::f64::consts::TAU).collect())
        .collect()
}
