#![allow(dead_code)]

use entscale::exactcover::{generate_instance, ExactCoverInstance};
use entscale::num_complex::Complex64;
use entscale::solver::{sweep, SGrid, SolverOptions, SweepProfile};
use entscale::{BiPartition, StateVector};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn embed(op: &DMatrix<f64>, qubit: usize, n: usize) -> DMatrix<f64> {
    // qubit 0 is the least significant bit, i.e. the rightmost tensor factor
    let left = DMatrix::<f64>::identity(1 << (n - 1 - qubit), 1 << (n - 1 - qubit));
    let right = DMatrix::<f64>::identity(1 << qubit, 1 << qubit);
    left.kronecker(op).kronecker(&right)
}

/// `H(s)` assembled from Pauli-X and number-operator tensor products.
pub fn pauli_hamiltonian(inst: &ExactCoverInstance, s: f64) -> DMatrix<f64> {
    pauli_combination(inst, s, 1.0 - s)
}

/// `wp·Hp + w0·H0` with `H0 = Σ_i d_i (1 - σx_i)/2` and `Hp = Σ_c (1 - one-hot projector on c)`.
pub fn pauli_combination(inst: &ExactCoverInstance, wp: f64, w0: f64) -> DMatrix<f64> {
    let n = inst.n_qubits();
    let dim = 1 << n;
    let id = DMatrix::<f64>::identity(dim, dim);
    let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let p0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let p1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);

    let mut hp = DMatrix::<f64>::zeros(dim, dim);
    let mut degree = vec![0usize; n];
    for clause in inst.clauses() {
        let mut one_hot = DMatrix::<f64>::zeros(dim, dim);
        for &j in clause.qubits() {
            degree[j] += 1;
            let mut term = id.clone();
            for &l in clause.qubits() {
                term *= embed(if l == j { &p1 } else { &p0 }, l, n);
            }
            one_hot += term;
        }
        hp += &id - one_hot;
    }
    let mut h0 = DMatrix::<f64>::zeros(dim, dim);
    for (i, &d) in degree.iter().enumerate() {
        h0 += (&id - embed(&x, i, n)) * (0.5 * d as f64);
    }
    hp * wp + h0 * w0
}

pub fn random_complex(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    StateVector::from_unnormalized(n, random_complex(rng, 1 << n)).unwrap()
}

/// Random subsystem mask with both sides nonempty.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> BiPartition {
    let mask = rng.random_range(1..(1u64 << n) - 1);
    BiPartition::new(n, mask).unwrap()
}

/// ρ_A by explicit summation over the B indices, eigenvalues sorted descending.
pub fn explicit_spectrum(st: &StateVector, part: &BiPartition) -> Vec<f64> {
    let n = st.n_qubits();
    let a_bits: Vec<usize> = (0..n).filter(|q| part.mask_a() >> q & 1 == 1).collect();
    let b_bits: Vec<usize> = (0..n).filter(|q| part.mask_a() >> q & 1 == 0).collect();
    let scatter = |bits: &[usize], v: usize| {
        bits.iter().enumerate().fold(0usize, |acc, (i, &q)| acc | ((v >> i & 1) << q))
    };
    let da = 1 << a_bits.len();
    let db = 1 << b_bits.len();
    let amps = st.amplitudes();
    let rho = DMatrix::<Complex64>::from_fn(da, da, |i, j| {
        (0..db)
            .map(|b| {
                let bb = scatter(&b_bits, b);
                amps[scatter(&a_bits, i) | bb] * amps[scatter(&a_bits, j) | bb].conj()
            })
            .sum()
    });
    let mut ev: Vec<f64> = rho.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Sweeps `count` generated instances (seeds `seed_base..`) on the 0.01 grid, half partition.
pub fn ensemble(n: usize, k: usize, count: usize, seed_base: u64) -> Vec<SweepProfile> {
    let grid = SGrid::uniform(0.01).unwrap();
    let part = BiPartition::half(n).unwrap();
    let opts = SolverOptions::default();
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let inst = generate_instance(n, k, seed_base + i).unwrap();
            sweep(&inst, &grid, &part, &opts).unwrap()
        })
        .collect()
}
