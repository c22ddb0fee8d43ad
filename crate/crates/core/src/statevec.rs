//! Pure-state container and bipartite entanglement analysis.
//!
//! Basis index bit `i` holds the value of qubit `i`; qubit 0 is the least
//! significant bit everywhere in this crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Largest register a [`StateVector`] may describe.
pub const MAX_QUBITS: usize = 30;

/// Tolerance on the squared norm of a state.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Reduced-spectrum eigenvalues below this are treated as exact zeros in the entropy.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Default threshold for counting Schmidt coefficients.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amplitudes` after checking its length and normalization.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sqr} differs from 1 by more than {NORM_TOLERANCE:e}"
            )));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales `amplitudes` to unit norm. Fails on the zero vector.
    pub fn from_unnormalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_real(n_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            n_qubits,
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = dim_of(n_qubits)?;
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Equal superposition `|+…+⟩`.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        let dim = dim_of(n_qubits)?;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(invalid("inner product of states with different qubit counts"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a 2×2 unitary `u` (row-major) to one qubit.
    pub fn apply_single_qubit(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(invalid(format!("qubit {qubit} out of range")));
        }
        let bit = 1usize << qubit;
        for lo in 0..self.amplitudes.len() {
            if lo & bit != 0 {
                continue;
            }
            let hi = lo | bit;
            let (x0, x1) = (self.amplitudes[lo], self.amplitudes[hi]);
            self.amplitudes[lo] = u[0][0] * x0 + u[0][1] * x1;
            self.amplitudes[hi] = u[1][0] * x0 + u[1][1] * x1;
        }
        Ok(())
    }
}

fn dim_of(n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 {
        return Err(invalid("a state needs at least one qubit"));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit state limit"
        )));
    }
    Ok(1usize << n_qubits)
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    let dim = dim_of(n_qubits)?;
    if len != dim {
        return Err(invalid(format!(
            "{len} amplitudes given for {n_qubits} qubits (expected {dim})"
        )));
    }
    Ok(())
}

/// A split of the register into subsystem A (bits set in `mask_a`) and its complement B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BiPartition {
    n_qubits: usize,
    mask_a: u64,
}

impl BiPartition {
    pub fn new(n_qubits: usize, mask_a: u64) -> Result<Self> {
        if !(2..=63).contains(&n_qubits) {
            return Err(invalid(format!("bipartition of {n_qubits} qubits")));
        }
        let full = (1u64 << n_qubits) - 1;
        if mask_a == 0 || mask_a >= full {
            return Err(invalid(format!(
                "mask {mask_a:#b} must select a proper non-empty subset of {n_qubits} qubits"
            )));
        }
        Ok(BiPartition { n_qubits, mask_a })
    }

    /// The first `n/2` qubits (lowest bits) against the rest.
    pub fn half(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, (1u64 << (n_qubits / 2)) - 1)
    }

    pub fn from_qubits(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &q in qubits {
            if q >= n_qubits {
                return Err(invalid(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            mask |= 1 << q;
        }
        Self::new(n_qubits, mask)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mask_a(&self) -> u64 {
        self.mask_a
    }

    pub fn mask_b(&self) -> u64 {
        ((1u64 << self.n_qubits) - 1) & !self.mask_a
    }

    pub fn size_a(&self) -> usize {
        self.mask_a.count_ones() as usize
    }

    pub fn size_b(&self) -> usize {
        self.n_qubits - self.size_a()
    }

    pub fn complement(&self) -> Self {
        BiPartition {
            n_qubits: self.n_qubits,
            mask_a: self.mask_b(),
        }
    }

    /// Representative of `{A, B}` that contains qubit 0 in A.
    pub fn canonical(&self) -> Self {
        if self.mask_a & 1 == 1 {
            *self
        } else {
            self.complement()
        }
    }

    /// Every unordered bipartition once: `2^(n-1) - 1` canonical masks.
    pub fn enumerate(n_qubits: usize) -> Result<Vec<Self>> {
        if !(2..=24).contains(&n_qubits) {
            return Err(invalid(format!(
                "enumerating bipartitions of {n_qubits} qubits is not supported"
            )));
        }
        let count = (1u64 << (n_qubits - 1)) - 1;
        Ok((0..count)
            .map(|j| BiPartition {
                n_qubits,
                mask_a: (j << 1) | 1,
            })
            .collect())
    }

    /// `count` distinct canonical bipartitions drawn uniformly with a fixed seed.
    pub fn sample(n_qubits: usize, count: usize, seed: u64) -> Result<Vec<Self>> {
        if !(2..=40).contains(&n_qubits) {
            return Err(invalid(format!(
                "sampling bipartitions of {n_qubits} qubits is not supported"
            )));
        }
        let total = (1u64 << (n_qubits - 1)) - 1;
        if count == 0 || count as u64 > total {
            return Err(invalid(format!(
                "cannot draw {count} distinct bipartitions out of {total}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picks: Vec<u64> = if total < (1 << 26) {
            index::sample(&mut rng, total as usize, count)
                .into_iter()
                .map(|j| j as u64)
                .collect()
        } else {
            use rand::Rng;
            let mut seen = std::collections::BTreeSet::new();
            while seen.len() < count {
                seen.insert(rng.random_range(0..total));
            }
            seen.into_iter().collect()
        };
        picks.sort_unstable();
        Ok(picks
            .into_iter()
            .map(|j| BiPartition {
                n_qubits,
                mask_a: (j << 1) | 1,
            })
            .collect())
    }
}

/// Spectrum, entropy and Schmidt rank of one side of a cut.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub spectrum: Vec<f64>,
    pub entropy_bits: f64,
    pub schmidt_rank: usize,
}

/// Positions of the set bits of `mask`, low to high.
fn bit_positions(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Maps a compact subsystem index onto the full basis index by depositing its bits.
fn deposit_table(positions: &[usize]) -> Vec<usize> {
    (0..1usize << positions.len())
        .map(|r| {
            positions
                .iter()
                .enumerate()
                .filter(|&(j, _)| r >> j & 1 == 1)
                .fold(0usize, |acc, (_, &p)| acc | 1 << p)
        })
        .collect()
}

fn check_partition(state: &StateVector, part: &BiPartition) -> Result<()> {
    if state.n_qubits != part.n_qubits {
        return Err(invalid(format!(
            "partition is over {} qubits but the state has {}",
            part.n_qubits, state.n_qubits
        )));
    }
    let norm_sqr = state.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidState(format!("state has squared norm {norm_sqr}")));
    }
    Ok(())
}

/// Amplitudes reshaped into a `smaller side × larger side` matrix.
fn reshape(state: &StateVector, part: &BiPartition) -> DMatrix<Complex64> {
    let (small, large) = if part.size_a() <= part.size_b() {
        (part.mask_a(), part.mask_b())
    } else {
        (part.mask_b(), part.mask_a())
    };
    let rows = deposit_table(&bit_positions(small));
    let cols = deposit_table(&bit_positions(large));
    let amps = state.amplitudes();
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| amps[rows[r] | cols[c]])
}

/// Eigenvalues of the reduced density matrix of A, descending.
///
/// They are the squared singular values of the amplitude matrix reshaped across
/// the cut, so the reduced density matrix itself is never formed.
pub fn reduced_spectrum(state: &StateVector, part: &BiPartition) -> Result<Vec<f64>> {
    check_partition(state, part)?;
    let m = reshape(state, part);
    let mut spectrum: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|&sv| (sv * sv).max(0.0))
        .collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    Ok(spectrum)
}

/// Base-2 von Neumann entropy of a probability spectrum.
///
/// A spectrum with a single eigenvalue above the floor is a product state and
/// gets exactly zero.
pub fn spectrum_entropy(spectrum: &[f64]) -> f64 {
    let kept: Vec<f64> = spectrum
        .iter()
        .copied()
        .filter(|&p| p > EIGENVALUE_FLOOR)
        .collect();
    if kept.len() <= 1 {
        return 0.0;
    }
    kept.iter().map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

pub fn entropy(state: &StateVector, part: &BiPartition) -> Result<f64> {
    Ok(spectrum_entropy(&reduced_spectrum(state, part)?))
}

/// Number of reduced-spectrum eigenvalues above `tol`.
pub fn schmidt_rank(state: &StateVector, part: &BiPartition, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid(format!("rank tolerance {tol} must lie in (0, 1)")));
    }
    Ok(reduced_spectrum(state, part)?
        .iter()
        .filter(|&&p| p > tol)
        .count())
}

pub fn entanglement(state: &StateVector, part: &BiPartition, tol: f64) -> Result<EntanglementReport> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid(format!("rank tolerance {tol} must lie in (0, 1)")));
    }
    let spectrum = reduced_spectrum(state, part)?;
    let entropy_bits = spectrum_entropy(&spectrum);
    let schmidt_rank = spectrum.iter().filter(|&&p| p > tol).count().max(1);
    Ok(EntanglementReport {
        spectrum,
        entropy_bits,
        schmidt_rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionExtremes {
    pub min_entropy: f64,
    pub min_partition: BiPartition,
    pub max_entropy: f64,
    pub max_partition: BiPartition,
}

/// Smallest and largest entropy over `partitions`; ties go to the earlier entry.
pub fn partition_extremes(state: &StateVector, partitions: &[BiPartition]) -> Result<PartitionExtremes> {
    if partitions.is_empty() {
        return Err(invalid("partition list is empty"));
    }
    let entropies = partitions
        .par_iter()
        .map(|p| entropy(state, p))
        .collect::<Result<Vec<_>>>()?;
    let mut ext = PartitionExtremes {
        min_entropy: entropies[0],
        min_partition: partitions[0],
        max_entropy: entropies[0],
        max_partition: partitions[0],
    };
    for (&e, p) in entropies.iter().zip(partitions).skip(1) {
        if e < ext.min_entropy {
            ext.min_entropy = e;
            ext.min_partition = *p;
        }
        if e > ext.max_entropy {
            ext.max_entropy = e;
            ext.max_partition = *p;
        }
    }
    Ok(ext)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        let h = 0.5f64.sqrt();
        StateVector::new(2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap()
    }

    fn w3() -> StateVector {
        let t = (1.0f64 / 3.0).sqrt();
        let mut amps = vec![c(0.0); 8];
        for i in [1, 2, 4] {
            amps[i] = c(t);
        }
        StateVector::new(3, amps).unwrap()
    }

    fn ghz(n: usize) -> StateVector {
        let h = 0.5f64.sqrt();
        let mut amps = vec![c(0.0); 1 << n];
        amps[0] = c(h);
        amps[(1 << n) - 1] = c(h);
        StateVector::new(n, amps).unwrap()
    }

    #[test]
    fn bell_spectrum_and_entropy() {
        let part = BiPartition::new(2, 0b01).unwrap();
        let spec = reduced_spectrum(&bell(), &part).unwrap();
        assert!((spec[0] - 0.5).abs() < 1e-12 && (spec[1] - 0.5).abs() < 1e-12);
        assert!((entropy(&bell(), &part).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(schmidt_rank(&bell(), &part, DEFAULT_RANK_TOL).unwrap(), 2);
    }

    #[test]
    fn product_state_is_unentangled() {
        let s = StateVector::basis(2, 0b10).unwrap();
        let part = BiPartition::new(2, 0b01).unwrap();
        let spec = reduced_spectrum(&s, &part).unwrap();
        assert!((spec[0] - 1.0).abs() < 1e-12);
        assert!(spec[1].abs() < 1e-12);
        assert_eq!(entropy(&s, &part).unwrap(), 0.0);
        assert_eq!(schmidt_rank(&s, &part, DEFAULT_RANK_TOL).unwrap(), 1);
    }

    #[test]
    fn w_state_single_qubit_cut() {
        let part = BiPartition::new(3, 0b001).unwrap();
        let spec = reduced_spectrum(&w3(), &part).unwrap();
        assert!((spec[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((spec[1] - 1.0 / 3.0).abs() < 1e-12);
        let expected = 3f64.log2() - 2.0 / 3.0;
        assert!((entropy(&w3(), &part).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.918296).abs() < 1e-6);
    }

    #[test]
    fn ghz_every_cut_has_one_bit() {
        let parts = BiPartition::enumerate(4).unwrap();
        assert_eq!(parts.len(), 7);
        let ext = partition_extremes(&ghz(4), &parts).unwrap();
        assert!((ext.min_entropy - 1.0).abs() < 1e-12);
        assert!((ext.max_entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_extremes_are_zero() {
        let s = StateVector::uniform(5).unwrap();
        let parts = BiPartition::sample(5, 6, 3).unwrap();
        let ext = partition_extremes(&s, &parts).unwrap();
        assert!(ext.min_entropy.abs() < 1e-12 && ext.max_entropy.abs() < 1e-12);
    }

    #[test]
    fn empty_partition_list_rejected() {
        let err = partition_extremes(&bell(), &[]).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::InvalidArgument);
    }

    #[test]
    fn mismatched_partition_rejected() {
        let part = BiPartition::new(3, 0b1).unwrap();
        assert_eq!(
            entropy(&bell(), &part).unwrap_err().kind(),
            crate::ErrorKind::InvalidArgument
        );
    }

    #[test]
    fn unnormalized_state_rejected() {
        let err = StateVector::new(1, vec![c(1.0), c(1.0)]).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::InvalidState);
        assert!(StateVector::new(2, vec![c(1.0)]).is_err());
    }

    #[test]
    fn partition_masks_validated() {
        assert!(BiPartition::new(3, 0).is_err());
        assert!(BiPartition::new(3, 0b111).is_err());
        assert!(BiPartition::new(3, 0b1000).is_err());
        let half = BiPartition::half(10).unwrap();
        assert_eq!(half.mask_a(), 0b11111);
        assert_eq!(half.complement().mask_a(), 0b1111100000);
        assert_eq!(half.complement().canonical(), half);
    }

    #[test]
    fn sampled_partitions_are_distinct_and_reproducible() {
        let a = BiPartition::sample(16, 64, 2024).unwrap();
        let b = BiPartition::sample(16, 64, 2024).unwrap();
        assert_eq!(a, b);
        let mut masks: Vec<u64> = a.iter().map(|p| p.mask_a()).collect();
        masks.dedup();
        assert_eq!(masks.len(), 64);
        assert!(a.iter().all(|p| p.mask_a() & 1 == 1));
    }

    #[test]
    fn rank_tolerance_validated() {
        let part = BiPartition::new(2, 1).unwrap();
        assert!(schmidt_rank(&bell(), &part, 0.0).is_err());
        assert!(schmidt_rank(&bell(), &part, 1.0).is_err());
    }
}
