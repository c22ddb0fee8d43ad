//! Exact Cover instances and the interpolated Hamiltonian `H(s) = (1-s) H0 + s Hp`.
//!
//! A clause over qubits `{i, j, l, ...}` is satisfied when exactly one of them is 1.
//! `Hp` is diagonal and counts violated clauses; `H0 = Σ d_i/2 (1 - σx_i)` where
//! `d_i` is the number of clauses containing qubit `i`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest register for which satisfying assignments are enumerated.
pub const MAX_ENUMERATION_QUBITS: usize = 24;

/// Restarts allowed before [`generate_instance`] gives up.
pub const RESTART_CAP: usize = 100_000;

/// Dimension above which the matrix-vector product is split across threads.
const PARALLEL_DIM: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    qubits: Vec<usize>,
    mask: u64,
}

impl Clause {
    /// Builds a clause from distinct qubit indices; they are stored sorted.
    pub fn new(qubits: &[usize]) -> Result<Self> {
        if !(3..=4).contains(&qubits.len()) {
            return Err(invalid(format!(
                "clause arity {} unsupported (expected 3 or 4)",
                qubits.len()
            )));
        }
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(format!("clause {qubits:?} repeats a qubit")));
        }
        if let Some(&q) = sorted.last().filter(|&&q| q >= 64) {
            return Err(invalid(format!("clause qubit {q} out of range")));
        }
        let mask = sorted.iter().fold(0u64, |m, &q| m | 1 << q);
        Ok(Clause {
            qubits: sorted,
            mask,
        })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Exactly one selected bit of `bits` is set.
    #[inline]
    pub fn is_satisfied_by(&self, bits: u64) -> bool {
        (bits & self.mask).count_ones() == 1
    }

    fn max_qubit(&self) -> usize {
        *self.qubits.last().expect("clauses are non-empty")
    }
}

/// An `n`-bit assignment; bit `i` is the value of qubit `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    n_qubits: usize,
    bits: u64,
}

impl Assignment {
    pub fn new(n_qubits: usize, bits: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 63 || bits >> n_qubits != 0 {
            return Err(invalid(format!("{bits:#b} is not a {n_qubits}-bit assignment")));
        }
        Ok(Assignment { n_qubits, bits })
    }

    /// Parses a string of `0`/`1` characters, qubit 0 first.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (i, ch) in text.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(invalid(format!("bad character {ch:?} in assignment {text:?}"))),
            }
        }
        Self::new(text.len(), bits)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_qubits {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn clause_satisfied(assignment: &Assignment, clause: &Clause) -> Result<bool> {
    if clause.max_qubit() >= assignment.n_qubits {
        return Err(invalid(format!(
            "clause {:?} addresses qubits beyond a {}-bit assignment",
            clause.qubits, assignment.n_qubits
        )));
    }
    Ok(clause.is_satisfied_by(assignment.bits))
}

fn check_enumerable(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_ENUMERATION_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "enumerating 2^{n_qubits} assignments exceeds the {MAX_ENUMERATION_QUBITS}-qubit guard"
        )));
    }
    Ok(())
}

/// Brute-force count of assignments satisfying every clause.
pub fn count_satisfying(clauses: &[Clause], n_qubits: usize) -> Result<u64> {
    check_enumerable(n_qubits)?;
    if let Some(c) = clauses.iter().find(|c| c.max_qubit() >= n_qubits) {
        return Err(invalid(format!("clause {:?} out of range for n = {n_qubits}", c.qubits)));
    }
    Ok((0..1u64 << n_qubits)
        .into_par_iter()
        .filter(|&b| clauses.iter().all(|c| c.is_satisfied_by(b)))
        .count() as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCoverInstance {
    n_qubits: usize,
    arity: usize,
    clauses: Vec<Clause>,
    assignment: Assignment,
    seed: u64,
}

/// On-disk JSON layout of an instance.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    k: usize,
    clauses: Vec<Vec<usize>>,
    assignment: String,
    seed: u64,
}

impl ExactCoverInstance {
    /// Validates a clause set by brute force: it must have exactly one satisfier.
    pub fn new(n_qubits: usize, arity: usize, clauses: Vec<Clause>, seed: u64) -> Result<Self> {
        if !(3..=4).contains(&arity) || n_qubits < arity {
            return Err(invalid(format!("need 3 <= k <= 4 and n >= k (n = {n_qubits}, k = {arity})")));
        }
        check_enumerable(n_qubits)?;
        if let Some(c) = clauses.iter().find(|c| c.arity() != arity) {
            return Err(invalid(format!("clause {:?} does not have arity {arity}", c.qubits)));
        }
        if let Some(c) = clauses.iter().find(|c| c.max_qubit() >= n_qubits) {
            return Err(invalid(format!("clause {:?} out of range for n = {n_qubits}", c.qubits)));
        }
        let satisfiers: Vec<u64> = (0..1u64 << n_qubits)
            .into_par_iter()
            .filter(|&b| clauses.iter().all(|c| c.is_satisfied_by(b)))
            .collect();
        if satisfiers.len() != 1 {
            return Err(Error::InvalidState(format!(
                "instance has {} satisfying assignments, expected exactly one",
                satisfiers.len()
            )));
        }
        Ok(ExactCoverInstance {
            n_qubits,
            arity,
            clauses,
            assignment: Assignment::new(n_qubits, satisfiers[0])?,
            seed,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn assignment(&self) -> Assignment {
        self.assignment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            n: self.n_qubits,
            k: self.arity,
            clauses: self.clauses.iter().map(|c| c.qubits.clone()).collect(),
            assignment: self.assignment.to_string(),
            seed: self.seed,
        };
        let mut text = serde_json::to_string(&file).expect("instance serializes");
        text.push('\n');
        text
    }

    /// Parses and re-verifies an instance, including its stored assignment.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let clauses = file
            .clauses
            .iter()
            .map(|q| Clause::new(q))
            .collect::<Result<Vec<_>>>()?;
        let inst = Self::new(file.n, file.k, clauses, file.seed)?;
        let stored = Assignment::parse(&file.assignment)?;
        if stored != inst.assignment {
            return Err(Error::InvalidState(format!(
                "stored assignment {} differs from the unique satisfier {}",
                stored, inst.assignment
            )));
        }
        Ok(inst)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Adds uniformly random distinct clauses until exactly one assignment survives,
/// starting over whenever none does.
///
/// A run that exhausts every possible clause while several assignments still
/// survive also counts as a restart.
pub fn generate_instance(n_qubits: usize, arity: usize, seed: u64) -> Result<ExactCoverInstance> {
    if !(3..=4).contains(&arity) || n_qubits < arity {
        return Err(invalid(format!("need 3 <= k <= 4 and n >= k (n = {n_qubits}, k = {arity})")));
    }
    check_enumerable(n_qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let available = binomial(n_qubits, arity);

    for _ in 0..RESTART_CAP {
        let mut clauses: Vec<Clause> = Vec::new();
        let mut used: HashSet<u64> = HashSet::new();
        let mut survivors: Vec<u64> = (0..1u64 << n_qubits).collect();
        while survivors.len() > 1 && used.len() < available {
            let clause = loop {
                let mut picked = index::sample(&mut rng, n_qubits, arity).into_vec();
                picked.sort_unstable();
                let clause = Clause::new(&picked)?;
                if !used.contains(&clause.mask) {
                    break clause;
                }
            };
            used.insert(clause.mask);
            survivors.retain(|&b| clause.is_satisfied_by(b));
            clauses.push(clause);
        }
        if survivors.len() == 1 {
            return Ok(ExactCoverInstance {
                n_qubits,
                arity,
                clauses,
                assignment: Assignment::new(n_qubits, survivors[0])?,
                seed,
            });
        }
    }
    Err(Error::GenerationCap {
        n: n_qubits,
        k: arity,
        restarts: RESTART_CAP,
    })
}

/// Number of violated clauses for every basis state.
pub fn problem_diagonal(instance: &ExactCoverInstance) -> Vec<u16> {
    let clauses = instance.clauses();
    (0..1u64 << instance.n_qubits())
        .into_par_iter()
        .map(|b| clauses.iter().filter(|c| !c.is_satisfied_by(b)).count() as u16)
        .collect()
}

/// Clause membership count per qubit.
pub fn degrees(instance: &ExactCoverInstance) -> Vec<u32> {
    let mut d = vec![0u32; instance.n_qubits()];
    for c in instance.clauses() {
        for &q in c.qubits() {
            d[q] += 1;
        }
    }
    d
}

/// `H(s)` applied implicitly; no `2^n × 2^n` matrix is formed.
#[derive(Debug, Clone)]
pub struct InterpolatedHamiltonian {
    n_qubits: usize,
    problem_diagonal: Arc<[u16]>,
    degrees: Arc<[u32]>,
    s: f64,
}

impl InterpolatedHamiltonian {
    pub fn new(instance: &ExactCoverInstance, s: f64) -> Result<Self> {
        check_s(s)?;
        Ok(InterpolatedHamiltonian {
            n_qubits: instance.n_qubits(),
            problem_diagonal: problem_diagonal(instance).into(),
            degrees: degrees(instance).into(),
            s,
        })
    }

    /// Same operator terms at a different `s`.
    pub fn at(&self, s: f64) -> Result<Self> {
        check_s(s)?;
        Ok(InterpolatedHamiltonian { s, ..self.clone() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.problem_diagonal.len()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn problem_diagonal(&self) -> &[u16] {
        &self.problem_diagonal
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// `y = (wp·Hp + w0·H0) x` for real vectors.
    pub fn apply_combination_real(&self, wp: f64, w0: f64, x: &[f64], y: &mut [f64]) {
        let half: Vec<f64> = self.degrees.iter().map(|&d| 0.5 * d as f64).collect();
        let shift = w0 * half.iter().sum::<f64>();
        let diag = &self.problem_diagonal;
        let row = |b: usize| {
            let mut acc = (wp * diag[b] as f64 + shift) * x[b];
            for (i, &h) in half.iter().enumerate() {
                acc -= w0 * h * x[b ^ (1 << i)];
            }
            acc
        };
        if y.len() >= PARALLEL_DIM {
            y.par_iter_mut().enumerate().for_each(|(b, yb)| *yb = row(b));
        } else {
            y.iter_mut().enumerate().for_each(|(b, yb)| *yb = row(b));
        }
    }

    /// `y = H(s) x` for real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        self.apply_combination_real(self.s, 1.0 - self.s, x, y)
    }

    fn apply_combination(&self, wp: f64, w0: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(invalid(format!(
                "vector of length {} does not match dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        let mut out_re = vec![0.0; v.len()];
        let mut out_im = vec![0.0; v.len()];
        self.apply_combination_real(wp, w0, &re, &mut out_re);
        self.apply_combination_real(wp, w0, &im, &mut out_im);
        Ok(out_re
            .into_iter()
            .zip(out_im)
            .map(|(r, i)| Complex64::new(r, i))
            .collect())
    }

    /// `H(s) v`. The result is generally not normalized, so it is returned as raw amplitudes.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_combination(self.s, 1.0 - self.s, v)
    }

    /// `dH/ds v = (Hp - H0) v`.
    pub fn apply_derivative(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_combination(1.0, -1.0, v)
    }

    /// Dense copy of `H(s)`; only for small registers.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.n_qubits > 13 {
            return Err(Error::ResourceLimit(format!(
                "dense Hamiltonian for {} qubits is too large",
                self.n_qubits
            )));
        }
        let dim = self.dim();
        let s = self.s;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        let shift: f64 = self.degrees.iter().map(|&d| 0.5 * d as f64).sum();
        for b in 0..dim {
            m[(b, b)] = s * self.problem_diagonal[b] as f64 + (1.0 - s) * shift;
            for (i, &d) in self.degrees.iter().enumerate() {
                m[(b ^ (1 << i), b)] -= (1.0 - s) * 0.5 * d as f64;
            }
        }
        Ok(m)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("interpolation parameter s = {s} outside [0, 1]")));
    }
    Ok(())
}
