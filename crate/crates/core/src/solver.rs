//! Ground and first excited states of `H(s)`, s-grid sweeps and critical points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::exactcover::{ExactCoverInstance, InterpolatedHamiltonian};
use crate::fmt::sig_digits;
use crate::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::statevec::{entropy, BiPartition, StateVector};

/// Registers up to this size use dense diagonalization under [`SolveMethod::Auto`].
pub const AUTO_DENSE_MAX_QUBITS: usize = 6;

/// Largest register the Krylov path accepts.
pub const MAX_SOLVER_QUBITS: usize = 24;

/// `e1 - e0` below this marks a degenerate ground state.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    pub method: SolveMethod,
    pub cycle_len: usize,
    pub max_cycles: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            seed: 0x5eed,
            method: SolveMethod::Auto,
            cycle_len: 100,
            max_cycles: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowestTwo {
    pub e0: f64,
    pub e1: f64,
    /// Sign fixed so that the amplitudes sum to a nonnegative number.
    pub ground: StateVector,
    pub excited: StateVector,
    pub degenerate: bool,
    pub residuals: [f64; 2],
}

impl LowestTwo {
    pub fn gap(&self) -> f64 {
        self.e1 - self.e0
    }
}

fn to_state(n_qubits: usize, v: &[f64]) -> Result<StateVector> {
    StateVector::from_unnormalized(
        n_qubits,
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
}

fn fix_ground_sign(v: &mut [f64]) {
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn fix_excited_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(h: &InterpolatedHamiltonian, e: f64, v: &[f64]) -> f64 {
    let mut w = vec![0.0; v.len()];
    h.apply_real(v, &mut w);
    w.iter()
        .zip(v)
        .map(|(hv, x)| (hv - e * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Two smallest eigenvalues of `H(s)` with their eigenvectors.
pub fn lowest_two(h: &InterpolatedHamiltonian, opts: &SolverOptions) -> Result<LowestTwo> {
    let n = h.n_qubits();
    if n > MAX_SOLVER_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{n} qubits exceeds the {MAX_SOLVER_QUBITS}-qubit solver limit"
        )));
    }
    if n < 2 {
        return Err(invalid("need at least two qubits for two eigenpairs"));
    }
    let method = match opts.method {
        SolveMethod::Auto if n <= AUTO_DENSE_MAX_QUBITS => SolveMethod::Dense,
        SolveMethod::Auto => SolveMethod::Lanczos,
        m => m,
    };
    let (e0, mut v0, e1, mut v1) = match method {
        SolveMethod::Dense => dense_lowest_two(h)?,
        _ => krylov_lowest_two(h, opts)?,
    };
    fix_ground_sign(&mut v0);
    fix_excited_sign(&mut v1);
    let residuals = [residual(h, e0, &v0), residual(h, e1, &v1)];
    Ok(LowestTwo {
        e0,
        e1,
        ground: to_state(n, &v0)?,
        excited: to_state(n, &v1)?,
        degenerate: (e1 - e0).abs() < DEGENERACY_TOL,
        residuals,
    })
}

type Pairs = (f64, Vec<f64>, f64, Vec<f64>);

fn dense_lowest_two(h: &InterpolatedHamiltonian) -> Result<Pairs> {
    let m = h.to_dense()?;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let column = |i: usize| eig.eigenvectors.column(i).iter().copied().collect::<Vec<f64>>();
    Ok((
        eig.eigenvalues[order[0]],
        column(order[0]),
        eig.eigenvalues[order[1]],
        column(order[1]),
    ))
}

fn krylov_lowest_two(h: &InterpolatedHamiltonian, opts: &SolverOptions) -> Result<Pairs> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<f64> = (0..h.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let lopts = LanczosOptions {
        tol: opts.tol,
        cycle_len: opts.cycle_len,
        max_cycles: opts.max_cycles,
    };
    let op = |x: &[f64], y: &mut [f64]| h.apply_real(x, y);
    // the ground state is nondegenerate (irreducible stoquastic for s < 1,
    // unique satisfier at s = 1), so one sequence holds both levels
    let mut pairs = lowest_eigenpairs(op, &start, &[], 2, &lopts)?.into_iter();
    let ground = pairs.next().expect("two pairs requested");
    let excited = pairs.next().expect("two pairs requested");
    Ok((ground.value, ground.vector, excited.value, excited.vector))
}

/// `|⟨excited| (Hp − H0) |ground⟩|`, the s-derivative matrix element of `H(s)`.
pub fn h10(ground: &StateVector, excited: &StateVector, h: &InterpolatedHamiltonian) -> Result<f64> {
    if ground.dim() != h.dim() || excited.dim() != h.dim() {
        return Err(invalid("state dimension does not match the Hamiltonian"));
    }
    let overlap = ground.inner(excited)?.norm();
    if overlap > 1e-6 {
        return Err(invalid(format!(
            "ground and excited states are not orthogonal (|overlap| = {overlap:.3e})"
        )));
    }
    let dg = h.apply_derivative(ground.amplitudes())?;
    Ok(excited
        .amplitudes()
        .iter()
        .zip(&dg)
        .map(|(e, d)| e.conj() * d)
        .sum::<Complex64>()
        .norm())
}

/// Uniform grid `0, step, 2·step, …, 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SGrid {
    step: f64,
    points: Vec<f64>,
}

impl SGrid {
    /// `1/step` must be an integer.
    pub fn uniform(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(invalid(format!("grid step {step} must lie in (0, 1]")));
        }
        let intervals = (1.0 / step).round();
        if (intervals * step - 1.0).abs() > 1e-9 || intervals > 1e7 {
            return Err(invalid(format!("grid step {step} does not divide [0, 1] evenly")));
        }
        let intervals = intervals as usize;
        Ok(SGrid {
            step,
            points: (0..=intervals).map(|i| i as f64 / intervals as f64).collect(),
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub entropy_bits: f64,
    pub h10_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepProfile {
    pub instance_id: String,
    pub n_qubits: usize,
    pub records: Vec<SweepRecord>,
    pub s_min_gap: f64,
    pub s_max_entropy: f64,
    pub min_gap: f64,
    pub max_entropy: f64,
    /// Grid points where the lowest two levels were within [`DEGENERACY_TOL`].
    pub degenerate_at: Vec<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "s,e0,e1,gap,entropy,h10";

impl SweepProfile {
    /// Builds a profile from records, locating the on-grid extrema.
    pub fn from_records(instance_id: impl Into<String>, n_qubits: usize, records: Vec<SweepRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(invalid("a sweep profile needs at least one record"));
        }
        let mut profile = SweepProfile {
            instance_id: instance_id.into(),
            n_qubits,
            records,
            s_min_gap: 0.0,
            s_max_entropy: 0.0,
            min_gap: 0.0,
            max_entropy: 0.0,
            degenerate_at: Vec::new(),
        };
        let (s_gap, s_ent) = critical_points(&profile);
        profile.s_min_gap = s_gap;
        profile.s_max_entropy = s_ent;
        profile.min_gap = profile.records.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
        profile.max_entropy = profile
            .records
            .iter()
            .map(|r| r.entropy_bits)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(profile)
    }

    /// `max |H10| / min_gap²` over the grid: the adiabatic condition with `s` as the clock.
    pub fn adiabatic_ratio(&self) -> f64 {
        let max_h10 = self.records.iter().map(|r| r.h10_abs).fold(0.0, f64::max);
        max_h10 / (self.min_gap * self.min_gap)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let cols = [r.s, r.e0, r.e1, r.gap, r.entropy_bits, r.h10_abs];
            let line: Vec<String> = cols.iter().map(|&x| sig_digits(x, 12)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(instance_id: impl Into<String>, n_qubits: usize, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == SWEEP_CSV_HEADER => {}
            other => return Err(invalid(format!("unexpected sweep CSV header {other:?}"))),
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| invalid(format!("row {}: {e}", i + 2)))?;
            if vals.len() != 6 {
                return Err(invalid(format!("row {} has {} columns", i + 2, vals.len())));
            }
            records.push(SweepRecord {
                s: vals[0],
                e0: vals[1],
                e1: vals[2],
                gap: vals[3],
                entropy_bits: vals[4],
                h10_abs: vals[5],
            });
        }
        Self::from_records(instance_id, n_qubits, records)
    }
}

/// Solves `H(s)` at every grid point and records gap, entropy and `|H10|`.
pub fn sweep(
    instance: &ExactCoverInstance,
    grid: &SGrid,
    part: &BiPartition,
    opts: &SolverOptions,
) -> Result<SweepProfile> {
    if part.n_qubits() != instance.n_qubits() {
        return Err(invalid("partition and instance disagree on the qubit count"));
    }
    let base = InterpolatedHamiltonian::new(instance, 0.0)?;
    let solved = grid
        .points()
        .par_iter()
        .map(|&s| {
            let h = base.at(s)?;
            let pair = lowest_two(&h, opts)?;
            let record = SweepRecord {
                s,
                e0: pair.e0,
                e1: pair.e1,
                gap: pair.gap(),
                entropy_bits: entropy(&pair.ground, part)?,
                h10_abs: h10(&pair.ground, &pair.excited, &h)?,
            };
            Ok((record, pair.degenerate))
        })
        .collect::<Result<Vec<_>>>()?;
    let degenerate_at = solved.iter().filter(|(_, d)| *d).map(|(r, _)| r.s).collect();
    let records = solved.into_iter().map(|(r, _)| r).collect();
    let id = format!("n{}-k{}-seed{}", instance.n_qubits(), instance.arity(), instance.seed());
    let mut profile = SweepProfile::from_records(id, instance.n_qubits(), records)?;
    profile.degenerate_at = degenerate_at;
    Ok(profile)
}

/// On-grid `(argmin gap, argmax entropy)`; ties resolve to the smaller `s`.
pub fn critical_points(profile: &SweepProfile) -> (f64, f64) {
    let first = &profile.records[0];
    let (mut s_gap, mut best_gap) = (first.s, first.gap);
    let (mut s_ent, mut best_ent) = (first.s, first.entropy_bits);
    for r in &profile.records[1..] {
        if r.gap < best_gap {
            best_gap = r.gap;
            s_gap = r.s;
        }
        if r.entropy_bits > best_ent {
            best_ent = r.entropy_bits;
            s_ent = r.s;
        }
    }
    (s_gap, s_ent)
}
