//! Closed-form entanglement of the adiabatic Grover ground state.
//!
//! `H(s) = (1-s)(I - |u⟩⟨u|) + s(I - |x0⟩⟨x0|)` with `|u⟩` the uniform superposition.
//! The ground state is `a|x0⟩ + b Σ_{x≠x0} |x⟩` with `a = α b`, and tracing out
//! any `n/2` qubits leaves a rank-2 reduced density matrix with diagonal entry
//! `A` on the marked state, `B` on the marked row/column and `C` elsewhere.
//!
//! Everything is evaluated in terms of `r = α / 2^{n/2}` and
//! `D = (α² + 2ⁿ - 1) / 2ⁿ`. With those, the eigenvalues come out as
//!
//! ```text
//! λ+ λ- = [(1 - 2^{-n/2})(r - 2^{-n/2}) / D]²
//! λ+ - λ- = (r + 1 - 2^{-n/2}) √((r - 1 + 2^{-n/2})² + 4(2^{-n/2} - 2^{-n})) / D
//! ```
//!
//! which contain no subtractions of nearly equal quantities, so the chain stays
//! accurate at `s = 0.5` and for registers far beyond double-precision `2ⁿ`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fmt::sig_digits;
use crate::statevec::StateVector;

/// Largest register accepted by the closed-form functions.
pub const MAX_ANALYTIC_QUBITS: usize = 1000;

/// Largest register [`numeric_state`] will materialize.
pub const MAX_NUMERIC_QUBITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverPoint {
    pub n_qubits: usize,
    pub s: f64,
    pub e_minus: f64,
    /// Ratio of the marked amplitude to every other amplitude; infinite at `s = 1`.
    pub alpha: f64,
    /// Amplitude on each unmarked basis state.
    pub b: f64,
    /// Reduced density matrix entry on the marked state.
    pub entry_a: f64,
    /// Entries coupling the marked state to the rest.
    pub entry_b: f64,
    /// Entries among unmarked states.
    pub entry_c: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub entropy_bits: f64,
    /// Set at `s = 1`, where `α` diverges and the limit values are used.
    pub limit: bool,
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("s = {s} outside [0, 1]")));
    }
    Ok(())
}

fn check_n(n: usize, even: bool) -> Result<()> {
    if n == 0 || (even && (n < 2 || n % 2 == 1)) {
        return Err(invalid(format!(
            "n = {n}: the half-register cut needs an even qubit count >= 2"
        )));
    }
    if n > MAX_ANALYTIC_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "n = {n} exceeds the {MAX_ANALYTIC_QUBITS}-qubit analytic range"
        )));
    }
    Ok(())
}

fn pow2_neg(n: usize) -> f64 {
    (-(n as f64)).exp2()
}

/// `√((1-2s)² + 4·2⁻ⁿ s(1-s))`.
fn sqrt_disc(inv_n: f64, s: f64) -> f64 {
    ((1.0 - 2.0 * s).powi(2) + 4.0 * inv_n * s * (1.0 - s)).sqrt()
}

/// Ground-state energy `E₋(s) = ½(1 - √((1-2s)² + 4·2⁻ⁿ s(1-s)))`.
///
/// Evaluated as `2s(1-s)(1-2⁻ⁿ) / (1 + √…)`. Odd `n` is fine here; only the
/// reduced-matrix chain needs an even register.
pub fn ground_energy(n: usize, s: f64) -> Result<f64> {
    check_n(n, false)?;
    check_s(s)?;
    let inv_n = pow2_neg(n);
    Ok(2.0 * s * (1.0 - s) * (1.0 - inv_n) / (1.0 + sqrt_disc(inv_n, s)))
}

fn binary_entropy(p: f64, q: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    (term(p) + term(q)).clamp(0.0, 1.0)
}

pub fn point(n: usize, s: f64) -> Result<GroverPoint> {
    check_n(n, true)?;
    check_s(s)?;
    let e_minus = ground_energy(n, s)?;
    if s == 1.0 {
        return Ok(GroverPoint {
            n_qubits: n,
            s,
            e_minus,
            alpha: f64::INFINITY,
            b: 0.0,
            entry_a: 1.0,
            entry_b: 0.0,
            entry_c: 0.0,
            lambda_plus: 1.0,
            lambda_minus: 0.0,
            entropy_bits: 0.0,
            limit: true,
        });
    }
    let inv_d = pow2_neg(n / 2);
    let inv_n = inv_d * inv_d;
    let root = sqrt_disc(inv_n, s);
    // 1 - 2s + √disc, rewritten for s > 1/2 where its two terms nearly cancel
    let g = if s > 0.5 {
        4.0 * s * (1.0 - s) * inv_n / (root + (2.0 * s - 1.0))
    } else {
        (1.0 - 2.0 * s) + root
    };
    // α = (1 - E)/(1 - E - s) and 1 - E - s = (1-s)(g + 2s·2⁻ⁿ)/(1 + √disc)
    let r = (1.0 - e_minus) * (1.0 + root) * inv_d / ((1.0 - s) * (g + 2.0 * s * inv_n));
    let norm = r * r + 1.0 - inv_n;

    let entry_a = (r * r + inv_d - inv_n) / norm;
    let entry_b = (r * inv_d + inv_d - inv_n) / norm;
    let entry_c = inv_d / norm;

    let spread = (r + 1.0 - inv_d)
        * ((r - 1.0 + inv_d).powi(2) + 4.0 * (inv_d - inv_n)).sqrt()
        / norm;
    let lambda_plus = 0.5 * (1.0 + spread.min(1.0));
    let product = ((1.0 - inv_d) * (r - inv_d) / norm).powi(2);
    let lambda_minus = product / lambda_plus;

    Ok(GroverPoint {
        n_qubits: n,
        s,
        e_minus,
        alpha: r / inv_d,
        b: inv_d / norm.sqrt(),
        entry_a,
        entry_b,
        entry_c,
        lambda_plus,
        lambda_minus,
        entropy_bits: binary_entropy(lambda_plus, lambda_minus),
        limit: false,
    })
}

pub fn entropy_curve(n: usize, s_grid: &[f64]) -> Result<Vec<f64>> {
    s_grid
        .iter()
        .map(|&s| point(n, s).map(|p| p.entropy_bits))
        .collect()
}

/// Large-`n` approximation `1 - (4/ln 2)·2^{-n/2}` for the entropy at `s = 0.5`.
///
/// The exact entropy approaches 1 as `1 - (2/ln 2)·2^{-n/2}`, so the deficit
/// predicted here is twice the true one.
pub fn asymptotic_entropy(n: usize) -> Result<f64> {
    check_n(n, true)?;
    Ok(1.0 - 4.0 / std::f64::consts::LN_2 * pow2_neg(n / 2))
}

/// The ground state as an explicit vector with the marked state at `marked`.
pub fn numeric_state(n: usize, s: f64, marked: usize) -> Result<StateVector> {
    check_n(n, true)?;
    check_s(s)?;
    if n > MAX_NUMERIC_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{n} qubits exceeds the {MAX_NUMERIC_QUBITS}-qubit numeric limit"
        )));
    }
    if marked >= 1 << n {
        return Err(invalid(format!("marked state {marked} out of range")));
    }
    let p = point(n, s)?;
    if p.limit {
        return StateVector::basis(n, marked);
    }
    let a = p.alpha * p.b;
    let mut amps = vec![Complex64::new(p.b, 0.0); 1 << n];
    amps[marked] = Complex64::new(a, 0.0);
    StateVector::from_unnormalized(n, amps)
}

pub const CURVE_CSV_HEADER: &str = "s,e_minus,lambda_plus,lambda_minus,entropy";
pub const SATURATION_CSV_HEADER: &str = "n,entropy_at_half,asymptote";

pub fn curve_csv(n: usize, s_grid: &[f64]) -> Result<String> {
    let mut out = format!("{CURVE_CSV_HEADER}\n");
    for &s in s_grid {
        let p = point(n, s)?;
        let cols = [p.s, p.e_minus, p.lambda_plus, p.lambda_minus, p.entropy_bits];
        out.push_str(&cols.iter().map(|&x| sig_digits(x, 12)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn saturation_csv(ns: &[usize]) -> Result<String> {
    let mut out = format!("{SATURATION_CSV_HEADER}\n");
    for &n in ns {
        let e = point(n, 0.5)?.entropy_bits;
        let asym = asymptotic_entropy(n)?;
        out.push_str(&format!("{n},{},{}\n", sig_digits(e, 12), sig_digits(asym, 12)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from a 60-digit evaluation of the textbook formulas
    const ENTROPY_REF: &[(usize, f64, f64)] = &[
        (2, 0.01, 0.000_119_805_573_741_015_94),
        (2, 0.5, 0.187_298_598_568_772_45),
        (4, 0.5, 0.468_995_593_589_281_2),
        (8, 0.5, 0.833_764_907_210_665),
        (8, 0.99, 8.169_531_988_101_587e-6),
        (10, 0.37, 0.019_276_235_902_312_101),
        (10, 0.5, 0.913_469_162_044_746_8),
        (14, 0.01, 1.795_214_046_659_745_6e-7),
        (14, 0.5, 0.977_690_792_864_270_7),
        (20, 0.5, 0.997_185_901_453_156_8),
        (40, 0.5, 0.999_997_248_281_085_2),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(n, s, want) in ENTROPY_REF {
            let got = point(n, s).unwrap().entropy_bits;
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1e-3),
                "n={n} s={s}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn ground_energy_examples() {
        assert_eq!(ground_energy(6, 0.0).unwrap(), 0.0);
        assert_eq!(ground_energy(6, 1.0).unwrap(), 0.0);
        assert!((ground_energy(2, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(ground_energy(5, 0.3).is_ok());
        assert!(ground_energy(4, 1.2).is_err());
    }

    #[test]
    fn alpha_at_half() {
        for n in [2usize, 4, 8, 16, 30] {
            let p = point(n, 0.5).unwrap();
            let nn = 2f64.powi(n as i32);
            let d = 2f64.powi(n as i32 / 2);
            let want = (nn - 1.0) / (d - 1.0);
            assert!((p.alpha - want).abs() <= 1e-12 * want, "n={n}");
        }
        assert!((point(4, 0.5).unwrap().alpha - 5.0).abs() < 1e-12);
    }

    #[test]
    fn odd_register_rejected_for_cut() {
        assert_eq!(point(7, 0.5).unwrap_err().kind(), crate::ErrorKind::InvalidArgument);
        assert_eq!(point(1002, 0.5).unwrap_err().kind(), crate::ErrorKind::ResourceLimit);
    }

    #[test]
    fn endpoints_are_unentangled() {
        for n in [2, 10, 100] {
            assert_eq!(point(n, 0.0).unwrap().entropy_bits, 0.0);
            let p = point(n, 1.0).unwrap();
            assert!(p.limit && p.entropy_bits == 0.0);
        }
    }

    #[test]
    fn point_invariants() {
        for n in (2..=60).step_by(2) {
            for i in 0..=100 {
                let s = i as f64 / 100.0;
                let p = point(n, s).unwrap();
                assert!((p.lambda_plus + p.lambda_minus - 1.0).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&p.lambda_minus));
                assert!((0.0..=1.0).contains(&p.entropy_bits));
                if !p.limit && n <= 40 {
                    let d = 2f64.powi(n as i32 / 2);
                    assert!((p.entry_a + (d - 1.0) * p.entry_c - 1.0).abs() < 1e-10);
                    let det = (d - 1.0) * (p.entry_a * p.entry_c - p.entry_b * p.entry_b);
                    assert!((p.lambda_plus * p.lambda_minus - det).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn asymptote_values() {
        let want = 1.0 - 4.0 / std::f64::consts::LN_2 / 1024.0;
        assert!((asymptotic_entropy(20).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.994364).abs() < 1e-6);
        assert_eq!(asymptotic_entropy(200).unwrap(), 1.0);
    }

    #[test]
    fn exact_deficit_is_half_the_asymptotic_one() {
        for n in [20usize, 30, 40, 60] {
            let deficit = 1.0 - point(n, 0.5).unwrap().entropy_bits;
            let predicted = 1.0 - asymptotic_entropy(n).unwrap();
            assert!((deficit / predicted - 0.5).abs() < 1e-3, "n={n}");
        }
    }

    #[test]
    fn curve_shrinks_away_from_half() {
        let e10 = point(10, 0.3).unwrap().entropy_bits;
        let e14 = point(14, 0.3).unwrap().entropy_bits;
        assert!(e14 < e10);
        let at_half: Vec<f64> = (1..=10).map(|k| point(2 * k, 0.5).unwrap().entropy_bits).collect();
        assert!(at_half.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn numeric_state_shapes() {
        let s0 = numeric_state(6, 0.0, 0).unwrap();
        assert!(s0.amplitudes().iter().all(|a| (a.re - 0.125).abs() < 1e-14));
        let s1 = numeric_state(6, 1.0, 0).unwrap();
        assert_eq!(s1.amplitudes()[0].re, 1.0);
        assert!(numeric_state(22, 0.5, 0).is_err());
    }
}
