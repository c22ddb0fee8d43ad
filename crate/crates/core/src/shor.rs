//! Order finding and the source/target register state right after modular
//! exponentiation, `2^{-k/2} Σ_q |q⟩|a^q mod N⟩`.
//!
//! The source register occupies the high-order `k` qubits and the target the
//! low-order `⌈log₂ N⌉` qubits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::statevec::{entanglement, spectrum_entropy, BiPartition, EntanglementReport, StateVector, DEFAULT_RANK_TOL};

/// Largest modulus accepted by [`order`].
pub const MAX_ORDER_MODULUS: u64 = 1 << 20;

/// Largest `k + ⌈log₂ N⌉` for which the full state is built.
pub const MAX_STATE_QUBITS: usize = 26;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

fn check_pair(a: u64, modulus: u64) -> Result<()> {
    if modulus < 3 || modulus.is_multiple_of(2) {
        return Err(invalid(format!("N = {modulus} must be odd and at least 3")));
    }
    if a == 0 || a >= modulus {
        return Err(invalid(format!("base {a} must satisfy 1 <= a < N = {modulus}")));
    }
    let g = gcd(a, modulus);
    if g != 1 {
        return Err(Error::NotCoprime { a, modulus, gcd: g });
    }
    Ok(())
}

/// Smallest `r >= 1` with `a^r ≡ 1 (mod N)`, by repeated multiplication.
pub fn order(a: u64, modulus: u64) -> Result<u64> {
    if modulus > MAX_ORDER_MODULUS {
        return Err(Error::ResourceLimit(format!(
            "N = {modulus} exceeds the brute-force order limit {MAX_ORDER_MODULUS}"
        )));
    }
    check_pair(a, modulus)?;
    let mut x = a % modulus;
    let mut r = 1;
    while x != 1 {
        x = x * a % modulus;
        r += 1;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOutcome {
    /// `(gcd(a^{r/2} - 1, N), gcd(a^{r/2} + 1, N))`, both nontrivial.
    Factors(u64, u64),
    OddOrder,
    /// `a^{r/2} ≡ -1 (mod N)`.
    MinusOne,
}

pub fn factors_from_order(a: u64, modulus: u64) -> Result<FactorOutcome> {
    let r = order(a, modulus)?;
    if r % 2 == 1 {
        return Ok(FactorOutcome::OddOrder);
    }
    let half = mod_pow(a, r / 2, modulus);
    if half == modulus - 1 {
        return Ok(FactorOutcome::MinusOne);
    }
    let p = gcd(half - 1, modulus);
    let q = gcd(half + 1, modulus);
    Ok(FactorOutcome::Factors(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShorCase {
    pub modulus: u64,
    pub base: u64,
    pub order: u64,
    /// `k`, the smallest width with `2^k >= N²`.
    pub source_qubits: usize,
    pub target_qubits: usize,
}

impl ShorCase {
    pub fn new(modulus: u64, base: u64) -> Result<Self> {
        let order = order(base, modulus)?;
        let square = modulus as u128 * modulus as u128;
        let source_qubits = (0..128).find(|&k| 1u128 << k >= square).expect("N² fits in 128 bits");
        let target_qubits = (0..64).find(|&t| 1u64 << t >= modulus).expect("N fits in 64 bits");
        Ok(ShorCase {
            modulus,
            base,
            order,
            source_qubits,
            target_qubits,
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.source_qubits + self.target_qubits
    }

    /// Target register (low bits) against the source register.
    pub fn register_split(&self) -> Result<BiPartition> {
        BiPartition::new(self.total_qubits(), (1u64 << self.target_qubits) - 1)
    }
}

pub fn pre_qft_state(case: &ShorCase) -> Result<StateVector> {
    let total = case.total_qubits();
    if total > MAX_STATE_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "the register for N = {} needs {total} qubits (limit {MAX_STATE_QUBITS})",
            case.modulus
        )));
    }
    let sources = 1usize << case.source_qubits;
    let amp = Complex64::new((sources as f64).sqrt().recip(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << total];
    let mut power = 1u64;
    for q in 0..sources {
        amps[(q << case.target_qubits) | power as usize] = amp;
        power = power * case.base % case.modulus;
    }
    StateVector::new(total, amps)
}

/// Numerical spectrum of the target register's reduced density matrix.
pub fn target_spectrum(case: &ShorCase) -> Result<EntanglementReport> {
    let state = pre_qft_state(case)?;
    entanglement(&state, &case.register_split()?, DEFAULT_RANK_TOL)
}

/// Exact target weights: residue class `p mod r` holds `⌊(2^k - 1 - p)/r⌋ + 1` of the
/// `2^k` source values. Sorted descending.
pub fn exact_target_weights(case: &ShorCase) -> Vec<f64> {
    let sources = 1u64 << case.source_qubits;
    let mut w: Vec<f64> = (0..case.order)
        .map(|p| ((sources - 1 - p) / case.order + 1) as f64 / sources as f64)
        .collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPrediction {
    /// `log₂ r`.
    pub leading: f64,
    /// Entropy of [`exact_target_weights`].
    pub exact: f64,
}

pub fn entropy_prediction(case: &ShorCase) -> EntropyPrediction {
    EntropyPrediction {
        leading: (case.order as f64).log2(),
        exact: spectrum_entropy(&exact_target_weights(case)),
    }
}

/// JSON case report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub a: u64,
    pub r: u64,
    pub k: usize,
    pub rank: usize,
    pub entropy: f64,
    pub entropy_prediction: f64,
    pub factors: Option<[u64; 2]>,
}

pub fn case_report(case: &ShorCase) -> Result<CaseReport> {
    let spectrum = target_spectrum(case)?;
    let factors = match factors_from_order(case.base, case.modulus)? {
        FactorOutcome::Factors(p, q) => Some([p, q]),
        _ => None,
    };
    Ok(CaseReport {
        modulus: case.modulus,
        a: case.base,
        r: case.order,
        k: case.source_qubits,
        rank: spectrum.schmidt_rank,
        entropy: spectrum.entropy_bits,
        entropy_prediction: entropy_prediction(case).leading,
        factors,
    })
}

/// Bases `2 <= a < N` coprime to `N`.
pub fn coprime_bases(modulus: u64) -> Vec<u64> {
    (2..modulus).filter(|&a| gcd(a, modulus) == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_examples() {
        assert_eq!(order(7, 15).unwrap(), 4);
        assert_eq!(order(4, 15).unwrap(), 2);
        assert_eq!(order(2, 21).unwrap(), 6);
        assert_eq!(order(2, 33).unwrap(), 10);
        assert_eq!(order(1, 15).unwrap(), 1);
    }

    #[test]
    fn non_coprime_base_reports_gcd() {
        match order(6, 15).unwrap_err() {
            Error::NotCoprime { gcd, .. } => assert_eq!(gcd, 3),
            e => panic!("unexpected {e}"),
        }
        assert!(order(2, 16).is_err());
        assert_eq!(order(3, (1 << 21) + 1).unwrap_err().kind(), crate::ErrorKind::ResourceLimit);
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factors_from_order(7, 15).unwrap(), FactorOutcome::Factors(3, 5));
        assert_eq!(factors_from_order(2, 21).unwrap(), FactorOutcome::Factors(7, 3));
        assert_eq!(factors_from_order(14, 15).unwrap(), FactorOutcome::MinusOne);
        assert_eq!(factors_from_order(4, 21).unwrap(), FactorOutcome::OddOrder);
    }

    #[test]
    fn case_geometry() {
        let c = ShorCase::new(15, 7).unwrap();
        assert_eq!((c.source_qubits, c.target_qubits, c.order), (8, 4, 4));
        let c = ShorCase::new(21, 2).unwrap();
        assert_eq!(c.source_qubits, 9);
        let c = ShorCase::new(33, 2).unwrap();
        assert_eq!((c.source_qubits, c.target_qubits), (11, 6));
    }

    #[test]
    fn state_has_one_entry_per_source_value() {
        let c = ShorCase::new(15, 7).unwrap();
        let st = pre_qft_state(&c).unwrap();
        let nz: Vec<_> = st.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nz.len(), 256);
        assert!(nz.iter().all(|a| (a.re - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn spectrum_examples() {
        let rep = target_spectrum(&ShorCase::new(15, 7).unwrap()).unwrap();
        assert_eq!(rep.schmidt_rank, 4);
        assert!(rep.spectrum[..4].iter().all(|&l| (l - 0.25).abs() < 1e-12));
        assert!((rep.entropy_bits - 2.0).abs() < 1e-12);

        let rep = target_spectrum(&ShorCase::new(15, 4).unwrap()).unwrap();
        assert!((rep.entropy_bits - 1.0).abs() < 1e-12);

        let rep = target_spectrum(&ShorCase::new(15, 1).unwrap()).unwrap();
        assert_eq!(rep.schmidt_rank, 1);
        assert_eq!(rep.entropy_bits, 0.0);
    }

    #[test]
    fn residue_weights_for_order_six() {
        let c = ShorCase::new(21, 2).unwrap();
        let w: Vec<f64> = exact_target_weights(&c).iter().map(|x| x * 512.0).collect();
        assert_eq!(w, vec![86.0, 86.0, 85.0, 85.0, 85.0, 85.0]);
        let rep = target_spectrum(&c).unwrap();
        assert_eq!(rep.schmidt_rank, 6);
        assert!((rep.entropy_bits - 6f64.log2()).abs() <= 6.0 / 512.0);
        assert!((rep.entropy_bits - entropy_prediction(&c).exact).abs() < 1e-10);
    }

    #[test]
    fn prediction_examples() {
        assert_eq!(entropy_prediction(&ShorCase::new(15, 7).unwrap()).leading, 2.0);
        assert_eq!(entropy_prediction(&ShorCase::new(15, 1).unwrap()).leading, 0.0);
        let p = entropy_prediction(&ShorCase::new(33, 2).unwrap());
        assert!((p.leading - 10f64.log2()).abs() < 1e-6);
        assert!((p.exact - p.leading).abs() <= 10.0 / 2048.0);
    }

    #[test]
    fn report_json_layout() {
        let rep = case_report(&ShorCase::new(15, 7).unwrap()).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.starts_with("{\"N\":15,\"a\":7,\"r\":4,\"k\":8,\"rank\":4,"));
        assert!(text.ends_with("\"factors\":[3,5]}"));
        let rep = case_report(&ShorCase::new(15, 14).unwrap()).unwrap();
        assert_eq!(rep.factors, None);
    }
}
