//! Ensemble aggregation, least-squares scaling fits and reference curves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt::sig_digits;
use crate::solver::SweepProfile;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_qubits: usize,
    pub count: usize,
    pub mean_max_entropy: f64,
    /// Largest per-instance peak entropy.
    pub worst_max_entropy: f64,
    pub mean_min_gap: f64,
    /// Smallest per-instance minimum gap.
    pub worst_min_gap: f64,
    pub ci95_entropy: f64,
    pub ci95_gap: f64,
    pub mean_s_min_gap: f64,
    pub mean_s_max_entropy: f64,
    pub ci95_s_min_gap: f64,
    pub ci95_s_max_entropy: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Half-width `1.96 σ/√m` of the normal-approximation interval, with the sample σ.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    let m = xs.len();
    if m < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1) as f64;
    Z95 * var.sqrt() / (m as f64).sqrt()
}

pub fn aggregate(profiles: &[SweepProfile]) -> Result<EnsembleStats> {
    let first = profiles.first().ok_or_else(|| invalid("no profiles to aggregate"))?;
    let n = first.n_qubits;
    if let Some(p) = profiles.iter().find(|p| p.n_qubits != n) {
        return Err(invalid(format!(
            "profile {} has {} qubits, expected {n}",
            p.instance_id, p.n_qubits
        )));
    }
    let ent: Vec<f64> = profiles.iter().map(|p| p.max_entropy).collect();
    let gap: Vec<f64> = profiles.iter().map(|p| p.min_gap).collect();
    let s_gap: Vec<f64> = profiles.iter().map(|p| p.s_min_gap).collect();
    let s_ent: Vec<f64> = profiles.iter().map(|p| p.s_max_entropy).collect();
    Ok(EnsembleStats {
        n_qubits: n,
        count: profiles.len(),
        mean_max_entropy: mean(&ent),
        worst_max_entropy: ent.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_min_gap: mean(&gap),
        worst_min_gap: gap.iter().copied().fold(f64::INFINITY, f64::min),
        ci95_entropy: ci95_half_width(&ent),
        ci95_gap: ci95_half_width(&gap),
        mean_s_min_gap: mean(&s_gap),
        mean_s_max_entropy: mean(&s_ent),
        ci95_s_min_gap: ci95_half_width(&s_gap),
        ci95_s_max_entropy: ci95_half_width(&s_ent),
    })
}

/// Instance-averaged entropy and gap at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPoint {
    pub s: f64,
    pub entropy: f64,
    pub gap: f64,
}

/// Pointwise average over profiles sharing one grid.
pub fn mean_curve(profiles: &[SweepProfile]) -> Result<Vec<MeanPoint>> {
    let first = profiles.first().ok_or_else(|| invalid("no profiles to average"))?;
    let len = first.records.len();
    for p in profiles {
        let same = p.records.len() == len
            && p.records.iter().zip(&first.records).all(|(a, b)| (a.s - b.s).abs() < 1e-12);
        if !same {
            return Err(invalid(format!("profile {} uses a different s grid", p.instance_id)));
        }
    }
    let m = profiles.len() as f64;
    Ok((0..len)
        .map(|i| MeanPoint {
            s: first.records[i].s,
            entropy: profiles.iter().map(|p| p.records[i].entropy_bits).sum::<f64>() / m,
            gap: profiles.iter().map(|p| p.records[i].gap).sum::<f64>() / m,
        })
        .collect())
}

pub const AGGREGATE_CSV_HEADER: &str = "n,count,mean_max_entropy,ci_entropy,worst_max_entropy,mean_min_gap,ci_gap,worst_min_gap,mean_s_gap,mean_s_entropy";

pub fn aggregate_csv(rows: &[EnsembleStats]) -> String {
    let mut out = format!("{AGGREGATE_CSV_HEADER}\n");
    for r in rows {
        let vals = [
            r.mean_max_entropy,
            r.ci95_entropy,
            r.worst_max_entropy,
            r.mean_min_gap,
            r.ci95_gap,
            r.worst_min_gap,
            r.mean_s_min_gap,
            r.mean_s_max_entropy,
        ];
        let cols: Vec<String> = vals.iter().map(|&x| sig_digits(x, 12)).collect();
        out.push_str(&format!("{},{},{}\n", r.n_qubits, r.count, cols.join(",")));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `y = a x + c`
    Linear,
    /// `y = a / x + c`
    InverseN,
    /// `y = a / x³ + c`
    InverseNCubed,
    /// `y = a ln|ln|x|| + c`
    Loglog,
    /// `ln y = a ln x + c`
    Power,
}

impl FitModel {
    fn transform(self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (tx, ty) = match self {
            FitModel::Linear => (x, y),
            FitModel::InverseN => (1.0 / x, y),
            FitModel::InverseNCubed => (1.0 / (x * x * x), y),
            FitModel::Loglog => (x.abs().ln().abs().ln(), y),
            FitModel::Power => {
                if x <= 0.0 || y <= 0.0 {
                    return Err(invalid(format!("power-law fit needs positive data, got ({x}, {y})")));
                }
                (x.ln(), y.ln())
            }
        };
        if !(tx.is_finite() && ty.is_finite()) {
            return Err(invalid(format!("{self} transform of ({x}, {y}) is not finite")));
        }
        Ok((tx, ty))
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Linear => "linear",
            FitModel::InverseN => "inverse-n",
            FitModel::InverseNCubed => "inverse-n-cubed",
            FitModel::Loglog => "loglog",
            FitModel::Power => "power",
        })
    }
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FitModel::Linear),
            "inverse-n" => Ok(FitModel::InverseN),
            "inverse-n-cubed" => Ok(FitModel::InverseNCubed),
            "loglog" => Ok(FitModel::Loglog),
            "power" => Ok(FitModel::Power),
            other => Err(invalid(format!("unknown fit model {other:?}"))),
        }
    }
}

/// Least-squares line through the model-transformed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    /// `√Σ (y - ŷ)²` in transformed coordinates.
    pub residual_norm: f64,
    /// Pearson correlation of the transformed points; 0 when `y` is constant.
    pub correlation: f64,
    pub points: usize,
}

pub fn fit(xs: &[f64], ys: &[f64], model: FitModel) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(invalid(format!("{} x values but {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(invalid(format!("a fit needs at least 3 points, got {}", xs.len())));
    }
    let pts = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| model.transform(x, y))
        .collect::<Result<Vec<_>>>()?;
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let scale = pts.iter().map(|p| p.0.abs()).fold(1.0f64, f64::max);
    if sxx.sqrt() <= 1e-12 * scale {
        return Err(invalid("x values have no spread after the model transform"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = pts
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum::<f64>()
        .sqrt();
    let correlation = if syy > 0.0 {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Ok(FitResult {
        model,
        slope,
        intercept,
        residual_norm,
        correlation,
        points: pts.len(),
    })
}

/// Windows on either side of the critical point, as absolute `s` ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalWindows {
    pub growth: (f64, f64),
    pub falling: (f64, f64),
}

impl CriticalWindows {
    /// `[s_c - 0.15, s_c - 0.02]` and `[s_c + 0.02, s_c + 0.15]`.
    pub fn around(s_c: f64) -> Self {
        CriticalWindows {
            growth: (s_c - 0.15, s_c - 0.02),
            falling: (s_c + 0.02, s_c + 0.15),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFit {
    /// `E = a ln|ln|s - s_c|| + c` below `s_c`.
    pub growth: FitResult,
    /// `ln E = -α ln(s - s_c) + c` above `s_c`.
    pub falling: FitResult,
}

impl CriticalFit {
    /// The decay exponent `α` of the falling side.
    pub fn exponent(&self) -> f64 {
        -self.falling.slope
    }
}

/// Fits both flanks of an entropy peak given as `(s, E)` points.
pub fn fit_critical_region(curve: &[(f64, f64)], s_c: f64, windows: CriticalWindows) -> Result<CriticalFit> {
    let (s_lo, s_hi) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if !(s_c > s_lo && s_c < s_hi) {
        return Err(invalid(format!("s_c = {s_c} is not strictly inside the grid")));
    }
    let (g_lo, g_hi) = windows.growth;
    let (f_lo, f_hi) = windows.falling;
    if g_hi >= s_c || f_lo <= s_c {
        return Err(invalid("fit windows must exclude the critical point"));
    }
    let eps = 1e-9;
    let select = |lo: f64, hi: f64| -> (Vec<f64>, Vec<f64>) {
        curve
            .iter()
            .filter(|p| p.0 >= lo - eps && p.0 <= hi + eps)
            .map(|p| ((p.0 - s_c).abs(), p.1))
            .unzip()
    };
    let (gx, gy) = select(g_lo, g_hi);
    let (fx, fy) = select(f_lo, f_hi);
    if gx.len() < 4 || fx.len() < 4 {
        return Err(invalid(format!(
            "fit windows hold {} and {} points; at least 4 each are needed",
            gx.len(),
            fx.len()
        )));
    }
    Ok(CriticalFit {
        growth: fit(&gx, &gy, FitModel::Loglog)?,
        falling: fit(&fx, &fy, FitModel::Power)?,
    })
}

/// Mean half-cut entropy of a random pure state for large `n`: `n/2 - 1/(2 ln 2)`.
pub fn page_entropy(n: usize) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(invalid(format!("n = {n} must be even and >= 2")));
    }
    Ok(n as f64 / 2.0 - 1.0 / (2.0 * std::f64::consts::LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SweepRecord;

    fn profile(id: &str, n: usize, peak: f64, gap: f64) -> SweepProfile {
        let recs = vec![
            SweepRecord { s: 0.0, e0: 0.0, e1: 1.0, gap: 1.0, entropy_bits: 0.0, h10_abs: 0.0 },
            SweepRecord { s: 0.5, e0: 0.0, e1: gap, gap, entropy_bits: peak, h10_abs: 0.0 },
            SweepRecord { s: 1.0, e0: 0.0, e1: 1.0, gap: 1.0, entropy_bits: 0.0, h10_abs: 0.0 },
        ];
        SweepProfile::from_records(id, n, recs).unwrap()
    }

    #[test]
    fn single_profile_has_zero_interval() {
        let st = aggregate(&[profile("a", 6, 1.2, 0.3)]).unwrap();
        assert_eq!(st.mean_max_entropy, st.worst_max_entropy);
        assert_eq!(st.mean_min_gap, st.worst_min_gap);
        assert_eq!(st.ci95_entropy, 0.0);
    }

    #[test]
    fn hand_computed_interval() {
        let ps: Vec<_> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&e| profile("x", 6, e, 0.5))
            .collect();
        let st = aggregate(&ps).unwrap();
        assert!((st.mean_max_entropy - 2.0).abs() < 1e-15);
        assert!((st.ci95_entropy - 1.96 / 3f64.sqrt()).abs() < 1e-12);
        assert!((st.ci95_entropy - 1.1316).abs() < 1e-4);
        assert_eq!(st.worst_max_entropy, 3.0);
    }

    #[test]
    fn aggregate_errors() {
        assert!(aggregate(&[]).is_err());
        assert!(aggregate(&[profile("a", 6, 1.0, 0.3), profile("b", 8, 1.0, 0.3)]).is_err());
    }

    #[test]
    fn exact_line_has_zero_residual() {
        let xs = [6.0, 8.0, 10.0, 12.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.1 * x).collect();
        let f = fit(&xs, &ys, FitModel::Linear).unwrap();
        assert!((f.slope - 0.1).abs() < 1e-14);
        assert!(f.residual_norm < 1e-14);
        assert!((f.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_models() {
        let xs = [6.0, 8.0, 10.0, 12.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 / x + 0.01).collect();
        let f = fit(&xs, &ys, FitModel::InverseN).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 0.01).abs() < 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x| 50.0 / (x * x * x)).collect();
        let f = fit(&xs, &ys, FitModel::InverseNCubed).unwrap();
        assert!((f.slope - 50.0).abs() < 1e-10);
    }

    #[test]
    fn fit_errors() {
        assert!(fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], FitModel::Linear).is_err());
        assert!(fit(&[1.0, 2.0], &[1.0, 2.0], FitModel::Linear).is_err());
        assert!(fit(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0], FitModel::Power).is_err());
    }

    #[test]
    fn power_law_exponent_recovered() {
        let s_c = 0.7;
        let curve: Vec<(f64, f64)> = (0..=100)
            .map(|i| i as f64 / 100.0)
            .filter(|&s| (s - s_c).abs() > 1e-9)
            .map(|s| {
                let d = (s - s_c).abs();
                let e = if s > s_c { 0.02 * d.powf(-2.3) } else { 0.4 * d.ln().abs().ln() + 1.0 };
                (s, e)
            })
            .collect();
        let fitres = fit_critical_region(&curve, s_c, CriticalWindows::around(s_c)).unwrap();
        assert!((fitres.exponent() - 2.3).abs() < 1e-6);
        assert!((fitres.growth.slope - 0.4).abs() < 1e-6);
    }

    #[test]
    fn loglog_unit_slope_recovered() {
        let s_c = 0.65;
        let curve: Vec<(f64, f64)> = (0..=100)
            .map(|i| i as f64 / 100.0)
            .map(|s| {
                let d = (s - s_c).abs().max(1e-3);
                (s, d.ln().abs().ln() + 0.3)
            })
            .collect();
        let fitres = fit_critical_region(&curve, s_c, CriticalWindows::around(s_c)).unwrap();
        assert!((fitres.growth.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn critical_region_errors() {
        let curve: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 1.0)).collect();
        assert!(fit_critical_region(&curve, 0.5, CriticalWindows::around(0.5)).is_err());
        assert!(fit_critical_region(&curve, 1.0, CriticalWindows::around(1.0)).is_err());
        let bad = CriticalWindows { growth: (0.3, 0.5), falling: (0.6, 0.8) };
        assert!(fit_critical_region(&curve, 0.5, bad).is_err());
    }

    #[test]
    fn page_values() {
        assert!((page_entropy(10).unwrap() - 4.27865).abs() < 1e-5);
        assert!((page_entropy(2).unwrap() - 0.27865).abs() < 1e-5);
        assert!(page_entropy(3).is_err());
    }

    #[test]
    fn csv_header_and_row() {
        let st = aggregate(&[profile("a", 6, 1.0, 0.5), profile("b", 6, 2.0, 0.25)]).unwrap();
        let csv = aggregate_csv(&[st]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), AGGREGATE_CSV_HEADER);
        assert!(lines.next().unwrap().starts_with("6,2,1.5,"));
    }
}
