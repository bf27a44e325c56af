//! Positive-direction normalization, vector normalization and the entropy
//! weight method.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indicator::{DecisionMatrix, IndicatorId, Polarity, WeightSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormalizationMethod {
    IntervalPositive,
    VectorNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    pub values: DMatrix<f64>,
    pub method: NormalizationMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyResult {
    /// Column-stochastic probabilities, n × m.
    #[serde(skip)]
    pub probabilities: DMatrix<f64>,
    pub entropies: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Map a column onto [0, 1] so that values inside the ideal interval `[a, b]`
/// score 1 and values outside decay linearly with their distance from it.
pub fn interval_normalize(x: &[f64], a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a <= b) {
        return Err(Error::IntervalOrder { a, b });
    }
    let (lo, hi) = min_max(x);
    let spread = f64::max(a - lo, hi - b);
    if !(spread > 0.0) {
        // everything already inside [a, b]
        return Ok(vec![1.0; x.len()]);
    }
    Ok(x.iter()
        .map(|&v| {
            if v < a {
                1.0 - (a - v) / spread
            } else if v > b {
                1.0 - (v - b) / spread
            } else {
                1.0
            }
        })
        .collect())
}

/// Bring every column into benefit direction: interval form when an ideal
/// interval is configured, `max − x` for negative columns, identity otherwise.
pub fn positivize(x: &DecisionMatrix) -> Result<DMatrix<f64>> {
    let mut out = x.values().clone();
    for j in 0..x.n_indicators() {
        let col = x.column(j);
        let mapped = match (x.ideal_intervals()[j], x.polarity()[j]) {
            (Some((a, b)), _) => interval_normalize(&col, a, b)?,
            (None, Polarity::Negative) => {
                let (_, hi) = min_max(&col);
                col.iter().map(|v| hi - v).collect()
            }
            (None, Polarity::Positive) => continue,
        };
        for (i, v) in mapped.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Divide each column by its Euclidean norm.
pub fn vector_normalize(x: &DMatrix<f64>) -> Result<NormalizedMatrix> {
    let mut values = x.clone();
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn(format!("#{}", j + 1)));
        }
        col /= norm;
    }
    Ok(NormalizedMatrix {
        values,
        method: NormalizationMethod::VectorNorm,
    })
}

/// Shift any column holding negative entries so its minimum becomes zero.
pub fn shift_nonnegative(z: &mut NormalizedMatrix) {
    for mut col in z.values.column_iter_mut() {
        let lo = col.min();
        if lo < 0.0 {
            col.add_scalar_mut(-lo);
        }
    }
}

/// Entropy weights over the columns of a nonnegative matrix.
///
/// `p_ij = z_ij / Σ_i z_ij`, `e_j = −(1/ln n) Σ_i p_ij ln p_ij` with
/// `0 · ln 0 = 0`, `H_j = (1 − e_j) / (m − Σ_j e_j)` where `m` counts
/// indicators. Constant columns get `e_j = 1` exactly.
pub fn entropy_weights(z: &NormalizedMatrix) -> Result<EntropyResult> {
    let (n, m) = z.values.shape();
    if n < 2 {
        return Err(Error::TooSmall {
            what: "entropy weighting",
            min: 2,
            found: n,
        });
    }
    if m < 1 {
        return Err(Error::TooSmall {
            what: "entropy weighting",
            min: 1,
            found: m,
        });
    }
    let ln_n = (n as f64).ln();
    let mut p = DMatrix::zeros(n, m);
    let mut e = Vec::with_capacity(m);
    for j in 0..m {
        let col = z.values.column(j);
        if col.iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeValue(format!("#{}", j + 1)));
        }
        let sum = col.sum();
        if !(sum > 0.0) {
            return Err(Error::ZeroColumn(format!("#{}", j + 1)));
        }
        let constant = col.iter().all(|&v| v == col[0]);
        let mut h = 0.0;
        for i in 0..n {
            let pij = col[i] / sum;
            p[(i, j)] = pij;
            if pij > 0.0 {
                h -= pij * pij.ln();
            }
        }
        e.push(if constant { 1.0 } else { (h / ln_n).clamp(0.0, 1.0) });
    }
    let denom = m as f64 - e.iter().sum::<f64>();
    if !(denom > 0.0) {
        return Err(Error::AllColumnsConstant);
    }
    let weights = e.iter().map(|ej| (1.0 - ej) / denom).collect();
    Ok(EntropyResult {
        probabilities: p,
        entropies: e,
        weights,
    })
}

/// Positivize, vector-normalize and shift to nonnegative: the matrix the
/// entropy and dispersion steps operate on.
pub fn prepare(x: &DecisionMatrix) -> Result<NormalizedMatrix> {
    let positive = positivize(x)?;
    let mut z = vector_normalize(&positive).map_err(|e| relabel(e, x.indicators()))?;
    shift_nonnegative(&mut z);
    Ok(z)
}

/// [`prepare`] followed by [`entropy_weights`].
pub fn objective_weights(x: &DecisionMatrix) -> Result<(EntropyResult, WeightSet)> {
    let z = prepare(x)?;
    let r = entropy_weights(&z).map_err(|e| relabel(e, x.indicators()))?;
    let ws = WeightSet {
        ids: x.indicators().to_vec(),
        values: r.weights.clone(),
    };
    Ok((r, ws))
}

fn relabel(e: Error, ids: &[IndicatorId]) -> Error {
    let name = |s: &str| {
        s.strip_prefix('#')
            .and_then(|n| n.parse::<usize>().ok())
            .and_then(|k| ids.get(k - 1))
            .map(|id| id.to_string())
            .unwrap_or_else(|| s.to_string())
    };
    match e {
        Error::ZeroColumn(s) => Error::ZeroColumn(name(&s)),
        Error::NegativeValue(s) => Error::NegativeValue(name(&s)),
        other => other,
    }
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicator::{IndicatorHierarchy, LoadOptions};

    #[test]
    fn interval_examples() {
        assert_eq!(
            interval_normalize(&[2.0, 5.0, 8.0], 4.0, 6.0).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
        assert_eq!(interval_normalize(&[4.5, 5.0, 6.0], 4.0, 6.0).unwrap(), vec![1.0; 3]);
        assert_eq!(interval_normalize(&[3.0, 4.0], 4.0, 4.0).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            interval_normalize(&[1.0], 2.0, 1.0),
            Err(Error::IntervalOrder { .. })
        ));
    }

    #[test]
    fn interval_asymmetric() {
        // M = max{4 − 1, 7 − 5} = 3
        let v = interval_normalize(&[1.0, 4.5, 7.0], 4.0, 5.0).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 1.0 - 2.0 / 3.0]);
    }

    #[test]
    fn vector_norm_examples() {
        let z = vector_normalize(&DMatrix::from_row_slice(2, 1, &[3.0, 4.0])).unwrap();
        assert!((z.values[(0, 0)] - 0.6).abs() < 1e-15 && (z.values[(1, 0)] - 0.8).abs() < 1e-15);
        let z = vector_normalize(&DMatrix::from_row_slice(2, 1, &[7.0, 7.0])).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.values[(0, 0)] - r).abs() < 1e-15);
        assert!(matches!(
            vector_normalize(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0])),
            Err(Error::ZeroColumn(_))
        ));
    }

    #[test]
    fn two_by_two_hand_computed() {
        // Columns (1,1) and (1,3). Column 2: p = (1/4, 3/4),
        // e2 = −(¼ ln ¼ + ¾ ln ¾)/ln 2; e1 = 1; H = (0, 1).
        let z = vector_normalize(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 3.0])).unwrap();
        let r = entropy_weights(&z).unwrap();
        let e2 = -(0.25f64 * 0.25f64.ln() + 0.75f64 * 0.75f64.ln()) / 2f64.ln();
        assert!((r.probabilities[(0, 1)] - 0.25).abs() < 1e-15);
        assert!((r.probabilities[(1, 1)] - 0.75).abs() < 1e-15);
        assert_eq!(r.entropies[0], 1.0);
        assert!((r.entropies[1] - e2).abs() < 1e-15);
        assert_eq!(r.weights[0], 0.0);
        assert!((r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_columns_share_weight() {
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 5.0, 5.0, 5.0]);
        let r = entropy_weights(&vector_normalize(&x).unwrap()).unwrap();
        for w in r.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_probability_contributes_nothing() {
        let z = NormalizedMatrix {
            values: DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 1.0, 2.0, 1.0, 3.0]),
            method: NormalizationMethod::VectorNorm,
        };
        let r = entropy_weights(&z).unwrap();
        assert!((r.entropies[0] - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn entropy_errors() {
        let one_row = NormalizedMatrix {
            values: DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
            method: NormalizationMethod::VectorNorm,
        };
        assert!(matches!(entropy_weights(&one_row), Err(Error::TooSmall { .. })));
        let constant = vector_normalize(&DMatrix::from_row_slice(2, 2, &[1.0, 4.0, 1.0, 4.0])).unwrap();
        assert_eq!(entropy_weights(&constant).unwrap_err(), Error::AllColumnsConstant);
        let negative = NormalizedMatrix {
            values: DMatrix::from_row_slice(2, 1, &[-1.0, 2.0]),
            method: NormalizationMethod::VectorNorm,
        };
        assert!(matches!(entropy_weights(&negative), Err(Error::NegativeValue(_))));
    }

    #[test]
    fn positivize_negative_and_interval() {
        let mut h = IndicatorHierarchy::standard();
        h.specs[1].polarity = Polarity::Negative;
        h.specs[2] = h.specs[2].clone().with_interval(4.0, 6.0);
        let text = "c,A1,A2,A3\nx,1,10,2\ny,2,4,5\nz,3,7,8\n";
        let m = crate::indicator::load_decision_matrix(text.as_bytes(), &h, &LoadOptions::default()).unwrap();
        let p = positivize(&m).unwrap();
        assert_eq!(p.column(0).as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.column(1).as_slice(), &[0.0, 6.0, 3.0]);
        assert_eq!(p.column(2).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn objective_weights_shift_and_sum() {
        let h = IndicatorHierarchy::standard();
        let text = "c,A1,A2\nx,-3,1\ny,2,4\nz,5,2\n";
        let m = crate::indicator::load_decision_matrix(text.as_bytes(), &h, &LoadOptions::default()).unwrap();
        let (r, ws) = objective_weights(&m).unwrap();
        assert!((ws.sum() - 1.0).abs() < 1e-12);
        assert!(r.entropies.iter().all(|e| (0.0..=1.0).contains(e)));
    }
}
