//! GM(1,1) grey prediction.
//!
//! The accumulated series `X¹` is modelled by the whitening equation
//! `dX¹/dt + α X¹ = μ` with time response
//! `X̂¹(k+1) = (X⁰(1) − μ/α) e^{−αk} + μ/α`.
//!
//! Parameters come from least squares on the grey difference equation
//! `X⁰(k) + a z¹(k) = b` with midpoint background values
//! `z¹(k) = ½ (X¹(k) + X¹(k−1))`. The discrete pair `(a, b)` is then mapped to
//! the continuous pair so the time response reproduces the difference
//! equation's exact solution: `α = ln((2 + a)/(2 − a))`, `μ = α b / a`. With
//! this mapping geometric sequences are reproduced exactly; using `α = a`
//! directly leaves an O(a³) drift per step.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_LEN: usize = 4;
/// Below this |α| the linear-growth limit of the time response is used.
pub const ALPHA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    #[serde(default)]
    pub label: String,
    pub start_period: i32,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, start_period: i32, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            start_period,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end_period(&self) -> i32 {
        self.start_period + self.values.len() as i32 - 1
    }

    /// Value at a period, if covered.
    pub fn at(&self, period: i32) -> Option<f64> {
        let k = period.checked_sub(self.start_period)?;
        usize::try_from(k).ok().and_then(|k| self.values.get(k)).copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// |X⁰(k) − X̂⁰(k)| / X⁰(k) for each in-sample point.
    pub relative_residuals: Vec<f64>,
    pub mean_relative_residual: f64,
    /// Posterior-variance ratio C = S(residual) / S(data); `None` for
    /// constant data.
    pub posterior_variance_ratio: Option<f64>,
    /// Class ratios σ(k) = X⁰(k−1)/X⁰(k), k = 2..n.
    pub class_ratios: Vec<f64>,
    /// Positions (1-based k) whose class ratio falls outside
    /// (e^{−2/(n+1)}, e^{2/(n+1)}).
    pub class_ratio_violations: Vec<usize>,
    /// Smoothness ratios X⁰(k)/X¹(k−1), k = 2..n.
    pub smooth_ratios: Vec<f64>,
    /// Set when |a| ≥ 2 and the classical α = a, μ = b was used instead.
    pub classical_fallback: bool,
}

/// A fitted GM(1,1) model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreyModel {
    /// Developing grey degree.
    pub alpha: f64,
    /// Internal control grey degree.
    pub mu: f64,
    /// Least-squares coefficients of the difference equation.
    pub a: f64,
    pub b: f64,
    pub source: TimeSeries,
    /// In-sample X̂⁰.
    pub fitted: Vec<f64>,
    /// In-sample X̂¹; running sums of `fitted`, so X̂¹(1) = X⁰(1).
    pub fitted_cumulative: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// Fit GM(1,1) to a positive series of at least four observations.
pub fn fit_gm11(s: &TimeSeries) -> Result<GreyModel> {
    let x0 = &s.values;
    let n = x0.len();
    if n < MIN_LEN {
        return Err(Error::TooSmall {
            what: "GM(1,1) series",
            min: MIN_LEN,
            found: n,
        });
    }
    if let Some((index, &value)) = x0.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveSeries { index, value });
    }

    let x1: Vec<f64> = x0
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();

    let (a, b) = if x0.iter().all(|&v| v == x0[0]) {
        // fixed point: dX¹/dt = c
        (0.0, x0[0])
    } else {
        let rows = n - 1;
        let design = DMatrix::from_fn(rows, 2, |r, c| if c == 0 { -0.5 * (x1[r + 1] + x1[r]) } else { 1.0 });
        let y = DVector::from_iterator(rows, x0[1..].iter().copied());
        let svd = design.svd(true, true);
        let smax = svd.singular_values.max();
        if svd.rank(smax * 1e-13) < 2 {
            return Err(Error::Singular("GM(1,1) normal equations".into()));
        }
        let sol = svd
            .solve(&y, smax * 1e-13)
            .map_err(|e| Error::Singular(e.to_string()))?;
        (sol[0], sol[1])
    };

    let (alpha, mu, classical_fallback) = if a.abs() < ALPHA_EPS {
        (0.0, b, false)
    } else if a.abs() < 2.0 {
        let alpha = ((2.0 + a) / (2.0 - a)).ln();
        (alpha, alpha * b / a, false)
    } else {
        (a, b, true)
    };

    let mut model = GreyModel {
        alpha,
        mu,
        a,
        b,
        source: s.clone(),
        fitted: Vec::new(),
        fitted_cumulative: Vec::new(),
        diagnostics: Diagnostics {
            relative_residuals: Vec::new(),
            mean_relative_residual: 0.0,
            posterior_variance_ratio: None,
            class_ratios: Vec::new(),
            class_ratio_violations: Vec::new(),
            smooth_ratios: Vec::new(),
            classical_fallback,
        },
    };
    model.fitted = model.values(n);
    model.fitted_cumulative = running_sum(&model.fitted);
    model.diagnostics = diagnostics(x0, &x1, &model.fitted, classical_fallback);
    Ok(model)
}

fn running_sum(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn diagnostics(x0: &[f64], x1: &[f64], fitted: &[f64], classical_fallback: bool) -> Diagnostics {
    let n = x0.len();
    let relative_residuals: Vec<f64> = x0.iter().zip(fitted).map(|(x, f)| (x - f).abs() / x).collect();
    let mean_relative_residual = relative_residuals[1..].iter().sum::<f64>() / (n - 1) as f64;
    let std = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let residuals: Vec<f64> = x0.iter().zip(fitted).map(|(x, f)| x - f).collect();
    let s1 = std(x0);
    let posterior_variance_ratio = (s1 > 0.0).then(|| std(&residuals) / s1);
    let bound = 2.0 / (n as f64 + 1.0);
    let (lo, hi) = ((-bound).exp(), bound.exp());
    let class_ratios: Vec<f64> = x0.windows(2).map(|w| w[0] / w[1]).collect();
    let class_ratio_violations = class_ratios
        .iter()
        .enumerate()
        .filter(|(_, &r)| !(r > lo && r < hi))
        .map(|(k, _)| k + 2)
        .collect();
    let smooth_ratios = (1..n).map(|k| x0[k] / x1[k - 1]).collect();
    Diagnostics {
        relative_residuals,
        mean_relative_residual,
        posterior_variance_ratio,
        class_ratios,
        class_ratio_violations,
        smooth_ratios,
        classical_fallback,
    }
}

impl GreyModel {
    /// Time response X̂¹(k+1) evaluated directly (k ≥ 0).
    pub fn response(&self, k: usize) -> f64 {
        let x01 = self.source.values[0];
        let k = k as f64;
        if self.alpha == 0.0 {
            x01 + self.mu * k
        } else {
            // (X⁰(1) − μ/α) e^{−αk} + μ/α, rearranged to avoid cancellation
            x01 * (-self.alpha * k).exp() - self.mu * (-self.alpha * k).exp_m1() / self.alpha
        }
    }

    /// Original-scale value X̂⁰ at 1-based position `k`.
    pub fn value_at(&self, k: usize) -> f64 {
        let x01 = self.source.values[0];
        if k <= 1 {
            return x01;
        }
        if self.alpha == 0.0 {
            return self.mu;
        }
        // X̂¹(k) − X̂¹(k−1) = (μ − α X⁰(1)) e^{−α(k−2)} (−expm1(−α)/α)
        let step = -(-self.alpha).exp_m1() / self.alpha;
        (self.mu - self.alpha * x01) * (-self.alpha * (k as f64 - 2.0)).exp() * step
    }

    /// First `len` original-scale values X̂⁰(1..=len).
    pub fn values(&self, len: usize) -> Vec<f64> {
        (1..=len).map(|k| self.value_at(k)).collect()
    }

    /// In-sample fitted values followed by `horizon` forecasts.
    pub fn predict(&self, horizon: usize) -> Vec<f64> {
        self.values(self.source.len() + horizon)
    }

    /// Only the `horizon` values after the sample.
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        let n = self.source.len();
        (n + 1..=n + horizon).map(|k| self.value_at(k)).collect()
    }

    /// Cumulative X̂¹ for the in-sample span plus `horizon`, as running sums of
    /// [`GreyModel::predict`].
    pub fn predict_cumulative(&self, horizon: usize) -> Vec<f64> {
        running_sum(&self.predict(horizon))
    }
}

/// A history extended by GM(1,1) forecasts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastSeries {
    pub series: TimeSeries,
    /// True for forecast points, false for observed history.
    pub forecast: Vec<bool>,
    /// Constant added before fitting (nonzero when the history has values ≤ 0).
    pub shift: f64,
    pub model: GreyModel,
}

impl ForecastSeries {
    pub fn history(&self) -> &[f64] {
        let n = self.forecast.iter().take_while(|f| !**f).count();
        &self.series.values[..n]
    }
}

/// Extend a history with forecasts through period `until`.
///
/// Histories containing values ≤ 0 are shifted by `1 − min` before fitting and
/// shifted back afterwards; observed points are copied verbatim.
pub fn forecast_series(history: &TimeSeries, until: i32) -> Result<ForecastSeries> {
    if history.len() < MIN_LEN {
        return Err(Error::TooSmall {
            what: "forecast history",
            min: MIN_LEN,
            found: history.len(),
        });
    }
    let lo = history.values.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if lo > 0.0 { 0.0 } else { 1.0 - lo };
    let shifted = TimeSeries {
        values: history.values.iter().map(|v| v + shift).collect(),
        ..history.clone()
    };
    let model = fit_gm11(&shifted)?;
    let horizon = usize::try_from(until - history.end_period()).unwrap_or(0);
    let mut values = history.values.clone();
    values.extend(model.forecast(horizon).into_iter().map(|v| v - shift));
    let mut forecast = vec![false; history.len()];
    forecast.extend(std::iter::repeat_n(true, horizon));
    Ok(ForecastSeries {
        series: TimeSeries {
            values,
            ..history.clone()
        },
        forecast,
        shift,
        model,
    })
}
