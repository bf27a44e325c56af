//! Robustness of the evaluation function: random feature substitution and
//! Box-Behnken response-surface analysis over weight perturbations.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combined::{evaluate_chi, feature_scores, FeatureSelection};
use crate::error::{Error, Result};
use crate::indicator::{DecisionMatrix, IndicatorId, WeightSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub seed: u64,
    #[serde(default = "default_swaps")]
    pub n_swap: usize,
    pub trials: usize,
}

fn default_swaps() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Swap {
    /// 0-based position in the feature group.
    pub position: usize,
    pub replaced: IndicatorId,
    pub substitute: IndicatorId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub index: usize,
    pub swaps: Vec<Swap>,
    pub chi: Vec<f64>,
    pub absolute: Vec<f64>,
    /// Deviation relative to |baseline χ|; `None` when the baseline is 0.
    pub relative: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub mean_abs: f64,
    pub max_abs: f64,
    pub std_abs: f64,
    pub mean_rel: f64,
    pub max_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub config: PerturbationConfig,
    pub alternatives: Vec<String>,
    pub features: Vec<IndicatorId>,
    pub baseline: Vec<f64>,
    pub trials: Vec<Trial>,
    pub summary: DeviationSummary,
}

/// Replace features at the given positions and renormalize Ω over the new
/// group. Substitutes keep the replaced feature's position.
pub fn substitute(
    sel: &FeatureSelection,
    omega: &WeightSet,
    swaps: &[(usize, IndicatorId)],
) -> Result<FeatureSelection> {
    let mut ids = sel.ids.clone();
    for &(pos, id) in swaps {
        let slot = ids
            .get_mut(pos)
            .ok_or_else(|| Error::InvalidParameter(format!("feature position {pos} out of range")))?;
        *slot = id;
    }
    let mut seen = HashSet::new();
    if let Some(d) = ids.iter().find(|id| !seen.insert(**id)) {
        return Err(Error::InvalidParameter(format!("feature {d} would appear twice")));
    }
    let raw: Vec<f64> = ids
        .iter()
        .map(|&id| {
            omega
                .get(id)
                .ok_or_else(|| Error::MissingValue(format!("total weight of {id}")))
        })
        .collect::<Result<_>>()?;
    let coverage: f64 = raw.iter().sum();
    if !(coverage > 0.0) {
        return Err(Error::ZeroWeight("substituted feature group".into()));
    }
    Ok(FeatureSelection {
        ids,
        gamma: raw.iter().map(|w| w / coverage).collect(),
        coverage,
    })
}

fn chi_all(sel: &FeatureSelection, scaled: &DMatrix<f64>, cols: &[IndicatorId]) -> Result<Vec<f64>> {
    let idx: Vec<usize> = sel
        .ids
        .iter()
        .map(|id| {
            cols.iter()
                .position(|c| c == id)
                .ok_or_else(|| Error::MissingValue(format!("data column {id}")))
        })
        .collect::<Result<_>>()?;
    (0..scaled.nrows())
        .map(|i| {
            let xi: Vec<f64> = idx.iter().map(|&j| scaled[(i, j)]).collect();
            evaluate_chi(sel, &xi)
        })
        .collect()
}

/// Random feature substitution.
///
/// Baseline χ uses Ω renormalized over the original group. Each trial draws
/// `n_swap` unselected indicators and `n_swap` group positions from a ChaCha
/// stream keyed by (seed, trial index), so results do not depend on the
/// order trials are scheduled in.
pub fn factor_substitution(
    sel: &FeatureSelection,
    omega: &WeightSet,
    data: &DecisionMatrix,
    cfg: &PerturbationConfig,
) -> Result<SensitivityReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial required".into()));
    }
    if cfg.n_swap > sel.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot swap {} of {} features",
            cfg.n_swap,
            sel.len()
        )));
    }
    let unselected: Vec<IndicatorId> = omega
        .ids
        .iter()
        .copied()
        .filter(|id| sel.position(*id).is_none())
        .collect();
    if unselected.len() < cfg.n_swap {
        return Err(Error::TooSmall {
            what: "unselected indicator pool",
            min: cfg.n_swap,
            found: unselected.len(),
        });
    }
    let cols = data.indicators().to_vec();
    let scaled = feature_scores(data, &cols)?;
    let base_sel = substitute(sel, omega, &[])?;
    let baseline = chi_all(&base_sel, &scaled, &cols)?;

    let trials: Vec<Trial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            let subs = sample(&mut rng, unselected.len(), cfg.n_swap).into_vec();
            let positions = sample(&mut rng, sel.len(), cfg.n_swap).into_vec();
            let mut swaps: Vec<Swap> = positions
                .iter()
                .zip(&subs)
                .map(|(&p, &s)| Swap {
                    position: p,
                    replaced: sel.ids[p],
                    substitute: unselected[s],
                })
                .collect();
            swaps.sort_by_key(|s| s.position);
            let pairs: Vec<(usize, IndicatorId)> = swaps.iter().map(|s| (s.position, s.substitute)).collect();
            let new_sel = substitute(sel, omega, &pairs)?;
            let chi = chi_all(&new_sel, &scaled, &cols)?;
            let absolute: Vec<f64> = chi.iter().zip(&baseline).map(|(c, b)| c - b).collect();
            let relative = absolute
                .iter()
                .zip(&baseline)
                .map(|(d, b)| (*b != 0.0).then(|| d / b.abs()))
                .collect();
            Ok(Trial {
                index: t,
                swaps,
                chi,
                absolute,
                relative,
            })
        })
        .collect::<Result<_>>()?;

    let abs: Vec<f64> = trials.iter().flat_map(|t| t.absolute.iter().map(|d| d.abs())).collect();
    let rel: Vec<f64> = trials
        .iter()
        .flat_map(|t| t.relative.iter().flatten().map(|d| d.abs()))
        .collect();
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let mean_abs = mean(&abs);
    let std_abs = (abs.iter().map(|d| (d - mean_abs).powi(2)).sum::<f64>() / abs.len().max(1) as f64).sqrt();
    let summary = DeviationSummary {
        mean_abs,
        max_abs: abs.iter().copied().fold(0.0, f64::max),
        std_abs,
        mean_rel: mean(&rel),
        max_rel: rel.iter().copied().fold(0.0, f64::max),
    };
    Ok(SensitivityReport {
        config: *cfg,
        alternatives: data.labels().to_vec(),
        features: sel.ids.clone(),
        baseline,
        trials,
        summary,
    })
}

/// Box-Behnken design in coded levels {−1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BBDesign {
    pub factors: usize,
    pub points: Vec<Vec<f64>>,
    pub center_replicates: usize,
}

/// For k ≥ 3: the four (±1, ±1) corners of every factor pair (pairs in
/// lexicographic order, others at 0) followed by the center replicates.
/// For k = 2 the eight non-center points of the 3² factorial are used.
pub fn bbd_design(k: usize, center_replicates: usize) -> Result<BBDesign> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "Box-Behnken design needs k >= 2, got {k}"
        )));
    }
    let mut points = Vec::new();
    if k == 2 {
        for a in [-1.0, 0.0, 1.0] {
            for b in [-1.0, 0.0, 1.0] {
                if a != 0.0 || b != 0.0 {
                    points.push(vec![b, a]);
                }
            }
        }
    } else {
        for i in 0..k {
            for j in (i + 1)..k {
                for (a, b) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                    let mut p = vec![0.0; k];
                    p[i] = a;
                    p[j] = b;
                    points.push(p);
                }
            }
        }
    }
    points.extend(std::iter::repeat_n(vec![0.0; k], center_replicates));
    Ok(BBDesign {
        factors: k,
        points,
        center_replicates,
    })
}

/// Full second-order polynomial
/// `y = c + Σ b_i x_i + Σ_{i<j} b_ij x_i x_j + Σ b_ii x_i²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticSurface {
    pub factors: usize,
    pub intercept: f64,
    pub linear: Vec<f64>,
    /// Coefficients for pairs (i, j), i < j, in lexicographic order.
    pub interaction: Vec<f64>,
    pub square: Vec<f64>,
    pub r_squared: f64,
    pub residual_norm: f64,
}

pub fn coefficient_count(k: usize) -> usize {
    1 + k + k * (k - 1) / 2 + k
}

fn terms(x: &[f64]) -> Vec<f64> {
    let k = x.len();
    let mut t = Vec::with_capacity(coefficient_count(k));
    t.push(1.0);
    t.extend_from_slice(x);
    for i in 0..k {
        for j in (i + 1)..k {
            t.push(x[i] * x[j]);
        }
    }
    t.extend(x.iter().map(|v| v * v));
    t
}

impl QuadraticSurface {
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c = vec![self.intercept];
        c.extend(&self.linear);
        c.extend(&self.interaction);
        c.extend(&self.square);
        c
    }

    pub fn from_coefficients(k: usize, c: &[f64]) -> Self {
        let p = k * (k - 1) / 2;
        Self {
            factors: k,
            intercept: c[0],
            linear: c[1..=k].to_vec(),
            interaction: c[k + 1..k + 1 + p].to_vec(),
            square: c[k + 1 + p..].to_vec(),
            r_squared: 1.0,
            residual_norm: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        terms(x).iter().zip(self.coefficients()).map(|(t, c)| t * c).sum()
    }

    fn interaction_at(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let k = self.factors;
        // index of pair (i, j) in lexicographic enumeration
        let idx = i * (2 * k - i - 1) / 2 + (j - i - 1);
        self.interaction[idx]
    }

    /// Hessian of the polynomial (constant).
    pub fn hessian(&self) -> DMatrix<f64> {
        let k = self.factors;
        DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                2.0 * self.square[i]
            } else {
                self.interaction_at(i, j)
            }
        })
    }
}

/// Least-squares fit of the full quadratic at arbitrary points.
pub fn fit_quadratic(points: &[Vec<f64>], responses: &[f64]) -> Result<QuadraticSurface> {
    if points.len() != responses.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            found: responses.len(),
        });
    }
    let k = points.first().map_or(0, Vec::len);
    if k == 0 || points.iter().any(|p| p.len() != k) {
        return Err(Error::InvalidParameter(
            "design points must share a nonzero dimension".into(),
        ));
    }
    let p = coefficient_count(k);
    if points.len() < p {
        return Err(Error::Singular(format!(
            "rank deficiency: {} points for {p} coefficients",
            points.len()
        )));
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|x| terms(x)).collect();
    let x = DMatrix::from_fn(points.len(), p, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(responses);
    let sv = x.singular_values();
    let tol = sv.max() * 1e-10;
    let rank = sv.iter().filter(|&&v| v > tol).count();
    if rank < p {
        return Err(Error::Singular(format!("rank deficiency: design rank {rank} < {p}")));
    }
    // Householder QR for the solve: the iterative SVD solve can stop short of
    // full accuracy on these highly structured designs.
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * &y;
    let c = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("quadratic design".into()))?;
    let resid = &y - &x * &c;
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = resid.norm_squared();
    let mut s = QuadraticSurface::from_coefficients(k, c.as_slice());
    s.residual_norm = ss_res.sqrt();
    let scale = (1.0 + mean * mean) * responses.len() as f64;
    s.r_squared = if ss_tot > 1e-24 * scale {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON * scale {
        1.0
    } else {
        0.0
    };
    Ok(s)
}

pub fn fit_response_surface(design: &BBDesign, responses: &[f64]) -> Result<QuadraticSurface> {
    fit_quadratic(&design.points, responses)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorRange {
    pub factor: usize,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub relative_range: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrema {
    pub min_point: Vec<f64>,
    pub min_value: f64,
    pub max_point: Vec<f64>,
    pub max_value: f64,
    /// Response at the center of the box.
    pub baseline: f64,
    pub range: f64,
    /// `range / |baseline|`; `None` when the baseline is 0.
    pub relative_range: Option<f64>,
    /// One factor varied over its bounds, the others held at the center.
    pub per_factor: Vec<FactorRange>,
}

/// Exact extrema of a quadratic over a box: every face (each coordinate
/// free, at its lower bound, or at its upper bound) contributes its interior
/// stationary point when one exists inside the box.
pub fn surface_extrema(s: &QuadraticSurface, bounds: &[(f64, f64)]) -> Result<Extrema> {
    let k = s.factors;
    if bounds.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            found: bounds.len(),
        });
    }
    if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo <= hi)) {
        return Err(Error::IntervalOrder { a: *lo, b: *hi });
    }
    if k > 12 {
        return Err(Error::InvalidParameter(format!(
            "{k} factors is too many for face enumeration"
        )));
    }
    let hess = s.hessian();
    let center: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();

    let mut best_min = (f64::INFINITY, center.clone());
    let mut best_max = (f64::NEG_INFINITY, center.clone());
    let mut consider = |x: Vec<f64>| {
        let v = s.eval(&x);
        if v < best_min.0 {
            best_min = (v, x.clone());
        }
        if v > best_max.0 {
            best_max = (v, x);
        }
    };

    let combos = 3usize.pow(k as u32);
    for code in 0..combos {
        // 0 = free, 1 = lower bound, 2 = upper bound
        let mut state = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k {
            state.push(c % 3);
            c /= 3;
        }
        let mut x: Vec<f64> = (0..k)
            .map(|i| match state[i] {
                1 => bounds[i].0,
                2 => bounds[i].1,
                _ => 0.0,
            })
            .collect();
        let free: Vec<usize> = (0..k).filter(|&i| state[i] == 0).collect();
        if !free.is_empty() {
            // ∇f = b + H x = 0 on the free coordinates
            let f = free.len();
            let a = DMatrix::from_fn(f, f, |r, c| hess[(free[r], free[c])]);
            let rhs = DVector::from_fn(f, |r, _| {
                let i = free[r];
                let fixed: f64 = (0..k).filter(|j| state[*j] != 0).map(|j| hess[(i, j)] * x[j]).sum();
                -(s.linear[i] + fixed)
            });
            let Some(sol) = a.lu().solve(&rhs) else { continue };
            if sol.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let mut inside = true;
            for (r, &i) in free.iter().enumerate() {
                let (lo, hi) = bounds[i];
                let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                if sol[r] < lo - slack || sol[r] > hi + slack {
                    inside = false;
                }
                x[i] = sol[r].clamp(lo, hi);
            }
            if !inside {
                continue;
            }
        }
        consider(x);
    }

    let baseline = s.eval(&center);
    let rel = |range: f64| (baseline != 0.0).then(|| range / baseline.abs());
    let per_factor = (0..k)
        .map(|i| {
            let (lo, hi) = bounds[i];
            let at = |t: f64| {
                let mut x = center.clone();
                x[i] = t;
                s.eval(&x)
            };
            let mut vals = vec![at(lo), at(hi)];
            let curv = hess[(i, i)];
            if curv != 0.0 {
                let grad_c: f64 = s.linear[i] + (0..k).map(|j| hess[(i, j)] * center[j]).sum::<f64>();
                let t = center[i] - grad_c / curv;
                if t > lo && t < hi {
                    vals.push(at(t));
                }
            }
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            FactorRange {
                factor: i,
                min,
                max,
                range: max - min,
                relative_range: rel(max - min),
            }
        })
        .collect();

    Ok(Extrema {
        min_point: best_min.1,
        min_value: best_min.0,
        max_point: best_max.1,
        max_value: best_max.0,
        baseline,
        range: best_max.0 - best_min.0,
        relative_range: rel(best_max.0 - best_min.0),
        per_factor,
    })
}

/// χ of one alternative with selected γ weights scaled by `1 + δ·level`.
/// Weights are not renormalized, so χ is affine in each coded level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiResponse {
    pub gamma: Vec<f64>,
    pub xi: Vec<f64>,
    /// Feature positions driven by the design factors.
    pub factors: Vec<usize>,
    pub delta: f64,
}

impl ChiResponse {
    pub fn new(sel: &FeatureSelection, xi: Vec<f64>, factors: Vec<usize>, delta: f64) -> Result<Self> {
        if xi.len() != sel.len() {
            return Err(Error::LengthMismatch {
                expected: sel.len(),
                found: xi.len(),
            });
        }
        if factors.is_empty() || factors.iter().any(|&f| f >= sel.len()) {
            return Err(Error::InvalidParameter(
                "response factors must index the feature group".into(),
            ));
        }
        let mut uniq = factors.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != factors.len() {
            return Err(Error::InvalidParameter("response factors repeated".into()));
        }
        Ok(Self {
            gamma: sel.gamma.clone(),
            xi,
            factors,
            delta,
        })
    }

    pub fn eval(&self, levels: &[f64]) -> f64 {
        let mut g = self.gamma.clone();
        for (&f, &l) in self.factors.iter().zip(levels) {
            g[f] *= 1.0 + self.delta * l;
        }
        g.iter().zip(&self.xi).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsmStudy {
    pub design: BBDesign,
    pub responses: Vec<f64>,
    pub surface: QuadraticSurface,
    pub extrema: Extrema,
}

/// Evaluate the response at every design point, fit, and locate extrema over
/// the coded box [−1, 1]^k.
pub fn rsm_study(response: &ChiResponse, center_replicates: usize) -> Result<RsmStudy> {
    let k = response.factors.len();
    let design = bbd_design(k, center_replicates)?;
    let responses: Vec<f64> = design.points.iter().map(|p| response.eval(p)).collect();
    let surface = fit_response_surface(&design, &responses)?;
    let extrema = surface_extrema(&surface, &vec![(-1.0, 1.0); k])?;
    Ok(RsmStudy {
        design,
        responses,
        surface,
        extrema,
    })
}

/// Evenly spaced coded levels in [−1, 1].
pub fn grid_levels(per_axis: usize) -> Vec<f64> {
    match per_axis {
        0 => vec![],
        1 => vec![0.0],
        n => (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect(),
    }
}
