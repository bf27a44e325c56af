//! Combination of subjective and objective weights by ordered importance
//! ratios, total weights, feature-factor selection and the evaluation
//! function χ.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ahp::AhpWeights;
use crate::entropy::{entropy_weights, prepare};
use crate::error::{Error, Result};
use crate::indicator::{Category, DecisionMatrix, IndicatorHierarchy, IndicatorId, Polarity, WeightSet};

/// Largest indicator count accepted by [`order_weights`].
pub const MAX_ORDERED: usize = 64;
/// Cap on adjacent importance ratios.
pub const RATIO_CAP: f64 = 2.0;
/// Default cumulative-weight target for coverage-based feature selection.
pub const DEFAULT_COVERAGE: f64 = 0.735;
pub const DEFAULT_FEATURES: usize = 10;

/// Per-column dispersion about the harmonically scaled column mean:
///
/// `s_j = sqrt( (1/n) Σ_i (x_ij − x̄_j·(H_j + V_j)/(H_j·V_j))² )`
///
/// with `n` the number of samples. Evaluated as written; the scaled mean
/// usually lies well outside the data range.
pub fn dispersion(x: &DMatrix<f64>, objective: &[f64], subjective: &[f64]) -> Result<Vec<f64>> {
    let (n, m) = x.shape();
    for w in [objective, subjective] {
        if w.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                found: w.len(),
            });
        }
    }
    if n == 0 {
        return Err(Error::TooSmall {
            what: "dispersion",
            min: 1,
            found: 0,
        });
    }
    (0..m)
        .map(|j| {
            let (h, v) = (objective[j], subjective[j]);
            if !(h > 0.0) {
                return Err(Error::ZeroWeight(format!("objective #{}", j + 1)));
            }
            if !(v > 0.0) {
                return Err(Error::ZeroWeight(format!("subjective #{}", j + 1)));
            }
            let col = x.column(j);
            let centre = col.mean() * (h + v) / (h * v);
            let ss: f64 = col.iter().map(|&xi| (xi - centre).powi(2)).sum();
            Ok((ss / n as f64).sqrt())
        })
        .collect()
}

/// Indices sorted by descending value, ties by ascending index.
pub fn descending_order(s: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRatios {
    /// Indicator positions from most to least important.
    pub ordering: Vec<usize>,
    /// `r_k` for k = 2..=m along the ordering (length m − 1).
    pub ratios: Vec<f64>,
    /// Positions k (2-based, like the ratios) whose ratio was clamped because
    /// the denominator dispersion was zero.
    pub clamped: Vec<usize>,
}

/// `r_k = min{2, s_{k−1}/s_k}` when `s_{k−1} ≥ s_k`, else 1, along `ordering`.
pub fn importance_ratios(s: &[f64], ordering: &[usize]) -> Result<ImportanceRatios> {
    check_permutation(ordering, s.len())?;
    let mut ratios = Vec::with_capacity(s.len().saturating_sub(1));
    let mut clamped = Vec::new();
    for k in 1..ordering.len() {
        let prev = s[ordering[k - 1]];
        let cur = s[ordering[k]];
        let r = if prev >= cur {
            if cur > 0.0 {
                (prev / cur).min(RATIO_CAP)
            } else if prev > 0.0 {
                clamped.push(k + 1);
                RATIO_CAP
            } else {
                1.0
            }
        } else {
            1.0
        };
        ratios.push(r);
    }
    Ok(ImportanceRatios {
        ordering: ordering.to_vec(),
        ratios,
        clamped,
    })
}

fn check_permutation(ordering: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    if ordering.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: ordering.len(),
        });
    }
    for &p in ordering {
        if p >= m || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidParameter(format!(
                "ordering is not a permutation of 0..{m}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedWeights {
    pub ordering: Vec<usize>,
    /// Weight per indicator position (not per rank).
    pub weights: Vec<f64>,
}

impl CombinedWeights {
    /// Weights listed along the ordering.
    pub fn ranked(&self) -> Vec<f64> {
        self.ordering.iter().map(|&p| self.weights[p]).collect()
    }
}

/// Rank-positional weights from adjacent ratios:
/// `W_m = (1 + Σ_{k=2}^{m} Π_{j=k}^{m} r_j)^{-1}`, `W_{j−1} = r_j W_j`.
pub fn ranked_weights(ratios: &[f64]) -> Result<Vec<f64>> {
    let m = ratios.len() + 1;
    if m > MAX_ORDERED {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_ORDERED} indicators, got {m}"
        )));
    }
    if let Some(r) = ratios.iter().find(|r| !(1.0..=RATIO_CAP).contains(*r)) {
        return Err(Error::InvalidParameter(format!("importance ratio {r} outside [1, 2]")));
    }
    // ratios[k - 2] holds r_k
    let mut denom = 1.0;
    let mut product = 1.0;
    for r in ratios.iter().rev() {
        product *= r;
        denom += product;
    }
    let mut w = vec![0.0; m];
    w[m - 1] = 1.0 / denom;
    for k in (1..m).rev() {
        w[k - 1] = ratios[k - 1] * w[k];
    }
    Ok(w)
}

pub fn order_weights(r: &ImportanceRatios) -> Result<CombinedWeights> {
    let ranked = ranked_weights(&r.ratios)?;
    let mut weights = vec![0.0; ranked.len()];
    for (rank, &pos) in r.ordering.iter().enumerate() {
        weights[pos] = ranked[rank];
    }
    Ok(CombinedWeights {
        ordering: r.ordering.clone(),
        weights,
    })
}

/// Dispersion, descending ordering, ratios and ordered weights in one step.
pub fn combine(
    x: &DMatrix<f64>,
    objective: &[f64],
    subjective: &[f64],
) -> Result<(Vec<f64>, ImportanceRatios, CombinedWeights)> {
    let s = dispersion(x, objective, subjective)?;
    let r = importance_ratios(&s, &descending_order(&s))?;
    let w = order_weights(&r)?;
    Ok((s, r, w))
}

/// `Ω_ij = U_i · u_j` over the hierarchy's indicators, in hierarchy order.
pub fn total_weights(h: &IndicatorHierarchy, per_category: &BTreeMap<Category, WeightSet>) -> Result<WeightSet> {
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for c in h.categories() {
        let u = per_category.get(&c).ok_or(Error::MissingCategory(c))?;
        let big_u = h.primary_weight(c).ok_or(Error::MissingCategory(c))?;
        for id in h.ids_in(c) {
            let local = u
                .get(id)
                .ok_or_else(|| Error::MissingValue(format!("weight for {id}")))?;
            ids.push(id);
            values.push(big_u * local);
        }
    }
    Ok(WeightSet { ids, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombinationMode {
    /// Combine within each category, then scale by the category weight.
    #[default]
    PerCategory,
    /// Combine all indicators in a single ordering.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryCombination {
    pub ids: Vec<IndicatorId>,
    pub dispersion: Vec<f64>,
    pub ratios: ImportanceRatios,
    pub weights: CombinedWeights,
}

/// Every weight vector produced by the combined pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightingReport {
    pub mode: CombinationMode,
    pub primary: BTreeMap<Category, f64>,
    /// AHP `V_j`, local to the category (per-category) or global.
    pub subjective: WeightSet,
    /// Entropy `H_j`, local to the category (per-category) or global.
    pub objective: WeightSet,
    pub entropies: WeightSet,
    /// Ordered-ratio combination `W_j` (`u_j` in per-category mode).
    pub combined: WeightSet,
    pub total: WeightSet,
    pub groups: Vec<CategoryCombination>,
}

/// AHP + entropy + ordered-ratio combination + total weights.
///
/// `data` must carry a column for every hierarchy indicator.
pub fn combined_weights(
    h: &IndicatorHierarchy,
    data: &DecisionMatrix,
    ahp: &AhpWeights,
    mode: CombinationMode,
) -> Result<WeightingReport> {
    let hier = h.clone().with_primary_weights(ahp.primary.clone());
    let groups: Vec<(Option<Category>, Vec<IndicatorId>)> = match mode {
        CombinationMode::PerCategory => hier
            .categories()
            .into_iter()
            .map(|c| (Some(c), hier.ids_in(c)))
            .collect(),
        CombinationMode::Global => vec![(None, hier.ids())],
    };
    let subjective_all = match mode {
        CombinationMode::PerCategory => ahp.local.clone(),
        CombinationMode::Global => ahp.global(),
    };

    let mut subjective = WeightSet {
        ids: vec![],
        values: vec![],
    };
    let mut objective = subjective.clone();
    let mut entropies = subjective.clone();
    let mut combined = subjective.clone();
    let mut per_category = BTreeMap::new();
    let mut details = Vec::new();
    for (cat, ids) in groups {
        let sub = data.select(&ids)?;
        let v: Vec<f64> = ids
            .iter()
            .map(|&id| {
                subjective_all
                    .get(id)
                    .ok_or_else(|| Error::MissingValue(format!("subjective weight for {id}")))
            })
            .collect::<Result<_>>()?;
        let (hw, ew, x) = if ids.len() == 1 {
            (vec![1.0], vec![0.0], None)
        } else {
            let z = prepare(&sub)?;
            let r = entropy_weights(&z)?;
            (r.weights, r.entropies, Some(z))
        };
        let (s, ratios, w) = match x {
            Some(z) => combine(&z.values, &hw, &v).map_err(|e| name_weight_error(e, &ids))?,
            None => {
                let r = importance_ratios(&[0.0], &[0])?;
                let w = order_weights(&r)?;
                (vec![0.0], r, w)
            }
        };
        let ws = WeightSet {
            ids: ids.clone(),
            values: w.weights.clone(),
        };
        if let Some(c) = cat {
            per_category.insert(c, ws.clone());
        }
        subjective.ids.extend(&ids);
        subjective.values.extend(&v);
        objective.ids.extend(&ids);
        objective.values.extend(&hw);
        entropies.ids.extend(&ids);
        entropies.values.extend(&ew);
        combined.ids.extend(&ids);
        combined.values.extend(&w.weights);
        details.push(CategoryCombination {
            ids,
            dispersion: s,
            ratios,
            weights: w,
        });
    }
    let total = match mode {
        CombinationMode::PerCategory => total_weights(&hier, &per_category)?,
        CombinationMode::Global => combined.clone(),
    };
    Ok(WeightingReport {
        mode,
        primary: hier.primary_weights.clone(),
        subjective,
        objective,
        entropies,
        combined,
        total,
        groups: details,
    })
}

fn name_weight_error(e: Error, ids: &[IndicatorId]) -> Error {
    match e {
        Error::ZeroWeight(s) => {
            let (kind, pos) = s.split_once(" #").unwrap_or((&s, ""));
            match pos.parse::<usize>().ok().and_then(|k| ids.get(k - 1)) {
                Some(id) => Error::ZeroWeight(format!("{kind} {id}")),
                None => Error::ZeroWeight(s),
            }
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureCount {
    /// Exactly `k` features.
    Fixed(usize),
    /// Smallest `k` whose cumulative Ω reaches the target.
    Coverage(f64),
}

impl Default for FeatureCount {
    fn default() -> Self {
        FeatureCount::Fixed(DEFAULT_FEATURES)
    }
}

/// The feature-factor group ξ and its adjusted weights γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub ids: Vec<IndicatorId>,
    pub gamma: Vec<f64>,
    /// Sum of total weights over the selected indicators.
    pub coverage: f64,
}

impl FeatureSelection {
    /// Feature group with weights used as given (no renormalization).
    pub fn from_weights(ids: Vec<IndicatorId>, gamma: Vec<f64>) -> Result<Self> {
        if ids.len() != gamma.len() {
            return Err(Error::LengthMismatch {
                expected: ids.len(),
                found: gamma.len(),
            });
        }
        let mut seen = HashSet::new();
        if let Some(d) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::InvalidParameter(format!("feature {d} repeated")));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "feature weight {g} must be nonnegative"
            )));
        }
        let coverage = gamma.iter().sum();
        Ok(Self { ids, gamma, coverage })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: IndicatorId) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    pub fn gamma_of(&self, id: IndicatorId) -> Option<f64> {
        self.position(id).map(|p| self.gamma[p])
    }
}

/// Top-k indicators by Ω (ties by id), with γ_j = Ω_j / Σ_selected Ω.
pub fn select_features(omega: &WeightSet, count: FeatureCount) -> Result<FeatureSelection> {
    let m = omega.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        omega.values[b]
            .total_cmp(&omega.values[a])
            .then(omega.ids[a].cmp(&omega.ids[b]))
    });
    let k = match count {
        FeatureCount::Fixed(k) => k,
        FeatureCount::Coverage(target) => {
            let mut acc = 0.0;
            order
                .iter()
                .position(|&p| {
                    acc += omega.values[p];
                    acc >= target
                })
                .map_or(m, |p| p + 1)
        }
    };
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("feature count {k} outside 1..={m}")));
    }
    let chosen = &order[..k];
    let coverage: f64 = chosen.iter().map(|&p| omega.values[p]).sum();
    if !(coverage > 0.0) {
        return Err(Error::ZeroWeight("selected feature group".into()));
    }
    Ok(FeatureSelection {
        ids: chosen.iter().map(|&p| omega.ids[p]).collect(),
        gamma: chosen.iter().map(|&p| omega.values[p] / coverage).collect(),
        coverage,
    })
}

/// χ = Σ_j γ_j ξ_j.
pub fn evaluate_chi(sel: &FeatureSelection, xi: &[f64]) -> Result<f64> {
    if xi.len() != sel.len() {
        return Err(Error::LengthMismatch {
            expected: sel.len(),
            found: xi.len(),
        });
    }
    Ok(sel.gamma.iter().zip(xi).map(|(g, x)| g * x).sum())
}

/// Min-max scale a column across alternatives, flipping negative columns so
/// that 1 is always best. A constant column scales to all zeros.
pub fn min_max_scale(col: &[f64], polarity: Polarity) -> Vec<f64> {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    col.iter()
        .map(|&v| {
            if !(span > 0.0) {
                0.0
            } else {
                match polarity {
                    Polarity::Positive => (v - lo) / span,
                    Polarity::Negative => (hi - v) / span,
                }
            }
        })
        .collect()
}

/// Scaled feature scores ξ for every alternative (rows) and feature (columns).
pub fn feature_scores(data: &DecisionMatrix, ids: &[IndicatorId]) -> Result<DMatrix<f64>> {
    let n = data.n_samples();
    let mut out = DMatrix::zeros(n, ids.len());
    for (j, &id) in ids.iter().enumerate() {
        let col = data
            .column_index(id)
            .ok_or_else(|| Error::MissingValue(format!("feature {id}")))?;
        let scaled = min_max_scale(&data.column(col), data.polarity()[col]);
        for (i, v) in scaled.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub label: String,
    pub xi: Vec<f64>,
    pub chi: f64,
}

/// χ for every alternative in `data` using min-max scaled feature values.
pub fn evaluate_alternatives(data: &DecisionMatrix, sel: &FeatureSelection) -> Result<Vec<Evaluation>> {
    let scores = feature_scores(data, &sel.ids)?;
    data.labels()
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let xi: Vec<f64> = scores.row(i).iter().copied().collect();
            let chi = evaluate_chi(sel, &xi)?;
            Ok(Evaluation {
                label: label.clone(),
                xi,
                chi,
            })
        })
        .collect()
}
