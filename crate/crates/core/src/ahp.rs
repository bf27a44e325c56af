//! Analytic Hierarchy Process: judgment matrices, principal eigenvector
//! weights and the CI/CR consistency gate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::{Category, IndicatorHierarchy, WeightSet};

/// Reciprocity and diagonal tolerance.
pub const RECIPROCAL_TOL: f64 = 1e-9;
/// Consistency gate: a matrix passes when `CR < CR_THRESHOLD`.
pub const CR_THRESHOLD: f64 = 0.1;
const SCALE_MIN: f64 = 1.0 / 9.0;
const SCALE_MAX: f64 = 9.0;
const SCALE_TOL: f64 = 1e-12;

/// Saaty's average random consistency index for orders 1 through 15.
pub const RANDOM_INDEX: [f64; 15] = [
    0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49, 1.51, 1.48, 1.56, 1.57, 1.59,
];

pub const MAX_ITERATIONS: usize = 10_000;
const CONVERGENCE_TOL: f64 = 1e-12;

/// Random index for a matrix of order `n`, if tabulated.
pub fn random_index(n: usize) -> Option<f64> {
    n.checked_sub(1).and_then(|i| RANDOM_INDEX.get(i)).copied()
}

/// A validated positive reciprocal matrix on the 1/9..9 scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JudgmentMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl JudgmentMatrix {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Consistent matrix `b_ij = w_i / w_j` generated from a priority vector.
    pub fn from_priorities(w: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = w.iter().map(|&wi| w.iter().map(|&wj| wi / wj).collect()).collect();
        validate_judgment(&rows)
    }

    fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

/// A judgment cell as written in a file: a number or a fraction like `"1/3"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Cell {
    Number(f64),
    Text(String),
}

impl Cell {
    fn value(&self) -> Result<f64> {
        match self {
            Cell::Number(v) => Ok(*v),
            Cell::Text(t) => parse_fraction(t).ok_or_else(|| Error::Format(format!("judgment entry `{t}`"))),
        }
    }
}

fn parse_fraction(t: &str) -> Option<f64> {
    match t.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => t.trim().parse().ok(),
    }
}

fn cells_to_rows(cells: &[Vec<Cell>]) -> Result<Vec<Vec<f64>>> {
    cells.iter().map(|r| r.iter().map(Cell::value).collect()).collect()
}

impl<'de> Deserialize<'de> for JudgmentMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cells = Vec::<Vec<Cell>>::deserialize(d)?;
        cells_to_rows(&cells)
            .and_then(|rows| validate_judgment(&rows))
            .map_err(serde::de::Error::custom)
    }
}

/// Validate a square positive reciprocal matrix. Cell indices in errors are
/// 1-based. No entry is repaired.
#[allow(clippy::needless_range_loop)] // (i, j) and (j, i) are visited together
pub fn validate_judgment(rows: &[Vec<f64>]) -> Result<JudgmentMatrix> {
    let n = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                row: r + 1,
                cols: row.len(),
            });
        }
    }
    if !(2..=15).contains(&n) {
        return Err(Error::UnsupportedOrder(n));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveEntry {
                    row: i + 1,
                    col: j + 1,
                    value: v,
                });
            }
        }
    }
    for i in 0..n {
        if (rows[i][i] - 1.0).abs() > RECIPROCAL_TOL {
            return Err(Error::Diagonal(i + 1));
        }
        for j in (i + 1)..n {
            let (a, b) = (rows[i][j], rows[j][i]);
            if (a * b - 1.0).abs() > RECIPROCAL_TOL {
                return Err(Error::Reciprocity {
                    i: i + 1,
                    j: j + 1,
                    b_ij: a,
                    b_ji: b,
                });
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(SCALE_MIN * (1.0 - SCALE_TOL)..=SCALE_MAX * (1.0 + SCALE_TOL)).contains(&v) {
                return Err(Error::OutOfScale {
                    row: i + 1,
                    col: j + 1,
                    value: v,
                });
            }
        }
    }
    Ok(JudgmentMatrix {
        n,
        entries: rows.iter().flatten().copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigen {
    pub lambda_max: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
}

/// Principal eigenpair by power iteration with L1 renormalization.
pub fn principal_eigen(m: &JudgmentMatrix) -> Result<Eigen> {
    principal_eigen_from(m, &vec![1.0; m.order()])
}

/// Power iteration from a caller-supplied positive start vector.
pub fn principal_eigen_from(m: &JudgmentMatrix, start: &[f64]) -> Result<Eigen> {
    let n = m.order();
    if start.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: start.len(),
        });
    }
    if start.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "power-iteration start vector must be positive".into(),
        ));
    }
    let mut w = normalize_l1(start.to_vec());
    let mut next = vec![0.0; n];
    for it in 1..=MAX_ITERATIONS {
        m.mul_vec(&w, &mut next);
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        let delta = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut w, &mut next);
        if delta < CONVERGENCE_TOL {
            let mut mw = vec![0.0; n];
            m.mul_vec(&w, &mut mw);
            let lambda_max = mw.iter().zip(&w).map(|(a, b)| a / b).sum::<f64>() / n as f64;
            return Ok(Eigen {
                lambda_max,
                weights: w,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}

fn normalize_l1(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n: usize,
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub pass: bool,
}

/// CI = (λmax − n)/(n − 1), CR = CI/RI. Orders ≤ 2 always pass with CR = 0.
pub fn consistency(m: &JudgmentMatrix, lambda_max: f64) -> Result<ConsistencyReport> {
    let n = m.order();
    let ri = random_index(n).ok_or(Error::UnsupportedOrder(n))?;
    let ci = if n > 1 {
        (lambda_max - n as f64) / (n as f64 - 1.0)
    } else {
        0.0
    };
    let (cr, pass) = if n <= 2 {
        (0.0, true)
    } else {
        (ci / ri, ci / ri < CR_THRESHOLD)
    };
    Ok(ConsistencyReport {
        n,
        lambda_max,
        ci,
        ri,
        cr,
        pass,
    })
}

/// Judgment matrices keyed by level: the category level compares the
/// primary categories, each category level compares its own indicators.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Judgments {
    /// Pairwise comparison of the categories present in the hierarchy,
    /// in canonical category order.
    #[serde(default)]
    pub criteria: Option<JudgmentMatrix>,
    #[serde(default)]
    pub categories: BTreeMap<Category, JudgmentMatrix>,
}

impl Judgments {
    /// Parse `{"criteria": [[...]], "categories": {"A": [[...]], ...}}`.
    /// Entries may be numbers or fraction strings; validation errors keep
    /// their own kind and are not folded into a format error.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            criteria: Option<Vec<Vec<Cell>>>,
            #[serde(default)]
            categories: BTreeMap<Category, Vec<Vec<Cell>>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Format(format!("judgments: {e}")))?;
        let criteria = raw
            .criteria
            .map(|c| cells_to_rows(&c).and_then(|r| validate_judgment(&r)))
            .transpose()?;
        let categories = raw
            .categories
            .into_iter()
            .map(|(c, m)| Ok((c, validate_judgment(&cells_to_rows(&m)?)?)))
            .collect::<Result<_>>()?;
        Ok(Self { criteria, categories })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: String,
    pub report: ConsistencyReport,
}

/// Output of [`ahp_weights`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhpWeights {
    /// `U_i` per category.
    pub primary: BTreeMap<Category, f64>,
    /// `V_j` per indicator, summing to 1 within each category.
    pub local: WeightSet,
    pub reports: Vec<LevelReport>,
}

impl AhpWeights {
    /// `U_i · V_j`, a single vector over all indicators summing to 1.
    pub fn global(&self) -> WeightSet {
        let values = self
            .local
            .iter()
            .map(|(id, v)| self.primary.get(&id.category()).copied().unwrap_or(0.0) * v)
            .collect();
        WeightSet {
            ids: self.local.ids.clone(),
            values,
        }
    }
}

/// Subjective weights for a hierarchy.
///
/// Categories holding a single indicator need no matrix (weight 1). When the
/// hierarchy spans one category, the criteria matrix is optional. Without a
/// criteria matrix the hierarchy's configured primary weights are used.
pub fn ahp_weights(h: &IndicatorHierarchy, judgments: &Judgments) -> Result<AhpWeights> {
    let cats = h.categories();
    let mut reports = Vec::new();

    let primary: BTreeMap<Category, f64> = match &judgments.criteria {
        Some(m) => {
            let w = gated_weights("criteria", m, cats.len(), &mut reports)?;
            cats.iter().copied().zip(w).collect()
        }
        None if cats.len() == 1 => [(cats[0], 1.0)].into(),
        None => {
            let mut p = BTreeMap::new();
            for &c in &cats {
                let u = h
                    .primary_weight(c)
                    .ok_or_else(|| Error::MissingJudgment("criteria".into()))?;
                p.insert(c, u);
            }
            p
        }
    };

    let mut ids = Vec::new();
    let mut values = Vec::new();
    for &c in &cats {
        let members = h.ids_in(c);
        let w = if members.len() == 1 {
            vec![1.0]
        } else {
            let level = c.to_string();
            let m = judgments
                .categories
                .get(&c)
                .ok_or_else(|| Error::MissingJudgment(level.clone()))?;
            gated_weights(&level, m, members.len(), &mut reports)?
        };
        ids.extend(members);
        values.extend(w);
    }
    Ok(AhpWeights {
        primary,
        local: WeightSet { ids, values },
        reports,
    })
}

fn gated_weights(level: &str, m: &JudgmentMatrix, expected: usize, reports: &mut Vec<LevelReport>) -> Result<Vec<f64>> {
    if m.order() != expected {
        return Err(Error::JudgmentOrder {
            level: level.to_string(),
            expected,
            found: m.order(),
        });
    }
    let eig = principal_eigen(m)?;
    let report = consistency(m, eig.lambda_max)?;
    if !report.pass {
        return Err(Error::Inconsistent {
            level: level.to_string(),
            cr: report.cr,
        });
    }
    reports.push(LevelReport {
        level: level.to_string(),
        report,
    });
    Ok(eig.weights)
}
