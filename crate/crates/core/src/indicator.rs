//! Indicator hierarchy, decision-matrix container and ingestion.
//!
//! The hierarchy is a two-level tree: five primary categories, each holding a
//! fixed number of secondary indicators (A1–A6, B1–B7, C1–C7, D1–D5, E1–E5).
//! Every downstream stage addresses columns by [`IndicatorId`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the primary-weight sum.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    A,
    B,
    C,
    D,
    E,
}

impl Category {
    pub const ALL: [Category; 5] = [Category::A, Category::B, Category::C, Category::D, Category::E];

    /// Number of secondary indicators in the full hierarchy.
    pub fn size(self) -> u8 {
        match self {
            Category::A => 6,
            Category::B => 7,
            Category::C => 7,
            Category::D => 5,
            Category::E => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::A => "Economy",
            Category::B => "Human",
            Category::C => "Sociocultural",
            Category::D => "Political",
            Category::E => "Environmental",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Category::A => 'A',
            Category::B => 'B',
            Category::C => 'C',
            Category::D => 'D',
            Category::E => 'E',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Category::A),
            'B' => Some(Category::B),
            'C' => Some(Category::C),
            'D' => Some(Category::D),
            'E' => Some(Category::E),
            _ => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Category::from_letter(c),
            _ => None,
        }
        .ok_or_else(|| Error::Format(format!("unknown category `{s}`")))
    }
}

/// Secondary indicator identifier such as `A5` or `D2`.
///
/// Ordering is category first, then index, which coincides with the
/// lexicographic order of the string form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndicatorId {
    category: Category,
    index: u8,
}

impl IndicatorId {
    pub fn new(category: Category, index: u8) -> Result<Self> {
        if index == 0 || index > category.size() {
            return Err(Error::UnknownIndicator(format!("{category}{index}")));
        }
        Ok(Self { category, index })
    }

    pub fn category(self) -> Category {
        self.category
    }

    pub fn index(self) -> u8 {
        self.index
    }

    /// All 30 indicators in hierarchy order.
    pub fn all() -> Vec<IndicatorId> {
        Category::ALL
            .iter()
            .flat_map(|&c| (1..=c.size()).map(move |i| IndicatorId { category: c, index: i }))
            .collect()
    }
}

impl fmt::Display for IndicatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.category, self.index)
    }
}

impl FromStr for IndicatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let unknown = || Error::UnknownIndicator(t.to_string());
        let mut chars = t.chars();
        let category = chars.next().and_then(Category::from_letter).ok_or_else(unknown)?;
        let rest = chars.as_str();
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: u8 = rest.parse().map_err(|_| unknown())?;
        IndicatorId::new(category, index).map_err(|_| unknown())
    }
}

impl Serialize for IndicatorId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IndicatorId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub id: IndicatorId,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub polarity: Polarity,
    /// Ideal interval `(a, b)` for interval-type positivization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal_interval: Option<(f64, f64)>,
}

impl IndicatorSpec {
    pub fn new(id: IndicatorId, name: impl Into<String>, polarity: Polarity) -> Self {
        Self {
            id,
            name: name.into(),
            polarity,
            ideal_interval: None,
        }
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Self {
        self.ideal_interval = Some((a, b));
        self
    }
}

/// The two-level indicator tree plus primary-category weights `U_i`.
///
/// Construction does not validate; call [`validate_hierarchy`] or
/// [`IndicatorHierarchy::validated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorHierarchy {
    pub specs: Vec<IndicatorSpec>,
    pub primary_weights: BTreeMap<Category, f64>,
    /// When set, the hierarchy may cover any subset of the 30 indicators.
    #[serde(default)]
    pub reduced: bool,
}

impl IndicatorHierarchy {
    pub fn new(specs: Vec<IndicatorSpec>, primary_weights: BTreeMap<Category, f64>) -> Self {
        Self {
            specs,
            primary_weights,
            reduced: false,
        }
    }

    pub fn reduced(specs: Vec<IndicatorSpec>, primary_weights: BTreeMap<Category, f64>) -> Self {
        Self {
            specs,
            primary_weights,
            reduced: true,
        }
    }

    /// Full 30-indicator hierarchy, all positive, uniform `U_i = 0.2`.
    pub fn standard() -> Self {
        let specs = IndicatorId::all()
            .into_iter()
            .map(|id| {
                IndicatorSpec::new(
                    id,
                    format!("{} {}", id.category().name(), id.index()),
                    Polarity::Positive,
                )
            })
            .collect();
        let primary_weights = Category::ALL.iter().map(|&c| (c, 0.2)).collect();
        Self::new(specs, primary_weights)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut h: IndicatorHierarchy =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("hierarchy: {e}")))?;
        h.sort();
        Ok(h)
    }

    pub fn validated(self) -> Result<Self> {
        let v = validate_hierarchy(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidHierarchy(v))
        }
    }

    /// Put specs into canonical (category, index) order.
    pub fn sort(&mut self) {
        self.specs.sort_by_key(|s| s.id);
    }

    pub fn ids(&self) -> Vec<IndicatorId> {
        self.specs.iter().map(|s| s.id).collect()
    }

    pub fn spec(&self, id: IndicatorId) -> Option<&IndicatorSpec> {
        self.specs.iter().find(|s| s.id == id)
    }

    pub fn position(&self, id: IndicatorId) -> Option<usize> {
        self.specs.iter().position(|s| s.id == id)
    }

    /// Categories that hold at least one indicator, in canonical order.
    pub fn categories(&self) -> Vec<Category> {
        let set: BTreeSet<Category> = self.specs.iter().map(|s| s.id.category()).collect();
        set.into_iter().collect()
    }

    pub fn ids_in(&self, category: Category) -> Vec<IndicatorId> {
        self.specs
            .iter()
            .map(|s| s.id)
            .filter(|id| id.category() == category)
            .collect()
    }

    pub fn primary_weight(&self, category: Category) -> Option<f64> {
        self.primary_weights.get(&category).copied()
    }

    pub fn with_primary_weights(mut self, weights: BTreeMap<Category, f64>) -> Self {
        self.primary_weights = weights;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Coverage,
    Duplicate,
    WeightSum,
    NegativeWeight,
    MissingWeight,
    IntervalOrder,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Coverage => "coverage",
            Rule::Duplicate => "duplicate",
            Rule::WeightSum => "weight-sum",
            Rule::NegativeWeight => "negative-weight",
            Rule::MissingWeight => "missing-weight",
            Rule::IntervalOrder => "interval-order",
        };
        f.write_str(s)
    }
}

/// A single broken hierarchy invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.field, self.message)
    }
}

/// Check every hierarchy invariant; an empty list means the hierarchy is valid.
pub fn validate_hierarchy(h: &IndicatorHierarchy) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for spec in &h.specs {
        if !seen.insert(spec.id) {
            out.push(Violation {
                field: format!("specs.{}", spec.id),
                rule: Rule::Duplicate,
                message: format!("indicator {} listed more than once", spec.id),
            });
        }
        if let Some((a, b)) = spec.ideal_interval {
            if !(a <= b) {
                out.push(Violation {
                    field: format!("specs.{}.ideal_interval", spec.id),
                    rule: Rule::IntervalOrder,
                    message: format!("a = {a} exceeds b = {b}"),
                });
            }
        }
    }
    if !h.reduced {
        let missing: Vec<String> = IndicatorId::all()
            .into_iter()
            .filter(|id| !seen.contains(id))
            .map(|id| id.to_string())
            .collect();
        if !missing.is_empty() {
            out.push(Violation {
                field: "specs".into(),
                rule: Rule::Coverage,
                message: format!("missing indicators: {}", missing.join(", ")),
            });
        }
    } else if h.specs.is_empty() {
        out.push(Violation {
            field: "specs".into(),
            rule: Rule::Coverage,
            message: "hierarchy has no indicators".into(),
        });
    }

    for c in h.categories() {
        if !h.primary_weights.contains_key(&c) {
            out.push(Violation {
                field: format!("primary_weights.{c}"),
                rule: Rule::MissingWeight,
                message: format!("no primary weight for category {c}"),
            });
        }
    }
    for (c, &w) in &h.primary_weights {
        if !(w >= 0.0) || !w.is_finite() {
            out.push(Violation {
                field: format!("primary_weights.{c}"),
                rule: Rule::NegativeWeight,
                message: format!("weight {w} must be a nonnegative finite number"),
            });
        }
    }
    let sum: f64 = h.primary_weights.values().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        out.push(Violation {
            field: "primary_weights".into(),
            rule: Rule::WeightSum,
            message: format!("weights sum to {sum}, expected 1"),
        });
    }
    out
}

/// Samples × indicators raw data with per-column metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMatrix {
    rows: Vec<String>,
    cols: Vec<IndicatorId>,
    values: DMatrix<f64>,
    polarity: Vec<Polarity>,
    ideal: Vec<Option<(f64, f64)>>,
    units: Vec<String>,
}

impl DecisionMatrix {
    /// Build from row-major values; columns are reordered into hierarchy order.
    pub fn new(rows: Vec<String>, cols: Vec<IndicatorId>, data: Vec<Vec<f64>>, h: &IndicatorHierarchy) -> Result<Self> {
        let units = vec![String::new(); cols.len()];
        Self::assemble(rows, cols, data, units, h)
    }

    fn assemble(
        rows: Vec<String>,
        cols: Vec<IndicatorId>,
        data: Vec<Vec<f64>>,
        units: Vec<String>,
        h: &IndicatorHierarchy,
    ) -> Result<Self> {
        let mut labels = HashSet::new();
        for r in &rows {
            if !labels.insert(r.as_str()) {
                return Err(Error::DuplicateLabel(r.clone()));
            }
        }
        let mut seen = HashSet::new();
        for &c in &cols {
            if !seen.insert(c) {
                return Err(Error::DuplicateColumn(c));
            }
            if h.spec(c).is_none() {
                return Err(Error::UnknownIndicator(c.to_string()));
            }
        }
        if data.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                found: data.len(),
            });
        }
        for (i, row) in data.iter().enumerate() {
            if row.len() != cols.len() {
                return Err(Error::ColumnCountMismatch {
                    line: i + 1,
                    expected: cols.len(),
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonNumeric {
                        row: rows[i].clone(),
                        column: cols[j].to_string(),
                        value: v.to_string(),
                    });
                }
            }
        }

        // hierarchy order
        let mut order: Vec<usize> = (0..cols.len()).collect();
        order.sort_by_key(|&j| h.position(cols[j]).unwrap_or(usize::MAX));
        let n = rows.len();
        let m = cols.len();
        let values = DMatrix::from_fn(n, m, |i, j| data[i][order[j]]);
        let cols: Vec<IndicatorId> = order.iter().map(|&j| cols[j]).collect();
        let units = order.iter().map(|&j| units[j].clone()).collect();
        let polarity = cols
            .iter()
            .map(|&c| h.spec(c).map(|s| s.polarity).unwrap_or_default())
            .collect();
        let ideal = cols.iter().map(|&c| h.spec(c).and_then(|s| s.ideal_interval)).collect();
        Ok(Self {
            rows,
            cols,
            values,
            polarity,
            ideal,
            units,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_indicators(&self) -> usize {
        self.cols.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.rows
    }

    pub fn indicators(&self) -> &[IndicatorId] {
        &self.cols
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn polarity(&self) -> &[Polarity] {
        &self.polarity
    }

    pub fn ideal_intervals(&self) -> &[Option<(f64, f64)>] {
        &self.ideal
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn column_index(&self, id: IndicatorId) -> Option<usize> {
        self.cols.iter().position(|&c| c == id)
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.iter().position(|r| r == label)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[(row, col)]
    }

    /// Restrict to the given indicators (kept in this matrix's column order).
    pub fn select(&self, ids: &[IndicatorId]) -> Result<DecisionMatrix> {
        let mut keep = Vec::with_capacity(ids.len());
        for &id in ids {
            keep.push(
                self.column_index(id)
                    .ok_or_else(|| Error::MissingValue(format!("column {id}")))?,
            );
        }
        keep.sort_unstable();
        keep.dedup();
        let values = DMatrix::from_fn(self.n_samples(), keep.len(), |i, j| self.values[(i, keep[j])]);
        Ok(DecisionMatrix {
            rows: self.rows.clone(),
            cols: keep.iter().map(|&j| self.cols[j]).collect(),
            values,
            polarity: keep.iter().map(|&j| self.polarity[j]).collect(),
            ideal: keep.iter().map(|&j| self.ideal[j]).collect(),
            units: keep.iter().map(|&j| self.units[j].clone()).collect(),
        })
    }

    /// Delimiter-separated text; floats use the shortest round-trip form.
    pub fn to_delimited(&self, delimiter: u8) -> String {
        let d = delimiter as char;
        let mut out = String::from("label");
        for c in &self.cols {
            out.push(d);
            out.push_str(&c.to_string());
        }
        out.push('\n');
        if self.units.iter().any(|u| !u.is_empty()) {
            out.push_str(UNITS_LABEL);
            for u in &self.units {
                out.push(d);
                out.push_str(u);
            }
            out.push('\n');
        }
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(r);
            for j in 0..self.n_indicators() {
                out.push(d);
                out.push_str(&self.values[(i, j)].to_string());
            }
            out.push('\n');
        }
        out
    }
}

const UNITS_LABEL: &str = "#units";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Reject,
    /// Replace empty cells with the mean of the column's present values.
    ColumnMean,
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub missing: MissingPolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            missing: MissingPolicy::Reject,
        }
    }
}

/// Read a delimiter-separated decision matrix.
///
/// The header row names indicators by id (`A1`, `C7`, ...); the first column
/// holds sample labels. An optional row labelled `#units` carries per-column
/// unit text.
pub fn load_decision_matrix<R: Read>(source: R, h: &IndicatorHierarchy, opts: &LoadOptions) -> Result<DecisionMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(None)
        .from_reader(source);

    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::Format(e.to_string()))?,
        None => return Err(Error::Format("empty decision matrix".into())),
    };
    if header.len() < 2 {
        return Err(Error::Format("header must name at least one indicator".into()));
    }
    let cols: Vec<IndicatorId> = header.iter().skip(1).map(str::parse).collect::<Result<_>>()?;
    let width = header.len();

    let mut rows = Vec::new();
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    let mut units = vec![String::new(); cols.len()];
    for (line, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() == 1 && rec.get(0).is_some_and(str::is_empty) {
            continue;
        }
        if rec.len() != width {
            return Err(Error::ColumnCountMismatch {
                line: line + 2,
                expected: width,
                found: rec.len(),
            });
        }
        let label = rec.get(0).unwrap_or_default().to_string();
        if label.eq_ignore_ascii_case(UNITS_LABEL) {
            units = rec.iter().skip(1).map(str::to_string).collect();
            continue;
        }
        let mut row = Vec::with_capacity(cols.len());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            row.push(parse_cell(cell, &label, cols[j])?);
        }
        rows.push(label);
        cells.push(row);
    }
    let data = resolve_missing(&rows, &cols, cells, opts.missing)?;
    DecisionMatrix::assemble(rows, cols, data, units, h)
}

fn parse_cell(cell: &str, row: &str, col: IndicatorId) -> Result<Option<f64>> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::NonNumeric {
            row: row.to_string(),
            column: col.to_string(),
            value: cell.to_string(),
        }),
    }
}

fn resolve_missing(
    rows: &[String],
    cols: &[IndicatorId],
    cells: Vec<Vec<Option<f64>>>,
    policy: MissingPolicy,
) -> Result<Vec<Vec<f64>>> {
    let mut means = vec![None; cols.len()];
    if policy == MissingPolicy::ColumnMean {
        for (j, mean) in means.iter_mut().enumerate() {
            let present: Vec<f64> = cells.iter().filter_map(|r| r[j]).collect();
            if !present.is_empty() {
                *mean = Some(present.iter().sum::<f64>() / present.len() as f64);
            }
        }
    }
    cells
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, v)| {
                    v.or(means[j]).ok_or_else(|| Error::MissingCell {
                        row: rows[i].clone(),
                        column: cols[j].to_string(),
                    })
                })
                .collect()
        })
        .collect()
}

#[derive(Deserialize)]
struct JsonMatrix {
    columns: Vec<String>,
    #[serde(default)]
    units: Option<Vec<String>>,
    rows: Vec<JsonRow>,
}

#[derive(Deserialize)]
struct JsonRow {
    label: String,
    values: Vec<Option<f64>>,
}

/// JSON equivalent of [`load_decision_matrix`]:
/// `{"columns": ["A1", ...], "units": [...], "rows": [{"label": "x", "values": [...]}]}`.
/// `null` cells count as missing.
pub fn load_decision_matrix_json(text: &str, h: &IndicatorHierarchy, opts: &LoadOptions) -> Result<DecisionMatrix> {
    let raw: JsonMatrix = serde_json::from_str(text).map_err(|e| Error::Format(format!("decision matrix: {e}")))?;
    let cols: Vec<IndicatorId> = raw.columns.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    let units = raw.units.unwrap_or_else(|| vec![String::new(); cols.len()]);
    if units.len() != cols.len() {
        return Err(Error::LengthMismatch {
            expected: cols.len(),
            found: units.len(),
        });
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (line, r) in raw.rows.into_iter().enumerate() {
        if r.values.len() != cols.len() {
            return Err(Error::ColumnCountMismatch {
                line: line + 1,
                expected: cols.len(),
                found: r.values.len(),
            });
        }
        rows.push(r.label);
        cells.push(r.values);
    }
    let data = resolve_missing(&rows, &cols, cells, opts.missing)?;
    DecisionMatrix::assemble(rows, cols, data, units, h)
}

/// Per-indicator weights (`V_j`, `H_j`, `W_j`, `Ω_ij` or `γ_j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub ids: Vec<IndicatorId>,
    pub values: Vec<f64>,
}

impl WeightSet {
    pub fn new(ids: Vec<IndicatorId>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: ids.len(),
                found: values.len(),
            });
        }
        Ok(Self { ids, values })
    }

    pub fn get(&self, id: IndicatorId) -> Option<f64> {
        self.ids.iter().position(|&i| i == id).map(|p| self.values[p])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndicatorId, f64)> + '_ {
        self.ids.iter().copied().zip(self.values.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> IndicatorId {
        s.parse().unwrap()
    }

    #[test]
    fn id_bounds_per_category() {
        assert_eq!(IndicatorId::all().len(), 30);
        assert!("A6".parse::<IndicatorId>().is_ok());
        assert!("A7".parse::<IndicatorId>().is_err());
        assert!("B7".parse::<IndicatorId>().is_ok());
        assert!("D6".parse::<IndicatorId>().is_err());
        assert!("E0".parse::<IndicatorId>().is_err());
        assert!("Z9".parse::<IndicatorId>().is_err());
        assert!("A".parse::<IndicatorId>().is_err());
        assert!("A+1".parse::<IndicatorId>().is_err());
    }

    #[test]
    fn id_string_round_trip() {
        for i in IndicatorId::all() {
            assert_eq!(i.to_string().parse::<IndicatorId>().unwrap(), i);
        }
        assert_eq!(id("A5").to_string(), "A5");
        assert_eq!(id("a5"), id("A5"));
    }

    #[test]
    fn id_order_is_lexicographic() {
        let mut ids = IndicatorId::all();
        ids.reverse();
        ids.sort();
        let strings: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
    }

    #[test]
    fn standard_hierarchy_is_valid() {
        assert!(validate_hierarchy(&IndicatorHierarchy::standard()).is_empty());
    }

    #[test]
    fn missing_b7_is_one_coverage_violation() {
        let mut h = IndicatorHierarchy::standard();
        h.specs.retain(|s| s.id != id("B7"));
        let v = validate_hierarchy(&h);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::Coverage);
        assert!(v[0].message.contains("B7"));
    }

    #[test]
    fn weight_sum_violation() {
        let mut h = IndicatorHierarchy::standard();
        h.primary_weights.insert(Category::E, 0.1);
        let v = validate_hierarchy(&h);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::WeightSum);
    }

    #[test]
    fn duplicate_and_interval_violations() {
        let mut h = IndicatorHierarchy::standard();
        h.specs.push(IndicatorSpec::new(id("A1"), "again", Polarity::Positive));
        h.specs[3].ideal_interval = Some((5.0, 1.0));
        let rules: Vec<Rule> = validate_hierarchy(&h).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::Duplicate));
        assert!(rules.contains(&Rule::IntervalOrder));
    }

    #[test]
    fn reduced_hierarchy_needs_only_present_categories() {
        let specs = vec![
            IndicatorSpec::new(id("A1"), "", Polarity::Positive),
            IndicatorSpec::new(id("A2"), "", Polarity::Positive),
        ];
        let h = IndicatorHierarchy::reduced(specs, [(Category::A, 1.0)].into());
        assert!(validate_hierarchy(&h).is_empty());
        let h2 = IndicatorHierarchy::reduced(h.specs.clone(), BTreeMap::new());
        let rules: Vec<Rule> = validate_hierarchy(&h2).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::MissingWeight));
    }

    #[test]
    fn load_reorders_columns() {
        let h = IndicatorHierarchy::standard();
        let text = "city,C1,A2,A1\nx,1,2,3\ny,4,5,6\n";
        let m = load_decision_matrix(text.as_bytes(), &h, &LoadOptions::default()).unwrap();
        assert_eq!(m.indicators(), &[id("A1"), id("A2"), id("C1")]);
        assert_eq!(m.column(0), vec![3.0, 6.0]);
        assert_eq!(m.column(2), vec![1.0, 4.0]);
    }

    #[test]
    fn load_errors() {
        let h = IndicatorHierarchy::standard();
        let o = LoadOptions::default();
        let e = load_decision_matrix("c,A1,Z9\nx,1,2\n".as_bytes(), &h, &o).unwrap_err();
        assert_eq!(e, Error::UnknownIndicator("Z9".into()));
        let e = load_decision_matrix("c,A1,A2\nx,1,abc\n".as_bytes(), &h, &o).unwrap_err();
        assert!(matches!(e, Error::NonNumeric { ref row, ref column, .. } if row == "x" && column == "A2"));
        let e = load_decision_matrix("c,A1,A2\nx,1,2\nx,3,4\n".as_bytes(), &h, &o).unwrap_err();
        assert_eq!(e, Error::DuplicateLabel("x".into()));
        let e = load_decision_matrix("c,A1,A2\nx,1\n".as_bytes(), &h, &o).unwrap_err();
        assert!(matches!(
            e,
            Error::ColumnCountMismatch {
                line: 2,
                expected: 3,
                found: 2
            }
        ));
        let e = load_decision_matrix("c,A1,A2\nx,1,\n".as_bytes(), &h, &o).unwrap_err();
        assert!(matches!(e, Error::MissingCell { .. }));
        let e = load_decision_matrix("c,A1,A1\nx,1,2\n".as_bytes(), &h, &o).unwrap_err();
        assert_eq!(e, Error::DuplicateColumn(id("A1")));
        let e = load_decision_matrix("c,A1\nx,inf\n".as_bytes(), &h, &o).unwrap_err();
        assert!(matches!(e, Error::NonNumeric { .. }));
    }

    #[test]
    fn column_mean_imputation() {
        let h = IndicatorHierarchy::standard();
        let o = LoadOptions {
            missing: MissingPolicy::ColumnMean,
            ..Default::default()
        };
        let m = load_decision_matrix("c,A1,A2\nx,1,\ny,3,4\nz,,8\n".as_bytes(), &h, &o).unwrap();
        assert_eq!(m.column(0), vec![1.0, 3.0, 2.0]);
        assert_eq!(m.column(1), vec![6.0, 4.0, 8.0]);
    }

    #[test]
    fn units_row_and_tab_delimiter() {
        let h = IndicatorHierarchy::standard();
        let o = LoadOptions {
            delimiter: b'\t',
            ..Default::default()
        };
        let m = load_decision_matrix("c\tA2\tA1\n#units\tusd\tpct\nx\t1\t2\ny\t3\t4\n".as_bytes(), &h, &o).unwrap();
        assert_eq!(m.units(), &["pct".to_string(), "usd".to_string()]);
        assert_eq!(m.n_samples(), 2);
    }

    #[test]
    fn json_matches_csv() {
        let h = IndicatorHierarchy::standard();
        let o = LoadOptions::default();
        let a = load_decision_matrix("c,B2,A1\nx,1.5,2\ny,3,4\n".as_bytes(), &h, &o).unwrap();
        let b = load_decision_matrix_json(
            r#"{"columns":["B2","A1"],"rows":[{"label":"x","values":[1.5,2]},{"label":"y","values":[3,4]}]}"#,
            &h,
            &o,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn polarity_attached() {
        let mut h = IndicatorHierarchy::standard();
        h.specs[1].polarity = Polarity::Negative;
        let m = load_decision_matrix("c,A2,A1\nx,1,2\ny,3,4\n".as_bytes(), &h, &LoadOptions::default()).unwrap();
        assert_eq!(m.polarity(), &[Polarity::Positive, Polarity::Negative]);
    }

    #[test]
    fn hierarchy_json_round_trip() {
        let mut h = IndicatorHierarchy::standard();
        h.specs[0] = h.specs[0].clone().with_interval(1.0, 2.0);
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(IndicatorHierarchy::from_json(&text).unwrap(), h);
    }
}
