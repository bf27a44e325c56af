//! Host-city screening: candidate pool, climate hard constraints, medal
//! points, suitability scores and ranking, scheme comparison and SWOT
//! records.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combined::{evaluate_chi, feature_scores, FeatureSelection};
use crate::error::{Error, Result};
use crate::grey::{forecast_series, TimeSeries};
use crate::indicator::{IndicatorHierarchy, IndicatorId, IndicatorSpec, Polarity};
use crate::DecisionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimateVariable {
    /// February mean temperature, °C.
    FebTemp,
    /// February snowfall, cm.
    FebSnow,
}

impl fmt::Display for ClimateVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClimateVariable::FebTemp => "feb_temp",
            ClimateVariable::FebSnow => "feb_snow",
        })
    }
}

impl std::str::FromStr for ClimateVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "feb_temp" => Ok(ClimateVariable::FebTemp),
            "feb_snow" => Ok(ClimateVariable::FebSnow),
            other => Err(Error::Format(format!("unknown climate variable `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedalTally {
    pub gold: u32,
    pub silver: u32,
    pub bronze: u32,
}

impl MedalTally {
    pub fn new(gold: u32, silver: u32, bronze: u32) -> Self {
        Self { gold, silver, bronze }
    }

    pub fn points(&self) -> f64 {
        medal_points(self)
    }
}

/// 5 per gold, 1 per silver, 0.5 per bronze.
pub fn medal_points(t: &MedalTally) -> f64 {
    5.0 * f64::from(t.gold) + f64::from(t.silver) + 0.5 * f64::from(t.bronze)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityProfile {
    pub name: String,
    pub country: String,
    #[serde(default)]
    pub gdp: f64,
    #[serde(default)]
    pub sports_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medals: Option<MedalTally>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub climate: BTreeMap<ClimateVariable, TimeSeries>,
    /// Indicator histories for forecasting.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub history: BTreeMap<IndicatorId, TimeSeries>,
    /// Current (or projected) indicator values.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub indicators: BTreeMap<IndicatorId, f64>,
}

impl CityProfile {
    pub fn new(name: impl Into<String>, country: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            country: country.into(),
            gdp: 0.0,
            sports_score: 0.0,
            medals: None,
            climate: BTreeMap::new(),
            history: BTreeMap::new(),
            indicators: BTreeMap::new(),
        }
    }

    /// Medal points when a tally is present, otherwise the configured score.
    pub fn sports_points(&self) -> f64 {
        self.medals.as_ref().map_or(self.sports_score, medal_points)
    }
}

/// Parse a JSON array of city profiles, rejecting duplicate name+country.
pub fn load_pool(text: &str) -> Result<Vec<CityProfile>> {
    let pool: Vec<CityProfile> = serde_json::from_str(text).map_err(|e| Error::Format(format!("city pool: {e}")))?;
    let mut seen = HashSet::new();
    for c in &pool {
        if !seen.insert((c.name.as_str(), c.country.as_str())) {
            return Err(Error::DuplicateLabel(format!("{} ({})", c.name, c.country)));
        }
    }
    Ok(pool)
}

/// Which series of a city to forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKey {
    Indicator(IndicatorId),
    Climate(ClimateVariable),
}

impl std::str::FromStr for SeriesKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<ClimateVariable>()
            .map(SeriesKey::Climate)
            .or_else(|_| s.parse::<IndicatorId>().map(SeriesKey::Indicator))
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesKey::Indicator(id) => id.fmt(f),
            SeriesKey::Climate(v) => v.fmt(f),
        }
    }
}

/// History of a city's indicator (or climate variable) extended to `until`.
pub fn forecast_indicator(city: &CityProfile, key: SeriesKey, until: i32) -> Result<crate::grey::ForecastSeries> {
    let history = match key {
        SeriesKey::Indicator(id) => city.history.get(&id),
        SeriesKey::Climate(v) => city.climate.get(&v),
    }
    .ok_or_else(|| Error::MissingValue(format!("{key} history for {}", city.name)))?;
    let mut h = history.clone();
    if h.label.is_empty() {
        h.label = format!("{}:{key}", city.name);
    }
    forecast_series(&h, until)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// Keep cities ranked at or above this position (1 = best).
    Rank(usize),
    /// Keep cities whose value is at least this.
    Value(f64),
}

impl Cutoff {
    fn admits(self, rank: usize, value: f64) -> bool {
        match self {
            Cutoff::Rank(r) => rank <= r,
            Cutoff::Value(v) => value >= v,
        }
    }
}

/// Descending 1-based ranks; ties keep input order.
fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut r = vec![0; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        r[i] = pos + 1;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Screening {
    pub cities: Vec<CityProfile>,
    pub warning: Option<String>,
}

/// Stage-1 pool: national GDP and sports development cutoffs, result sorted
/// by the sum of the two ranks (stable).
pub fn screen_candidates(pool: &[CityProfile], gdp: Cutoff, sports: Cutoff) -> Result<Screening> {
    if pool.is_empty() {
        return Err(Error::TooSmall {
            what: "candidate pool",
            min: 1,
            found: 0,
        });
    }
    let gdp_v: Vec<f64> = pool.iter().map(|c| c.gdp).collect();
    let sport_v: Vec<f64> = pool.iter().map(|c| c.sports_points()).collect();
    let (gr, sr) = (ranks(&gdp_v), ranks(&sport_v));
    let mut keep: Vec<usize> = (0..pool.len())
        .filter(|&i| gdp.admits(gr[i], gdp_v[i]) && sports.admits(sr[i], sport_v[i]))
        .collect();
    keep.sort_by_key(|&i| gr[i] + sr[i]);
    let warning = keep
        .is_empty()
        .then(|| "screening cutoffs exclude every city".to_string());
    Ok(Screening {
        cities: keep.into_iter().map(|i| pool[i].clone()).collect(),
        warning,
    })
}

/// Summer sports screen: rank by medal points.
pub fn medal_screen(cities: &[CityProfile], cutoff: Cutoff) -> Vec<CityProfile> {
    let pts: Vec<f64> = cities.iter().map(|c| c.sports_points()).collect();
    let r = ranks(&pts);
    let mut keep: Vec<usize> = (0..cities.len()).filter(|&i| cutoff.admits(r[i], pts[i])).collect();
    keep.sort_by_key(|&i| r[i]);
    keep.into_iter().map(|i| cities[i].clone()).collect()
}

/// Drop cities named in a configured exclusion list.
pub fn exclude(cities: &[CityProfile], names: &[String]) -> Vec<CityProfile> {
    cities.iter().filter(|c| !names.contains(&c.name)).cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClimateRequirement {
    /// Forecast February mean must be strictly below this (°C).
    pub max_feb_temp: f64,
    /// Inclusive ideal band for the February mean (°C).
    pub ideal_temp_range: (f64, f64),
    /// Forecast February snowfall must reach this (cm).
    pub min_feb_snow: f64,
}

impl Default for ClimateRequirement {
    fn default() -> Self {
        Self {
            max_feb_temp: 0.0,
            ideal_temp_range: (-17.0, -10.0),
            min_feb_snow: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimateFailure {
    TooWarm,
    TooLittleSnow,
}

impl ClimateRequirement {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ideal_temp_range;
        if !(lo <= hi) || !(hi < self.max_feb_temp) {
            return Err(Error::InvalidParameter(format!(
                "ideal range [{lo}, {hi}] must lie below the {} °C ceiling",
                self.max_feb_temp
            )));
        }
        Ok(())
    }

    /// Returns (pass, ideal, failures).
    pub fn classify(&self, temp: f64, snow: f64) -> (bool, bool, Vec<ClimateFailure>) {
        let mut failures = Vec::new();
        if !(temp < self.max_feb_temp) {
            failures.push(ClimateFailure::TooWarm);
        }
        if !(snow >= self.min_feb_snow) {
            failures.push(ClimateFailure::TooLittleSnow);
        }
        let (lo, hi) = self.ideal_temp_range;
        (failures.is_empty(), (lo..=hi).contains(&temp), failures)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClimateVerdict {
    pub name: String,
    pub country: String,
    /// Forecast February mean temperature at the target period.
    pub temp: f64,
    /// Forecast February snowfall at the target period.
    pub snow: f64,
    pub pass: bool,
    pub ideal: bool,
    pub failures: Vec<ClimateFailure>,
}

/// Forecast each city's February temperature and snowfall to `until` and
/// apply the hard constraints to the values at `until`. Output keeps input
/// order.
pub fn winter_climate_filter(
    cities: &[CityProfile],
    req: &ClimateRequirement,
    until: i32,
) -> Result<Vec<ClimateVerdict>> {
    req.validate()?;
    cities
        .par_iter()
        .map(|c| {
            let at_until = |v: ClimateVariable| -> Result<f64> {
                let f = forecast_indicator(c, SeriesKey::Climate(v), until)?;
                Ok(f.series.at(until).or(f.series.last()).unwrap_or(f64::NAN))
            };
            let temp = at_until(ClimateVariable::FebTemp)?;
            let snow = at_until(ClimateVariable::FebSnow)?;
            let (pass, ideal, failures) = req.classify(temp, snow);
            Ok(ClimateVerdict {
                name: c.name.clone(),
                country: c.country.clone(),
                temp,
                snow,
                pass,
                ideal,
                failures,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityScore {
    pub s_base: f64,
    pub s_evaluate: f64,
    pub total: f64,
}

impl SuitabilityScore {
    pub fn new(s_base: f64, s_evaluate: f64) -> Self {
        Self {
            s_base,
            s_evaluate,
            total: s_base + s_evaluate,
        }
    }
}

/// `S = S_base + χ(ξ)` for one city's scaled feature values.
pub fn suitability_score(xi: &[f64], s_base: f64, sel: &FeatureSelection) -> Result<SuitabilityScore> {
    if !(0.0..=1.0).contains(&s_base) {
        return Err(Error::InvalidParameter(format!("S_base {s_base} outside [0, 1]")));
    }
    Ok(SuitabilityScore::new(s_base, evaluate_chi(sel, xi)?))
}

/// Build an alternatives × features matrix from city indicator maps.
pub fn city_matrix(cities: &[CityProfile], ids: &[IndicatorId], h: &IndicatorHierarchy) -> Result<DecisionMatrix> {
    let mut rows = Vec::with_capacity(cities.len());
    for c in cities {
        let row = ids
            .iter()
            .map(|id| {
                c.indicators
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::MissingValue(format!("{id} for {}", c.name)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let specs: Vec<IndicatorSpec> = ids
        .iter()
        .map(|&id| {
            h.spec(id)
                .cloned()
                .unwrap_or_else(|| IndicatorSpec::new(id, "", Polarity::Positive))
        })
        .collect();
    let reduced = IndicatorHierarchy::reduced(specs, BTreeMap::new());
    DecisionMatrix::new(
        cities.iter().map(|c| c.name.clone()).collect(),
        ids.to_vec(),
        rows,
        &reduced,
    )
}

/// Suitability of every city, with feature values min-max scaled across the
/// compared set.
pub fn suitability_scores(
    cities: &[CityProfile],
    s_base: &BTreeMap<String, f64>,
    sel: &FeatureSelection,
    h: &IndicatorHierarchy,
) -> Result<Vec<(String, SuitabilityScore)>> {
    let m = city_matrix(cities, &sel.ids, h)?;
    let xi = feature_scores(&m, &sel.ids)?;
    cities
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let base = *s_base
                .get(&c.name)
                .ok_or_else(|| Error::MissingValue(format!("S_base for {}", c.name)))?;
            let row: Vec<f64> = xi.row(i).iter().copied().collect();
            Ok((c.name.clone(), suitability_score(&row, base, sel)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCity {
    pub rank: usize,
    pub name: String,
    pub score: SuitabilityScore,
}

/// Descending by total; equal totals fall back to name order.
pub fn rank_cities(scores: Vec<(String, SuitabilityScore)>) -> Vec<RankedCity> {
    let mut scores = scores;
    scores.sort_by(|a, b| b.1.total.total_cmp(&a.1.total).then_with(|| a.0.cmp(&b.0)));
    scores
        .into_iter()
        .enumerate()
        .map(|(i, (name, score))| RankedCity {
            rank: i + 1,
            name,
            score,
        })
        .collect()
}

/// Odd-valued influence scale: 1 no effect, 3 slightly, 5 quite, 7 extremely,
/// 9 absolutely favorable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ImpactScale(u8);

impl ImpactScale {
    pub fn value(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        match self.0 {
            1 => "no effect",
            3 => "slightly favorable",
            5 => "quite favorable",
            7 => "extremely favorable",
            _ => "absolutely favorable",
        }
    }
}

impl TryFrom<u8> for ImpactScale {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 | 3 | 5 | 7 | 9 => Ok(ImpactScale(v)),
            _ => Err(Error::InvalidParameter(format!("impact {v} not in {{1, 3, 5, 7, 9}}"))),
        }
    }
}

impl From<ImpactScale> for u8 {
    fn from(s: ImpactScale) -> u8 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    Original,
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemePlan {
    pub id: SchemeId,
    #[serde(default)]
    pub description: String,
    pub impacts: BTreeMap<IndicatorId, ImpactScale>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeScore {
    pub id: SchemeId,
    pub aggregate: f64,
    /// γ_j · impact_j per feature, in feature order.
    pub breakdown: Vec<(IndicatorId, f64)>,
}

/// Aggregate = Σ γ_j · impact(ξ_j), sorted descending (ties by scheme id).
pub fn compare_schemes(plans: &[SchemePlan], sel: &FeatureSelection) -> Result<Vec<SchemeScore>> {
    let mut out = Vec::with_capacity(plans.len());
    for p in plans {
        if let Some(extra) = p.impacts.keys().find(|id| sel.position(**id).is_none()) {
            return Err(Error::InvalidParameter(format!(
                "scheme {:?} rates {extra}, which is not a feature factor",
                p.id
            )));
        }
        let breakdown = sel
            .ids
            .iter()
            .zip(&sel.gamma)
            .map(|(id, g)| {
                p.impacts
                    .get(id)
                    .map(|s| (*id, g * f64::from(s.value())))
                    .ok_or_else(|| Error::MissingValue(format!("impact of {id} in scheme {:?}", p.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(SchemeScore {
            id: p.id,
            aggregate: breakdown.iter().map(|(_, v)| v).sum(),
            breakdown,
        });
    }
    out.sort_by(|a, b| b.aggregate.total_cmp(&a.aggregate).then(a.id.cmp(&b.id)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SwotRecord {
    pub city: String,
    #[serde(default)]
    pub strengths: Vec<String>,
    #[serde(default)]
    pub weaknesses: Vec<String>,
    #[serde(default)]
    pub opportunities: Vec<String>,
    #[serde(default)]
    pub threats: Vec<String>,
}

/// Plain-text rendering, one section per record, entries verbatim.
pub fn swot_report(records: &[SwotRecord]) -> String {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "## {}", r.city);
        for (title, items) in [
            ("Strengths", &r.strengths),
            ("Weaknesses", &r.weaknesses),
            ("Opportunities", &r.opportunities),
            ("Threats", &r.threats),
        ] {
            let _ = writeln!(out, "### {title}");
            for item in items {
                let _ = writeln!(out, "- {item}");
            }
        }
    }
    out
}
