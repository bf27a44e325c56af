//! One function per subcommand. Each builds its files in memory and hands
//! them back; nothing is written here.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hoiem::ahp::{ahp_weights, AhpWeights, Judgments};
use hoiem::combined::{
    combined_weights, evaluate_alternatives, select_features, CombinationMode, FeatureCount, FeatureSelection,
    WeightingReport,
};
use hoiem::entropy::objective_weights;
use hoiem::format::fmt_num;
use hoiem::host::{
    compare_schemes, exclude, load_pool, medal_screen, rank_cities, screen_candidates, suitability_scores, swot_report,
    winter_climate_filter, CityProfile, MedalTally, SchemePlan, SeriesKey, SuitabilityScore, SwotRecord,
};
use hoiem::sensitivity::{factor_substitution, grid_levels, rsm_study, ChiResponse, PerturbationConfig};
use hoiem::{
    load_decision_matrix, load_decision_matrix_json, DecisionMatrix, IndicatorHierarchy, IndicatorId, LoadOptions,
    WeightSet,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{read_arg, Loaded};
use crate::error::{CliError, CliResult, StageExt};
use crate::output::{Outputs, Provenance, Table};
use crate::row;

/// Upper bound on response-surface grid rows.
const MAX_GRID_POINTS: usize = 1_000_000;

/// What a finished command hands back to `main`.
pub struct Run {
    pub dir: &'static str,
    pub outputs: Outputs,
    pub summary: Vec<String>,
}

pub struct Ctx<'a> {
    pub loaded: &'a Loaded,
}

impl Ctx<'_> {
    fn outputs(&self, command: String, seed: u64) -> Outputs {
        Outputs::new(Provenance {
            tool: "hoiem",
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: self.loaded.sha256.clone(),
            seed,
            command,
        })
    }

    fn seed(&self) -> u64 {
        self.loaded.config.seed
    }

    fn hierarchy(&self) -> CliResult<IndicatorHierarchy> {
        let (_, text) = self
            .loaded
            .read("data.hierarchy", self.loaded.config.data.hierarchy.as_ref())?;
        IndicatorHierarchy::from_json(&text)
            .and_then(IndicatorHierarchy::validated)
            .stage("hierarchy")
    }

    fn judgments(&self) -> CliResult<Judgments> {
        let (_, text) = self
            .loaded
            .read("data.judgments", self.loaded.config.data.judgments.as_ref())?;
        Judgments::from_json(&text).stage("judgments")
    }

    fn matrix(&self, h: &IndicatorHierarchy) -> CliResult<DecisionMatrix> {
        let data = &self.loaded.config.data;
        let (path, text) = self.loaded.read("data.matrix", data.matrix.as_ref())?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let delimiter = match (data.delimiter, ext.as_str()) {
            (Some(c), _) => {
                u8::try_from(c).map_err(|_| CliError::Config(format!("data.delimiter {c:?} is not ASCII")))?
            }
            (None, "tsv") => b'\t',
            (None, _) => b',',
        };
        let opts = LoadOptions {
            delimiter,
            missing: data.missing,
        };
        if ext == "json" {
            load_decision_matrix_json(&text, h, &opts).stage("matrix")
        } else {
            load_decision_matrix(text.as_bytes(), h, &opts).stage("matrix")
        }
    }

    fn pipeline(&self) -> CliResult<Pipeline> {
        let h = self.hierarchy()?;
        let judgments = self.judgments()?;
        let data = self.matrix(&h)?;
        let ahp = ahp_weights(&h, &judgments).stage("ahp")?;
        let report = combined_weights(&h, &data, &ahp, self.loaded.config.weights.mode).stage("combination")?;
        Ok(Pipeline { h, data, ahp, report })
    }

    fn feature_count(&self, k: Option<usize>) -> FeatureCount {
        let w = &self.loaded.config.weights;
        match (k, w.features, w.coverage) {
            (Some(k), _, _) | (None, Some(k), _) => FeatureCount::Fixed(k),
            (None, None, Some(c)) => FeatureCount::Coverage(c),
            (None, None, None) => FeatureCount::default(),
        }
    }

    fn pool(&self, key: &str, configured: Option<&PathBuf>, flag: Option<&Path>) -> CliResult<Vec<CityProfile>> {
        let (_, text) = match flag {
            Some(p) => read_arg("--pool", p)?,
            None => self.loaded.read(key, configured)?,
        };
        load_pool(&text).stage("pool")
    }
}

struct Pipeline {
    h: IndicatorHierarchy,
    data: DecisionMatrix,
    ahp: AhpWeights,
    report: WeightingReport,
}

impl Pipeline {
    fn select(&self, count: FeatureCount) -> CliResult<FeatureSelection> {
        select_features(&self.report.total, count).stage("selection")
    }
}

fn category_sums(ids: &[IndicatorId], values: &[f64]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (id, v) in ids.iter().zip(values) {
        *out.entry(id.category().to_string()).or_insert(0.0) += v;
    }
    out
}

fn sums_line(label: &str, ws: &WeightSet, mode: CombinationMode) -> String {
    match mode {
        CombinationMode::Global => format!("{label}: sum {}", fmt_num(ws.sum())),
        CombinationMode::PerCategory => {
            let parts: Vec<String> = category_sums(&ws.ids, &ws.values)
                .into_iter()
                .map(|(c, s)| format!("{c}={}", fmt_num(s)))
                .collect();
            format!("{label}: per-category sums {}", parts.join(" "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WeightMethod {
    Ahp,
    Entropy,
    Combined,
}

pub fn weights(ctx: &Ctx, method: WeightMethod) -> CliResult<Run> {
    let mode = ctx.loaded.config.weights.mode;
    let name = format!("{method:?}").to_lowercase();
    let mut out = ctx.outputs(format!("weights --method {name}"), ctx.seed());
    let mut summary = Vec::new();
    match method {
        WeightMethod::Ahp => {
            let h = ctx.hierarchy()?;
            let ahp = ahp_weights(&h, &ctx.judgments()?).stage("ahp")?;
            let mut t = Table::new(["category", "U"]);
            for (c, u) in &ahp.primary {
                t.push(row![c.to_string(), *u]);
            }
            out.table("primary.tsv", &t);
            let global = ahp.global();
            let mut t = Table::new(["indicator", "category", "V", "U*V"]);
            for ((id, v), g) in ahp.local.iter().zip(&global.values) {
                t.push(row![id.to_string(), id.category().to_string(), v, *g]);
            }
            out.table("ahp.tsv", &t);
            let mut t = Table::new(["level", "n", "lambda_max", "CI", "RI", "CR", "pass"]);
            for r in &ahp.reports {
                let c = &r.report;
                t.push(row![r.level.as_str(), c.n, c.lambda_max, c.ci, c.ri, c.cr, c.pass]);
            }
            out.table("consistency.tsv", &t);
            let worst = ahp.reports.iter().map(|r| r.report.cr).fold(0.0, f64::max);
            summary.push(sums_line("V", &ahp.local, CombinationMode::PerCategory));
            summary.push(format!("U*V: sum {}", fmt_num(global.sum())));
            summary.push(format!(
                "largest CR {} over {} matrices",
                fmt_num(worst),
                ahp.reports.len()
            ));
            out.json("report.json", &json!({ "ahp": ahp }));
        }
        WeightMethod::Entropy => {
            let h = ctx.hierarchy()?;
            let data = ctx.matrix(&h)?;
            let (e, hw) = entropy_groups(&h, &data, mode)?;
            let mut t = Table::new(["indicator", "category", "e", "H"]);
            for ((id, ej), hj) in e.iter().zip(&hw.values) {
                t.push(row![id.to_string(), id.category().to_string(), ej, *hj]);
            }
            out.table("entropy.tsv", &t);
            summary.push(sums_line("H", &hw, mode));
            out.json("report.json", &json!({ "mode": mode, "entropies": e, "weights": hw }));
        }
        WeightMethod::Combined => {
            let p = ctx.pipeline()?;
            let r = &p.report;
            let mut t = Table::new(["category", "U"]);
            for (c, u) in &r.primary {
                t.push(row![c.to_string(), *u]);
            }
            out.table("primary.tsv", &t);
            let mut dispersion = BTreeMap::new();
            for g in &r.groups {
                for (id, s) in g.ids.iter().zip(&g.dispersion) {
                    dispersion.insert(*id, *s);
                }
            }
            let mut t = Table::new(["indicator", "category", "V", "e", "H", "S", "W", "Omega"]);
            for (i, id) in r.total.ids.iter().enumerate() {
                let get = |ws: &WeightSet| ws.get(*id).unwrap_or(f64::NAN);
                t.push(row![
                    id.to_string(),
                    id.category().to_string(),
                    get(&r.subjective),
                    get(&r.entropies),
                    get(&r.objective),
                    dispersion.get(id).copied().unwrap_or(f64::NAN),
                    get(&r.combined),
                    r.total.values[i],
                ]);
            }
            out.table("weights.tsv", &t);
            let mut t = Table::new(["group", "rank", "indicator", "ratio", "W"]);
            for g in &r.groups {
                let group = if g.ids.len() == r.total.len() {
                    "all".to_string()
                } else {
                    g.ids[0].category().to_string()
                };
                for (k, &pos) in g.ratios.ordering.iter().enumerate() {
                    let ratio = if k == 0 { None } else { Some(g.ratios.ratios[k - 1]) };
                    t.push(row![
                        group.as_str(),
                        k + 1,
                        g.ids[pos].to_string(),
                        ratio,
                        g.weights.weights[pos]
                    ]);
                }
            }
            out.table("ordering.tsv", &t);
            summary.push(sums_line("V", &r.subjective, mode));
            summary.push(sums_line("H", &r.objective, mode));
            summary.push(sums_line("W", &r.combined, mode));
            summary.push(format!("Omega: sum {}", fmt_num(r.total.sum())));
            out.json("report.json", &json!({ "ahp_reports": p.ahp.reports, "weights": r }));
        }
    }
    Ok(Run {
        dir: match method {
            WeightMethod::Ahp => "weights-ahp",
            WeightMethod::Entropy => "weights-entropy",
            WeightMethod::Combined => "weights-combined",
        },
        outputs: out,
        summary,
    })
}

/// Entropy weights per combination group, mirroring the combined pipeline:
/// a single-indicator group gets H = 1, e = 0.
fn entropy_groups(
    h: &IndicatorHierarchy,
    data: &DecisionMatrix,
    mode: CombinationMode,
) -> CliResult<(WeightSet, WeightSet)> {
    let groups = match mode {
        CombinationMode::PerCategory => h.categories().into_iter().map(|c| h.ids_in(c)).collect(),
        CombinationMode::Global => vec![h.ids()],
    };
    let mut e = WeightSet {
        ids: vec![],
        values: vec![],
    };
    let mut w = e.clone();
    for ids in groups {
        if ids.len() == 1 {
            e.ids.push(ids[0]);
            e.values.push(0.0);
            w.ids.push(ids[0]);
            w.values.push(1.0);
            continue;
        }
        let sub = data.select(&ids).stage("entropy")?;
        let (r, ws) = objective_weights(&sub).stage("entropy")?;
        e.ids.extend(&ws.ids);
        e.values.extend(&r.entropies);
        w.ids.extend(&ws.ids);
        w.values.extend(&ws.values);
    }
    Ok((e, w))
}

fn features_table(sel: &FeatureSelection, omega: &WeightSet) -> Table {
    let mut t = Table::new(["position", "feature", "indicator", "Omega", "gamma"]);
    for (i, (id, g)) in sel.ids.iter().zip(&sel.gamma).enumerate() {
        t.push(row![
            i + 1,
            format!("ξ{}", i + 1),
            id.to_string(),
            omega.get(*id).unwrap_or(f64::NAN),
            *g
        ]);
    }
    t
}

pub fn evaluate(ctx: &Ctx, features: Option<usize>) -> CliResult<Run> {
    let p = ctx.pipeline()?;
    let count = ctx.feature_count(features);
    let command = match count {
        FeatureCount::Fixed(k) => format!("evaluate --features {k}"),
        FeatureCount::Coverage(c) => format!("evaluate --coverage {}", fmt_num(c)),
    };
    let sel = p.select(count)?;
    let evals = evaluate_alternatives(&p.data, &sel).stage("evaluation")?;
    let mut out = ctx.outputs(command, ctx.seed());
    out.table("features.tsv", &features_table(&sel, &p.report.total));

    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&a, &b| {
        evals[b]
            .chi
            .total_cmp(&evals[a].chi)
            .then(evals[a].label.cmp(&evals[b].label))
    });
    let mut rank = vec![0; evals.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let mut cols = vec!["alternative".to_string(), "rank".into(), "chi".into()];
    cols.extend((1..=sel.len()).map(|i| format!("ξ{i}")));
    let mut t = Table::new(cols);
    for (i, e) in evals.iter().enumerate() {
        let mut r = row![e.label.as_str(), rank[i], e.chi];
        r.extend(e.xi.iter().map(|&v| v.into()));
        t.push(r);
    }
    out.table("evaluation.tsv", &t);

    let mut summary = vec![format!(
        "{} features covering Omega {}; {} alternatives",
        sel.len(),
        fmt_num(sel.coverage),
        evals.len()
    )];
    for &i in order.iter().take(5) {
        summary.push(format!(
            "  {:>2}. {}  chi = {}",
            rank[i],
            evals[i].label,
            fmt_num(evals[i].chi)
        ));
    }
    out.json("report.json", &json!({ "selection": sel, "evaluations": evals }));
    Ok(Run {
        dir: "evaluate",
        outputs: out,
        summary,
    })
}

pub fn forecast(
    ctx: &Ctx,
    indicator: &str,
    until: Option<i32>,
    city: Option<&str>,
    pool: Option<&Path>,
) -> CliResult<Run> {
    let key: SeriesKey = indicator.parse().stage("forecast")?;
    let until = until
        .or(ctx.loaded.config.forecast.until)
        .ok_or_else(|| CliError::Config("no --until given and `forecast.until` is not set".into()))?;
    let pool = ctx.pool("forecast.pool", ctx.loaded.config.forecast.pool.as_ref(), pool)?;
    let cities: Vec<&CityProfile> = match city {
        Some(name) => {
            let c = pool.iter().find(|c| c.name == name).ok_or_else(|| CliError::Stage {
                stage: "forecast",
                source: hoiem::Error::MissingValue(format!("city {name} in pool")),
            })?;
            vec![c]
        }
        None => pool
            .iter()
            .filter(|c| match key {
                SeriesKey::Indicator(id) => c.history.contains_key(&id),
                SeriesKey::Climate(v) => c.climate.contains_key(&v),
            })
            .collect(),
    };
    if cities.is_empty() {
        return Err(CliError::Stage {
            stage: "forecast",
            source: hoiem::Error::MissingValue(format!("{key} history in any pooled city")),
        });
    }

    let mut series = Table::new(["city", "period", "value", "forecast"]);
    let mut models = Table::new([
        "city",
        "a",
        "b",
        "alpha",
        "mu",
        "shift",
        "mean_relative_residual",
        "posterior_variance_ratio",
        "class_ratio_violations",
        "classical_fallback",
        &format!("value_{until}"),
    ]);
    let mut summary = Vec::new();
    let mut results = Vec::new();
    for c in cities {
        let f = hoiem::host::forecast_indicator(c, key, until).stage("forecast")?;
        for (i, (v, fc)) in f.series.values.iter().zip(&f.forecast).enumerate() {
            series.push(row![c.name.as_str(), f.series.start_period + i as i32, *v, *fc]);
        }
        let m = &f.model;
        let d = &m.diagnostics;
        let at = f.series.at(until);
        models.push(row![
            c.name.as_str(),
            m.a,
            m.b,
            m.alpha,
            m.mu,
            f.shift,
            d.mean_relative_residual,
            d.posterior_variance_ratio,
            d.class_ratio_violations.len(),
            d.classical_fallback,
            at,
        ]);
        summary.push(format!(
            "{}: {key}({until}) = {}",
            c.name,
            at.map_or("NA".into(), fmt_num)
        ));
        results.push((c.name.clone(), f));
    }
    let mut out = ctx.outputs(
        format!(
            "forecast --indicator {key} --until {until}{}",
            city.map_or(String::new(), |c| format!(" --city {c}"))
        ),
        ctx.seed(),
    );
    out.table("forecast.tsv", &series);
    out.table("models.tsv", &models);
    out.json(
        "report.json",
        &json!({ "series": key.to_string(), "until": until, "forecasts": results }),
    );
    Ok(Run {
        dir: "forecast",
        outputs: out,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Games {
    Winter,
    Summer,
}

fn ranking_table(ranked: &[hoiem::host::RankedCity], fixed: &BTreeMap<String, f64>) -> Table {
    let mut t = Table::new(["rank", "city", "S_base", "S_evaluate", "S", "S_evaluate_source"]);
    for r in ranked {
        let source = if fixed.contains_key(&r.name) {
            "configured"
        } else {
            "computed"
        };
        t.push(row![
            r.rank,
            r.name.as_str(),
            r.score.s_base,
            r.score.s_evaluate,
            r.score.total,
            source
        ]);
    }
    t
}

fn ranking_summary(ranked: &[hoiem::host::RankedCity]) -> Vec<String> {
    ranked
        .iter()
        .map(|r| format!("  {:>2}. {}  S = {}", r.rank, r.name, fmt_num(r.score.total)))
        .collect()
}

pub fn screen(ctx: &Ctx, games: Games, pool: Option<&Path>) -> CliResult<Run> {
    match games {
        Games::Winter => screen_winter(ctx, pool),
        Games::Summer => screen_summer(ctx, pool),
    }
}

fn screen_winter(ctx: &Ctx, pool_flag: Option<&Path>) -> CliResult<Run> {
    let cfg = ctx
        .loaded
        .config
        .winter
        .as_ref()
        .ok_or_else(|| CliError::Config("`[winter]` section is missing".into()))?;
    let pool = ctx.pool("winter.pool", cfg.pool.as_ref(), pool_flag)?;
    let candidates = exclude(&pool, &cfg.exclude);
    let verdicts = winter_climate_filter(&candidates, &cfg.requirement, cfg.until).stage("climate")?;
    let passing: Vec<CityProfile> = candidates
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.pass)
        .map(|(c, _)| c.clone())
        .collect();

    for c in &passing {
        if !cfg.s_base.contains_key(&c.name) {
            return Err(CliError::Config(format!("winter.s_base has no entry for {}", c.name)));
        }
    }
    let computed: BTreeMap<String, SuitabilityScore> = if passing.iter().all(|c| cfg.s_evaluate.contains_key(&c.name)) {
        BTreeMap::new()
    } else {
        let p = ctx.pipeline()?;
        let sel = p.select(ctx.feature_count(None))?;
        suitability_scores(&passing, &cfg.s_base, &sel, &p.h)
            .stage("suitability")?
            .into_iter()
            .collect()
    };
    let scores: Vec<(String, SuitabilityScore)> = passing
        .iter()
        .map(|c| {
            let base = cfg.s_base[&c.name];
            let score = match cfg.s_evaluate.get(&c.name) {
                Some(&e) => SuitabilityScore::new(base, e),
                None => computed[&c.name],
            };
            (c.name.clone(), score)
        })
        .collect();
    let ranked = rank_cities(scores);

    let mut climate = Table::new(["city", "country", "feb_temp", "feb_snow", "pass", "ideal", "failures"]);
    for v in &verdicts {
        let failures: Vec<String> = v
            .failures
            .iter()
            .map(|f| {
                serde_json::to_value(f)
                    .ok()
                    .and_then(|s| s.as_str().map(String::from))
                    .unwrap_or_default()
            })
            .collect();
        climate.push(row![
            v.name.as_str(),
            v.country.as_str(),
            v.temp,
            v.snow,
            v.pass,
            v.ideal,
            failures.join(",")
        ]);
    }
    let mut out = ctx.outputs("screen winter".into(), ctx.seed());
    out.table("climate.tsv", &climate);
    out.table("ranking.tsv", &ranking_table(&ranked, &cfg.s_evaluate));

    let mut summary = vec![format!(
        "{} of {} cities pass the climate constraints at {}",
        passing.len(),
        candidates.len(),
        cfg.until
    )];
    summary.extend(ranking_summary(&ranked));
    out.json(
        "report.json",
        &json!({ "until": cfg.until, "requirement": cfg.requirement, "climate": verdicts, "ranking": ranked }),
    );
    Ok(Run {
        dir: "screen-winter",
        outputs: out,
        summary,
    })
}

fn screen_summer(ctx: &Ctx, pool_flag: Option<&Path>) -> CliResult<Run> {
    let c = &ctx.loaded.config;
    let stage1 = c
        .stage1
        .as_ref()
        .ok_or_else(|| CliError::Config("`[stage1]` section is missing".into()))?;
    let cfg = c
        .summer
        .as_ref()
        .ok_or_else(|| CliError::Config("`[summer]` section is missing".into()))?;
    let pool = ctx.pool("stage1.pool", Some(&stage1.pool), pool_flag)?;
    let screened = screen_candidates(&pool, stage1.gdp_cutoff, stage1.sports_cutoff).stage("stage1")?;
    let medalists = medal_screen(&screened.cities, cfg.medal_cutoff);
    let remaining = exclude(&medalists, &cfg.exclude);
    if remaining.is_empty() {
        return Err(CliError::Stage {
            stage: "summer",
            source: hoiem::Error::TooSmall {
                what: "summer candidates after screening",
                min: 1,
                found: 0,
            },
        });
    }

    let mut s_base = BTreeMap::new();
    for city in &remaining {
        let b = cfg
            .s_base
            .get(&city.name)
            .copied()
            .or(cfg.s_base_default)
            .ok_or_else(|| CliError::Config(format!("summer.s_base has no entry for {}", city.name)))?;
        s_base.insert(city.name.clone(), b);
    }
    let p = ctx.pipeline()?;
    let sel = p.select(ctx.feature_count(None))?;
    let ranked = rank_cities(suitability_scores(&remaining, &s_base, &sel, &p.h).stage("suitability")?);
    let finalists: Vec<&str> = ranked.iter().take(cfg.finalists).map(|r| r.name.as_str()).collect();

    let mut t = Table::new(["order", "city", "country", "gdp", "sports_points"]);
    for (i, city) in screened.cities.iter().enumerate() {
        t.push(row![
            i + 1,
            city.name.as_str(),
            city.country.as_str(),
            city.gdp,
            city.sports_points()
        ]);
    }
    let mut out = ctx.outputs("screen summer".into(), ctx.seed());
    out.table("stage1.tsv", &t);
    let mut t = Table::new(["order", "city", "gold", "silver", "bronze", "points", "excluded"]);
    for (i, city) in medalists.iter().enumerate() {
        let m = city.medals.unwrap_or(MedalTally::new(0, 0, 0));
        t.push(row![
            i + 1,
            city.name.as_str(),
            m.gold as usize,
            m.silver as usize,
            m.bronze as usize,
            city.sports_points(),
            cfg.exclude.contains(&city.name),
        ]);
    }
    out.table("medals.tsv", &t);
    out.table("ranking.tsv", &ranking_table(&ranked, &BTreeMap::new()));

    let swot = match &cfg.swot {
        Some(p) => {
            let (_, text) = ctx.loaded.read("summer.swot", Some(p))?;
            let records: Vec<SwotRecord> = serde_json::from_str(&text)
                .map_err(|e| hoiem::Error::Format(format!("swot: {e}")))
                .stage("swot")?;
            let chosen: Vec<SwotRecord> = finalists
                .iter()
                .map(|f| {
                    records
                        .iter()
                        .find(|r| r.city == *f)
                        .cloned()
                        .unwrap_or_else(|| SwotRecord {
                            city: (*f).to_string(),
                            ..Default::default()
                        })
                })
                .collect();
            out.text("swot.md", &swot_report(&chosen));
            chosen
        }
        None => Vec::new(),
    };

    let mut summary = vec![
        format!("stage 1 keeps {} of {} cities", screened.cities.len(), pool.len()),
        format!(
            "{} pass the medal screen, {} after exclusions",
            medalists.len(),
            remaining.len()
        ),
    ];
    if let Some(w) = &screened.warning {
        summary.push(format!("warning: {w}"));
    }
    summary.extend(ranking_summary(&ranked));
    summary.push(format!("finalists: {}", finalists.join(", ")));
    let stage1_names: Vec<&str> = screened.cities.iter().map(|c| c.name.as_str()).collect();
    let medal_names: Vec<&str> = medalists.iter().map(|c| c.name.as_str()).collect();
    out.json(
        "report.json",
        &json!({
            "stage1": stage1_names,
            "medal_screen": medal_names,
            "selection": sel,
            "ranking": ranked,
            "finalists": finalists,
            "swot": swot,
        }),
    );
    Ok(Run {
        dir: "screen-summer",
        outputs: out,
        summary,
    })
}

#[derive(Deserialize)]
struct SelectionFile {
    features: Vec<SelectionEntry>,
}

#[derive(Deserialize)]
struct SelectionEntry {
    id: IndicatorId,
    gamma: f64,
}

pub fn compare(ctx: &Ctx, plans_flag: Option<&Path>) -> CliResult<Run> {
    let sc = &ctx.loaded.config.schemes;
    let (_, text) = match plans_flag {
        Some(p) => read_arg("--plans", p)?,
        None => ctx.loaded.read("schemes.plans", sc.plans.as_ref())?,
    };
    let plans: Vec<SchemePlan> = serde_json::from_str(&text)
        .map_err(|e| hoiem::Error::Format(format!("plans: {e}")))
        .stage("plans")?;
    let sel = match &sc.selection {
        Some(p) => {
            let (_, text) = ctx.loaded.read("schemes.selection", Some(p))?;
            let f: SelectionFile = serde_json::from_str(&text)
                .map_err(|e| hoiem::Error::Format(format!("selection: {e}")))
                .stage("selection")?;
            let total: f64 = f.features.iter().map(|e| e.gamma).sum();
            if total.is_nan() || total <= 0.0 {
                return Err(CliError::Stage {
                    stage: "selection",
                    source: hoiem::Error::ZeroWeight("feature selection".into()),
                });
            }
            FeatureSelection::from_weights(
                f.features.iter().map(|e| e.id).collect(),
                f.features.iter().map(|e| e.gamma / total).collect(),
            )
            .stage("selection")?
        }
        None => ctx.pipeline()?.select(ctx.feature_count(None))?,
    };
    let scores = compare_schemes(&plans, &sel).stage("schemes")?;

    let describe = |id| plans.iter().find(|p| p.id == id).map_or("", |p| p.description.as_str());
    let mut t = Table::new(["rank", "scheme", "aggregate", "description"]);
    for (i, s) in scores.iter().enumerate() {
        t.push(row![i + 1, format!("{:?}", s.id), s.aggregate, describe(s.id)]);
    }
    let mut out = ctx.outputs("compare-schemes".into(), ctx.seed());
    out.table("schemes.tsv", &t);
    let mut t = Table::new(["scheme", "feature", "indicator", "gamma", "impact", "contribution"]);
    for s in &scores {
        let plan = plans.iter().find(|p| p.id == s.id);
        for (i, (id, contrib)) in s.breakdown.iter().enumerate() {
            let impact = plan.and_then(|p| p.impacts.get(id)).map_or(0, |v| v.value() as usize);
            t.push(row![
                format!("{:?}", s.id),
                format!("ξ{}", i + 1),
                id.to_string(),
                sel.gamma[i],
                impact,
                *contrib
            ]);
        }
    }
    out.table("breakdown.tsv", &t);

    let summary = scores
        .iter()
        .enumerate()
        .map(|(i, s)| format!("  {}. scheme {:?}  aggregate = {}", i + 1, s.id, fmt_num(s.aggregate)))
        .collect();
    out.json("report.json", &json!({ "selection": sel, "schemes": scores }));
    Ok(Run {
        dir: "compare-schemes",
        outputs: out,
        summary,
    })
}

pub fn sensitivity(ctx: &Ctx, seed: Option<u64>, trials: Option<usize>, swaps: Option<usize>) -> CliResult<Run> {
    let s = &ctx.loaded.config.sensitivity;
    let cfg = PerturbationConfig {
        seed: seed.unwrap_or(ctx.seed()),
        n_swap: swaps.unwrap_or(s.n_swap),
        trials: trials.unwrap_or(s.trials),
    };
    let p = ctx.pipeline()?;
    let sel = p.select(ctx.feature_count(None))?;
    let report = factor_substitution(&sel, &p.report.total, &p.data, &cfg).stage("sensitivity")?;

    let mut out = ctx.outputs(
        format!(
            "sensitivity --seed {} --trials {} --swaps {}",
            cfg.seed, cfg.trials, cfg.n_swap
        ),
        cfg.seed,
    );
    let mut t = Table::new(["alternative", "chi"]);
    for (a, c) in report.alternatives.iter().zip(&report.baseline) {
        t.push(row![a.as_str(), *c]);
    }
    out.table("baseline.tsv", &t);
    let mut t = Table::new(["trial", "alternative", "chi", "abs_deviation", "rel_deviation"]);
    for tr in &report.trials {
        for (i, a) in report.alternatives.iter().enumerate() {
            t.push(row![tr.index, a.as_str(), tr.chi[i], tr.absolute[i], tr.relative[i]]);
        }
    }
    out.table("trials.tsv", &t);
    let mut t = Table::new(["trial", "position", "replaced", "substitute"]);
    for tr in &report.trials {
        for sw in &tr.swaps {
            t.push(row![
                tr.index,
                sw.position + 1,
                sw.replaced.to_string(),
                sw.substitute.to_string()
            ]);
        }
    }
    out.table("swaps.tsv", &t);
    let m = &report.summary;
    let mut t = Table::new(["statistic", "value"]);
    for (k, v) in [
        ("mean_abs", m.mean_abs),
        ("max_abs", m.max_abs),
        ("std_abs", m.std_abs),
        ("mean_rel", m.mean_rel),
        ("max_rel", m.max_rel),
    ] {
        t.push(row![k, v]);
    }
    out.table("summary.tsv", &t);

    let summary = vec![
        format!(
            "{} trials x {} swaps over {} features, {} alternatives",
            cfg.trials,
            cfg.n_swap,
            sel.len(),
            report.alternatives.len()
        ),
        format!(
            "mean |dchi| = {}, max |dchi| = {}",
            fmt_num(m.mean_abs),
            fmt_num(m.max_abs)
        ),
        format!(
            "mean relative = {}, max relative = {}",
            fmt_num(m.mean_rel),
            fmt_num(m.max_rel)
        ),
    ];
    out.json("report.json", &json!({ "sensitivity": report }));
    Ok(Run {
        dir: "sensitivity",
        outputs: out,
        summary,
    })
}

/// `ξ3`, `xi3`, `x3` or `3` name the third feature; an indicator id names
/// its position in the group.
fn parse_factor(s: &str, sel: &FeatureSelection) -> CliResult<usize> {
    let bad = || CliError::Stage {
        stage: "rsm",
        source: hoiem::Error::InvalidParameter(format!("factor `{s}` is not in the feature group")),
    };
    let t = s.trim();
    let digits = t
        .strip_prefix('ξ')
        .or_else(|| t.strip_prefix("xi"))
        .or_else(|| t.strip_prefix('x'))
        .unwrap_or(t);
    if let Ok(k) = digits.parse::<usize>() {
        return (1..=sel.len()).contains(&k).then(|| k - 1).ok_or_else(bad);
    }
    t.parse::<IndicatorId>()
        .ok()
        .and_then(|id| sel.position(id))
        .ok_or_else(bad)
}

#[derive(Serialize)]
struct GridSpec {
    per_axis: usize,
    levels: Vec<f64>,
}

pub struct RsmArgs<'a> {
    pub factors: Option<&'a [String]>,
    pub grid: Option<usize>,
    pub delta: Option<f64>,
    pub alternative: Option<&'a str>,
}

pub fn rsm(ctx: &Ctx, args: RsmArgs) -> CliResult<Run> {
    let r = &ctx.loaded.config.rsm;
    let factor_names = args.factors.unwrap_or(&r.factors);
    let grid = args.grid.unwrap_or(r.grid);
    let delta = args.delta.unwrap_or(r.delta);
    let p = ctx.pipeline()?;
    let sel = p.select(ctx.feature_count(None))?;
    let factors: Vec<usize> = factor_names
        .iter()
        .map(|f| parse_factor(f, &sel))
        .collect::<CliResult<_>>()?;
    let evals = evaluate_alternatives(&p.data, &sel).stage("evaluation")?;
    let alt_name = args.alternative.or(r.alternative.as_deref());
    let alt = match alt_name {
        Some(name) => evals.iter().find(|e| e.label == name).ok_or_else(|| CliError::Stage {
            stage: "rsm",
            source: hoiem::Error::MissingValue(format!("alternative {name}")),
        })?,
        None => evals.first().ok_or_else(|| CliError::Stage {
            stage: "rsm",
            source: hoiem::Error::MissingValue("alternatives".into()),
        })?,
    };
    let response = ChiResponse::new(&sel, alt.xi.clone(), factors.clone(), delta).stage("rsm")?;
    let study = rsm_study(&response, r.center_replicates).stage("rsm")?;
    let k = factors.len();
    let points = grid
        .checked_pow(k as u32)
        .filter(|&n| n <= MAX_GRID_POINTS)
        .ok_or_else(|| CliError::Stage {
            stage: "rsm",
            source: hoiem::Error::InvalidParameter(format!("grid {grid}^{k} exceeds {MAX_GRID_POINTS} points")),
        })?;

    let labels: Vec<String> = factors.iter().map(|f| format!("ξ{}", f + 1)).collect();
    let names = labels.join(",");
    let mut out = ctx.outputs(
        format!(
            "rsm --factors {names} --grid {grid} --delta {} --alternative {}",
            fmt_num(delta),
            alt.label
        ),
        ctx.seed(),
    );

    let mut cols = vec!["run".to_string()];
    cols.extend(labels.iter().cloned());
    cols.push("chi".into());
    let mut t = Table::new(cols);
    for (i, (pt, y)) in study.design.points.iter().zip(&study.responses).enumerate() {
        let mut r = row![i + 1];
        r.extend(pt.iter().map(|&v| v.into()));
        r.push((*y).into());
        t.push(r);
    }
    out.table("design.tsv", &t);

    let s = &study.surface;
    let mut t = Table::new(["term", "coefficient"]);
    t.push(row!["1", s.intercept]);
    for (i, b) in s.linear.iter().enumerate() {
        t.push(row![labels[i].clone(), *b]);
    }
    let mut pair = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            t.push(row![format!("{}*{}", labels[i], labels[j]), s.interaction[pair]]);
            pair += 1;
        }
    }
    for (i, b) in s.square.iter().enumerate() {
        t.push(row![format!("{}^2", labels[i]), *b]);
    }
    t.push(row!["R^2", s.r_squared]);
    t.push(row!["residual_norm", s.residual_norm]);
    out.table("surface.tsv", &t);

    let e = &study.extrema;
    let mut cols = vec!["kind".to_string(), "chi".into()];
    cols.extend(labels.iter().cloned());
    let mut t = Table::new(cols);
    for (kind, v, pt) in [
        ("min", e.min_value, e.min_point.clone()),
        ("max", e.max_value, e.max_point.clone()),
        ("center", e.baseline, vec![0.0; k]),
    ] {
        let mut r = row![kind, v];
        r.extend(pt.into_iter().map(Into::into));
        t.push(r);
    }
    out.table("extrema.tsv", &t);
    let mut t = Table::new(["factor", "min", "max", "range", "relative_range"]);
    for f in &e.per_factor {
        t.push(row![labels[f.factor].clone(), f.min, f.max, f.range, f.relative_range]);
    }
    out.table("factor_ranges.tsv", &t);

    let levels = grid_levels(grid);
    let mut cols: Vec<String> = labels.clone();
    cols.extend(["chi".to_string(), "fitted".into()]);
    let mut t = Table::new(cols);
    let mut idx = vec![0usize; k];
    for _ in 0..points {
        let pt: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
        let mut r: Vec<_> = pt.iter().map(|&v| v.into()).collect();
        r.push(response.eval(&pt).into());
        r.push(s.eval(&pt).into());
        t.push(r);
        // odometer, last factor fastest
        for d in (0..k).rev() {
            idx[d] += 1;
            if idx[d] < grid {
                break;
            }
            idx[d] = 0;
        }
    }
    out.table("grid.tsv", &t);

    let summary = vec![
        format!(
            "{} design runs on factors {names} for {} (delta {})",
            study.design.points.len(),
            alt.label,
            fmt_num(delta)
        ),
        format!("R^2 = {}", fmt_num(s.r_squared)),
        format!(
            "chi range [{}, {}] around center {}; relative range {}",
            fmt_num(e.min_value),
            fmt_num(e.max_value),
            fmt_num(e.baseline),
            e.relative_range.map_or("NA".into(), fmt_num)
        ),
    ];
    out.json(
        "report.json",
        &json!({
            "alternative": alt.label,
            "factors": factors.iter().map(|&f| sel.ids[f]).collect::<Vec<_>>(),
            "delta": delta,
            "study": study,
            "grid": GridSpec { per_axis: grid, levels },
        }),
    );
    Ok(Run {
        dir: "rsm",
        outputs: out,
        summary,
    })
}
