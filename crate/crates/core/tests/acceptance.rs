#![allow(clippy::needless_range_loop)]

//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the PASS/FAIL lines are always shown.
//! A check listed in `KNOWN_UNATTAINABLE` is still executed and reported, but
//! its failure does not change the exit status; everything else does.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hoiem::ahp::{consistency, principal_eigen, validate_judgment, JudgmentMatrix};
use hoiem::combined::{ranked_weights, select_features, FeatureCount, FeatureSelection};
use hoiem::entropy::{entropy_weights, vector_normalize};
use hoiem::grey::{fit_gm11, TimeSeries};
use hoiem::host::{
    compare_schemes, rank_cities, suitability_score, winter_climate_filter, CityProfile, ClimateRequirement,
    ClimateVariable, ImpactScale, SchemeId, SchemePlan,
};
use hoiem::sensitivity::{
    bbd_design, factor_substitution, fit_response_surface, rsm_study, surface_extrema, ChiResponse, PerturbationConfig,
    QuadraticSurface,
};
use hoiem::{DecisionMatrix, IndicatorHierarchy, IndicatorId, WeightSet};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

/// Checks whose stated expectation contradicts its own inputs; see README.
const KNOWN_UNATTAINABLE: &[&str] = &["1b", "5b"];

fn id(s: &str) -> IndicatorId {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> std::result::Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

const TABLE2_IDS: [&str; 10] = ["A5", "A4", "C1", "C7", "A2", "E4", "B2", "D2", "C3", "D5"];
const TABLE2_GAMMA: [f64; 10] = [0.165, 0.146, 0.132, 0.124, 0.105, 0.088, 0.082, 0.071, 0.059, 0.030];

fn table2_omega() -> WeightSet {
    let chosen: Vec<IndicatorId> = TABLE2_IDS.iter().map(|s| id(s)).collect();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    let rest: Vec<IndicatorId> = IndicatorId::all().into_iter().filter(|i| !chosen.contains(i)).collect();
    let top: f64 = TABLE2_GAMMA.iter().map(|g| g * 0.735).sum();
    // scatter the leftover mass over the other twenty, all below 0.030·0.735
    for (k, i) in rest.iter().enumerate() {
        ids.push(*i);
        values.push((1.0 - top) / 20.0 * (0.9 + 0.01 * k as f64));
    }
    for (i, g) in chosen.iter().zip(TABLE2_GAMMA) {
        ids.push(*i);
        values.push(g * 0.735);
    }
    WeightSet::new(ids, values).unwrap()
}

fn criterion_1() -> Check {
    let t = Instant::now();
    let omega = table2_omega();
    let sel = select_features(&omega, FeatureCount::Fixed(10)).map_err(|e| e.to_string())?;
    let got: Vec<String> = sel.ids.iter().map(|i| i.to_string()).collect();
    ensure(got == TABLE2_IDS, || format!("ids {got:?}"))?;
    let worst = sel
        .gamma
        .iter()
        .zip(TABLE2_GAMMA)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 5e-4, || format!("γ off by {worst:.2e}"))?;
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("printed ids in order, max |Δγ| = {worst:.1e}"))
}

fn criterion_1b() -> Check {
    let sel = select_features(&table2_omega(), FeatureCount::Fixed(10)).map_err(|e| e.to_string())?;
    let printed_sum: f64 = TABLE2_GAMMA.iter().sum();
    ensure((sel.coverage - 0.735).abs() <= 1e-3, || {
        format!(
            "coverage {:.5}: the printed γ sum to {printed_sum:.3}, so Ω = γ·0.735 totals {:.5}, {:.1e} from 0.735",
            sel.coverage,
            printed_sum * 0.735,
            (printed_sum * 0.735 - 0.735).abs()
        )
    })?;
    Ok(format!("coverage = {:.5}", sel.coverage))
}

fn criterion_2() -> Check {
    let t = Instant::now();
    // a one-feature group with γ = 1 makes χ equal the printed S_evaluate
    let sel = FeatureSelection::from_weights(vec![id("A1")], vec![1.0]).map_err(|e| e.to_string())?;
    let anchors = [
        ("Moscow", 0.6, 0.781, 1.381),
        ("Pyeongchang", 0.8, 0.802, 1.602),
        ("Calgary", 0.8, 0.849, 1.649),
    ];
    let mut scores = Vec::new();
    for (name, base, eval, total) in anchors {
        let s = suitability_score(&[eval], base, &sel).map_err(|e| e.to_string())?;
        ensure((s.total - total).abs() <= 1e-12, || {
            format!("{name}: {} != {total}", s.total)
        })?;
        ensure(s.total == s.s_base + s.s_evaluate, || format!("{name}: decomposition"))?;
        scores.push((name.to_string(), s));
    }
    let order: Vec<String> = rank_cities(scores).into_iter().map(|r| r.name).collect();
    ensure(order == ["Calgary", "Pyeongchang", "Moscow"], || {
        format!("order {order:?}")
    })?;
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok("1.381 / 1.602 / 1.649, Calgary ≻ Pyeongchang ≻ Moscow".into())
}

const SAATY: [f64; 17] = [
    1.0 / 9.0,
    1.0 / 8.0,
    1.0 / 7.0,
    1.0 / 6.0,
    1.0 / 5.0,
    1.0 / 4.0,
    1.0 / 3.0,
    1.0 / 2.0,
    1.0,
    2.0,
    3.0,
    4.0,
    5.0,
    6.0,
    7.0,
    8.0,
    9.0,
];

fn criterion_3() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_cr, mut worst_w) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.gen_range(3..=9);
        // priorities within a factor of 3 keep every ratio on the 1/9..9 scale
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.0)).collect();
        let m = JudgmentMatrix::from_priorities(&w).map_err(|e| e.to_string())?;
        let e = principal_eigen(&m).map_err(|e| e.to_string())?;
        let c = consistency(&m, e.lambda_max).map_err(|e| e.to_string())?;
        worst_cr = worst_cr.max(c.cr.abs());
        let s: f64 = w.iter().sum();
        let err = e
            .weights
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b / s).abs())
            .fold(0.0, f64::max);
        worst_w = worst_w.max(err);
    }
    ensure(worst_cr < 1e-9, || format!("consistent CR up to {worst_cr:.2e}"))?;
    ensure(worst_w < 1e-8, || format!("eigenvector recovery error {worst_w:.2e}"))?;

    let mut worst_l = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=9);
        let mut a = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = SAATY[rng.gen_range(0..SAATY.len())];
                a[i][j] = v;
                a[j][i] = 1.0 / v;
            }
        }
        let m = validate_judgment(&a).map_err(|e| e.to_string())?;
        let e = principal_eigen(&m).map_err(|e| e.to_string())?;
        let dense = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let oracle = dense
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        worst_l = worst_l.max((e.lambda_max - oracle).abs());
    }
    ensure(worst_l < 1e-8, || {
        format!("λmax differs from dense oracle by {worst_l:.2e}")
    })?;
    within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "CR ≤ {worst_cr:.1e}, recovery ≤ {worst_w:.1e}, |Δλmax| ≤ {worst_l:.1e}"
    ))
}

fn random_positive(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.gen_range(0.1..100.0))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_sum, mut worst_scale) = (0.0f64, 0.0f64);
    let mut constant_checked = 0;
    for trial in 0..1000 {
        let n = rng.gen_range(2..=20);
        let m = rng.gen_range(2..=12);
        let mut x = random_positive(&mut rng, n, m);
        if trial % 2 == 0 {
            let j = rng.gen_range(0..m);
            let c = rng.gen_range(0.5..50.0);
            x.column_mut(j).fill(c);
        }
        let z = vector_normalize(&x).map_err(|e| e.to_string())?;
        let r = entropy_weights(&z).map_err(|e| e.to_string())?;
        worst_sum = worst_sum.max((r.weights.iter().sum::<f64>() - 1.0).abs());
        for j in 0..m {
            let col = x.column(j);
            if col.iter().all(|&v| v == col[0]) {
                constant_checked += 1;
                ensure(r.weights[j] == 0.0, || {
                    format!("constant column weight {}", r.weights[j])
                })?;
            }
        }
        let mut scaled = x.clone();
        for j in 0..m {
            let c = 10f64.powf(rng.gen_range(-3.0..3.0));
            scaled.column_mut(j).scale_mut(c);
        }
        let rs = entropy_weights(&vector_normalize(&scaled).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let d = r
            .weights
            .iter()
            .zip(&rs.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_scale = worst_scale.max(d);
    }
    ensure(worst_sum <= 1e-9, || format!("|ΣH − 1| = {worst_sum:.2e}"))?;
    ensure(worst_scale <= 1e-12, || {
        format!("scaling changed H by {worst_scale:.2e}")
    })?;
    Ok(format!(
        "|ΣH − 1| ≤ {worst_sum:.1e}, {constant_checked} constant columns at 0, scaling Δ ≤ {worst_scale:.1e}"
    ))
}

fn criterion_5a() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=30);
        let r: Vec<f64> = (1..m).map(|_| rng.gen_range(1.0..=2.0)).collect();
        let w = ranked_weights(&r).map_err(|e| e.to_string())?;
        worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst <= 1e-9, || format!("|ΣW − 1| = {worst:.2e}"))?;
    Ok(format!("|ΣW − 1| ≤ {worst:.1e} over 1000 ratio vectors"))
}

fn criterion_5b() -> Check {
    let stated = [0.4839, 0.3226, 0.2581];
    let w = ranked_weights(&[1.5, 1.25]).map_err(|e| e.to_string())?;
    let worst = w.iter().zip(stated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-4, || {
        format!(
            "computed ({:.4}, {:.4}, {:.4}) sums to {:.4}; stated values sum to {:.4}, so they cannot satisfy ΣW = 1",
            w[0],
            w[1],
            w[2],
            w.iter().sum::<f64>(),
            stated.iter().sum::<f64>()
        )
    })?;
    Ok("hand example matches".into())
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(4..=12);
        let q: f64 = rng.gen_range(0.7..=1.3);
        let c: f64 = rng.gen_range(0.5..500.0);
        let series = TimeSeries::new("geo", 2000, (0..n).map(|k| c * q.powi(k as i32)).collect());
        let model = fit_gm11(&series).map_err(|e| e.to_string())?;
        let horizon = 5;
        for (k, v) in model.predict(horizon).iter().enumerate() {
            let truth = c * q.powi(k as i32);
            worst = worst.max(((v - truth) / truth).abs());
        }
        // inverse AGO: running sums of X̂⁰ are X̂¹
        let mut acc = 0.0;
        for (v, cum) in model.fitted.iter().zip(&model.fitted_cumulative) {
            acc += v;
            ensure(acc == *cum, || "cumulative fitted values are not running sums".into())?;
        }
        for k in 1..n {
            let diff = model.fitted_cumulative[k] - model.fitted_cumulative[k - 1];
            let rel = ((diff - model.fitted[k]) / model.fitted[k]).abs();
            ensure(rel < 1e-12, || format!("IAGO mismatch {rel:.2e}"))?;
        }
    }
    ensure(worst < 1e-9, || format!("geometric relative error {worst:.2e}"))?;
    for c in [0.3, 7.0, 1234.5] {
        let m = fit_gm11(&TimeSeries::new("c", 0, vec![c; 6])).map_err(|e| e.to_string())?;
        ensure(m.predict(5).iter().all(|v| (v - c).abs() <= 1e-9), || {
            format!("constant {c} drifted")
        })?;
    }
    Ok(format!(
        "geometric relative error ≤ {worst:.1e}; constants and inverse AGO exact"
    ))
}

fn climate_city(name: &str, temp: f64, snow: f64) -> CityProfile {
    let mut c = CityProfile::new(name, "Testland");
    c.climate
        .insert(ClimateVariable::FebTemp, TimeSeries::new("", 2016, vec![temp; 5]));
    c.climate
        .insert(ClimateVariable::FebSnow, TimeSeries::new("", 2016, vec![snow; 5]));
    c
}

fn criterion_7() -> Check {
    let req = ClimateRequirement::default();
    let cities = vec![
        climate_city("cold-enough", -0.1, 60.0),
        climate_city("too-warm", 0.1, 60.0),
        climate_city("short-snow", -5.0, 29.0),
        climate_city("just-snow", -5.0, 30.0),
        climate_city("ideal", -12.0, 45.0),
    ];
    let v = winter_climate_filter(&cities, &req, 2030).map_err(|e| e.to_string())?;
    let got: Vec<(bool, bool)> = v.iter().map(|c| (c.pass, c.ideal)).collect();
    let want = [
        (true, false),
        (false, false),
        (false, false),
        (true, false),
        (true, true),
    ];
    ensure(got == want, || format!("verdicts {got:?}"))?;

    // relaxing either threshold never removes a passing city
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pool: Vec<CityProfile> = (0..40)
        .map(|i| {
            let mut c = CityProfile::new(format!("c{i}"), "Testland");
            let t0 = rng.gen_range(-25.0..8.0);
            let s0 = rng.gen_range(5.0..90.0);
            let dt = rng.gen_range(-0.3..0.3);
            let ds = rng.gen_range(0.95..1.05f64);
            c.climate.insert(
                ClimateVariable::FebTemp,
                TimeSeries::new("", 2010, (0..6).map(|k| t0 + dt * k as f64).collect()),
            );
            c.climate.insert(
                ClimateVariable::FebSnow,
                TimeSeries::new("", 2010, (0..6).map(|k| s0 * ds.powi(k)).collect()),
            );
            c
        })
        .collect();
    let mut checks = 0;
    for _ in 0..50 {
        let strict = ClimateRequirement {
            max_feb_temp: rng.gen_range(-5.0..3.0),
            min_feb_snow: rng.gen_range(10.0..60.0),
            ..req
        };
        let loose = ClimateRequirement {
            max_feb_temp: strict.max_feb_temp + rng.gen_range(0.0..3.0),
            min_feb_snow: strict.min_feb_snow - rng.gen_range(0.0..10.0),
            ..strict
        };
        let a = winter_climate_filter(&pool, &strict, 2030).map_err(|e| e.to_string())?;
        let b = winter_climate_filter(&pool, &loose, 2030).map_err(|e| e.to_string())?;
        for (x, y) in a.iter().zip(&b) {
            ensure(!x.pass || y.pass, || format!("{} dropped after relaxing", x.name))?;
            checks += 1;
        }
    }
    Ok(format!("threshold straddles classified; {checks} monotonicity checks"))
}

fn substitution_fixture() -> (FeatureSelection, WeightSet, DecisionMatrix) {
    let h = IndicatorHierarchy::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ids = IndicatorId::all();
    let omega_raw: Vec<f64> = ids.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = omega_raw.iter().sum();
    let omega = WeightSet::new(ids.clone(), omega_raw.iter().map(|v| v / s).collect()).unwrap();
    let sel = select_features(&omega, FeatureCount::Fixed(10)).unwrap();
    let labels: Vec<String> = (0..12).map(|i| format!("city{i:02}")).collect();
    let data: Vec<Vec<f64>> = labels
        .iter()
        .map(|_| ids.iter().map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect();
    let m = DecisionMatrix::new(labels, ids, data, &h).unwrap();
    (sel, omega, m)
}

fn criterion_8() -> Check {
    let (sel, omega, data) = substitution_fixture();
    let cfg = PerturbationConfig {
        seed: 2022,
        n_swap: 5,
        trials: 200,
    };
    let a = factor_substitution(&sel, &omega, &data, &cfg).map_err(|e| e.to_string())?;
    let b = factor_substitution(&sel, &omega, &data, &cfg).map_err(|e| e.to_string())?;
    let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    ensure(ja == jb, || "same seed gave different reports".into())?;

    let zero = PerturbationConfig { n_swap: 0, ..cfg };
    let z = factor_substitution(&sel, &omega, &data, &zero).map_err(|e| e.to_string())?;
    ensure(z.trials.iter().all(|t| t.absolute.iter().all(|d| *d == 0.0)), || {
        "zero-swap trial deviated".into()
    })?;

    for k in 3..=7 {
        for c in 0..=3 {
            let d = bbd_design(k, c).map_err(|e| e.to_string())?;
            let want = 4 * k * (k - 1) / 2 + c;
            ensure(d.points.len() == want, || {
                format!("k={k}, c={c}: {} points", d.points.len())
            })?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0f64;
    for k in 3..=7 {
        for _ in 0..20 {
            let p = hoiem::sensitivity::coefficient_count(k);
            let coef: Vec<f64> = (0..p).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let truth = QuadraticSurface::from_coefficients(k, &coef);
            let d = bbd_design(k, 3).map_err(|e| e.to_string())?;
            let y: Vec<f64> = d.points.iter().map(|x| truth.eval(x)).collect();
            let s = fit_response_surface(&d, &y).map_err(|e| e.to_string())?;
            worst = worst.max((s.r_squared - 1.0).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("|R² − 1| = {worst:.2e}"))?;
    Ok(format!(
        "reports byte-identical; BBD counts k=3..7; |R² − 1| ≤ {worst:.1e}"
    ))
}

fn grid_extrema(s: &QuadraticSurface, per_axis: usize) -> (f64, f64) {
    let k = s.factors;
    let levels: Vec<f64> = (0..per_axis)
        .map(|i| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64)
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut idx = vec![0usize; k];
    let mut x = vec![0.0; k];
    loop {
        for (xi, &i) in x.iter_mut().zip(&idx) {
            *xi = levels[i];
        }
        let v = s.eval(&x);
        lo = lo.min(v);
        hi = hi.max(v);
        let mut d = 0;
        while d < k {
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == k {
            return (lo, hi);
        }
    }
}

/// Dense grid over [−1, 1]² for c0 + c1·x + c2·y + c3·xy + c4·x² + c5·y².
fn grid_extrema_2d(c: &[f64], per_axis: usize) -> (f64, f64) {
    let step = 2.0 / (per_axis - 1) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..per_axis {
        let x = -1.0 + step * i as f64;
        for j in 0..per_axis {
            let y = -1.0 + step * j as f64;
            let v = c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x * x + c[5] * y * y;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

fn criterion_9() -> Check {
    // The charted indicator weights, per-plan impact scores and the 69%/50%/25% response
    // extremes rest on data that was never published; only the properties
    // below are checked in their place.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let coef: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = QuadraticSurface::from_coefficients(2, &coef);
        let e = surface_extrema(&s, &[(-1.0, 1.0), (-1.0, 1.0)]).map_err(|e| e.to_string())?;
        let (lo, hi) = grid_extrema_2d(&coef, 2001);
        ensure(e.min_value <= lo + 1e-12 && e.max_value >= hi - 1e-12, || {
            "grid beat the exact extrema".into()
        })?;
        worst = worst.max(lo - e.min_value).max(e.max_value - hi);
    }
    let (sel, _, _) = substitution_fixture();
    let xi: Vec<f64> = (0..sel.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    for factors in [vec![0, 9], vec![0, 4, 9]] {
        let resp = ChiResponse::new(&sel, xi.clone(), factors, 0.5).map_err(|e| e.to_string())?;
        let study = rsm_study(&resp, 3).map_err(|e| e.to_string())?;
        let (lo, hi) = grid_extrema(&study.surface, 101);
        worst = worst
            .max((lo - study.extrema.min_value).abs())
            .max((hi - study.extrema.max_value).abs());
        let (clo, chi) = grid_extrema_chi(&resp, 25);
        worst = worst
            .max((clo - study.extrema.min_value).abs())
            .max((chi - study.extrema.max_value).abs());
    }
    ensure(worst <= 1e-6, || {
        format!("extrema differ from grid search by {worst:.2e}")
    })?;

    // scheme aggregates: linear in impacts
    let impacts = |f: &dyn Fn(usize) -> u8| -> BTreeMap<IndicatorId, ImpactScale> {
        sel.ids
            .iter()
            .enumerate()
            .map(|(j, id)| (*id, ImpactScale::try_from(f(j)).unwrap()))
            .collect()
    };
    let plans = vec![
        SchemePlan {
            id: SchemeId::Original,
            description: String::new(),
            impacts: impacts(&|_| 1),
        },
        SchemePlan {
            id: SchemeId::A,
            description: String::new(),
            impacts: impacts(&|_| 9),
        },
        SchemePlan {
            id: SchemeId::B,
            description: String::new(),
            impacts: impacts(&|j| if j == 0 { 3 } else { 5 }),
        },
        SchemePlan {
            id: SchemeId::C,
            description: String::new(),
            impacts: impacts(&|_| 5),
        },
    ];
    let scores = compare_schemes(&plans, &sel).map_err(|e| e.to_string())?;
    let agg = |id: SchemeId| scores.iter().find(|s| s.id == id).unwrap().aggregate;
    let g1 = sel.gamma[0];
    ensure((agg(SchemeId::Original) - 1.0).abs() <= 1e-12, || "all-1 plan".into())?;
    ensure((agg(SchemeId::A) - 9.0).abs() <= 1e-12, || "all-9 plan".into())?;
    ensure((agg(SchemeId::C) - agg(SchemeId::B) - 2.0 * g1).abs() <= 1e-12, || {
        "one-feature change not linear".into()
    })?;
    Ok(format!(
        "charted weights, plan impacts and response extremes not reproduced (unpublished data); grid oracle Δ ≤ {worst:.1e}; scheme aggregates linear"
    ))
}

fn grid_extrema_chi(r: &ChiResponse, per_axis: usize) -> (f64, f64) {
    let k = r.factors.len();
    let levels: Vec<f64> = (0..per_axis)
        .map(|i| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let total = per_axis.pow(k as u32);
    for code in 0..total {
        let mut c = code;
        let x: Vec<f64> = (0..k)
            .map(|_| {
                let v = levels[c % per_axis];
                c /= per_axis;
                v
            })
            .collect();
        let v = r.eval(&x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn main() -> ExitCode {
    let checks: [(&str, &str, fn() -> Check); 11] = [
        (
            "1",
            "feature selection reproduces the printed feature group",
            criterion_1,
        ),
        ("1b", "feature group coverage 0.735 ± 1e-3", criterion_1b),
        ("2", "suitability score anchors and ranking", criterion_2),
        ("3", "AHP consistency, recovery and eigenvalue oracle", criterion_3),
        ("4", "entropy weight properties", criterion_4),
        ("5a", "ordered weights sum to one", criterion_5a),
        ("5b", "m = 3 hand example (0.4839, 0.3226, 0.2581)", criterion_5b),
        ("6", "GM(1,1) exactness on geometric and constant series", criterion_6),
        ("7", "winter climate thresholds and monotonicity", criterion_7),
        (
            "8",
            "sensitivity determinism, BBD sizes, exact quadratic fits",
            criterion_8,
        ),
        ("9", "non-reproducible figures covered by property checks", criterion_9),
    ];
    let mut failed = 0;
    for (tag, name, f) in checks {
        let t = Instant::now();
        let outcome = f();
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {tag:<3} PASS  {name} [{ms} ms] — {detail}"),
            Err(why) if KNOWN_UNATTAINABLE.contains(&tag) => {
                println!("criterion {tag:<3} FAIL  {name} [{ms} ms] — known unattainable: {why}")
            }
            Err(why) => {
                failed += 1;
                println!("criterion {tag:<3} FAIL  {name} [{ms} ms] — {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion check(s) failed");
        ExitCode::FAILURE
    }
}
