//! Monte Carlo runners.
//!
//! Every replication is an independent task seeded by `(master seed, n index,
//! replication index)`. Tasks run on a rayon pool, results are collected in
//! replication order and aggregated sequentially, so the output does not
//! depend on the thread count.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use citymst_core::stats::{ols_slope, pearson};
use citymst_core::trials::{self, CityTrial, OnePointTrial, TrialError, UnconstrainedTrial};
use citymst_core::{CityLayout, EventStats, MomentAccumulator, MomentEstimate, StreamSeed};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ExperimentConfig, LayoutSpec};
use crate::output::{fmt_f64 as f, Table};

/// Stream id reserved for run-level choices such as the correlation pairs.
pub const RUN_STREAM: u64 = u64::MAX;
/// City pairs sampled for the correlation summary.
pub const CORRELATION_PAIRS: usize = 100;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("{experiment} requires {requirement}")]
    Precondition {
        experiment: ExperimentKind,
        requirement: &'static str,
    },
    #[error("n = {n}, replication {replication}: {source}")]
    Trial {
        n: u64,
        replication: usize,
        #[source]
        source: TrialError,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    MstcScaling,
    CityMoments,
    Unconstrained,
    OnePointDiff,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::MstcScaling,
        ExperimentKind::CityMoments,
        ExperimentKind::Unconstrained,
        ExperimentKind::OnePointDiff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MstcScaling => "mstc-scaling",
            ExperimentKind::CityMoments => "city-moments",
            ExperimentKind::Unconstrained => "unconstrained",
            ExperimentKind::OnePointDiff => "one-point-diff",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExperimentError::UnknownExperiment(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

/// Tables and summary produced by one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    /// One row per `n`.
    pub aggregate: Table,
    /// One row per `(n, replication)`.
    pub raw: Table,
    /// Further tables, keyed by file-name suffix (e.g. `.cities.csv`).
    pub extra: Vec<(String, Table)>,
    /// Estimated constants, calibrated bands and trend checks.
    pub summary: Value,
    /// Hard-assertion failures; non-empty means the run failed.
    pub failures: Vec<String>,
    /// Seconds spent per `n`.
    pub timings: Vec<(u64, f64)>,
}

pub fn trial_seed(master: u64, n_index: usize, replication: usize) -> StreamSeed {
    StreamSeed::replication(master, ((n_index as u64) << 32) | replication as u64)
}

/// Runs `task` for replications `0..reps` on `threads` workers; results come
/// back in replication order.
pub fn replicate<T, F>(reps: usize, threads: usize, task: F) -> Result<Vec<T>, (usize, TrialError)>
where
    T: Send,
    F: Fn(usize) -> Result<T, TrialError> + Sync,
{
    let run = || (0..reps).into_par_iter().map(&task).collect::<Vec<_>>();
    let results = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| (i, e)))
        .collect()
}

fn run_grid<T, F>(cfg: &ExperimentConfig, opts: RunOptions, task: F) -> Result<(Vec<Vec<T>>, Vec<(u64, f64)>), ExperimentError>
where
    T: Send,
    F: Fn(usize, StreamSeed) -> Result<T, TrialError> + Sync,
{
    let mut all = Vec::with_capacity(cfg.n.len());
    let mut timings = Vec::with_capacity(cfg.n.len());
    for (k, &n) in cfg.n.iter().enumerate() {
        let start = Instant::now();
        let rows = replicate(cfg.replications, opts.threads, |rep| {
            task(n as usize, trial_seed(cfg.master_seed, k, rep))
        })
        .map_err(|(replication, source)| ExperimentError::Trial { n, replication, source })?;
        timings.push((n, start.elapsed().as_secs_f64()));
        all.push(rows);
    }
    Ok((all, timings))
}

/// Nearest-rank quantile of a sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn estimate(values: impl IntoIterator<Item = f64>) -> MomentEstimate {
    let mut acc = MomentAccumulator::new();
    acc.extend(values);
    acc.estimate()
}

fn event_json(e: &EventStats) -> Value {
    json!({ "event": e.name, "trials": e.trials, "occurrences": e.occurrences, "frequency": e.frequency, "stderr": e.stderr() })
}

fn moment_json(m: &MomentEstimate) -> Value {
    json!({ "mean": m.mean, "variance": m.variance, "stderr_mean": m.stderr_mean, "count": m.count, "min": m.min, "max": m.max })
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `(max - min) / min` of a positive sequence.
pub fn relative_spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput, ExperimentError> {
    match kind {
        ExperimentKind::MstcScaling => run_mstc_scaling(cfg, opts),
        ExperimentKind::CityMoments => run_city_moment_lemmas(cfg, opts),
        ExperimentKind::Unconstrained => run_unconstrained(cfg, opts),
        ExperimentKind::OnePointDiff => run_one_point_diff(cfg, opts),
    }
}

const MSTC_AGGREGATE: [&str; 19] = [
    "n",
    "replications",
    "cities",
    "b_n",
    "mean_mstc",
    "mean_ratio",
    "var_ratio",
    "std_ratio",
    "stderr_ratio",
    "min_ratio",
    "max_ratio",
    "theta_lo",
    "theta_hi",
    "p_band",
    "p_all_occupied",
    "p_u_tot",
    "mean_upper_minus_lower",
    "sandwich_checked",
    "sandwich_violations",
];

const MSTC_RAW: [&str; 12] = [
    "n",
    "rep",
    "mstc",
    "b_n",
    "ratio",
    "upper_len",
    "upper_bound",
    "fallback",
    "lower",
    "all_occupied",
    "u_tot",
    "sandwich",
];

/// MSTC normalized by `b_n = r√(nN)` over the `n` grid, with the per-trial
/// sandwich check. The concentration band `[θ_lo, θ_hi]` is the pooled 5% and
/// 95% quantile of the normalized lengths over the whole grid.
pub fn run_mstc_scaling(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput, ExperimentError> {
    let layout = match &cfg.layout {
        LayoutSpec::Cities(l) => l.clone(),
        LayoutSpec::Unconstrained => CityLayout::unit(),
    };
    let density = cfg.density;
    let (grid, timings) = run_grid(cfg, opts, |n, seed| trials::city_trial(n, &layout, &density, seed))?;

    let pooled = sorted(grid.iter().flatten().map(CityTrial::normalized).collect());
    let (theta_lo, theta_hi) = (quantile(&pooled, 0.05), quantile(&pooled, 0.95));

    let mut aggregate = Table::new(&MSTC_AGGREGATE);
    let mut raw = Table::new(&MSTC_RAW);
    let mut failures = Vec::new();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    let mut events = Vec::new();
    for (&n, trials) in cfg.n.iter().zip(&grid) {
        let ratio = estimate(trials.iter().map(CityTrial::normalized));
        let mstc = estimate(trials.iter().map(|t| t.mstc));
        let mut band = EventStats::new(format!("theta band, n = {n}"));
        let mut occupied = EventStats::new(format!("all cities occupied, n = {n}"));
        let mut u_tot = EventStats::new(format!("U_tot, n = {n}"));
        let mut gap = MomentAccumulator::new();
        let (mut checked, mut violations) = (0usize, 0usize);
        for (rep, t) in trials.iter().enumerate() {
            let r = t.normalized();
            band.record(theta_lo <= r && r <= theta_hi);
            occupied.record(t.all_occupied);
            u_tot.record(t.u_tot);
            let sandwich = t.sandwich_holds(&layout);
            if let (Some(ok), Some(lower)) = (sandwich, t.lower) {
                checked += 1;
                gap.push(t.upper.tree_len - lower);
                if !ok {
                    violations += 1;
                    failures.push(format!(
                        "sandwich violated at n = {n}, replication {rep}: lower {lower}, mstc {}, upper {}",
                        t.mstc, t.upper.tree_len
                    ));
                }
            }
            raw.push(vec![
                n.to_string(),
                rep.to_string(),
                f(t.mstc),
                f(t.b_n),
                f(r),
                f(t.upper.tree_len),
                f(t.upper.bound),
                t.upper.fallback.to_string(),
                t.lower.map(f).unwrap_or_default(),
                t.all_occupied.to_string(),
                t.u_tot.to_string(),
                sandwich.map(|b| b.to_string()).unwrap_or_default(),
            ]);
        }
        let gap = gap.estimate();
        aggregate.push(vec![
            n.to_string(),
            ratio.count.to_string(),
            layout.city_count().to_string(),
            f(trials[0].b_n),
            f(mstc.mean),
            f(ratio.mean),
            f(ratio.variance),
            f(ratio.std_dev()),
            f(ratio.stderr_mean),
            f(ratio.min),
            f(ratio.max),
            f(theta_lo),
            f(theta_hi),
            f(band.frequency),
            f(occupied.frequency),
            f(u_tot.frequency),
            if checked > 0 { f(gap.mean) } else { String::new() },
            checked.to_string(),
            violations.to_string(),
        ]);
        means.push(ratio.mean);
        stds.push(ratio.std_dev());
        events.extend([event_json(&band), event_json(&occupied), event_json(&u_tot)]);
    }
    let summary = json!({
        "theta_band": { "lo": theta_lo, "hi": theta_hi, "rule": "pooled 5% and 95% quantiles of MSTC/b_n" },
        "std_ratio": stds,
        "std_strictly_decreasing": strictly_decreasing(&stds),
        "mean_ratio": means,
        "mean_relative_spread": relative_spread(&means),
        "lower_bound_enabled": cfg.layout.lower_bound_enabled(),
        "events": events,
    });
    Ok(ExperimentOutput {
        kind: ExperimentKind::MstcScaling,
        aggregate,
        raw,
        extra: Vec::new(),
        summary,
        failures,
        timings,
    })
}

const MOMENT_AGGREGATE: [&str; 14] = [
    "n",
    "replications",
    "cities",
    "scale",
    "scaled_min",
    "scaled_max",
    "scaled_mean",
    "exchangeable_frac",
    "mean_abs_corr",
    "corr_within_3sigma_frac",
    "gap_max_z",
    "gap_within_5se_frac",
    "mean_poisson_total",
    "mean_r2_scaled_max",
];

const MOMENT_CITIES: [&str; 14] = [
    "n",
    "city",
    "lx",
    "ly",
    "mean_r",
    "var_r",
    "stderr_r",
    "mean_r2",
    "scaled_mean",
    "poisson_mean",
    "poisson_stderr",
    "gap",
    "combined_stderr",
    "gap_z",
];

/// Distinct unordered city pairs drawn from the run stream.
pub fn correlation_pairs(master: u64, cities: usize, count: usize) -> Vec<(usize, usize)> {
    let total = cities * (cities - 1) / 2;
    let count = count.min(total);
    let mut rng = StreamSeed::new(master, RUN_STREAM).rng();
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let a = rng.below(cities as u64) as usize;
        let b = rng.below(cities as u64) as usize;
        if a == b {
            continue;
        }
        let p = (a.min(b), a.max(b));
        if !pairs.contains(&p) {
            pairs.push(p);
        }
    }
    pairs
}

/// `|atanh(r)| √(R - 3)`: Fisher's z statistic of a sample correlation
/// against zero.
pub fn fisher_z(r: f64, replications: usize) -> f64 {
    r.atanh().abs() * (replications as f64 - 3.0).sqrt()
}

/// Per-city `R_l` moments, pairwise correlations and the matched
/// binomial/Poisson gap.
pub fn run_city_moment_lemmas(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput, ExperimentError> {
    let layout = match &cfg.layout {
        LayoutSpec::Cities(l) if l.city_count() >= 2 => l.clone(),
        _ => {
            return Err(ExperimentError::Precondition {
                experiment: ExperimentKind::CityMoments,
                requirement: "a city layout with at least two cities",
            })
        }
    };
    let density = cfg.density;
    let cities = layout.city_count();
    let reps = cfg.replications;
    let (grid, timings) = run_grid(cfg, opts, |n, seed| trials::city_moment_trial(n, &layout, &density, seed))?;
    let pairs = correlation_pairs(cfg.master_seed, cities, CORRELATION_PAIRS);

    let mut aggregate = Table::new(&MOMENT_AGGREGATE);
    let mut raw = Table::new(&["n", "rep", "city", "r_binomial", "r_poisson"]);
    let mut city_table = Table::new(&MOMENT_CITIES);
    let mut pair_table = Table::new(&["n", "l1", "l2", "corr", "fisher_z"]);
    let mut grand_means = Vec::new();
    let mut per_n = Vec::new();
    for (&n, trials) in cfg.n.iter().zip(&grid) {
        let scale = layout.r * (n as f64 / cities as f64).sqrt();
        let column = |l: usize, poisson: bool| -> Vec<f64> {
            trials
                .iter()
                .map(|t| if poisson { t.poisson[l] } else { t.binomial[l] })
                .collect()
        };
        let binom: Vec<Vec<f64>> = (0..cities).map(|l| column(l, false)).collect();
        let pois: Vec<Vec<f64>> = (0..cities).map(|l| column(l, true)).collect();
        let b_est: Vec<MomentEstimate> = binom.iter().map(|c| MomentEstimate::from_values(c)).collect();
        let p_est: Vec<MomentEstimate> = pois.iter().map(|c| MomentEstimate::from_values(c)).collect();

        let mut scaled = Vec::with_capacity(cities);
        let mut gap_z = Vec::with_capacity(cities);
        let mut r2_scaled_max: f64 = 0.0;
        for l in 0..cities {
            let (b, p) = (&b_est[l], &p_est[l]);
            let mean_r2 = binom[l].iter().map(|x| x * x).sum::<f64>() / reps as f64;
            r2_scaled_max = r2_scaled_max.max(mean_r2 / (scale * scale));
            let se = (b.stderr_mean.powi(2) + p.stderr_mean.powi(2)).sqrt();
            let gap = (b.mean - p.mean).abs();
            let z = if se > 0.0 { gap / se } else if gap == 0.0 { 0.0 } else { f64::INFINITY };
            let (lx, ly) = layout.selected[l];
            city_table.push(vec![
                n.to_string(),
                l.to_string(),
                lx.to_string(),
                ly.to_string(),
                f(b.mean),
                f(b.variance),
                f(b.stderr_mean),
                f(mean_r2),
                f(b.mean / scale),
                f(p.mean),
                f(p.stderr_mean),
                f(gap),
                f(se),
                f(z),
            ]);
            scaled.push(b.mean / scale);
            gap_z.push(z);
        }

        let mut exchangeable = 0usize;
        let mut compared = 0usize;
        for a in 0..cities {
            for b in a + 1..cities {
                let se = (b_est[a].stderr_mean.powi(2) + b_est[b].stderr_mean.powi(2)).sqrt();
                exchangeable += ((b_est[a].mean - b_est[b].mean).abs() <= 3.0 * se) as usize;
                compared += 1;
            }
        }

        let mut abs_corr = MomentAccumulator::new();
        let mut within = 0usize;
        for &(a, b) in &pairs {
            let r = pearson(&binom[a], &binom[b]);
            let z = fisher_z(r, reps);
            abs_corr.push(r.abs());
            within += (z <= 3.0) as usize;
            pair_table.push(vec![n.to_string(), a.to_string(), b.to_string(), f(r), f(z)]);
        }

        for (rep, t) in trials.iter().enumerate() {
            for l in 0..cities {
                raw.push(vec![n.to_string(), rep.to_string(), l.to_string(), f(t.binomial[l]), f(t.poisson[l])]);
            }
        }

        let scaled_est = estimate(scaled.iter().copied());
        let gap_ok = gap_z.iter().filter(|&&z| z <= 5.0).count();
        let mean_total = trials.iter().map(|t| t.poisson_total as f64).sum::<f64>() / reps as f64;
        let corr_frac = within as f64 / pairs.len().max(1) as f64;
        aggregate.push(vec![
            n.to_string(),
            reps.to_string(),
            cities.to_string(),
            f(scale),
            f(scaled_est.min),
            f(scaled_est.max),
            f(scaled_est.mean),
            f(exchangeable as f64 / compared as f64),
            f(abs_corr.estimate().mean),
            f(corr_frac),
            f(gap_z.iter().copied().fold(0.0, f64::max)),
            f(gap_ok as f64 / cities as f64),
            f(mean_total),
            f(r2_scaled_max),
        ]);
        grand_means.push(b_est.iter().map(|e| e.mean).sum::<f64>() / cities as f64);
        per_n.push(json!({
            "n": n,
            "scaled_mean": moment_json(&scaled_est),
            "mean_abs_corr": abs_corr.estimate().mean,
            "n_over_cities_squared": n as f64 / (cities * cities) as f64,
        }));
    }
    let slope = if cfg.n.len() >= 2 {
        let xs: Vec<f64> = cfg.n.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = grand_means.iter().map(|m| m.ln()).collect();
        Some(ols_slope(&xs, &ys))
    } else {
        None
    };
    let summary = json!({
        "scale": "r * sqrt(n / N)",
        "log_log_slope_mean_r": slope,
        "correlation_pairs": pairs.len(),
        "correlation_band": "Fisher z = |atanh(r)| sqrt(R - 3) <= 3",
        "gap_band": "|E R_l - E_0 R_l^P| <= 5 combined standard errors",
        "per_n": per_n,
    });
    Ok(ExperimentOutput {
        kind: ExperimentKind::CityMoments,
        aggregate,
        raw,
        extra: vec![(".cities.csv".into(), city_table), (".pairs.csv".into(), pair_table)],
        summary,
        failures: Vec::new(),
        timings,
    })
}

const UNCONSTRAINED_AGGREGATE: [&str; 14] = [
    "n",
    "replications",
    "mean_mst",
    "var_mst",
    "stderr_mst",
    "min_mst",
    "max_mst",
    "beta_hat",
    "beta_stderr",
    "beta_rel_change",
    "max_ratio",
    "mean_strips",
    "max_strips_ratio",
    "bound_violations",
];

/// `MST_n` on the whole unit square: moments, `β̂(n) = Ê MST_n / √n`, and the
/// hard check `MST_n <= 3√n` (also applied to the strips path).
pub fn run_unconstrained(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput, ExperimentError> {
    if cfg.layout != LayoutSpec::Unconstrained {
        return Err(ExperimentError::Precondition {
            experiment: ExperimentKind::Unconstrained,
            requirement: "layout \"unconstrained\"",
        });
    }
    let density = cfg.density;
    let (grid, timings) = run_grid(cfg, opts, |n, seed| trials::unconstrained_trial(n, &density, seed))?;

    let mut aggregate = Table::new(&UNCONSTRAINED_AGGREGATE);
    let mut raw = Table::new(&["n", "rep", "mst", "strips", "bound"]);
    let mut failures = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut variances = Vec::new();
    for (&n, trials) in cfg.n.iter().zip(&grid) {
        let root = (n as f64).sqrt();
        let mst = estimate(trials.iter().map(|t| t.mst));
        let strips = estimate(trials.iter().map(|t| t.strips));
        let mut violations = 0usize;
        for (rep, t) in trials.iter().enumerate() {
            if !t.within_bound() {
                violations += 1;
                failures.push(format!(
                    "MST_n <= 3√n violated at n = {n}, replication {rep}: mst {}, strips {}, bound {}",
                    t.mst,
                    t.strips,
                    t.bound()
                ));
            }
            raw.push(vec![n.to_string(), rep.to_string(), f(t.mst), f(t.strips), f(UnconstrainedTrial::bound(t))]);
        }
        let beta = mst.mean / root;
        let change = betas.last().map(|&b| f((beta - b).abs() / b)).unwrap_or_default();
        aggregate.push(vec![
            n.to_string(),
            mst.count.to_string(),
            f(mst.mean),
            f(mst.variance),
            f(mst.stderr_mean),
            f(mst.min),
            f(mst.max),
            f(beta),
            f(mst.stderr_mean / root),
            change,
            f(mst.max / root),
            f(strips.mean),
            f(strips.max / root),
            violations.to_string(),
        ]);
        betas.push(beta);
        variances.push(mst.variance);
    }
    let (n_min, n_max) = (cfg.n[0] as f64, cfg.n[cfg.n.len() - 1] as f64);
    let var_ratio = variances[variances.len() - 1] / variances[0];
    let benchmark = (n_max.ln() / n_min.ln()).powi(3);
    let summary = json!({
        "variance_growth": { "n_min": n_min, "n_max": n_max, "ratio": var_ratio, "polylog_benchmark": benchmark, "ratio_over_benchmark": var_ratio / benchmark },
        "beta_hat": if cfg.density.is_uniform() { json!(betas) } else { Value::Null },
        "beta_note": if cfg.density.is_uniform() { "uniform density" } else { "beta stabilization is only reported for the uniform density" },
    });
    Ok(ExperimentOutput {
        kind: ExperimentKind::Unconstrained,
        aggregate,
        raw,
        extra: Vec::new(),
        summary,
        failures,
        timings,
    })
}

const ONE_POINT_AGGREGATE: [&str; 22] = [
    "n",
    "trials",
    "r_n",
    "cells_per_side",
    "p_ztot",
    "p_ztot_full",
    "add_checked",
    "add_violations",
    "max_add_over_bound",
    "removal_q50",
    "removal_q90",
    "removal_q99",
    "removal_max",
    "removal_max_over_rn_log_n",
    "mean_abs_one",
    "stderr_abs_one",
    "shape",
    "mean_abs_one_over_shape",
    "locality_violations",
    "mean_add_diff",
    "mean_removal",
    "scale_window",
];

const ONE_POINT_RAW: [&str; 12] = [
    "n",
    "rep",
    "j",
    "mst_n1",
    "mst_nj",
    "mst_n",
    "r_n",
    "ztot",
    "ztot_full",
    "add_diff",
    "add_bound",
    "locality_violations",
];

/// Add/remove one point: the `r_n√2` add bound on trials where the fine-grid
/// occupancy event holds, removal quantiles against `r_n log n`, and
/// `Ê|MST_{n+1} - MST_n|` against `(log n)^{3/2} / √n`.
pub fn run_one_point_diff(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput, ExperimentError> {
    if cfg.layout != LayoutSpec::Unconstrained {
        return Err(ExperimentError::Precondition {
            experiment: ExperimentKind::OnePointDiff,
            requirement: "layout \"unconstrained\"",
        });
    }
    let (f_spec, m) = (cfg.density, cfg.m);
    let (grid, timings) = run_grid(cfg, opts, |n, seed| trials::one_point_trial(n, m, &f_spec, seed))?;
    let cells = |n: u64| citymst_core::FineGrid::for_nodes(n, m).cells_per_side;

    let mut aggregate = Table::new(&ONE_POINT_AGGREGATE);
    let mut raw = Table::new(&ONE_POINT_RAW);
    let mut failures = Vec::new();
    let mut events = Vec::new();
    let mut abs_means = Vec::new();
    for (&n, trials) in cfg.n.iter().zip(&grid) {
        let mut ztot = EventStats::new(format!("Z_tot (margin 1), n = {n}"));
        let mut ztot_full = EventStats::new(format!("Z_tot (full set), n = {n}"));
        let (mut checked, mut violations, mut locality) = (0usize, 0usize, 0usize);
        let mut max_over: f64 = f64::NEG_INFINITY;
        for (rep, t) in trials.iter().enumerate() {
            ztot.record(t.ztot);
            ztot_full.record(t.ztot_full);
            if t.ztot {
                checked += 1;
                max_over = max_over.max(t.add_diff() / t.add_bound());
                if t.add_diff() > t.add_bound() {
                    violations += 1;
                    failures.push(format!(
                        "add bound violated at n = {n}, replication {rep}: {} > {}",
                        t.add_diff(),
                        t.add_bound()
                    ));
                }
                if t.locality_violations > 0 {
                    locality += t.locality_violations;
                    failures.push(format!(
                        "{} MST edges break 20-square locality at n = {n}, replication {rep}",
                        t.locality_violations
                    ));
                }
            }
            raw.push(vec![
                n.to_string(),
                rep.to_string(),
                t.j.to_string(),
                f(t.mst_n1),
                f(t.mst_nj),
                f(t.mst_n),
                f(t.r_n),
                t.ztot.to_string(),
                t.ztot_full.to_string(),
                f(t.add_diff()),
                f(t.add_bound()),
                t.locality_violations.to_string(),
            ]);
        }
        let removal = sorted(trials.iter().map(|t| t.mst_nj - t.mst_n1).collect());
        let abs_one = estimate(trials.iter().map(|t| (t.mst_n1 - t.mst_n).abs()));
        let first: &OnePointTrial = &trials[0];
        let ln_n = (n as f64).ln();
        let shape = ln_n.powf(1.5) / (n as f64).sqrt();
        aggregate.push(vec![
            n.to_string(),
            trials.len().to_string(),
            f(first.r_n),
            cells(n).to_string(),
            f(ztot.frequency),
            f(ztot_full.frequency),
            checked.to_string(),
            violations.to_string(),
            if checked > 0 { f(max_over) } else { String::new() },
            f(quantile(&removal, 0.5)),
            f(quantile(&removal, 0.9)),
            f(quantile(&removal, 0.99)),
            f(removal[removal.len() - 1]),
            f(removal[removal.len() - 1] / first.removal_scale()),
            f(abs_one.mean),
            f(abs_one.stderr_mean),
            f(shape),
            f(abs_one.mean / shape),
            locality.to_string(),
            f(estimate(trials.iter().map(OnePointTrial::add_diff)).mean),
            f(estimate(removal.iter().copied()).mean),
            (first.r_n * first.r_n <= 3.0 * m * ln_n / n as f64).to_string(),
        ]);
        abs_means.push(abs_one.mean);
        events.extend([event_json(&ztot), event_json(&ztot_full)]);
    }
    let summary = json!({
        "M": m,
        "grid_rule": "K = max(1, floor(1 / sqrt(2 M ln n / n))), r_n = 1/K",
        "add_bound": "r_n * sqrt(2)",
        "add_bound_factor": SQRT_2,
        "mean_abs_one": abs_means,
        "mean_abs_one_decreasing": strictly_decreasing(&abs_means),
        "events": events,
    });
    Ok(ExperimentOutput {
        kind: ExperimentKind::OnePointDiff,
        aggregate,
        raw,
        extra: Vec::new(),
        summary,
        failures,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    fn cfg(text: &str) -> ExperimentConfig {
        parse_config_str(text).unwrap()
    }

    #[test]
    fn kinds_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!(matches!(
            "tsp".parse::<ExperimentKind>(),
            Err(ExperimentError::UnknownExperiment(_))
        ));
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn replicate_is_ordered_and_thread_invariant() {
        let task = |rep: usize| Ok::<_, TrialError>(trial_seed(3, 0, rep).rng().next_f64());
        let a = replicate(50, 1, task).unwrap();
        let b = replicate(50, 4, task).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_city_reduces_to_unconstrained_scale() {
        let c = cfg(r#"{"experiment":"mstc-scaling","n":[200,400],"layout":{"r":1.0,"s":0.0},"replications":4,"out":"x"}"#);
        let out = run_mstc_scaling(&c, RunOptions::default()).unwrap();
        let b_n = out.aggregate.floats("b_n").unwrap();
        assert_eq!(b_n, vec![200f64.sqrt(), 20.0]);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn moments_need_cities() {
        let c = cfg(r#"{"experiment":"city-moments","n":100,"layout":"unconstrained","replications":3,"out":"x"}"#);
        assert!(matches!(
            run_city_moment_lemmas(&c, RunOptions::default()),
            Err(ExperimentError::Precondition { .. })
        ));
    }

    #[test]
    fn pairs_are_distinct() {
        let p = correlation_pairs(1, 16, 100);
        assert_eq!(p.len(), 100);
        for (i, a) in p.iter().enumerate() {
            assert!(a.0 < a.1);
            assert!(!p[i + 1..].contains(a));
        }
        assert_eq!(correlation_pairs(1, 4, 100).len(), 6);
    }

    #[test]
    fn small_runs() {
        let c = cfg(r#"{"experiment":"city-moments","n":[300,600],"layout":{"r":0.2,"s":0.2},"replications":6,"out":"x"}"#);
        let out = run_city_moment_lemmas(&c, RunOptions::default()).unwrap();
        assert_eq!(out.aggregate.rows.len(), 2);
        assert_eq!(out.extra[0].1.rows.len(), 2 * 9);

        let c = cfg(r#"{"experiment":"unconstrained","n":[100,400],"layout":"unconstrained","replications":5,"out":"x"}"#);
        let out = run_unconstrained(&c, RunOptions::default()).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.raw.rows.len(), 10);

        let c = cfg(r#"{"experiment":"one-point-diff","n":[500],"layout":"unconstrained","replications":5,"out":"x"}"#);
        let out = run_one_point_diff(&c, RunOptions::default()).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.aggregate.rows.len(), 1);
    }
}
