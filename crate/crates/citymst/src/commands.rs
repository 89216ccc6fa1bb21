//! Library side of the `generate`, `mst`, `bound` and `report` subcommands.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use citymst_core::bounds::{self, BoundError};
use citymst_core::sampling::{self, SampleBatch, SamplingError};
use citymst_core::trials::{LANE_BINOMIAL, LANE_POISSON};
use citymst_core::{AxisSquare, CityLayout, MomentAccumulator, Point2, WeightedTree};
use thiserror::Error;

use crate::config::{ExperimentConfig, LayoutSpec};
use crate::experiments::trial_seed;
use crate::output::{fmt_f64, Table};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("{0}")]
    Usage(String),
}

/// Draws the batch replication `replication` of a run would use for `n`
/// (the first configured `n` when `None`).
pub fn generate(
    cfg: &ExperimentConfig,
    n: Option<u64>,
    replication: usize,
    poisson: bool,
) -> Result<SampleBatch, CommandError> {
    let (n_index, n) = match n {
        Some(n) => (cfg.n.iter().position(|&m| m == n).unwrap_or(0), n),
        None => (0, cfg.n[0]),
    };
    let seed = trial_seed(cfg.master_seed, n_index, replication);
    let unit = CityLayout::unit();
    let layout = cfg.layout.city_layout().unwrap_or(&unit);
    let batch = if poisson {
        sampling::sample_poisson_cities(n as f64, layout, &cfg.density, seed.lane(LANE_POISSON))?
    } else {
        sampling::sample_binomial_cities(n as usize, layout, &cfg.density, seed.lane(LANE_BINOMIAL))?
    };
    Ok(batch)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builder {
    Strips,
    Grid,
    CityUpper,
    CityLower,
}

impl FromStr for Builder {
    type Err = CommandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strips" => Ok(Builder::Strips),
            "grid" => Ok(Builder::Grid),
            "city-upper" => Ok(Builder::CityUpper),
            "city-lower" => Ok(Builder::CityLower),
            other => Err(CommandError::Usage(format!(
                "unknown builder `{other}` (expected strips, grid, city-upper or city-lower)"
            ))),
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builder::Strips => "strips",
            Builder::Grid => "grid",
            Builder::CityUpper => "city-upper",
            Builder::CityLower => "city-lower",
        })
    }
}

/// Result of one constructive builder.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub builder: Builder,
    /// The constructed tree; `None` for the lower bound.
    pub tree: Option<WeightedTree>,
    /// Certified bound on the MST length (an upper bound except for `city-lower`).
    pub bound: f64,
    /// Length of the constructed tree, or the bound value for `city-lower`.
    pub length: f64,
}

pub fn run_builder(
    points: &[Point2],
    builder: Builder,
    layout: &LayoutSpec,
    grid_k: Option<usize>,
) -> Result<BoundResult, CommandError> {
    let need_layout = || {
        layout
            .city_layout()
            .ok_or_else(|| CommandError::Usage(format!("builder `{builder}` needs a city layout")))
    };
    Ok(match builder {
        Builder::Strips => {
            let plan = bounds::strips_path(points, AxisSquare::UNIT, None)?;
            let tree = plan.to_tree(points);
            BoundResult {
                builder,
                length: tree.total_len,
                bound: bounds::strips_bound(points.len(), 1.0),
                tree: Some(tree),
            }
        }
        Builder::Grid => {
            let k = grid_k.unwrap_or_else(|| ((points.len() as f64).sqrt().sqrt().ceil() as usize).max(1));
            let g = bounds::grid_join(points, k)?;
            BoundResult {
                builder,
                length: g.tree.total_len,
                bound: g.bound(k),
                tree: Some(g.tree),
            }
        }
        Builder::CityUpper => {
            let (tree, report) = bounds::city_upper_tree(points, need_layout()?)?;
            BoundResult {
                builder,
                length: tree.total_len,
                bound: report.bound,
                tree: Some(tree),
            }
        }
        Builder::CityLower => {
            let v = bounds::city_lower_bound(points, need_layout()?)?;
            BoundResult {
                builder,
                tree: None,
                bound: v,
                length: v,
            }
        }
    })
}

pub const REPORT_HEADER: [&str; 8] = ["group", "count", "mean", "variance", "stderr", "std", "min", "max"];

/// Moments of column `value` of a raw table, one row per distinct value of
/// column `group`, in first-appearance order.
pub fn report(table: &Table, group: &str, value: &str) -> Result<Table, CommandError> {
    let col = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| CommandError::Usage(format!("no column `{name}` in {}", table.headers.join(","))))
    };
    let (g, v) = (col(group)?, col(value)?);
    let mut order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<String, MomentAccumulator> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let x: f64 = row[v]
            .parse()
            .map_err(|e| CommandError::Usage(format!("row {i}, column `{value}`: {e}")))?;
        let key = row[g].clone();
        if !acc.contains_key(&key) {
            order.push(key.clone());
        }
        acc.entry(key).or_default().push(x);
    }
    let mut out = Table::new(&REPORT_HEADER);
    for key in order {
        let m = acc[&key].estimate();
        out.push(vec![
            key,
            m.count.to_string(),
            fmt_f64(m.mean),
            fmt_f64(m.variance),
            fmt_f64(m.stderr_mean),
            fmt_f64(m.std_dev()),
            fmt_f64(m.min),
            fmt_f64(m.max),
        ]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use citymst_core::exact_mst;

    #[test]
    fn generate_matches_experiment_stream() {
        let cfg = parse_config_str(r#"{"experiment":"unconstrained","n":[50,80],"layout":"unconstrained","seed":4,"out":"x"}"#)
            .unwrap();
        let a = generate(&cfg, Some(80), 2, false).unwrap();
        let t = citymst_core::trials::unconstrained_trial(80, &cfg.density, trial_seed(4, 1, 2)).unwrap();
        assert_eq!(exact_mst(&a.points).unwrap().total_len, t.mst);
        assert_eq!(generate(&cfg, None, 0, false).unwrap().len(), 50);
    }

    #[test]
    fn builders_dominate_mst() {
        let cfg = parse_config_str(r#"{"experiment":"mstc-scaling","n":300,"layout":{"r":0.1,"s":0.2},"out":"x"}"#).unwrap();
        let pts = generate(&cfg, None, 0, false).unwrap().points;
        let mst = exact_mst(&pts).unwrap().total_len;
        for b in ["strips", "grid", "city-upper"] {
            let r = run_builder(&pts, b.parse().unwrap(), &cfg.layout, None).unwrap();
            assert!(mst <= r.length + 1e-9, "{b}");
            assert!(r.length <= r.bound + 1e-9, "{b}");
        }
        let low = run_builder(&pts, Builder::CityLower, &cfg.layout, None).unwrap();
        assert!(low.bound <= mst);
        assert!(matches!(
            run_builder(&pts, Builder::CityUpper, &LayoutSpec::Unconstrained, None),
            Err(CommandError::Usage(_))
        ));
        assert!("hull".parse::<Builder>().is_err());
    }

    #[test]
    fn report_groups_in_order() {
        let mut t = Table::new(&["n", "rep", "mst"]);
        for (n, x) in [("20", 1.0), ("10", 2.0), ("20", 3.0), ("10", 4.0), ("10", 6.0)] {
            t.push(vec![n.into(), "0".into(), fmt_f64(x)]);
        }
        let r = report(&t, "n", "mst").unwrap();
        assert_eq!(r.rows[0][..3], ["20", "2", "2"]);
        assert_eq!(r.rows[1][..3], ["10", "3", "4"]);
        assert_eq!(r.rows[1][3], "4");
        assert!(report(&t, "n", "missing").is_err());
    }
}
