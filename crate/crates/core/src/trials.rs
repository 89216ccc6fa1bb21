//! Single-replication kernels shared by every experiment.
//!
//! Each kernel takes the replication's [`StreamSeed`] and draws from fixed
//! lanes of it, so a replication's result depends only on the master seed
//! and the replication index.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use thiserror::Error;

use crate::bounds::{self, BoundError, UpperBoundReport};
use crate::geom::{b_scale, CityLayout, Point2};
use crate::math;
use crate::mst::{self, MstError};
use crate::occupancy::{detect_ztot, edge_locality_violations};
use crate::rng::StreamSeed;
use crate::sampling::{self, city_counts, occupancy_event_u, DensitySpec, SamplingError};

/// Lane for binomial point locations.
pub const LANE_BINOMIAL: u8 = 0;
/// Lane for the matched Poisson batch.
pub const LANE_POISSON: u8 = 1;
/// Lane for the removed-index pick of the one-point experiment.
pub const LANE_INDEX: u8 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrialError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Mst(#[from] MstError),
}

/// One city-constrained replication.
#[derive(Clone, Debug, PartialEq)]
pub struct CityTrial {
    pub n: u64,
    pub mstc: f64,
    pub b_n: f64,
    pub upper: UpperBoundReport,
    /// `None` when `s <= r√2`.
    pub lower: Option<f64>,
    pub all_occupied: bool,
    pub u_tot: bool,
}

impl CityTrial {
    pub fn normalized(&self) -> f64 {
        self.mstc / self.b_n
    }

    /// `lower <= MSTC <= upper <= lower + (N-1)(s+8r) + correction`, checked
    /// only when the lower bound applies and every city is occupied.
    pub fn sandwich_holds(&self, layout: &CityLayout) -> Option<bool> {
        let lower = self.lower?;
        if !self.all_occupied {
            return None;
        }
        let slack = (layout.city_count() as f64 - 1.0) * (layout.s + 8.0 * layout.r);
        let tol = 1e-9 * (1.0 + self.upper.tree_len);
        Some(
            lower <= self.mstc + tol
                && self.mstc <= self.upper.tree_len + tol
                && self.upper.tree_len <= lower + slack + self.upper.small_city_correction + tol,
        )
    }
}

pub fn city_trial(n: usize, layout: &CityLayout, f: &DensitySpec, seed: StreamSeed) -> Result<CityTrial, TrialError> {
    let batch = sampling::sample_binomial_cities(n, layout, f, seed.lane(LANE_BINOMIAL))?;
    let counts = city_counts(&batch.points, layout)?;
    let (_, u_tot) = occupancy_event_u(&counts, n as u64, f);
    let mstc = mst::exact_mst(&batch.points)?.total_len;
    let (_, upper) = bounds::city_upper_tree(&batch.points, layout)?;
    let lower = match bounds::city_lower_bound(&batch.points, layout) {
        Ok(v) => Some(v),
        Err(BoundError::HypothesisViolated { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(CityTrial {
        n: n as u64,
        mstc,
        b_n: b_scale(layout.r, n as u64, layout.city_count() as u64),
        upper,
        lower,
        all_occupied: counts.iter().all(|&c| c > 0),
        u_tot,
    })
}

/// Per-city `R_l` under the binomial process and under a Poisson process
/// of mean `n`, drawn from independent lanes of the same replication.
#[derive(Clone, Debug, PartialEq)]
pub struct CityMomentTrial {
    pub binomial: Vec<f64>,
    pub poisson: Vec<f64>,
    pub poisson_total: usize,
}

pub fn city_moment_trial(
    n: usize,
    layout: &CityLayout,
    f: &DensitySpec,
    seed: StreamSeed,
) -> Result<CityMomentTrial, TrialError> {
    let b = sampling::sample_binomial_cities(n, layout, f, seed.lane(LANE_BINOMIAL))?;
    let p = sampling::sample_poisson_cities(n as f64, layout, f, seed.lane(LANE_POISSON))?;
    Ok(CityMomentTrial {
        binomial: bounds::city_mst_lengths(&b.points, layout)?,
        poisson: bounds::city_mst_lengths(&p.points, layout)?,
        poisson_total: p.len(),
    })
}

/// One unconstrained replication: MST length and the strips path length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnconstrainedTrial {
    pub n: u64,
    pub mst: f64,
    pub strips: f64,
}

impl UnconstrainedTrial {
    /// `3√n`.
    pub fn bound(&self) -> f64 {
        bounds::strips_bound(self.n as usize, 1.0)
    }

    pub fn within_bound(&self) -> bool {
        self.mst <= self.bound() && self.strips <= self.bound()
    }
}

pub fn unconstrained_trial(n: usize, f: &DensitySpec, seed: StreamSeed) -> Result<UnconstrainedTrial, TrialError> {
    let batch = sampling::sample_unit_square(n, f, seed.lane(LANE_BINOMIAL))?;
    let mst = mst::exact_mst(&batch.points)?.total_len;
    let strips = bounds::strips_path(&batch.points, crate::geom::AxisSquare::UNIT, None)?.path_len;
    Ok(UnconstrainedTrial {
        n: n as u64,
        mst,
        strips,
    })
}

/// One add/remove replication on `n + 1` unconstrained points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnePointTrial {
    pub n: u64,
    /// Removed index in `0..=n`; `n` is the last point drawn.
    pub j: usize,
    pub mst_n1: f64,
    /// MST with point `j` removed.
    pub mst_nj: f64,
    /// MST with the last point removed.
    pub mst_n: f64,
    pub r_n: f64,
    pub ztot: bool,
    pub ztot_full: bool,
    /// MST edges of the `n + 1` tree breaking the 20-square locality.
    pub locality_violations: usize,
}

impl OnePointTrial {
    /// `MST_{n+1} - MST_n(j)`.
    pub fn add_diff(&self) -> f64 {
        self.mst_n1 - self.mst_nj
    }

    pub fn add_bound(&self) -> f64 {
        self.r_n * SQRT_2
    }

    /// `r_n log n`.
    pub fn removal_scale(&self) -> f64 {
        self.r_n * math::ln(self.n as f64)
    }
}

pub fn one_point_trial(n: usize, m: f64, f: &DensitySpec, seed: StreamSeed) -> Result<OnePointTrial, TrialError> {
    let batch = sampling::sample_unit_square(n + 1, f, seed.lane(LANE_BINOMIAL))?;
    let pts = &batch.points;
    let j = seed.lane(LANE_INDEX).rng().below(n as u64 + 1) as usize;
    let tree = mst::exact_mst(pts)?;
    let without = |skip: usize| -> Result<f64, MstError> {
        let rest: Vec<Point2> = pts
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &p)| p)
            .collect();
        mst::mst_length(&rest)
    };
    let mst_n = without(n)?;
    let mst_nj = if j == n { mst_n } else { without(j)? };
    let z = detect_ztot(pts, n as u64, m, f);
    Ok(OnePointTrial {
        n: n as u64,
        j,
        mst_n1: tree.total_len,
        mst_nj,
        mst_n,
        r_n: z.r_n(),
        ztot: z.holds,
        ztot_full: z.holds_full,
        locality_violations: edge_locality_violations(&tree, pts, &z.grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn city_trial_is_reproducible_and_sandwiched() {
        let layout = CityLayout::all(0.1, 0.2).unwrap();
        let seed = StreamSeed::replication(9, 3);
        let a = city_trial(400, &layout, &DensitySpec::Uniform, seed).unwrap();
        let b = city_trial(400, &layout, &DensitySpec::Uniform, seed).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sandwich_holds(&layout), Some(true));
        assert!((a.b_n - 0.1 * (400.0f64 * 16.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gate_disables_lower_bound() {
        let layout = CityLayout::all(0.2, 0.2).unwrap();
        let t = city_trial(200, &layout, &DensitySpec::Uniform, StreamSeed::replication(1, 0)).unwrap();
        assert_eq!(t.lower, None);
        assert_eq!(t.sandwich_holds(&layout), None);
    }

    #[test]
    fn one_point_consistency() {
        for rep in 0..20 {
            let t = one_point_trial(300, 1.0, &DensitySpec::Uniform, StreamSeed::replication(5, rep)).unwrap();
            assert!(t.j <= 300);
            if t.j == 300 {
                assert_eq!(t.mst_nj, t.mst_n);
            }
            // Adding a point never costs more than joining it to its nearest neighbour.
            assert!(t.mst_n1 - t.mst_n <= SQRT_2);
        }
    }

    #[test]
    fn moment_trial_lengths() {
        let layout = CityLayout::all(0.1, 0.2).unwrap();
        let t = city_moment_trial(500, &layout, &DensitySpec::Uniform, StreamSeed::replication(2, 7)).unwrap();
        assert_eq!(t.binomial.len(), 16);
        assert_eq!(t.poisson.len(), 16);
        assert!(t.binomial.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn unconstrained_small() {
        let t = unconstrained_trial(100, &DensitySpec::Uniform, StreamSeed::replication(0, 0)).unwrap();
        assert!(t.within_bound());
        assert!(t.mst <= t.strips);
    }
}
