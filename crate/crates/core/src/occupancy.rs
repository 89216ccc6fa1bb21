//! Fine-grid occupancy events for the one-point experiments, edge locality,
//! and the Poisson pmf at its mean.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::geom::Point2;
use crate::math;
use crate::mst::WeightedTree;
use crate::sampling::DensitySpec;

/// Neighbourhood radius, in grid squares, of the edge-locality property.
pub const LOCALITY_RADIUS: usize = 20;

/// A `K × K` grid of squares of side `1/K` over the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FineGrid {
    pub cells_per_side: usize,
    pub side: f64,
}

impl FineGrid {
    /// Grid for `n` nodes and occupancy constant `m`: the largest `K` with
    /// `(1/K)² >= 2 m ln n / n`, so every square expects at least
    /// `2 m ln n` nodes under the uniform density.
    pub fn for_nodes(n: u64, m: f64) -> Self {
        let r_min = math::sqrt(2.0 * m * math::ln(n as f64) / n as f64);
        let k = if r_min > 0.0 { math::floor(1.0 / r_min) } else { 1.0 };
        let cells_per_side = (k as usize).max(1);
        Self {
            cells_per_side,
            side: 1.0 / cells_per_side as f64,
        }
    }

    #[inline]
    pub fn cell(&self, p: Point2) -> (usize, usize) {
        let k = self.cells_per_side;
        let c = |v: f64| (math::floor(v * k as f64).max(0.0) as usize).min(k - 1);
        (c(p.x), c(p.y))
    }

    pub fn counts(&self, points: &[Point2]) -> Vec<usize> {
        let k = self.cells_per_side;
        let mut counts = vec![0; k * k];
        for &p in points {
            let (i, j) = self.cell(p);
            counts[i * k + j] += 1;
        }
        counts
    }
}

/// Outcome of [`detect_ztot`].
#[derive(Clone, Debug, PartialEq)]
pub struct ZtotReport {
    pub grid: FineGrid,
    /// Node count of every grid square, `counts[i * K + j]`.
    pub counts: Vec<usize>,
    /// `ε1 · M · ln n`.
    pub lower: f64,
    /// `4 · ε2 · M · ln n`.
    pub upper: f64,
    /// Every square's count over the full point set lies in `[lower, upper]`.
    pub holds_full: bool,
    /// Every leave-one-out point set satisfies the band, i.e.
    /// `lower + 1 <= count <= upper` for every square.
    pub holds: bool,
    /// `r_n² <= 3 M ln n / n`.
    pub within_scale_window: bool,
}

impl ZtotReport {
    pub fn r_n(&self) -> f64 {
        self.grid.side
    }
}

/// Fine-grid occupancy detector for `points` (the `n + 1` nodes of a
/// one-point experiment, or any set), with band constant `m`.
pub fn detect_ztot(points: &[Point2], n: u64, m: f64, f: &DensitySpec) -> ZtotReport {
    let grid = FineGrid::for_nodes(n, m);
    let counts = grid.counts(points);
    let log_n = math::ln(n as f64);
    let lower = f.eps1() * m * log_n;
    let upper = 4.0 * f.eps2() * m * log_n;
    let holds_full = counts.iter().all(|&c| lower <= c as f64 && c as f64 <= upper);
    let holds = counts.iter().all(|&c| lower + 1.0 <= c as f64 && c as f64 <= upper);
    let within_scale_window = grid.side * grid.side <= 3.0 * m * log_n / n as f64;
    ZtotReport {
        grid,
        counts,
        lower,
        upper,
        holds_full,
        holds,
        within_scale_window,
    }
}

/// The leave-one-out intersection evaluated literally, one removal at a
/// time. Quadratic; intended for small inputs and for checking
/// [`ZtotReport::holds`].
pub fn ztot_leave_one_out(points: &[Point2], n: u64, m: f64, f: &DensitySpec) -> bool {
    let report = detect_ztot(points, n, m, f);
    let k = report.grid.cells_per_side;
    let in_band = |c: usize| report.lower <= c as f64 && c as f64 <= report.upper;
    points.iter().all(|&p| {
        let (i, j) = report.grid.cell(p);
        let removed = i * k + j;
        report
            .counts
            .iter()
            .enumerate()
            .all(|(cell, &c)| in_band(if cell == removed { c - 1 } else { c }))
    })
}

/// Tree edges that leave the `LOCALITY_RADIUS` neighbourhood of their
/// endpoint's square or exceed `LOCALITY_RADIUS · r_n · √2`.
pub fn edge_locality_violations(tree: &WeightedTree, points: &[Point2], grid: &FineGrid) -> usize {
    let max_len = LOCALITY_RADIUS as f64 * grid.side * SQRT_2;
    tree.edges
        .iter()
        .filter(|e| {
            let (a, b) = (grid.cell(points[e.i as usize]), grid.cell(points[e.j as usize]));
            a.0.abs_diff(b.0) > LOCALITY_RADIUS || a.1.abs_diff(b.1) > LOCALITY_RADIUS || e.len > max_len
        })
        .count()
}

/// `e^{-n} n^n / n!`, evaluated in log space.
pub fn poisson_pmf_at_mean(n: u64) -> f64 {
    let x = n as f64;
    math::exp(x * math::ln(x) - x - math::lgamma(x + 1.0))
}
