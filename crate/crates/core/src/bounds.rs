//! Constructive spanning trees that certify upper bounds on the MST length,
//! and the per-city lower bound.
//!
//! Every builder returns a genuine [`WeightedTree`] over its input, so the
//! exact MST is always at most the constructed length.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use thiserror::Error;

use crate::geom::{AxisSquare, CityLayout, Point2};
use crate::math;
use crate::mst::{self, nearest_in, Edge, MstError, WeightedTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("point {0} lies outside the bounding square")]
    OutsideRect(usize),
    #[error("no points to connect")]
    EmptyInput,
    #[error("the second point set is empty")]
    EmptyB,
    #[error("empty batch")]
    EmptyBatch,
    #[error("point {0} lies in no selected city")]
    StrayPoint(usize),
    #[error("strip width must be positive and finite, got {0}")]
    InvalidStripWidth(f64),
    #[error("grid size must be at least 1")]
    InvalidGrid,
    #[error("tree has {tree} nodes but {points} points were given")]
    SizeMismatch { tree: usize, points: usize },
    #[error("lower bound needs s > r√2, got r = {r}, s = {s}")]
    HypothesisViolated { r: f64, s: f64 },
    #[error(transparent)]
    Mst(#[from] MstError),
}

/// A strips-heuristic path through every point of a square.
#[derive(Clone, Debug, PartialEq)]
pub struct StripsPlan {
    pub rect: AxisSquare,
    pub strip_width: f64,
    pub strip_count: usize,
    /// Point indices in path order.
    pub visit_order: Vec<usize>,
    pub path_len: f64,
}

impl StripsPlan {
    /// `b²/c + a·c/√2 + b` for this plan's square, width and node count.
    pub fn guide_bound(&self) -> f64 {
        strips_guide_bound(self.visit_order.len(), self.rect.side, self.strip_width)
    }

    /// The path as a spanning tree of the points it was built from.
    pub fn to_tree(&self, points: &[Point2]) -> WeightedTree {
        let edges = self
            .visit_order
            .windows(2)
            .map(|w| Edge::between(points, w[0], w[1]))
            .collect();
        WeightedTree::from_edges(points.len(), edges).expect("a Hamiltonian path is a spanning tree")
    }
}

pub fn strips_guide_bound(a: usize, b: f64, c: f64) -> f64 {
    b * b / c + a as f64 * c / SQRT_2 + b
}

/// `3 b √a`, the strips bound with the default strip width.
pub fn strips_bound(a: usize, b: f64) -> f64 {
    3.0 * b * math::sqrt(a as f64)
}

/// Strips path through `points` inside `rect`.
///
/// The square is cut into vertical strips of width `c` (default `b/√a`),
/// `ceil(b/c)` of them. Strips are swept left to right; the first strip is
/// walked top-down, the next bottom-up, and so on, so consecutive strips
/// are joined at the same edge of the square.
pub fn strips_path(points: &[Point2], rect: AxisSquare, c: Option<f64>) -> Result<StripsPlan, BoundError> {
    let a = points.len();
    if a == 0 {
        return Err(BoundError::EmptyInput);
    }
    if let Some(i) = points.iter().position(|&p| !rect.contains_closed(p)) {
        return Err(BoundError::OutsideRect(i));
    }
    let b = rect.side;
    let c = c.unwrap_or(b / math::sqrt(a as f64));
    if !(c > 0.0 && c.is_finite()) {
        return Err(BoundError::InvalidStripWidth(c));
    }
    let strip_count = (math::ceil(b / c) as usize).max(1);
    let mut strips: Vec<Vec<usize>> = vec![Vec::new(); strip_count];
    for (i, p) in points.iter().enumerate() {
        let s = (math::floor((p.x - rect.origin.x) / c) as usize).min(strip_count - 1);
        strips[s].push(i);
    }
    let mut visit_order = Vec::with_capacity(a);
    for (s, strip) in strips.iter_mut().enumerate() {
        if s % 2 == 0 {
            strip.sort_by(|&i, &j| points[j].y.total_cmp(&points[i].y).then(i.cmp(&j)));
        } else {
            strip.sort_by(|&i, &j| points[i].y.total_cmp(&points[j].y).then(i.cmp(&j)));
        }
        visit_order.extend_from_slice(strip);
    }
    let path_len = visit_order
        .windows(2)
        .map(|w| points[w[0]].dist(points[w[1]]))
        .sum();
    Ok(StripsPlan {
        rect,
        strip_width: c,
        strip_count,
        visit_order,
        path_len,
    })
}

/// Joins a tree over `points_a` to a strips path over `points_b` with the
/// shortest A–B edge. Nodes of the result are `points_a` followed by
/// `points_b`.
pub fn combine_trees(
    tree_a: &WeightedTree,
    points_a: &[Point2],
    points_b: &[Point2],
) -> Result<(WeightedTree, Vec<Point2>), BoundError> {
    if points_b.is_empty() {
        return Err(BoundError::EmptyB);
    }
    if !points_a.is_empty() && tree_a.node_count != points_a.len() {
        return Err(BoundError::SizeMismatch {
            tree: tree_a.node_count,
            points: points_a.len(),
        });
    }
    let offset = points_a.len();
    let plan = strips_path(points_b, AxisSquare::UNIT, None)?;
    let mut edges = if points_a.is_empty() { Vec::new() } else { tree_a.edges.clone() };
    edges.extend(
        plan.visit_order
            .windows(2)
            .map(|w| Edge::new(offset + w[0], offset + w[1], points_b[w[0]].dist(points_b[w[1]]))),
    );
    if !points_a.is_empty() {
        let near = nearest_in(points_a, points_b);
        let (jb, &(ia, len)) = near
            .iter()
            .enumerate()
            .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1).then(x.0.cmp(&y.0)))
            .expect("B is non-empty");
        edges.push(Edge::new(ia, offset + jb, len));
    }
    let mut all = Vec::with_capacity(offset + points_b.len());
    all.extend_from_slice(points_a);
    all.extend_from_slice(points_b);
    Ok((WeightedTree::from_edges(all.len(), edges)?, all))
}

/// Result of [`grid_join`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridJoin {
    pub tree: WeightedTree,
    /// Sum of the per-cell exact MST lengths.
    pub cell_mst_sum: f64,
    /// Total length of the edges joining cells.
    pub join_len: f64,
    pub join_count: usize,
}

impl GridJoin {
    /// `Σ cell MST + 4k√2`.
    pub fn bound(&self, k: usize) -> f64 {
        self.cell_mst_sum + 4.0 * k as f64 * SQRT_2
    }
}

fn nearest_index(points: &[Point2], members: &[usize], target: Point2) -> usize {
    *members
        .iter()
        .min_by(|&&a, &&b| points[a].dist(target).total_cmp(&points[b].dist(target)).then(a.cmp(&b)))
        .expect("non-empty cell")
}

fn local_mst(points: &[Point2], members: &[usize]) -> Result<(Vec<Edge>, f64), MstError> {
    if members.len() < 2 {
        return Ok((Vec::new(), 0.0));
    }
    let local: Vec<Point2> = members.iter().map(|&i| points[i]).collect();
    let t = mst::exact_mst(&local)?;
    Ok((t.relabeled(members), t.total_len))
}

/// Per-cell exact MSTs on a `k × k` grid, joined column by column in a
/// serpentine order (first column top to bottom, next bottom to top, ...).
/// Empty cells are skipped.
pub fn grid_join(points: &[Point2], k: usize) -> Result<GridJoin, BoundError> {
    if k == 0 {
        return Err(BoundError::InvalidGrid);
    }
    if points.is_empty() {
        return Err(BoundError::EmptyInput);
    }
    if let Some(i) = points.iter().position(|&p| !AxisSquare::UNIT.contains_closed(p)) {
        return Err(BoundError::OutsideRect(i));
    }
    let kf = k as f64;
    let cell_of = |v: f64| (math::floor(v * kf).max(0.0) as usize).min(k - 1);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); k * k];
    for (i, p) in points.iter().enumerate() {
        cells[cell_of(p.x) * k + cell_of(p.y)].push(i);
    }
    let mut edges = Vec::with_capacity(points.len() - 1);
    let mut cell_mst_sum = 0.0;
    for members in &cells {
        let (e, len) = local_mst(points, members)?;
        edges.extend(e);
        cell_mst_sum += len;
    }
    let mut join_len = 0.0;
    let mut join_count = 0;
    let mut prev: Option<usize> = None;
    for cx in 0..k {
        for step in 0..k {
            let cy = if cx % 2 == 0 { k - 1 - step } else { step };
            let cell = cx * k + cy;
            if cells[cell].is_empty() {
                continue;
            }
            if let Some(pc) = prev {
                let center = Point2::new((cx as f64 + 0.5) / kf, (cy as f64 + 0.5) / kf);
                let from = nearest_index(points, &cells[pc], center);
                let to = nearest_index(points, &cells[cell], points[from]);
                let e = Edge::between(points, from, to);
                join_len += e.len;
                join_count += 1;
                edges.push(e);
            }
            prev = Some(cell);
        }
    }
    edges.sort_by(Edge::key_cmp);
    Ok(GridJoin {
        tree: WeightedTree::from_edges(points.len(), edges)?,
        cell_mst_sum,
        join_len,
        join_count,
    })
}

/// Nodes of each selected city, by index into `points`.
pub fn city_members(points: &[Point2], layout: &CityLayout) -> Result<Vec<Vec<usize>>, BoundError> {
    let mut members = vec![Vec::new(); layout.city_count()];
    for (i, &p) in points.iter().enumerate() {
        let l = layout.city_of(p).ok_or(BoundError::StrayPoint(i))?;
        members[l].push(i);
    }
    Ok(members)
}

/// Accounting for [`city_upper_tree`].
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundReport {
    /// Some city was empty and the strips path was used instead.
    pub fallback: bool,
    /// `V_n = Σ R_l` with `R_l = 0` for cities holding at most two nodes.
    pub v_n: f64,
    /// `Σ` of per-city MST lengths with no small-city convention.
    pub city_mst_sum: f64,
    /// Per-city MST length summed over cities with at most two nodes.
    pub small_city_correction: f64,
    pub join_len: f64,
    pub join_count: usize,
    /// `V_n + (N - 1)(s + 8r)`, or `3√n` on fallback.
    pub bound: f64,
    pub tree_len: f64,
}

/// Per-city exact MSTs joined along a BFS spanning tree of the city lattice.
///
/// Each lattice edge becomes one tree edge between the two nodes (one per
/// city) closest to the middle of the gap separating the cities. If some
/// city is empty the strips path over all nodes is returned instead.
pub fn city_upper_tree(points: &[Point2], layout: &CityLayout) -> Result<(WeightedTree, UpperBoundReport), BoundError> {
    if points.is_empty() {
        return Err(BoundError::EmptyBatch);
    }
    let members = city_members(points, layout)?;
    let n = points.len();
    if members.iter().any(Vec::is_empty) {
        let plan = strips_path(points, AxisSquare::UNIT, None)?;
        let tree = plan.to_tree(points);
        let report = UpperBoundReport {
            fallback: true,
            v_n: 0.0,
            city_mst_sum: 0.0,
            small_city_correction: 0.0,
            join_len: 0.0,
            join_count: 0,
            bound: strips_bound(n, 1.0),
            tree_len: tree.total_len,
        };
        return Ok((tree, report));
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut v_n = 0.0;
    let mut city_mst_sum = 0.0;
    let mut small = 0.0;
    for m in &members {
        let (e, len) = local_mst(points, m)?;
        edges.extend(e);
        city_mst_sum += len;
        if m.len() >= 3 {
            v_n += len;
        } else {
            small += len;
        }
    }
    let mut join_len = 0.0;
    let joins = layout.lattice_spanning_tree();
    for &(pa, ch) in &joins {
        let (ca, cb) = (layout.squares[pa].center(), layout.squares[ch].center());
        let mid = Point2::new(0.5 * (ca.x + cb.x), 0.5 * (ca.y + cb.y));
        let from = nearest_index(points, &members[pa], mid);
        let to = nearest_index(points, &members[ch], mid);
        let e = Edge::between(points, from, to);
        join_len += e.len;
        edges.push(e);
    }
    edges.sort_by(Edge::key_cmp);
    let tree = WeightedTree::from_edges(n, edges)?;
    let cities = layout.city_count() as f64;
    let report = UpperBoundReport {
        fallback: false,
        v_n,
        city_mst_sum,
        small_city_correction: small,
        join_len,
        join_count: joins.len(),
        bound: v_n + (cities - 1.0) * (layout.s + 8.0 * layout.r),
        tree_len: tree.total_len,
    };
    Ok((tree, report))
}

/// `V_n = Σ_l R_l`, a lower bound on the MST length when `s > r√2`.
pub fn city_lower_bound(points: &[Point2], layout: &CityLayout) -> Result<f64, BoundError> {
    if !(layout.s > layout.r * SQRT_2) {
        return Err(BoundError::HypothesisViolated {
            r: layout.r,
            s: layout.s,
        });
    }
    Ok(city_mst_lengths(points, layout)?.iter().sum())
}

/// `R_l` for every city: the exact MST length of the city's nodes, or 0
/// when the city holds at most two nodes.
pub fn city_mst_lengths(points: &[Point2], layout: &CityLayout) -> Result<Vec<f64>, BoundError> {
    city_members(points, layout)?
        .iter()
        .map(|m| if m.len() >= 3 { Ok(local_mst(points, m)?.1) } else { Ok(0.0) })
        .collect()
}
