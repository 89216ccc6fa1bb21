//! Exact Euclidean minimum spanning trees and tree queries.
//!
//! Ties between equal-length edges are broken by the smallest `(len, i, j)`
//! with `i < j`. Under that strict order the MST is unique, so every route
//! below (dense Prim, kd-tree Borůvka) returns the same edge set.

mod brute;
mod kdtree;
mod prim;
mod tree;
mod union_find;

use alloc::vec::Vec;

use thiserror::Error;

use crate::geom::Point2;

pub use brute::{brute_force_mst, BRUTE_FORCE_MAX};
pub use tree::{Edge, WeightedTree};
pub use union_find::UnionFind;

/// Inputs up to this size use dense Prim; larger ones use kd-tree Borůvka.
pub const DENSE_CUTOFF: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MstError {
    #[error("empty point set")]
    Empty,
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("node index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("brute force supports at most {max} points, got {0}", max = BRUTE_FORCE_MAX)]
    TooLarge(usize),
    #[error("need at least 2 points, got {0}")]
    TooFew(usize),
    #[error("not a spanning tree: {0}")]
    NotATree(&'static str),
}

fn check_points(points: &[Point2]) -> Result<(), MstError> {
    if points.is_empty() {
        return Err(MstError::Empty);
    }
    if let Some(i) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(MstError::NonFinite(i));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(MstError::DuplicatePoint(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

fn finish(n: usize, mut edges: Vec<Edge>) -> WeightedTree {
    edges.sort_by(Edge::key_cmp);
    WeightedTree::from_edges(n, edges).expect("MST routines return spanning trees")
}

/// The minimum spanning tree of the complete Euclidean graph on `points`.
pub fn exact_mst(points: &[Point2]) -> Result<WeightedTree, MstError> {
    check_points(points)?;
    let n = points.len();
    if n == 1 {
        return Ok(WeightedTree::singleton());
    }
    let edges = if n <= DENSE_CUTOFF {
        prim::dense_prim_edges(points)
    } else {
        kdtree::KdTree::build(points).boruvka()
    };
    Ok(finish(n, edges))
}

/// Dense O(n²) Prim. Kept as an independent route for cross-checking
/// [`exact_mst`] on moderate inputs.
pub fn dense_prim_mst(points: &[Point2]) -> Result<WeightedTree, MstError> {
    check_points(points)?;
    Ok(finish(points.len(), prim::dense_prim_edges(points)))
}

/// kd-tree Borůvka regardless of input size.
pub fn boruvka_mst(points: &[Point2]) -> Result<WeightedTree, MstError> {
    check_points(points)?;
    if points.len() == 1 {
        return Ok(WeightedTree::singleton());
    }
    Ok(finish(points.len(), kdtree::KdTree::build(points).boruvka()))
}

/// MST length of `points`, zero for fewer than two points.
pub fn mst_length(points: &[Point2]) -> Result<f64, MstError> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    exact_mst(points).map(|t| t.total_len)
}

/// Distance from point `i` to its nearest other point.
pub fn nn_distance(points: &[Point2], i: usize) -> Result<f64, MstError> {
    if points.len() < 2 {
        return Err(MstError::TooFew(points.len()));
    }
    if i >= points.len() {
        return Err(MstError::IndexOutOfRange(i));
    }
    let p = points[i];
    Ok(points
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, q)| p.dist(*q))
        .fold(f64::INFINITY, f64::min))
}

/// Nearest-neighbour distance of every point, via the kd-tree.
pub fn nn_distances(points: &[Point2]) -> Result<Vec<f64>, MstError> {
    if points.len() < 2 {
        return Err(MstError::TooFew(points.len()));
    }
    let tree = kdtree::KdTree::build(points);
    let mut out = alloc::vec![0.0; points.len()];
    let mut stack = Vec::new();
    for k in 0..points.len() {
        out[tree.original_index(k)] = tree.nearest_other(k, &mut stack).len;
    }
    Ok(out)
}

/// For every query location, the index of and distance to the nearest of `points`.
pub fn nearest_in(points: &[Point2], queries: &[Point2]) -> Vec<(usize, f64)> {
    if points.is_empty() {
        return alloc::vec![(usize::MAX, f64::INFINITY); queries.len()];
    }
    let tree = kdtree::KdTree::build(points);
    let mut stack = Vec::new();
    queries.iter().map(|&q| tree.nearest_to(q, &mut stack)).collect()
}

/// Mean nearest-neighbour distance of a point set.
pub fn mean_nn_distance(points: &[Point2]) -> Result<f64, MstError> {
    let d = nn_distances(points)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;
    use alloc::vec;

    fn random_points(n: usize, seed: u64) -> Vec<Point2> {
        let mut rng = StreamSeed::new(seed, 0).rng();
        (0..n).map(|_| Point2::new(rng.next_f64(), rng.next_f64())).collect()
    }

    #[test]
    fn two_and_three_point_examples() {
        let t = exact_mst(&[Point2::new(0.0, 0.0), Point2::new(0.3, 0.4)]).unwrap();
        assert_eq!(t.edges.len(), 1);
        assert!((t.total_len - 0.5).abs() < 1e-15);

        let t = exact_mst(&[Point2::new(0.0, 0.0), Point2::new(0.3, 0.0), Point2::new(1.0, 0.0)]).unwrap();
        let pairs: Vec<(u32, u32)> = t.edges.iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert!((t.total_len - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        let t = exact_mst(&[Point2::new(0.2, 0.2)]).unwrap();
        assert!(t.edges.is_empty());
        assert_eq!(t.total_len, 0.0);
        assert_eq!(exact_mst(&[]), Err(MstError::Empty));
        assert_eq!(
            exact_mst(&[Point2::new(0.1, 0.1), Point2::new(0.5, 0.5), Point2::new(0.1, 0.1)]),
            Err(MstError::DuplicatePoint(0, 2))
        );
        assert_eq!(exact_mst(&[Point2::new(f64::NAN, 0.0)]), Err(MstError::NonFinite(0)));
    }

    #[test]
    fn routes_agree_edge_for_edge() {
        for (n, seed) in [(65, 1), (200, 2), (1000, 3), (1500, 4)] {
            let pts = random_points(n, seed);
            let a = dense_prim_mst(&pts).unwrap();
            let b = boruvka_mst(&pts).unwrap();
            assert_eq!(a.edges, b.edges, "n = {n}");
        }
    }

    #[test]
    fn lattice_ties_are_resolved_identically() {
        // many equal-length edges
        let pts: Vec<Point2> = (0..15)
            .flat_map(|i| (0..15).map(move |j| Point2::new(i as f64 * 0.05, j as f64 * 0.05)))
            .collect();
        let a = dense_prim_mst(&pts).unwrap();
        let b = boruvka_mst(&pts).unwrap();
        assert_eq!(a.edges, b.edges);
        assert!((a.total_len - 224.0 * 0.05).abs() < 1e-9);
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<Point2> = (0..300).map(|i| Point2::new(((i * 137) % 300) as f64 / 300.0, 0.5)).collect();
        let t = exact_mst(&pts).unwrap();
        let mut xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        let span = xs[xs.len() - 1] - xs[0];
        assert!((t.total_len - span).abs() < 1e-9);
    }

    #[test]
    fn nn_examples() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(0.3, 0.4)];
        assert!((nn_distance(&pts, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((nn_distance(&pts, 1).unwrap() - 0.5).abs() < 1e-15);
        let grid: Vec<Point2> = (0..3)
            .flat_map(|i| (0..3).map(move |j| Point2::new(i as f64 * 0.5, j as f64 * 0.5)))
            .collect();
        for i in 0..9 {
            assert!((nn_distance(&grid, i).unwrap() - 0.5).abs() < 1e-15);
        }
        assert_eq!(nn_distance(&pts[..1], 0), Err(MstError::TooFew(1)));
        assert_eq!(nn_distance(&pts, 5), Err(MstError::IndexOutOfRange(5)));
    }

    #[test]
    fn kd_nearest_matches_brute_force() {
        let pts = random_points(700, 9);
        let fast = nn_distances(&pts).unwrap();
        for i in (0..700).step_by(7) {
            assert_eq!(fast[i], nn_distance(&pts, i).unwrap());
        }
    }
}
