use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::tree::Edge;
use crate::geom::Point2;

/// Dense O(n²) Prim over the complete graph, with the `(len, i, j)` tie rule.
pub fn dense_prim_edges(points: &[Point2]) -> Vec<Edge> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best: Vec<Edge> = (0..n).map(|v| Edge::between(points, 0, v)).collect();
    in_tree[0] = true;
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (pick == usize::MAX || best[v].key_cmp(&best[pick]) == Ordering::Less) {
                pick = v;
            }
        }
        in_tree[pick] = true;
        edges.push(best[pick]);
        let p = points[pick];
        for w in 0..n {
            if !in_tree[w] {
                let cand = Edge::new(pick, w, p.dist(points[w]));
                if cand.key_cmp(&best[w]) == Ordering::Less {
                    best[w] = cand;
                }
            }
        }
    }
    edges
}
