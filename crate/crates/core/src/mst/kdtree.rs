//! A static 2-d tree over a point set, used for Borůvka rounds and
//! nearest-neighbour queries.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::tree::Edge;
use super::union_find::UnionFind;
use crate::geom::Point2;
use crate::math;

const LEAF_SIZE: usize = 12;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    lo: Point2,
    hi: Point2,
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == NONE
    }

    /// Lower bound on the distance from `p` to anything in the box.
    #[inline]
    fn min_dist(&self, p: Point2) -> f64 {
        let dx = (self.lo.x - p.x).max(p.x - self.hi.x).max(0.0);
        let dy = (self.lo.y - p.y).max(p.y - self.hi.y).max(0.0);
        math::sqrt(dx * dx + dy * dy)
    }
}

pub(crate) struct KdTree {
    nodes: Vec<Node>,
    /// `order[k]` is the original index of the k-th stored point.
    order: Vec<u32>,
    /// Points in storage order.
    pts: Vec<Point2>,
}

impl KdTree {
    pub(crate) fn build(points: &[Point2]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        build_node(points, &mut order, 0, &mut nodes);
        let pts = order.iter().map(|&i| points[i as usize]).collect();
        Self { nodes, order, pts }
    }

    pub(crate) fn original_index(&self, k: usize) -> usize {
        self.order[k] as usize
    }

    /// Nearest stored point to an arbitrary location; returns `(original index, distance)`.
    pub(crate) fn nearest_to(&self, p: Point2, stack: &mut Vec<u32>) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        stack.clear();
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.min_dist(p) > best.1 {
                continue;
            }
            if node.is_leaf() {
                for q in node.start as usize..node.end as usize {
                    let d = p.dist(self.pts[q]);
                    let i = self.order[q] as usize;
                    if d < best.1 || (d == best.1 && i < best.0) {
                        best = (i, d);
                    }
                }
            } else {
                self.push_children(node, p, stack);
            }
        }
        best
    }

    /// Nearest stored point to stored point `k`, excluding itself.
    pub(crate) fn nearest_other(&self, k: usize, stack: &mut Vec<u32>) -> Edge {
        let p = self.pts[k];
        let me = self.order[k] as usize;
        let mut best = Edge { i: u32::MAX, j: u32::MAX, len: f64::INFINITY };
        stack.clear();
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.min_dist(p) > best.len {
                continue;
            }
            if node.is_leaf() {
                for q in node.start as usize..node.end as usize {
                    if q == k {
                        continue;
                    }
                    let cand = Edge::new(me, self.order[q] as usize, p.dist(self.pts[q]));
                    if cand.key_cmp(&best) == Ordering::Less {
                        best = cand;
                    }
                }
            } else {
                self.push_children(node, p, stack);
            }
        }
        best
    }

    #[inline]
    fn push_children(&self, node: &Node, p: Point2, stack: &mut Vec<u32>) {
        let l = &self.nodes[node.left as usize];
        let r = &self.nodes[node.right as usize];
        // nearer child last so it is popped first
        if l.min_dist(p) <= r.min_dist(p) {
            stack.push(node.right);
            stack.push(node.left);
        } else {
            stack.push(node.left);
            stack.push(node.right);
        }
    }

    /// Borůvka over the complete Euclidean graph. Every round each component
    /// finds its cheapest outgoing edge under the `(len, i, j)` order; subtrees
    /// lying entirely inside the querying component are pruned.
    pub(crate) fn boruvka(&self) -> Vec<Edge> {
        let n = self.pts.len();
        let mut uf = UnionFind::new(n);
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        let mut comp = alloc::vec![0u32; n];
        let mut node_comp = alloc::vec![NONE; self.nodes.len()];
        let mut best = alloc::vec![Edge { i: u32::MAX, j: u32::MAX, len: f64::INFINITY }; n];
        let mut stack = Vec::with_capacity(64);
        while uf.set_count() > 1 {
            for k in 0..n {
                comp[k] = uf.find(self.order[k] as usize) as u32;
            }
            // children always follow their parent in `nodes`
            for id in (0..self.nodes.len()).rev() {
                let node = self.nodes[id];
                node_comp[id] = if node.is_leaf() {
                    let c = comp[node.start as usize];
                    if comp[node.start as usize..node.end as usize].iter().all(|&x| x == c) {
                        c
                    } else {
                        NONE
                    }
                } else {
                    let (a, b) = (node_comp[node.left as usize], node_comp[node.right as usize]);
                    if a == b {
                        a
                    } else {
                        NONE
                    }
                };
            }
            for b in best.iter_mut() {
                b.len = f64::INFINITY;
                b.i = u32::MAX;
                b.j = u32::MAX;
            }
            for k in 0..n {
                let c = comp[k];
                let found = self.cheapest_outgoing(k, c, &comp, &node_comp, best[c as usize], &mut stack);
                best[c as usize] = found;
            }
            // only component roots carry a finite candidate
            let mut chosen: Vec<Edge> = best.iter().filter(|e| e.len.is_finite()).copied().collect();
            chosen.sort_by(Edge::key_cmp);
            let before = uf.set_count();
            for e in chosen {
                if uf.union(e.i as usize, e.j as usize) {
                    edges.push(e);
                }
            }
            assert!(uf.set_count() < before, "Borůvka round made no progress");
        }
        edges
    }

    fn cheapest_outgoing(
        &self,
        k: usize,
        c: u32,
        comp: &[u32],
        node_comp: &[u32],
        mut best: Edge,
        stack: &mut Vec<u32>,
    ) -> Edge {
        let p = self.pts[k];
        let me = self.order[k] as usize;
        stack.clear();
        stack.push(0);
        while let Some(id) = stack.pop() {
            if node_comp[id as usize] == c {
                continue;
            }
            let node = &self.nodes[id as usize];
            if node.min_dist(p) > best.len {
                continue;
            }
            if node.is_leaf() {
                for q in node.start as usize..node.end as usize {
                    if comp[q] == c {
                        continue;
                    }
                    let len = p.dist(self.pts[q]);
                    if len > best.len {
                        continue;
                    }
                    let cand = Edge::new(me, self.order[q] as usize, len);
                    if cand.key_cmp(&best) == Ordering::Less {
                        best = cand;
                    }
                }
            } else {
                self.push_children(node, p, stack);
            }
        }
        best
    }
}

fn build_node(points: &[Point2], order: &mut [u32], offset: usize, nodes: &mut Vec<Node>) -> u32 {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &i in order.iter() {
        let p = points[i as usize];
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let id = nodes.len() as u32;
    nodes.push(Node {
        lo,
        hi,
        start: offset as u32,
        end: (offset + order.len()) as u32,
        left: NONE,
        right: NONE,
    });
    if order.len() > LEAF_SIZE {
        let mid = order.len() / 2;
        let split_x = hi.x - lo.x >= hi.y - lo.y;
        let key = |i: &u32| {
            let p = points[*i as usize];
            if split_x {
                p.x
            } else {
                p.y
            }
        };
        order.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        let (left_half, right_half) = order.split_at_mut(mid);
        let left = build_node(points, left_half, offset, nodes);
        let right = build_node(points, right_half, offset + mid, nodes);
        nodes[id as usize].left = left;
        nodes[id as usize].right = right;
    }
    id
}
