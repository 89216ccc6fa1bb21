use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::union_find::UnionFind;
use super::MstError;
use crate::geom::Point2;

/// An undirected weighted edge with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub len: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, len: f64) -> Self {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Self {
            i: i as u32,
            j: j as u32,
            len,
        }
    }

    pub fn between(points: &[Point2], a: usize, b: usize) -> Self {
        Self::new(a, b, points[a].dist(points[b]))
    }

    /// The tie-breaking order: length, then smaller endpoint, then larger.
    #[inline]
    pub fn key_cmp(&self, other: &Edge) -> Ordering {
        self.len
            .total_cmp(&other.len)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }

    pub fn other(&self, v: usize) -> usize {
        if self.i as usize == v {
            self.j as usize
        } else {
            self.i as usize
        }
    }
}

/// A spanning tree over nodes `0..node_count`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTree {
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub total_len: f64,
}

impl WeightedTree {
    pub fn singleton() -> Self {
        Self {
            node_count: 1,
            edges: Vec::new(),
            total_len: 0.0,
        }
    }

    /// Validates that `edges` form a spanning tree of `node_count` nodes.
    pub fn from_edges(node_count: usize, edges: Vec<Edge>) -> Result<Self, MstError> {
        if node_count == 0 {
            return Err(MstError::Empty);
        }
        if edges.len() != node_count - 1 {
            return Err(MstError::NotATree("edge count is not node_count - 1"));
        }
        let mut uf = UnionFind::new(node_count);
        for e in &edges {
            if e.j as usize >= node_count {
                return Err(MstError::IndexOutOfRange(e.j as usize));
            }
            if e.i == e.j || !(e.len >= 0.0) {
                return Err(MstError::NotATree("self loop or invalid length"));
            }
            if !uf.union(e.i as usize, e.j as usize) {
                return Err(MstError::NotATree("edges contain a cycle"));
            }
        }
        let total_len = edges.iter().map(|e| e.len).sum();
        Ok(Self {
            node_count,
            edges,
            total_len,
        })
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.i as usize].push((e.j as usize, e.len));
            adj[e.j as usize].push((e.i as usize, e.len));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for e in &self.edges {
            deg[e.i as usize] += 1;
            deg[e.j as usize] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Sum of the lengths of edges touching node `i`.
    pub fn incident_length(&self, i: usize) -> Result<f64, MstError> {
        if i >= self.node_count {
            return Err(MstError::IndexOutOfRange(i));
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| e.i as usize == i || e.j as usize == i)
            .map(|e| e.len)
            .sum())
    }

    /// The unique simple path from `a` to `b`, endpoints included.
    pub fn path(&self, a: usize, b: usize) -> Result<Vec<usize>, MstError> {
        self.path_with(&self.adjacency(), a, b)
    }

    /// [`WeightedTree::path`] with a prebuilt adjacency list.
    pub fn path_with(
        &self,
        adj: &[Vec<(usize, f64)>],
        a: usize,
        b: usize,
    ) -> Result<Vec<usize>, MstError> {
        for v in [a, b] {
            if v >= self.node_count {
                return Err(MstError::IndexOutOfRange(v));
            }
        }
        let mut parent = vec![usize::MAX; self.node_count];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &(w, _) in &adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[b] == usize::MAX {
            return Err(MstError::NotATree("nodes are disconnected"));
        }
        let mut path = vec![b];
        let mut v = b;
        while v != a {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        Ok(path)
    }

    /// Largest relative deviation between stored lengths and point distances.
    pub fn max_length_error(&self, points: &[Point2]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let d = points[e.i as usize].dist(points[e.j as usize]);
                (e.len - d).abs() / d.max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// Relabels nodes through `map` (local index -> global index).
    pub fn relabeled(&self, map: &[usize]) -> Vec<Edge> {
        self.edges
            .iter()
            .map(|e| Edge::new(map[e.i as usize], map[e.j as usize], e.len))
            .collect()
    }
}
