use alloc::vec;
use alloc::vec::Vec;

use super::MstError;
use crate::geom::Point2;

/// Largest instance the Prüfer enumeration accepts (8^6 trees).
pub const BRUTE_FORCE_MAX: usize = 8;

fn decode_prufer(seq: &[usize], n: usize, out: &mut Vec<(usize, usize)>) {
    out.clear();
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        out.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let mut rest = (0..n).filter(|&v| degree[v] == 1);
    let (u, v) = (rest.next().unwrap(), rest.next().unwrap());
    out.push((u, v));
}

/// Minimum spanning-tree length by enumerating all `n^(n-2)` labelled trees.
pub fn brute_force_mst(points: &[Point2]) -> Result<f64, MstError> {
    let n = points.len();
    if n < 2 {
        return Err(MstError::TooFew(n));
    }
    if n > BRUTE_FORCE_MAX {
        return Err(MstError::TooLarge(n));
    }
    if n == 2 {
        return Ok(points[0].dist(points[1]));
    }
    let mut dist = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            dist[a * n + b] = points[a].dist(points[b]);
        }
    }
    let len = n - 2;
    let mut seq = vec![0usize; len];
    let mut edges = Vec::with_capacity(n - 1);
    let mut best = f64::INFINITY;
    loop {
        decode_prufer(&seq, n, &mut edges);
        let total: f64 = edges.iter().map(|&(a, b)| dist[a * n + b]).sum();
        best = best.min(total);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == len {
                return Ok(best);
            }
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

/// Number of labelled trees the enumeration visited (Cayley's formula check).
#[cfg(test)]
fn count_distinct_trees(n: usize) -> usize {
    use alloc::collections::BTreeSet;
    let len = n - 2;
    let mut seq = vec![0usize; len];
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    loop {
        decode_prufer(&seq, n, &mut edges);
        let mut key: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        key.sort_unstable();
        seen.insert(key);
        let mut pos = 0;
        loop {
            if pos == len {
                return seen.len();
            }
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_hits_every_labelled_tree() {
        assert_eq!(count_distinct_trees(3), 3);
        assert_eq!(count_distinct_trees(4), 16);
        assert_eq!(count_distinct_trees(5), 125);
    }

    #[test]
    fn brute_force_examples() {
        let two = [Point2::new(0.0, 0.0), Point2::new(0.3, 0.4)];
        assert!((brute_force_mst(&two).unwrap() - 0.5).abs() < 1e-15);

        // three spanning trees; the best drops the longest side
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 0.9)];
        let sides = [1.0, (0.25f64 + 0.81).sqrt(), (0.25f64 + 0.81).sqrt()];
        let trees = [sides[0] + sides[1], sides[0] + sides[2], sides[1] + sides[2]];
        let want = trees.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((brute_force_mst(&tri).unwrap() - want).abs() < 1e-12);

        let corners = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
        ];
        assert!((brute_force_mst(&corners).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_limits() {
        let p = [Point2::new(0.0, 0.0); 9];
        assert_eq!(brute_force_mst(&p), Err(MstError::TooLarge(9)));
        assert_eq!(brute_force_mst(&p[..1]), Err(MstError::TooFew(1)));
    }
}
