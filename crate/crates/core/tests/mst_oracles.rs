use std::f64::consts::SQRT_2;

use citymst_core::mst::{self, dense_prim_mst, mean_nn_distance, nn_distances};
use citymst_core::stats::ols_slope;
use citymst_core::{brute_force_mst, exact_mst, nn_distance, Edge, MstError, Point2, StreamSeed, WeightedTree};

fn uniform(n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = StreamSeed::new(seed, 17).rng();
    (0..n).map(|_| Point2::new(rng.next_f64(), rng.next_f64())).collect()
}

/// Kruskal over all pairs with a plain parent-array union-find.
fn kruskal_length(points: &[Point2]) -> f64 {
    let n = points.len();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((points[i].dist(points[j]), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            v = p[v];
        }
        v
    }
    let (mut total, mut used) = (0.0, 0);
    for (d, i, j) in pairs {
        let (a, b) = (root(&mut parent, i), root(&mut parent, j));
        if a != b {
            parent[a] = b;
            total += d;
            used += 1;
            if used == n - 1 {
                break;
            }
        }
    }
    total
}

#[test]
fn matches_prufer_enumeration_on_small_sets() {
    for n in 2..=7usize {
        for seed in 0..60 {
            let pts = uniform(n, 1000 * n as u64 + seed);
            let got = exact_mst(&pts).unwrap().total_len;
            assert!((got - brute_force_mst(&pts).unwrap()).abs() < 1e-9, "n={n} seed={seed}");
        }
    }
}

#[test]
fn matches_all_pairs_kruskal() {
    for (n, seed) in [(65, 1), (100, 2), (500, 3), (2000, 4)] {
        let pts = uniform(n, seed);
        let got = exact_mst(&pts).unwrap().total_len;
        assert!((got - kruskal_length(&pts)).abs() < 1e-9, "n={n}");
    }
}

#[test]
fn dense_prim_is_a_second_oracle_up_to_2000() {
    let pts = uniform(2000, 9);
    let a = exact_mst(&pts).unwrap();
    let b = dense_prim_mst(&pts).unwrap();
    assert_eq!(a.edges, b.edges);
}

#[test]
fn brute_force_examples() {
    let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 0.9)];
    let mut sides = [1.0, (0.25f64 + 0.81).sqrt(), (0.25f64 + 0.81).sqrt()];
    sides.sort_by(f64::total_cmp);
    let want = sides[0] + sides[1];
    assert!((brute_force_mst(&tri).unwrap() - want).abs() < 1e-12);
    let square = [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(1.0, 1.0),
    ];
    assert!((brute_force_mst(&square).unwrap() - 3.0).abs() < 1e-12);
    assert!(matches!(brute_force_mst(&uniform(9, 1)), Err(MstError::TooLarge(..))));
}

#[test]
fn tree_queries() {
    let line = [Point2::new(0.0, 0.0), Point2::new(0.5, 0.0), Point2::new(1.0, 0.0)];
    let t = exact_mst(&line).unwrap();
    assert!((t.incident_length(1).unwrap() - 1.0).abs() < 1e-15);
    assert!((t.incident_length(0).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(t.path(0, 2).unwrap(), vec![0, 1, 2]);
    assert_eq!(t.path(1, 2).unwrap(), vec![1, 2]);
    assert!(matches!(t.incident_length(3), Err(MstError::IndexOutOfRange(..))));
    assert!(t.path(0, 5).is_err());

    let pts = uniform(20, 77);
    let t = exact_mst(&pts).unwrap();
    let is_edge = |a: usize, b: usize| t.edges.iter().any(|e| (e.i as usize, e.j as usize) == (a.min(b), a.max(b)));
    for a in 0..20 {
        for b in 0..20 {
            if a == b {
                continue;
            }
            let p = t.path(a, b).unwrap();
            assert_eq!((p[0], p[p.len() - 1]), (a, b));
            assert!(p.windows(2).all(|w| is_edge(w[0], w[1])));
            let mut sorted = p.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), p.len(), "path revisits a node");
        }
    }
}

#[test]
fn cut_property() {
    for seed in 0..100 {
        let pts = uniform(50, 500 + seed);
        let t = exact_mst(&pts).unwrap();
        let adj = t.adjacency();
        for (k, e) in t.edges.iter().enumerate() {
            // Side of the cut containing e.i once e is removed.
            let mut side = vec![false; 50];
            let mut stack = vec![e.i as usize];
            side[e.i as usize] = true;
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    let removed = (v.min(w), v.max(w)) == (e.i as usize, e.j as usize);
                    if !removed && !side[w] {
                        side[w] = true;
                        stack.push(w);
                    }
                }
            }
            let mut best = f64::INFINITY;
            for a in (0..50).filter(|&a| side[a]) {
                for b in (0..50).filter(|&b| !side[b]) {
                    best = best.min(pts[a].dist(pts[b]));
                }
            }
            let rest: f64 = t.edges.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, e)| e.len).sum();
            assert!((rest + best - t.total_len).abs() < 1e-9, "seed {seed}, edge {k}");
        }
    }
}

#[test]
fn structural_invariants_on_random_sets() {
    for (n, seed) in [(10, 1), (300, 2), (3000, 3)] {
        let pts = uniform(n, seed);
        let t = exact_mst(&pts).unwrap();
        assert_eq!(t.edges.len(), n - 1);
        let handshake: f64 = (0..n).map(|i| t.incident_length(i).unwrap()).sum::<f64>() / 2.0;
        assert!((handshake - t.total_len).abs() <= 1e-12 * t.total_len.max(1.0));
        assert!(t.max_length_error(&pts) <= 1e-12);
        assert!(t.max_degree() <= 6);
        for a in [0.5, 2.0] {
            let scaled: Vec<Point2> = pts.iter().map(|p| p.scaled(a)).collect();
            let s = exact_mst(&scaled).unwrap().total_len;
            assert!((s - a * t.total_len).abs() <= 1e-12 * a * t.total_len, "a={a}");
        }
        assert!(WeightedTree::from_edges(n, t.edges.clone()).is_ok());
    }
}

#[test]
fn adding_a_point_costs_at_most_sqrt2() {
    for seed in 0..50 {
        let pts = uniform(201, 9000 + seed);
        let with = exact_mst(&pts).unwrap().total_len;
        let without = exact_mst(&pts[..200]).unwrap().total_len;
        assert!(with <= without + SQRT_2);
        let nn = nn_distance(&pts, 200).unwrap();
        assert!(with <= without + nn + 1e-12);
    }
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(exact_mst(&[]), Err(MstError::Empty)));
    let dup = [Point2::new(0.2, 0.2), Point2::new(0.5, 0.1), Point2::new(0.2, 0.2)];
    assert!(matches!(exact_mst(&dup), Err(MstError::DuplicatePoint(0, 2))));
    assert!(matches!(exact_mst(&[Point2::new(f64::NAN, 0.0)]), Err(MstError::NonFinite(..))));
    let bad = vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)];
    assert!(WeightedTree::from_edges(3, bad).is_err());
}

#[test]
fn nearest_neighbour_examples() {
    let two = [Point2::new(0.1, 0.1), Point2::new(0.4, 0.5)];
    assert!((nn_distance(&two, 0).unwrap() - 0.5).abs() < 1e-15);
    assert!((nn_distance(&two, 1).unwrap() - 0.5).abs() < 1e-15);
    assert!(matches!(nn_distance(&two[..1], 0), Err(MstError::TooFew(1))));

    let grid: Vec<Point2> = (0..9).map(|k| Point2::new(0.5 * (k / 3) as f64, 0.5 * (k % 3) as f64)).collect();
    assert!(nn_distances(&grid).unwrap().iter().all(|&d| (d - 0.5).abs() < 1e-15));

    let pts = uniform(400, 12);
    let fast = nn_distances(&pts).unwrap();
    for (i, &d) in fast.iter().enumerate() {
        assert_eq!(d, nn_distance(&pts, i).unwrap());
    }
    let (idx, d) = mst::nearest_in(&pts, &[Point2::new(0.5, 0.5)])[0];
    assert_eq!(d, pts[idx].dist(Point2::new(0.5, 0.5)));
}

#[test]
fn nearest_neighbour_distance_scales_as_inverse_root_k() {
    let r = 0.05;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in [50usize, 200, 800] {
        let mut total = 0.0;
        let reps = 40;
        for rep in 0..reps {
            let mut rng = StreamSeed::new(31, (k as u64) << 8 | rep).rng();
            let pts: Vec<Point2> = (0..k).map(|_| Point2::new(0.3 + r * rng.next_f64(), 0.6 + r * rng.next_f64())).collect();
            total += mean_nn_distance(&pts).unwrap();
        }
        xs.push((k as f64).ln());
        ys.push((total / reps as f64).ln());
    }
    let slope = ols_slope(&xs, &ys);
    assert!((-0.6..=-0.4).contains(&slope), "slope {slope}");
}
