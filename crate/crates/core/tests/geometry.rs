use citymst_core::geom::Lattice;
use citymst_core::{b_scale, build_tiling, validate_well_connected, CityLayout, GeomError, Point2, StreamSeed};

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Union-find over selected cells, joining every selected pair at Manhattan distance 1.
fn connected_oracle(cells: &[Lattice]) -> bool {
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            let d = cells[a].0.abs_diff(cells[b].0) + cells[a].1.abs_diff(cells[b].1);
            if d == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let root = find(&mut parent, 0);
    (0..cells.len()).all(|v| find(&mut parent, v) == root)
}

fn subset(mask: u64, side: u32) -> Vec<Lattice> {
    (0..side * side)
        .filter(|&c| mask >> c & 1 == 1)
        .map(|c| (c / side, c % side))
        .collect()
}

#[test]
fn well_connected_exhaustive_four_by_four() {
    let mut connected = 0;
    for mask in 1u64..(1 << 16) {
        let cells = subset(mask, 4);
        let fast = validate_well_connected(&cells, 3).unwrap();
        assert_eq!(fast, connected_oracle(&cells), "{cells:?}");
        connected += fast as u32;
    }
    assert!(connected > 16);
}

#[test]
fn well_connected_random_six_by_six() {
    let mut rng = StreamSeed::new(31, 0).rng();
    for _ in 0..5000 {
        let mask = rng.next_u64_word() & ((1 << 36) - 1);
        if mask == 0 {
            continue;
        }
        let mut cells = subset(mask, 6);
        // shuffle so the search does not always start at the first lattice cell
        for i in (1..cells.len()).rev() {
            cells.swap(i, rng.below(i as u64 + 1) as usize);
        }
        assert_eq!(validate_well_connected(&cells, 5).unwrap(), connected_oracle(&cells));
    }
}

#[test]
fn selection_errors() {
    assert!(matches!(validate_well_connected(&[], 3), Err(GeomError::EmptySelection)));
    assert!(matches!(validate_well_connected(&[(4, 0)], 3), Err(GeomError::OutOfGrid { .. })));
    assert!(matches!(validate_well_connected(&[(1, 1), (1, 1)], 3), Err(GeomError::DuplicateCity(1, 1))));
    assert!(matches!(
        CityLayout::new(0.1, 0.2, vec![(0, 0), (2, 0)]),
        Err(GeomError::NotWellConnected)
    ));
}

#[test]
fn tiling_shapes() {
    for (r, s, k) in [(0.1, 0.2, 3), (0.01, 0.056, 15), (0.2, 0.2, 2), (1.0, 0.0, 0)] {
        let t = build_tiling(r, s).unwrap();
        assert_eq!(t.k_grid, k, "r {r} s {s}");
        assert_eq!(t.squares.len(), ((k + 1) * (k + 1)) as usize);
        for sq in &t.squares {
            assert!(sq.origin.x >= 0.0 && sq.origin.y >= 0.0);
            assert!(sq.origin.x + sq.side <= 1.0 + 1e-12 && sq.origin.y + sq.side <= 1.0 + 1e-12);
        }
    }
    assert!(matches!(build_tiling(0.1, 0.1), Err(GeomError::NonIntegerGrid { .. })));
    assert!(matches!(build_tiling(0.0, 0.1), Err(GeomError::InvalidParameters { .. })));
    assert!(matches!(build_tiling(0.1, -0.1), Err(GeomError::InvalidParameters { .. })));
}

#[test]
fn city_of_partitions_the_cities() {
    let layout = CityLayout::new(0.1, 0.2, vec![(0, 0), (0, 1), (1, 1), (2, 1), (2, 2)]).unwrap();
    let mut rng = StreamSeed::new(32, 0).rng();
    for _ in 0..50_000 {
        let p = Point2::new(rng.next_f64(), rng.next_f64());
        let inside: Vec<usize> = (0..layout.city_count()).filter(|&l| layout.squares[l].contains(p)).collect();
        assert!(inside.len() <= 1);
        assert_eq!(layout.city_of(p), inside.first().copied(), "{p:?}");
    }
    for (l, sq) in layout.squares.iter().enumerate() {
        assert_eq!(layout.city_of(sq.origin), Some(l));
        assert_eq!(layout.city_of(Point2::new(sq.origin.x + sq.side, sq.origin.y)), None);
    }
}

#[test]
fn b_scale_examples() {
    assert!((b_scale(1.0, 10_000, 1) - 100.0).abs() < 1e-9);
    assert!((b_scale(0.1, 1600, 16) - 16.0).abs() < 1e-12);
}
