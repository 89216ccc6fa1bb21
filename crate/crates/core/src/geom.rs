//! Unit-square geometry, the regular city tiling and well-connectedness.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Relative tolerance for the integrality of `(1 - r) / (r + s)`.
pub const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("(1 - r) / (r + s) = {ratio} is not an integer (r = {r}, s = {s})")]
    NonIntegerGrid { r: f64, s: f64, ratio: f64 },
    #[error("invalid tiling parameters r = {r}, s = {s}")]
    InvalidParameters { r: f64, s: f64 },
    #[error("city ({0}, {1}) selected twice")]
    DuplicateCity(u32, u32),
    #[error("city ({x}, {y}) lies outside the {size}x{size} grid")]
    OutOfGrid { x: u32, y: u32, size: u32 },
    #[error("no city selected")]
    EmptySelection,
    #[error("selected cities are not connected under 4-adjacency")]
    NotWellConnected,
    #[error("point ({x}, {y}) is outside the unit square")]
    OutsideUnitSquare { x: f64, y: f64 },
}

/// A node location. Sampled points live in the unit square; the MST code
/// accepts any finite coordinates so that scaled copies can be measured.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Checked constructor for points of the unit square.
    pub fn in_unit_square(x: f64, y: f64) -> Result<Self, GeomError> {
        if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
            Ok(Self { x, y })
        } else {
            Err(GeomError::OutsideUnitSquare { x, y })
        }
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        math::sqrt(self.dist_sq(other))
    }

    #[inline]
    pub fn dist_sq(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn scaled(self, a: f64) -> Self {
        Self::new(self.x * a, self.y * a)
    }
}

/// Axis-aligned square `[origin, origin + side)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSquare {
    pub origin: Point2,
    pub side: f64,
}

impl AxisSquare {
    pub const UNIT: AxisSquare = AxisSquare {
        origin: Point2::new(0.0, 0.0),
        side: 1.0,
    };

    pub const fn new(origin: Point2, side: f64) -> Self {
        Self { origin, side }
    }

    /// Half-open membership: lower/left edges inclusive, upper/right exclusive.
    #[inline]
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.origin.x
            && p.x < self.origin.x + self.side
            && p.y >= self.origin.y
            && p.y < self.origin.y + self.side
    }

    /// Closed membership, used where boundary points are legitimate input.
    #[inline]
    pub fn contains_closed(&self, p: Point2) -> bool {
        p.x >= self.origin.x
            && p.x <= self.origin.x + self.side
            && p.y >= self.origin.y
            && p.y <= self.origin.y + self.side
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            self.origin.x + 0.5 * self.side,
            self.origin.y + 0.5 * self.side,
        )
    }

    /// Axis-aligned gap to another square (0 if they touch or overlap).
    pub fn gap(&self, other: &AxisSquare) -> f64 {
        let gx = (other.origin.x - (self.origin.x + self.side))
            .max(self.origin.x - (other.origin.x + other.side))
            .max(0.0);
        let gy = (other.origin.y - (self.origin.y + self.side))
            .max(self.origin.y - (other.origin.y + other.side))
            .max(0.0);
        gx.max(gy)
    }
}

/// Lattice coordinate of a city in the tiling.
pub type Lattice = (u32, u32);

/// The full regular tiling before any selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Tiling {
    pub r: f64,
    pub s: f64,
    /// Largest lattice index; the grid is `(k_grid + 1)²` squares.
    pub k_grid: u32,
    /// Candidate squares, row-major in `(i, j)` with `i` the x index.
    pub squares: Vec<AxisSquare>,
}

impl Tiling {
    pub fn pitch(&self) -> f64 {
        self.r + self.s
    }

    pub fn square_at(&self, z: Lattice) -> AxisSquare {
        lattice_square(self.r, self.s, z)
    }
}

fn lattice_square(r: f64, s: f64, z: Lattice) -> AxisSquare {
    let pitch = r + s;
    AxisSquare::new(Point2::new(pitch * z.0 as f64, pitch * z.1 as f64), r)
}

/// Tiles the unit square with `r × r` cities separated by gaps of `s`.
///
/// `(1 - r) / (r + s)` must be an integer up to [`GRID_TOLERANCE`]; it is
/// snapped to that integer.
pub fn build_tiling(r: f64, s: f64) -> Result<Tiling, GeomError> {
    if !(r > 0.0 && r <= 1.0 && s >= 0.0 && r.is_finite() && s.is_finite()) {
        return Err(GeomError::InvalidParameters { r, s });
    }
    let ratio = (1.0 - r) / (r + s);
    let k = math::round(ratio);
    if (ratio - k).abs() > GRID_TOLERANCE * ratio.abs().max(1.0) || k < 0.0 {
        return Err(GeomError::NonIntegerGrid { r, s, ratio });
    }
    let k_grid = k as u32;
    let side = k_grid + 1;
    let mut squares = Vec::with_capacity((side * side) as usize);
    for i in 0..side {
        for j in 0..side {
            squares.push(lattice_square(r, s, (i, j)));
        }
    }
    Ok(Tiling {
        r,
        s,
        k_grid,
        squares,
    })
}

fn check_selection(selected: &[Lattice], k_grid: u32) -> Result<(), GeomError> {
    if selected.is_empty() {
        return Err(GeomError::EmptySelection);
    }
    let side = k_grid as usize + 1;
    let mut seen = vec![false; side * side];
    for &(x, y) in selected {
        if x > k_grid || y > k_grid {
            return Err(GeomError::OutOfGrid {
                x,
                y,
                size: k_grid + 1,
            });
        }
        let slot = x as usize * side + y as usize;
        if seen[slot] {
            return Err(GeomError::DuplicateCity(x, y));
        }
        seen[slot] = true;
    }
    Ok(())
}

/// Whether `selected` is connected under 4-adjacency on `{0..=k_grid}²`.
pub fn validate_well_connected(selected: &[Lattice], k_grid: u32) -> Result<bool, GeomError> {
    check_selection(selected, k_grid)?;
    let side = k_grid as usize + 1;
    let mut index = vec![usize::MAX; side * side];
    for (l, &(x, y)) in selected.iter().enumerate() {
        index[x as usize * side + y as usize] = l;
    }
    let mut seen = vec![false; selected.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(l) = queue.pop_front() {
        for nb in lattice_neighbors(selected[l], k_grid) {
            let m = index[nb.0 as usize * side + nb.1 as usize];
            if m != usize::MAX && !seen[m] {
                seen[m] = true;
                reached += 1;
                queue.push_back(m);
            }
        }
    }
    Ok(reached == selected.len())
}

fn lattice_neighbors(z: Lattice, k_grid: u32) -> impl Iterator<Item = Lattice> {
    let (x, y) = (z.0 as i64, z.1 as i64);
    let k = k_grid as i64;
    [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
        .into_iter()
        .filter(move |&(a, b)| a >= 0 && b >= 0 && a <= k && b <= k)
        .map(|(a, b)| (a as u32, b as u32))
}

/// A tiling with an explicit, well-connected selection of cities.
#[derive(Clone, Debug, PartialEq)]
pub struct CityLayout {
    pub r: f64,
    pub s: f64,
    pub k_grid: u32,
    pub selected: Vec<Lattice>,
    pub squares: Vec<AxisSquare>,
    /// `lookup[x * (k_grid + 1) + y]` is the selected index of lattice `(x, y)`.
    lookup: Vec<u32>,
}

const NOT_SELECTED: u32 = u32::MAX;

impl CityLayout {
    pub fn new(r: f64, s: f64, selected: Vec<Lattice>) -> Result<Self, GeomError> {
        let tiling = build_tiling(r, s)?;
        if !validate_well_connected(&selected, tiling.k_grid)? {
            return Err(GeomError::NotWellConnected);
        }
        let side = tiling.k_grid as usize + 1;
        let mut lookup = vec![NOT_SELECTED; side * side];
        for (l, &(x, y)) in selected.iter().enumerate() {
            lookup[x as usize * side + y as usize] = l as u32;
        }
        let squares = selected.iter().map(|&z| tiling.square_at(z)).collect();
        Ok(Self {
            r,
            s,
            k_grid: tiling.k_grid,
            selected,
            squares,
            lookup,
        })
    }

    /// Every city of the tiling, in row-major lattice order.
    pub fn all(r: f64, s: f64) -> Result<Self, GeomError> {
        let tiling = build_tiling(r, s)?;
        let side = tiling.k_grid + 1;
        let selected = (0..side).flat_map(|i| (0..side).map(move |j| (i, j))).collect();
        Self::new(r, s, selected)
    }

    /// The whole unit square as a single city (the unconstrained model).
    pub fn unit() -> Self {
        Self::new(1.0, 0.0, vec![(0, 0)]).expect("unit layout is valid")
    }

    pub fn city_count(&self) -> usize {
        self.selected.len()
    }

    pub fn pitch(&self) -> f64 {
        self.r + self.s
    }

    pub fn index_of(&self, z: Lattice) -> Option<usize> {
        if z.0 > self.k_grid || z.1 > self.k_grid {
            return None;
        }
        let side = self.k_grid as usize + 1;
        match self.lookup[z.0 as usize * side + z.1 as usize] {
            NOT_SELECTED => None,
            l => Some(l as usize),
        }
    }

    /// Index of the selected city whose half-open square holds `p`.
    pub fn city_of(&self, p: Point2) -> Option<usize> {
        let pitch = self.pitch();
        let cx = math::floor(p.x / pitch);
        let cy = math::floor(p.y / pitch);
        if !(cx.is_finite() && cy.is_finite()) {
            return None;
        }
        // Division can land one cell off near the square edges.
        for dx in [0i64, -1, 1] {
            for dy in [0i64, -1, 1] {
                let ix = cx as i64 + dx;
                let iy = cy as i64 + dy;
                if ix < 0 || iy < 0 || ix > self.k_grid as i64 || iy > self.k_grid as i64 {
                    continue;
                }
                if let Some(l) = self.index_of((ix as u32, iy as u32)) {
                    if self.squares[l].contains(p) {
                        return Some(l);
                    }
                }
            }
        }
        None
    }

    /// Selected-city adjacency (4-neighbours that are also selected).
    pub fn neighbors(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        lattice_neighbors(self.selected[l], self.k_grid).filter_map(|z| self.index_of(z))
    }

    /// Edges of a BFS spanning tree of the selected-city lattice graph, rooted
    /// at the lexicographically smallest coordinate. Pairs are `(parent, child)`.
    pub fn lattice_spanning_tree(&self) -> Vec<(usize, usize)> {
        let n = self.city_count();
        let root = (0..n).min_by_key(|&l| self.selected[l]).unwrap_or(0);
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(l) = queue.pop_front() {
            let mut next: Vec<usize> = self.neighbors(l).filter(|&m| !seen[m]).collect();
            next.sort_by_key(|&m| self.selected[m]);
            for m in next {
                seen[m] = true;
                out.push((l, m));
                queue.push_back(m);
            }
        }
        out
    }
}

/// `b = r √(n N)`, the natural MST scale for `n` nodes in `N` cities of side `r`.
pub fn b_scale(r: f64, n: u64, cities: u64) -> f64 {
    r * math::sqrt(n as f64 * cities as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn tiling_examples() {
        let t = build_tiling(0.1, 0.2).unwrap();
        assert_eq!(t.k_grid, 3);
        assert_eq!(t.squares.len(), 16);
        let mut xs: Vec<f64> = t.squares.iter().map(|s| s.origin.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| close(*a, *b));
        assert_eq!(xs.len(), 4);
        for (x, want) in xs.iter().zip([0.0, 0.3, 0.6, 0.9]) {
            assert!(close(*x, want), "{x} vs {want}");
        }

        let t = build_tiling(0.01, 0.056).unwrap();
        assert_eq!(t.k_grid, 15);
        assert_eq!(t.squares.len(), 256);

        assert!(matches!(
            build_tiling(0.1, 0.25),
            Err(GeomError::NonIntegerGrid { .. })
        ));
        assert!(build_tiling(0.0, 0.1).is_err());
        assert!(build_tiling(0.1, -0.1).is_err());
    }

    #[test]
    fn tiling_gaps_are_exactly_s() {
        for (r, s) in [(0.1, 0.2), (0.01, 0.056), (0.2, 0.2)] {
            let t = build_tiling(r, s).unwrap();
            let mut min_gap = f64::INFINITY;
            for (a, sa) in t.squares.iter().enumerate() {
                assert!(sa.origin.x + sa.side <= 1.0 + 1e-9);
                assert!(sa.origin.y + sa.side <= 1.0 + 1e-9);
                for sb in &t.squares[a + 1..] {
                    min_gap = min_gap.min(sa.gap(sb));
                }
            }
            assert!((min_gap - s).abs() < 1e-9, "r={r} s={s} gap={min_gap}");
        }
    }

    #[test]
    fn well_connected_examples() {
        assert!(validate_well_connected(&[(0, 0), (1, 0), (1, 1)], 3).unwrap());
        assert!(!validate_well_connected(&[(0, 0), (2, 0)], 3).unwrap());
        assert!(validate_well_connected(&[(0, 0)], 3).unwrap());
        assert_eq!(
            validate_well_connected(&[(0, 0), (0, 0)], 3),
            Err(GeomError::DuplicateCity(0, 0))
        );
        assert!(matches!(
            validate_well_connected(&[(4, 0)], 3),
            Err(GeomError::OutOfGrid { .. })
        ));
        assert_eq!(validate_well_connected(&[], 3), Err(GeomError::EmptySelection));
        // diagonal contact is not adjacency
        assert!(!validate_well_connected(&[(0, 0), (1, 1)], 3).unwrap());
    }

    #[test]
    fn layout_rejects_disconnected_selection() {
        assert_eq!(
            CityLayout::new(0.1, 0.2, vec![(0, 0), (2, 0)]),
            Err(GeomError::NotWellConnected)
        );
    }

    #[test]
    fn city_of_examples() {
        let layout = CityLayout::all(0.1, 0.2).unwrap();
        let l = layout.city_of(Point2::new(0.05, 0.05)).unwrap();
        assert_eq!(layout.selected[l], (0, 0));
        assert_eq!(layout.city_of(Point2::new(0.15, 0.15)), None);
        assert_eq!(layout.city_of(Point2::new(0.1, 0.05)), None);
        assert_eq!(layout.city_of(Point2::new(0.0, 0.0)).map(|l| layout.selected[l]), Some((0, 0)));
        let l = layout.city_of(Point2::new(0.95, 0.35)).unwrap();
        assert_eq!(layout.selected[l], (3, 1));
    }

    #[test]
    fn city_of_respects_selection() {
        let layout = CityLayout::new(0.1, 0.2, vec![(0, 0), (1, 0)]).unwrap();
        assert_eq!(layout.city_of(Point2::new(0.35, 0.05)), Some(1));
        assert_eq!(layout.city_of(Point2::new(0.05, 0.35)), None);
    }

    #[test]
    fn bfs_tree_spans_selection() {
        let layout = CityLayout::all(0.1, 0.2).unwrap();
        let tree = layout.lattice_spanning_tree();
        assert_eq!(tree.len(), 15);
        for &(a, b) in &tree {
            let (za, zb) = (layout.selected[a], layout.selected[b]);
            let d = za.0.abs_diff(zb.0) + za.1.abs_diff(zb.1);
            assert_eq!(d, 1);
        }
        assert_eq!(layout.selected[tree[0].0], (0, 0));
    }

    #[test]
    fn b_scale_examples() {
        assert!(close(b_scale(0.1, 100, 4), 2.0));
        assert!((b_scale(0.01, 20_000, 256) - 22.627_416_997_969_52).abs() < 1e-9);
        assert!(close(b_scale(1.0, 1, 1), 1.0));
    }

    #[test]
    fn unit_layout_is_single_city() {
        let u = CityLayout::unit();
        assert_eq!(u.k_grid, 0);
        assert_eq!(u.city_count(), 1);
        assert_eq!(u.city_of(Point2::new(0.999, 0.0)), Some(0));
    }
}
