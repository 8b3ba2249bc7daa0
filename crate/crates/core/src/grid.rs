//! Discretized exploration area.
//!
//! The area is split into square cells whose side equals the distance a robot
//! covers in one epoch, so a single move always takes exactly one epoch.
//! Cells are indexed row-major (`b * width + a`); that index is the
//! tie-breaking order used everywhere else in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid coordinate `(a, b)`: `a` is the column, `b` the row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub a: usize,
    pub b: usize,
}

impl Cell {
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    /// Chebyshev (king-move) distance, i.e. the number of epochs needed to
    /// travel between two cells.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.a.abs_diff(other.a).max(self.b.abs_diff(other.b))
    }
}

impl From<[usize; 2]> for Cell {
    fn from(v: [usize; 2]) -> Self {
        Cell::new(v[0], v[1])
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.a, c.b]
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Kind of a one-epoch step between two cells of a Moore neighborhood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Stay,
    Orthogonal,
    Diagonal,
}

impl Move {
    /// Classifies the step `from -> to`; `None` when the cells are not
    /// Moore neighbors.
    pub fn between(from: Cell, to: Cell) -> Option<Move> {
        let da = from.a.abs_diff(to.a);
        let db = from.b.abs_diff(to.b);
        match (da, db) {
            (0, 0) => Some(Move::Stay),
            (1, 0) | (0, 1) => Some(Move::Orthogonal),
            (1, 1) => Some(Move::Diagonal),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    width_cells: usize,
    height_cells: usize,
    cell_size: f64,
    base_station: Cell,
    terrain_factor: f64,
}

impl GridMap {
    pub fn new(
        width_cells: usize,
        height_cells: usize,
        cell_size: f64,
        base_station: Cell,
    ) -> Result<Self> {
        if width_cells == 0 || height_cells == 0 {
            return Err(Error::InvalidInput(format!(
                "grid must have at least one cell, got {width_cells}x{height_cells}"
            )));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        let grid = Self {
            width_cells,
            height_cells,
            cell_size,
            base_station,
            terrain_factor: 1.0,
        };
        if !grid.contains(base_station) {
            return Err(Error::InvalidInput(format!(
                "base station {base_station} lies outside the {width_cells}x{height_cells} grid"
            )));
        }
        Ok(grid)
    }

    /// Planar terrain is `1.0`; kept for profiles that scale motion cost.
    pub fn with_terrain_factor(mut self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "terrain factor must be >= 0, got {factor}"
            )));
        }
        self.terrain_factor = factor;
        Ok(self)
    }

    pub fn width_cells(&self) -> usize {
        self.width_cells
    }

    pub fn height_cells(&self) -> usize {
        self.height_cells
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn base_station(&self) -> Cell {
        self.base_station
    }

    pub fn terrain_factor(&self) -> f64 {
        self.terrain_factor
    }

    pub fn total_cells(&self) -> usize {
        self.width_cells * self.height_cells
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.a < self.width_cells && c.b < self.height_cells
    }

    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.contains(c));
        c.b * self.width_cells + c.a
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index % self.width_cells, index / self.width_cells)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.total_cells()).map(|i| self.cell(i))
    }

    /// Moore neighborhood of `c` including `c` itself, clipped to the grid
    /// and sorted by cell index.
    pub fn neighbors(&self, c: Cell) -> Vec<Cell> {
        let mut out = Vec::with_capacity(9);
        for b in c.b.saturating_sub(1)..=(c.b + 1).min(self.height_cells - 1) {
            for a in c.a.saturating_sub(1)..=(c.a + 1).min(self.width_cells - 1) {
                out.push(Cell::new(a, b));
            }
        }
        out
    }

    /// Euclidean distance in meters between the centers of `c` and the base
    /// station cell.
    pub fn base_distance(&self, c: Cell) -> f64 {
        let da = c.a.abs_diff(self.base_station.a) as f64;
        let db = c.b.abs_diff(self.base_station.b) as f64;
        da.hypot(db) * self.cell_size
    }
}

/// Discretizes a rectangular area so that one cell is crossed per epoch.
pub fn build_grid(
    area_width: f64,
    area_height: f64,
    robot_speed: f64,
    epoch_duration: f64,
    base_station: Cell,
) -> Result<GridMap> {
    for (name, v) in [
        ("area width", area_width),
        ("area height", area_height),
        ("robot speed", robot_speed),
        ("epoch duration", epoch_duration),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    let cell_size = robot_speed * epoch_duration;
    GridMap::new(
        cells_along(area_width, cell_size),
        cells_along(area_height, cell_size),
        cell_size,
        base_station,
    )
}

fn cells_along(length: f64, cell_size: f64) -> usize {
    // 1e-9 keeps exact multiples (50 / 10) from rounding up on float noise.
    let n = (length / cell_size - 1e-9).ceil();
    (n as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(w: usize, h: usize) -> GridMap {
        GridMap::new(w, h, 10.0, Cell::new(0, 0)).unwrap()
    }

    #[test]
    fn small_scenario_is_five_by_five() {
        let g = build_grid(50.0, 50.0, 1.0, 10.0, Cell::new(0, 0)).unwrap();
        assert_eq!((g.width_cells(), g.height_cells()), (5, 5));
        assert_eq!(g.cell_size(), 10.0);
        assert_eq!(g.total_cells(), 25);
    }

    #[test]
    fn single_cell_area() {
        let g = build_grid(10.0, 10.0, 1.0, 10.0, Cell::new(0, 0)).unwrap();
        assert_eq!((g.width_cells(), g.height_cells()), (1, 1));
    }

    #[test]
    fn large_scenario_coarse_grid() {
        let g = build_grid(500.0, 500.0, 1.0, 31.25, Cell::new(0, 0)).unwrap();
        assert_eq!((g.width_cells(), g.height_cells()), (16, 16));
        assert_eq!(g.cell_size(), 31.25);
    }

    #[test]
    fn partial_cells_round_up() {
        let g = build_grid(51.0, 9.0, 1.0, 10.0, Cell::new(0, 0)).unwrap();
        assert_eq!((g.width_cells(), g.height_cells()), (6, 1));
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(build_grid(0.0, 50.0, 1.0, 10.0, Cell::new(0, 0)).is_err());
        assert!(build_grid(50.0, -1.0, 1.0, 10.0, Cell::new(0, 0)).is_err());
        assert!(build_grid(50.0, 50.0, 0.0, 10.0, Cell::new(0, 0)).is_err());
        assert!(build_grid(50.0, 50.0, 1.0, f64::NAN, Cell::new(0, 0)).is_err());
        assert!(build_grid(50.0, 50.0, 1.0, 10.0, Cell::new(5, 0)).is_err());
    }

    #[test]
    fn corner_neighbors() {
        let got = grid(5, 5).neighbors(Cell::new(0, 0));
        let want = [(0, 0), (1, 0), (0, 1), (1, 1)].map(|(a, b)| Cell::new(a, b));
        assert_eq!(got, want);
    }

    #[test]
    fn interior_neighbors() {
        assert_eq!(grid(5, 5).neighbors(Cell::new(2, 2)).len(), 9);
    }

    #[test]
    fn row_grid_neighbors() {
        let got = grid(1, 5).neighbors(Cell::new(0, 1));
        assert_eq!(got, vec![Cell::new(0, 0), Cell::new(0, 1), Cell::new(0, 2)]);
    }

    #[test]
    fn base_distances() {
        let g = grid(5, 5);
        assert_eq!(g.base_distance(Cell::new(0, 0)), 0.0);
        assert_eq!(g.base_distance(Cell::new(3, 4)), 50.0);
        let g = GridMap::new(5, 5, 10.0, Cell::new(2, 2)).unwrap();
        assert_eq!(g.base_distance(Cell::new(2, 0)), 20.0);
    }

    #[test]
    fn move_classification() {
        let c = Cell::new(1, 1);
        assert_eq!(Move::between(c, c), Some(Move::Stay));
        assert_eq!(Move::between(c, Cell::new(1, 2)), Some(Move::Orthogonal));
        assert_eq!(Move::between(c, Cell::new(0, 0)), Some(Move::Diagonal));
        assert_eq!(Move::between(c, Cell::new(3, 1)), None);
    }

    #[test]
    fn cell_serializes_as_pair() {
        assert_eq!(serde_json::to_string(&Cell::new(3, 4)).unwrap(), "[3,4]");
        let c: Cell = serde_json::from_str("[1,2]").unwrap();
        assert_eq!(c, Cell::new(1, 2));
    }

    proptest! {
        #[test]
        fn neighbors_symmetric_and_reflexive(w in 1usize..7, h in 1usize..7, i in 0usize..49, j in 0usize..49) {
            let g = grid(w, h);
            let c = g.cell(i % g.total_cells());
            let d = g.cell(j % g.total_cells());
            let nc = g.neighbors(c);
            prop_assert!(nc.contains(&c));
            prop_assert!((1..=9).contains(&nc.len()));
            prop_assert_eq!(nc.contains(&d), g.neighbors(d).contains(&c));
            let interior = c.a > 0 && c.b > 0 && c.a + 1 < w && c.b + 1 < h;
            prop_assert_eq!(nc.len() == 9, interior);
        }

        #[test]
        fn grid_covers_area(w in 0.5f64..600.0, h in 0.5f64..600.0, v in 0.1f64..3.0, dt in 1.0f64..40.0) {
            let g = build_grid(w, h, v, dt, Cell::new(0, 0)).unwrap();
            prop_assert!(g.cell_size() * g.width_cells() as f64 >= w - 1e-6);
            prop_assert!(g.cell_size() * g.height_cells() as f64 >= h - 1e-6);
            prop_assert_eq!(g.clone(), build_grid(w, h, v, dt, Cell::new(0, 0)).unwrap());
        }

        #[test]
        fn index_roundtrip(w in 1usize..20, h in 1usize..20, i in 0usize..400) {
            let g = grid(w, h);
            let i = i % g.total_cells();
            prop_assert_eq!(g.index(g.cell(i)), i);
        }
    }
}
