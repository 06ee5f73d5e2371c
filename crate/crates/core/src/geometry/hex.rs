use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2, Polygon};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Upper bound on the number of cells a single tessellation may enumerate.
pub const MAX_GRID_CELLS: u64 = 20_000_000;

/// Offset-row index of a pointy-top hexagon. Odd rows are shifted right by
/// half a cell width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub col: i64,
    pub row: i64,
}

impl CellIndex {
    pub const fn new(col: i64, row: i64) -> Self {
        Self { col, row }
    }

    fn odd_row(&self) -> bool {
        self.row.rem_euclid(2) == 1
    }

    /// The six lattice neighbors in counter-clockwise order starting east.
    /// Consecutive entries (cyclically) are adjacent to each other.
    pub fn neighbors(&self) -> [CellIndex; 6] {
        let (c, r) = (self.col, self.row);
        let shift = if self.odd_row() { 1 } else { 0 };
        [
            CellIndex::new(c + 1, r),
            CellIndex::new(c + shift, r + 1),
            CellIndex::new(c + shift - 1, r + 1),
            CellIndex::new(c - 1, r),
            CellIndex::new(c + shift - 1, r - 1),
            CellIndex::new(c + shift, r - 1),
        ]
    }

    pub fn is_adjacent(&self, other: &CellIndex) -> bool {
        self.neighbors().contains(other)
    }
}

/// Pointy-top hexagonal tessellation anchored at `origin` (centroid of cell (0, 0)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HexGrid {
    edge_length: f64,
    origin: Point2,
    col_min: i64,
    col_max: i64,
    row_min: i64,
    row_max: i64,
}

impl HexGrid {
    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    /// Center-to-center distance of adjacent cells, `sqrt(3) * l`.
    pub fn spacing(&self) -> f64 {
        SQRT3 * self.edge_length
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn col_range(&self) -> (i64, i64) {
        (self.col_min, self.col_max)
    }

    pub fn row_range(&self) -> (i64, i64) {
        (self.row_min, self.row_max)
    }

    pub fn contains_index(&self, idx: CellIndex) -> bool {
        (self.col_min..=self.col_max).contains(&idx.col)
            && (self.row_min..=self.row_max).contains(&idx.row)
    }

    pub fn cell_count(&self) -> u64 {
        ((self.col_max - self.col_min + 1) * (self.row_max - self.row_min + 1)) as u64
    }

    pub fn centroid(&self, idx: CellIndex) -> Point2 {
        let w = self.spacing();
        let shift = if idx.odd_row() { 0.5 } else { 0.0 };
        Point2::new(
            self.origin.x + w * (idx.col as f64 + shift),
            self.origin.y + 1.5 * self.edge_length * idx.row as f64,
        )
    }

    /// Index of the cell whose hexagon contains `p` (nearest centroid).
    pub fn locate(&self, p: Point2) -> CellIndex {
        let row_f = (p.y - self.origin.y) / (1.5 * self.edge_length);
        let base_row = row_f.floor() as i64;
        let mut best = CellIndex::new(0, base_row);
        let mut best_d = f64::INFINITY;
        for row in [base_row - 1, base_row, base_row + 1, base_row + 2] {
            let shift = if row.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
            let col_f = (p.x - self.origin.x) / self.spacing() - shift;
            let c0 = col_f.floor() as i64;
            for col in [c0 - 1, c0, c0 + 1, c0 + 2] {
                let idx = CellIndex::new(col, row);
                let d = self.centroid(idx).dist_sq(&p);
                if d < best_d || (d == best_d && idx < best) {
                    best = idx;
                    best_d = d;
                }
            }
        }
        best
    }

    /// Row-major iteration (row ascending, then column ascending).
    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (self.row_min..=self.row_max)
            .flat_map(move |r| (self.col_min..=self.col_max).map(move |c| CellIndex::new(c, r)))
    }
}

/// Tessellates the bounding box of `poly` with one ring of margin, anchored
/// at the bounding-box lower-left corner.
pub fn hex_tessellate(poly: &Polygon, edge_length: f64) -> Result<HexGrid, GeometryError> {
    hex_tessellate_with_offset(poly, edge_length, Point2::new(0.0, 0.0))
}

/// Like [`hex_tessellate`] but shifts the anchor by `offset`.
pub fn hex_tessellate_with_offset(
    poly: &Polygon,
    edge_length: f64,
    offset: Point2,
) -> Result<HexGrid, GeometryError> {
    if !(edge_length > 0.0) || !edge_length.is_finite() {
        return Err(GeometryError::InvalidEdgeLength(edge_length));
    }
    if !offset.is_finite() {
        return Err(GeometryError::NonFiniteVertex(0));
    }
    let bb = poly.bbox();
    let origin = Point2::new(bb.min.x + offset.x, bb.min.y + offset.y);
    let w = SQRT3 * edge_length;
    let h = 1.5 * edge_length;
    let row_min = ((bb.min.y - origin.y) / h).floor() - 1.0;
    let row_max = ((bb.max.y - origin.y) / h).ceil() + 1.0;
    let col_min = ((bb.min.x - origin.x) / w).floor() - 1.0;
    let col_max = ((bb.max.x - origin.x) / w).ceil() + 1.0;
    let cells = (row_max - row_min + 1.0) * (col_max - col_min + 1.0);
    if !cells.is_finite() || cells > MAX_GRID_CELLS as f64 {
        return Err(GeometryError::GridTooLarge { edge_length, cells });
    }
    Ok(HexGrid {
        edge_length,
        origin,
        col_min: col_min as i64,
        col_max: col_max as i64,
        row_min: row_min as i64,
        row_max: row_max as i64,
    })
}

/// A sampling location of interest: a hexagon centroid inside the contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sloi {
    pub index: CellIndex,
    pub pos: Point2,
}

/// Ordered (row-major by grid index) set of sampling locations.
#[derive(Debug, Clone)]
pub struct SloiSet {
    grid: HexGrid,
    points: Vec<Sloi>,
    lookup: HashMap<CellIndex, usize>,
}

impl SloiSet {
    pub fn from_indices(grid: HexGrid, mut indices: Vec<CellIndex>) -> Self {
        indices.sort_by_key(|i| (i.row, i.col));
        indices.dedup();
        let points: Vec<Sloi> = indices
            .into_iter()
            .map(|index| Sloi {
                index,
                pos: grid.centroid(index),
            })
            .collect();
        let lookup = points
            .iter()
            .enumerate()
            .map(|(k, s)| (s.index, k))
            .collect();
        Self {
            grid,
            points,
            lookup,
        }
    }

    pub fn grid(&self) -> &HexGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Sloi] {
        &self.points
    }

    pub fn get(&self, k: usize) -> &Sloi {
        &self.points[k]
    }

    pub fn position(&self, k: usize) -> Point2 {
        self.points[k].pos
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.points.iter().map(|s| s.pos).collect()
    }

    pub fn find(&self, idx: CellIndex) -> Option<usize> {
        self.lookup.get(&idx).copied()
    }

    /// Nearest SLoI to `p`; ties go to the lowest grid index.
    pub fn nearest(&self, p: Point2) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, s) in self.points.iter().enumerate() {
            let d = s.pos.dist_sq(&p);
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((k, d)),
            }
        }
        best.map(|(k, _)| k)
    }
}

/// Selects the cells whose centroids lie in `poly` (boundary inclusive).
pub fn select_slois(grid: &HexGrid, poly: &Polygon) -> SloiSet {
    let indices = grid
        .cells()
        .filter(|&c| poly.contains(grid.centroid(c)))
        .collect();
    SloiSet::from_indices(*grid, indices)
}

/// Counts SLoIs without materializing the set.
pub fn count_slois(grid: &HexGrid, poly: &Polygon) -> usize {
    grid.cells()
        .filter(|&c| poly.contains(grid.centroid(c)))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(side: f64) -> Polygon {
        Polygon::rectangle(0.0, 0.0, side, side).unwrap()
    }

    #[test]
    fn adjacent_centroids_are_sqrt3_l_apart() {
        let g = hex_tessellate(&square(10.0), 2.0).unwrap();
        for idx in g.cells() {
            let p = g.centroid(idx);
            for n in idx.neighbors() {
                let d = p.dist(&g.centroid(n));
                assert!((d - 2.0 * SQRT3).abs() <= 1e-9 * d, "{idx:?}->{n:?}: {d}");
            }
        }
        assert!((g.spacing() - 3.4641).abs() < 1e-4);
    }

    #[test]
    fn spacing_for_l_3_1() {
        let poly = Polygon::rectangle(0.0, 0.0, 51.0, 56.0).unwrap();
        let g = hex_tessellate(&poly, 3.1).unwrap();
        assert!((g.spacing() - 5.3694).abs() < 1e-4);
    }

    #[test]
    fn zero_or_negative_edge_length_is_rejected() {
        assert!(hex_tessellate(&square(10.0), 0.0).is_err());
        assert!(hex_tessellate(&square(10.0), -1.0).is_err());
        assert!(hex_tessellate(&square(10.0), f64::NAN).is_err());
    }

    #[test]
    fn grid_covers_bbox_with_margin() {
        let g = hex_tessellate(&square(10.0), 2.0).unwrap();
        assert_eq!(g.origin(), Point2::new(0.0, 0.0));
        assert!(g.col_range().0 <= -1 && g.row_range().0 <= -1);
        let far = g.centroid(CellIndex::new(g.col_range().1, g.row_range().1));
        assert!(far.x > 10.0 && far.y > 10.0);
    }

    #[test]
    fn locate_inverts_centroid() {
        let g = hex_tessellate(&square(10.0), 1.3).unwrap();
        for idx in g.cells() {
            assert_eq!(g.locate(g.centroid(idx)), idx);
        }
    }

    #[test]
    fn neighbor_ring_is_cyclically_adjacent() {
        for idx in [
            CellIndex::new(0, 0),
            CellIndex::new(3, 1),
            CellIndex::new(-2, -1),
        ] {
            let ring = idx.neighbors();
            for k in 0..6 {
                assert!(ring[k].is_adjacent(&ring[(k + 1) % 6]));
                assert!(ring[k].is_adjacent(&idx));
            }
        }
    }

    #[test]
    fn tiny_polygon_has_no_slois() {
        let poly = Polygon::rectangle(0.2, 0.2, 0.3, 0.3).unwrap();
        let g = hex_tessellate_with_offset(&poly, 5.0, Point2::new(-0.1, -0.1)).unwrap();
        assert!(select_slois(&g, &poly).is_empty());
    }

    #[test]
    fn nearest_breaks_ties_by_grid_order() {
        let poly = square(10.0);
        let g = hex_tessellate(&poly, 2.0).unwrap();
        let set = select_slois(&g, &poly);
        let a = set.position(0);
        let b = set.position(1);
        let mid = a.midpoint(&b);
        assert_eq!(set.nearest(mid), Some(0));
    }
}
