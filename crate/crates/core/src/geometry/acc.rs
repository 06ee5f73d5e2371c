//! Auxiliary coarse cells: 2x2 groups of fine hexagons.
//!
//! Within a coarse cell at `(i, j)` the fine cells are labeled
//!
//! ```text
//!   3 4        row 2j+1 (odd, shifted right)
//!  1 2         row 2j
//! ```
//!
//! Cells 5 and 6 are labels 1 and 3 of the right neighbor `(i+1, j)`; cells
//! 7 and 8 are labels 3 and 4 of the bottom neighbor `(i, j-1)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CellIndex, HexGrid, Point2, SloiSet};

/// Coarse cell coordinates: `i` is the column, `j` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AccIndex {
    pub i: i64,
    pub j: i64,
}

impl AccIndex {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }

    pub fn left(&self) -> Self {
        Self::new(self.i - 1, self.j)
    }

    pub fn right(&self) -> Self {
        Self::new(self.i + 1, self.j)
    }

    pub fn bottom(&self) -> Self {
        Self::new(self.i, self.j - 1)
    }

    /// Grid index of the fine cell carrying `label` (1..=4).
    pub fn fine_cell(&self, label: u8) -> CellIndex {
        debug_assert!((1..=4).contains(&label));
        let l = (label - 1) as i64;
        CellIndex::new(2 * self.i + l % 2, 2 * self.j + l / 2)
    }
}

/// Coarse cell and label (1..=4) containing a fine cell.
pub fn acc_of(idx: CellIndex) -> (AccIndex, u8) {
    let acc = AccIndex::new(idx.col.div_euclid(2), idx.row.div_euclid(2));
    let label = 1 + idx.col.rem_euclid(2) as u8 + 2 * idx.row.rem_euclid(2) as u8;
    (acc, label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccCell {
    /// SLoI positions (indices into the `SloiSet`) for labels 1..=4.
    pub slots: [Option<usize>; 4],
}

impl AccCell {
    pub fn is_full(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    pub fn slot(&self, label: u8) -> Option<usize> {
        self.slots[(label - 1) as usize]
    }
}

#[derive(Debug, Clone)]
pub struct AccGrid {
    grid: HexGrid,
    cells: BTreeMap<AccIndex, AccCell>,
    assignment: Vec<(AccIndex, u8)>,
}

impl AccGrid {
    pub fn grid(&self) -> &HexGrid {
        &self.grid
    }

    pub fn get(&self, idx: AccIndex) -> Option<&AccCell> {
        self.cells.get(&idx)
    }

    pub fn is_full(&self, idx: AccIndex) -> bool {
        self.cells.get(&idx).is_some_and(AccCell::is_full)
    }

    /// SLoI for `label` of coarse cell `idx`, if present.
    pub fn slot(&self, idx: AccIndex, label: u8) -> Option<usize> {
        self.cells.get(&idx).and_then(|c| c.slot(label))
    }

    /// Cells 5 and 6 (right neighbor's labels 1 and 3).
    pub fn right_refs(&self, idx: AccIndex) -> (Option<usize>, Option<usize>) {
        (self.slot(idx.right(), 1), self.slot(idx.right(), 3))
    }

    /// Cells 7 and 8 (bottom neighbor's labels 3 and 4).
    pub fn bottom_refs(&self, idx: AccIndex) -> (Option<usize>, Option<usize>) {
        (self.slot(idx.bottom(), 3), self.slot(idx.bottom(), 4))
    }

    /// Coarse cell and label of SLoI `k`.
    pub fn assignment(&self, k: usize) -> (AccIndex, u8) {
        self.assignment[k]
    }

    /// Occupied coarse cells in ascending `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (AccIndex, &AccCell)> {
        self.cells.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn full_count(&self) -> usize {
        self.cells.values().filter(|c| c.is_full()).count()
    }

    /// Inclusive column and row ranges of occupied coarse cells.
    pub fn bounds(&self) -> Option<((i64, i64), (i64, i64))> {
        let mut it = self.cells.keys();
        let first = it.next()?;
        let (mut i0, mut i1, mut j0, mut j1) = (first.i, first.i, first.j, first.j);
        for k in it {
            i0 = i0.min(k.i);
            i1 = i1.max(k.i);
            j0 = j0.min(k.j);
            j1 = j1.max(k.j);
        }
        Some(((i0, i1), (j0, j1)))
    }

    /// Mean of the four fine-cell centroids, whether or not they are SLoIs.
    pub fn centroid(&self, idx: AccIndex) -> Point2 {
        let mut x = 0.0;
        let mut y = 0.0;
        for label in 1..=4 {
            let p = self.grid.centroid(idx.fine_cell(label));
            x += p.x;
            y += p.y;
        }
        Point2::new(x / 4.0, y / 4.0)
    }
}

/// Assigns every SLoI to its coarse cell and label.
pub fn acc_decompose(grid: &HexGrid, slois: &SloiSet) -> AccGrid {
    let mut cells: BTreeMap<AccIndex, AccCell> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(slois.len());
    for (k, s) in slois.points().iter().enumerate() {
        let (acc, label) = acc_of(s.index);
        cells
            .entry(acc)
            .or_insert(AccCell { slots: [None; 4] })
            .slots[(label - 1) as usize] = Some(k);
        assignment.push((acc, label));
    }
    AccGrid {
        grid: *grid,
        cells,
        assignment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hex_tessellate, Polygon};

    fn block(grid: HexGrid, cells: &[(i64, i64)]) -> SloiSet {
        SloiSet::from_indices(
            grid,
            cells.iter().map(|&(c, r)| CellIndex::new(c, r)).collect(),
        )
    }

    fn test_grid() -> HexGrid {
        hex_tessellate(&Polygon::rectangle(0.0, 0.0, 10.0, 10.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for c in -3..4 {
            for r in -3..4 {
                let idx = CellIndex::new(c, r);
                let (acc, label) = acc_of(idx);
                assert_eq!(acc.fine_cell(label), idx);
            }
        }
    }

    #[test]
    fn aligned_block_is_one_full_acc() {
        let set = block(test_grid(), &[(2, 2), (3, 2), (2, 3), (3, 3)]);
        let acc = acc_decompose(&test_grid(), &set);
        assert_eq!(acc.len(), 1);
        assert!(acc.is_full(AccIndex::new(1, 1)));
        let c = acc.get(AccIndex::new(1, 1)).unwrap();
        assert_eq!(set.get(c.slot(1).unwrap()).index, CellIndex::new(2, 2));
        assert_eq!(set.get(c.slot(4).unwrap()).index, CellIndex::new(3, 3));
    }

    #[test]
    fn missing_centroid_breaks_fullness() {
        let set = block(test_grid(), &[(2, 2), (3, 2), (2, 3)]);
        let acc = acc_decompose(&test_grid(), &set);
        assert!(!acc.is_full(AccIndex::new(1, 1)));
        assert_eq!(acc.full_count(), 0);
    }

    #[test]
    fn neighbor_references_are_lattice_adjacent() {
        let g = test_grid();
        let cells: Vec<(i64, i64)> = (0..6).flat_map(|c| (0..6).map(move |r| (c, r))).collect();
        let set = block(g, &cells);
        let acc = acc_decompose(&g, &set);
        let cur = AccIndex::new(1, 1);
        let (c5, c6) = acc.right_refs(cur);
        let (c7, c8) = acc.bottom_refs(cur);
        let at = |k: Option<usize>| set.get(k.unwrap()).index;
        let s = |l| at(acc.slot(cur, l));
        assert!(s(2).is_adjacent(&at(c5)));
        assert!(s(4).is_adjacent(&at(c6)));
        assert!(s(1).is_adjacent(&at(c7)));
        assert!(s(2).is_adjacent(&at(c8)));
        assert!(at(c7).is_adjacent(&at(c8)));
    }
}
