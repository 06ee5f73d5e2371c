use super::{HexGrid, SloiSet};

/// Unit-distance adjacency among SLoIs: a triangular lattice graph.
#[derive(Debug, Clone)]
pub struct TriangularGraph {
    rings: Vec<[Option<usize>; 6]>,
    edge_length: f64,
}

impl TriangularGraph {
    pub fn node_count(&self) -> usize {
        self.rings.len()
    }

    /// Hexagon edge length `l` of the underlying grid.
    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    /// Geometric length of every lattice edge.
    pub fn spacing(&self) -> f64 {
        3f64.sqrt() * self.edge_length
    }

    /// Neighbor ring of `k` in counter-clockwise order, with absent cells as `None`.
    pub fn ring(&self, k: usize) -> &[Option<usize>; 6] {
        &self.rings[k]
    }

    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.rings[k].iter().flatten().copied()
    }

    pub fn degree(&self, k: usize) -> usize {
        self.neighbors(k).count()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.rings.len() && self.rings[a].contains(&Some(b))
    }

    /// Edges as `(lo, hi)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, ring) in self.rings.iter().enumerate() {
            for &b in ring.iter().flatten() {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn edge_count(&self) -> usize {
        self.rings
            .iter()
            .map(|r| r.iter().flatten().count())
            .sum::<usize>()
            / 2
    }
}

pub fn build_adjacency(slois: &SloiSet, grid: &HexGrid) -> TriangularGraph {
    let rings = slois
        .points()
        .iter()
        .map(|s| s.index.neighbors().map(|n| slois.find(n)))
        .collect();
    TriangularGraph {
        rings,
        edge_length: grid.edge_length(),
    }
}
