use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, SloiSet, TriangularGraph};

/// Closed tour over point indices; the last element connects back to the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCycle {
    sequence: Vec<usize>,
}

impl PathCycle {
    pub fn new(sequence: Vec<usize>) -> Self {
        Self { sequence }
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn into_sequence(self) -> Vec<usize> {
        self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Consecutive pairs including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.sequence.len();
        let count = if n >= 2 { n } else { 0 };
        (0..count).map(move |k| (self.sequence[k], self.sequence[(k + 1) % n]))
    }

    /// Rotates so that `first` leads; no-op if absent.
    pub fn rotate_to(&mut self, first: usize) {
        if let Some(p) = self.sequence.iter().position(|&x| x == first) {
            self.sequence.rotate_left(p);
        }
    }

    pub fn waypoints(&self, positions: &[Point2]) -> Vec<Point2> {
        self.sequence.iter().map(|&k| positions[k]).collect()
    }

    /// Sum of consecutive Euclidean distances including the closing edge.
    pub fn length(&self, positions: &[Point2]) -> f64 {
        closed_length(&self.waypoints(positions))
    }
}

/// Length of a closed polyline.
pub fn closed_length(points: &[Point2]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    (0..n).map(|k| points[k].dist(&points[(k + 1) % n])).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    /// Number of distinct SLoIs on the path, `|SP|`.
    pub visited_count: usize,
    /// Closed path length `|p|`.
    pub total_length: f64,
    pub unvisited: Vec<usize>,
    pub cycle_count: usize,
    /// Nodes appearing more than once.
    pub repeated: Vec<usize>,
    /// Consecutive pairs that are not lattice edges.
    pub invalid_edges: Vec<(usize, usize)>,
}

impl CycleReport {
    /// A single closed cycle with no repeats and only lattice edges.
    pub fn is_valid(&self) -> bool {
        self.cycle_count == 1 && self.repeated.is_empty() && self.invalid_edges.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.is_valid() && self.unvisited.is_empty()
    }
}

pub fn validate_cycle(path: &PathCycle, slois: &SloiSet, graph: &TriangularGraph) -> CycleReport {
    let n = slois.len();
    let mut seen = HashSet::new();
    let mut repeated = Vec::new();
    let mut out_of_range = false;
    for &k in path.sequence() {
        if k >= n {
            out_of_range = true;
            continue;
        }
        if !seen.insert(k) && !repeated.contains(&k) {
            repeated.push(k);
        }
    }
    let invalid_edges: Vec<(usize, usize)> = path
        .edges()
        .filter(|&(a, b)| !graph.has_edge(a, b))
        .collect();
    let total_length = if out_of_range {
        f64::NAN
    } else {
        path.length(&slois.positions())
    };
    let unvisited = (0..n).filter(|k| !seen.contains(k)).collect();
    let cycle_count = usize::from(path.len() >= 3 && !out_of_range);
    CycleReport {
        visited_count: seen.len(),
        total_length,
        unvisited,
        cycle_count,
        repeated,
        invalid_edges,
    }
}
