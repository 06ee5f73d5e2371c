//! Survey contours, hexagonal tessellation, sampling-location selection,
//! coarse-cell decomposition and the lattice adjacency graph.

mod acc;
mod graph;
mod hex;
mod polygon;

pub use acc::{acc_decompose, acc_of, AccCell, AccGrid, AccIndex};
pub use graph::{build_adjacency, TriangularGraph};
pub use hex::{
    count_slois, hex_tessellate, hex_tessellate_with_offset, select_slois, CellIndex, HexGrid,
    Sloi, SloiSet, MAX_GRID_CELLS,
};
pub use polygon::{point_in_polygon, BBox, Point2, Polygon, ON_EDGE_EPS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("vertex {0} repeats its successor")]
    RepeatedVertex(usize),
    #[error("polygon has zero signed area")]
    ZeroArea,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("hexagon edge length must be positive and finite, got {0}")]
    InvalidEdgeLength(f64),
    #[error("tessellation with edge length {edge_length} needs {cells} cells")]
    GridTooLarge { edge_length: f64, cells: f64 },
}
