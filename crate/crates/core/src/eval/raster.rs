use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geometry::{Point2, Polygon};

/// Largest raster accepted from files.
pub const MAX_RASTER_NODES: usize = 25_000_000;

/// Node-registered scalar grid. Node `(i, j)` sits at
/// `origin + (i * cell_size, j * cell_size)`; `j = 0` is the southern row.
/// No-data nodes hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRaster {
    nx: usize,
    ny: usize,
    cell_size: f64,
    origin: Point2,
    values: Vec<f64>,
}

impl FieldRaster {
    pub fn new(
        nx: usize,
        ny: usize,
        cell_size: f64,
        origin: Point2,
        values: Vec<f64>,
    ) -> Result<Self, EvalError> {
        if nx < 2 || ny < 2 {
            return Err(EvalError::InvalidRaster(format!(
                "raster must be at least 2x2, got {nx}x{ny}"
            )));
        }
        if nx.checked_mul(ny) != Some(values.len()) {
            return Err(EvalError::InvalidRaster(format!(
                "{nx}x{ny} raster needs {} values, got {}",
                nx.saturating_mul(ny),
                values.len()
            )));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) || !origin.is_finite() {
            return Err(EvalError::InvalidRaster(format!(
                "cell size {cell_size} and origin ({}, {}) must be finite, cell size positive",
                origin.x, origin.y
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(EvalError::InvalidRaster(
                "raster holds an infinite value".into(),
            ));
        }
        Ok(Self {
            nx,
            ny,
            cell_size,
            origin,
            values,
        })
    }

    /// Raster whose node values are `f(node position)`.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        cell_size: f64,
        origin: Point2,
        f: impl Fn(Point2) -> f64,
    ) -> Result<Self, EvalError> {
        let values = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                f(Point2::new(
                    origin.x + i as f64 * cell_size,
                    origin.y + j as f64 * cell_size,
                ))
            })
            .collect();
        Self::new(nx, ny, cell_size, origin, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    /// Row-major values, southern row first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x + i as f64 * self.cell_size,
            self.origin.y + j as f64 * self.cell_size,
        )
    }

    /// Node positions in storage order.
    pub fn nodes(&self) -> Vec<Point2> {
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| self.node(i, j))
            .collect()
    }

    /// Far corner of the node extent.
    pub fn upper(&self) -> Point2 {
        self.node(self.nx - 1, self.ny - 1)
    }

    /// Outline of the node extent as a rectangle.
    pub fn extent(&self) -> Polygon {
        let u = self.upper();
        Polygon::rectangle(self.origin.x, self.origin.y, u.x, u.y).expect("non-degenerate raster")
    }

    pub fn contains(&self, p: Point2) -> bool {
        let u = self.upper();
        p.x >= self.origin.x && p.x <= u.x && p.y >= self.origin.y && p.y <= u.y
    }

    /// Bilinear interpolation. `None` outside the extent or next to no-data.
    pub fn bilinear(&self, p: Point2) -> Option<f64> {
        if !self.contains(p) {
            return None;
        }
        let fx = (p.x - self.origin.x) / self.cell_size;
        let fy = (p.y - self.origin.y) / self.cell_size;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.get(i, j);
        let v10 = self.get(i + 1, j);
        let v01 = self.get(i, j + 1);
        let v11 = self.get(i + 1, j + 1);
        let v = (1.0 - tx) * (1.0 - ty) * v00
            + tx * (1.0 - ty) * v10
            + (1.0 - tx) * ty * v01
            + tx * ty * v11;
        v.is_finite().then_some(v)
    }
}
