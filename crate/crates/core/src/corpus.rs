//! Synthetic survey contours for experiments and regression corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point2, Polygon};

fn poly(points: &[(f64, f64)]) -> Polygon {
    Polygon::new(points.iter().map(|&(x, y)| Point2::new(x, y)).collect())
        .expect("corpus polygon is valid")
}

pub fn rectangle(w: f64, h: f64) -> Polygon {
    poly(&[(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)])
}

/// `w x h` box with the top-right `notch_w x notch_h` corner removed.
pub fn l_shape(w: f64, h: f64, notch_w: f64, notch_h: f64) -> Polygon {
    poly(&[
        (0.0, 0.0),
        (w, 0.0),
        (w, h - notch_h),
        (w - notch_w, h - notch_h),
        (w - notch_w, h),
        (0.0, h),
    ])
}

/// Horizontal bar of height `bar_h` across the top of a centered stem of width `stem_w`.
pub fn t_shape(w: f64, h: f64, stem_w: f64, bar_h: f64) -> Polygon {
    let x0 = 0.5 * (w - stem_w);
    let x1 = x0 + stem_w;
    poly(&[
        (x0, 0.0),
        (x1, 0.0),
        (x1, h - bar_h),
        (w, h - bar_h),
        (w, h),
        (0.0, h),
        (0.0, h - bar_h),
        (x0, h - bar_h),
    ])
}

/// Box with a centered slot of width `slot_w` cut down from the top to depth `slot_d`.
pub fn u_shape(w: f64, h: f64, slot_w: f64, slot_d: f64) -> Polygon {
    let x0 = 0.5 * (w - slot_w);
    let x1 = x0 + slot_w;
    poly(&[
        (0.0, 0.0),
        (w, 0.0),
        (w, h),
        (x1, h),
        (x1, h - slot_d),
        (x0, h - slot_d),
        (x0, h),
        (0.0, h),
    ])
}

/// Convex polygon with `n` vertices at sorted random angles on an ellipse
/// centered in `[0, 2rx] x [0, 2ry]`.
pub fn random_convex(rng: &mut impl Rng, n: usize, rx: f64, ry: f64) -> Polygon {
    let n = n.max(3);
    loop {
        let mut angles: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Point2> = angles
            .iter()
            .map(|a| Point2::new(rx + rx * a.cos(), ry + ry * a.sin()))
            .collect();
        if let Ok(p) = Polygon::new(pts) {
            // Reject slivers.
            if p.area() > 0.25 * std::f64::consts::PI * rx * ry {
                return p;
            }
        }
    }
}

/// A labeled contour for corpus-driven tests.
#[derive(Debug, Clone)]
pub struct NamedContour {
    pub name: String,
    pub polygon: Polygon,
}

/// Deterministic mixed corpus: 10 rectangles, 10 L, 10 T, 10 U shapes and
/// `convex` random convex polygons, all within roughly 20..60 length units.
pub fn standard_corpus(seed: u64, convex: usize) -> Vec<NamedContour> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name: String, polygon: Polygon| out.push(NamedContour { name, polygon });
    for k in 0..10 {
        let w = rng.random_range(20.0..60.0);
        let h = rng.random_range(20.0..60.0);
        push(format!("rect-{k}"), rectangle(w, h));
    }
    for k in 0..10 {
        let w = rng.random_range(25.0..60.0);
        let h = rng.random_range(25.0..60.0);
        let nw = w * rng.random_range(0.3..0.6);
        let nh = h * rng.random_range(0.3..0.6);
        push(format!("l-{k}"), l_shape(w, h, nw, nh));
    }
    for k in 0..10 {
        let w = rng.random_range(30.0..60.0);
        let h = rng.random_range(30.0..60.0);
        let sw = w * rng.random_range(0.3..0.5);
        let bh = h * rng.random_range(0.3..0.5);
        push(format!("t-{k}"), t_shape(w, h, sw, bh));
    }
    for k in 0..10 {
        let w = rng.random_range(30.0..60.0);
        let h = rng.random_range(30.0..60.0);
        let sw = w * rng.random_range(0.2..0.4);
        let sd = h * rng.random_range(0.3..0.6);
        push(format!("u-{k}"), u_shape(w, h, sw, sd));
    }
    for k in 0..convex {
        let n = rng.random_range(5..12);
        let rx = rng.random_range(10.0..30.0);
        let ry = rng.random_range(10.0..30.0);
        let p = random_convex(&mut rng, n, rx, ry);
        push(format!("convex-{k}"), p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let a = standard_corpus(7, 12);
        let b = standard_corpus(7, 12);
        assert_eq!(a.len(), 52);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.polygon, y.polygon);
            assert!(x.polygon.area() > 0.0);
        }
    }

    #[test]
    fn shapes_have_expected_areas() {
        assert!((l_shape(10.0, 10.0, 4.0, 5.0).area() - 80.0).abs() < 1e-9);
        assert!((t_shape(10.0, 10.0, 4.0, 3.0).area() - (30.0 + 28.0)).abs() < 1e-9);
        assert!((u_shape(10.0, 10.0, 2.0, 6.0).area() - 88.0).abs() < 1e-9);
    }
}
