use std::fmt::Write;
use std::path::Path;

use serde_json::json;

use super::{numeric_rows, parse_f64, read_text, IoError, MAX_OBSERVATIONS};
use crate::field::{FieldError, Observations};
use crate::geometry::Point2;

pub fn read_observations(path: &Path) -> Result<Observations, IoError> {
    parse_observations_csv(&read_text(path)?)
}

/// `x,y,value` rows, optionally headed. Duplicate locations are reported by
/// their line numbers.
pub fn parse_observations_csv(text: &str) -> Result<Observations, IoError> {
    let rows = numeric_rows(text, &["x", "y", "value"], MAX_OBSERVATIONS, "observations")?;
    let mut lines = Vec::with_capacity(rows.len());
    let mut locs = Vec::with_capacity(rows.len());
    let mut vals = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        locs.push(Point2::new(
            parse_f64(&r[0], line, "x")?,
            parse_f64(&r[1], line, "y")?,
        ));
        vals.push(parse_f64(&r[2], line, "value")?);
        lines.push(line);
    }
    Observations::new(locs, vals).map_err(|e| match e {
        FieldError::DuplicateLocation(a, b) => IoError::DuplicateSample(lines[a], lines[b]),
        other => other.into(),
    })
}

pub fn write_observations_csv(obs: &Observations) -> String {
    let mut out = String::from("x,y,value\n");
    for (p, v) in obs.locations().iter().zip(obs.values()) {
        let _ = writeln!(out, "{},{},{}", p.x, p.y, v);
    }
    out
}

/// `order,x,y` rows of a closed tour (the return leg is implied).
pub fn path_csv(waypoints: &[Point2]) -> String {
    let mut out = String::from("order,x,y\n");
    for (k, p) in waypoints.iter().enumerate() {
        let _ = writeln!(out, "{k},{},{}", p.x, p.y);
    }
    out
}

/// GeoJSON Feature with a LineString that returns to its first point.
pub fn path_geojson(waypoints: &[Point2]) -> String {
    let mut coords: Vec<[f64; 2]> = waypoints.iter().map(|p| [p.x, p.y]).collect();
    if let Some(first) = coords.first().copied() {
        coords.push(first);
    }
    let doc = json!({
        "type": "Feature",
        "properties": { "waypoints": waypoints.len(), "closed": true },
        "geometry": { "type": "LineString", "coordinates": coords },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("finite coordinates serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observations_round_trip() {
        let obs = Observations::new(
            vec![Point2::new(0.5, 1.0), Point2::new(-3.0, 2.25)],
            vec![1.0 / 3.0, -7.0],
        )
        .unwrap();
        let back = parse_observations_csv(&write_observations_csv(&obs)).unwrap();
        assert_eq!(back, obs);
    }

    #[test]
    fn malformed_row_reports_its_line() {
        match parse_observations_csv("x,y,value\n0,0,1\n1,1\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_observations_csv("0,0,1\n1,1,nan\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_name_both_lines() {
        let err = parse_observations_csv("x,y,value\n0,0,1\n1,0,2\n0,0,3\n").unwrap_err();
        assert!(err.to_string().contains("lines 2 and 4"), "{err}");
    }

    #[test]
    fn path_exports() {
        let w = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 0.5),
        ];
        assert_eq!(path_csv(&w), "order,x,y\n0,0,0\n1,1,0\n2,0.5,0.5\n");
        let v: serde_json::Value = serde_json::from_str(&path_geojson(&w)).unwrap();
        let c = v["geometry"]["coordinates"].as_array().unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], c[3]);
    }
}
