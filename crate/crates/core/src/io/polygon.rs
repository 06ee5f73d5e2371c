use std::path::Path;

use serde_json::Value;

use super::{has_extension, numeric_rows, parse_f64, read_text, IoError, MAX_POLYGON_VERTICES};
use crate::geometry::{Point2, Polygon};

/// Contour from a `.csv` vertex table or a GeoJSON document (any other extension).
pub fn read_polygon(path: &Path) -> Result<Polygon, IoError> {
    let text = read_text(path)?;
    if has_extension(path, "csv") {
        parse_polygon_csv(&text)
    } else {
        parse_polygon_geojson(&text)
    }
}

/// `x,y` rows, optionally headed. A repeated closing vertex is allowed.
pub fn parse_polygon_csv(text: &str) -> Result<Polygon, IoError> {
    let rows = numeric_rows(
        text,
        &["x", "y"],
        MAX_POLYGON_VERTICES + 1,
        "polygon vertices",
    )?;
    let mut pts = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        pts.push(Point2::new(
            parse_f64(&r[0], line, "x")?,
            parse_f64(&r[1], line, "y")?,
        ));
    }
    Ok(Polygon::new(pts)?)
}

/// Outer ring of a Polygon geometry, given bare, as a Feature, or as a
/// FeatureCollection holding exactly one feature. Holes are ignored.
pub fn parse_polygon_geojson(text: &str) -> Result<Polygon, IoError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| IoError::parse(e.line() as u64, e.to_string()))?;
    let geometry = find_geometry(&doc)?;
    let ring = geometry
        .get("coordinates")
        .and_then(Value::as_array)
        .and_then(|rings| rings.first())
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::Format("Polygon has no coordinate ring".into()))?;
    if ring.len() > MAX_POLYGON_VERTICES + 1 {
        return Err(IoError::TooLarge {
            what: "polygon vertices",
            limit: MAX_POLYGON_VERTICES,
        });
    }
    let mut pts = Vec::with_capacity(ring.len());
    for (k, pos) in ring.iter().enumerate() {
        let xy = pos
            .as_array()
            .filter(|a| a.len() >= 2)
            .and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)))
            .ok_or_else(|| IoError::Format(format!("position {k} is not [x, y]")))?;
        pts.push(Point2::new(xy.0, xy.1));
    }
    Ok(Polygon::new(pts)?)
}

fn find_geometry(doc: &Value) -> Result<&Value, IoError> {
    let kind = doc.get("type").and_then(Value::as_str);
    match kind {
        Some("Polygon") => Ok(doc),
        Some("Feature") => {
            let g = doc
                .get("geometry")
                .filter(|g| !g.is_null())
                .ok_or_else(|| IoError::Format("Feature has no geometry".into()))?;
            match g.get("type").and_then(Value::as_str) {
                Some("Polygon") => Ok(g),
                other => Err(IoError::Format(format!(
                    "expected a Polygon geometry, got {}",
                    other.unwrap_or("none")
                ))),
            }
        }
        Some("FeatureCollection") => match doc.get("features").and_then(Value::as_array) {
            Some(f) if f.len() == 1 => find_geometry(&f[0]),
            Some(f) => Err(IoError::Format(format!(
                "FeatureCollection must hold exactly one feature, found {}",
                f.len()
            ))),
            None => Err(IoError::Format("FeatureCollection has no features".into())),
        },
        other => Err(IoError::Format(format!(
            "unsupported GeoJSON type {}",
            other.unwrap_or("none")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geojson_forms() {
        let ring = "[[0,0],[4,0],[4,3],[0,3],[0,0]]";
        let bare = format!(r#"{{"type":"Polygon","coordinates":[{ring}]}}"#);
        let feat = format!(r#"{{"type":"Feature","properties":{{}},"geometry":{bare}}}"#);
        let coll = format!(r#"{{"type":"FeatureCollection","features":[{feat}]}}"#);
        for doc in [bare, feat, coll] {
            let p = parse_polygon_geojson(&doc).unwrap();
            assert_eq!(p.vertices().len(), 4);
            assert_eq!(p.area(), 12.0);
        }
    }

    #[test]
    fn geojson_rejections() {
        assert!(parse_polygon_geojson(r#"{"type":"Point","coordinates":[0,0]}"#).is_err());
        assert!(parse_polygon_geojson(r#"{"type":"FeatureCollection","features":[]}"#).is_err());
        assert!(parse_polygon_geojson(
            r#"{"type":"Polygon","coordinates":[[[0,0],[1,"a"],[1,1]]]}"#
        )
        .is_err());
        assert!(matches!(
            parse_polygon_geojson(
                r#"{"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1]]]}"#
            ),
            Err(IoError::Geometry(_))
        ));
        assert!(matches!(
            parse_polygon_geojson("{"),
            Err(IoError::Parse { .. })
        ));
    }

    #[test]
    fn csv_with_and_without_header() {
        let a = parse_polygon_csv("x,y\n0,0\n2,0\n2,2\n").unwrap();
        let b = parse_polygon_csv("# triangle\n0,0\n2,0\n2,2\n0,0\n").unwrap();
        assert_eq!(a, b);
        match parse_polygon_csv("x,y\n0,0\n2,zero\n2,2\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_polygon_csv("a,b\n0,0\n1,0\n1,1\n").is_err());
        assert!(parse_polygon_csv("0,0,0\n1,0\n1,1\n").is_err());
    }
}
