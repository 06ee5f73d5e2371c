use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use super::{has_extension, numeric_rows, parse_f64, read_text, IoError};
use crate::eval::{FieldRaster, MAX_RASTER_NODES};
use crate::geometry::Point2;

const NODATA: f64 = -9999.0;

/// Raster from a `.csv` node table or an ESRI ASCII grid (any other extension).
pub fn read_raster(path: &Path) -> Result<FieldRaster, IoError> {
    let text = read_text(path)?;
    if has_extension(path, "csv") {
        parse_raster_csv(&text)
    } else {
        parse_esri_ascii(&text)
    }
}

/// ESRI ASCII grid. Cell values become nodes at the cell centres; the first
/// data row is the northern one. `NODATA_value` cells become NaN.
pub fn parse_esri_ascii(text: &str) -> Result<FieldRaster, IoError> {
    let mut header: HashMap<String, (u64, String)> = HashMap::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some(&(k, line)) = lines.peek() {
        let mut tok = line.split_whitespace();
        let Some(key) = tok.next() else {
            lines.next();
            continue;
        };
        if key.parse::<f64>().is_ok() {
            break;
        }
        let value = tok
            .next()
            .ok_or_else(|| IoError::parse(k as u64 + 1, format!("header {key} has no value")))?;
        if tok.next().is_some() {
            return Err(IoError::parse(
                k as u64 + 1,
                format!("header {key} has extra fields"),
            ));
        }
        let key = key.to_ascii_lowercase();
        if header
            .insert(key.clone(), (k as u64 + 1, value.to_owned()))
            .is_some()
        {
            return Err(IoError::parse(
                k as u64 + 1,
                format!("header {key} repeated"),
            ));
        }
        lines.next();
    }
    for key in header.keys() {
        if !matches!(
            key.as_str(),
            "ncols"
                | "nrows"
                | "xllcorner"
                | "yllcorner"
                | "xllcenter"
                | "yllcenter"
                | "cellsize"
                | "nodata_value"
        ) {
            return Err(IoError::Format(format!("unsupported header {key}")));
        }
    }
    let get = |key: &str| -> Result<Option<f64>, IoError> {
        header
            .get(key)
            .map(|(l, v)| parse_f64(v, *l, key))
            .transpose()
    };
    let count = |key: &str| -> Result<usize, IoError> {
        let (l, v) = header
            .get(key)
            .ok_or_else(|| IoError::Format(format!("missing header {key}")))?;
        v.parse::<usize>()
            .map_err(|_| IoError::parse(*l, format!("{key} {v:?} is not a count")))
    };
    let (nx, ny) = (count("ncols")?, count("nrows")?);
    let n = nx
        .checked_mul(ny)
        .filter(|&n| n <= MAX_RASTER_NODES)
        .ok_or(IoError::TooLarge {
            what: "raster nodes",
            limit: MAX_RASTER_NODES,
        })?;
    let cell = get("cellsize")?.ok_or_else(|| IoError::Format("missing header cellsize".into()))?;
    let corner = |c: &str, m: &str| -> Result<f64, IoError> {
        match (get(c)?, get(m)?) {
            (Some(v), None) => Ok(v + 0.5 * cell),
            (None, Some(v)) => Ok(v),
            _ => Err(IoError::Format(format!("need exactly one of {c} and {m}"))),
        }
    };
    let origin = Point2::new(
        corner("xllcorner", "xllcenter")?,
        corner("yllcorner", "yllcenter")?,
    );
    let nodata = get("nodata_value")?;

    let mut rows_top_down = Vec::with_capacity(n.min(text.len() / 2 + 1));
    for (k, line) in lines {
        for tok in line.split_whitespace() {
            if rows_top_down.len() == n {
                return Err(IoError::parse(
                    k as u64 + 1,
                    format!("more than {n} values"),
                ));
            }
            let v: f64 = tok.parse().map_err(|_| {
                IoError::parse(k as u64 + 1, format!("value {tok:?} is not a number"))
            })?;
            rows_top_down.push(if Some(v) == nodata || v.is_nan() {
                f64::NAN
            } else {
                v
            });
        }
    }
    if rows_top_down.len() != n {
        return Err(IoError::Format(format!(
            "expected {n} values, found {}",
            rows_top_down.len()
        )));
    }
    let mut values = Vec::with_capacity(n);
    for r in (0..ny).rev() {
        values.extend_from_slice(&rows_top_down[r * nx..(r + 1) * nx]);
    }
    Ok(FieldRaster::new(nx, ny, cell, origin, values)?)
}

pub fn write_esri_ascii(r: &FieldRaster) -> String {
    let mut nodata = NODATA;
    while r.values().contains(&nodata) {
        nodata *= 2.0;
    }
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", r.nx());
    let _ = writeln!(out, "nrows {}", r.ny());
    let _ = writeln!(out, "xllcenter {}", r.origin().x);
    let _ = writeln!(out, "yllcenter {}", r.origin().y);
    let _ = writeln!(out, "cellsize {}", r.cell_size());
    let _ = writeln!(out, "NODATA_value {nodata}");
    for j in (0..r.ny()).rev() {
        let row: Vec<String> = (0..r.nx())
            .map(|i| {
                let v = r.get(i, j);
                if v.is_nan() { nodata } else { v }.to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// `x,y,value` per node, southern row first. No-data nodes have an empty value.
pub fn write_raster_csv(r: &FieldRaster) -> String {
    let mut out = String::from("x,y,value\n");
    for j in 0..r.ny() {
        for i in 0..r.nx() {
            let p = r.node(i, j);
            let v = r.get(i, j);
            if v.is_nan() {
                let _ = writeln!(out, "{},{},", p.x, p.y);
            } else {
                let _ = writeln!(out, "{},{},{}", p.x, p.y, v);
            }
        }
    }
    out
}

/// Inverse of [`write_raster_csv`]: rows may come in any order but must fill
/// a regular grid with equal spacing on both axes.
pub fn parse_raster_csv(text: &str) -> Result<FieldRaster, IoError> {
    let rows = numeric_rows(text, &["x", "y", "value"], MAX_RASTER_NODES, "raster nodes")?;
    let mut pts = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let x = parse_f64(&r[0], *line, "x")?;
        let y = parse_f64(&r[1], *line, "y")?;
        let v = if r[2].is_empty() {
            f64::NAN
        } else {
            parse_f64(&r[2], *line, "value")?
        };
        pts.push((*line, x, y, v));
    }
    let axis = |sel: fn(&(u64, f64, f64, f64)) -> f64| -> Vec<f64> {
        let mut a: Vec<f64> = pts.iter().map(sel).collect();
        a.sort_by(f64::total_cmp);
        a.dedup();
        a
    };
    let xs = axis(|p| p.1);
    let ys = axis(|p| p.2);
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 {
        return Err(IoError::Format(format!(
            "raster must be at least 2x2, got {nx}x{ny}"
        )));
    }
    let cell = xs[1] - xs[0];
    let regular = |a: &[f64]| {
        a.iter()
            .enumerate()
            .all(|(k, v)| (v - (a[0] + k as f64 * cell)).abs() <= 1e-9 * cell.max(v.abs()))
    };
    if !regular(&xs) || !regular(&ys) {
        return Err(IoError::Format(
            "nodes do not form a regular square grid".into(),
        ));
    }
    if pts.len() != nx * ny {
        return Err(IoError::Format(format!(
            "{nx}x{ny} grid needs {} nodes, found {}",
            nx * ny,
            pts.len()
        )));
    }
    let mut values = vec![f64::NAN; nx * ny];
    let mut seen = vec![false; nx * ny];
    for (line, x, y, v) in pts {
        let i = xs.binary_search_by(|a| a.total_cmp(&x)).unwrap_or(0);
        let j = ys.binary_search_by(|a| a.total_cmp(&y)).unwrap_or(0);
        let k = j * nx + i;
        if seen[k] {
            return Err(IoError::parse(line, format!("node ({x}, {y}) repeated")));
        }
        seen[k] = true;
        values[k] = v;
    }
    Ok(FieldRaster::new(
        nx,
        ny,
        cell,
        Point2::new(xs[0], ys[0]),
        values,
    )?)
}
