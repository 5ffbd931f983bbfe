use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::geom::{Point3, PointCloud};

/// One `x y z` line per point, 17 significant digits.
pub fn format_xyz(cloud: &PointCloud) -> String {
    let mut s = String::with_capacity(cloud.len() * 72);
    for p in cloud.points() {
        writeln!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).unwrap();
    }
    s
}

pub fn write_xyz(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_xyz(cloud).as_bytes())
}

/// Parses XYZ text; blank lines and `#` comments are skipped, extra columns ignored.
pub fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud> {
    let mut points: Vec<Point3> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg,
        };
        let mut it = line.split_whitespace();
        let mut p: Point3 = [0.0; 3];
        for (axis, slot) in p.iter_mut().enumerate() {
            let tok = it
                .next()
                .ok_or_else(|| err(format!("expected 3 coordinates, found {axis}")))?;
            *slot = tok
                .parse()
                .map_err(|_| err(format!("invalid number {tok:?}")))?;
            if !slot.is_finite() {
                return Err(err(format!("non-finite coordinate {tok:?}")));
            }
        }
        points.push(p);
    }
    PointCloud::new(points)
}

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_xyz(&text, path)
}
