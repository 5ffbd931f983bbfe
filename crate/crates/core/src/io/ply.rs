use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::Result;
use crate::geom::{LocalFrames, PointCloud};

/// ASCII PLY with optional per-vertex normals, for viewing in external tools.
pub fn write_ply(
    cloud: &PointCloud,
    frames: Option<&LocalFrames>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_atomic(path.as_ref(), format_ply(cloud, frames).as_bytes())
}

pub(crate) fn format_ply(cloud: &PointCloud, frames: Option<&LocalFrames>) -> String {
    let frames = frames.filter(|f| f.len() == cloud.len());
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    writeln!(s, "element vertex {}", cloud.len()).unwrap();
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    if frames.is_some() {
        s.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    s.push_str("end_header\n");
    for (i, p) in cloud.points().iter().enumerate() {
        write!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).unwrap();
        if let Some(f) = frames {
            let n = f.normal(i);
            write!(s, " {:.16e} {:.16e} {:.16e}", n[0], n[1], n[2]).unwrap();
        }
        s.push('\n');
    }
    s
}
