use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::TriangleMesh;

/// Parses an OFF mesh. Polygons with more than three vertices are split into
/// a triangle fan. Accepts the common variant where the counts follow
/// `OFF` on the same line.
pub fn parse_off(text: &str, path: &Path) -> Result<TriangleMesh> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing OFF header".into()))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| {
            err(
                header_line,
                format!("expected OFF header, found {header:?}"),
            )
        })?
        .trim();
    let (count_line, counts) = if rest.is_empty() {
        lines
            .next()
            .ok_or_else(|| err(header_line + 1, "missing count line".into()))?
    } else {
        (header_line, rest)
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| err(count_line, format!("invalid count line {counts:?}")))?;
    if counts.len() < 2 {
        return Err(err(
            count_line,
            "count line needs vertex and face counts".into(),
        ));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(count_line, format!("expected {nv} vertices")))?;
        let v: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(ln, format!("invalid vertex {l:?}")))?;
        if v.len() != 3 || v.iter().any(|c| !c.is_finite()) {
            return Err(err(ln, format!("invalid vertex {l:?}")));
        }
        vertices.push([v[0], v[1], v[2]]);
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(count_line, format!("expected {nf} faces")))?;
        let mut it = l.split_whitespace();
        let arity: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln, format!("invalid face {l:?}")))?;
        let idx: Vec<usize> = it
            .take(arity)
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(ln, format!("invalid face {l:?}")))?;
        if arity < 3 || idx.len() != arity {
            return Err(err(ln, format!("face needs at least 3 indices: {l:?}")));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= nv) {
            return Err(err(ln, format!("vertex index {bad} out of range")));
        }
        for w in 1..arity - 1 {
            faces.push([idx[0], idx[w], idx[w + 1]]);
        }
    }
    Ok(TriangleMesh { vertices, faces })
}

pub fn read_off(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_off(&text, path)
}
