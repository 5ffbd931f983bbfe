//! Binary model file.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    "G3PC"
//! version  u32
//! arch     u32
//! counts   u32 per-point layers, u32 head layers
//! table    (u32 in, u32 out) per layer
//! params   per layer: weight (in*out f64, row-major), bias (out f64)
//! trailer  u32 CRC-32 of every preceding byte
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};

use super::network::{ClassifierModel, Dense, ARCH_TAG};
use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const MAGIC: &[u8; 4] = b"G3PC";
pub const FORMAT_VERSION: u32 = 1;

pub fn to_bytes(model: &ClassifierModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&ARCH_TAG.to_le_bytes());
    out.extend_from_slice(&(model.point_layers.len() as u32).to_le_bytes());
    out.extend_from_slice(&(model.head_layers.len() as u32).to_le_bytes());
    for l in model.layers() {
        out.extend_from_slice(&(l.input_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(l.output_dim() as u32).to_le_bytes());
    }
    for l in model.layers() {
        for v in l.weight.iter().chain(l.bias.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::FormatVersionMismatch("truncated model file".into())),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<ClassifierModel> {
    let bad = |m: &str| Error::FormatVersionMismatch(m.to_string());
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    if r.u32()? != ARCH_TAG {
        return Err(bad("unknown architecture tag"));
    }
    if bytes.len() < 4 {
        return Err(bad("truncated model file"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(trailer.try_into().unwrap()) {
        return Err(bad("checksum mismatch"));
    }
    let n_point = r.u32()? as usize;
    let n_head = r.u32()? as usize;
    if n_point == 0 || n_head != 2 || n_point > 64 {
        return Err(bad("unexpected layer counts"));
    }
    let mut dims = Vec::with_capacity(n_point + n_head);
    for _ in 0..n_point + n_head {
        let (i, o) = (r.u32()? as usize, r.u32()? as usize);
        if i == 0 || o == 0 || i.saturating_mul(o) > body.len() / 8 {
            return Err(bad("layer dimensions exceed file size"));
        }
        dims.push((i, o));
    }
    let mut layers = Vec::with_capacity(dims.len());
    for &(i, o) in &dims {
        let mut w = Vec::with_capacity(i * o);
        for _ in 0..i * o {
            w.push(r.f64()?);
        }
        let mut b = Vec::with_capacity(o);
        for _ in 0..o {
            b.push(r.f64()?);
        }
        layers.push(Dense {
            weight: Array2::from_shape_vec((i, o), w).expect("sized above"),
            bias: Array1::from(b),
        });
    }
    if r.pos != body.len() {
        return Err(bad("trailing bytes after parameters"));
    }
    let head_layers = layers.split_off(n_point);
    let model = ClassifierModel {
        point_layers: layers,
        head_layers,
    };
    model.validate()?;
    Ok(model)
}

/// Writes the model atomically.
pub fn save(model: &ClassifierModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &to_bytes(model))
}

pub fn load(path: impl AsRef<Path>) -> Result<ClassifierModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
