//! `LFLD1` binary field files and their JSON sidecars.
//!
//! Layout: 8-byte magic `LFLD1\0\0\0`, `u32` rank, one `u32` size per axis,
//! a `u8` scalar kind (0 = real f64, 1 = complex f64 as interleaved re/im),
//! then the row-major payload. All integers and floats are little-endian.

use std::fs;
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ComplexField, ModelSpec, RealField};

pub const MAGIC: [u8; 8] = *b"LFLD1\0\0\0";

const KIND_REAL: u8 = 0;
const KIND_COMPLEX: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Real(RealField),
    Complex(ComplexField),
}

impl FieldData {
    pub fn shape(&self) -> &[usize] {
        match self {
            FieldData::Real(f) => f.shape(),
            FieldData::Complex(f) => f.shape(),
        }
    }

    pub fn into_real(self) -> Result<RealField> {
        match self {
            FieldData::Real(f) => Ok(f),
            FieldData::Complex(_) => Err(Error::Format("expected a real field".into())),
        }
    }

    pub fn into_complex(self) -> ComplexField {
        match self {
            FieldData::Real(f) => f.mapv(|v| Complex64::new(v, 0.0)),
            FieldData::Complex(f) => f,
        }
    }
}

fn header(shape: &[usize], kind: u8, payload_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 + 4 * shape.len() + 1 + payload_len);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
    for &s in shape {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    out.push(kind);
    out
}

// `iter()` on a standard-layout ArrayD is row-major regardless of memory order.
pub fn encode_real(field: &RealField) -> Vec<u8> {
    let mut out = header(field.shape(), KIND_REAL, 8 * field.len());
    for v in field.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_complex(field: &ComplexField) -> Vec<u8> {
    let mut out = header(field.shape(), KIND_COMPLEX, 16 * field.len());
    for z in field.iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn encode(field: &FieldData) -> Vec<u8> {
    match field {
        FieldData::Real(f) => encode_real(f),
        FieldData::Complex(f) => encode_complex(f),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FieldData> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let rank = r.u32()? as usize;
    if rank == 0 || rank > 16 {
        return Err(Error::Format(format!("unsupported rank {rank}")));
    }
    let shape = (0..rank)
        .map(|_| r.u32().map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .ok_or_else(|| Error::Format("shape overflows".into()))?;
    let kind = r.take(1)?[0];
    let field = match kind {
        KIND_REAL => {
            let data = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            FieldData::Real(ArrayD::from_shape_vec(IxDyn(&shape), data).unwrap())
        }
        KIND_COMPLEX => {
            let data = (0..len)
                .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
                .collect::<Result<Vec<_>>>()?;
            FieldData::Complex(ArrayD::from_shape_vec(IxDyn(&shape), data).unwrap())
        }
        k => return Err(Error::Format(format!("unknown scalar kind {k}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(field)
}

pub fn write_field(path: impl AsRef<Path>, field: &FieldData) -> Result<()> {
    fs::write(path, encode(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<FieldData> {
    decode(&fs::read(path)?)
}

/// Sidecar path for a field file: `u.lfld` -> `u.lfld.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

pub fn write_sidecar(field_path: &Path, spec: &ModelSpec) -> Result<()> {
    let mut json = serde_json::to_string_pretty(spec)?;
    json.push('\n');
    fs::write(sidecar_path(field_path), json)?;
    Ok(())
}

pub fn read_sidecar(field_path: &Path) -> Result<ModelSpec> {
    Ok(serde_json::from_slice(&fs::read(sidecar_path(field_path))?)?)
}
