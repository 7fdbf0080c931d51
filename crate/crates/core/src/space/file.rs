//! Versioned binary container for semantic spaces.
//!
//! Layout (little-endian): magic `LSQS`, format version, the four dimensions
//! `T D k r`, the term vocabulary, document labels, singular values, then
//! `U_k` and `V_k` row-major. Floats round-trip bit-exactly. The reader
//! validates structure and invariants before allocating anything large, so it
//! is safe on untrusted input.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::SemanticSpace;

const MAGIC: &[u8; 4] = b"LSQS";
const VERSION: u32 = 1;

/// Hard caps on declared dimensions; keeps hostile headers from driving
/// allocations.
const MAX_DIM: u64 = 1 << 24;
const MAX_LABEL_BYTES: u32 = 1 << 16;
const MAX_ELEMENTS: u64 = 1 << 28;

pub fn write_space<W: Write>(space: &SemanticSpace, mut out: W) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(VERSION)?;
    let (t, d, k) = (space.n_terms(), space.n_docs(), space.k());
    out.write_u64::<LittleEndian>(t as u64)?;
    out.write_u64::<LittleEndian>(d as u64)?;
    out.write_u64::<LittleEndian>(k as u64)?;
    out.write_u64::<LittleEndian>(space.rank() as u64)?;
    for label in space.term_labels().iter().chain(space.doc_labels()) {
        let bytes = label.as_bytes();
        out.write_u32::<LittleEndian>(bytes.len() as u32)?;
        out.write_all(bytes)?;
    }
    for i in 0..k {
        out.write_f64::<LittleEndian>(space.sigma()[i])?;
    }
    for i in 0..t {
        for j in 0..k {
            out.write_f64::<LittleEndian>(space.u()[(i, j)])?;
        }
    }
    for i in 0..d {
        for j in 0..k {
            out.write_f64::<LittleEndian>(space.v()[(i, j)])?;
        }
    }
    Ok(())
}

pub fn save_space(space: &SemanticSpace, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_space(space, &mut buf).expect("in-memory write");
    fs::write(path, buf).map_err(|e| Error::io(path.display().to_string(), e))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::SpaceFile(msg.into())
}

fn read_label<R: Read>(input: &mut R) -> Result<String> {
    let len = input
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated label length"))?;
    if len > MAX_LABEL_BYTES {
        return Err(bad(format!("label length {len} exceeds limit")));
    }
    let mut buf = vec![0u8; len as usize];
    input
        .read_exact(&mut buf)
        .map_err(|_| bad("truncated label"))?;
    String::from_utf8(buf).map_err(|_| bad("label is not valid UTF-8"))
}

pub fn read_space<R: Read>(mut input: R) -> Result<SemanticSpace> {
    let mut magic = [0u8; 4];
    input
        .read_exact(&mut magic)
        .map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = input
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated header"))?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let mut dims = [0u64; 4];
    for d in &mut dims {
        *d = input
            .read_u64::<LittleEndian>()
            .map_err(|_| bad("truncated header"))?;
    }
    let [t, d, k, r] = dims;
    if t == 0 || d == 0 || k == 0 {
        return Err(bad("zero dimension"));
    }
    if t > MAX_DIM || d > MAX_DIM || k > MAX_DIM || r > MAX_DIM {
        return Err(bad("dimension exceeds limit"));
    }
    if k > r || r > t.min(d) {
        return Err(bad(format!("inconsistent dimensions T={t} D={d} k={k} r={r}")));
    }
    if t.saturating_mul(k) > MAX_ELEMENTS || d.saturating_mul(k) > MAX_ELEMENTS {
        return Err(bad("factor size exceeds limit"));
    }
    let (t, d, k, r) = (t as usize, d as usize, k as usize, r as usize);

    let mut terms = Vec::with_capacity(t.min(4096));
    for _ in 0..t {
        terms.push(read_label(&mut input)?);
    }
    let mut docs = Vec::with_capacity(d.min(4096));
    for _ in 0..d {
        docs.push(read_label(&mut input)?);
    }

    let mut sigma = DVector::zeros(k);
    for i in 0..k {
        let s = input
            .read_f64::<LittleEndian>()
            .map_err(|_| bad("truncated singular values"))?;
        if !s.is_finite() || s <= 0.0 {
            return Err(bad("singular values must be finite and positive"));
        }
        if i > 0 && s > sigma[i - 1] {
            return Err(bad("singular values must be non-increasing"));
        }
        sigma[i] = s;
    }

    let mut read_factor = |rows: usize, what: &str| -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(rows, k);
        for i in 0..rows {
            for j in 0..k {
                let v = input
                    .read_f64::<LittleEndian>()
                    .map_err(|_| bad(format!("truncated {what}")))?;
                if !v.is_finite() {
                    return Err(bad(format!("non-finite value in {what}")));
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    };
    let u = read_factor(t, "term factor")?;
    let v = read_factor(d, "document factor")?;

    Ok(SemanticSpace::from_parts(terms, docs, u, sigma, v, r))
}

pub fn load_space(path: &Path) -> Result<SemanticSpace> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_space(bytes.as_slice())
}
