//! Binary weight container: header, tensor manifest, little-endian data, digest.
//!
//! Layout: `EIGW` magic, u32 version, u64 payload length, u32 tensor count,
//! then per tensor a u32-prefixed UTF-8 name, u32 rank, u64 dims and f64
//! values; a trailing SHA-256 covers every preceding byte.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{CriticError, Result};
use crate::layout::Layout;
use crate::params::CriticParams;

const MAGIC: &[u8; 4] = b"EIGW";
const VERSION: u32 = 1;

pub fn to_bytes(params: &CriticParams) -> Vec<u8> {
    let layout = Layout::get();
    let mut body = Vec::new();
    body.extend_from_slice(&(layout.blocks().len() as u32).to_le_bytes());
    for (name, block) in layout.blocks() {
        body.extend_from_slice(&(name.len() as u32).to_le_bytes());
        body.extend_from_slice(name.as_bytes());
        let shape = block.shape();
        body.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for d in shape {
            body.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for w in params.block(*block) {
            body.extend_from_slice(&w.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(body.len() + 48);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|e| *e <= self.bytes.len())
            .ok_or_else(|| CriticError::WeightFile(format!("truncated at byte {}", self.at)))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<CriticParams> {
    let bad = |m: String| CriticError::WeightFile(m);
    if bytes.len() < 32 + 16 {
        return Err(bad("file too short".into()));
    }
    let (content, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(content).as_slice() != digest {
        return Err(bad("integrity digest mismatch".into()));
    }
    let mut r = Reader { bytes: content, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let payload = r.u64()? as usize;
    if payload != content.len() - 16 {
        return Err(bad(format!("payload length {payload} does not match file")));
    }
    let layout = Layout::get();
    let count = r.u32()? as usize;
    if count != layout.blocks().len() {
        return Err(bad(format!("{count} tensors, expected {}", layout.blocks().len())));
    }
    let mut params = CriticParams::zeros();
    for (name, block) in layout.blocks() {
        let len = r.u32()? as usize;
        let got = std::str::from_utf8(r.take(len)?).map_err(|e| bad(e.to_string()))?;
        if got != name {
            return Err(bad(format!("tensor {got}, expected {name}")));
        }
        let rank = r.u32()? as usize;
        let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if shape != block.shape() {
            return Err(bad(format!("tensor {name} has shape {shape:?}, expected {:?}", block.shape())));
        }
        for w in &mut params.data[block.range()] {
            *w = f64::from_le_bytes(r.take(8)?.try_into().expect("eight bytes"));
        }
    }
    if !params.is_finite() {
        return Err(bad("non-finite weight".into()));
    }
    Ok(params)
}

pub fn save(params: &CriticParams, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(params)).map_err(|e| CriticError::WeightFile(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<CriticParams> {
    let bytes = std::fs::read(path).map_err(|e| CriticError::WeightFile(format!("{}: {e}", path.display())))?;
    from_bytes(&bytes)
}
