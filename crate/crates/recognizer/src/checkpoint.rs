//! Versioned binary checkpoint: magic, format version, JSON model config and
//! class weights, then one shape-tagged block of little-endian `f64` per
//! parameter tensor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::train::ModelState;

const MAGIC: &[u8; 8] = b"AXODECKP";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    alpha: Vec<f64>,
}

pub fn to_bytes(state: &ModelState) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        config: state.model.config.clone(),
        alpha: state.alpha.clone(),
    })
    .expect("config serializes");
    let mut out = Vec::new();
    out.extend(MAGIC);
    out.extend(VERSION.to_le_bytes());
    out.extend((header.len() as u64).to_le_bytes());
    out.extend(&header);
    let params = &state.model.params;
    out.extend((params.info.len() as u32).to_le_bytes());
    for info in &params.info {
        out.extend((info.name.len() as u32).to_le_bytes());
        out.extend(info.name.as_bytes());
        out.extend((info.shape.len() as u32).to_le_bytes());
        for &d in &info.shape {
            out.extend((d as u64).to_le_bytes());
        }
        for v in info.id.slice(&params.values) {
            out.extend(v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<ModelState> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let len = r.u64()? as usize;
    let header: Header = serde_json::from_slice(r.take(len)?).map_err(|e| Error::Checkpoint(e.to_string()))?;
    // rebuild the layout from the config, then fill it
    let mut model = Model::new(header.config, 0)?;
    let blocks = r.u32()? as usize;
    if blocks != model.params.info.len() {
        return Err(Error::Checkpoint(format!(
            "{blocks} parameter blocks, config needs {}",
            model.params.info.len()
        )));
    }
    for i in 0..blocks {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let dims = r.u32()? as usize;
        let shape = (0..dims).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let info = &model.params.info[i];
        if info.name != name || info.shape != shape {
            return Err(Error::Checkpoint(format!(
                "block {i} is {name} {shape:?}, expected {} {:?}",
                info.name, info.shape
            )));
        }
        let id = info.id;
        let raw = r.take(8 * id.len)?;
        for (dst, chunk) in id.slice_mut(&mut model.params.values).iter_mut().zip(raw.chunks_exact(8)) {
            *dst = f64::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    if r.pos != buf.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(ModelState {
        model,
        alpha: header.alpha,
    })
}

pub fn save(state: &ModelState, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(state)).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

pub fn load(path: &Path) -> Result<ModelState> {
    let buf = std::fs::read(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    from_bytes(&buf)
}
