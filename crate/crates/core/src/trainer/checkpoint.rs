//! Versioned, checksummed binary checkpoint.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   8 bytes  "KOACKPT\0"
//! version u32
//! scalar  u8       byte width of stored floats (4 or 8)
//! meta    u32 len + UTF-8 JSON {model, train, mapping, label_maps}
//! scaler  u32 n + n means + n stds
//! params  u32 layers, each: name (u32 len + bytes), weight tensor, bias tensor
//!         tensor = u32 rank + rank×u64 dims + values
//! sha256  32 bytes over everything above
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::TrainConfig;
use crate::dataio::{ColumnMapping, LabelMaps, ScalerParams};
use crate::nncore::{LayerParams, Model, ModelConfig, ParamStore, Tensor};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 8] = b"KOACKPT\0";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint truncated")]
    Truncated,
    #[error("checksum mismatch: checkpoint is corrupted")]
    Checksum,
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error(
        "checkpoint format version {found} is not supported (this build reads version {supported})"
    )]
    Version { found: u32, supported: u32 },
    #[error("checkpoint stores {found}-byte floats, expected {expected}")]
    ScalarWidth { found: u8, expected: u8 },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

/// Everything needed to rebuild the preprocessing and the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub model_cfg: ModelConfig,
    pub params: ParamStore<T>,
    pub label_maps: LabelMaps,
    pub scaler: ScalerParams<T>,
    pub train_cfg: TrainConfig,
    pub mapping: ColumnMapping,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn model(&self) -> Model<T> {
        Model::new(self.model_cfg.clone(), self.params.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct Meta {
    model: ModelConfig,
    train: TrainConfig,
    mapping: ColumnMapping,
    label_maps: LabelMaps,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_len(out: &mut Vec<u8>, n: usize) {
    put_u32(out, u32::try_from(n).expect("section length fits u32"));
}

fn put_tensor<T: Scalar>(out: &mut Vec<u8>, t: &Tensor<T>) {
    put_len(out, t.shape().len());
    for &d in t.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.data() {
        v.write_le(out);
    }
}

pub fn checkpoint_to_bytes<T: Scalar>(ck: &Checkpoint<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    out.push(T::TAG);
    let meta = serde_json::to_vec(&Meta {
        model: ck.model_cfg.clone(),
        train: ck.train_cfg.clone(),
        mapping: ck.mapping.clone(),
        label_maps: ck.label_maps.clone(),
    })
    .expect("metadata serializes");
    put_len(&mut out, meta.len());
    out.extend_from_slice(&meta);
    put_len(&mut out, ck.scaler.mean.len());
    for &v in ck.scaler.mean.iter().chain(&ck.scaler.std) {
        v.write_le(&mut out);
    }
    put_len(&mut out, ck.params.layers.len());
    for l in &ck.params.layers {
        put_len(&mut out, l.name.len());
        out.extend_from_slice(l.name.as_bytes());
        put_tensor(&mut out, &l.weight);
        put_tensor(&mut out, &l.bias);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let s = self
            .buf
            .get(self.pos..end)
            .ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self) -> Result<usize, CheckpointError> {
        Ok(self.u32()? as usize)
    }

    fn scalars<T: Scalar>(&mut self, n: usize) -> Result<Vec<T>, CheckpointError> {
        let bytes = self.take(n.checked_mul(T::BYTES).ok_or(CheckpointError::Truncated)?)?;
        Ok(bytes.chunks_exact(T::BYTES).map(T::read_le).collect())
    }

    fn tensor<T: Scalar>(&mut self) -> Result<Tensor<T>, CheckpointError> {
        let rank = self.len()?;
        if rank > 8 {
            return Err(CheckpointError::Malformed(format!("tensor rank {rank}")));
        }
        let shape = (0..rank)
            .map(|_| usize::try_from(self.u64()?).map_err(|_| CheckpointError::Truncated))
            .collect::<Result<Vec<_>, CheckpointError>>()?;
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or(CheckpointError::Truncated)?;
        let data = self.scalars(n)?;
        Tensor::new(shape, data).map_err(|e| CheckpointError::Malformed(e.to_string()))
    }
}

/// Decodes a checkpoint. The checksum is verified before any field is parsed,
/// so a corrupted file never yields a partial model.
pub fn checkpoint_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<Checkpoint<T>, CheckpointError> {
    if bytes.len() < MAGIC.len() + 4 + 1 + DIGEST_LEN {
        return Err(CheckpointError::Truncated);
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(CheckpointError::Checksum);
    }
    let mut c = Cursor { buf: body, pos: 0 };
    if c.take(MAGIC.len())? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let tag = c.take(1)?[0];
    if tag != T::TAG {
        return Err(CheckpointError::ScalarWidth {
            found: tag,
            expected: T::TAG,
        });
    }
    let meta_len = c.len()?;
    let meta: Meta = serde_json::from_slice(c.take(meta_len)?)
        .map_err(|e| CheckpointError::Malformed(format!("metadata: {e}")))?;
    let n = c.len()?;
    let mean = c.scalars(n)?;
    let std = c.scalars(n)?;
    let layers = (0..c.len()?)
        .map(|_| {
            let name_len = c.len()?;
            let name = String::from_utf8(c.take(name_len)?.to_vec())
                .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
            Ok(LayerParams {
                name,
                weight: c.tensor()?,
                bias: c.tensor()?,
            })
        })
        .collect::<Result<Vec<_>, CheckpointError>>()?;
    if c.pos != body.len() {
        return Err(CheckpointError::Malformed("trailing bytes".into()));
    }
    Ok(Checkpoint {
        model_cfg: meta.model,
        params: ParamStore { layers },
        label_maps: meta.label_maps,
        scaler: ScalerParams { mean, std },
        train_cfg: meta.train,
        mapping: meta.mapping,
    })
}

pub fn save_checkpoint<T: Scalar>(
    ck: &Checkpoint<T>,
    path: impl AsRef<Path>,
) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint_to_bytes(ck)).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_checkpoint<T: Scalar>(
    path: impl AsRef<Path>,
) -> Result<Checkpoint<T>, CheckpointError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    checkpoint_from_bytes(&bytes)
}
