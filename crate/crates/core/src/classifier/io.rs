//! Versioned binary model container. Layout: magic, version, model kind,
//! embedding checksum, shape fields, then all parameters as little-endian
//! f64. Loading verifies the embedding checksum against the table supplied.

use std::sync::Arc;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::text::{Document, LabeledExample};

use super::{BagOfEmbeddingsModel, ChunkedPoolingModel, ClassifierModel, TrainableModel};

const MAGIC: &[u8; 4] = b"ATXM";
const VERSION: u16 = 1;
const KIND_BAG: u8 = 0;
const KIND_CHUNKED: u8 = 1;

/// Either of the two trainable classifiers, for storage and CLI dispatch.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Bag(BagOfEmbeddingsModel),
    Chunked(ChunkedPoolingModel),
}

impl ClassifierModel for AnyModel {
    fn class_count(&self) -> usize {
        match self {
            AnyModel::Bag(m) => m.class_count(),
            AnyModel::Chunked(m) => m.class_count(),
        }
    }

    fn predict_proba(&self, doc: &Document) -> Vec<f64> {
        match self {
            AnyModel::Bag(m) => m.predict_proba(doc),
            AnyModel::Chunked(m) => m.predict_proba(doc),
        }
    }
}

impl TrainableModel for AnyModel {
    fn param_count(&self) -> usize {
        match self {
            AnyModel::Bag(m) => m.param_count(),
            AnyModel::Chunked(m) => m.param_count(),
        }
    }

    fn params(&self) -> Vec<f64> {
        match self {
            AnyModel::Bag(m) => m.params(),
            AnyModel::Chunked(m) => m.params(),
        }
    }

    fn set_params(&mut self, params: &[f64]) {
        match self {
            AnyModel::Bag(m) => m.set_params(params),
            AnyModel::Chunked(m) => m.set_params(params),
        }
    }

    fn loss_and_grad(&self, batch: &[(&LabeledExample, f64)]) -> (f64, Vec<f64>) {
        match self {
            AnyModel::Bag(m) => m.loss_and_grad(batch),
            AnyModel::Chunked(m) => m.loss_and_grad(batch),
        }
    }
}

impl AnyModel {
    pub fn table(&self) -> &Arc<EmbeddingTable> {
        match self {
            AnyModel::Bag(m) => m.table(),
            AnyModel::Chunked(m) => m.table(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyModel::Bag(_) => "bag",
            AnyModel::Chunked(_) => "chunked",
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn str(&mut self, s: &str) {
        self.u16(s.len() as u16);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::CorruptModel(format!(
                "unexpected end of stream at byte {}",
                self.pos
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec())
            .map_err(|e| Error::CorruptModel(format!("bad checksum string: {e}")))
    }
}

pub fn save_model(model: &AnyModel) -> Vec<u8> {
    let mut w = Writer(MAGIC.to_vec());
    w.u16(VERSION);
    w.0.push(match model {
        AnyModel::Bag(_) => KIND_BAG,
        AnyModel::Chunked(_) => KIND_CHUNKED,
    });
    w.str(model.table().checksum());
    w.u64(model.class_count() as u64);
    w.u64(model.table().dimension() as u64);
    match model {
        AnyModel::Bag(m) => {
            w.u64(m.truncate_last().map(|t| t as u64).unwrap_or(u64::MAX));
        }
        AnyModel::Chunked(m) => {
            w.u64(m.chunk_size() as u64);
            w.u64(m.overlap() as u64);
            w.u64(m.filter_count() as u64);
            w.u64(m.filter_width() as u64);
        }
    }
    w.f64s(&model.params());
    w.0
}

pub fn load_model(bytes: &[u8], table: Arc<EmbeddingTable>) -> Result<AnyModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::CorruptModel("bad magic bytes".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::ModelVersion {
            found: version,
            expected: VERSION,
        });
    }
    let kind = r.u8()?;
    let checksum = r.str()?;
    if checksum != table.checksum() {
        return Err(Error::ChecksumMismatch {
            expected: checksum,
            found: table.checksum().to_string(),
        });
    }
    let class_count = r.u64()? as usize;
    let dim = r.u64()? as usize;
    if dim != table.dimension() {
        return Err(Error::CorruptModel(format!(
            "model dimension {dim} does not match table dimension {}",
            table.dimension()
        )));
    }
    let model = match kind {
        KIND_BAG => {
            let trunc = r.u64()?;
            let truncate_last = if trunc == u64::MAX {
                None
            } else {
                Some(trunc as usize)
            };
            let weights = r.f64s(class_count * dim)?;
            let bias = r.f64s(class_count)?;
            AnyModel::Bag(BagOfEmbeddingsModel::from_parts(
                table,
                class_count,
                truncate_last,
                weights,
                bias,
            ))
        }
        KIND_CHUNKED => {
            let chunk_size = r.u64()? as usize;
            let overlap = r.u64()? as usize;
            let filter_count = r.u64()? as usize;
            let filter_width = r.u64()? as usize;
            let n =
                filter_count * filter_width * dim + filter_count + class_count * filter_count
                    + class_count;
            let params = r.f64s(n)?;
            AnyModel::Chunked(ChunkedPoolingModel::from_parts(
                table,
                class_count,
                chunk_size,
                overlap,
                filter_count,
                filter_width,
                &params,
            ))
        }
        other => return Err(Error::CorruptModel(format!("unknown model kind {other}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::CorruptModel(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(model)
}
