//! Versioned binary model persistence.
//!
//! Layout (all little-endian): magic `WCM1`, layer dims, the training
//! config, every weight as an f64, then the input and target normalization
//! statistics captured at training time. Load followed by save reproduces
//! the original bytes exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::preprocess::NormStats;

use super::{NetConfig, NeuralNet};

const MAGIC: &[u8; 4] = b"WCM1";
/// Upper bound on layer sizes accepted by the decoder; real models are
/// orders of magnitude smaller, anything above this is a corrupt file.
const MAX_DIM: u32 = 1 << 20;

/// A trained network bundled with the normalization statistics it was
/// trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub net: NeuralNet,
    pub input_stats: NormStats,
    pub target_stats: NormStats,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFormat("truncated file".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn encode_stats(out: &mut Vec<u8>, stats: &NormStats) {
    push_u32(out, stats.ranges.len() as u32);
    push_f64(out, stats.lo);
    push_f64(out, stats.hi);
    for &(min, max) in &stats.ranges {
        push_f64(out, min);
        push_f64(out, max);
    }
}

fn decode_stats(cur: &mut Cursor<'_>, what: &str) -> Result<NormStats> {
    let n = cur.u32()?;
    if n == 0 || n > MAX_DIM {
        return Err(Error::ModelFormat(format!(
            "{what} stats feature count {n} out of range"
        )));
    }
    let lo = cur.f64()?;
    let hi = cur.f64()?;
    let mut ranges = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let min = cur.f64()?;
        let max = cur.f64()?;
        ranges.push((min, max));
    }
    Ok(NormStats { ranges, lo, hi })
}

impl ModelArtifact {
    pub fn encode(&self) -> Vec<u8> {
        let net = &self.net;
        let c = &net.config;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        push_u32(&mut out, c.input_dim as u32);
        push_u32(&mut out, c.hidden_dim as u32);
        push_f64(&mut out, c.learning_rate);
        push_u64(&mut out, c.max_epochs as u64);
        push_f64(&mut out, c.target_error);
        push_u64(&mut out, c.seed);
        push_f64(&mut out, c.weight_init_range);
        for row in &net.w {
            for &w in row {
                push_f64(&mut out, w);
            }
        }
        for &b in &net.hidden_bias {
            push_f64(&mut out, b);
        }
        for &v in &net.v {
            push_f64(&mut out, v);
        }
        push_f64(&mut out, net.output_bias);
        encode_stats(&mut out, &self.input_stats);
        encode_stats(&mut out, &self.target_stats);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { buf: bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::ModelFormat("bad magic; not a model file".into()));
        }
        let input_dim = cur.u32()?;
        let hidden_dim = cur.u32()?;
        if input_dim == 0 || input_dim > MAX_DIM || hidden_dim == 0 || hidden_dim > MAX_DIM {
            return Err(Error::ModelFormat(format!(
                "layer dims {input_dim}x{hidden_dim} out of range"
            )));
        }
        // Reject sizes the buffer cannot possibly hold before allocating.
        let weight_count = input_dim as u64 * hidden_dim as u64 + 2 * hidden_dim as u64 + 1;
        if weight_count * 8 > bytes.len() as u64 {
            return Err(Error::ModelFormat("truncated file".into()));
        }
        let learning_rate = cur.f64()?;
        let max_epochs = cur.u64()?;
        let target_error = cur.f64()?;
        let seed = cur.u64()?;
        let weight_init_range = cur.f64()?;
        let config = NetConfig {
            input_dim: input_dim as usize,
            hidden_dim: hidden_dim as usize,
            learning_rate,
            max_epochs: max_epochs as usize,
            target_error,
            seed,
            weight_init_range,
        };
        let mut w = Vec::with_capacity(config.hidden_dim);
        for _ in 0..config.hidden_dim {
            w.push(cur.f64_vec(config.input_dim)?);
        }
        let hidden_bias = cur.f64_vec(config.hidden_dim)?;
        let v = cur.f64_vec(config.hidden_dim)?;
        let output_bias = cur.f64()?;
        let input_stats = decode_stats(&mut cur, "input")?;
        let target_stats = decode_stats(&mut cur, "target")?;
        if input_stats.n_features() != config.input_dim {
            return Err(Error::ModelFormat(format!(
                "input stats cover {} features but the net has {} inputs",
                input_stats.n_features(),
                config.input_dim
            )));
        }
        if target_stats.n_features() != 1 {
            return Err(Error::ModelFormat(format!(
                "target stats must cover exactly 1 column, got {}",
                target_stats.n_features()
            )));
        }
        if cur.pos != bytes.len() {
            return Err(Error::ModelFormat(format!(
                "{} trailing bytes after the model payload",
                bytes.len() - cur.pos
            )));
        }
        Ok(Self {
            net: NeuralNet {
                w,
                hidden_bias,
                v,
                output_bias,
                config,
                train_curve: Vec::new(),
            },
            input_stats,
            target_stats,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::decode(&bytes)
    }
}
