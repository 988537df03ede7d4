//! Versioned binary checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic          5 bytes  "RSFT1"
//! kind           u32 length + utf-8 ("ff" | "m1" | "m2" | "semigan")
//! config         5 x u64  (signal_len, num_classes, z1_dim, z2_dim, z_gan_dim)
//! n_params       u64
//! per parameter, in name-sorted order:
//!   name         u32 length + utf-8
//!   trainable    u8
//!   ndim         u32, then ndim x u64 dims
//!   data         len x f64 raw bits
//! n_opt_states   u64
//! per optimizer state:
//!   tag          u32 length + utf-8
//!   t            u64
//!   n_moments    u64
//!   per moment:  name (u32 + utf-8), then 2 x len x f64 (m then v);
//!                the length comes from the parameter with that name
//! ```

use std::path::Path;

use thiserror::Error;

use crate::models::ModelConfig;
use crate::nn::{AdamState, ParameterSet, Tensor};

const MAGIC: &[u8; 5] = b"RSFT1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ff,
    M1,
    M2,
    SemiGan,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ff => "ff",
            ModelKind::M1 => "m1",
            ModelKind::M2 => "m2",
            ModelKind::SemiGan => "semigan",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "ff" => Some(ModelKind::Ff),
            "m1" => Some(ModelKind::M1),
            "m2" => Some(ModelKind::M2),
            "semigan" => Some(ModelKind::SemiGan),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub kind: ModelKind,
    pub cfg: ModelConfig,
    pub params: ParameterSet,
    pub opt: Vec<(String, AdamState)>,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic bytes")]
    BadMagic,
    #[error("unknown model kind {0:?}")]
    BadKind(String),
    #[error("truncated or corrupt checkpoint ({0})")]
    Truncated(&'static str),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer {
            buf: Vec::with_capacity(1 << 16),
        }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Truncated(what));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self, what: &'static str) -> Result<u8, CheckpointError> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &'static str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &'static str) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn str(&mut self, what: &'static str) -> Result<String, CheckpointError> {
        let n = self.u32(what)? as usize;
        let bytes = self.take(n, what)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CheckpointError::Truncated(what))
    }
    fn f64s(&mut self, n: usize, what: &'static str) -> Result<Vec<f64>, CheckpointError> {
        let bytes = self.take(n * 8, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

impl Checkpoint {
    pub fn new(kind: ModelKind, cfg: ModelConfig, params: ParameterSet) -> Self {
        Checkpoint {
            kind,
            cfg,
            params,
            opt: Vec::new(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.buf.extend_from_slice(MAGIC);
        w.str(self.kind.as_str());
        for v in [
            self.cfg.signal_len,
            self.cfg.num_classes,
            self.cfg.z1_dim,
            self.cfg.z2_dim,
            self.cfg.z_gan_dim,
        ] {
            w.u64(v as u64);
        }
        w.u64(self.params.len() as u64);
        for (name, p) in self.params.iter() {
            w.str(name);
            w.u8(p.trainable as u8);
            w.u32(p.value.shape().len() as u32);
            for &d in p.value.shape() {
                w.u64(d as u64);
            }
            w.f64s(p.value.data());
        }
        w.u64(self.opt.len() as u64);
        for (tag, state) in &self.opt {
            w.str(tag);
            w.u64(state.t);
            w.u64(state.moments.len() as u64);
            for (name, (m, v)) in &state.moments {
                w.str(name);
                w.f64s(m.data());
                w.f64s(v.data());
            }
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(5, "magic").map(|m| m != MAGIC).unwrap_or(true) {
            return Err(CheckpointError::BadMagic);
        }
        let kind_str = r.str("kind")?;
        let kind = ModelKind::parse(&kind_str).ok_or(CheckpointError::BadKind(kind_str))?;
        let mut dims = [0usize; 5];
        for d in &mut dims {
            *d = r.u64("config")? as usize;
        }
        let cfg = ModelConfig {
            signal_len: dims[0],
            num_classes: dims[1],
            z1_dim: dims[2],
            z2_dim: dims[3],
            z_gan_dim: dims[4],
        };
        let n_params = r.u64("param count")? as usize;
        let mut params = ParameterSet::new();
        for _ in 0..n_params {
            let name = r.str("param name")?;
            let trainable = r.u8("trainable flag")? != 0;
            let ndim = r.u32("ndim")? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(r.u64("dim")? as usize);
            }
            let len: usize = shape.iter().product();
            let data = r.f64s(len, "param data")?;
            let t = Tensor::new(shape, data);
            if trainable {
                params.insert(&name, t);
            } else {
                params.insert_buffer(&name, t);
            }
        }
        let n_opt = r.u64("opt count")? as usize;
        let mut opt = Vec::with_capacity(n_opt);
        for _ in 0..n_opt {
            let tag = r.str("opt tag")?;
            let t = r.u64("opt t")?;
            let n_moments = r.u64("moment count")? as usize;
            let mut state = AdamState::new();
            state.t = t;
            for _ in 0..n_moments {
                let name = r.str("moment name")?;
                if !params.contains(&name) {
                    return Err(CheckpointError::Truncated("moment for unknown parameter"));
                }
                let shape = params.value(&name).shape().to_vec();
                let len: usize = shape.iter().product();
                let m = Tensor::new(shape.clone(), r.f64s(len, "moment m")?);
                let v = Tensor::new(shape, r.f64s(len, "moment v")?);
                state.moments.insert(name, (m, v));
            }
            opt.push((tag, state));
        }
        Ok(Checkpoint {
            kind,
            cfg,
            params,
            opt,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
        let bytes = std::fs::read(path)?;
        Checkpoint::from_bytes(&bytes)
    }
}
