//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "MAULCKPT"
//! version    u32      1
//! algo       u8       agent tag
//! sections   u32      count, then per section:
//!   kind     u8       1 = network, 2 = table, 3 = counters
//!   name     u16 length + UTF-8 bytes
//!   network: u32 width count, u32 widths, u8 activation tag per layer,
//!            then f64 parameters (per layer: weights row-major, biases)
//!   table:   u32 rows, u32 cols, f64 entries row-major
//!   counters:u32 count, u64 values
//! digest     32 bytes SHA-256 of everything above
//! ```

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::agents::Algo;
use crate::error::{Error, Result};
use crate::nn::{Activation, Mlp};

pub const MAGIC: &[u8; 8] = b"MAULCKPT";
pub const VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

const KIND_MLP: u8 = 1;
const KIND_TABLE: u8 = 2;
const KIND_COUNTERS: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Mlp(Mlp<f64>),
    Table { rows: usize, cols: usize, data: Vec<f64> },
    Counters(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub algo: Algo,
    pub sections: Vec<(String, Section)>,
}

impl Checkpoint {
    pub fn new(algo: Algo) -> Self {
        Self { algo, sections: Vec::new() }
    }

    pub fn with(mut self, name: &str, section: Section) -> Self {
        self.sections.push((name.to_string(), section));
        self
    }

    fn section(&self, name: &str) -> Result<&Section> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::Checkpoint(format!("missing section `{name}`")))
    }

    pub fn mlp(&self, name: &str) -> Result<Mlp<f64>> {
        match self.section(name)? {
            Section::Mlp(m) => Ok(m.clone()),
            _ => Err(Error::Checkpoint(format!("section `{name}` is not a network"))),
        }
    }

    pub fn table(&self, name: &str) -> Result<(usize, usize, Vec<f64>)> {
        match self.section(name)? {
            Section::Table { rows, cols, data } => Ok((*rows, *cols, data.clone())),
            _ => Err(Error::Checkpoint(format!("section `{name}` is not a table"))),
        }
    }

    pub fn counters(&self, name: &str) -> Result<Vec<u64>> {
        match self.section(name)? {
            Section::Counters(c) => Ok(c.clone()),
            _ => Err(Error::Checkpoint(format!("section `{name}` is not a counter list"))),
        }
    }

    pub fn expect_algo(&self, algo: Algo) -> Result<()> {
        if self.algo != algo {
            return Err(Error::Checkpoint(format!("checkpoint holds a {} agent, expected {}", self.algo, algo)));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.algo.tag());
        out.extend_from_slice(&(self.sections.len() as u32).to_le_bytes());
        for (name, section) in &self.sections {
            let kind = match section {
                Section::Mlp(_) => KIND_MLP,
                Section::Table { .. } => KIND_TABLE,
                Section::Counters(_) => KIND_COUNTERS,
            };
            out.push(kind);
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            match section {
                Section::Mlp(m) => {
                    out.extend_from_slice(&(m.widths().len() as u32).to_le_bytes());
                    for w in m.widths() {
                        out.extend_from_slice(&(*w as u32).to_le_bytes());
                    }
                    out.extend(m.activations().iter().map(|a| a.tag()));
                    for p in m.params() {
                        out.extend_from_slice(&p.to_le_bytes());
                    }
                }
                Section::Table { rows, cols, data } => {
                    out.extend_from_slice(&(*rows as u32).to_le_bytes());
                    out.extend_from_slice(&(*cols as u32).to_le_bytes());
                    for x in data {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                }
                Section::Counters(c) => {
                    out.extend_from_slice(&(c.len() as u32).to_le_bytes());
                    for x in c {
                        out.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(digest.as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 4 + 1 + 4 + DIGEST_LEN {
            return Err(Error::Checkpoint("file truncated".into()));
        }
        if &bytes[..8] != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}, expected {VERSION}")));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Integrity);
        }
        let mut r = Reader { buf: body, pos: 12 };
        let algo = Algo::from_tag(r.u8()?).ok_or_else(|| Error::Checkpoint("unknown agent tag".into()))?;
        let count = r.u32()? as usize;
        let mut sections = Vec::with_capacity(count);
        for _ in 0..count {
            let kind = r.u8()?;
            let name_len = r.u16()? as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec())
                .map_err(|_| Error::Checkpoint("section name is not UTF-8".into()))?;
            let section = match kind {
                KIND_MLP => {
                    let n = r.u32()? as usize;
                    let widths = (0..n).map(|_| r.u32().map(|w| w as usize)).collect::<Result<Vec<_>>>()?;
                    let acts = (0..n.saturating_sub(1))
                        .map(|_| {
                            let tag = r.u8()?;
                            Activation::from_tag(tag).ok_or_else(|| Error::Checkpoint(format!("unknown activation {tag}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let count: usize = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
                    let params = r.f64s(count)?;
                    Section::Mlp(Mlp::from_parts(widths, acts, params).map_err(|e| Error::Checkpoint(e.to_string()))?)
                }
                KIND_TABLE => {
                    let rows = r.u32()? as usize;
                    let cols = r.u32()? as usize;
                    Section::Table { rows, cols, data: r.f64s(rows * cols)? }
                }
                KIND_COUNTERS => {
                    let n = r.u32()? as usize;
                    Section::Counters((0..n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?)
                }
                other => return Err(Error::Checkpoint(format!("unknown section kind {other}"))),
            };
            sections.push((name, section));
        }
        if r.pos != body.len() {
            return Err(Error::Checkpoint("trailing bytes after last section".into()));
        }
        Ok(Self { algo, sections })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingCheckpoint(path.to_path_buf()));
        }
        Self::from_bytes(&fs::read(path)?)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint("file truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("size overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}
