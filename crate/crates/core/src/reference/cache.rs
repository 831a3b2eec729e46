//! Binary cache of reference fields, keyed by a hash of the parameters that
//! produced them.
//!
//! Layout (little endian): magic `ODREF`, `u8` version, `x_left`, `length`,
//! `t`, `u64` node count, then `m` pairs `(re, im)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, TorusGrid};

const MAGIC: &[u8; 5] = b"ODREF";
const VERSION: u8 = 1;

/// Directory of cached reference fields.
#[derive(Clone, Debug)]
pub struct ReferenceCache {
    dir: PathBuf,
}

/// Hex SHA-256 of a canonical description of a reference computation.
pub fn cache_key(description: &str) -> String {
    let digest = Sha256::digest(description.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Cache at `$OSCIDIFF_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os("OSCIDIFF_CACHE").map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.odref"))
    }

    pub fn store(&self, key: &str, t: f64, field: &ComplexField) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut buf = Vec::with_capacity(6 + 32 + 16 * field.values.len());
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        for v in [field.grid.x_left, field.grid.length, t] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&(field.values.len() as u64).to_le_bytes());
        for z in &field.values {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        // write then rename so readers never see a partial file
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(&tmp, self.path(key))?;
        Ok(())
    }

    /// The stored field and its time, or `None` if no entry exists.
    pub fn load(&self, key: &str) -> Result<Option<(f64, ComplexField)>> {
        let bytes = match fs::read(self.path(key)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        decode(&bytes).map(Some)
    }
}

fn decode(bytes: &[u8]) -> Result<(f64, ComplexField)> {
    let bad = |msg: &str| Error::Cache(msg.to_string());
    if bytes.len() < 38 || &bytes[..5] != MAGIC {
        return Err(bad("not a reference cache file"));
    }
    if bytes[5] != VERSION {
        return Err(bad("unsupported cache version"));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[6 + 8 * i..14 + 8 * i].try_into().unwrap());
    let (x_left, length, t) = (f(0), f(1), f(2));
    let m = u64::from_le_bytes(bytes[30..38].try_into().unwrap()) as usize;
    if bytes.len() != 38 + 16 * m {
        return Err(bad("truncated payload"));
    }
    let values = bytes[38..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap()))
        })
        .collect();
    Ok((t, ComplexField { grid: TorusGrid::new(x_left, length, m)?, values }))
}
