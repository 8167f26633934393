//! On-disk cache of Bessel zeros.
//!
//! One JSON file per zero kind holds every zero below a recorded `x_max`,
//! behind a format-version header. Files are replaced atomically (write to a
//! temporary file, then rename), so concurrent readers never observe a
//! partial table.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_j_zero, bessel_jp_zero, zeros_below, BesselZero, ZeroKind};
use crate::error::{Error, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;
/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "BFK_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "data/bessel-cache";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    kind: ZeroKind,
    x_max: f64,
    /// `(n, k, value)`.
    zeros: Vec<(usize, usize, f64)>,
}

/// Result of [`BesselZeroCache::verify`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheAudit {
    pub checked: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct BesselZeroCache {
    dir: PathBuf,
}

impl BesselZeroCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Directory from `BFK_CACHE_DIR`, else `data/bessel-cache`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR), PathBuf::from))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, kind: ZeroKind) -> PathBuf {
        self.dir.join(match kind {
            ZeroKind::J => "bessel-j-zeros.json",
            ZeroKind::JPrime => "bessel-jp-zeros.json",
        })
    }

    fn load(&self, kind: ZeroKind) -> Result<Option<CacheFile>> {
        let path = self.path(kind);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let header: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::CacheCorrupt(format!("{}: {e}", path.display())))?;
        match header.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == CACHE_FORMAT_VERSION as u64 => {}
            other => {
                return Err(Error::CacheCorrupt(format!(
                    "{}: format_version {other:?}, expected {CACHE_FORMAT_VERSION}",
                    path.display()
                )))
            }
        }
        let file: CacheFile =
            serde_json::from_value(header).map_err(|e| Error::CacheCorrupt(format!("{}: {e}", path.display())))?;
        if file.kind != kind {
            return Err(Error::CacheCorrupt(format!("{} holds {:?} zeros", path.display(), file.kind)));
        }
        Ok(Some(file))
    }

    fn store(&self, file: &CacheFile) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(file.kind);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(file)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// All zeros of `kind` below `x_max`, read from the cache when it covers
    /// the range and computed (then stored) otherwise.
    pub fn zeros_below(&self, kind: ZeroKind, x_max: f64) -> Result<Vec<BesselZero>> {
        if let Some(file) = self.load(kind)? {
            if file.x_max >= x_max {
                return Ok(file
                    .zeros
                    .iter()
                    .filter(|z| z.2 < x_max)
                    .map(|&(n, k, value)| BesselZero { kind, n, k, value })
                    .collect());
            }
        }
        let zeros = zeros_below(kind, x_max)?;
        self.store(&CacheFile {
            format_version: CACHE_FORMAT_VERSION,
            kind,
            x_max,
            zeros: zeros.iter().map(|z| (z.n, z.k, z.value)).collect(),
        })?;
        Ok(zeros)
    }

    /// Precomputes both kinds of zeros below `x_max`.
    pub fn build(&self, x_max: f64) -> Result<usize> {
        let mut count = 0;
        for kind in [ZeroKind::J, ZeroKind::JPrime] {
            count += self.zeros_below(kind, x_max)?.len();
        }
        Ok(count)
    }

    /// Recomputes a random `fraction` of the cached zeros independently and
    /// compares them at relative tolerance 1e-13.
    pub fn verify(&self, fraction: f64, seed: u64) -> Result<CacheAudit> {
        let tolerance = 1e-13;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        let mut worst = 0.0f64;
        for kind in [ZeroKind::J, ZeroKind::JPrime] {
            let Some(file) = self.load(kind)? else { continue };
            if file.zeros.is_empty() {
                continue;
            }
            let count = ((file.zeros.len() as f64 * fraction).ceil() as usize).clamp(1, file.zeros.len());
            for idx in sample(&mut rng, file.zeros.len(), count).iter() {
                let (n, k, v) = file.zeros[idx];
                let fresh = match kind {
                    ZeroKind::J => bessel_j_zero(n, k),
                    ZeroKind::JPrime => bessel_jp_zero(n, k),
                };
                worst = worst.max(((fresh - v) / fresh).abs());
                checked += 1;
            }
        }
        Ok(CacheAudit {
            checked,
            max_relative_error: worst,
            tolerance,
            pass: worst <= tolerance,
        })
    }

    /// Removes the cache files (not the directory).
    pub fn clear(&self) -> Result<()> {
        for kind in [ZeroKind::J, ZeroKind::JPrime] {
            match fs::remove_file(self.path(kind)) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }
}
