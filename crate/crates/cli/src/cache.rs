//! On-disk cache of per-`P` spectrum reports.
//!
//! Keys are SHA-256 over the model parameters, spectral options, extra trial
//! wavevectors and `P` rounded to 1e-12. Values go through JSON with
//! round-trip float parsing, so a hit reproduces the stored report exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use srpf_core::spectral::{SpectralOptions, SpectrumReport};
use srpf_core::{ModelParams, Vec3};

pub fn quantize(p: &Vec3) -> [i64; 3] {
    std::array::from_fn(|j| (p[j] * 1e12).round() as i64)
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    version: &'static str,
    params: &'a ModelParams,
    spectral: &'a SpectralOptions,
    trial_extra: &'a [[i64; 3]],
    p: [i64; 3],
}

/// Hashes everything except `P` once; [`CacheKeyer::key`] appends `P`.
pub struct CacheKeyer {
    params: ModelParams,
    spectral: SpectralOptions,
    trial_extra: Vec<[i64; 3]>,
}

impl CacheKeyer {
    pub fn new(params: &ModelParams, spectral: &SpectralOptions, trial_extra: &[Vec3]) -> Self {
        CacheKeyer {
            params: params.clone(),
            spectral: spectral.clone(),
            trial_extra: trial_extra.iter().map(quantize).collect(),
        }
    }

    pub fn key(&self, p: &Vec3) -> String {
        let material = KeyMaterial {
            version: env!("CARGO_PKG_VERSION"),
            params: &self.params,
            spectral: &self.spectral,
            trial_extra: &self.trial_extra,
            p: quantize(p),
        };
        let bytes = serde_json::to_vec(&material).expect("key material serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Default)]
pub struct ResultCache {
    path: Option<PathBuf>,
    entries: RwLock<BTreeMap<String, SpectrumReport>>,
    dirty: RwLock<bool>,
}

impl ResultCache {
    /// In-memory cache that is never persisted.
    pub fn ephemeral() -> Self {
        ResultCache::default()
    }

    /// Opens the cache file, starting empty if it does not exist yet.
    pub fn open(path: &Path) -> Result<Self> {
        let entries = if path.exists() {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading cache {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing cache {}", path.display()))?
        } else {
            BTreeMap::new()
        };
        Ok(ResultCache {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            dirty: RwLock::new(false),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<SpectrumReport> {
        self.entries.read().unwrap().get(key).cloned()
    }

    pub fn insert(&self, key: String, report: SpectrumReport) {
        self.entries.write().unwrap().insert(key, report);
        *self.dirty.write().unwrap() = true;
    }

    /// Writes the cache back if anything was inserted.
    pub fn flush(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        if !*self.dirty.read().unwrap() {
            return Ok(());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(&*self.entries.read().unwrap())?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).with_context(|| format!("writing cache {}", tmp.display()))?;
        std::fs::rename(&tmp, path)?;
        *self.dirty.write().unwrap() = false;
        Ok(())
    }
}
