//! On-disk cache of GN constants, one JSON map per crate version.

use std::collections::BTreeMap;
use std::path::PathBuf;

use cnls_core::criteria::ModelConstants;
use cnls_core::gn::{gn_constant_on, GnConstants};
use cnls_core::grid::RadialGridSpec;
use cnls_core::params::{Dim, Exponent, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const CACHE_ENV: &str = "CNLS_CACHE_DIR";

/// Where a constant came from; goes into every envelope.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantRecord {
    pub key: String,
    pub cached: bool,
    pub constants: GnConstants<f64>,
}

#[derive(Debug)]
pub struct GnCache {
    file: Option<PathBuf>,
    entries: BTreeMap<String, GnConstants<f64>>,
    dirty: bool,
    pub used: Vec<ConstantRecord>,
}

fn cache_dir() -> Option<PathBuf> {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    var(CACHE_ENV)
        .or_else(|| var("XDG_CACHE_HOME").map(|d| d.join("cnls")))
        .or_else(|| var("HOME").map(|d| d.join(".cache").join("cnls")))
}

fn key(dim: Dim, p: &Exponent<f64>, grid: &RadialGridSpec<f64>) -> String {
    format!("N={dim};p={p};points={};radius={}", grid.points, grid.radius)
}

impl GnCache {
    /// Opens the cache for this version. An unreadable file is treated as empty.
    pub fn open() -> Self {
        let file = cache_dir().map(|d| d.join(format!("gn-v{}.json", env!("CARGO_PKG_VERSION"))));
        let entries = file
            .as_deref()
            .and_then(|f| std::fs::read_to_string(f).ok())
            .and_then(|s| serde_json::from_str(&s).ok())
            .unwrap_or_default();
        GnCache {
            file,
            entries,
            dirty: false,
            used: Vec::new(),
        }
    }

    pub fn get(&mut self, dim: Dim, p: &Exponent<f64>, grid: RadialGridSpec<f64>) -> Result<GnConstants<f64>> {
        let k = key(dim, p, &grid);
        let (constants, cached) = match self.entries.get(&k) {
            Some(c) => (*c, true),
            None => {
                let c = gn_constant_on(dim, p, grid)?;
                self.entries.insert(k.clone(), c);
                self.dirty = true;
                (c, false)
            }
        };
        if !self.used.iter().any(|r| r.key == k) {
            self.used.push(ConstantRecord {
                key: k,
                cached,
                constants,
            });
        }
        Ok(constants)
    }

    /// Compute every missing default-grid constant in parallel.
    pub fn prefetch(&mut self, items: &[(Dim, Exponent<f64>)]) -> Result<()> {
        let grid = RadialGridSpec::default();
        let mut missing: Vec<(String, Dim, Exponent<f64>)> = Vec::new();
        for &(dim, p) in items {
            let k = key(dim, &p, &grid);
            if !self.entries.contains_key(&k) && !missing.iter().any(|m| m.0 == k) {
                missing.push((k, dim, p));
            }
        }
        let computed: Vec<_> = missing
            .into_par_iter()
            .map(|(k, dim, p)| (k, gn_constant_on(dim, &p, grid)))
            .collect();
        for (k, c) in computed {
            // failures resurface, with their category, when the row asks for them
            if let Ok(c) = c {
                self.entries.insert(k, c);
                self.dirty = true;
            }
        }
        Ok(())
    }

    pub fn model_constants(&mut self, params: &ModelParams<f64>) -> Result<ModelConstants<f64>> {
        Ok(ModelConstants {
            q: self.get(params.dim, &params.q, RadialGridSpec::default())?,
            p: self.get(params.dim, &params.p, RadialGridSpec::default())?,
        })
    }

    /// Write new entries through a temporary file and a rename.
    pub fn save(&mut self) -> Result<()> {
        let Some(file) = self.file.as_deref().filter(|_| self.dirty) else {
            return Ok(());
        };
        if let Some(dir) = file.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let tmp = file.with_extension(format!("json.{}.tmp", std::process::id()));
        std::fs::write(&tmp, serde_json::to_vec_pretty(&self.entries)?).map_err(|e| CliError::io(&tmp, e))?;
        std::fs::rename(&tmp, file).map_err(|e| CliError::io(file, e))?;
        self.dirty = false;
        Ok(())
    }
}
