//! Built-in surface catalog and catalog-file loading.
//!
//! Catalog files are TOML or JSON lists of named polynomial graph functions:
//! each entry carries `name`, a coefficient list `[[i, j, c], ...]` meaning
//! `sum c u^i v^j`, and a `domain_radius`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField2;
use crate::surface::SurfacePatch;

pub const BUILTIN_NAMES: &[&str] = &[
    "paraboloid",
    "fold-cubic",
    "cusp-standard",
    "quartic-normal",
    "monkey-saddle",
    "perturbed-fold",
];

/// Default domain radius for catalog entries.
pub const DEFAULT_RADIUS: f64 = 0.1;

pub fn builtin(name: &str) -> Result<SurfacePatch> {
    let terms: Vec<(u32, u32, f64)> = match name {
        "paraboloid" => vec![(2, 0, 1.0), (0, 2, 1.0)],
        "fold-cubic" => vec![(0, 2, 1.0), (3, 0, 1.0)],
        "cusp-standard" => vec![(0, 2, 1.0), (2, 1, 1.0)],
        "quartic-normal" => vec![(0, 2, 1.0), (4, 0, 1.0)],
        "monkey-saddle" => vec![(3, 0, 1.0), (1, 2, -3.0)],
        "perturbed-fold" => vec![(0, 2, 1.0), (3, 0, 1.0), (4, 0, 1.0), (0, 3, 0.1)],
        _ => return Err(Error::UnknownSurface(name.to_string())),
    };
    Ok(SurfacePatch::new(ScalarField2::poly(terms), DEFAULT_RADIUS))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub name: String,
    /// `[[i, j, c], ...]` meaning `sum c_ij u^i v^j`.
    pub coefficients: Vec<(u32, u32, f64)>,
    pub domain_radius: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogFile {
    pub surfaces: Vec<CatalogEntry>,
}

impl CatalogFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parsed: CatalogFile = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        for entry in &parsed.surfaces {
            if entry.domain_radius <= 0.0 {
                return Err(Error::Config(format!(
                    "surface {}: domain_radius must be positive",
                    entry.name
                )));
            }
        }
        Ok(parsed)
    }

    pub fn get(&self, name: &str) -> Result<SurfacePatch> {
        let entry = self
            .surfaces
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownSurface(name.to_string()))?;
        Ok(SurfacePatch::new(
            ScalarField2::poly(entry.coefficients.iter().copied()),
            entry.domain_radius,
        ))
    }
}

/// Resolve a surface from the built-in catalog or an optional catalog file.
pub fn resolve(name: &str, catalog_path: Option<&Path>) -> Result<SurfacePatch> {
    if let Some(path) = catalog_path {
        let file = CatalogFile::load(path)?;
        if let Ok(p) = file.get(name) {
            return Ok(p);
        }
    }
    builtin(name)
}
