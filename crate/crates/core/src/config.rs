//! Plain-text key-value configuration files: `key = value` lines with `#`
//! comments. Vectors are written as space-separated components
//! (`gravity = 0 0 -9.8`). Unknown keys are rejected so typos surface early.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::pbd::SimParams;
use crate::Vec3;

/// Parsed key-value file: keys mapped to raw value strings.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<KeyValues> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CoreError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<KeyValues> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    /// Remove and parse a scalar value.
    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| CoreError::Config(format!("key '{key}': bad number '{v}'"))),
        }
    }

    pub fn take_u32(&mut self, key: &str) -> Result<Option<u32>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<u32>()
                .map(Some)
                .map_err(|_| CoreError::Config(format!("key '{key}': bad integer '{v}'"))),
        }
    }

    pub fn take_vec3(&mut self, key: &str) -> Result<Option<Vec3>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => {
                let parts: Vec<f64> = v
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| {
                            CoreError::Config(format!("key '{key}': bad component '{t}'"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if parts.len() != 3 {
                    return Err(CoreError::Config(format!(
                        "key '{key}': expected 3 components, got {}",
                        parts.len()
                    )));
                }
                Ok(Some(Vec3::new(parts[0], parts[1], parts[2])))
            }
        }
    }

    /// All remaining entries as scalars, consuming them (for free-form maps
    /// like garment shape parameters).
    pub fn take_all_f64(&mut self) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        let keys: Vec<String> = self.entries.keys().cloned().collect();
        for k in keys {
            if let Some(v) = self.take_f64(&k)? {
                out.insert(k, v);
            }
        }
        Ok(out)
    }

    /// Error if any keys were never consumed.
    pub fn ensure_consumed(&self) -> Result<()> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<&String> = self.entries.keys().collect();
            Err(CoreError::Config(format!("unknown keys: {keys:?}")))
        }
    }
}

/// Apply overrides from a key-value set onto params (defaults stay for
/// anything absent). Consumes the keys it understands.
pub fn apply_sim_params(params: &mut SimParams, kv: &mut KeyValues) -> Result<()> {
    if let Some(v) = kv.take_f64("dt")? {
        params.dt = v;
    }
    if let Some(v) = kv.take_u32("substeps")? {
        params.substeps = v;
    }
    if let Some(v) = kv.take_u32("solver_iterations")? {
        params.solver_iterations = v;
    }
    if let Some(v) = kv.take_vec3("gravity")? {
        params.gravity = v;
    }
    if let Some(v) = kv.take_f64("stretch_stiffness")? {
        params.stretch_stiffness = v;
    }
    if let Some(v) = kv.take_f64("bend_stiffness")? {
        params.bend_stiffness = v;
    }
    if let Some(v) = kv.take_f64("damping")? {
        params.damping = v;
    }
    if let Some(v) = kv.take_f64("k_adh")? {
        params.k_adh = v;
    }
    if let Some(v) = kv.take_f64("r_adh")? {
        params.r_adh = v;
    }
    if let Some(v) = kv.take_f64("mu")? {
        params.mu = v;
    }
    if let Some(v) = kv.take_f64("particle_adhesion_scale")? {
        params.particle_adhesion_scale = v;
    }
    if let Some(v) = kv.take_f64("particle_friction_scale")? {
        params.particle_friction_scale = v;
    }
    if let Some(v) = kv.take_f64("particle_radius")? {
        params.particle_radius = v;
    }
    if let Some(v) = kv.take_f64("collision_margin")? {
        params.collision_margin = v;
    }
    params.validate()
}

/// Load sim params from a file, starting from defaults. Keys not consumed by
/// `SimParams` are an error here; pipeline configs with extra keys should
/// parse and route the `KeyValues` themselves.
pub fn load_sim_params(path: &Path) -> Result<SimParams> {
    let mut kv = KeyValues::load(path)?;
    let mut params = SimParams::default();
    apply_sim_params(&mut params, &mut kv)?;
    kv.ensure_consumed()?;
    Ok(params)
}
