//! TOML description of a synthetic sequence. Every key is optional.
//!
//! ```toml
//! n = 200
//! m = 80
//! topology_seed = 1
//! mu0 = 0.1
//! mu_min = 1e-7
//! reduction = 0.2
//! delta_p = 1e-8
//! delta_d = 1e-8
//! y_seed = 2
//! systems = 10
//! active_fraction = 0.2
//! ```

use std::path::Path;

use anyhow::{Context, Result};
use kktlu::kkt::SequenceConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub topology_seed: Option<u64>,
    pub mu0: Option<f64>,
    pub mu_min: Option<f64>,
    pub reduction: Option<f64>,
    pub delta_p: Option<f64>,
    pub delta_d: Option<f64>,
    pub y_seed: Option<u64>,
    pub systems: Option<usize>,
    pub active_fraction: Option<f64>,
}

impl GenConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set here win over `base`.
    pub fn apply(&self, base: SequenceConfig) -> SequenceConfig {
        SequenceConfig {
            n: self.n.unwrap_or(base.n),
            m: self.m.unwrap_or(base.m),
            topology_seed: self.topology_seed.unwrap_or(base.topology_seed),
            mu0: self.mu0.unwrap_or(base.mu0),
            mu_min: self.mu_min.unwrap_or(base.mu_min),
            reduction: self.reduction.unwrap_or(base.reduction),
            delta_p: self.delta_p.unwrap_or(base.delta_p),
            delta_d: self.delta_d.unwrap_or(base.delta_d),
            y_seed: self.y_seed.unwrap_or(base.y_seed),
            systems: self.systems.or(base.systems),
            active_fraction: self.active_fraction.unwrap_or(base.active_fraction),
        }
    }
}
