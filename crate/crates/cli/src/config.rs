//! Input files and the resolved run configuration.
//!
//! Two JSON inputs drive every subcommand: the model file (Hamiltonian
//! `h + eps f` on a ball domain, schema in the core crate) and the profile
//! file (steepness indices, coefficients, radius, analyticity width, and an
//! optional explicit envelope that bypasses the sampled one).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nekhoroshev_core::constants::AnalyticityEnvelope;
use nekhoroshev_core::model::{envelope, EnvelopeOptions, HamiltonianModel};
use nekhoroshev_core::steepness::SteepnessProfile;
use serde::{Deserialize, Serialize};

use crate::jsonfmt;

/// Explicit envelope values; when present they are trusted as-is.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub lipschitz_m: f64,
    pub f_norm: f64,
}

/// On-disk profile schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub n: usize,
    pub alphas: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub delta: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeSpec>,
}

pub fn load_model(path: &Path) -> Result<HamiltonianModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading model file {}", path.display()))?;
    HamiltonianModel::from_json_str(&text)
        .with_context(|| format!("parsing model file {}", path.display()))
}

pub fn load_profile(path: &Path) -> Result<(SteepnessProfile, ProfileSpec)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading profile file {}", path.display()))?;
    let spec: ProfileSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing profile file {}", path.display()))?;
    if !(spec.sigma > 0.0) {
        bail!("profile sigma must be positive, got {}", spec.sigma);
    }
    let profile =
        SteepnessProfile::new(spec.n, spec.alphas.clone(), spec.coeffs.clone(), spec.delta)
            .context("validating steepness profile")?;
    Ok((profile, spec))
}

/// Envelope from the profile when given explicitly, otherwise sampled from
/// the model.
pub fn resolve_envelope(
    model: &HamiltonianModel,
    profile: &SteepnessProfile,
    spec: &ProfileSpec,
) -> Result<AnalyticityEnvelope> {
    match &spec.envelope {
        Some(e) => Ok(AnalyticityEnvelope::new(
            spec.sigma,
            e.omega_min,
            e.omega_max,
            e.lipschitz_m,
            e.f_norm,
            vec![],
        )?),
        None => Ok(envelope(
            &model.h,
            &model.f,
            &model.domain,
            profile.delta,
            spec.sigma,
            &EnvelopeOptions::default(),
        )?),
    }
}

/// The resolved configuration of one invocation; hashed into every report
/// header so identical runs are recognizable.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_path: Option<PathBuf>,
    /// Descending perturbation-size grid.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eps_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub seed: u64,
    pub budget: u128,
    /// Subcommand-specific scalar knobs, name -> value.
    pub options: std::collections::BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn new(subcommand: &str, seed: u64, budget: u128) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            model_path: None,
            profile_path: None,
            eps_grid: Vec::new(),
            k: None,
            margin: None,
            seed,
            budget,
            options: Default::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            bail!("budget must be positive");
        }
        for w in self.eps_grid.windows(2) {
            if !(w[1] < w[0]) {
                bail!("eps grid must be strictly descending: {:?}", self.eps_grid);
            }
        }
        if let Some(e) = self.eps_grid.iter().find(|&&e| !(e > 0.0)) {
            bail!("eps values must be positive, got {e}");
        }
        for p in [&self.model_path, &self.profile_path].into_iter().flatten() {
            if !p.exists() {
                bail!("referenced file does not exist: {}", p.display());
            }
        }
        Ok(())
    }

    pub fn hash(&self) -> Result<String> {
        let canon = jsonfmt::to_canonical_string(self)?;
        Ok(jsonfmt::fnv1a_hex(canon.as_bytes()))
    }
}

/// Common header of every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportHeader {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl ReportHeader {
    pub fn for_config(config: &RunConfig) -> Result<Self> {
        Ok(Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash()?,
            seed: config.seed,
        })
    }
}

/// Parses a comma-separated list of floats.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid number '{tok}' in list '{s}'"))
        })
        .collect()
}
