//! Configuration file (TOML). Holds every model parameter; command-line
//! flags only select scope.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoders::{EncoderParams, Method, PermutationTable};
use crate::error::{Error, Result};
use crate::kpi::{
    ClassMix, CorrelationModel, CorrelationPair, NoiseConfig, NormalizationBounds, ProfileTable,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    pub pairs: Vec<CorrelationPair>,
}

impl Default for CorrelationSection {
    fn default() -> Self {
        CorrelationSection {
            pairs: CorrelationPair::defaults(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub image_side: usize,
    pub methods: Vec<Method>,
    pub class_mix: ClassMix,
    pub noise: NoiseConfig,
    pub profiles: ProfileTable,
    pub correlation: CorrelationSection,
    /// Normalization bounds; derived from `profiles` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<NormalizationBounds>,
    pub encoders: EncoderParams,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 20_250_101,
            image_side: 16,
            methods: Method::ALL.to_vec(),
            class_mix: ClassMix::default(),
            noise: NoiseConfig::default(),
            profiles: ProfileTable::default(),
            correlation: CorrelationSection::default(),
            bounds: None,
            encoders: EncoderParams::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| locate_key(text, s.start))
                .unwrap_or_else(|| "<root>".to_string());
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical text form. Bounds are always written out so the file fully
    /// determines the run.
    pub fn to_toml(&self) -> String {
        let mut resolved = self.clone();
        resolved.bounds = Some(self.bounds());
        toml::to_string(&resolved).expect("config is always serializable")
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn bounds(&self) -> NormalizationBounds {
        self.bounds
            .clone()
            .unwrap_or_else(|| NormalizationBounds::from_profiles(&self.profiles))
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_side < 4 {
            return Err(Error::config("image_side", "must be >= 4"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method must be enabled"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::config("methods", format!("`{m}` listed twice")));
            }
        }
        self.class_mix.validate()?;
        self.noise.validate()?;
        self.profiles.validate()?;
        self.bounds().validate()?;
        CorrelationModel::from_pairs(&self.correlation.pairs)?;
        self.encoders.validate()
    }

    /// Resolves the immutable runtime model.
    pub fn build(&self) -> Result<Model> {
        self.validate()?;
        Ok(Model {
            correlation: CorrelationModel::from_pairs(&self.correlation.pairs)?,
            bounds: self.bounds(),
            permutation: PermutationTable::from_seed(self.seed),
        })
    }
}

/// Derived, shareable runtime objects.
#[derive(Clone, Debug)]
pub struct Model {
    pub correlation: CorrelationModel,
    pub bounds: NormalizationBounds,
    pub permutation: PermutationTable,
}

/// Best-effort dotted key path for an error at byte `offset`.
fn locate_key(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let table = before
        .lines()
        .rev()
        .find_map(|l| {
            let l = l.trim();
            (l.starts_with('[') && !l.starts_with("[[")).then(|| l.trim_matches(|c| c == '[' || c == ']').to_string())
        });
    let line = text[before.rfind('\n').map_or(0, |i| i + 1)..]
        .lines()
        .next()
        .unwrap_or("");
    let key = line.split('=').next().map(str::trim).filter(|k| !k.is_empty() && !k.starts_with('['));
    match (table, key) {
        (Some(t), Some(k)) => format!("{t}.{k}"),
        (Some(t), None) => t,
        (None, Some(k)) => k.to_string(),
        (None, None) => "<root>".to_string(),
    }
}
