//! TOML run configuration.
//!
//! Sections mirror the library modules: `[system]`, `[channel]`,
//! `[scaling]`, `[precoding]` and `[sweep]`. Any key can be overridden after
//! parsing, either from the environment (`OTASEC__SWEEP__TRIALS=100`) or with
//! `key=value` pairs (`sweep.trials=100`). Override values are read as TOML
//! scalars or arrays and fall back to plain strings.

use std::path::{Path, PathBuf};

use otasec_core::channel::{rayleigh_mean_minus_std, rayleigh_mean_minus_std_quarter, ChannelProtocol};
use otasec_core::model::{isotropic_covariance, SystemConfig, SystemParams};
use otasec_core::precoding::PrecoderMethod;
use otasec_core::scaling::ScalingBound;
use otasec_core::sim::SweepSpec;
use otasec_core::DMatrix;
use serde::Deserialize;
use toml::{Table, Value};

pub const ENV_PREFIX: &str = "OTASEC__";

/// Trial count used by `--full`.
pub const FULL_TRIALS: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config")]
    Parse(#[from] toml::de::Error),
    #[error("bad override {0:?}: expected key=value with a dotted key such as sweep.trials")]
    Override(String),
    #[error("invalid value for {key}: {message}")]
    Value { key: &'static str, message: String },
}

fn value_error(key: &'static str, message: impl ToString) -> ConfigError {
    ConfigError::Value {
        key,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub system: SystemSection,
    pub channel: ChannelSection,
    pub scaling: ScalingSection,
    pub precoding: PrecodingSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CovarianceSpec {
    /// `"isotropic"` for `I/k`.
    Named(String),
    /// `k × k` entries, row-major.
    Entries(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub num_users: usize,
    pub dimension: usize,
    pub power_limit: f64,
    pub covariance: CovarianceSpec,
    pub sigma_y_sq: f64,
    pub sigma_z_sq: f64,
    pub sigma_h: f64,
    pub sigma_g: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            num_users: 10,
            dimension: 1,
            power_limit: 1.0,
            covariance: CovarianceSpec::Named("isotropic".into()),
            sigma_y_sq: 0.1,
            sigma_z_sq: 0.0,
            sigma_h: 1.0,
            sigma_g: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WeakestSpec {
    Value(f64),
    /// `mean_minus_std` or `mean_minus_std_quarter` of the unit-scale
    /// Rayleigh law, scaled by `sigma_h`.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    /// `fixed_weakest` or `free_rayleigh`.
    pub mode: String,
    pub h1_fixed: WeakestSpec,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            mode: "fixed_weakest".into(),
            h1_fixed: WeakestSpec::Named("mean_minus_std".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub bound: String,
    pub mu: Option<f64>,
    pub snr_db: Option<f64>,
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection {
            bound: ScalingBound::ClosedForm.as_str().into(),
            mu: None,
            snr_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecodingSection {
    pub method: String,
}

impl Default for PrecodingSection {
    fn default() -> Self {
        PrecodingSection {
            method: PrecoderMethod::RreUnknownCsi.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub methods: Vec<String>,
    pub empirical_check_fraction: f64,
    pub empirical_draws: usize,
    /// Zero uses every available core.
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            snr_grid_db: SweepSpec::integer_grid(0, 15),
            trials: 10_000,
            seed: 1,
            methods: PrecoderMethod::ALL.iter().map(|m| m.as_str().to_string()).collect(),
            empirical_check_fraction: 0.01,
            empirical_draws: 1000,
            workers: 0,
            out: PathBuf::from("sweep.csv"),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_table(toml::from_str(text)?)
    }

    fn from_table(table: Table) -> Result<Self, ConfigError> {
        Ok(Value::Table(table).try_into()?)
    }

    /// Reads `path` (or starts from the defaults), then applies environment
    /// overrides and finally the explicit `key=value` overrides.
    pub fn load<I, K, V>(path: Option<&Path>, env: I, overrides: &[String]) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                toml::from_str::<Table>(&text)?
            }
            None => Table::new(),
        };
        let mut env_pairs: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| {
                let key = k.as_ref().strip_prefix(ENV_PREFIX)?;
                Some((
                    key.split("__").map(str::to_lowercase).collect::<Vec<_>>().join("."),
                    v.as_ref().to_string(),
                ))
            })
            .collect();
        env_pairs.sort();
        for (key, value) in env_pairs {
            set_path(&mut table, &key, &value)?;
        }
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::Override(item.clone()))?;
            set_path(&mut table, key.trim(), value.trim())?;
        }
        Self::from_table(table)
    }

    pub fn system_params(&self) -> Result<SystemParams, ConfigError> {
        let s = &self.system;
        let covariance = match &s.covariance {
            CovarianceSpec::Named(name) if name == "isotropic" => isotropic_covariance(s.dimension),
            CovarianceSpec::Named(name) => {
                return Err(value_error("system.covariance", format!("unknown covariance {name:?}")))
            }
            CovarianceSpec::Entries(v) => {
                if v.len() != s.dimension * s.dimension {
                    return Err(value_error(
                        "system.covariance",
                        format!(
                            "expected {} entries for dimension {}, got {}",
                            s.dimension * s.dimension,
                            s.dimension,
                            v.len()
                        ),
                    ));
                }
                DMatrix::from_row_slice(s.dimension, s.dimension, v)
            }
        };
        Ok(SystemParams {
            num_users: s.num_users,
            dimension: s.dimension,
            power_limit: s.power_limit,
            covariance,
            sigma_y_sq: s.sigma_y_sq,
            sigma_z_sq: s.sigma_z_sq,
            sigma_h: s.sigma_h,
            sigma_g: s.sigma_g,
        })
    }

    /// The system configuration; physical validity is left to the caller
    /// ([`SystemConfig::validate`]).
    pub fn system_config(&self) -> Result<SystemConfig, ConfigError> {
        SystemConfig::new(self.system_params()?).map_err(|e| value_error("system", e))
    }

    pub fn channel_protocol(&self) -> Result<ChannelProtocol, ConfigError> {
        let h1 = match &self.channel.h1_fixed {
            WeakestSpec::Value(v) => *v,
            WeakestSpec::Named(n) if n == "mean_minus_std" => rayleigh_mean_minus_std(self.system.sigma_h),
            WeakestSpec::Named(n) if n == "mean_minus_std_quarter" => {
                rayleigh_mean_minus_std_quarter(self.system.sigma_h)
            }
            WeakestSpec::Named(n) => return Err(value_error("channel.h1_fixed", format!("unknown constant {n:?}"))),
        };
        match self.channel.mode.as_str() {
            "fixed_weakest" => Ok(ChannelProtocol::fixed_weakest(h1)),
            "free_rayleigh" => Ok(ChannelProtocol::free_rayleigh()),
            other => Err(value_error("channel.mode", format!("unknown mode {other:?}"))),
        }
    }

    pub fn scaling_bound(&self) -> Result<ScalingBound, ConfigError> {
        self.scaling.bound.parse().map_err(|e| value_error("scaling.bound", e))
    }

    pub fn method(&self) -> Result<PrecoderMethod, ConfigError> {
        self.precoding
            .method
            .parse()
            .map_err(|e| value_error("precoding.method", e))
    }

    pub fn methods(&self) -> Result<Vec<PrecoderMethod>, ConfigError> {
        parse_methods(self.sweep.methods.iter().map(String::as_str))
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let s = &self.sweep;
        Ok(SweepSpec::new(s.snr_grid_db.clone(), s.trials, s.seed, self.methods()?)
            .with_empirical(s.empirical_check_fraction, s.empirical_draws))
    }
}

pub fn parse_methods<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Vec<PrecoderMethod>, ConfigError> {
    names
        .into_iter()
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(|n| n.parse().map_err(|e| value_error("sweep.methods", e)))
        .collect()
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(table: &mut Table, key: &str, raw: &str) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.len() < 2 || parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(format!("{key}={raw}")));
    }
    let (last, sections) = parts.split_last().expect("at least two parts");
    let mut node = table;
    for section in sections {
        let entry = node
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return Err(ConfigError::Override(format!("{key}={raw}"))),
        };
    }
    node.insert(last.to_string(), parse_value(raw));
    Ok(())
}
