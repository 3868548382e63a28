//! Simulation configuration files.
//!
//! A config is a flat TOML document:
//!
//! ```toml
//! code = "proposed"
//! decoder = "ml"
//! constellation = "qpsk"
//! snr_db = [10, 12, 14]
//! imbalance_db = [0, 15]     # or a single number
//! max_trials = 1000000
//! min_bit_errors = 200
//! seed = 1
//! workers = 4
//! ```
//!
//! `max_trials`, `min_bit_errors` and `workers` are optional. Unknown keys
//! are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::codes::CodeKind;
use crate::constellation::ConstellationKind;
use crate::decode::{DecoderKind, DEFAULT_ML_BUDGET};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub code: CodeKind,
    pub decoder: DecoderKind,
    pub constellation: ConstellationKind,
    pub snr_db: Vec<f64>,
    pub imbalance_db: Vec<f64>,
    pub max_trials: u64,
    pub min_bit_errors: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    code: String,
    decoder: String,
    constellation: String,
    snr_db: OneOrMany,
    imbalance_db: OneOrMany,
    max_trials: Option<i64>,
    min_bit_errors: Option<i64>,
    seed: SeedValue,
    workers: Option<i64>,
}

fn parse_seed(seed: SeedValue) -> Result<u64> {
    match seed {
        SeedValue::Int(v) => u64::try_from(v)
            .map_err(|_| Error::Config(format!("seed must be non-negative, got {v}"))),
        SeedValue::Text(s) => {
            let t = s.trim();
            let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => t.parse::<u64>(),
            };
            parsed.map_err(|_| Error::Config(format!("seed {s:?} is not a 64-bit unsigned integer")))
        }
    }
}

fn positive(name: &str, value: Option<i64>, default: u64) -> Result<u64> {
    match value {
        None => Ok(default),
        Some(v) if v >= 1 => Ok(v as u64),
        Some(v) => Err(Error::Config(format!("{name} must be >= 1, got {v}"))),
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_owned()))?;
        let list = |v: OneOrMany| match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        };
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
        let cfg = SimConfig {
            code: raw.code.parse()?,
            decoder: raw.decoder.parse()?,
            constellation: raw.constellation.parse()?,
            snr_db: list(raw.snr_db),
            imbalance_db: list(raw.imbalance_db),
            max_trials: positive("max_trials", raw.max_trials, DEFAULT_MAX_TRIALS)?,
            min_bit_errors: positive("min_bit_errors", raw.min_bit_errors, DEFAULT_MIN_BIT_ERRORS)?,
            seed: parse_seed(raw.seed)?,
            workers: positive("workers", raw.workers, default_workers)? as usize,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.snr_db.is_empty() {
            return fail("snr_db must not be empty".into());
        }
        if self.imbalance_db.is_empty() {
            return fail("imbalance_db must not be empty".into());
        }
        if let Some(x) = self.snr_db.iter().chain(&self.imbalance_db).find(|x| !x.is_finite()) {
            return fail(format!("non-finite sweep value {x}"));
        }
        if self.max_trials == 0 || self.min_bit_errors == 0 || self.workers == 0 {
            return fail("max_trials, min_bit_errors and workers must be >= 1".into());
        }
        if self.code == CodeKind::Alamouti && self.decoder == DecoderKind::CondMl {
            return fail("cond-ml needs a four-symbol code; use ml or zf with alamouti".into());
        }
        if self.decoder == DecoderKind::Ml && self.code != CodeKind::Alamouti {
            let m = self.constellation.order() as u64;
            if m.pow(4) > DEFAULT_ML_BUDGET {
                return fail(format!(
                    "ml over {} needs {} hypotheses (budget {DEFAULT_ML_BUDGET}); use cond-ml",
                    self.constellation,
                    m.pow(4)
                ));
            }
        }
        Ok(())
    }
}
