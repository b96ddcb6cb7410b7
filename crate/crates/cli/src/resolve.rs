//! Flag / config-file / default resolution.

use serde::Serialize;
use std::path::{Path, PathBuf};

use heh_vqe::ansatz::AmplitudeMode;

use crate::{AppError, CommonArgs};

/// Flat JSON object supplying defaults for any flag, by flag name.
#[derive(Default)]
pub struct ConfigFile(serde_json::Map<String, serde_json::Value>);

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("config file {} is not valid JSON: {e}", path.display()))?;
        match value {
            serde_json::Value::Object(map) => Ok(Self(map)),
            _ => Err(format!("config file {} must hold a JSON object", path.display())),
        }
    }

    pub fn merge_f64(&self, key: &str, flag: Option<f64>) -> Option<f64> {
        flag.or_else(|| self.0.get(key).and_then(|v| v.as_f64()))
    }

    pub fn merge_u64(&self, key: &str, flag: Option<u64>) -> Option<u64> {
        flag.or_else(|| self.0.get(key).and_then(|v| v.as_u64()))
    }

    pub fn merge_u32(&self, key: &str, flag: Option<u32>) -> Option<u32> {
        flag.or_else(|| self.0.get(key).and_then(|v| v.as_u64()).map(|v| v as u32))
    }

    pub fn merge_usize(&self, key: &str, flag: Option<usize>) -> Option<usize> {
        flag.or_else(|| self.0.get(key).and_then(|v| v.as_u64()).map(|v| v as usize))
    }

    pub fn merge_string(&self, key: &str, flag: &Option<String>) -> Option<String> {
        flag.clone()
            .or_else(|| self.0.get(key).and_then(|v| v.as_str()).map(str::to_string))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Total,
    Electronic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved run parameters, echoed verbatim into JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub params: u32,
    pub trotter: u32,
    pub mode: Mode,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub convention: Convention,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(subcommand: &str, common: &CommonArgs, file: &ConfigFile) -> Result<Self, AppError> {
        let params = file.merge_u32("params", common.params).unwrap_or(2);
        if params != 2 && params != 6 {
            return Err(AppError::Usage(format!("--params must be 2 or 6, got {params}")));
        }
        let trotter = file.merge_u32("trotter", common.trotter).unwrap_or(2);
        if trotter == 0 {
            return Err(AppError::Usage("--trotter must be at least 1".into()));
        }

        let mode = match file
            .merge_string("mode", &common.mode)
            .unwrap_or_else(|| "exact".into())
            .as_str()
        {
            "exact" => Mode::Exact,
            "shots" => Mode::Shots,
            other => {
                return Err(AppError::Usage(format!("--mode must be exact or shots, got {other}")))
            }
        };

        let seed = file.merge_u64("seed", common.seed);
        let shots = match mode {
            Mode::Exact => None,
            Mode::Shots => {
                if seed.is_none() {
                    return Err(AppError::Usage("--seed is required in shot mode".into()));
                }
                let shots = file.merge_u64("shots", common.shots).unwrap_or(1000);
                if shots == 0 {
                    return Err(AppError::Usage("--shots must be positive".into()));
                }
                Some(shots)
            }
        };

        let convention = match file
            .merge_string("convention", &common.convention)
            .unwrap_or_else(|| "total".into())
            .as_str()
        {
            "total" => Convention::Total,
            "electronic" => Convention::Electronic,
            other => {
                return Err(AppError::Usage(format!(
                    "--convention must be total or electronic, got {other}"
                )))
            }
        };

        let format = match file
            .merge_string("format", &common.format)
            .unwrap_or_else(|| "csv".into())
            .as_str()
        {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => {
                return Err(AppError::Usage(format!("--format must be csv or json, got {other}")))
            }
        };

        let output = common
            .output
            .clone()
            .or_else(|| file.merge_string("output", &None).map(PathBuf::from));

        Ok(Self {
            subcommand: subcommand.to_string(),
            params,
            trotter,
            mode,
            shots,
            seed,
            convention,
            format,
            output,
        })
    }

    pub fn amplitude_mode(&self) -> AmplitudeMode {
        if self.params == 6 {
            AmplitudeMode::Full6
        } else {
            AmplitudeMode::Reduced2
        }
    }

    pub fn effective_shots(&self) -> Option<u64> {
        self.shots
    }
}
