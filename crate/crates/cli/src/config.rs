//! Effective parameter sets for each command and the JSON file that can
//! preset them. Keys in the file use the long flag names.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rotdop_core::SellmeierSet;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::csv::format_number;
use crate::error::CliError;

/// Degenerate signal/idler angular frequency, 2π·370.44 THz.
pub const DEFAULT_CENTER: f64 = 2.0 * PI * 370.44e12;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub pipeline: PipelineParams,
    pub jsa: JsaParams,
    pub hom: HomParams,
    pub phasematch: PhasematchParams,
    pub estimate: EstimateParams,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PipelineParams {
    pub l: u32,
    pub omega: f64,
    pub center: f64,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            l: 2,
            omega: 1e12,
            center: DEFAULT_CENTER,
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct JsaParams {
    pub sigma: f64,
    pub gamma: f64,
    /// Phase-matching coefficient A (B = −A); derived from σ and γ if absent.
    pub a_coef: Option<f64>,
    pub rde_l: u32,
    pub rde_omega: f64,
    pub half_width: f64,
    pub grid: usize,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub svg: Option<PathBuf>,
}

impl Default for JsaParams {
    fn default() -> Self {
        JsaParams {
            sigma: 1e12,
            gamma: 0.1,
            a_coef: None,
            rde_l: 0,
            rde_omega: 0.0,
            half_width: 6e12,
            grid: 256,
            output: None,
            svg: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Closed,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct HomParams {
    pub tau_c: f64,
    pub l: u32,
    pub omega: f64,
    pub tau_span: f64,
    pub points: usize,
    pub method: MethodArg,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub svg: Option<PathBuf>,
}

impl Default for HomParams {
    fn default() -> Self {
        HomParams {
            tau_c: 1e-12,
            l: 2,
            omega: 0.0,
            tau_span: 3e-12,
            points: 601,
            method: MethodArg::Closed,
            noise_sigma: 0.0,
            seed: 0,
            output: None,
            svg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct PhasematchParams {
    pub cut_angle: f64,
    pub pump_thz: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    pub sellmeier: SellmeierSet,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub svg: Option<PathBuf>,
}

impl Default for PhasematchParams {
    fn default() -> Self {
        PhasematchParams {
            cut_angle: 45.0,
            pump_thz: 740.88,
            f_min: 300.0,
            f_max: 440.0,
            points: 1401,
            sellmeier: SellmeierSet::default(),
            output: None,
            svg: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EstimateParams {
    pub input: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

/// Flattens a parameter struct into `key=value` pairs with dotted keys for
/// nested objects, numbers in the CSV number format.
pub fn echo<T: Serialize>(params: &T) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let value = serde_json::to_value(params).unwrap_or(Value::Null);
    flatten("", &value, &mut out);
    out
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Number(n) => {
            let text = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                (Some(u), _, _) => u.to_string(),
                (_, Some(i), _) => i.to_string(),
                (_, _, Some(f)) => format_number(f),
                _ => n.to_string(),
            };
            out.push((prefix.to_string(), text));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), "none".into())),
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            out.push((prefix.to_string(), parts.join(";")));
        }
    }
}
