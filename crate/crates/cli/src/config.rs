use std::path::{Path, PathBuf};

use menshov_core::assembly::SearchLimits;
use menshov_core::fourier::{LambdaParams, DEFAULT_REFINEMENT};
use menshov_core::{EpsSchedule, MeasureSpec, TWO_PI};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// A measure given inline or as a path to a JSON measure spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureRef {
    Path(PathBuf),
    Inline(MeasureSpec),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub measure: Option<MeasureRef>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub plot: bool,
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    pub wiener: WienerConfig,
    pub mset: MsetConfig,
    pub corrector: CorrectorConfig,
    pub claim: ClaimConfig,
    pub demo: DemoConfig,
}

/// Thresholds for `Λ̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaConfig {
    pub j_max: u32,
    pub k_max: u32,
    pub n_max: u64,
    pub m: u64,
    pub n_min: u64,
    pub refinement: u32,
    pub density_floor: f64,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        let d = LambdaParams::default();
        LambdaConfig {
            j_max: d.j_max,
            k_max: d.k_max,
            n_max: d.n_max,
            m: d.m,
            n_min: d.n_min,
            refinement: d.refinement,
            density_floor: d.density_floor,
        }
    }
}

impl LambdaConfig {
    pub fn params(&self) -> LambdaParams {
        LambdaParams {
            k_max: self.k_max,
            j_max: self.j_max,
            n_max: self.n_max,
            m: self.m,
            n_min: self.n_min,
            refinement: self.refinement,
            density_floor: self.density_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WienerConfig {
    pub k: i64,
    pub n_max: u64,
    pub refinement: u32,
    pub lambda: LambdaConfig,
}

impl Default for WienerConfig {
    fn default() -> Self {
        WienerConfig {
            k: 1,
            n_max: 2000,
            refinement: DEFAULT_REFINEMENT,
            lambda: LambdaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MsetConfig {
    pub interval: [f64; 2],
    pub sigma: f64,
    pub tau: f64,
    pub lambda: LambdaConfig,
}

impl Default for MsetConfig {
    fn default() -> Self {
        MsetConfig {
            interval: [0.0, 1.0],
            sigma: 0.2,
            tau: 0.3,
            lambda: LambdaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// `0` skips the kernel sweep.
    pub j_max: u32,
    pub x_grid: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            j_max: 0,
            x_grid: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectorConfig {
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
    pub eps: f64,
    pub nu: u32,
    /// Defaults to the smallest admissible `r`.
    pub r: Option<u64>,
    pub samples: usize,
    pub kernel: KernelConfig,
}

impl Default for CorrectorConfig {
    fn default() -> Self {
        CorrectorConfig {
            c: 0.0,
            d: TWO_PI,
            gamma: 1.0,
            eps: 0.1,
            nu: 16,
            r: None,
            samples: 5,
            kernel: KernelConfig::default(),
        }
    }
}

/// Step function: equal cells when `breakpoints` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    pub breakpoints: Option<Vec<f64>>,
    pub values: Vec<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            breakpoints: None,
            values: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaimConfig {
    pub phi: StepConfig,
    pub nu: u32,
    pub eps: EpsSchedule,
    pub limits: SearchLimits,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        ClaimConfig {
            phi: StepConfig::default(),
            nu: 16,
            eps: EpsSchedule::default(),
            limits: SearchLimits::default(),
        }
    }
}

/// Target function of the demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `Σ c_i x^i`.
    Polynomial { coefficients: Vec<f64> },
    /// `amplitude · sin(frequency · x + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `amplitude · tanh(steepness · (x − center))`.
    TanhStep {
        amplitude: f64,
        steepness: f64,
        center: f64,
    },
    /// Piecewise constant, cells closed on the left.
    Step {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl FunctionSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            FunctionSpec::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * x + phase).sin(),
            FunctionSpec::TanhStep {
                amplitude,
                steepness,
                center,
            } => amplitude * (steepness * (x - center)).tanh(),
            FunctionSpec::Step {
                breakpoints,
                values,
            } => {
                let i = breakpoints.partition_point(|&b| b <= x);
                if i == 0 {
                    values.first().copied().unwrap_or(0.0)
                } else {
                    values.get(i - 1).or(values.last()).copied().unwrap_or(0.0)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialSumConfig {
    pub n: Vec<u64>,
    pub grid: usize,
}

impl Default for PartialSumConfig {
    fn default() -> Self {
        PartialSumConfig {
            n: vec![8, 16, 32, 64, 128, 256],
            grid: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub function: FunctionSpec,
    /// Absolute bound on the exceptional mass; overrides `eps_fraction`.
    pub eps: Option<f64>,
    /// Bound as a fraction of `μ([0, 2π])`.
    pub eps_fraction: f64,
    pub uniform_gap: f64,
    pub rho_cap: usize,
    pub gap_samples: usize,
    pub limits: SearchLimits,
    pub partial_sums: PartialSumConfig,
}

impl Default for DemoConfig {
    fn default() -> Self {
        let d = menshov_core::DemoParams::new(0.0, 0.0);
        DemoConfig {
            function: FunctionSpec::Polynomial {
                coefficients: vec![0.0, 1.0],
            },
            eps: None,
            eps_fraction: 0.05,
            uniform_gap: 0.5,
            rho_cap: d.rho_cap,
            gap_samples: d.gap_samples,
            limits: d.limits,
            partial_sums: PartialSumConfig::default(),
        }
    }
}

/// Parses `text` as a JSON value, falling back to a string.
fn override_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Sets `path` (dot separated) in `root` to `value`, creating objects on
/// the way.
fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(CliError::Config(format!("bad override path `{path}`")));
        }
        let obj = match node {
            Value::Object(map) => map,
            other => {
                *other = Value::Object(Default::default());
                other.as_object_mut().unwrap()
            }
        };
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Reads the config file, applies `key=value` overrides and resolves a
/// measure path relative to the config file.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
        set_path(&mut value, key, override_value(raw))?;
    }
    let mut config: RunConfig = serde_json::from_value(value)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(MeasureRef::Path(p)) = &config.measure {
        let full = if p.is_relative() {
            path.parent().unwrap_or(Path::new(".")).join(p)
        } else {
            p.clone()
        };
        let text = std::fs::read_to_string(&full)
            .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
        let spec: MeasureSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
        config.measure = Some(MeasureRef::Inline(spec));
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_keys() {
        let mut v = serde_json::json!({"claim": {"nu": 16}});
        set_path(&mut v, "claim.limits.r_cap", override_value("64")).unwrap();
        set_path(&mut v, "claim.nu", override_value("20")).unwrap();
        assert_eq!(v["claim"]["limits"]["r_cap"], 64);
        assert_eq!(v["claim"]["nu"], 20);
        assert!(set_path(&mut v, "claim..nu", Value::Null).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let v = serde_json::json!({"claim": {"nuu": 16}});
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn function_specs_evaluate() {
        let p = FunctionSpec::Polynomial {
            coefficients: vec![1.0, 0.0, 2.0],
        };
        assert_eq!(p.eval(3.0), 19.0);
        let s = FunctionSpec::Step {
            breakpoints: vec![0.0, 1.0, TWO_PI],
            values: vec![4.0, 5.0],
        };
        assert_eq!(s.eval(0.5), 4.0);
        assert_eq!(s.eval(1.0), 5.0);
        assert_eq!(s.eval(TWO_PI), 5.0);
    }
}
