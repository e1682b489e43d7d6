//! Run-configuration schema (versioned JSON). Field paths in error messages
//! come from the deserializer, so schema violations name the offending key.

use serde::Deserialize;

use tdflow::catalog::InitialSpec;
use tdflow::scheme::PartitionSpec;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub config_version: u32,
    pub space: SpaceKind,
    pub functional: FunctionalConfig,
    pub initial: InitialSpec,
    /// Second initial datum for two-trajectory comparisons.
    #[serde(default)]
    pub initial_b: Option<InitialSpec>,
    pub partition: PartitionConfig,
    pub t_end: f64,
    /// Quantile resolution (wasserstein1d) or dimension (euclidean).
    pub resolution: usize,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticSpec>,
    #[serde(default)]
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Euclidean,
    Wasserstein1d,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub name: String,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
}

fn empty_params() -> serde_json::Value {
    serde_json::json!({})
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionConfig {
    Uniform { step: f64 },
    Explicit { marks: Vec<f64> },
    Random { max_step: f64 },
}

impl PartitionConfig {
    pub fn to_spec(&self, seed: u64) -> PartitionSpec {
        match self {
            PartitionConfig::Uniform { step } => PartitionSpec::Uniform { step: *step },
            PartitionConfig::Explicit { marks } => PartitionSpec::Explicit {
                marks: marks.clone(),
            },
            PartitionConfig::Random { max_step } => PartitionSpec::Random {
                max_step: *max_step,
                seed,
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticSpec {
    pub name: String,
    #[serde(default)]
    pub slack: Option<f64>,
    /// Initial-size bound for the a-priori check.
    #[serde(default)]
    pub s_bound: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub tau_ladder: Vec<f64>,
    #[serde(default)]
    pub min_order: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleConfig {
    /// Gaussian moment evolution of the confinement-diffusion instance.
    OuGaussian {
        mean: f64,
        variance: f64,
        times: Vec<f64>,
    },
    /// Linear drift-diffusion finite-volume run.
    FokkerPlanck {
        grid: GridConfig,
        dt: f64,
        #[serde(default)]
        times: Vec<f64>,
    },
    /// Nonlinear-diffusion finite-volume run driven by the internal-energy
    /// pressure, with optional confinement and interaction drift.
    GeneralDiffusion {
        grid: GridConfig,
        dt: f64,
        #[serde(default)]
        times: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
}

/// Parses and version-checks a configuration, reporting the JSON path of
/// the first offending field.
pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig =
        serde_path_to_error::deserialize(de).map_err(|e| format!("{}: {}", e.path(), e.inner()))?;
    if config.config_version != CONFIG_VERSION {
        return Err(format!(
            "config_version: expected {CONFIG_VERSION}, got {}",
            config.config_version
        ));
    }
    if !(config.t_end > 0.0) {
        return Err("t_end: must be positive".into());
    }
    if config.resolution == 0 {
        return Err("resolution: must be positive".into());
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(
            r#"{
                "config_version": 1,
                "space": "euclidean",
                "functional": {"name": "quadratic"},
                "initial": {"type": "point", "coords": [1.0]},
                "partition": {"type": "uniform", "step": 0.1},
                "t_end": 1.0,
                "resolution": 1
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.space, SpaceKind::Euclidean);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn bad_field_is_named() {
        let err = parse_config(
            r#"{
                "config_version": 1,
                "space": "euclidean",
                "functional": {"name": "quadratic"},
                "initial": {"type": "point", "coords": [1.0]},
                "partition": {"type": "uniform", "step": "fast"},
                "t_end": 1.0,
                "resolution": 1
            }"#,
        )
        .unwrap_err();
        assert!(err.contains("partition"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(
            r#"{
                "config_version": 1,
                "space": "euclidean",
                "functional": {"name": "quadratic", "extra": 1},
                "initial": {"type": "point", "coords": [1.0]},
                "partition": {"type": "uniform", "step": 0.1},
                "t_end": 1.0,
                "resolution": 1
            }"#,
        )
        .unwrap_err();
        assert!(err.contains("extra"), "{err}");
    }
}
