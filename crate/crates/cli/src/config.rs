//! Run configuration: one JSON document covering every pipeline stage,
//! with dotted-path `--set` overrides. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use roofprim::fit::{CpdParams, FitOptions};
use roofprim::DecomposeParams;
use roofprim::StereoNoiseParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Square simulation region side, meters.
    pub region_size: f64,
    /// Minimum tile side before recursion stops, meters.
    pub min_side: f64,
    pub max_depth: u32,
    /// Fraction of tiles kept for the building.
    pub keep_fraction: f64,
    pub height_min: f64,
    pub height_max: f64,
    pub cell_size: f64,
    /// Ground margin around the rotated building, meters.
    pub padding: f64,
    /// Accepted post-merge section count range (seeds are redrawn until a
    /// model lands inside it).
    pub min_sections: usize,
    pub max_sections: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            region_size: 60.0,
            min_side: 8.0,
            max_depth: 2,
            keep_fraction: 0.4,
            height_min: 8.0,
            height_max: 16.0,
            cell_size: 0.5,
            padding: 4.0,
            min_sections: 1,
            max_sections: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrototypeConfig {
    pub points: usize,
    pub seed: u64,
}

impl Default for PrototypeConfig {
    fn default() -> Self {
        PrototypeConfig {
            points: 1024,
            seed: 9001,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub simulation: SimulationConfig,
    pub stereo: StereoNoiseParams,
    pub decompose: DecomposeParams,
    pub cpd: CpdParams<f64>,
    pub fit: FitOptions<f64>,
    pub prototypes: PrototypeConfig,
    /// Voxel edge for 3D scoring, meters.
    pub eval_voxel: f64,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            simulation: SimulationConfig::default(),
            stereo: StereoNoiseParams::default(),
            decompose: DecomposeParams::default(),
            cpd: CpdParams::default(),
            fit: FitOptions::default(),
            prototypes: PrototypeConfig::default(),
            eval_voxel: 0.5,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str::<serde_json::Value>(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => serde_json::to_value(PipelineConfig::default())?,
        };
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let config: PipelineConfig = serde_json::from_value(value).context("invalid config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let s = &self.simulation;
        if s.region_size <= 0.0 || s.min_side <= 0.0 || s.cell_size <= 0.0 {
            bail!("simulation sizes must be positive");
        }
        if !(0.0 < s.keep_fraction && s.keep_fraction <= 1.0) {
            bail!("keep_fraction must be in (0, 1]");
        }
        if !(0.0 < s.height_min && s.height_min < s.height_max) {
            bail!("require 0 < height_min < height_max");
        }
        if s.min_sections == 0 || s.min_sections > s.max_sections {
            bail!("require 1 <= min_sections <= max_sections");
        }
        self.stereo.validate().map_err(anyhow::Error::from)?;
        if self.eval_voxel <= 0.0 {
            bail!("eval_voxel must be positive");
        }
        if self.prototypes.points < 8 {
            bail!("prototypes.points too small");
        }
        Ok(())
    }
}

/// Apply one `path.to.key=value` override onto the JSON tree.
fn apply_override(root: &mut serde_json::Value, spec: &str) -> anyhow::Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .with_context(|| format!("override `{spec}` is not key=value"))?;
    let mut cursor = &mut *root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let obj = cursor
            .as_object_mut()
            .with_context(|| format!("`{}` is not an object", segments[..i].join(".")))?;
        if i + 1 == segments.len() {
            let value = serde_json::from_str::<serde_json::Value>(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            obj.insert((*seg).to_string(), value);
            return Ok(());
        }
        cursor = obj
            .get_mut(*seg)
            .with_context(|| format!("unknown config section `{}`", segments[..=i].join(".")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrips() {
        let c = PipelineConfig::default();
        let json = serde_json::to_string_pretty(&c).unwrap();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = serde_json::to_value(PipelineConfig::default()).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("bogus".into(), serde_json::Value::Null);
        assert!(serde_json::from_value::<PipelineConfig>(v).is_err());
    }

    #[test]
    fn overrides_apply() {
        let c = PipelineConfig::load(None, &["seed=7".into(), "stereo.sigma_height=0.0".into()])
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.stereo.sigma_height, 0.0);
        assert!(PipelineConfig::load(None, &["nope.x=1".into()]).is_err());
    }
}
