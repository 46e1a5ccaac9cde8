//! Pipeline configuration: one serializable struct covering rasterization,
//! interpretation, and machine-frame parameters, so a run can be reproduced
//! from its dumped config file. Precedence is CLI flags over config file
//! over built-in defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::RasterParams;
use crate::emit::MachineFrame;
use crate::error::{Error, Result};
use crate::graph::InterpParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub raster: RasterParams,
    pub interp: InterpParams,
    pub frame: MachineFrame,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            raster: RasterParams::default(),
            interp: InterpParams::default(),
            frame: MachineFrame::default(),
            seed: 7,
            train_fraction: 0.8,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        let config: PipelineConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json_pretty(path, self)
    }

    pub fn validate(&self) -> Result<()> {
        self.interp.validate()?;
        if self.raster.canvas_size < 32 {
            return Err(Error::InvalidInput(format!(
                "canvas size {} below minimum 32",
                self.raster.canvas_size
            )));
        }
        if self.raster.stroke_width <= 0.0
            || self.raster.corner_radius <= 0.0
            || self.raster.stroke_width.is_nan()
            || self.raster.corner_radius.is_nan()
        {
            return Err(Error::InvalidInput(
                "stroke width and corner radius must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.train_fraction) {
            return Err(Error::InvalidInput(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_values() {
        let c = PipelineConfig::default();
        assert_eq!(c.raster.canvas_size, 256);
        assert_eq!(c.interp.beta, 1.8);
        assert_eq!(c.interp.tau0, 0.35);
        assert_eq!(c.interp.lambda, 0.05);
        assert_eq!(c.interp.n_iters, 10);
        assert_eq!(c.frame.box_size_mm, 64.0);
        c.validate().unwrap();
    }

    #[test]
    fn roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let mut config = PipelineConfig {
            seed: 99,
            ..PipelineConfig::default()
        };
        config.interp.tau0 = 0.6;
        config.save(&path).unwrap();
        let loaded = PipelineConfig::load(&path).unwrap();
        assert_eq!(loaded, config);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"interp": {"tau0": 0.5}}"#).unwrap();
        let loaded = PipelineConfig::load(&path).unwrap();
        assert_eq!(loaded.interp.tau0, 0.5);
        assert_eq!(loaded.interp.beta, 1.8);
        assert_eq!(loaded.raster.canvas_size, 256);
    }

    #[test]
    fn invalid_config_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"interp": {"tau0": 1.5}}"#).unwrap();
        assert!(PipelineConfig::load(&path).is_err());
    }
}
