//! Run configuration: a TOML file with `[model]`, `[metric]` and `[run]`
//! tables, then command-line overrides on top.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use finsler_core::metrics::{MetricConfig, MetricSpec, ModelConfig, SpecConfig};
use serde::{Deserialize, Serialize};

pub const DEFAULT_MODEL: &str = "flat-product";
pub const DEFAULT_METRIC: &str = "cross02";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantities: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub metric: Option<MetricConfig>,
    #[serde(default)]
    pub run: RunSettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Flags win over the file.
    pub fn overlay(&mut self, model: Option<&str>, metric: Option<&str>, run: RunSettings) {
        if let Some(m) = model {
            self.model = Some(ModelConfig::named(m));
        }
        if let Some(m) = metric {
            self.metric = Some(MetricConfig::registry(m));
        }
        let r = &mut self.run;
        r.points = run.points.or(r.points);
        r.directions = run.directions.or(r.directions);
        r.nodes = run.nodes.or(r.nodes);
        r.tol = run.tol.or(r.tol);
        r.format = run.format.or(r.format);
        r.out = run.out.or(r.out.take());
        r.xi = run.xi.or(r.xi.take());
        r.quantities = run.quantities.or(r.quantities.take());
    }

    pub fn spec_config(&self) -> SpecConfig {
        SpecConfig {
            model: self
                .model
                .clone()
                .unwrap_or_else(|| ModelConfig::named(DEFAULT_MODEL)),
            metric: self
                .metric
                .clone()
                .unwrap_or_else(|| MetricConfig::registry(DEFAULT_METRIC)),
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if let Some(t) = self.run.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(format!("tolerance must be positive, got {t}"));
            }
        }
        for (name, v) in [
            ("points", self.run.points),
            ("directions", self.run.directions),
            ("nodes", self.run.nodes),
        ] {
            if v == Some(0) {
                return Err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> finsler_core::error::Result<MetricSpec> {
        self.check().map_err(finsler_core::error::Error::Config)?;
        self.spec_config().build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut c: RunConfig =
            toml::from_str("[model]\nname = \"hopf-sphere\"\n[run]\npoints = 4\ntol = 1e-6\n")
                .unwrap();
        c.overlay(
            None,
            Some("cross005"),
            RunSettings {
                points: Some(7),
                ..Default::default()
            },
        );
        assert_eq!(c.run.points, Some(7));
        assert_eq!(c.run.tol, Some(1e-6));
        let spec = c.build().unwrap();
        assert_eq!(spec.dim(), 3);
        assert_eq!(c.spec_config().metric.name.as_deref(), Some("cross005"));
    }

    #[test]
    fn defaults_and_checks() {
        let mut c = RunConfig::default();
        assert_eq!(c.build().unwrap().dim(), 3);
        c.run.tol = Some(-1.0);
        assert!(c.check().is_err());
        c.run.tol = None;
        c.run.points = Some(0);
        assert!(c.check().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = toml::from_str::<RunConfig>("[run]\npionts = 3\n").unwrap_err();
        assert!(e.to_string().contains("pionts"));
    }
}
