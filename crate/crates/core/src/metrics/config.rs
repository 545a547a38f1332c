//! TOML description of a metric on a model.
//!
//! ```toml
//! [model]
//! name = "polar-plane"
//!
//! [metric]
//! kind = "alpha1-alpha2"
//! generator = "cross02"
//! ```

use serde::{Deserialize, Serialize};

use super::{Generator, MetricKind, MetricSpec, OneForm, Profile, RawNorm};
use crate::error::{Error, Result};
use crate::manifold::{CustomModel, ManifoldModel};

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Registry name, or `custom` together with the `custom` table.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomModel>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// `riemannian`, `randers`, `alpha-beta`, `alpha1-alpha2`, `raw`, or
    /// `registry` (look `name` up in the metric registry).
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    /// Expression for `F` in `x1..xn, y1..yn` when `kind = "raw"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub model: ModelConfig,
    pub metric: MetricConfig,
}

fn missing(field: &str, kind: &str) -> Error {
    Error::Config(format!("metric kind '{kind}' needs field '{field}'"))
}

impl ModelConfig {
    pub fn named(name: &str) -> ModelConfig {
        ModelConfig {
            name: name.to_string(),
            custom: None,
        }
    }

    pub fn build(&self) -> Result<ManifoldModel> {
        if self.name == "custom" {
            let mut c = self.custom.clone().ok_or_else(|| {
                Error::Config("model 'custom' needs a [model.custom] table".into())
            })?;
            c.parse()?;
            return Ok(ManifoldModel::Custom(c));
        }
        ManifoldModel::builtin(&self.name)
    }

    pub fn from_model(model: &ManifoldModel) -> ModelConfig {
        match model {
            ManifoldModel::FlatProduct { n1, n2 } => {
                ModelConfig::named(&format!("flat-product:{n1},{n2}"))
            }
            ManifoldModel::PolarPlane => ModelConfig::named("polar-plane"),
            ManifoldModel::HopfSphere => ModelConfig::named("hopf-sphere"),
            ManifoldModel::Custom(c) => ModelConfig {
                name: "custom".into(),
                custom: Some(c.clone()),
            },
        }
    }
}

impl MetricConfig {
    pub fn registry(name: &str) -> MetricConfig {
        MetricConfig {
            kind: "registry".into(),
            name: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn build(&self, model: ManifoldModel) -> Result<MetricSpec> {
        let kind = self.kind.as_str();
        let n = model.dim();
        let metric = match kind {
            "registry" => {
                let name = self.name.as_deref().ok_or_else(|| missing("name", kind))?;
                return MetricSpec::from_registry(name, model);
            }
            "riemannian" => MetricKind::Riemannian,
            "randers" => MetricKind::Randers {
                beta: OneForm::parse(self.beta.as_ref().ok_or_else(|| missing("beta", kind))?)?,
            },
            "alpha-beta" => MetricKind::AlphaBeta {
                beta: OneForm::parse(self.beta.as_ref().ok_or_else(|| missing("beta", kind))?)?,
                phi: Profile::parse(self.phi.as_deref().ok_or_else(|| missing("phi", kind))?)?,
            },
            "alpha1-alpha2" => MetricKind::Alpha1Alpha2 {
                generator: Generator::resolve(
                    self.generator
                        .as_deref()
                        .ok_or_else(|| missing("generator", kind))?,
                )?,
            },
            "raw" => {
                let f = self.f.as_deref().ok_or_else(|| missing("f", kind))?;
                MetricKind::Raw(RawNorm::parse(self.name.as_deref().unwrap_or("raw"), f, n)?)
            }
            other => return Err(Error::Config(format!("unknown metric kind '{other}'"))),
        };
        MetricSpec::new(metric, model)
    }

    pub fn from_kind(kind: &MetricKind) -> MetricConfig {
        match kind {
            MetricKind::Riemannian => MetricConfig {
                kind: "riemannian".into(),
                ..Default::default()
            },
            MetricKind::Randers { beta } => MetricConfig {
                kind: "randers".into(),
                beta: Some(beta.source().to_vec()),
                ..Default::default()
            },
            MetricKind::AlphaBeta { beta, phi } => MetricConfig {
                kind: "alpha-beta".into(),
                beta: Some(beta.source().to_vec()),
                phi: Some(phi.source().to_string()),
                ..Default::default()
            },
            MetricKind::Alpha1Alpha2 { generator } => MetricConfig {
                kind: "alpha1-alpha2".into(),
                generator: Some(generator.name().to_string()),
                ..Default::default()
            },
            MetricKind::Raw(r) => MetricConfig {
                kind: "raw".into(),
                name: Some(r.name().to_string()),
                f: Some(r.source().to_string()),
                ..Default::default()
            },
        }
    }
}

impl SpecConfig {
    pub fn build(&self) -> Result<MetricSpec> {
        self.metric.build(self.model.build()?)
    }

    pub fn parse_toml(text: &str) -> Result<SpecConfig> {
        toml::from_str(text).map_err(|e| toml_error(text, &e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec config serializes")
    }
}

impl MetricSpec {
    /// Configuration that rebuilds this spec (the chart is not recorded).
    pub fn to_config(&self) -> SpecConfig {
        SpecConfig {
            model: ModelConfig::from_model(&self.model),
            metric: MetricConfig::from_kind(&self.kind),
        }
    }
}

/// Render a TOML error with a 1-based line and column.
pub(crate) fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
            Error::Config(format!("line {line}, column {col}: {}", e.message()))
        }
        None => Error::Config(e.message().to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::V2Source;

    #[test]
    fn round_trip_builtin() {
        for (model, metric) in [
            ("polar-plane", "cross02"),
            ("hopf-sphere", "linear"),
            ("flat-product:1,1", "quartic-test"),
            ("flat-product", "randers"),
        ] {
            let spec =
                MetricSpec::from_registry(metric, ManifoldModel::builtin(model).unwrap()).unwrap();
            let text = spec.to_config().to_toml();
            let again = SpecConfig::parse_toml(&text).unwrap().build().unwrap();
            assert_eq!(spec, again, "{text}");
        }
    }

    #[test]
    fn custom_model_from_toml() {
        let text = r#"
[model]
name = "custom"

[model.custom]
name = "tilted"
n1 = 1
n2 = 1
alpha = ["1", "0", "0", "1 + 0.1*x1"]
radius = 0.8

[model.custom.v2]
frame = ["0.2*x2", "1"]

[metric]
kind = "alpha1-alpha2"
generator = "s+t+0.1*s*t/(s+t)"
"#;
        let spec = SpecConfig::parse_toml(text).unwrap().build().unwrap();
        assert_eq!(spec.dim(), 2);
        let ManifoldModel::Custom(c) = spec.model.as_ref() else {
            panic!("custom model expected")
        };
        assert!(matches!(c.v2, V2Source::Frame(_)));
        let again = SpecConfig::parse_toml(&spec.to_config().to_toml())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = SpecConfig::parse_toml("[model]\nname = \"polar-plane\"\n[metric]\nkind = 3\n")
            .unwrap_err();
        let Error::Config(msg) = e else { panic!() };
        assert!(msg.starts_with("line 4"), "{msg}");
        let e = SpecConfig::parse_toml(
            "[model]\nname = \"polar-plane\"\n[metric]\nkind = \"alpha1-alpha2\"\n",
        )
        .unwrap()
        .build()
        .unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
