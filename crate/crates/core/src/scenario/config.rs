//! Scenario files: TOML with fixed sections, expressions as quoted strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::connection::ConnectionSpec;
use crate::dsl::{ParseError, ScalarExpr};
use crate::manifold::{ChartedManifold, MetricFamily};
use crate::tangent::Weights;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Toml(String),
    #[error("{key}: {source}")]
    Expression {
        key: String,
        #[source]
        source: ParseError,
    },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskName {
    Curvature,
    TmHomothety,
    SrmHomothety,
    ScalSpaceform,
    RadiusSearch,
    Integrability,
    DmuIdentity,
    ChernWeil,
    EinsteinCheck,
    All,
}

impl TaskName {
    pub const EACH: [TaskName; 9] = [
        TaskName::Curvature,
        TaskName::TmHomothety,
        TaskName::SrmHomothety,
        TaskName::ScalSpaceform,
        TaskName::RadiusSearch,
        TaskName::Integrability,
        TaskName::DmuIdentity,
        TaskName::ChernWeil,
        TaskName::EinsteinCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::Curvature => "curvature",
            TaskName::TmHomothety => "tm-homothety",
            TaskName::SrmHomothety => "srm-homothety",
            TaskName::ScalSpaceform => "scal-spaceform",
            TaskName::RadiusSearch => "radius-search",
            TaskName::Integrability => "integrability",
            TaskName::DmuIdentity => "dmu-identity",
            TaskName::ChernWeil => "chern-weil",
            TaskName::EinsteinCheck => "einstein-check",
            TaskName::All => "all",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub manifold: RawManifold,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<RawConnection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<RawWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<RawRadius>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homothety: Option<RawHomothety>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<RawSampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<RawTask>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawManifold {
    pub dim: usize,
    /// `euclidean | conformal | sphere | hyperbolic | explicit`.
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Conformal factor `F` of `F·δ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConnection {
    /// `φ` of the metric `e^{2φ}g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<String>,
    /// Potential `ψ̃` of the vectorial torsion `dψ̃ ∧ 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWeights {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRadius {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHomothety {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_phi1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_phi2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_f1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_f2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_ratio: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSampling {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTask {
    pub name: TaskName,
}

/// Expected homothety verdict as written in the config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedVerdict {
    Homothety,
    Isometry,
    NotHomothety,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomothetyConfig {
    pub lambda: ScalarExpr,
    pub source_lambda: Option<ScalarExpr>,
    pub t: Option<ScalarExpr>,
    pub target_weights: Weights,
    pub expected: Option<ExpectedVerdict>,
    pub expected_ratio: Option<f64>,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub raw: RawConfig,
    pub manifold: ChartedManifold,
    pub connection: ConnectionSpec,
    pub weights: Weights,
    pub r: Option<ScalarExpr>,
    pub s: Option<ScalarExpr>,
    pub homothety: Option<HomothetyConfig>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub task: Option<TaskName>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Scenario, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string().trim_end().to_string()))?;
        Scenario::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Scenario, ConfigError> {
        let m = raw.manifold.dim;
        if m == 0 {
            return Err(invalid("manifold.dim", "must be positive"));
        }
        let expr = |key: &str, src: &str| {
            ScalarExpr::parse(src, m).map_err(|source| ConfigError::Expression { key: key.into(), source })
        };
        let opt = |key: &str, src: &Option<String>| src.as_deref().map(|s| expr(key, s)).transpose();

        let manifold = manifold(&raw.manifold, &expr)?;

        let connection = match &raw.connection {
            None => ConnectionSpec::levi_civita(),
            Some(c) => ConnectionSpec {
                conformal: opt("connection.conformal", &c.conformal)?,
                torsion: opt("connection.torsion", &c.torsion)?,
            },
        };

        let base_weights = match &raw.weights {
            None => Weights::sasaki(m),
            Some(w) => weights(
                "weights",
                m,
                opt("weights.phi1", &w.phi1)?,
                opt("weights.phi2", &w.phi2)?,
                opt("weights.f1", &w.f1)?,
                opt("weights.f2", &w.f2)?,
            )?,
        };

        let (r, s) = match &raw.radius {
            None => (None, None),
            Some(rad) => (opt("radius.r", &rad.r)?, opt("radius.s", &rad.s)?),
        };

        let homothety = raw
            .homothety
            .as_ref()
            .map(|h| -> Result<HomothetyConfig, ConfigError> {
                let lambda = opt("homothety.lambda", &h.lambda)?.unwrap_or_else(|| ScalarExpr::constant(1.0, m));
                let expected = h
                    .expected
                    .as_deref()
                    .map(|v| match v {
                        "homothety" => Ok(ExpectedVerdict::Homothety),
                        "isometry" => Ok(ExpectedVerdict::Isometry),
                        "not-homothety" => Ok(ExpectedVerdict::NotHomothety),
                        other => Err(invalid(
                            "homothety.expected",
                            format!("'{other}' is not one of homothety, isometry, not-homothety"),
                        )),
                    })
                    .transpose()?;
                if let Some(psi) = h.expected_ratio {
                    if !(psi > 0.0) {
                        return Err(invalid("homothety.expected_ratio", "must be positive"));
                    }
                }
                Ok(HomothetyConfig {
                    lambda,
                    source_lambda: opt("homothety.source_lambda", &h.source_lambda)?,
                    t: opt("homothety.t", &h.t)?,
                    target_weights: weights(
                        "homothety",
                        m,
                        opt("homothety.target_phi1", &h.target_phi1)?,
                        opt("homothety.target_phi2", &h.target_phi2)?,
                        opt("homothety.target_f1", &h.target_f1)?,
                        opt("homothety.target_f2", &h.target_f2)?,
                    )?,
                    expected,
                    expected_ratio: h.expected_ratio,
                })
            })
            .transpose()?;

        let sampling = raw.sampling.clone().unwrap_or_default();
        if sampling.count == Some(0) {
            return Err(invalid("sampling.count", "must be positive"));
        }
        if let Some(t) = sampling.tolerance {
            if !(t > 0.0) {
                return Err(invalid("sampling.tolerance", "must be positive"));
            }
        }
        Ok(Scenario {
            manifold,
            connection,
            weights: base_weights,
            r,
            s,
            homothety,
            count: sampling.count,
            seed: sampling.seed,
            tolerance: sampling.tolerance,
            task: raw.task.as_ref().map(|t| t.name),
            raw,
        })
    }
}

fn manifold(
    raw: &RawManifold,
    expr: &dyn Fn(&str, &str) -> Result<ScalarExpr, ConfigError>,
) -> Result<ChartedManifold, ConfigError> {
    let m = raw.dim;
    let need_radius = || {
        raw.radius
            .ok_or_else(|| invalid("manifold.radius", format!("required for metric '{}'", raw.metric)))
    };
    let family = match raw.metric.as_str() {
        "euclidean" => MetricFamily::Euclidean,
        "sphere" => MetricFamily::SphereStereographic { radius: need_radius()? },
        "hyperbolic" => MetricFamily::HyperbolicBall { radius: need_radius()? },
        "conformal" => {
            let f = raw
                .factor
                .as_deref()
                .ok_or_else(|| invalid("manifold.factor", "required for metric 'conformal'"))?;
            MetricFamily::Conformal(expr("manifold.factor", f)?)
        }
        "explicit" => {
            let rows = raw
                .components
                .as_ref()
                .ok_or_else(|| invalid("manifold.components", "required for metric 'explicit'"))?;
            let parsed = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, s)| expr(&format!("manifold.components[{i}][{j}]"), s))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            MetricFamily::Explicit(parsed)
        }
        other => {
            return Err(invalid(
                "manifold.metric",
                format!("'{other}' is not one of euclidean, conformal, sphere, hyperbolic, explicit"),
            ))
        }
    };
    let built = match &raw.domain {
        None => ChartedManifold::with_default_domain(m, family),
        Some(d) => ChartedManifold::new(m, family, d.iter().map(|[a, b]| (*a, *b)).collect()),
    };
    built.map_err(|e| invalid("manifold", e.to_string()))
}

/// `f_i = e^{2φ_i}` or given directly; mixing both forms is rejected.
fn weights(
    section: &str,
    m: usize,
    phi1: Option<ScalarExpr>,
    phi2: Option<ScalarExpr>,
    f1: Option<ScalarExpr>,
    f2: Option<ScalarExpr>,
) -> Result<Weights, ConfigError> {
    let one = || ScalarExpr::constant(1.0, m);
    let pick = |i: u8, phi: Option<ScalarExpr>, f: Option<ScalarExpr>| match (phi, f) {
        (Some(_), Some(_)) => Err(invalid(
            section,
            format!("give either phi{i} or f{i}, not both"),
        )),
        (Some(p), None) => Ok(Weights::from_phi(&p, &p).f1),
        (None, Some(f)) => Ok(f),
        (None, None) => Ok(one()),
    };
    Ok(Weights::new(pick(1, phi1, f1)?, pick(2, phi2, f2)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let s = Scenario::from_toml("[manifold]\ndim = 2\nmetric = \"euclidean\"\n").unwrap();
        assert_eq!(s.manifold.dim(), 2);
        assert!(s.task.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = Scenario::from_toml("[manifold]\ndim = 2\nmetric = \"euclidean\"\ncolour = 3\n").unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = Scenario::from_toml("[manifold]\ndim = 2\nmetric = \"euclidean\"\n[extra]\n").unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
    }

    #[test]
    fn expression_errors_carry_key_and_column() {
        let e = Scenario::from_toml("[manifold]\ndim = 2\nmetric = \"conformal\"\nfactor = \"exp(\"\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.starts_with("manifold.factor: 1:5"), "{msg}");
    }

    #[test]
    fn weights_from_phi_or_f() {
        let s = Scenario::from_toml(
            "[manifold]\ndim = 2\nmetric = \"euclidean\"\n[weights]\nphi1 = \"0.5*ln(3)\"\nf2 = \"2\"\n",
        )
        .unwrap();
        let (f1, f2) = s.weights.eval(&[0.1, 0.2]).unwrap();
        assert!((f1 - 3.0).abs() < 1e-14);
        assert_eq!(f2, 2.0);
        let e = Scenario::from_toml("[manifold]\ndim = 2\nmetric = \"euclidean\"\n[weights]\nphi1 = \"0\"\nf1 = \"2\"\n");
        assert!(e.is_err());
    }

    #[test]
    fn sphere_needs_radius() {
        let e = Scenario::from_toml("[manifold]\ndim = 2\nmetric = \"sphere\"\n").unwrap_err();
        assert!(e.to_string().contains("manifold.radius"));
    }
}
