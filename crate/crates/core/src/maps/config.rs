//! JSON map descriptions and the named-map registry.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ManeMap, ManeParams, Perturbation, T4Example, T4Params, TorusMap};
use crate::error::{Error, Result};
use crate::linear::LinearPart;

/// A map as written in a config file, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapConfig {
    /// x ↦ Ax + c.
    Linear {
        matrix: LinearPart,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translation: Option<Vec<f64>>,
    },
    ManeT2 {
        #[serde(default)]
        params: ManeParams,
    },
    T4Example {
        #[serde(default)]
        params: T4Params,
    },
}

/// Names accepted by `MapConfig::named`.
pub const REGISTRY: &[(&str, &str)] = &[
    ("cat", "the cat map [[2,1],[1,1]] on T²"),
    (
        "paper-t4",
        "the hyperbolic companion matrix on T⁴ (no perturbation)",
    ),
    ("mane-t2-default", "Mañé-type deformation of the cat map"),
    (
        "t4-example-default",
        "the T⁴ example with a horseshoe in the center plane",
    ),
];

impl MapConfig {
    pub fn named(name: &str) -> Result<Self> {
        Ok(match name {
            "cat" | "paper-t4" => MapConfig::Linear {
                matrix: LinearPart::named(name)?,
                translation: None,
            },
            "mane-t2-default" | "mane-t2" => MapConfig::ManeT2 {
                params: ManeParams::default(),
            },
            "t4-example-default" | "t4-example" => MapConfig::T4Example {
                params: T4Params::default(),
            },
            _ => {
                let known: Vec<&str> = REGISTRY.iter().map(|(n, _)| *n).collect();
                return Err(Error::Config(format!(
                    "unknown map '{name}'; known maps: {}",
                    known.join(", ")
                )));
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("map config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<MapModel> {
        Ok(match self {
            MapConfig::Linear {
                matrix,
                translation,
            } => {
                let pert = match translation {
                    Some(c) => {
                        if c.len() != matrix.dim() {
                            return Err(Error::DimensionMismatch {
                                expected: matrix.dim(),
                                got: c.len(),
                            });
                        }
                        Perturbation::Constant(c.clone())
                    }
                    None => Perturbation::None,
                };
                MapModel::Linear(TorusMap::new(matrix.clone(), pert, "linear")?)
            }
            MapConfig::ManeT2 { params } => MapModel::Mane(Box::new(ManeMap::new(*params)?)),
            MapConfig::T4Example { params } => MapModel::T4(Box::new(T4Example::new(*params)?)),
        })
    }
}

/// A built map together with whatever structure its construction carries.
#[derive(Debug, Clone)]
pub enum MapModel {
    Linear(TorusMap),
    Mane(Box<ManeMap>),
    T4(Box<T4Example>),
}

impl MapModel {
    pub fn torus_map(&self) -> &TorusMap {
        match self {
            MapModel::Linear(m) => m,
            MapModel::Mane(m) => m.torus_map(),
            MapModel::T4(m) => m.torus_map(),
        }
    }

    pub fn linear_part(&self) -> &LinearPart {
        self.torus_map().linear_part()
    }
}

/// Resolve `--map NAME` or `--config FILE`; a config file wins.
pub fn resolve(name: Option<&str>, config: Option<&Path>) -> Result<MapConfig> {
    match (config, name) {
        (Some(p), _) => MapConfig::from_file(p),
        (None, Some(n)) => MapConfig::named(n),
        (None, None) => Err(Error::Config("either --map or --config is required".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for (name, _) in REGISTRY {
            let cfg = MapConfig::named(name).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(MapConfig::from_json(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn linear_from_json() {
        let cfg = MapConfig::from_json(r#"{"kind":"linear","matrix":[[2,1],[1,1]]}"#).unwrap();
        assert_eq!(cfg.build().unwrap().torus_map().dim(), 2);
        let err = MapConfig::from_json(r#"{"kind":"linear","matrix":[[2,0],[0,1]]}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(
            MapConfig::from_json(r#"{"kind":"mane-t2","params":{"r":0.2,"bogus":1}}"#).is_err()
        );
    }
}
