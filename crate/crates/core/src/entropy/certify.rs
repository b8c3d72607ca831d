//! Lower-bound certificate for the entropy jump of the T⁴ example:
//! a full 2-shift in the center plus uniform expansion along E^u gives
//! h(f) ≥ log 2 + log μ_min.

use serde::{Deserialize, Serialize};

use crate::cones::{check_cone_invariance, ConeField, ConeKind};
use crate::error::Result;
use crate::maps::{MapModel, MarkovReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyParams {
    /// Isotopy time whose horseshoe is checked.
    pub t: f64,
    pub edge_samples: usize,
    /// Chart points sampled for μ_min.
    pub points: usize,
    pub directions: usize,
    pub aperture: f64,
    pub seed: u64,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams {
            t: 0.0,
            edge_samples: 4000,
            points: 4000,
            directions: 64,
            aperture: 1.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCertificate {
    pub schema_version: u32,
    pub map: String,
    pub markov_verified: bool,
    pub markov: Option<MarkovReport>,
    /// log 2 when the crossing is verified.
    pub fiber_rate: Option<f64>,
    pub mu_min: Option<f64>,
    pub cone_margin: Option<f64>,
    pub sampled_points: usize,
    pub linear_entropy: f64,
    pub certified_lower_bound: Option<f64>,
    pub reason: Option<String>,
}

pub fn certify_jump(model: &MapModel, params: &CertifyParams) -> Result<JumpCertificate> {
    let f = model.torus_map();
    let linear_entropy = f.linear_part().entropy().unwrap_or(0.0);
    let mut cert = JumpCertificate {
        schema_version: super::SCHEMA_VERSION,
        map: f.label().to_string(),
        markov_verified: false,
        markov: None,
        fiber_rate: None,
        mu_min: None,
        cone_margin: None,
        sampled_points: 0,
        linear_entropy,
        certified_lower_bound: None,
        reason: None,
    };
    let MapModel::T4(ex) = model else {
        cert.reason = Some("map carries no planted horseshoe".into());
        return Ok(cert);
    };
    let report = ex.isotopy().markov_check(params.t, params.edge_samples);
    cert.markov_verified = report.verified;
    if !report.verified {
        cert.reason = report.reason.clone();
    }
    cert.markov = Some(report);
    let points = ex.sample_chart_points(params.points, params.seed);
    let cones = ConeField::for_model(model, ConeKind::Unstable, params.aperture)?;
    let cc = check_cone_invariance(f, &cones, &points, params.directions, params.seed)?;
    cert.sampled_points = cc.sampled_points;
    cert.mu_min = cc.mu_min;
    cert.cone_margin = Some(cc.margin);
    if cert.markov_verified {
        cert.fiber_rate = Some(std::f64::consts::LN_2);
        match cc.mu_min {
            Some(mu) if mu > 1.0 && cc.margin > 0.0 => {
                cert.certified_lower_bound = Some(std::f64::consts::LN_2 + mu.ln());
            }
            _ => cert.reason = Some("unstable cone is not uniformly expanded on the chart".into()),
        }
    }
    Ok(cert)
}
