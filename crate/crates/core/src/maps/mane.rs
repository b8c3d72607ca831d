//! Mañé-type derived-from-Anosov map on T²: the cat map with its stable
//! multiplier at the fixed point pushed from λˢ to μ by a local
//! deformation along the stable eigendirection.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::profiles::{solve_increasing, Bump, SlopeProfile};
use super::{ChartMap, Frame, Perturbation, TorusMap};
use crate::error::{Error, Result};
use crate::linear::cat_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManeParams {
    /// Radius of the ball containing the support.
    pub r: f64,
    /// Stable multiplier at the fixed point after deformation.
    pub mu: f64,
    /// Fraction of the support half-width on which the unstable cutoff is 1.
    pub cutoff_plateau: f64,
}

impl Default for ManeParams {
    fn default() -> Self {
        ManeParams {
            r: 0.2,
            mu: 1.5,
            cutoff_plateau: 0.3,
        }
    }
}

/// Chart map in orthonormal cat eigencoordinates (s, u):
/// s' = λˢs + χ(u)(μ − λˢ)·R·q(s/R), u' = λᵘu.
#[derive(Debug, Clone)]
pub struct ManeChart {
    frame: Frame,
    half_widths: [f64; 2],
    lambda_s: f64,
    lambda_u: f64,
    radius: f64,
    gain: f64,
    profile: SlopeProfile,
    cutoff: Bump,
}

impl ManeChart {
    #[inline]
    fn deviation(&self, s: f64, chi: f64) -> (f64, f64) {
        let (q, k) = self.profile.odd(s / self.radius);
        (chi * self.gain * self.radius * q, chi * self.gain * k)
    }
}

impl ChartMap for ManeChart {
    fn frame(&self) -> &Frame {
        &self.frame
    }

    fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    fn map(&self, xi: &[f64], out: &mut [f64]) {
        let (chi, _) = self.cutoff.eval(xi[1]);
        out[0] = self.lambda_s * xi[0] + self.deviation(xi[0], chi).0;
        out[1] = self.lambda_u * xi[1];
    }

    fn jacobian(&self, xi: &[f64], out: &mut [f64]) {
        let (chi, dchi) = self.cutoff.eval(xi[1]);
        let (q, _) = self.profile.odd(xi[0] / self.radius);
        out[0] = self.lambda_s + self.deviation(xi[0], chi).1;
        out[1] = dchi * self.gain * self.radius * q;
        out[2] = 0.0;
        out[3] = self.lambda_u;
    }

    fn inverse(&self, eta: &[f64], out: &mut [f64]) -> Result<()> {
        let u = eta[1] / self.lambda_u;
        let (chi, _) = self.cutoff.eval(u);
        let bound = self.gain * self.radius * self.profile.max_value() + 1e-12;
        let lo = (eta[0] - bound) / self.lambda_s;
        let hi = (eta[0] + bound) / self.lambda_s;
        out[0] = solve_increasing(
            |s| {
                let (dv, ddv) = self.deviation(s, chi);
                (self.lambda_s * s + dv, self.lambda_s + ddv)
            },
            eta[0],
            lo,
            hi,
            1e-15,
        )?;
        out[1] = u;
        Ok(())
    }
}

/// The deformed cat map together with its chart.
#[derive(Debug, Clone)]
pub struct ManeMap {
    pub params: ManeParams,
    chart: Arc<ManeChart>,
    map: TorusMap,
}

/// Orthonormal eigenframe of the cat map: columns e_s, e_u.
pub fn cat_frame() -> Frame {
    let l_s = (3.0 - 5f64.sqrt()) / 2.0;
    let l_u = (3.0 + 5f64.sqrt()) / 2.0;
    let col = |l: f64| {
        let n = (1.0 + (l - 2.0) * (l - 2.0)).sqrt();
        [1.0 / n, (l - 2.0) / n]
    };
    let (s, u) = (col(l_s), col(l_u));
    Frame::new(DMatrix::from_row_slice(2, 2, &[s[0], u[0], s[1], u[1]])).expect("eigenframe")
}

impl ManeMap {
    pub fn new(params: ManeParams) -> Result<Self> {
        let l_s = (3.0 - 5f64.sqrt()) / 2.0;
        let l_u = (3.0 + 5f64.sqrt()) / 2.0;
        let profile = SlopeProfile::new(0.1, 0.25, 0.85)?;
        if !(params.r > 0.0 && params.r < 0.25) {
            return Err(Error::InvalidParameter(format!(
                "bump radius r = {} must lie in (0, 1/4)",
                params.r
            )));
        }
        // the stable derivative λˢ + (μ − λˢ)·k stays positive iff μ < λˢ(1 + 1/γ)
        let mu_max = l_s * (1.0 + 1.0 / profile.gamma());
        if !(params.mu > l_s && params.mu < mu_max) {
            return Err(Error::InvalidParameter(format!(
                "μ = {} must lie in ({l_s:.6}, {mu_max:.6}) for the map to stay a diffeomorphism",
                params.mu
            )));
        }
        if !(params.cutoff_plateau > 0.0 && params.cutoff_plateau < 1.0) {
            return Err(Error::InvalidParameter(
                "cutoff_plateau must lie in (0,1)".into(),
            ));
        }
        let radius = params.r / 2f64.sqrt();
        let chart = Arc::new(ManeChart {
            frame: cat_frame(),
            half_widths: [radius, radius],
            lambda_s: l_s,
            lambda_u: l_u,
            radius,
            gain: params.mu - l_s,
            profile,
            cutoff: Bump::new(
                params.cutoff_plateau * radius,
                (1.0 - params.cutoff_plateau) * radius,
            ),
        });
        let map = TorusMap::new(cat_matrix(), Perturbation::Chart(chart.clone()), "mane-t2")?;
        Ok(ManeMap { params, chart, map })
    }

    pub fn torus_map(&self) -> &TorusMap {
        &self.map
    }

    pub fn frame(&self) -> &Frame {
        &self.chart.frame
    }

    /// Half-width R of the square support in eigencoordinates.
    pub fn support_half_width(&self) -> f64 {
        self.chart.radius
    }

    /// Positive fixed point s* of the stable-line dynamics; the segment
    /// [−s*, s*]·e_s is the non-trivial class of the fixed point.
    pub fn stable_fixed_point(&self) -> Option<f64> {
        if self.params.mu <= 1.0 {
            return None;
        }
        let c = &self.chart;
        let g = |s: f64| c.lambda_s * s + c.deviation(s, 1.0).0 - s;
        // g > 0 just right of 0 (source) and g < 0 at s = R
        let (mut lo, mut hi) = (c.radius * 1e-6, c.radius);
        if g(lo) <= 0.0 || g(hi) >= 0.0 {
            return None;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        Some(0.5 * (lo + hi))
    }
}
