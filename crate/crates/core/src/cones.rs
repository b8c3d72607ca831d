//! Constant-coefficient cone fields and sampled invariance certificates.
//!
//! Coordinates are taken in a frame whose columns are grouped into
//! (s, c, u) blocks. The unstable cone of aperture a is
//! {‖v_u‖ ≥ a·‖v_sc‖}, the stable cone {‖v_s‖ ≥ a·‖v_cu‖}; larger a means
//! a narrower cone. Angles are measured from the core block:
//! θ(v) = atan2(‖v_rest‖, ‖v_core‖), so the cone is θ ≤ atan(1/a).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{mane::cat_frame, Frame, MapModel, TorusMap, MAX_DIM};
use crate::torus::TorusPoint;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Unstable,
    Stable,
}

#[derive(Debug, Clone)]
pub struct ConeField {
    frame: Frame,
    /// Dimensions of the s, c and u blocks.
    blocks: [usize; 3],
    aperture: f64,
    kind: ConeKind,
}

impl ConeField {
    pub fn new(frame: Frame, blocks: [usize; 3], aperture: f64, kind: ConeKind) -> Result<Self> {
        if blocks.iter().sum::<usize>() != frame.dim() {
            return Err(Error::DimensionMismatch {
                expected: frame.dim(),
                got: blocks.iter().sum(),
            });
        }
        if !(aperture > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cone aperture {aperture} must be positive"
            )));
        }
        let field = ConeField {
            frame,
            blocks,
            aperture,
            kind,
        };
        if field.core().is_empty() || field.rest().is_empty() {
            return Err(Error::InvalidParameter(
                "cone needs nonempty core and complement blocks".into(),
            ));
        }
        Ok(field)
    }

    /// Cones in the frame natural to a built map: the chart frame for the
    /// constructed examples, the spectral bases of A otherwise.
    pub fn for_model(model: &MapModel, kind: ConeKind, aperture: f64) -> Result<Self> {
        match model {
            MapModel::Linear(m) => Self::for_linear(m, kind, aperture),
            MapModel::Mane(_) => Self::new(cat_frame(), [1, 0, 1], aperture, kind),
            MapModel::T4(ex) => Self::new(ex.frame().clone(), [1, 2, 1], aperture, kind),
        }
    }

    /// Stable basis columns then unstable ones; no center block.
    pub fn for_linear(f: &TorusMap, kind: ConeKind, aperture: f64) -> Result<Self> {
        let d = f.dim();
        let hyp = f.linear_part().is_hyperbolic(crate::linear::TAU_HYP);
        if !hyp.hyperbolic {
            // no splitting: use coordinate axes with the last axis as u
            return Self::new(Frame::identity(d), [d - 1, 0, 1], aperture, kind);
        }
        let split = f.linear_part().spectral_split()?;
        let (ds, du) = split.dims();
        let mut e = DMatrix::<f64>::zeros(d, d);
        e.columns_mut(0, ds).copy_from(&split.stable_basis);
        e.columns_mut(ds, du).copy_from(&split.unstable_basis);
        Self::new(Frame::new(e)?, [ds, 0, du], aperture, kind)
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn blocks(&self) -> [usize; 3] {
        self.blocks
    }

    pub fn with_aperture(&self, aperture: f64) -> Result<Self> {
        Self::new(self.frame.clone(), self.blocks, aperture, self.kind)
    }

    fn core(&self) -> std::ops::Range<usize> {
        let [s, c, u] = self.blocks;
        match self.kind {
            ConeKind::Unstable => s + c..s + c + u,
            ConeKind::Stable => 0..s,
        }
    }

    fn rest(&self) -> Vec<usize> {
        let core = self.core();
        (0..self.frame.dim())
            .filter(|i| !core.contains(i))
            .collect()
    }

    /// Half-opening angle atan(1/a).
    pub fn half_angle(&self) -> f64 {
        (1.0 / self.aperture).atan()
    }

    /// (‖v_core‖, ‖v_rest‖) in frame coordinates.
    #[inline]
    fn parts(&self, v: &[f64]) -> (f64, f64) {
        let core = self.core();
        let mut c = 0.0;
        let mut r = 0.0;
        for (i, x) in v.iter().enumerate() {
            if core.contains(&i) {
                c += x * x;
            } else {
                r += x * x;
            }
        }
        (c.sqrt(), r.sqrt())
    }

    /// Unit directions (frame coordinates) on the cone boundary, plus
    /// interior ones on `layers` smaller angles.
    pub fn directions(&self, boundary: usize, layers: usize, seed: u64) -> Vec<Vec<f64>> {
        let core: Vec<usize> = self.core().collect();
        let rest = self.rest();
        let (alphas, betas) = if core.len() == 1 {
            (vec![vec![1.0]], sphere(rest.len(), boundary, seed))
        } else if rest.len() == 1 {
            (sphere(core.len(), boundary, seed), vec![vec![1.0]])
        } else {
            let k = (boundary as f64).sqrt().ceil() as usize;
            (
                sphere(core.len(), k, seed),
                sphere(rest.len(), k, seed ^ 0x9e37),
            )
        };
        let theta_max = self.half_angle();
        let mut out = Vec::new();
        let d = self.frame.dim();
        for layer in 0..=layers {
            let th = theta_max * (1.0 - layer as f64 / (layers + 1) as f64);
            let (sn, cs) = th.sin_cos();
            for a in &alphas {
                for b in &betas {
                    let mut v = vec![0.0; d];
                    for (k, &i) in core.iter().enumerate() {
                        v[i] = cs * a[k];
                    }
                    for (k, &i) in rest.iter().enumerate() {
                        v[i] = sn * b[k];
                    }
                    out.push(v);
                }
            }
        }
        // the core axis itself
        let mut axis = vec![0.0; d];
        axis[core[0]] = 1.0;
        out.push(axis);
        out
    }
}

/// Roughly uniform unit vectors in R^k: ±1, a circle, a Fibonacci
/// sphere, or seeded Gaussians.
fn sphere(k: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let count = count.max(1);
    match k {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// Direction in frame coordinates.
    pub direction: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityCertificate {
    pub schema_version: u32,
    pub kind: ConeKind,
    pub aperture: f64,
    pub sampled_points: usize,
    pub directions_per_point: usize,
    /// Minimal angular margin atan(1/a) − θ(image) over all samples.
    pub margin: f64,
    /// Unstable cones: min ‖(Df v)_u‖ / ‖v_u‖.
    pub mu_min: Option<f64>,
    /// Stable cones: max ‖v_s‖ / ‖(Df⁻¹ v)_s‖.
    pub lambda_max: Option<f64>,
    pub passed: bool,
    /// Sample realizing the smallest margin.
    pub witness: Option<Witness>,
    /// Histogram of per-point margins.
    pub histogram: Vec<HistogramBin>,
}

/// Jacobian of f at x in frame coordinates, E⁻¹·Df·E, row-major.
fn frame_jacobian(f: &TorusMap, frame: &Frame, x: &[f64], inverse: bool) -> Result<Vec<f64>> {
    let d = f.dim();
    let mut j = [0.0; MAX_DIM * MAX_DIM];
    f.jacobian_raw(x, &mut j[..d * d]);
    let mut m = DMatrix::from_row_slice(d, d, &j[..d * d]);
    if inverse {
        m = m
            .try_inverse()
            .ok_or_else(|| Error::Numerical(format!("singular Jacobian at {x:?}")))?;
    }
    let jf = frame.inverse_matrix() * m * frame.matrix();
    Ok(crate::maps::row_major(&jf))
}

/// Checks D_q f(C) ⊂ C (unstable) or D_q f⁻¹(C) ⊂ C (stable) at the
/// given points for the boundary and interior directions of the cone.
pub fn check_cone_invariance(
    f: &TorusMap,
    cones: &ConeField,
    points: &[TorusPoint],
    directions: usize,
    seed: u64,
) -> Result<HyperbolicityCertificate> {
    let d = f.dim();
    if cones.frame.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: cones.frame.dim(),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptySample("no points to check".into()));
    }
    let dirs = cones.directions(directions, 2, seed);
    let theta_max = cones.half_angle();
    let stable = cones.kind == ConeKind::Stable;
    // per point: (min margin, argmin direction, min expansion, max contraction)
    let per_point = points
        .par_iter()
        .map(|q| -> Result<(f64, usize, f64, f64)> {
            let j = frame_jacobian(f, &cones.frame, q.coords(), stable)?;
            let mut worst = (f64::INFINITY, 0usize);
            let mut expand = f64::INFINITY;
            let mut contract: f64 = 0.0;
            let mut w = [0.0; MAX_DIM];
            for (k, v) in dirs.iter().enumerate() {
                for r in 0..d {
                    w[r] = (0..d).map(|c| j[r * d + c] * v[c]).sum();
                }
                let (wc, wr) = cones.parts(&w[..d]);
                let (vc, _) = cones.parts(v);
                let m = theta_max - wr.atan2(wc);
                if m < worst.0 {
                    worst = (m, k);
                }
                if stable {
                    contract = contract.max(vc / wc);
                } else {
                    expand = expand.min(wc / vc);
                }
            }
            Ok((worst.0, worst.1, expand, contract))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut margin, mut arg) = (f64::INFINITY, 0usize);
    let mut mu_min = f64::INFINITY;
    let mut lambda_max: f64 = 0.0;
    for (i, r) in per_point.iter().enumerate() {
        if r.0 < margin {
            margin = r.0;
            arg = i;
        }
        mu_min = mu_min.min(r.2);
        lambda_max = lambda_max.max(r.3);
    }
    let margins: Vec<f64> = per_point.iter().map(|r| r.0).collect();
    let passed = margin > 0.0
        && if stable {
            lambda_max < 1.0
        } else {
            mu_min > 1.0
        };
    Ok(HyperbolicityCertificate {
        schema_version: SCHEMA_VERSION,
        kind: cones.kind,
        aperture: cones.aperture,
        sampled_points: points.len(),
        directions_per_point: dirs.len(),
        margin,
        mu_min: (!stable).then_some(mu_min),
        lambda_max: stable.then_some(lambda_max),
        passed,
        witness: Some(Witness {
            point: points[arg].coords().to_vec(),
            direction: dirs[per_point[arg].1].clone(),
            margin,
        }),
        histogram: histogram(&margins, 20),
    })
}

fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![HistogramBin {
            lo,
            hi,
            count: values.len(),
        }];
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: lo + i as f64 * w,
            hi: lo + (i + 1) as f64 * w,
            count,
        })
        .collect()
}

/// Per-step growth rates along orbits, with their spread over points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRates {
    pub steps: usize,
    /// Geometric-mean contraction of stable-cone vectors per step.
    pub lambda_s: f64,
    /// Geometric-mean expansion of unstable-cone vectors per step.
    pub lambda_u: f64,
    pub lambda_s_spread: [f64; 2],
    pub lambda_u_spread: [f64; 2],
}

/// Pushes the core axis of each cone along n steps of the orbit (forward
/// for unstable, backward for stable) and measures the growth of its core
/// component.
pub fn empirical_rates(
    f: &TorusMap,
    unstable: &ConeField,
    stable: &ConeField,
    points: &[TorusPoint],
    n: usize,
) -> Result<EmpiricalRates> {
    if points.is_empty() {
        return Err(Error::EmptySample("no points for empirical rates".into()));
    }
    let n = n.max(1);
    let d = f.dim();
    let run = |cones: &ConeField, backward: bool| -> Result<Vec<f64>> {
        let core0 = cones.core().start;
        points
            .par_iter()
            .map(|q| -> Result<f64> {
                let mut x = q.coords().to_vec();
                let mut v = vec![0.0; d];
                v[core0] = 1.0;
                let mut log_growth = 0.0;
                let mut w = vec![0.0; d];
                let mut next = vec![0.0; d];
                for _ in 0..n {
                    if backward {
                        f.invert_raw(&x.clone(), &mut next)?;
                        x.copy_from_slice(&next);
                    }
                    let j = frame_jacobian(f, &cones.frame, &x, backward)?;
                    for r in 0..d {
                        w[r] = (0..d).map(|c| j[r * d + c] * v[c]).sum();
                    }
                    let before = cones.parts(&v).0;
                    let after = cones.parts(&w).0;
                    log_growth += (after / before).ln();
                    let norm = w.iter().map(|c| c * c).sum::<f64>().sqrt();
                    v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / norm);
                    if !backward {
                        f.apply_raw(&x.clone(), &mut next);
                        x.copy_from_slice(&next);
                    }
                }
                Ok(log_growth / n as f64)
            })
            .collect()
    };
    let us = run(unstable, false)?;
    let ss = run(stable, true)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let spread = |v: &[f64], sign: f64| {
        let a = v
            .iter()
            .map(|x| (sign * x).exp())
            .fold(f64::INFINITY, f64::min);
        let b = v.iter().map(|x| (sign * x).exp()).fold(0.0, f64::max);
        [a, b]
    };
    Ok(EmpiricalRates {
        steps: n,
        lambda_u: mean(&us).exp(),
        lambda_s: (-mean(&ss)).exp(),
        lambda_u_spread: spread(&us, 1.0),
        lambda_s_spread: spread(&ss, -1.0),
    })
}
