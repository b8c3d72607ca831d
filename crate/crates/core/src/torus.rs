//! Points, lifts and the flat metric on T^d = R^d / Z^d.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce a real number into [0, 1).
#[inline]
pub fn reduce(c: f64) -> f64 {
    let r = c - c.floor();
    // c slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed difference a - b folded into [-1/2, 1/2).
#[inline]
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - (d + 0.5).floor()
}

/// Flat distance between two coordinate slices already in [0,1)^d.
#[inline]
pub fn dist_raw(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        let d = if d > 0.5 { 1.0 - d } else { d };
        s += d * d;
    }
    s.sqrt()
}

/// A point of T^d, stored by its representative in [0,1)^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TorusPoint(Vec<f64>);

/// A point of the universal cover R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LiftPoint(pub Vec<f64>);

impl TorusPoint {
    /// Fails unless every coordinate is in [0,1).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::Domain(format!("torus coordinate {c} not in [0,1)")));
        }
        Ok(TorusPoint(coords))
    }

    /// Reduce arbitrary coordinates mod 1.
    pub fn wrapped(coords: &[f64]) -> Self {
        TorusPoint(coords.iter().map(|&c| reduce(c)).collect())
    }

    pub fn origin(d: usize) -> Self {
        TorusPoint(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// The representative in [0,1)^d viewed as a lift.
    pub fn lift(&self) -> LiftPoint {
        LiftPoint(self.0.clone())
    }
}

impl TryFrom<Vec<f64>> for TorusPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        TorusPoint::new(v)
    }
}

impl From<TorusPoint> for Vec<f64> {
    fn from(p: TorusPoint) -> Vec<f64> {
        p.0
    }
}

impl LiftPoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Deck translation by an integer vector.
    pub fn translate(&self, k: &[i64]) -> LiftPoint {
        LiftPoint(self.0.iter().zip(k).map(|(c, &k)| c + k as f64).collect())
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// Minimum over k in Z^d of |x - y + k|.
pub fn torus_dist(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(dist_raw(&x.0, &y.0))
}

pub fn project(x: &LiftPoint) -> TorusPoint {
    TorusPoint::wrapped(&x.0)
}

/// Lift of `x` closest to `anchor`; ties go to the smaller coordinate.
pub fn nearest_lift(x: &TorusPoint, anchor: &LiftPoint) -> Result<LiftPoint> {
    check_dims(x.dim(), anchor.dim())?;
    Ok(LiftPoint(
        x.0.iter()
            .zip(&anchor.0)
            .map(|(&c, &a)| nearest_coord(c, a))
            .collect(),
    ))
}

#[inline]
pub(crate) fn nearest_coord(c: f64, anchor: f64) -> f64 {
    let base = c + (anchor - c).floor();
    if anchor - base <= base + 1.0 - anchor {
        base
    } else {
        base + 1.0
    }
}

/// Nodes of a regular grid (row-major, last axis fastest) or a seeded
/// uniform random sample when `samples` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

impl SampleGrid {
    pub fn regular(resolution: Vec<usize>) -> Self {
        SampleGrid {
            resolution,
            seed: None,
            samples: None,
        }
    }

    pub fn uniform(d: usize, samples: usize, seed: u64) -> Self {
        SampleGrid {
            resolution: vec![1; d],
            seed: Some(seed),
            samples: Some(samples),
        }
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn len(&self) -> usize {
        match self.samples {
            Some(n) => n,
            None => self.resolution.iter().product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution.is_empty() || self.resolution.contains(&0) {
            return Err(Error::InvalidParameter(
                "grid resolution must be positive on every axis".into(),
            ));
        }
        Ok(())
    }

    /// Flat coordinate array, `dim()` values per point.
    pub fn coords(&self) -> Vec<f64> {
        let d = self.dim();
        match self.samples {
            Some(n) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
                (0..n * d).map(|_| rng.random::<f64>()).collect()
            }
            None => {
                let total = self.len();
                let mut out = Vec::with_capacity(total * d);
                let mut idx = vec![0usize; d];
                for _ in 0..total {
                    for (i, &k) in idx.iter().enumerate() {
                        out.push(k as f64 / self.resolution[i] as f64);
                    }
                    for ax in (0..d).rev() {
                        idx[ax] += 1;
                        if idx[ax] < self.resolution[ax] {
                            break;
                        }
                        idx[ax] = 0;
                    }
                }
                out
            }
        }
    }

    pub fn points(&self) -> Vec<TorusPoint> {
        let d = self.dim();
        self.coords()
            .chunks(d)
            .map(|c| TorusPoint(c.to_vec()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_never_returns_one() {
        assert_eq!(reduce(-1e-18), 0.0);
        assert_eq!(reduce(3.0), 0.0);
        assert!((reduce(-0.25) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn wrap_diff_range() {
        assert!((wrap_diff(0.9, 0.1) + 0.2).abs() < 1e-12);
        assert!((wrap_diff(0.1, 0.9) - 0.2).abs() < 1e-12);
        assert_eq!(wrap_diff(0.5, 0.0), -0.5);
    }

    #[test]
    fn grid_enumeration_is_row_major() {
        let g = SampleGrid::regular(vec![2, 3]);
        let c = g.coords();
        assert_eq!(g.len(), 6);
        assert_eq!(&c[..4], &[0.0, 0.0, 0.0, 1.0 / 3.0]);
        assert_eq!(&c[6..8], &[0.5, 0.0]);
    }
}
