//! Diffeomorphisms of T^d given by a lift F(x̃) = A·x̃ + p(x) with p periodic.

pub mod config;
pub mod horseshoe;
pub mod mane;
pub mod profiles;
pub mod t4;

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linear::LinearPart;
use crate::torus::{nearest_coord, reduce, LiftPoint, TorusPoint};

pub use config::{resolve, MapConfig, MapModel, REGISTRY};
pub use horseshoe::{HorseshoeIsotopy, HorseshoeParams, MarkovReport};
pub use mane::{ManeMap, ManeParams};
pub use t4::{T4Example, T4Params};

pub const MAX_DIM: usize = 8;

/// A basis of R^d (columns of `e`) used as chart coordinates ξ = E⁻¹x.
#[derive(Debug, Clone)]
pub struct Frame {
    d: usize,
    e: Vec<f64>,
    e_inv: Vec<f64>,
}

impl Frame {
    pub fn new(e: DMatrix<f64>) -> Result<Self> {
        let d = e.nrows();
        if e.ncols() != d || d > MAX_DIM {
            return Err(Error::InvalidParameter(
                "frame must be a square matrix of dimension ≤ 8".into(),
            ));
        }
        let inv = e
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular frame".into()))?;
        Ok(Frame {
            d,
            e: row_major(&e),
            e_inv: row_major(&inv),
        })
    }

    pub fn identity(d: usize) -> Self {
        Frame::new(DMatrix::identity(d, d)).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.e)
    }

    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.e_inv)
    }

    #[inline]
    pub fn to_chart(&self, x: &[f64], xi: &mut [f64]) {
        matvec(&self.e_inv, self.d, x, xi);
    }

    #[inline]
    pub fn from_chart(&self, xi: &[f64], x: &mut [f64]) {
        matvec(&self.e, self.d, xi, x);
    }
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

#[inline]
pub(crate) fn matvec(m: &[f64], d: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..d {
        let row = &m[i * d..i * d + d];
        out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// A local perturbation written in chart coordinates: a diffeomorphism H
/// of R^d agreeing with the chart linear map outside the box |ξᵢ| < ρᵢ.
pub trait ChartMap: Send + Sync + Debug {
    fn frame(&self) -> &Frame;
    /// Half-widths ρ of the support box.
    fn half_widths(&self) -> &[f64];
    fn map(&self, xi: &[f64], out: &mut [f64]);
    /// DH(ξ), row-major.
    fn jacobian(&self, xi: &[f64], out: &mut [f64]);
    /// H⁻¹(η) for η in the image of the support box.
    fn inverse(&self, eta: &[f64], out: &mut [f64]) -> Result<()>;

    fn in_support(&self, xi: &[f64]) -> bool {
        xi.iter().zip(self.half_widths()).all(|(x, r)| x.abs() < *r)
    }
}

#[derive(Debug, Clone)]
pub enum Perturbation {
    None,
    /// p(x) ≡ c.
    Constant(Vec<f64>),
    Chart(Arc<dyn ChartMap>),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            tol: 1e-12,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone)]
struct ChartData {
    chart: Arc<dyn ChartMap>,
    /// E⁻¹·A·E
    lambda: Vec<f64>,
    /// integer shifts k such that the support may meet [−1/2,1/2)^d + k
    shifts: Vec<Vec<f64>>,
}

/// A diffeomorphism of T^d isotopic to its integer linear part.
#[derive(Debug, Clone)]
pub struct TorusMap {
    linear: LinearPart,
    d: usize,
    a: Vec<f64>,
    a_inv: Vec<f64>,
    perturbation: Perturbation,
    chart: Option<ChartData>,
    pub newton: NewtonParams,
    label: String,
}

impl TorusMap {
    pub fn linear(a: LinearPart) -> Self {
        let label = format!("linear{}", a.dim());
        TorusMap::new(a, Perturbation::None, label).expect("no perturbation to validate")
    }

    pub fn new(
        linear: LinearPart,
        perturbation: Perturbation,
        label: impl Into<String>,
    ) -> Result<Self> {
        let d = linear.dim();
        if d > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension {d} exceeds {MAX_DIM}"
            )));
        }
        let a = row_major(&linear.matrix());
        let a_inv = row_major(&linear.inverse().matrix());
        let chart = match &perturbation {
            Perturbation::None => None,
            Perturbation::Constant(c) => {
                if c.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: c.len(),
                    });
                }
                None
            }
            Perturbation::Chart(ch) => {
                let fr = ch.frame();
                if fr.dim() != d || ch.half_widths().len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: fr.dim(),
                    });
                }
                let lam = fr.inverse_matrix() * linear.matrix() * fr.matrix();
                Some(ChartData {
                    chart: ch.clone(),
                    lambda: row_major(&lam),
                    shifts: support_shifts(fr, ch.half_widths()),
                })
            }
        };
        Ok(TorusMap {
            linear,
            d,
            a,
            a_inv,
            perturbation,
            chart,
            newton: NewtonParams::default(),
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn linear_part(&self) -> &LinearPart {
        &self.linear
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chart(&self) -> Option<&Arc<dyn ChartMap>> {
        self.chart.as_ref().map(|c| &c.chart)
    }

    /// Chart coordinates of the representative of x lying in the support,
    /// if there is one.
    #[inline]
    fn locate(&self, cd: &ChartData, x: &[f64], xi: &mut [f64]) -> bool {
        let d = self.d;
        let mut x0 = [0.0; MAX_DIM];
        for i in 0..d {
            x0[i] = nearest_coord(x[i], 0.0);
        }
        let fr = cd.chart.frame();
        let mut shifted = [0.0; MAX_DIM];
        for k in &cd.shifts {
            for i in 0..d {
                shifted[i] = x0[i] + k[i];
            }
            fr.to_chart(&shifted[..d], xi);
            if cd.chart.in_support(&xi[..d]) {
                return true;
            }
        }
        false
    }

    /// p(x) for x in [0,1)^d.
    #[inline]
    pub fn displacement_raw(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        match &self.perturbation {
            Perturbation::None => out[..d].fill(0.0),
            Perturbation::Constant(c) => out[..d].copy_from_slice(c),
            Perturbation::Chart(_) => {
                let cd = self.chart.as_ref().expect("chart data");
                let mut xi = [0.0; MAX_DIM];
                if !self.locate(cd, x, &mut xi) {
                    out[..d].fill(0.0);
                    return;
                }
                let mut h = [0.0; MAX_DIM];
                cd.chart.map(&xi[..d], &mut h[..d]);
                let mut lx = [0.0; MAX_DIM];
                matvec(&cd.lambda, d, &xi[..d], &mut lx[..d]);
                for i in 0..d {
                    h[i] -= lx[i];
                }
                cd.chart.frame().from_chart(&h[..d], out);
            }
        }
    }

    pub fn displacement(&self, x: &TorusPoint) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.displacement_raw(x.coords(), &mut out);
        out
    }

    /// F(x̃) on the universal cover.
    #[inline]
    pub fn apply_lift_raw(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let mut r = [0.0; MAX_DIM];
        for i in 0..d {
            r[i] = reduce(x[i]);
        }
        let mut p = [0.0; MAX_DIM];
        self.displacement_raw(&r[..d], &mut p);
        matvec(&self.a, d, x, out);
        for i in 0..d {
            out[i] += p[i];
        }
    }

    /// f(x) with x and the result in [0,1)^d.
    #[inline]
    pub fn apply_raw(&self, x: &[f64], out: &mut [f64]) {
        self.apply_lift_raw(x, out);
        for c in out[..self.d].iter_mut() {
            *c = reduce(*c);
        }
    }

    pub fn apply(&self, x: &TorusPoint) -> TorusPoint {
        let mut out = vec![0.0; self.d];
        self.apply_raw(x.coords(), &mut out);
        TorusPoint::wrapped(&out)
    }

    pub fn apply_lift(&self, x: &LiftPoint) -> LiftPoint {
        let mut out = vec![0.0; self.d];
        self.apply_lift_raw(x.coords(), &mut out);
        LiftPoint(out)
    }

    /// Df(x), row-major.
    pub fn jacobian_raw(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        out[..d * d].copy_from_slice(&self.a);
        if let Some(cd) = &self.chart {
            let mut xi = [0.0; MAX_DIM];
            if !self.locate(cd, x, &mut xi) {
                return;
            }
            let mut dh = [0.0; MAX_DIM * MAX_DIM];
            cd.chart.jacobian(&xi[..d], &mut dh[..d * d]);
            for i in 0..d * d {
                dh[i] -= cd.lambda[i];
            }
            let fr = cd.chart.frame();
            // E·(DH − Λ)·E⁻¹
            let mut tmp = [0.0; MAX_DIM * MAX_DIM];
            for i in 0..d {
                for j in 0..d {
                    tmp[i * d + j] = (0..d).map(|k| dh[i * d + k] * fr.e_inv[k * d + j]).sum();
                }
            }
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] += (0..d)
                        .map(|k| fr.e[i * d + k] * tmp[k * d + j])
                        .sum::<f64>();
                }
            }
        }
    }

    pub fn jacobian(&self, x: &TorusPoint) -> DMatrix<f64> {
        let mut out = vec![0.0; self.d * self.d];
        self.jacobian_raw(x.coords(), &mut out);
        DMatrix::from_row_slice(self.d, self.d, &out)
    }

    /// f⁻¹(y) with y and the result in [0,1)^d.
    pub fn invert_raw(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.d;
        match &self.perturbation {
            Perturbation::None => {
                matvec(&self.a_inv, d, y, out);
            }
            Perturbation::Constant(c) => {
                let mut t = [0.0; MAX_DIM];
                for i in 0..d {
                    t[i] = y[i] - c[i];
                }
                matvec(&self.a_inv, d, &t[..d], out);
            }
            Perturbation::Chart(_) => {
                let cd = self.chart.as_ref().expect("chart data");
                let mut w = [0.0; MAX_DIM];
                matvec(&self.a_inv, d, y, &mut w[..d]);
                for c in w[..d].iter_mut() {
                    *c = reduce(*c);
                }
                let mut xi = [0.0; MAX_DIM];
                if self.locate(cd, &w[..d], &mut xi) {
                    // F maps the support onto its linear image, so the chart
                    // preimage of Λξ is the answer.
                    let mut eta = [0.0; MAX_DIM];
                    matvec(&cd.lambda, d, &xi[..d], &mut eta[..d]);
                    let mut z = [0.0; MAX_DIM];
                    if cd.chart.inverse(&eta[..d], &mut z[..d]).is_err() {
                        return self.newton_invert(y, &w[..d], out);
                    }
                    cd.chart.frame().from_chart(&z[..d], out);
                } else {
                    out[..d].copy_from_slice(&w[..d]);
                }
            }
        }
        for c in out[..d].iter_mut() {
            *c = reduce(*c);
        }
        Ok(())
    }

    pub fn invert(&self, y: &TorusPoint) -> Result<TorusPoint> {
        let mut out = vec![0.0; self.d];
        self.invert_raw(y.coords(), &mut out)?;
        Ok(TorusPoint::wrapped(&out))
    }

    /// F⁻¹(ỹ) on the cover.
    pub fn invert_lift(&self, y: &LiftPoint) -> Result<LiftPoint> {
        let d = self.d;
        let yt = TorusPoint::wrapped(y.coords());
        let x = self.invert(&yt)?;
        let mut fx = vec![0.0; d];
        self.apply_lift_raw(x.coords(), &mut fx);
        // F(x) − ỹ is an integer vector m; shift by A⁻¹m
        let m: Vec<f64> = fx
            .iter()
            .zip(y.coords())
            .map(|(a, b)| (a - b).round())
            .collect();
        let mut shift = vec![0.0; d];
        matvec(&self.a_inv, d, &m, &mut shift);
        Ok(LiftPoint(
            x.coords().iter().zip(&shift).map(|(a, s)| a - s).collect(),
        ))
    }

    /// Newton's method on the lift, started from `guess`.
    fn newton_invert(&self, y: &[f64], guess: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.d;
        let target = self.nearest_image_lift(guess, y);
        let mut x: Vec<f64> = guess.to_vec();
        let mut fx = vec![0.0; d];
        let mut jac = vec![0.0; d * d];
        let mut residual = f64::INFINITY;
        for _ in 0..self.newton.max_iter {
            self.apply_lift_raw(&x, &mut fx);
            let r: Vec<f64> = fx.iter().zip(&target).map(|(a, b)| a - b).collect();
            residual = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if residual < self.newton.tol {
                out[..d].copy_from_slice(&x);
                return Ok(());
            }
            self.jacobian_raw(&x.iter().map(|&c| reduce(c)).collect::<Vec<_>>(), &mut jac);
            let j = DMatrix::from_row_slice(d, d, &jac);
            let step = j
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(&r))
                .ok_or_else(|| Error::Numerical("singular Jacobian in Newton inverse".into()))?;
            for i in 0..d {
                x[i] -= step[i];
            }
        }
        Err(Error::NewtonDivergence {
            iterations: self.newton.max_iter,
            residual,
        })
    }

    /// Lift of y closest to F(guess).
    fn nearest_image_lift(&self, guess: &[f64], y: &[f64]) -> Vec<f64> {
        let mut fx = vec![0.0; self.d];
        self.apply_lift_raw(guess, &mut fx);
        y.iter()
            .zip(&fx)
            .map(|(&c, &a)| nearest_coord(c, a))
            .collect()
    }

    /// Generic Newton inverse from the initial guess A⁻¹y (used when no
    /// closed-form chart inverse is available, and in tests).
    pub fn invert_newton(&self, y: &TorusPoint) -> Result<TorusPoint> {
        let d = self.d;
        let mut g = vec![0.0; d];
        matvec(&self.a_inv, d, y.coords(), &mut g);
        let mut out = vec![0.0; d];
        self.newton_invert(y.coords(), &g, &mut out)?;
        Ok(TorusPoint::wrapped(&out))
    }
}

/// Integer shifts k (zero first) for which the support box, pushed forward
/// by E, can meet the cube [−1/2,1/2)^d + k.
fn support_shifts(fr: &Frame, rho: &[f64]) -> Vec<Vec<f64>> {
    let d = fr.dim();
    let ext: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| fr.e[i * d + j].abs() * rho[j]).sum())
        .collect();
    let choices: Vec<Vec<f64>> = ext
        .iter()
        .map(|&e| {
            let m = (e - 0.5).ceil().max(0.0) as i64;
            let mut c = vec![0.0];
            for s in 1..=m {
                c.push(-(s as f64));
                c.push(s as f64);
            }
            c
        })
        .collect();
    let mut out = vec![vec![]];
    for c in &choices {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                c.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}
