//! Isotopy h_t of the unit disc from a Smale horseshoe (t = 0) to the
//! conformal contraction λ_ws (t ≥ 1/2).
//!
//! h_t = λ_ws ∘ S_t with S_t(x, y) = (x, y + s(t)·φ(x)·β(y)) a sheared fold.
//! With λ_ws = ½·R(π/2) and local coordinates (X, Y) centred at (x_c, y_c)
//! the time-0 map is the Hénon-type fold (X, Y) ↦ (ψ(X) − Y/2, X/2) with
//! ψ(X) = c₀ − κ√(X² + e²), which carries two thin rectangles R₀, R₁
//! fully across each other.

use serde::{Deserialize, Serialize};

use super::profiles::{smoothstep, solve_increasing, Bump};
use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Modulus and rotation angle of λ_ws.
pub const CONTRACTION_MODULUS: f64 = 0.5;
pub const ROTATION_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorseshoeParams {
    /// Half-length a of the fold region; rectangles have size ~a × a.
    pub scale: f64,
    /// Fold curvature κ.
    pub kappa: f64,
    /// Exact-fold half-width as a fraction of `scale`.
    pub fold_plateau: f64,
    /// Length of the Hermite taper of φ, in units of `scale`.
    pub taper: f64,
    /// Width of the cutoff β in y, in units of `scale`.
    pub slab_taper: f64,
    /// Extra height of the fold crest, in units of `scale`.
    pub crest_margin: f64,
}

impl Default for HorseshoeParams {
    fn default() -> Self {
        HorseshoeParams {
            scale: 0.04,
            kappa: 2.85,
            fold_plateau: 0.97,
            taper: 2.0,
            slab_taper: 10.0,
            crest_margin: 0.063,
        }
    }
}

/// Axis-aligned rectangle [x0, x1] × [y0, y1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub verified: bool,
    pub t: f64,
    pub edge_samples: usize,
    /// A boundary point whose image violates the crossing condition.
    pub witness: Option<Vec2>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone)]
pub struct HorseshoeIsotopy {
    pub params: HorseshoeParams,
    lambda: Mat2,
    half_height: f64,
    inner: f64,
    outer: f64,
    eps: f64,
    c0: f64,
    xc: f64,
    yc: f64,
    plateau: f64,
    taper: f64,
    phi_edge: f64,
    dphi_edge: f64,
    slab: Bump,
}

impl HorseshoeIsotopy {
    pub fn new(params: HorseshoeParams) -> Result<Self> {
        let a = params.scale;
        if !(a > 0.0 && a < 0.1)
            || params.kappa <= 0.0
            || params.taper <= 0.0
            || params.slab_taper <= 0.0
        {
            return Err(Error::InvalidParameter(
                "horseshoe parameters must be positive with scale < 0.1".into(),
            ));
        }
        if !(params.fold_plateau > 0.96 && params.fold_plateau < 2.0) {
            return Err(Error::InvalidParameter(
                "fold_plateau must exceed the rectangle half-width 0.96".into(),
            ));
        }
        let m = CONTRACTION_MODULUS;
        let half_height = a / 2.0;
        let inner = 0.06 * a;
        let outer = 0.96 * a;
        let eps = 0.03 * a;
        let c0 = 1.25 * a + params.kappa * inner.hypot(eps) + params.crest_margin * a;
        let psi = |x: f64| c0 - params.kappa * x.hypot(eps);
        // the origin is the saddle of the fold: ψ(X*) = (1 + m²)X*
        let xs = bisect(|x| psi(x) - (1.0 + m * m) * x, inner, outer).ok_or_else(|| {
            Error::InvalidParameter("fold has no saddle inside the right rectangle".into())
        })?;
        let xc = -xs;
        let yc = m * xc;
        let plateau = params.fold_plateau * a;
        let mut iso = HorseshoeIsotopy {
            params,
            lambda: [[0.0, -m], [m, 0.0]],
            half_height,
            inner,
            outer,
            eps,
            c0,
            xc,
            yc,
            plateau,
            taper: params.taper * a,
            phi_edge: 0.0,
            dphi_edge: 0.0,
            slab: Bump::new(1.05 * half_height, params.slab_taper * a),
        };
        let (pe, dpe) = iso.fold_core(plateau);
        iso.phi_edge = pe;
        iso.dphi_edge = dpe;
        if iso.support_radius() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "fold support radius {:.4} does not fit inside D_1/2",
                iso.support_radius()
            )));
        }
        Ok(iso)
    }

    pub fn lambda_ws(&self) -> Mat2 {
        self.lambda
    }

    /// Centre (x_c, y_c) of the local fold coordinates.
    pub fn fold_center(&self) -> Vec2 {
        [self.xc, self.yc]
    }

    /// Markov rectangles R₀, R₁ in disc coordinates.
    pub fn rectangles(&self) -> [Rect; 2] {
        let r = |l: f64, h: f64| Rect {
            x0: self.xc + l,
            x1: self.xc + h,
            y0: self.yc - self.half_height,
            y1: self.yc + self.half_height,
        };
        [r(-self.outer, -self.inner), r(self.inner, self.outer)]
    }

    /// Radius of a disc containing the support of S_t − Id.
    pub fn support_radius(&self) -> f64 {
        let xr = self.plateau + self.taper;
        let yr = self.slab.support();
        let mut r: f64 = 0.0;
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                r = r.max((self.xc + sx * xr).hypot(self.yc + sy * yr));
            }
        }
        r
    }

    /// Ramp s(t) = 1 − smoothstep(2t) and s'(t).
    #[inline]
    pub fn ramp(t: f64) -> (f64, f64) {
        let (s, ds) = smoothstep(2.0 * t);
        (1.0 - s, -2.0 * ds)
    }

    /// −ψ(X)/m − (1 + m²)x_c/m with X = x − x_c, i.e. φ on the exact fold.
    #[inline]
    fn fold_core(&self, xx: f64) -> (f64, f64) {
        let m = CONTRACTION_MODULUS;
        let k = self.params.kappa;
        let root = xx.hypot(self.eps);
        let psi = self.c0 - k * root;
        let dpsi = -k * xx / root;
        (-psi / m - (1.0 + m * m) * self.xc / m, -dpsi / m)
    }

    /// Fold amplitude φ(x) and φ'(x).
    #[inline]
    pub fn phi(&self, x: f64) -> (f64, f64) {
        let xx = x - self.xc;
        let ax = xx.abs();
        if ax <= self.plateau {
            return self.fold_core(xx);
        }
        let u = (ax - self.plateau) / self.taper;
        if u >= 1.0 {
            return (0.0, 0.0);
        }
        // cubic Hermite from (φ, φ') at the plateau edge to (0, 0); φ is even in X
        let l = self.taper;
        let (p0, m0) = (self.phi_edge, self.dphi_edge);
        let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
        let h10 = u * u * u - 2.0 * u * u + u;
        let dh00 = 6.0 * u * u - 6.0 * u;
        let dh10 = 3.0 * u * u - 4.0 * u + 1.0;
        (
            h00 * p0 + h10 * l * m0,
            (dh00 * p0 + dh10 * l * m0) / l * xx.signum(),
        )
    }

    /// S_t(z), its Jacobian, and ∂S_t/∂t.
    #[inline]
    pub fn shear(&self, t: f64, z: Vec2) -> (Vec2, Mat2, Vec2) {
        let (s, ds) = Self::ramp(t);
        let (p, dp) = self.phi(z[0]);
        let (b, db) = self.slab.eval(z[1] - self.yc);
        (
            [z[0], z[1] + s * p * b],
            [[1.0, 0.0], [s * dp * b, 1.0 + s * p * db]],
            [0.0, ds * p * b],
        )
    }

    /// S_t⁻¹(w): x is unchanged and y solves a monotone scalar equation.
    pub fn shear_inverse(&self, t: f64, w: Vec2) -> Result<Vec2> {
        let (s, _) = Self::ramp(t);
        let (p, _) = self.phi(w[0]);
        let amp = s * p;
        if amp == 0.0 {
            return Ok(w);
        }
        let f = |y: f64| {
            let (b, db) = self.slab.eval(y - self.yc);
            (y + amp * b, 1.0 + amp * db)
        };
        let y = solve_increasing(
            f,
            w[1],
            w[1] - amp.abs() - 1e-12,
            w[1] + amp.abs() + 1e-12,
            1e-16,
        )?;
        Ok([w[0], y])
    }

    #[inline]
    fn unchecked(&self, t: f64, z: Vec2) -> (Vec2, Mat2) {
        let (w, dw, _) = self.shear(t, z);
        (mat_vec(&self.lambda, w), mat_mul(&self.lambda, &dw))
    }

    fn check(t: f64, z: Vec2) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("isotopy time {t} outside [0,1]")));
        }
        if z[0].hypot(z[1]) > 1.0 {
            return Err(Error::Domain(format!(
                "point ({}, {}) outside the unit disc",
                z[0], z[1]
            )));
        }
        Ok(())
    }

    /// h_t(z) for |z| ≤ 1.
    pub fn map(&self, t: f64, z: Vec2) -> Result<Vec2> {
        Self::check(t, z)?;
        Ok(self.unchecked(t, z).0)
    }

    pub fn jacobian(&self, t: f64, z: Vec2) -> Result<Mat2> {
        Self::check(t, z)?;
        Ok(self.unchecked(t, z).1)
    }

    /// ĥ_t = e_t⁻¹ ∘ h_t ∘ e_t with e_t(z) = z/t, extended by λ_ws.
    pub fn rescaled(&self, t: f64, z: Vec2) -> Result<Vec2> {
        Ok(self.rescaled_with_jacobian(t, z)?.0)
    }

    pub fn rescaled_with_jacobian(&self, t: f64, z: Vec2) -> Result<(Vec2, Mat2)> {
        if t <= 0.0 || t > 1.0 {
            return Err(Error::Domain(format!(
                "rescaling parameter {t} must lie in (0,1]"
            )));
        }
        if z[0].hypot(z[1]) >= t {
            return Ok((mat_vec(&self.lambda, z), self.lambda));
        }
        let (w, dw) = self.unchecked(t, [z[0] / t, z[1] / t]);
        Ok(([t * w[0], t * w[1]], dw))
    }

    /// Dense boundary sampling of the crossing condition at time t: the
    /// images of the vertical sides of each Rᵢ fall outside both
    /// rectangles, one on each side, and the images of the horizontal
    /// sides stay inside the common horizontal slab.
    pub fn markov_check(&self, t: f64, samples: usize) -> MarkovReport {
        let samples = samples.max(2);
        let mut report = MarkovReport {
            verified: true,
            t,
            edge_samples: 0,
            witness: None,
            reason: None,
        };
        let fail = |rep: &mut MarkovReport, z: Vec2, why: String| {
            rep.verified = false;
            rep.witness = Some(z);
            rep.reason = Some(why);
        };
        let rects = self.rectangles();
        let (left, right) = (self.xc - self.outer, self.xc + self.outer);
        let (bottom, top) = (self.yc - self.half_height, self.yc + self.half_height);
        for (ri, r) in rects.iter().enumerate() {
            let mut side = [0i8; 2];
            for (ei, &x) in [r.x0, r.x1].iter().enumerate() {
                for k in 0..samples {
                    let y = r.y0 + (r.y1 - r.y0) * k as f64 / (samples - 1) as f64;
                    let img = self.unchecked(t, [x, y]).0;
                    report.edge_samples += 1;
                    let s = if img[0] < left {
                        -1
                    } else if img[0] > right {
                        1
                    } else {
                        0
                    };
                    if s == 0 || (side[ei] != 0 && side[ei] != s) {
                        fail(
                            &mut report,
                            [x, y],
                            format!(
                                "vertical side {ei} of R{ri} does not map outside the rectangles"
                            ),
                        );
                        return report;
                    }
                    side[ei] = s;
                }
            }
            if side[0] == side[1] {
                fail(
                    &mut report,
                    [r.x0, r.y0],
                    format!("both vertical sides of R{ri} land on the same side"),
                );
                return report;
            }
            for &y in &[r.y0, r.y1] {
                for k in 0..samples {
                    let x = r.x0 + (r.x1 - r.x0) * k as f64 / (samples - 1) as f64;
                    let img = self.unchecked(t, [x, y]).0;
                    report.edge_samples += 1;
                    if !(img[1] > bottom && img[1] < top) {
                        fail(
                            &mut report,
                            [x, y],
                            format!("horizontal side of R{ri} leaves the slab"),
                        );
                        return report;
                    }
                }
            }
        }
        report
    }

    /// Largest operator norm of Dh_t over a grid covering the fold support
    /// and the given times.
    pub fn derivative_bound(&self, times: &[f64], nx: usize, ny: usize) -> f64 {
        let xr = self.plateau + self.taper;
        let yr = self.slab.support();
        let mut best: f64 = mat_norm(&self.lambda);
        for &t in times {
            for i in 0..nx {
                let x = self.xc - xr + 2.0 * xr * i as f64 / (nx - 1) as f64;
                for j in 0..ny {
                    let y = self.yc - yr + 2.0 * yr * j as f64 / (ny - 1) as f64;
                    best = best.max(mat_norm(&self.unchecked(t, [x, y]).1));
                }
            }
        }
        best
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m).signum() == flo.signum() {
            lo = m;
        } else {
            hi = m;
        }
    }
    Some(0.5 * (lo + hi))
}

#[inline]
pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Spectral norm of a 2×2 matrix.
pub fn mat_norm(m: &Mat2) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}
