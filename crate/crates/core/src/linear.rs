//! Integer matrices acting on T^d: hyperbolicity, spectral splitting and
//! the entropy of a linear automorphism.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const TAU_HYP: f64 = 1e-8;

/// An integer d×d matrix with |det| = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct LinearPart {
    dim: usize,
    entries: Vec<i64>,
    det: i64,
}

impl TryFrom<Vec<Vec<i64>>> for LinearPart {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        LinearPart::from_rows(&rows)
    }
}

impl From<LinearPart> for Vec<Vec<i64>> {
    fn from(a: LinearPart) -> Self {
        a.rows()
    }
}

/// Outcome of the hyperbolicity test together with the eigenvalue modulus
/// closest to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicityTest {
    pub hyperbolic: bool,
    pub closest_modulus: f64,
}

impl LinearPart {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Config("empty matrix".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        let entries: Vec<i64> = rows.iter().flatten().copied().collect();
        let det = bareiss_det(d, &entries);
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det));
        }
        Ok(LinearPart {
            dim: d,
            entries,
            det,
        })
    }

    /// Accepts either nested rows or a flat row-major array of d² integers.
    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Config("matrix must be a JSON array".into()))?;
        let as_int = |x: &Value| {
            x.as_i64()
                .ok_or_else(|| Error::Config(format!("matrix entry {x} is not an integer")))
        };
        if arr.iter().all(Value::is_array) {
            let rows = arr
                .iter()
                .map(|r| {
                    r.as_array()
                        .unwrap()
                        .iter()
                        .map(as_int)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            LinearPart::from_rows(&rows)
        } else {
            let flat = arr.iter().map(as_int).collect::<Result<Vec<_>>>()?;
            let d = (flat.len() as f64).sqrt().round() as usize;
            if d * d != flat.len() {
                return Err(Error::Config(format!(
                    "{} entries do not form a square matrix",
                    flat.len()
                )));
            }
            LinearPart::from_rows(&flat.chunks(d).map(<[i64]>::to_vec).collect::<Vec<_>>())
        }
    }

    /// Built-in matrices: "paper-t4" and "cat".
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "paper-t4" => Ok(t4_matrix()),
            "cat" => Ok(cat_matrix()),
            _ => Err(Error::Config(format!("unknown matrix name '{name}'"))),
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut entries = vec![0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        LinearPart {
            dim: d,
            entries,
            det: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.dim).map(<[i64]>::to_vec).collect()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(|&e| e as f64))
    }

    /// Integer inverse (exists because |det| = 1).
    pub fn inverse(&self) -> LinearPart {
        let d = self.dim;
        let mut inv = vec![0i64; d * d];
        // adjugate via cofactors; d is small
        for i in 0..d {
            for j in 0..d {
                let minor: Vec<i64> = (0..d)
                    .filter(|&r| r != j)
                    .flat_map(|r| (0..d).filter(move |&c| c != i).map(move |c| (r, c)))
                    .map(|(r, c)| self.entries[r * d + c])
                    .collect();
                let cof = if d == 1 {
                    1
                } else {
                    bareiss_det(d - 1, &minor)
                };
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                inv[i * d + j] = sign * cof * self.det;
            }
        }
        LinearPart {
            dim: d,
            entries: inv,
            det: self.det,
        }
    }

    pub fn mul(&self, other: &LinearPart) -> Result<LinearPart> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let d = self.dim;
        let mut e = vec![0i64; d * d];
        for i in 0..d {
            for j in 0..d {
                e[i * d + j] = (0..d)
                    .map(|k| self.entries[i * d + k] * other.entries[k * d + j])
                    .sum();
            }
        }
        Ok(LinearPart {
            dim: d,
            entries: e,
            det: self.det * other.det,
        })
    }

    pub fn pow(&self, k: u32) -> LinearPart {
        let mut out = LinearPart::identity(self.dim);
        for _ in 0..k {
            out = out.mul(self).expect("same dimension");
        }
        out
    }

    /// Eigenvalues sorted by increasing modulus.
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        let mut ev: Vec<Complex<f64>> = self
            .matrix()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| {
            a.norm()
                .total_cmp(&b.norm())
                .then(a.re.total_cmp(&b.re))
                .then(a.im.total_cmp(&b.im))
        });
        ev
    }

    pub fn is_hyperbolic(&self, tau: f64) -> HyperbolicityTest {
        let closest = self
            .eigenvalues()
            .iter()
            .map(|l| l.norm())
            .min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
            .unwrap_or(1.0);
        HyperbolicityTest {
            hyperbolic: (closest - 1.0).abs() > tau,
            closest_modulus: closest,
        }
    }

    fn require_hyperbolic(&self) -> Result<()> {
        let t = self.is_hyperbolic(TAU_HYP);
        if !t.hyperbolic {
            return Err(Error::NotHyperbolic {
                modulus: t.closest_modulus,
                tol: TAU_HYP,
            });
        }
        Ok(())
    }

    /// Sum of log|λ| over eigenvalues outside the unit circle.
    pub fn entropy(&self) -> Result<f64> {
        self.require_hyperbolic()?;
        Ok(self
            .eigenvalues()
            .iter()
            .map(|l| l.norm())
            .filter(|&m| m > 1.0)
            .map(f64::ln)
            .sum())
    }

    pub fn spectral_split(&self) -> Result<SpectralSplit> {
        self.require_hyperbolic()?;
        SpectralSplit::new(self)
    }
}

pub fn linear_entropy(a: &LinearPart) -> Result<f64> {
    a.entropy()
}

pub fn is_hyperbolic(a: &LinearPart, tau: f64) -> HyperbolicityTest {
    a.is_hyperbolic(tau)
}

pub fn spectral_split(a: &LinearPart) -> Result<SpectralSplit> {
    a.spectral_split()
}

/// The companion matrix of x⁴ − 10x³ − 10x² + x + 1.
pub fn t4_matrix() -> LinearPart {
    LinearPart::from_rows(&[
        vec![0, 0, 0, -1],
        vec![1, 0, 0, -1],
        vec![0, 1, 0, 10],
        vec![0, 0, 1, 10],
    ])
    .expect("unimodular")
}

pub fn cat_matrix() -> LinearPart {
    LinearPart::from_rows(&[vec![2, 1], vec![1, 1]]).expect("unimodular")
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
fn bareiss_det(d: usize, entries: &[i64]) -> i64 {
    let mut m: Vec<i128> = entries.iter().map(|&e| e as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..d {
        if m[k * d + k] == 0 {
            match (k + 1..d).find(|&r| m[r * d + k] != 0) {
                Some(r) => {
                    for c in 0..d {
                        m.swap(k * d + c, r * d + c);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                m[i * d + j] = (m[i * d + j] * m[k * d + k] - m[i * d + k] * m[k * d + j]) / prev;
            }
        }
        prev = m[k * d + k];
    }
    (sign * m[d * d - 1]) as i64
}

/// Projectors onto the stable and unstable generalized eigenspaces with
/// orthonormal bases and long-run rates.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub stable_projector: DMatrix<f64>,
    pub unstable_projector: DMatrix<f64>,
    /// Orthonormal columns spanning the stable subspace.
    pub stable_basis: DMatrix<f64>,
    pub unstable_basis: DMatrix<f64>,
    /// lim ‖Aⁿ restricted to E^s‖^{1/n}
    pub contraction_rate: f64,
    /// lim ‖A⁻ⁿ restricted to E^u‖^{-1/n}
    pub expansion_rate: f64,
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    stable_block: DMatrix<f64>,
    unstable_inv_block: DMatrix<f64>,
}

impl SpectralSplit {
    fn new(lin: &LinearPart) -> Result<Self> {
        let d = lin.dim();
        let a = lin.matrix();
        let a_inv = lin.inverse().matrix();
        let id = DMatrix::<f64>::identity(d, d);
        // Cayley transform sends the open unit disc to the left half plane;
        // the matrix sign function then separates the two spectral halves.
        let plus = (&a + &id)
            .try_inverse()
            .ok_or_else(|| Error::Numerical("A + I is singular".into()))?;
        let mut x = (&a - &id) * plus;
        for _ in 0..100 {
            let xi = x
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("sign iteration hit a singular matrix".into()))?;
            let det = x.determinant().abs();
            let c = if det > 0.0 {
                det.powf(-1.0 / d as f64)
            } else {
                1.0
            };
            let next = (&x * c + xi / c) * 0.5;
            let change = (&next - &x).abs().max();
            x = next;
            if change < 1e-15 * x.abs().max().max(1.0) {
                break;
            }
        }
        // polish without scaling
        for _ in 0..3 {
            let xi = x
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("sign iteration hit a singular matrix".into()))?;
            x = (&x + xi) * 0.5;
        }
        let stable_projector = (&id - &x) * 0.5;
        let unstable_projector = (&id + &x) * 0.5;
        let stable_basis = range_basis(&stable_projector);
        let unstable_basis = range_basis(&unstable_projector);
        if stable_basis.ncols() + unstable_basis.ncols() != d {
            return Err(Error::Numerical(
                "spectral projectors have inconsistent ranks".into(),
            ));
        }
        let stable_block = stable_basis.transpose() * &a * &stable_basis;
        let unstable_inv_block = unstable_basis.transpose() * &a_inv * &unstable_basis;
        let contraction_rate = power_rate(&stable_block);
        let expansion_rate = 1.0 / power_rate(&unstable_inv_block);
        Ok(SpectralSplit {
            stable_projector,
            unstable_projector,
            stable_basis,
            unstable_basis,
            contraction_rate,
            expansion_rate,
            a,
            a_inv,
            stable_block,
            unstable_inv_block,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.stable_basis.ncols(), self.unstable_basis.ncols())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    /// Aʲ·P_s, computed inside the stable subspace so that rounding errors
    /// are not amplified along the unstable directions.
    pub fn stable_power(&self, j: usize) -> DMatrix<f64> {
        let q = &self.stable_basis;
        let mut b = DMatrix::<f64>::identity(q.ncols(), q.ncols());
        for _ in 0..j {
            b = &self.stable_block * b;
        }
        q * b * q.transpose() * &self.stable_projector
    }

    /// A⁻ʲ·P_u, computed inside the unstable subspace.
    pub fn unstable_inverse_power(&self, j: usize) -> DMatrix<f64> {
        let q = &self.unstable_basis;
        let mut b = DMatrix::<f64>::identity(q.ncols(), q.ncols());
        for _ in 0..j {
            b = &self.unstable_inv_block * b;
        }
        q * b * q.transpose() * &self.unstable_projector
    }

    /// Σ_{j≥0} ‖Aʲ P_s‖ + Σ_{j≥1} ‖A⁻ʲ P_u‖, the constant in the
    /// contraction-mapping bound ‖u‖ ≤ C·‖p‖.
    pub fn shadowing_constant(&self) -> f64 {
        let mut total = 0.0;
        for (start, stable) in [(0usize, true), (1usize, false)] {
            let mut j = start;
            let mut m = if stable {
                self.stable_power(j)
            } else {
                self.unstable_inverse_power(j)
            };
            loop {
                let n = op_norm(&m);
                total += n;
                if n < 1e-17 || j > 20_000 {
                    break;
                }
                j += 1;
                m = if stable { &self.a * m } else { &self.a_inv * m };
                // re-project to keep the iterate inside its subspace
                m = if stable {
                    &self.stable_projector * m
                } else {
                    &self.unstable_projector * m
                };
            }
        }
        total
    }

    /// Euclidean operator norm of A·P_s, the one-step factor of the stable update.
    pub fn stable_step_norm(&self) -> f64 {
        op_norm(&(&self.a * &self.stable_projector))
    }

    /// Euclidean operator norm of A⁻¹·P_u.
    pub fn unstable_step_norm(&self) -> f64 {
        op_norm(&(&self.a_inv * &self.unstable_projector))
    }
}

pub(crate) fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn range_basis(p: &DMatrix<f64>) -> DMatrix<f64> {
    // rank of a projector is its trace; pick columns by largest remaining
    // norm and orthonormalize (twice, for stability)
    let rank = p.trace().round().max(0.0) as usize;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(rank);
    let mut rest: Vec<DVector<f64>> = p.column_iter().map(|c| c.into_owned()).collect();
    for _ in 0..rank.min(p.ncols()) {
        let (k, _) = rest
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.norm()))
            .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        let mut q = rest[k].clone();
        for _ in 0..2 {
            for b in &basis {
                q -= b * b.dot(&q);
            }
        }
        let n = q.norm();
        if n == 0.0 {
            break;
        }
        q /= n;
        for c in rest.iter_mut() {
            let d = q.dot(c);
            *c -= &q * d;
        }
        basis.push(q);
    }
    if basis.is_empty() {
        DMatrix::zeros(p.nrows(), 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// ‖B^n‖^{1/n} for n = 2^12 by renormalized repeated squaring.
fn power_rate(b: &DMatrix<f64>) -> f64 {
    if b.nrows() == 0 {
        return 0.0;
    }
    let mut m = b.clone();
    let mut log_scale = 0.0;
    let mut n = 1.0;
    for _ in 0..12 {
        m = &m * &m;
        log_scale *= 2.0;
        n *= 2.0;
        let s = op_norm(&m);
        if s == 0.0 {
            return 0.0;
        }
        m /= s;
        log_scale += s.ln();
    }
    (log_scale / n).exp()
}
