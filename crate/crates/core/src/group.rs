//! Two-step nilpotent (osculating) groups on `R^{d+1}` with the parabolic
//! grading: `x0` has degree 2, `x1..xd` have degree 1.
//!
//! The group law is
//!
//! ```text
//! (x·y)_0 = x0 + y0 + Σ_{j,k} b_jk x_k y_j,     (x·y)' = x' + y'
//! ```
//!
//! whose left-invariant fields are `X_j = ∂_j + (Σ_k b_jk x_k) ∂_0` and
//! `X_0 = ∂_0`, with brackets `[X_j, X_k] = L_jk X_0` for `L = bᵗ − b`.
//! The Heisenberg group `H^{2n+1}` is the case `b_{j,n+j} = 1`,
//! `b_{n+j,j} = -1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frames whose reciprocal condition number falls below this are rejected.
pub const FRAME_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x0: f64,
    #[serde(rename = "xp")]
    pub xprime: Vec<f64>,
}

impl Point {
    pub fn new(x0: f64, xprime: Vec<f64>) -> Self {
        Self { x0, xprime }
    }

    pub fn origin(d: usize) -> Self {
        Self::new(0.0, vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.xprime.len()
    }

    /// Coordinates as a single vector `(x0, x1, ..., xd)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim() + 1);
        v[0] = self.x0;
        for (k, &c) in self.xprime.iter().enumerate() {
            v[k + 1] = c;
        }
        v
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self::new(v[0], v.iter().skip(1).copied().collect())
    }

    /// Squared Euclidean norm of the degree-one part.
    pub fn r2(&self) -> f64 {
        self.xprime.iter().map(|c| c * c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupSpecRepr", into = "GroupSpecRepr")]
pub struct GroupSpec {
    b: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct GroupSpecRepr {
    d: usize,
    b: Vec<Vec<f64>>,
}

impl TryFrom<GroupSpecRepr> for GroupSpec {
    type Error = Error;

    fn try_from(r: GroupSpecRepr) -> Result<Self> {
        if r.b.len() != r.d {
            return Err(Error::DimensionMismatch {
                expected: r.d,
                found: r.b.len(),
            });
        }
        for row in &r.b {
            if row.len() != r.d {
                return Err(Error::DimensionMismatch {
                    expected: r.d,
                    found: row.len(),
                });
            }
        }
        let b = DMatrix::from_fn(r.d, r.d, |i, j| r.b[i][j]);
        GroupSpec::new(b)
    }
}

impl From<GroupSpec> for GroupSpecRepr {
    fn from(g: GroupSpec) -> Self {
        let d = g.d();
        GroupSpecRepr {
            d,
            b: (0..d)
                .map(|i| (0..d).map(|j| g.b[(i, j)]).collect())
                .collect(),
        }
    }
}

impl GroupSpec {
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::DimensionMismatch {
                expected: b.nrows(),
                found: b.ncols(),
            });
        }
        if b.nrows() == 0 {
            return Err(Error::OutOfRange("d must be positive".into()));
        }
        Ok(Self { b })
    }

    /// The Heisenberg group `H^{2n+1}`, `x·y = (x0 + y0 + Σ_j (x_{n+j} y_j − x_j y_{n+j}), x' + y')`.
    pub fn heisenberg(n: usize) -> Self {
        let d = 2 * n;
        let mut b = DMatrix::zeros(d, d);
        for j in 0..n {
            b[(j, n + j)] = 1.0;
            b[(n + j, j)] = -1.0;
        }
        Self { b }
    }

    pub fn d(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if x.dim() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// `Σ_{j,k} b_jk x_k y_j`.
    pub fn pairing(&self, x: &[f64], y: &[f64]) -> f64 {
        self.b
            .row_iter()
            .zip(y)
            .map(|(row, yj)| row.iter().zip(x).map(|(b, xk)| b * xk).sum::<f64>() * yj)
            .sum()
    }

    pub fn mul(&self, x: &Point, y: &Point) -> Result<Point> {
        self.check(x)?;
        self.check(y)?;
        let x0 = x.x0 + y.x0 + self.pairing(&x.xprime, &y.xprime);
        let xp = x.xprime.iter().zip(&y.xprime).map(|(a, b)| a + b).collect();
        Ok(Point::new(x0, xp))
    }

    pub fn identity(&self) -> Point {
        Point::origin(self.d())
    }

    pub fn inverse(&self, x: &Point) -> Result<Point> {
        self.check(x)?;
        let q = self.pairing(&x.xprime, &x.xprime);
        Ok(Point::new(-x.x0 + q, x.xprime.iter().map(|c| -c).collect()))
    }

    /// `L = bᵗ − b`, so that `[X_j, X_k] = L_jk X_0`.
    pub fn structure_constants(&self) -> DMatrix<f64> {
        structure_constants(&self.b)
    }

    /// Model field `X_j`; `j = 0` is the central field `∂_0`.
    pub fn field(&self, j: usize) -> Result<FirstOrderField> {
        if j > self.d() {
            return Err(Error::OutOfRange(format!(
                "field index {j} exceeds d = {}",
                self.d()
            )));
        }
        let drift = (j > 0).then(|| self.b.row(j - 1).transpose());
        Ok(FirstOrderField { index: j, drift })
    }

    /// The group whose law uses only the antisymmetric part `½(b − bᵗ)`.
    pub fn antisymmetrized(&self) -> Self {
        Self {
            b: (&self.b - self.b.transpose()) * 0.5,
        }
    }
}

pub fn group_mul(g: &GroupSpec, x: &Point, y: &Point) -> Result<Point> {
    g.mul(x, y)
}

/// Parabolic dilation `(λ² x0, λ x')`.
pub fn dilate(lambda: f64, x: &Point) -> Point {
    Point::new(
        lambda * lambda * x.x0,
        x.xprime.iter().map(|c| lambda * c).collect(),
    )
}

/// `(x0² + |x'|⁴)^{1/4}`, homogeneous of degree one under [`dilate`].
pub fn pseudo_norm(x: &Point) -> f64 {
    let r2 = x.r2();
    (x.x0 * x.x0 + r2 * r2).sqrt().sqrt()
}

pub fn structure_constants(b: &DMatrix<f64>) -> DMatrix<f64> {
    b.transpose() - b
}

/// A left-invariant first-order field on the group.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderField {
    pub index: usize,
    /// Row `b_{j·}`; `None` for the central field.
    drift: Option<DVector<f64>>,
}

impl FirstOrderField {
    /// Components of the field at `x` in the basis `∂_0, ..., ∂_d`.
    pub fn vector_at(&self, x: &Point) -> DVector<f64> {
        let d = x.dim();
        let mut v = DVector::zeros(d + 1);
        match &self.drift {
            None => v[0] = 1.0,
            Some(row) => {
                v[0] = row.iter().zip(&x.xprime).map(|(b, c)| b * c).sum();
                v[self.index] = 1.0;
            }
        }
        v
    }

    /// Apply to a function given its gradient at `x`.
    pub fn apply_gradient(&self, grad: &DVector<f64>, x: &Point) -> f64 {
        self.vector_at(x).dot(grad)
    }

    /// Central difference along the field direction at `x`; exact for
    /// quadratic `f` up to rounding.
    pub fn apply<F: Fn(&Point) -> f64>(&self, f: F, x: &Point, h: f64) -> f64 {
        let v = self.vector_at(x);
        let base = x.to_vector();
        let fp = f(&Point::from_vector(&(&base + &v * h)));
        let fm = f(&Point::from_vector(&(&base - &v * h)));
        (fp - fm) / (2.0 * h)
    }

    /// Homogeneity degree under the parabolic dilations.
    pub fn degree(&self) -> i32 {
        if self.drift.is_none() {
            -2
        } else {
            -1
        }
    }
}

/// Affine coordinate change `ψ_u(x) = A (x − u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineChange {
    pub a: DMatrix<f64>,
    pub center: Point,
}

impl AffineChange {
    pub fn apply(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.center.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.center.dim(),
                found: x.dim(),
            });
        }
        let diff = x.to_vector() - self.center.to_vector();
        Ok(Point::from_vector(&(&self.a * diff)))
    }
}

/// Privileged coordinates at `u` for an H-frame whose fields are the rows
/// of `frame`: `X_j = Σ_k frame[j,k] ∂_k`. Returns `A = (frameᵗ)⁻¹`, which
/// sends each frame row to the matching coordinate vector.
pub fn privileged_change(frame: &DMatrix<f64>, u: &Point) -> Result<AffineChange> {
    let dim = u.dim() + 1;
    if frame.nrows() != dim || frame.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: frame.nrows().max(frame.ncols()),
        });
    }
    let sv = frame.clone().singular_values();
    let smax = sv.max();
    let rcond = if smax > 0.0 { sv.min() / smax } else { 0.0 };
    if !rcond.is_finite() || rcond < FRAME_RCOND_MIN {
        return Err(Error::SingularFrame { rcond });
    }
    let a = frame
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularFrame { rcond })?;
    Ok(AffineChange {
        a,
        center: u.clone(),
    })
}

/// The quadratic isomorphism `φ(x) = (x0 − ¼ Σ (b_jk + b_kj) x_j x_k, x')`
/// onto the group with the antisymmetrized law.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCorrection {
    sym: DMatrix<f64>,
}

impl QuadraticCorrection {
    fn quad(&self, xp: &[f64]) -> f64 {
        let v = DVector::from_column_slice(xp);
        v.dot(&(&self.sym * &v))
    }

    pub fn apply(&self, x: &Point) -> Point {
        Point::new(x.x0 - self.quad(&x.xprime), x.xprime.clone())
    }

    pub fn apply_inverse(&self, y: &Point) -> Point {
        Point::new(y.x0 + self.quad(&y.xprime), y.xprime.clone())
    }
}

pub fn heisenberg_correction(b: &DMatrix<f64>) -> QuadraticCorrection {
    QuadraticCorrection {
        sym: (b + b.transpose()) * 0.25,
    }
}
