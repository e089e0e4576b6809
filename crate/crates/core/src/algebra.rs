//! Exact 2×2 linear algebra.
//!
//! Everything here is closed form: eigen-decomposition from the
//! characteristic polynomial, the matrix exponential from the eigen (or
//! Jordan) basis, and an adapted norm in which a stable flow contracts at a
//! known uniform rate.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative band inside which the discriminant of the characteristic
/// polynomial counts as zero.
pub const TOL_COMPLEX: f64 = 1e-9;

/// A point or direction in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(k * self.x, k * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v.scale(self)
    }
}

/// Counter-clockwise rotation by a quarter turn.
pub fn rotate_quarter(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn from_cols(c1: Vec2, c2: Vec2) -> Self {
        Self::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn col(&self, j: usize) -> Vec2 {
        match j {
            0 => Vec2::new(self.a11, self.a21),
            1 => Vec2::new(self.a12, self.a22),
            _ => panic!("column index {j} out of range"),
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22).sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        let f2 = self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22;
        let d = self.det();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0);
        ((f2 + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        Mat2::new(k * self.a11, k * self.a12, k * self.a21, k * self.a22)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenKind {
    DistinctReal,
    RepeatedDiagonalizable,
    Jordan,
}

/// Real eigen-decomposition `A = basis · J · basis⁻¹`.
///
/// `eigenvalues` is sorted descending and `basis` has the matching columns.
/// For `Jordan`, `J = [[λ, 1], [0, λ]]` and the columns are `(N w, w)` with
/// `N = A − λI`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub kind: EigenKind,
    pub eigenvalues: [f64; 2],
    pub basis: Mat2,
}

impl EigenDecomposition {
    /// The larger eigenvalue.
    pub fn larger(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// The smaller eigenvalue.
    pub fn smaller(&self) -> f64 {
        self.eigenvalues[1]
    }

    /// `J` in `A = basis · J · basis⁻¹`.
    pub fn normal_form(&self) -> Mat2 {
        match self.kind {
            EigenKind::Jordan => Mat2::new(self.eigenvalues[0], 1.0, 0.0, self.eigenvalues[0]),
            _ => Mat2::diag(self.eigenvalues[0], self.eigenvalues[1]),
        }
    }

    pub fn reconstruct(&self) -> Mat2 {
        let inv = self.basis.inverse().expect("eigenbasis is invertible");
        self.basis * self.normal_form() * inv
    }
}

/// Eigenvector for eigenvalue `l`: perpendicular to the dominant row of
/// `A − lI`, unit length, largest component positive.
fn eigenvector(a: &Mat2, l: f64) -> Vec2 {
    let r1 = Vec2::new(a.a11 - l, a.a12);
    let r2 = Vec2::new(a.a21, a.a22 - l);
    let row = if r1.norm() >= r2.norm() { r1 } else { r2 };
    let v = rotate_quarter(row);
    normalize_sign(v.scale(1.0 / v.norm()))
}

fn normalize_sign(v: Vec2) -> Vec2 {
    let dominant = if v.x.abs() >= v.y.abs() { v.x } else { v.y };
    if dominant < 0.0 {
        -v
    } else {
        v
    }
}

fn discriminant(a: &Mat2) -> f64 {
    // (a11 − a22)² + 4 a12 a21 avoids the cancellation in tr² − 4 det.
    let d = a.a11 - a.a22;
    d * d + 4.0 * a.a12 * a.a21
}

pub fn eig2(a: &Mat2) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
    }
    let tr = a.trace();
    let disc = discriminant(a);
    let band = TOL_COMPLEX * (1.0 + tr * tr);
    if disc < -band {
        return Err(Error::ComplexEigenvalues { discriminant: disc });
    }
    if disc.abs() <= band {
        let l = tr / 2.0;
        let n = *a - Mat2::IDENTITY.scale(l);
        if n.norm() <= TOL_COMPLEX * (1.0 + a.norm()) {
            return Ok(EigenDecomposition {
                kind: EigenKind::RepeatedDiagonalizable,
                eigenvalues: [l, l],
                basis: Mat2::IDENTITY,
            });
        }
        let (c1, c2) = (n.col(0), n.col(1));
        let (w, nw) = if c1.norm() >= c2.norm() {
            (Vec2::new(1.0, 0.0), c1)
        } else {
            (Vec2::new(0.0, 1.0), c2)
        };
        return Ok(EigenDecomposition {
            kind: EigenKind::Jordan,
            eigenvalues: [l, l],
            basis: Mat2::from_cols(nw, w),
        });
    }
    let root = disc.sqrt();
    // Stable root pair: q carries the sign of the trace, the other eigenvalue
    // comes from det / q.
    let q = 0.5 * (tr + if tr >= 0.0 { root } else { -root });
    let other = if q != 0.0 { a.det() / q } else { 0.0 };
    let (hi, lo) = if q >= other { (q, other) } else { (other, q) };
    let basis = Mat2::from_cols(eigenvector(a, hi), eigenvector(a, lo));
    Ok(EigenDecomposition {
        kind: EigenKind::DistinctReal,
        eigenvalues: [hi, lo],
        basis,
    })
}

/// Exponential of the normal form `J` of an eigen-decomposition.
pub(crate) fn expm_normal(eig: &EigenDecomposition, t: f64) -> Mat2 {
    match eig.kind {
        EigenKind::Jordan => {
            let e = (eig.eigenvalues[0] * t).exp();
            Mat2::new(e, e * t, 0.0, e)
        }
        _ => Mat2::diag((eig.eigenvalues[0] * t).exp(), (eig.eigenvalues[1] * t).exp()),
    }
}

/// `e^{tA}` in closed form.
pub fn expm2(a: &Mat2, t: f64) -> Result<Mat2> {
    if t == 0.0 {
        return Ok(Mat2::IDENTITY);
    }
    let eig = eig2(a)?;
    if eig.kind == EigenKind::Jordan {
        // e^{λt}(I + tN) directly, no change of basis needed.
        let l = eig.eigenvalues[0];
        let n = *a - Mat2::IDENTITY.scale(l);
        return Ok((Mat2::IDENTITY + n.scale(t)).scale((l * t).exp()));
    }
    let inv = eig.basis.inverse().ok_or(Error::SingularMatrix)?;
    Ok(eig.basis * expm_normal(&eig, t) * inv)
}

/// A norm `|v|_A = ‖T v‖` with `|e^{tA} v|_A ≤ e^{−δt} |v|_A` for `t ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptedNorm {
    pub transform: Mat2,
    pub delta: f64,
}

impl AdaptedNorm {
    pub fn norm(&self, v: Vec2) -> f64 {
        self.transform.apply(v).norm()
    }

    /// Smallest `c` with `‖v‖ ≤ c |v|_A` for every `v`.
    pub fn euclidean_bound(&self) -> f64 {
        self.transform
            .inverse()
            .expect("adapted-norm transform is invertible")
            .spectral_norm()
    }
}

pub fn adapted_norm(a: &Mat2) -> Result<AdaptedNorm> {
    let eig = eig2(a)?;
    if eig.larger() >= 0.0 {
        return Err(Error::NotStable {
            eigenvalue: eig.larger(),
        });
    }
    let basis_inv = eig.basis.inverse().ok_or(Error::SingularMatrix)?;
    match eig.kind {
        EigenKind::Jordan => {
            let eps = eig.eigenvalues[0].abs() / 2.0;
            // Coordinates w = diag(1, 1/ε) B⁻¹ v see [[λ, ε], [0, λ]], whose
            // symmetric part is bounded by λ + ε/2 = −3|λ|/4 ≤ −|λ|/2.
            Ok(AdaptedNorm {
                transform: Mat2::diag(1.0, 1.0 / eps) * basis_inv,
                delta: eps,
            })
        }
        _ => Ok(AdaptedNorm {
            transform: basis_inv,
            delta: eig.larger().abs().min(eig.smaller().abs()),
        }),
    }
}
