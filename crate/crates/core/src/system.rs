//! Problem statement, rank condition, case classification and canonical
//! coordinates.

use serde::{Deserialize, Serialize};

use crate::algebra::{eig2, rotate_quarter, EigenDecomposition, EigenKind, Mat2, Vec2};
use crate::error::{Error, Result};

/// Relative threshold under which `⟨Aζ, θζ⟩` counts as zero.
pub const TOL_LARC: f64 = 1e-9;
/// Relative threshold for the determinant and trace sign tests.
pub const TOL_SIGN: f64 = 1e-9;
/// Absolute band around the endpoints of Ω used to decide `Boundary`.
pub const TOL_BOUNDARY: f64 = 1e-12;

/// The control range `Ω = [min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlRange {
    pub min: f64,
    pub max: f64,
}

impl ControlRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidSpec("control range must be finite".into()));
        }
        if min >= max {
            return Err(Error::InvalidSpec(format!(
                "control range needs min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, u: f64) -> bool {
        self.min <= u && u <= self.max
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// `v' = A v + u ζ` with `u ∈ Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub a: Mat2,
    pub zeta: Vec2,
    pub omega: ControlRange,
}

impl SystemSpec {
    pub fn new(a: Mat2, zeta: Vec2, omega_min: f64, omega_max: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidSpec("matrix entries must be finite".into()));
        }
        if !zeta.is_finite() {
            return Err(Error::InvalidSpec("control vector must be finite".into()));
        }
        if zeta == Vec2::ZERO {
            return Err(Error::InvalidSpec("control vector must be nonzero".into()));
        }
        Ok(Self {
            a,
            zeta,
            omega: ControlRange::new(omega_min, omega_max)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(value: f64, band: f64) -> Sign {
        if value.abs() <= band {
            Sign::Zero
        } else if value < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }
}

/// Where the zero control sits relative to Ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPosition {
    Interior,
    Boundary,
    Outside,
}

impl ZeroPosition {
    pub fn of(omega: &ControlRange) -> ZeroPosition {
        if omega.min.abs() <= TOL_BOUNDARY || omega.max.abs() <= TOL_BOUNDARY {
            ZeroPosition::Boundary
        } else if omega.min < 0.0 && omega.max > 0.0 {
            ZeroPosition::Interior
        } else {
            ZeroPosition::Outside
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseTag {
    pub det_sign: Sign,
    pub tr_sign: Sign,
    pub zero_position: ZeroPosition,
}

/// The classification cells that carry distinct control-set theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `det A = tr A = 0`, `A ≠ 0`.
    Nilpotent,
    /// `det A = 0`, `tr A ≠ 0`.
    RankOne,
    /// `det A < 0`.
    Saddle,
    /// `det A > 0`, `tr A < 0`.
    StableNode,
    /// `det A > 0`, `tr A > 0`.
    UnstableNode,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Nilpotent => "nilpotent (det A = 0, tr A = 0)",
            Case::RankOne => "rank one (det A = 0, tr A != 0)",
            Case::Saddle => "saddle (det A < 0)",
            Case::StableNode => "stable node (det A > 0, tr A < 0)",
            Case::UnstableNode => "unstable node (det A > 0, tr A > 0)",
        }
    }
}

impl CaseTag {
    pub fn case(&self) -> Case {
        match (self.det_sign, self.tr_sign) {
            (Sign::Zero, Sign::Zero) => Case::Nilpotent,
            (Sign::Zero, _) => Case::RankOne,
            (Sign::Negative, _) => Case::Saddle,
            (Sign::Positive, Sign::Negative) => Case::StableNode,
            (Sign::Positive, _) => Case::UnstableNode,
        }
    }
}

/// `⟨Aζ, θζ⟩`; zero exactly when ζ is an eigenvector of A.
pub fn check_larc(spec: &SystemSpec) -> f64 {
    (spec.a * spec.zeta).dot(rotate_quarter(spec.zeta))
}

fn larc_holds(spec: &SystemSpec, value: f64) -> bool {
    let n = spec.zeta.norm();
    value.abs() > TOL_LARC * spec.a.norm() * n * n
}

fn signs(a: &Mat2) -> (Sign, Sign) {
    let n = a.norm();
    (
        Sign::of(a.det(), TOL_SIGN * (1.0 + n * n)),
        Sign::of(a.trace(), TOL_SIGN * (1.0 + n)),
    )
}

pub fn classify(spec: &SystemSpec) -> Result<CaseTag> {
    eig2(&spec.a)?;
    let value = check_larc(spec);
    if !larc_holds(spec, value) {
        return Err(Error::LarcViolated { value });
    }
    let (det_sign, tr_sign) = signs(&spec.a);
    Ok(CaseTag {
        det_sign,
        tr_sign,
        zero_position: ZeroPosition::of(&spec.omega),
    })
}

/// The template `A_can` takes in canonical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CanonicalShape {
    /// `[[0, 1], [0, 0]]`, canonical ζ is exactly `(0, 1)`.
    Nilpotent,
    /// `diag(μ, 0)`.
    RankOne { mu: f64 },
    /// `diag(first, second)`; for a saddle `first = μ > 0 > λ = second`.
    Diagonal { first: f64, second: f64 },
    /// `[[λ, 1], [0, λ]]`.
    Jordan { lambda: f64 },
}

impl CanonicalShape {
    pub fn matrix(&self) -> Mat2 {
        match *self {
            CanonicalShape::Nilpotent => Mat2::new(0.0, 1.0, 0.0, 0.0),
            CanonicalShape::RankOne { mu } => Mat2::diag(mu, 0.0),
            CanonicalShape::Diagonal { first, second } => Mat2::diag(first, second),
            CanonicalShape::Jordan { lambda } => Mat2::new(lambda, 1.0, 0.0, lambda),
        }
    }
}

/// Coordinates `v = basis · w` in which A takes its case template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalForm {
    pub tag: CaseTag,
    pub basis: Mat2,
    pub basis_inv: Mat2,
    pub a_can: Mat2,
    pub zeta_can: Vec2,
    pub eigen: EigenDecomposition,
    pub shape: CanonicalShape,
}

impl CanonicalForm {
    pub fn to_canonical(&self, v: Vec2) -> Vec2 {
        self.basis_inv * v
    }

    pub fn from_canonical(&self, w: Vec2) -> Vec2 {
        self.basis * w
    }
}

pub fn canonicalize(spec: &SystemSpec) -> Result<CanonicalForm> {
    let tag = classify(spec)?;
    let eigen = eig2(&spec.a)?;
    let (basis, shape) = match tag.case() {
        Case::Nilpotent => (
            Mat2::from_cols(spec.a * spec.zeta, spec.zeta),
            CanonicalShape::Nilpotent,
        ),
        Case::RankOne => {
            // Nonzero eigenvalue first; numerically it is the one of larger
            // magnitude, the other is rounding noise around zero.
            let (l0, l1) = (eigen.eigenvalues[0], eigen.eigenvalues[1]);
            let (c0, c1) = (eigen.basis.col(0), eigen.basis.col(1));
            let (mu, basis) = if l0.abs() >= l1.abs() {
                (l0, Mat2::from_cols(c0, c1))
            } else {
                (l1, Mat2::from_cols(c1, c0))
            };
            (basis, CanonicalShape::RankOne { mu })
        }
        _ => match eigen.kind {
            EigenKind::Jordan => (
                eigen.basis,
                CanonicalShape::Jordan {
                    lambda: eigen.eigenvalues[0],
                },
            ),
            _ => (
                eigen.basis,
                CanonicalShape::Diagonal {
                    first: eigen.eigenvalues[0],
                    second: eigen.eigenvalues[1],
                },
            ),
        },
    };
    let basis_inv = basis.inverse().ok_or(Error::SingularMatrix)?;
    let zeta_can = match shape {
        CanonicalShape::Nilpotent => Vec2::new(0.0, 1.0),
        _ => basis_inv * spec.zeta,
    };
    Ok(CanonicalForm {
        tag,
        basis,
        basis_inv,
        a_can: shape.matrix(),
        zeta_can,
        eigen,
        shape,
    })
}

/// The rest point `v(u) = −u A⁻¹ ζ` of the constant control `u`.
pub fn equilibrium(spec: &SystemSpec, u: f64) -> Result<Vec2> {
    let (det_sign, _) = signs(&spec.a);
    if det_sign == Sign::Zero {
        return Err(Error::SingularMatrix);
    }
    let inv = spec.a.inverse().ok_or(Error::SingularMatrix)?;
    let rhs = spec.zeta.scale(-u);
    let v = inv * rhs;
    // One step of residual refinement.
    let r = rhs - spec.a * v;
    Ok(v + inv * r)
}

/// A validated system together with its classification and canonical
/// coordinates. Cheap to copy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSystem {
    pub spec: SystemSpec,
    pub canon: CanonicalForm,
}

impl LinearSystem {
    pub fn new(spec: SystemSpec) -> Result<Self> {
        let canon = canonicalize(&spec)?;
        Ok(Self { spec, canon })
    }

    pub fn tag(&self) -> CaseTag {
        self.canon.tag
    }

    pub fn case(&self) -> Case {
        self.canon.tag.case()
    }

    pub fn omega(&self) -> ControlRange {
        self.spec.omega
    }

    pub fn equilibrium(&self, u: f64) -> Result<Vec2> {
        equilibrium(&self.spec, u)
    }

    pub(crate) fn wrong_case(&self, expected: &'static str) -> Error {
        Error::WrongCase {
            expected,
            actual: self.case().name().to_string(),
        }
    }
}
