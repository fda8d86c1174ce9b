//! One-parameter space-time groups and their state-space representations.
//!
//! Both families share the same algebraic shape: a trigonometric pair
//! `(C_θ, S_θ)` selected by a curvature flag with `C² − flag·S² = 1`.
//! For the space-time group `G_θ` the flag is `ε` and the scale is the
//! velocity `c`; for the representation `Y_θ` the flag is `ε̃` and the scale
//! is `a`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature flag of a one-parameter family.
///
/// `Negative` gives the circular group (or elliptic representation),
/// `Zero` the Galileo group (nilpotent representation) and `Positive`
/// the Lorentz group (hyperbolic representation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Curvature {
    Negative,
    Zero,
    Positive,
}

impl Curvature {
    pub fn value(self) -> i8 {
        match self {
            Curvature::Negative => -1,
            Curvature::Zero => 0,
            Curvature::Positive => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }
}

impl TryFrom<i8> for Curvature {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Curvature::Negative),
            0 => Ok(Curvature::Zero),
            1 => Ok(Curvature::Positive),
            other => Err(Error::InvalidParameter(format!(
                "curvature flag must be -1, 0 or 1, got {other}"
            ))),
        }
    }
}

impl From<Curvature> for i8 {
    fn from(c: Curvature) -> i8 {
        c.value()
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// The trigonometric pair `(C_θ, S_θ)` for a curvature flag.
pub fn trig(flag: Curvature, theta: f64) -> (f64, f64) {
    match flag {
        Curvature::Zero => (1.0, theta),
        Curvature::Positive => (theta.cosh(), theta.sinh()),
        Curvature::Negative => (theta.cos(), theta.sin()),
    }
}

/// 2×2 matrix stored row-major as `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.0;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }

    /// Row vector times matrix, `vᵀ M`.
    pub fn apply_left(&self, v: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.0;
        [v[0] * a + v[1] * c, v[0] * b + v[1] * d]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[s * a, s * b], [s * c, s * d]])
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x -= other.0[i][j];
            }
        }
        Mat2(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Mat2([[a * e + b * g, a * f + b * h], [c * e + d * g, c * f + d * h]])
    }
}

/// Space-time group `G_θ = [[C, c·S], [(ε/c)·S, C]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub epsilon: Curvature,
    pub c: f64,
}

impl GroupSpec {
    pub fn new(epsilon: Curvature, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "velocity scale c must be positive, got {c}"
            )));
        }
        Ok(GroupSpec { epsilon, c })
    }

    pub fn galileo(c: f64) -> Result<Self> {
        Self::new(Curvature::Zero, c)
    }

    pub fn lorentz(c: f64) -> Result<Self> {
        Self::new(Curvature::Positive, c)
    }

    pub fn circular(c: f64) -> Result<Self> {
        Self::new(Curvature::Negative, c)
    }

    pub fn trig(&self, theta: f64) -> (f64, f64) {
        trig(self.epsilon, theta)
    }
}

/// State-space representation `Y_θ = [[C̃, (ε̃/a)·S̃], [a·S̃, C̃]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepSpec {
    pub epsilon_tilde: Curvature,
    pub a: f64,
}

impl RepSpec {
    pub fn new(epsilon_tilde: Curvature, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "state-space scale a must be positive, got {a}"
            )));
        }
        Ok(RepSpec { epsilon_tilde, a })
    }

    pub fn trig(&self, theta: f64) -> (f64, f64) {
        trig(self.epsilon_tilde, theta)
    }
}

pub fn group_matrix(g: &GroupSpec, theta: f64) -> Mat2 {
    let (cc, ss) = g.trig(theta);
    Mat2::new(cc, g.c * ss, g.epsilon.as_f64() / g.c * ss, cc)
}

pub fn rep_matrix(r: &RepSpec, theta: f64) -> Mat2 {
    let (cc, ss) = r.trig(theta);
    Mat2::new(cc, r.epsilon_tilde.as_f64() / r.a * ss, r.a * ss, cc)
}

/// Product `G_θ1 · G_θ2`, which equals `G_{θ1+θ2}` by the group law.
pub fn compose(g: &GroupSpec, theta1: f64, theta2: f64) -> Mat2 {
    group_matrix(g, theta1) * group_matrix(g, theta2)
}

/// Product `Y_θ1 · Y_θ2`.
pub fn compose_rep(r: &RepSpec, theta1: f64, theta2: f64) -> Mat2 {
    rep_matrix(r, theta1) * rep_matrix(r, theta2)
}

/// Generator `G'_0`.
pub fn derivative_at_zero(g: &GroupSpec) -> Mat2 {
    Mat2::new(0.0, g.c, g.epsilon.as_f64() / g.c, 0.0)
}

/// Generator `Y'_0`.
pub fn derivative_at_zero_rep(r: &RepSpec) -> Mat2 {
    Mat2::new(0.0, r.epsilon_tilde.as_f64() / r.a, r.a, 0.0)
}

/// Entropy velocity carried by the group parameter, `u = c·S_θ/C_θ`.
pub fn velocity_of_theta(g: &GroupSpec, theta: f64) -> Result<f64> {
    let (cc, ss) = g.trig(theta);
    if g.epsilon == Curvature::Negative && theta.abs() >= FRAC_PI_2 {
        return Err(Error::DegenerateFrame { theta });
    }
    if cc == 0.0 {
        return Err(Error::DegenerateFrame { theta });
    }
    Ok(g.c * ss / cc)
}

/// Inverse of [`velocity_of_theta`] on the principal branch.
pub fn theta_of_velocity(g: &GroupSpec, u: f64) -> Result<f64> {
    let ratio = u / g.c;
    match g.epsilon {
        Curvature::Zero => Ok(ratio),
        Curvature::Negative => Ok(ratio.atan()),
        Curvature::Positive => {
            if ratio.abs() >= 1.0 {
                Err(Error::OutOfRange { u, c: g.c })
            } else {
                Ok(ratio.atanh())
            }
        }
    }
}
