//! Concrete systems: circular-elliptic, Lorentz-hyperbolic and the two
//! Galileo variants.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::construction::{CovariantSystem, FiberBox, FiberPoint, Projection, State, Validity};
use crate::error::{Error, Result};
use crate::kinematics::{Curvature, GroupSpec, RepSpec};
use crate::manifold::{exponential_entropy, homographic_entropy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    CircularElliptic,
    LorentzHyperbolic,
    GalileoHyperbolic,
    GalileoElliptic,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::CircularElliptic,
        SystemKind::LorentzHyperbolic,
        SystemKind::GalileoHyperbolic,
        SystemKind::GalileoElliptic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::CircularElliptic => "circular-elliptic",
            SystemKind::LorentzHyperbolic => "lorentz-hyperbolic",
            SystemKind::GalileoHyperbolic => "galileo-hyperbolic",
            SystemKind::GalileoElliptic => "galileo-elliptic",
        }
    }

    /// `(ε, ε̃)`.
    pub fn flags(self) -> (Curvature, Curvature) {
        match self {
            SystemKind::CircularElliptic => (Curvature::Negative, Curvature::Negative),
            SystemKind::LorentzHyperbolic => (Curvature::Positive, Curvature::Positive),
            SystemKind::GalileoHyperbolic => (Curvature::Zero, Curvature::Positive),
            SystemKind::GalileoElliptic => (Curvature::Zero, Curvature::Negative),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown system `{s}` (expected one of: circular-elliptic, lorentz-hyperbolic, galileo-hyperbolic, galileo-elliptic)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    pub rho_star: f64,
    pub sigma_bar: f64,
    pub a: f64,
    pub c: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            rho_star: 1.0,
            sigma_bar: 1.0,
            a: 1.0,
            c: 1.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho_star", self.rho_star),
            ("sigma_bar", self.sigma_bar),
            ("a", self.a),
            ("c", self.c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemDescriptor {
    pub name: &'static str,
    pub params: SystemParams,
    pub epsilon: Curvature,
    pub epsilon_tilde: Curvature,
    pub validity: String,
}

pub fn descriptor(kind: SystemKind, params: SystemParams) -> Result<SystemDescriptor> {
    let sys = build(kind, params)?;
    let (epsilon, epsilon_tilde) = kind.flags();
    Ok(SystemDescriptor {
        name: kind.name(),
        params,
        epsilon,
        epsilon_tilde,
        validity: sys.validity.describe(),
    })
}

pub fn list(params: SystemParams) -> Result<Vec<SystemDescriptor>> {
    SystemKind::ALL.into_iter().map(|k| descriptor(k, params)).collect()
}

pub fn build(kind: SystemKind, p: SystemParams) -> Result<CovariantSystem> {
    match kind {
        SystemKind::CircularElliptic => circular_elliptic(p.rho_star, p.sigma_bar, p.a, p.c),
        SystemKind::LorentzHyperbolic => lorentz_hyperbolic(p.rho_star, p.sigma_bar, p.a, p.c),
        SystemKind::GalileoHyperbolic => galileo(p.rho_star, p.sigma_bar, p.a, 1, p.c),
        SystemKind::GalileoElliptic => galileo(p.rho_star, p.sigma_bar, p.a, -1, p.c),
    }
}

/// `ε = ε̃ = −1` with exponential entropy.
pub fn circular_elliptic(rho_star: f64, sigma_bar: f64, a: f64, c: f64) -> Result<CovariantSystem> {
    let datum = exponential_entropy(sigma_bar, rho_star)?;
    let sys = CovariantSystem::new(
        SystemKind::CircularElliptic.name(),
        GroupSpec::circular(c)?,
        RepSpec::new(Curvature::Negative, a)?,
        datum,
        Projection::CircularClosedForm { rho_star },
        Validity::CircularElliptic { a, rho_star },
    )
    .with_theta_max(FRAC_PI_4)
    .with_state_scale([rho_star, a * rho_star])
    .with_sampling(FiberBox {
        theta: (-0.7, 0.7),
        rho0: (0.5 * rho_star, 2.0 * rho_star),
    });
    Ok(sys)
}

/// `ε = ε̃ = +1` with homographic entropy.
pub fn lorentz_hyperbolic(rho_star: f64, sigma_bar: f64, a: f64, c: f64) -> Result<CovariantSystem> {
    let datum = homographic_entropy(sigma_bar, rho_star)?;
    let sys = CovariantSystem::new(
        SystemKind::LorentzHyperbolic.name(),
        GroupSpec::lorentz(c)?,
        RepSpec::new(Curvature::Positive, a)?,
        datum,
        Projection::RootSolve {
            lo: 0.0,
            hi: 0.5 * rho_star,
        },
        Validity::LorentzHyperbolic { a, rho_star },
    )
    .with_state_scale([rho_star, a * rho_star])
    .with_sampling(FiberBox {
        theta: (-1.5, 1.5),
        rho0: (0.02 * rho_star, 0.5 * rho_star),
    });
    Ok(sys)
}

/// Galileo group `ε = 0` with a hyperbolic (`ε̃ = 1`) or elliptic
/// (`ε̃ = −1`) representation.
///
/// The hyperbolic variant uses the homographic entropy and the elliptic one
/// the exponential entropy; both choices make `η` convex.
pub fn galileo(rho_star: f64, sigma_bar: f64, a: f64, eps_tilde: i8, c: f64) -> Result<CovariantSystem> {
    let group = GroupSpec::galileo(c)?;
    match eps_tilde {
        1 => Ok(CovariantSystem::new(
            SystemKind::GalileoHyperbolic.name(),
            group,
            RepSpec::new(Curvature::Positive, a)?,
            homographic_entropy(sigma_bar, rho_star)?,
            Projection::GalileoClosedForm,
            Validity::GalileoHyperbolic { a, rho_star },
        )
        .with_state_scale([rho_star, a * rho_star])
        .with_sampling(FiberBox {
            theta: (-1.5, 1.5),
            rho0: (0.1 * rho_star, 2.0 * rho_star),
        })),
        -1 => Ok(CovariantSystem::new(
            SystemKind::GalileoElliptic.name(),
            group,
            RepSpec::new(Curvature::Negative, a)?,
            exponential_entropy(sigma_bar, rho_star)?,
            Projection::GalileoClosedForm,
            Validity::GalileoElliptic { rho_star },
        )
        .with_theta_max(FRAC_PI_2)
        .with_state_scale([rho_star, a * rho_star])
        .with_sampling(FiberBox {
            theta: (-1.2, 1.2),
            rho0: (0.5 * rho_star, 2.0 * rho_star),
        })),
        other => Err(Error::InvalidParameter(format!(
            "galileo representation flag must be +1 or -1, got {other}"
        ))),
    }
}

/// Displayed closed-form flux of the circular-elliptic system.
pub fn circular_flux_closed_form(p: &SystemParams, w: &State) -> [f64; 2] {
    let psi = 2.0 * w.j / (p.a * p.rho_star);
    let root = (1.0 - psi * psi).sqrt();
    let u = p.c * w.j.signum() * ((1.0 - root) / (1.0 + root)).sqrt();
    let rho0 = w.rho + 0.5 * p.rho_star * psi * psi / (1.0 + root);
    [p.c / p.a * w.j, u * w.j + p.a * p.c * (rho0 - p.rho_star)]
}

/// Lorentz-hyperbolic flux written from the fiber point, with
/// `f₁ = (ρ + ρ₀²/ρ*)·u` and `f₂ = u·J + a·c·ρ₀²/ρ*`.
pub fn lorentz_flux_closed_form(p: &SystemParams, w: &State, fp: &FiberPoint) -> [f64; 2] {
    let u = p.c * fp.theta.tanh();
    let k = fp.rho0 * fp.rho0 / p.rho_star;
    [(w.rho + k) * u, u * w.j + p.a * p.c * k]
}

/// The variant `f₁ = (ρ + ρ₀/ρ*)·u` that the pipeline is compared against.
pub fn lorentz_flux_linear_variant(p: &SystemParams, w: &State, fp: &FiberPoint) -> f64 {
    (w.rho + fp.rho0 / p.rho_star) * p.c * fp.theta.tanh()
}

/// Squared characteristic speeds at a rest state `(ρ, 0)`.
pub fn rest_wave_speed_squared(kind: SystemKind, p: &SystemParams, rho: f64) -> f64 {
    let r = rho / p.rho_star;
    match kind {
        SystemKind::CircularElliptic => p.c * p.c,
        SystemKind::LorentzHyperbolic => 2.0 * p.c * p.c * r,
        SystemKind::GalileoHyperbolic => 2.0 * p.c * p.c * r * (1.0 + r),
        SystemKind::GalileoElliptic => p.c * p.c / r,
    }
}
