//! Thermodynamic data on the null-velocity manifold.
//!
//! Rest states are `W₀ = (ρ₀, 0)` with thermodynamic flux `g₀ = (0, p₀)`.
//! An [`EntropyDatum`] supplies the convex entropy `σ(ρ₀)` together with its
//! first two derivatives; everything else on the manifold (the dual `σ*`,
//! the sensitivity `ζ₀` and the pressure `p₀`) is derived from it.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kinematics::{Curvature, RepSpec};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied entropy given by three functions and a domain.
#[derive(Clone)]
pub struct CustomEntropy {
    pub name: String,
    pub sigma: ScalarFn,
    pub sigma_prime: ScalarFn,
    pub sigma_second: ScalarFn,
    pub domain: Interval,
}

impl fmt::Debug for CustomEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomEntropy")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Entropy restricted to the null-velocity manifold.
#[derive(Debug, Clone)]
pub enum EntropyDatum {
    /// `σ = σ̄·exp(ρ₀/ρ*)`
    Exponential {
        sigma_bar: f64,
        rho_star: f64,
    },
    /// `σ = −σ̄·ρ₀/(ρ₀ + ρ*)`, defined for `ρ₀ > 0`
    Homographic {
        sigma_bar: f64,
        rho_star: f64,
    },
    Custom(CustomEntropy),
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be strictly positive, got {v}"
        )))
    }
}

pub fn exponential_entropy(sigma_bar: f64, rho_star: f64) -> Result<EntropyDatum> {
    check_positive("sigma_bar", sigma_bar)?;
    check_positive("rho_star", rho_star)?;
    Ok(EntropyDatum::Exponential { sigma_bar, rho_star })
}

pub fn homographic_entropy(sigma_bar: f64, rho_star: f64) -> Result<EntropyDatum> {
    check_positive("sigma_bar", sigma_bar)?;
    check_positive("rho_star", rho_star)?;
    Ok(EntropyDatum::Homographic { sigma_bar, rho_star })
}

impl EntropyDatum {
    pub fn custom<S, D1, D2>(
        name: impl Into<String>,
        domain: Interval,
        sigma: S,
        sigma_prime: D1,
        sigma_second: D2,
    ) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        EntropyDatum::Custom(CustomEntropy {
            name: name.into(),
            sigma: Arc::new(sigma),
            sigma_prime: Arc::new(sigma_prime),
            sigma_second: Arc::new(sigma_second),
            domain,
        })
    }

    pub fn name(&self) -> &str {
        match self {
            EntropyDatum::Exponential { .. } => "exponential",
            EntropyDatum::Homographic { .. } => "homographic",
            EntropyDatum::Custom(c) => &c.name,
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            EntropyDatum::Exponential { .. } => Interval::REAL_LINE,
            EntropyDatum::Homographic { .. } => Interval::new(0.0, f64::INFINITY),
            EntropyDatum::Custom(c) => c.domain,
        }
    }

    pub fn check_domain(&self, rho0: f64) -> Result<()> {
        let d = self.domain();
        if d.contains(rho0) {
            Ok(())
        } else {
            Err(Error::Domain {
                rho0,
                domain: d.to_string(),
            })
        }
    }

    /// `σ(ρ₀)`, unchecked.
    pub fn sigma(&self, rho0: f64) -> f64 {
        match self {
            EntropyDatum::Exponential { sigma_bar, rho_star } => sigma_bar * (rho0 / rho_star).exp(),
            EntropyDatum::Homographic { sigma_bar, rho_star } => -sigma_bar * rho0 / (rho0 + rho_star),
            EntropyDatum::Custom(c) => (c.sigma)(rho0),
        }
    }

    pub fn sigma_prime(&self, rho0: f64) -> f64 {
        match self {
            EntropyDatum::Exponential { sigma_bar, rho_star } => sigma_bar * (rho0 / rho_star).exp() / rho_star,
            EntropyDatum::Homographic { sigma_bar, rho_star } => {
                let s = rho0 + rho_star;
                -sigma_bar * rho_star / (s * s)
            }
            EntropyDatum::Custom(c) => (c.sigma_prime)(rho0),
        }
    }

    pub fn sigma_second(&self, rho0: f64) -> f64 {
        match self {
            EntropyDatum::Exponential { sigma_bar, rho_star } => {
                sigma_bar * (rho0 / rho_star).exp() / (rho_star * rho_star)
            }
            EntropyDatum::Homographic { sigma_bar, rho_star } => {
                let s = rho0 + rho_star;
                2.0 * sigma_bar * rho_star / (s * s * s)
            }
            EntropyDatum::Custom(c) => (c.sigma_second)(rho0),
        }
    }

    /// The ratio `σ/σ′`. Closed forms are used for the built-in data so the
    /// ratio stays exact where σ and σ′ both vanish (homographic at 0).
    pub fn ratio(&self, rho0: f64) -> f64 {
        match self {
            EntropyDatum::Exponential { rho_star, .. } => *rho_star,
            EntropyDatum::Homographic { rho_star, .. } => rho0 * (rho0 + rho_star) / rho_star,
            EntropyDatum::Custom(c) => (c.sigma)(rho0) / (c.sigma_prime)(rho0),
        }
    }
}

/// Dual entropy on the manifold, `σ* = ρ₀·σ′ − σ`.
pub fn sigma_star(d: &EntropyDatum, rho0: f64) -> Result<f64> {
    d.check_domain(rho0)?;
    Ok(rho0 * d.sigma_prime(rho0) - d.sigma(rho0))
}

/// `ζ₀ = d/dρ₀ (σ/σ′) = 1 − σ·σ″/σ′²`.
pub fn zeta0(d: &EntropyDatum, rho0: f64) -> Result<f64> {
    d.check_domain(rho0)?;
    match d {
        EntropyDatum::Exponential { .. } => Ok(0.0),
        EntropyDatum::Homographic { rho_star, .. } => Ok(1.0 + 2.0 * rho0 / rho_star),
        EntropyDatum::Custom(_) => {
            let sp = d.sigma_prime(rho0);
            if sp == 0.0 {
                return Err(Error::DivisionByZero("sigma_prime vanishes in zeta0"));
            }
            Ok(1.0 - d.sigma(rho0) * d.sigma_second(rho0) / (sp * sp))
        }
    }
}

/// Thermodynamic pressure from `σ* + (ε̃/(a·c))·σ′·p₀ = 0`.
pub fn pressure(d: &EntropyDatum, r: &RepSpec, c: f64, rho0: f64) -> Result<f64> {
    if r.epsilon_tilde == Curvature::Zero {
        return Err(Error::UnsupportedRepresentation);
    }
    d.check_domain(rho0)?;
    let et = r.epsilon_tilde.as_f64();
    match d {
        // p₀ = −(a c/ε̃)·(ρ₀ − σ/σ′), with the ratio taken in closed form
        EntropyDatum::Exponential { .. } | EntropyDatum::Homographic { .. } => {
            Ok(-(r.a * c / et) * (rho0 - d.ratio(rho0)))
        }
        EntropyDatum::Custom(_) => {
            let sp = d.sigma_prime(rho0);
            if sp == 0.0 {
                return Err(Error::DivisionByZero("sigma_prime vanishes in pressure"));
            }
            Ok(-(r.a * c / et) * sigma_star(d, rho0)? / sp)
        }
    }
}

/// Residual of the pressure relation `σ* + (ε̃/(a·c))·σ′·p₀`.
pub fn pressure_residual(d: &EntropyDatum, r: &RepSpec, c: f64, rho0: f64, p0: f64) -> Result<f64> {
    let et = r.epsilon_tilde.as_f64();
    Ok(sigma_star(d, rho0)? + et / (r.a * c) * d.sigma_prime(rho0) * p0)
}

/// Everything the manifold knows about one rest density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub rho0: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub sigma_second: f64,
    pub sigma_star: f64,
    pub zeta0: f64,
    pub p0: f64,
}

pub fn thermo_point(d: &EntropyDatum, r: &RepSpec, c: f64, rho0: f64) -> Result<ThermoPoint> {
    Ok(ThermoPoint {
        rho0,
        sigma: d.sigma(rho0),
        sigma_prime: d.sigma_prime(rho0),
        sigma_second: d.sigma_second(rho0),
        sigma_star: sigma_star(d, rho0)?,
        zeta0: zeta0(d, rho0)?,
        p0: pressure(d, r, c, rho0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(et: Curvature) -> RepSpec {
        RepSpec::new(et, 1.0).unwrap()
    }

    #[test]
    fn sigma_star_examples() {
        let e = exponential_entropy(1.0, 1.0).unwrap();
        assert_eq!(sigma_star(&e, 0.0).unwrap(), -1.0);
        let h = homographic_entropy(1.0, 1.0).unwrap();
        assert_eq!(h.sigma(1.0), -0.5);
        assert_eq!(h.sigma_prime(1.0), -0.25);
        assert_eq!(h.sigma_second(1.0), 0.25);
        assert_eq!(sigma_star(&h, 1.0).unwrap(), 0.25);
        // σ = ρ₀σ′ for a linear entropy through the origin
        let lin = EntropyDatum::custom("linear", Interval::REAL_LINE, |x| 3.0 * x, |_| 3.0, |_| 0.0);
        assert_eq!(sigma_star(&lin, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn exponential_values() {
        let e = exponential_entropy(1.0, 1.0).unwrap();
        assert_eq!((e.sigma(0.0), e.sigma_prime(0.0), e.sigma_second(0.0)), (1.0, 1.0, 1.0));
        let e2 = exponential_entropy(2.0, 1.0).unwrap();
        assert!((e2.sigma(1.0) - 2.0 * std::f64::consts::E).abs() < 1e-15);
        for x in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(zeta0(&e, x).unwrap(), 0.0);
            assert_eq!(e.ratio(x), 1.0);
        }
    }

    #[test]
    fn zeta0_homographic() {
        let h = homographic_entropy(1.0, 1.0).unwrap();
        assert_eq!(zeta0(&h, 0.5).unwrap(), 2.0);
        // 0 is the (open) domain boundary; the formula still gives 1 there
        let h2 = homographic_entropy(1.0, 2.0).unwrap();
        assert!((h2.ratio(0.3) - 0.3 / 2.0 * 2.3).abs() < 1e-15);
        assert!(matches!(zeta0(&h, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn custom_zeta0_matches_closed_form() {
        let h = homographic_entropy(1.3, 0.8).unwrap();
        let (sb, rs) = (1.3, 0.8);
        let custom = EntropyDatum::custom(
            "homographic-custom",
            Interval::new(0.0, f64::INFINITY),
            move |x| -sb * x / (x + rs),
            move |x| -sb * rs / ((x + rs) * (x + rs)),
            move |x| 2.0 * sb * rs / ((x + rs) * (x + rs) * (x + rs)),
        );
        for x in [0.05, 0.3, 1.0, 4.0] {
            let a = zeta0(&h, x).unwrap();
            let b = zeta0(&custom, x).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zeta0_division_by_zero() {
        let flat = EntropyDatum::custom("flat", Interval::REAL_LINE, |_| 1.0, |_| 0.0, |_| 1.0);
        assert!(matches!(zeta0(&flat, 0.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn pressure_examples() {
        let e = exponential_entropy(1.0, 1.0).unwrap();
        let p = pressure(&e, &rep(Curvature::Negative), 1.0, 1.2).unwrap();
        assert!((p - 0.2).abs() < 1e-15);
        let h = homographic_entropy(1.0, 1.0).unwrap();
        let p = pressure(&h, &rep(Curvature::Positive), 1.0, 0.3).unwrap();
        assert!((p - 0.09).abs() < 1e-15);
        assert!(matches!(
            pressure(&e, &rep(Curvature::Zero), 1.0, 1.0),
            Err(Error::UnsupportedRepresentation)
        ));
        // σ* = 0 at ρ₀ = ρ* for the exponential datum
        assert_eq!(pressure(&e, &rep(Curvature::Negative), 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn pressure_relation_residual() {
        let cases = [
            (exponential_entropy(1.5, 0.7).unwrap(), Curvature::Negative),
            (homographic_entropy(0.9, 1.4).unwrap(), Curvature::Positive),
            (exponential_entropy(1.0, 1.0).unwrap(), Curvature::Positive),
            (homographic_entropy(1.0, 1.0).unwrap(), Curvature::Negative),
        ];
        let r_scale = 1.3;
        let c = 0.8;
        for (d, et) in cases {
            let r = RepSpec::new(et, r_scale).unwrap();
            for i in 1..100 {
                let rho0 = 0.02 * i as f64;
                let p0 = pressure(&d, &r, c, rho0).unwrap();
                let res = pressure_residual(&d, &r, c, rho0, p0).unwrap();
                assert!(res.abs() < 1e-12, "{} at {rho0}: {res:e}", d.name());
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(exponential_entropy(0.0, 1.0).is_err());
        assert!(homographic_entropy(1.0, -1.0).is_err());
    }
}
