//! Generic 2×2 covariant-system builder.
//!
//! Every admissible state `W = (ρ, J)` is the group transport of a rest state
//! `W₀ = (ρ₀, 0)` by the fiber parameter `θ`:
//!
//! ```text
//! W    = C_θ·Y_θ·W₀ + (ε/c)·S_θ·Y_θ·g₀
//! f(W) = c·S_θ·Y_θ·W₀ + C_θ·Y_θ·g₀
//! η(W) = C_θ·σ(ρ₀)
//! ```
//!
//! [`CovariantSystem`] implements the lift `(θ, ρ₀) ↦ W`, the inverse
//! projection, and everything that can be evaluated once the fiber point of a
//! state is known.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{group_matrix, rep_matrix, Curvature, GroupSpec, Mat2, RepSpec};
use crate::manifold::{self, EntropyDatum};
use crate::numdiff;

/// Relative interior margin applied to every validity inequality.
pub const VALIDITY_MARGIN: f64 = 1e-9;

/// Residual tolerance of the scalar projection solve, relative to `max(1, |ρ|)`.
pub const PROJECTION_TOL: f64 = 1e-13;

/// Iteration cap of the bisection.
pub const PROJECTION_MAX_ITER: usize = 200;

/// `|Δ|` below this is treated as a singular fiber map.
pub const SINGULAR_DELTA: f64 = 1e-12;

/// Conserved pair `W = (ρ, J)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub rho: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

impl State {
    pub fn new(rho: f64, j: f64) -> Self {
        State { rho, j }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.rho, self.j]
    }

    pub fn from_array(v: [f64; 2]) -> Self {
        State { rho: v[0], j: v[1] }
    }

    pub fn norm(&self) -> f64 {
        self.rho.hypot(self.j)
    }
}

/// Fiber coordinates: group parameter and rest density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub theta: f64,
    pub rho0: f64,
}

impl FiberPoint {
    pub fn new(theta: f64, rho0: f64) -> Self {
        FiberPoint { theta, rho0 }
    }
}

/// Entropy variables `φ = (∂η/∂ρ, ∂η/∂J)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyVariables {
    pub alpha: f64,
    pub beta: f64,
}

impl EntropyVariables {
    pub fn dot(&self, v: [f64; 2]) -> f64 {
        self.alpha * v[0] + self.beta * v[1]
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.alpha, self.beta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityDiagnostics {
    pub det_hessian: f64,
    pub d2eta_drho2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceResidual {
    pub r_state: f64,
    pub r_entropy: f64,
}

/// How a state is mapped back to its fiber point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// `ε = ε̃ = −1` with `σ/σ′ ≡ ρ*` (exponential datum).
    CircularClosedForm {
        rho_star: f64,
    },
    /// `ε = 0`: `tanh θ = J/(aρ)` or `tan θ = J/(aρ)`.
    GalileoClosedForm,
    /// `ε = ε̃ = ±1`: bisection for the rest density on `[lo, hi]`.
    RootSolve {
        lo: f64,
        hi: f64,
    },
    Unsupported,
}

/// Validity domain `Ω` of a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validity {
    Unrestricted,
    /// `|Ψ| ≤ 1` with `Ψ = 2J/(aρ*)`.
    CircularElliptic {
        a: f64,
        rho_star: f64,
    },
    /// `|J|/a ≤ ρ ≤ ρ*/2`.
    LorentzHyperbolic {
        a: f64,
        rho_star: f64,
    },
    /// `|J|/a < ρ`.
    GalileoHyperbolic {
        a: f64,
        rho_star: f64,
    },
    /// `ρ > 0`.
    GalileoElliptic {
        rho_star: f64,
    },
}

impl Validity {
    pub fn check(&self, w: &State) -> Result<()> {
        let outside = |reason: String| {
            Err(Error::OutsideValidity {
                rho: w.rho,
                j: w.j,
                reason,
            })
        };
        if !(w.rho.is_finite() && w.j.is_finite()) {
            return outside("non-finite state".into());
        }
        let m = VALIDITY_MARGIN;
        match *self {
            Validity::Unrestricted => Ok(()),
            Validity::CircularElliptic { a, rho_star } => {
                let psi = 2.0 * w.j / (a * rho_star);
                if psi.abs() <= 1.0 - m {
                    Ok(())
                } else {
                    outside(format!("|Psi| = {} exceeds 1", psi.abs()))
                }
            }
            Validity::LorentzHyperbolic { a, rho_star } => {
                let mm = m * rho_star;
                if w.rho > 0.5 * rho_star - mm {
                    outside(format!("rho exceeds rho_star/2 = {}", 0.5 * rho_star))
                } else if w.j.abs() / a > w.rho - mm {
                    outside("|J|/a exceeds rho".into())
                } else {
                    Ok(())
                }
            }
            Validity::GalileoHyperbolic { a, rho_star } => {
                if w.j.abs() / a > w.rho - m * rho_star {
                    outside("|J|/a exceeds rho".into())
                } else {
                    Ok(())
                }
            }
            Validity::GalileoElliptic { rho_star } => {
                if w.rho < m * rho_star {
                    outside("rho must be positive".into())
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Validity::Unrestricted => "all states".into(),
            Validity::CircularElliptic { .. } => "|2J/(a rho_star)| <= 1".into(),
            Validity::LorentzHyperbolic { .. } => "|J|/a <= rho <= rho_star/2".into(),
            Validity::GalileoHyperbolic { .. } => "|J|/a < rho".into(),
            Validity::GalileoElliptic { .. } => "rho > 0".into(),
        }
    }
}

/// Box in fiber coordinates used to draw admissible samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberBox {
    pub theta: (f64, f64),
    pub rho0: (f64, f64),
}

/// All derived quantities at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub state: State,
    pub fiber: FiberPoint,
    pub u: f64,
    pub eta: f64,
    pub eta_star: f64,
    pub phi: EntropyVariables,
    pub p0: f64,
    pub flux: [f64; 2],
    pub thermo_flux: [f64; 2],
}

/// A hyperbolic 2×2 system assembled from a group, a representation and an
/// entropy datum on the null-velocity manifold.
#[derive(Debug, Clone)]
pub struct CovariantSystem {
    pub name: String,
    pub group: GroupSpec,
    pub rep: RepSpec,
    pub datum: EntropyDatum,
    pub projection: Projection,
    pub validity: Validity,
    /// Admissible fiber parameters satisfy `|θ| < theta_max`.
    pub theta_max: f64,
    pub sampling: FiberBox,
    /// Multiplies the first flux component; 1 except in fault-injection fixtures.
    pub flux_fault: f64,
    /// Natural units of `(ρ, J)`; finite-difference steps are taken in them.
    pub state_scale: [f64; 2],
}

impl CovariantSystem {
    pub fn new(
        name: impl Into<String>,
        group: GroupSpec,
        rep: RepSpec,
        datum: EntropyDatum,
        projection: Projection,
        validity: Validity,
    ) -> Self {
        let theta_max = if group.epsilon == Curvature::Negative || rep.epsilon_tilde == Curvature::Negative {
            FRAC_PI_2
        } else {
            f64::INFINITY
        };
        CovariantSystem {
            name: name.into(),
            group,
            rep,
            datum,
            projection,
            validity,
            theta_max,
            sampling: FiberBox {
                theta: (-0.5, 0.5),
                rho0: (0.5, 1.5),
            },
            flux_fault: 1.0,
            state_scale: [1.0, rep.a],
        }
    }

    pub fn with_theta_max(mut self, theta_max: f64) -> Self {
        self.theta_max = theta_max;
        self
    }

    pub fn with_sampling(mut self, sampling: FiberBox) -> Self {
        self.sampling = sampling;
        self
    }

    /// Scales `f₁` by `scale`; used to check that the identity suite detects
    /// a corrupted flux.
    pub fn with_state_scale(mut self, scale: [f64; 2]) -> Self {
        self.state_scale = scale;
        self
    }

    /// Natural units of `(θ, ρ₀)`.
    pub fn fiber_scale(&self) -> [f64; 2] {
        [1.0, self.state_scale[0]]
    }

    pub fn with_flux_fault(mut self, scale: f64) -> Self {
        self.flux_fault = scale;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.group.epsilon.as_f64()
    }

    pub fn epsilon_tilde(&self) -> f64 {
        self.rep.epsilon_tilde.as_f64()
    }

    fn same_flags(&self) -> bool {
        self.group.epsilon == self.rep.epsilon_tilde
    }

    fn check_rho0(&self, rho0: f64) -> Result<()> {
        self.datum.check_domain(rho0)?;
        if self.datum.sigma_prime(rho0) == 0.0 {
            return Err(Error::DivisionByZero("sigma_prime vanishes at rho0"));
        }
        Ok(())
    }

    /// Whether a fiber point is admissible (parameter range and datum domain).
    pub fn fiber_admissible(&self, fp: &FiberPoint) -> Result<()> {
        if !(fp.theta.abs() < self.theta_max) {
            return Err(Error::OutsideValidity {
                rho: f64::NAN,
                j: f64::NAN,
                reason: format!(
                    "fiber parameter theta = {} outside |theta| < {}",
                    fp.theta, self.theta_max
                ),
            });
        }
        self.check_rho0(fp.rho0)
    }

    pub fn validate(&self, w: &State) -> Result<()> {
        self.validity.check(w)
    }

    /// Fiber point ↦ state.
    pub fn lift(&self, fp: &FiberPoint) -> Result<State> {
        self.check_rho0(fp.rho0)?;
        let (c, s) = self.group.trig(fp.theta);
        let q = self.datum.ratio(fp.rho0);
        let eps = self.epsilon();
        let a = self.rep.a;
        if self.same_flags() {
            return Ok(State {
                rho: fp.rho0 + eps * s * s * q,
                j: a * s * c * q,
            });
        }
        let (ct, st) = self.rep.trig(fp.theta);
        let et = self.epsilon_tilde();
        let rho = (c * ct - eps * s * st) * fp.rho0 + eps * s * st * q;
        let j = a * ((c * st - eps * et * s * ct) * fp.rho0 + eps * et * s * ct * q);
        Ok(State { rho, j })
    }

    /// State ↦ fiber point.
    pub fn project(&self, w: &State) -> Result<FiberPoint> {
        self.validate(w)?;
        let a = self.rep.a;
        let fp = match self.projection {
            Projection::CircularClosedForm { rho_star } => {
                let psi = 2.0 * w.j / (a * rho_star);
                let root = (1.0 - psi * psi).sqrt();
                FiberPoint {
                    theta: 0.5 * psi.asin(),
                    // ½(1 − √(1−Ψ²)) written without cancellation
                    rho0: w.rho + 0.5 * rho_star * psi * psi / (1.0 + root),
                }
            }
            Projection::GalileoClosedForm => {
                let x = w.j / (a * w.rho);
                match self.rep.epsilon_tilde {
                    Curvature::Positive => FiberPoint {
                        theta: x.atanh(),
                        rho0: ((w.rho - w.j / a) * (w.rho + w.j / a)).sqrt(),
                    },
                    Curvature::Negative => FiberPoint {
                        theta: x.atan(),
                        rho0: w.rho.hypot(w.j / a),
                    },
                    Curvature::Zero => {
                        return Err(Error::UnsupportedCombination {
                            epsilon: self.group.epsilon.value(),
                            epsilon_tilde: 0,
                        })
                    }
                }
            }
            Projection::RootSolve { lo, hi } => self.root_solve(w, lo, hi)?,
            Projection::Unsupported => {
                return Err(Error::UnsupportedCombination {
                    epsilon: self.group.epsilon.value(),
                    epsilon_tilde: self.rep.epsilon_tilde.value(),
                })
            }
        };
        self.check_rho0(fp.rho0)?;
        Ok(fp)
    }

    /// `F(ρ₀) = ρ₀ + 2(J/a)² / (√(q² + 4ε(J/a)²) + q)` with `q = σ/σ′`.
    ///
    /// This is `ρ₀ + (ε/2)(√(q² + 4ε(J/a)²) − q)` rearranged so it stays
    /// finite at `q = 0`, where it equals `|J|/a`.
    pub fn rest_density_map(&self, rho0: f64, j: f64) -> f64 {
        let ja = j / self.rep.a;
        if ja == 0.0 {
            return rho0;
        }
        let q = self.datum.ratio(rho0);
        let k = 4.0 * ja * ja;
        rho0 + 0.5 * k / ((q * q + self.epsilon() * k).sqrt() + q)
    }

    fn root_solve(&self, w: &State, lo: f64, hi: f64) -> Result<FiberPoint> {
        if !self.same_flags() || self.group.epsilon == Curvature::Zero {
            return Err(Error::UnsupportedCombination {
                epsilon: self.group.epsilon.value(),
                epsilon_tilde: self.rep.epsilon_tilde.value(),
            });
        }
        let tol = PROJECTION_TOL * w.rho.abs().max(1.0);
        let g = |x: f64| self.rest_density_map(x, w.j) - w.rho;
        let (mut a, mut b) = (lo, hi);
        let (ga, gb) = (g(a), g(b));
        if !(ga <= 0.0 && gb >= 0.0) {
            return Err(Error::OutsideValidity {
                rho: w.rho,
                j: w.j,
                reason: format!("rest density not bracketed on [{lo}, {hi}]"),
            });
        }
        let (mut best, mut best_res) = if ga.abs() <= gb.abs() {
            (a, ga.abs())
        } else {
            (b, gb.abs())
        };
        let mut iterations = 0;
        while iterations < PROJECTION_MAX_ITER && best_res > 0.0 {
            iterations += 1;
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let gm = g(mid);
            if gm.abs() < best_res {
                best = mid;
                best_res = gm.abs();
            }
            if gm < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        if !(best_res <= tol) {
            return Err(Error::NoConvergence {
                residual: best_res,
                iterations,
            });
        }
        let rho0 = best;
        let x = 2.0 * w.j / (self.rep.a * self.datum.ratio(rho0));
        let theta = if w.j == 0.0 {
            0.0
        } else if self.group.epsilon == Curvature::Positive {
            0.5 * x.asinh()
        } else {
            0.5 * x.asin()
        };
        Ok(FiberPoint { theta, rho0 })
    }

    /// Evaluate every derived quantity at a state.
    pub fn evaluate(&self, w: &State) -> Result<Evaluation> {
        let fp = self.project(w)?;
        self.evaluate_at(w, &fp)
    }

    /// Evaluate at a state whose fiber point is already known.
    pub fn evaluate_at(&self, w: &State, fp: &FiberPoint) -> Result<Evaluation> {
        let (c, s) = self.group.trig(fp.theta);
        if c == 0.0 {
            return Err(Error::DegenerateFrame { theta: fp.theta });
        }
        let (ct, st) = self.rep.trig(fp.theta);
        let et = self.epsilon_tilde();
        let a = self.rep.a;
        let d = &self.datum;
        let sigma = d.sigma(fp.rho0);
        let sp = d.sigma_prime(fp.rho0);
        let sigma_star = manifold::sigma_star(d, fp.rho0)?;
        let p0 = manifold::pressure(d, &self.rep, self.group.c, fp.rho0)?;
        let u = self.group.c * s / c;
        let g = [et / a * st * p0 / c, ct * p0 / c];
        let flux = [(u * w.rho + g[0]) * self.flux_fault, u * w.j + g[1]];
        Ok(Evaluation {
            state: *w,
            fiber: *fp,
            u,
            eta: c * sigma,
            eta_star: c * sigma_star,
            phi: EntropyVariables {
                alpha: ct * sp,
                beta: -et / a * st * sp,
            },
            p0,
            flux,
            thermo_flux: g,
        })
    }

    pub fn entropy(&self, w: &State) -> Result<f64> {
        Ok(self.evaluate(w)?.eta)
    }

    pub fn velocity(&self, w: &State) -> Result<f64> {
        Ok(self.evaluate(w)?.u)
    }

    pub fn dual_entropy(&self, w: &State) -> Result<f64> {
        Ok(self.evaluate(w)?.eta_star)
    }

    pub fn thermo_flux(&self, w: &State) -> Result<[f64; 2]> {
        Ok(self.evaluate(w)?.thermo_flux)
    }

    pub fn flux(&self, w: &State) -> Result<[f64; 2]> {
        Ok(self.evaluate(w)?.flux)
    }

    pub fn entropy_variables(&self, w: &State) -> Result<EntropyVariables> {
        let fp = self.project(w)?;
        let delta = self.jacobian_delta(&fp)?;
        if delta.abs() < SINGULAR_DELTA {
            return Err(Error::SingularJacobian { delta });
        }
        Ok(self.evaluate_at(w, &fp)?.phi)
    }

    /// `∂(ρ, J)/∂(θ, ρ₀)` from the analytic partial derivatives of the lift.
    pub fn fiber_jacobian(&self, fp: &FiberPoint) -> Result<Mat2> {
        self.check_rho0(fp.rho0)?;
        let (c, s) = self.group.trig(fp.theta);
        let (ct, st) = self.rep.trig(fp.theta);
        let eps = self.epsilon();
        let et = self.epsilon_tilde();
        let a = self.rep.a;
        let rho0 = fp.rho0;
        let q = self.datum.ratio(rho0);
        let z = manifold::zeta0(&self.datum, rho0)?;
        let drho_dtheta = (et - eps) * c * st * rho0 + eps * (c * st + s * ct) * q;
        let drho_drho0 = (c * ct - eps * s * st) + eps * s * st * z;
        let dj_dtheta = a * ((1.0 - eps * et) * c * ct * rho0 + (eps * et * c * ct + eps * s * st) * q);
        let dj_drho0 = a * ((c * st - eps * et * s * ct) + eps * et * s * ct * z);
        Ok(Mat2::new(drho_dtheta, drho_drho0, dj_dtheta, dj_drho0))
    }

    /// `δ = ε·S²·ζ₀ − (C² + ε·S²)`, defined when `ε = ε̃`.
    pub fn small_delta(&self, fp: &FiberPoint) -> Result<f64> {
        let z = manifold::zeta0(&self.datum, fp.rho0)?;
        let (c, s) = self.group.trig(fp.theta);
        let eps = self.epsilon();
        Ok(eps * s * s * z - (c * c + eps * s * s))
    }

    /// Jacobian determinant `Δ = ∂(ρ, J)/∂(θ, ρ₀)`.
    ///
    /// Uses `Δ = a·δ·σ/σ′` when `ε = ε̃`, the closed form valid for
    /// `ε² = ε̃² = 1` otherwise, and the determinant of the analytic partials
    /// for the Galileo group.
    pub fn jacobian_delta(&self, fp: &FiberPoint) -> Result<f64> {
        self.check_rho0(fp.rho0)?;
        let a = self.rep.a;
        let q = self.datum.ratio(fp.rho0);
        if self.group.epsilon == Curvature::Zero || self.rep.epsilon_tilde == Curvature::Zero {
            return Ok(self.fiber_jacobian(fp)?.det());
        }
        if self.same_flags() {
            return Ok(a * self.small_delta(fp)? * q);
        }
        let (c, s) = self.group.trig(fp.theta);
        let eps = self.epsilon();
        let et = self.epsilon_tilde();
        let z = manifold::zeta0(&self.datum, fp.rho0)?;
        let sigma = self.datum.sigma(fp.rho0);
        let sigma_star = manifold::sigma_star(&self.datum, fp.rho0)?;
        Ok(a * q * ((eps * et - 1.0) * c * c * sigma_star / sigma + et * s * s * z - (c * c + et * s * s)))
    }

    /// Hessian `d²η` by the chain rule through the fiber coordinates.
    pub fn hessian(&self, fp: &FiberPoint) -> Result<Mat2> {
        let jac = self.fiber_jacobian(fp)?;
        let delta = jac.det();
        if delta.abs() < SINGULAR_DELTA {
            return Err(Error::SingularJacobian { delta });
        }
        let (ct, st) = self.rep.trig(fp.theta);
        let et = self.epsilon_tilde();
        let a = self.rep.a;
        let sp = self.datum.sigma_prime(fp.rho0);
        let spp = self.datum.sigma_second(fp.rho0);
        // ∂(α, β)/∂(θ, ρ₀)
        let dphi = Mat2::new(et * st * sp, ct * spp, -et / a * ct * sp, -et / a * st * spp);
        let [[p, q], [r, s]] = jac.0;
        let inv = Mat2::new(s, -q, -r, p).scale(1.0 / delta);
        Ok(dphi * inv)
    }

    /// `det(d²η)` and `∂²η/∂ρ²`; closed forms when `ε = ε̃`, chain rule otherwise.
    pub fn convexity_diagnostics(&self, fp: &FiberPoint) -> Result<ConvexityDiagnostics> {
        self.check_rho0(fp.rho0)?;
        if !self.same_flags() || self.group.epsilon == Curvature::Zero {
            let h = self.hessian(fp)?;
            return Ok(ConvexityDiagnostics {
                det_hessian: h.det(),
                d2eta_drho2: h.0[0][0],
            });
        }
        let delta_big = self.jacobian_delta(fp)?;
        if delta_big.abs() < SINGULAR_DELTA {
            return Err(Error::SingularJacobian { delta: delta_big });
        }
        let delta = self.small_delta(fp)?;
        let eps = self.epsilon();
        let a = self.rep.a;
        let d = &self.datum;
        let sigma = d.sigma(fp.rho0);
        let sp = d.sigma_prime(fp.rho0);
        let spp = d.sigma_second(fp.rho0);
        let z = manifold::zeta0(d, fp.rho0)?;
        let (c, s) = self.group.trig(fp.theta);
        Ok(ConvexityDiagnostics {
            det_hessian: eps / (a * a) * sp * sp * (spp / sigma) / delta,
            d2eta_drho2: c / delta * (eps * s * s * z * sp * sp / sigma - (c * c + eps * s * s) * spp),
        })
    }

    /// Evaluations at `w ± h·dw` with `dw` in natural units; returns them
    /// with the step `h` of the directional parameter.
    fn directional_pair(&self, w: &State, dw: [f64; 2]) -> Result<(Evaluation, Evaluation, f64)> {
        let sc = self.state_scale;
        let h = numdiff::gradient_step(numdiff::scaled_norm(w.as_array(), sc));
        let d = [h * sc[0] * dw[0], h * sc[1] * dw[1]];
        let plus = self.evaluate(&State::new(w.rho + d[0], w.j + d[1]))?;
        let minus = self.evaluate(&State::new(w.rho - d[0], w.j - d[1]))?;
        Ok((plus, minus, h))
    }

    /// `φ·dg[dw] + η*·du[dw]` by central differences along `dw`.
    ///
    /// `dw` is measured in the natural units of the state. `g` is recomputed
    /// as `f − u·W` from the system flux, so a corrupted flux shows up here.
    pub fn compatibility_residual(&self, w: &State, dw: [f64; 2]) -> Result<f64> {
        Ok(self.compatibility_terms(w, dw)?.0)
    }

    /// Compatibility residual together with the magnitude of its terms,
    /// `|α·dg₁| + |β·dg₂| + |η*·du|`.
    pub fn compatibility_terms(&self, w: &State, dw: [f64; 2]) -> Result<(f64, f64)> {
        let e = self.evaluate(w)?;
        let (plus, minus, h) = self.directional_pair(w, dw)?;
        let g = |ev: &Evaluation| [ev.flux[0] - ev.u * ev.state.rho, ev.flux[1] - ev.u * ev.state.j];
        let (gp, gm) = (g(&plus), g(&minus));
        let dg = [(gp[0] - gm[0]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * h)];
        let du = (plus.u - minus.u) / (2.0 * h);
        let residual = e.phi.dot(dg) + e.eta_star * du;
        let scale = (e.phi.alpha * dg[0]).abs() + (e.phi.beta * dg[1]).abs() + (e.eta_star * du).abs();
        Ok((residual, scale))
    }

    /// `dζ[dw] − φ·df[dw]` with `ζ = η·u`.
    pub fn entropy_flux_residual(&self, w: &State, dw: [f64; 2]) -> Result<f64> {
        Ok(self.entropy_flux_terms(w, dw)?.0)
    }

    /// Entropy-flux residual together with `|dζ| + |α·df₁| + |β·df₂|`.
    pub fn entropy_flux_terms(&self, w: &State, dw: [f64; 2]) -> Result<(f64, f64)> {
        let e = self.evaluate(w)?;
        let (plus, minus, h) = self.directional_pair(w, dw)?;
        let dzeta = (plus.eta * plus.u - minus.eta * minus.u) / (2.0 * h);
        let df = [
            (plus.flux[0] - minus.flux[0]) / (2.0 * h),
            (plus.flux[1] - minus.flux[1]) / (2.0 * h),
        ];
        let scale = dzeta.abs() + (e.phi.alpha * df[0]).abs() + (e.phi.beta * df[1]).abs();
        Ok((dzeta - e.phi.dot(df), scale))
    }

    /// Image of `W` under the group element `θ_g` acting with `Y_θg`.
    pub fn transport(&self, w: &State, theta_g: f64) -> Result<(State, [f64; 2])> {
        let e = self.evaluate(w)?;
        let fp_new = FiberPoint::new(e.fiber.theta + theta_g, e.fiber.rho0);
        self.fiber_admissible(&fp_new)?;
        let y = rep_matrix(&self.rep, theta_g);
        let [[ga, gd], [gb, gc]] = group_matrix(&self.group, theta_g).0;
        let yw = y.apply(w.as_array());
        let yf = y.apply(e.flux);
        let w_new = State::new(gb * yf[0] + gc * yw[0], gb * yf[1] + gc * yw[1]);
        let f_target = [ga * yf[0] + gd * yw[0], ga * yf[1] + gd * yw[1]];
        Ok((w_new, f_target))
    }

    /// Residuals of the covariance identities for the group element `θ_g`.
    pub fn covariance_residual(&self, w: &State, theta_g: f64) -> Result<CovarianceResidual> {
        let e = self.evaluate(w)?;
        let (w_new, f_target) = self.transport(w, theta_g)?;
        let e_new = self.evaluate(&w_new)?;
        let r_state = (e_new.flux[0] - f_target[0]).hypot(e_new.flux[1] - f_target[1]);
        let g = group_matrix(&self.group, theta_g);
        let target = g.apply([e.eta * e.u, e.eta]);
        let r_entropy = (e_new.eta * e_new.u - target[0]).hypot(e_new.eta - target[1]);
        Ok(CovarianceResidual { r_state, r_entropy })
    }

    /// `df/dW` by central differences, falling back to one-sided differences
    /// when a centered stencil would leave the validity domain.
    pub fn flux_jacobian(&self, w: &State) -> Result<Mat2> {
        let f0 = self.flux(w)?;
        let mut m = [[0.0; 2]; 2];
        for k in 0..2 {
            let x = w.as_array();
            let h = numdiff::gradient_step(numdiff::scaled_norm(x, self.state_scale)) * self.state_scale[k];
            let shifted = |sign: f64| {
                let mut y = x;
                y[k] += sign * h;
                self.flux(&State::from_array(y))
            };
            let col = match (shifted(1.0), shifted(-1.0)) {
                (Ok(p), Ok(mn)) => [(p[0] - mn[0]) / (2.0 * h), (p[1] - mn[1]) / (2.0 * h)],
                (Ok(p), Err(_)) => [(p[0] - f0[0]) / h, (p[1] - f0[1]) / h],
                (Err(_), Ok(mn)) => [(f0[0] - mn[0]) / h, (f0[1] - mn[1]) / h],
                (Err(e), Err(_)) => return Err(e),
            };
            m[0][k] = col[0];
            m[1][k] = col[1];
        }
        Ok(Mat2(m))
    }

    /// Largest absolute eigenvalue of the flux Jacobian.
    pub fn spectral_radius(&self, w: &State) -> Result<f64> {
        let (l1, l2) = eigenvalues(&self.flux_jacobian(w)?)?;
        Ok(l1.abs().max(l2.abs()))
    }
}

/// Discriminant `tr² − 4·det` of the characteristic polynomial.
pub fn discriminant(m: &Mat2) -> f64 {
    let [[a, b], [c, d]] = m.0;
    // (a − d)² + 4bc avoids cancellation of tr² − 4det
    (a - d) * (a - d) + 4.0 * b * c
}

/// Real eigenvalues of a 2×2 matrix in ascending order.
pub fn eigenvalues(m: &Mat2) -> Result<(f64, f64)> {
    let disc = discriminant(m);
    if disc < 0.0 {
        return Err(Error::ComplexEigenvalues { discriminant: disc });
    }
    let tr = m.trace();
    let root = disc.sqrt();
    let q = 0.5 * (tr + tr.signum() * root);
    let (l1, l2) = if q == 0.0 {
        (0.5 * (tr - root), 0.5 * (tr + root))
    } else {
        (q, m.det() / q)
    };
    Ok(if l1 <= l2 { (l1, l2) } else { (l2, l1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{exponential_entropy, homographic_entropy};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn circular() -> CovariantSystem {
        CovariantSystem::new(
            "circular",
            GroupSpec::circular(1.0).unwrap(),
            RepSpec::new(Curvature::Negative, 1.0).unwrap(),
            exponential_entropy(1.0, 1.0).unwrap(),
            Projection::CircularClosedForm { rho_star: 1.0 },
            Validity::CircularElliptic { a: 1.0, rho_star: 1.0 },
        )
        .with_theta_max(FRAC_PI_4)
    }

    fn lorentz() -> CovariantSystem {
        CovariantSystem::new(
            "lorentz",
            GroupSpec::lorentz(1.0).unwrap(),
            RepSpec::new(Curvature::Positive, 1.0).unwrap(),
            homographic_entropy(1.0, 1.0).unwrap(),
            Projection::RootSolve { lo: 0.0, hi: 0.5 },
            Validity::LorentzHyperbolic { a: 1.0, rho_star: 1.0 },
        )
    }

    #[test]
    fn lift_at_zero_theta_is_rest_state() {
        for sys in [circular(), lorentz()] {
            let w = sys.lift(&FiberPoint::new(0.0, 0.3)).unwrap();
            assert_eq!(w, State::new(0.3, 0.0));
        }
    }

    #[test]
    fn circular_lift_momentum() {
        let sys = circular();
        let theta = 0.37;
        let w = sys.lift(&FiberPoint::new(theta, 1.1)).unwrap();
        assert!((w.j - theta.sin() * theta.cos()).abs() < 1e-15);
    }

    #[test]
    fn projection_with_zero_momentum() {
        for sys in [circular(), lorentz()] {
            let fp = sys.project(&State::new(0.3, 0.0)).unwrap();
            assert_eq!(fp.theta, 0.0);
            assert!((fp.rho0 - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn circular_projection_at_psi_one() {
        // Ψ = 1 sits on the excluded boundary; the closed form itself gives θ = π/4
        let mut sys = circular();
        sys.validity = Validity::Unrestricted;
        let fp = sys.project(&State::new(0.7, 0.5)).unwrap();
        assert!((fp.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((fp.rho0 - 1.2).abs() < 1e-15);
        assert!(matches!(
            circular().project(&State::new(0.7, 0.5)),
            Err(Error::OutsideValidity { .. })
        ));
    }

    #[test]
    fn lorentz_rejects_dense_states() {
        assert!(matches!(
            lorentz().project(&State::new(0.6, 0.0)),
            Err(Error::OutsideValidity { .. })
        ));
        assert!(matches!(
            lorentz().project(&State::new(0.2, 0.3)),
            Err(Error::OutsideValidity { .. })
        ));
    }

    #[test]
    fn rest_density_map_endpoints() {
        let sys = lorentz();
        for j in [0.05, -0.2, 0.4] {
            assert!((sys.rest_density_map(0.0, j) - j.abs()).abs() < 1e-15);
            assert!(sys.rest_density_map(0.5, j) >= 0.5);
        }
    }

    #[test]
    fn thermo_flux_at_rest() {
        let sys = circular();
        let g = sys.thermo_flux(&State::new(1.3, 0.0)).unwrap();
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn thermo_flux_circular_example() {
        let sys = circular();
        let fp = FiberPoint::new(FRAC_PI_6, 1.2);
        let w = sys.lift(&fp).unwrap();
        let g = sys.thermo_flux(&w).unwrap();
        let (c, s) = (FRAC_PI_6.cos(), FRAC_PI_6.sin());
        let expected = [-s * 0.2 / c, c * 0.2 / c];
        assert!((g[0] - expected[0]).abs() < 1e-12);
        assert!((g[1] - expected[1]).abs() < 1e-12);
        let e = sys.evaluate(&w).unwrap();
        assert!((e.flux[0] - e.u * w.rho - g[0]).abs() < 1e-12);
    }

    #[test]
    fn unsupported_projection() {
        let sys = CovariantSystem::new(
            "mixed",
            GroupSpec::lorentz(1.0).unwrap(),
            RepSpec::new(Curvature::Negative, 1.0).unwrap(),
            exponential_entropy(1.0, 1.0).unwrap(),
            Projection::Unsupported,
            Validity::Unrestricted,
        );
        assert!(sys.lift(&FiberPoint::new(0.2, 1.0)).is_ok());
        assert!(matches!(
            sys.project(&State::new(1.0, 0.1)),
            Err(Error::UnsupportedCombination {
                epsilon: 1,
                epsilon_tilde: -1
            })
        ));
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let (l1, l2) = eigenvalues(&Mat2::new(0.0, 1.0, 4.0, 0.0)).unwrap();
        assert_eq!((l1, l2), (-2.0, 2.0));
        let (l1, l2) = eigenvalues(&Mat2::new(3.0, 0.0, 0.0, 3.0)).unwrap();
        assert_eq!((l1, l2), (3.0, 3.0));
        assert!(matches!(
            eigenvalues(&Mat2::new(0.0, -1.0, 1.0, 0.0)),
            Err(Error::ComplexEigenvalues { .. })
        ));
    }

    #[test]
    fn covariance_identity_transform() {
        for sys in [circular(), lorentz()] {
            let r = sys.covariance_residual(&State::new(0.3, 0.05), 0.0).unwrap();
            assert_eq!((r.r_state, r.r_entropy), (0.0, 0.0));
        }
    }

    #[test]
    fn compatibility_with_zero_direction() {
        let sys = lorentz();
        assert_eq!(
            sys.compatibility_residual(&State::new(0.3, 0.1), [0.0, 0.0]).unwrap(),
            0.0
        );
    }
}
