//! Randomized identity suite.
//!
//! States are drawn uniformly in the fiber box of the system, lifted, and
//! kept only if a small stencil around them stays inside the validity domain,
//! so that every finite-difference check sees interior points only.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{self, SystemParams};
use crate::construction::{eigenvalues, CovariantSystem, FiberPoint, Projection, State, Validity};
use crate::error::{Error, Result};
use crate::kinematics::{derivative_at_zero_rep, rep_matrix};
use crate::manifold::{self, EntropyDatum};
use crate::numdiff::{self, rel_err};
use crate::parallel::{map_indexed, ExecMode};

pub const TOL_ROUND_TRIP: f64 = 1e-10;
pub const TOL_GRADIENT: f64 = 1e-6;
pub const TOL_LEGENDRE: f64 = 1e-10;
pub const TOL_ORTHOGONALITY: f64 = 1e-10;
pub const TOL_PRESSURE: f64 = 1e-12;
pub const TOL_DELTA: f64 = 1e-5;
pub const TOL_HESSIAN: f64 = 1e-4;
pub const TOL_COMPATIBILITY: f64 = 1e-5;
pub const TOL_COVARIANCE: f64 = 1e-9;
pub const TOL_CLOSED_FORM: f64 = 1e-10;
pub const TOL_BISECTION: f64 = 1e-13;

/// Half-width of the stencil that sampled states must keep inside the domain.
const INTERIOR_PROBE: f64 = 2e-5;
const MAX_DRAWS: usize = 10_000;
const COVARIANCE_DRAWS: usize = 16;
const THETA_G_RANGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub rho: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub theta: f64,
    pub rho0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_input: Option<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub system: String,
    pub seed: u64,
    pub n_samples: usize,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "system: {}  seed: {}  samples: {}",
            self.system, self.seed, self.n_samples
        );
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>14} {:>10}  result",
            "check", "samples", "max_residual", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>14.6e} {:>10.1e}  {}",
                c.name,
                c.samples,
                c.max_residual,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Running maximum with the input that produced it.
#[derive(Debug, Clone)]
struct Accumulator {
    name: &'static str,
    tolerance: f64,
    samples: usize,
    max: f64,
    worst: Option<Sample>,
}

impl Accumulator {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Accumulator {
            name,
            tolerance,
            samples: 0,
            max: 0.0,
            worst: None,
        }
    }

    fn push(&mut self, residual: f64, at: Sample) {
        self.samples += 1;
        let r = if residual.is_finite() { residual } else { f64::MAX };
        if self.worst.is_none() || r > self.max {
            self.max = r;
            self.worst = Some(at);
        }
    }

    fn finish(self) -> CheckRecord {
        CheckRecord {
            name: self.name.to_string(),
            samples: self.samples,
            max_residual: self.max,
            tolerance: self.tolerance,
            pass: self.max <= self.tolerance,
            worst_input: self.worst,
        }
    }
}

/// Whether `w` and a small box around it lie in the validity domain.
pub fn is_interior(sys: &CovariantSystem, w: &State) -> bool {
    let sc = sys.state_scale;
    let h = INTERIOR_PROBE * (1.0 + numdiff::scaled_norm(w.as_array(), sc));
    let (h0, h1) = (h * sc[0], h * sc[1]);
    for s0 in [-1.0, 0.0, 1.0] {
        for s1 in [-1.0, 0.0, 1.0] {
            let p = State::new(w.rho + s0 * h0, w.j + s1 * h1);
            if sys.project(&p).is_err() {
                return false;
            }
        }
    }
    true
}

/// Draw one interior fiber point and its state.
pub fn sample_state<R: Rng>(sys: &CovariantSystem, rng: &mut R) -> Result<(FiberPoint, State)> {
    let b = sys.sampling;
    for _ in 0..MAX_DRAWS {
        let fp = FiberPoint::new(rng.gen_range(b.theta.0..b.theta.1), rng.gen_range(b.rho0.0..b.rho0.1));
        if sys.fiber_admissible(&fp).is_err() {
            continue;
        }
        let Ok(w) = sys.lift(&fp) else { continue };
        if sys.validate(&w).is_ok() && is_interior(sys, &w) {
            return Ok((fp, w));
        }
    }
    Err(Error::InvalidParameter(format!(
        "no admissible state found in the sampling box of {}",
        sys.name
    )))
}

fn unit_direction<R: Rng>(rng: &mut R) -> [f64; 2] {
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    [t.cos(), t.sin()]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Inputs of one sample, drawn sequentially so the report does not depend
/// on the execution mode.
#[derive(Debug, Clone)]
struct Draw {
    fp: FiberPoint,
    w: State,
    other: State,
    dw: [f64; 2],
    theta_g: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    round_trip: Option<f64>,
    gradient: Option<f64>,
    legendre: Option<f64>,
    orthogonality: Option<f64>,
    representation: Option<f64>,
    pressure: Option<f64>,
    delta: Option<f64>,
    hessian: Option<f64>,
    compatibility: Option<f64>,
    entropy_flux: Option<f64>,
    covariance: Option<(f64, f64)>,
    covariance_outside: usize,
    hyperbolicity: Option<f64>,
    positivity: Option<f64>,
    closed_form: Option<(f64, f64)>,
    bisection: Option<f64>,
}

fn fd_delta(sys: &CovariantSystem, fp: &FiberPoint) -> Result<f64> {
    let m = numdiff::jacobian2(
        |x| sys.lift(&FiberPoint::new(x[0], x[1])).map(|w| w.as_array()),
        [fp.theta, fp.rho0],
        sys.fiber_scale(),
        numdiff::hessian_step,
    )?;
    Ok(m[0][0] * m[1][1] - m[0][1] * m[1][0])
}

fn fd_hessian(sys: &CovariantSystem, w: &State) -> Result<[[f64; 2]; 2]> {
    numdiff::hessian2_extrapolated(|x| sys.entropy(&State::from_array(x)), w.as_array(), sys.state_scale)
}

fn evaluate_draw(sys: &CovariantSystem, params: Option<&SystemParams>, d: &Draw) -> Outcome {
    let mut o = Outcome::default();
    let w = d.w;
    let fp = d.fp;

    if let Ok(p) = sys.project(&w) {
        let back = sys
            .lift(&p)
            .map(|b| norm([b.rho - w.rho, b.j - w.j]) / norm(w.as_array()));
        let fiber = norm([p.theta - fp.theta, p.rho0 - fp.rho0]) / norm([fp.theta, fp.rho0]);
        o.round_trip = Some(back.map_or(f64::INFINITY, |b| b.max(fiber)));
    } else {
        o.round_trip = Some(f64::INFINITY);
    }

    let Ok(e) = sys.evaluate(&w) else {
        return o;
    };

    o.gradient = Some(
        match (
            sys.entropy_variables(&w),
            numdiff::gradient2(|x| sys.entropy(&State::from_array(x)), w.as_array(), sys.state_scale),
        ) {
            (Ok(phi), Ok(g)) => norm([phi.alpha - g[0], phi.beta - g[1]]) / norm(phi.as_array()),
            _ => f64::INFINITY,
        },
    );

    let legendre = (e.eta_star - (e.phi.dot(w.as_array()) - e.eta)).abs();
    let dual = manifold::sigma_star(&sys.datum, e.fiber.rho0)
        .map(|s| (e.eta_star - sys.group.trig(e.fiber.theta).0 * s).abs())
        .unwrap_or(f64::INFINITY);
    o.legendre = Some(legendre.max(dual));

    let sp = sys.datum.sigma_prime(e.fiber.rho0);
    let rec = rep_matrix(&sys.rep, e.fiber.theta).apply_left(e.phi.as_array());
    let ortho = e.phi.dot(e.thermo_flux).abs();
    let other = sys
        .evaluate(&d.other)
        .map(|eo| eo.phi.dot(eo.thermo_flux).abs())
        .unwrap_or(f64::INFINITY);
    o.orthogonality = Some(ortho.max(other).max((rec[0] - sp).abs()).max(rec[1].abs()));

    let y0 = derivative_at_zero_rep(&sys.rep).apply([e.fiber.rho0, 0.0]);
    o.representation = Some((sp * y0[0] + 0.0 * y0[1]).abs());
    o.pressure = Some(
        manifold::pressure_residual(&sys.datum, &sys.rep, sys.group.c, e.fiber.rho0, e.p0).unwrap_or(f64::INFINITY),
    );

    o.delta = Some(match (sys.jacobian_delta(&e.fiber), fd_delta(sys, &e.fiber)) {
        (Ok(a), Ok(b)) => rel_err(a, b, f64::MIN_POSITIVE),
        _ => f64::INFINITY,
    });

    let conv = sys.convexity_diagnostics(&e.fiber);
    o.hessian = Some(match (&conv, fd_hessian(sys, &w)) {
        (Ok(c), Ok(h)) => {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            rel_err(c.det_hessian, det, f64::MIN_POSITIVE).max(rel_err(c.d2eta_drho2, h[0][0], f64::MIN_POSITIVE))
        }
        _ => f64::INFINITY,
    });
    o.positivity = Some(match &conv {
        Ok(c) if c.det_hessian > 0.0 && c.d2eta_drho2 > 0.0 => 0.0,
        _ => 1.0,
    });

    // relative to the term magnitudes, never looser than the absolute residual
    let normalized = |(r, scale): (f64, f64)| r.abs() / scale.max(1.0);
    o.compatibility = Some(sys.compatibility_terms(&w, d.dw).map_or(f64::INFINITY, normalized));
    o.entropy_flux = Some(sys.entropy_flux_terms(&w, d.dw).map_or(f64::INFINITY, normalized));

    for &tg in &d.theta_g {
        match sys.covariance_residual(&w, tg) {
            Ok(r) => {
                o.covariance = Some((r.r_state.max(r.r_entropy), tg));
                break;
            }
            Err(Error::OutsideValidity { .. }) => o.covariance_outside += 1,
            Err(_) => {
                o.covariance = Some((f64::INFINITY, tg));
                break;
            }
        }
    }

    o.hyperbolicity = Some(match sys.flux_jacobian(&w).and_then(|m| eigenvalues(&m)) {
        Ok((l1, l2)) if l1 < l2 => 0.0,
        _ => 1.0,
    });

    if let Some(p) = params {
        match sys.name.as_str() {
            "circular-elliptic" => {
                let cf = catalog::circular_flux_closed_form(p, &w);
                o.closed_form = Some((norm([e.flux[0] - cf[0], e.flux[1] - cf[1]]), f64::NAN));
            }
            "lorentz-hyperbolic" => {
                let cf = catalog::lorentz_flux_closed_form(p, &w, &e.fiber);
                let lin = catalog::lorentz_flux_linear_variant(p, &w, &e.fiber);
                o.closed_form = Some((norm([e.flux[0] - cf[0], e.flux[1] - cf[1]]), (e.flux[0] - lin).abs()));
            }
            _ => {}
        }
    }

    if let Projection::RootSolve { lo, hi } = sys.projection {
        let f_lo = sys.rest_density_map(lo, w.j);
        let f_hi = sys.rest_density_map(hi, w.j);
        let endpoint = (f_lo - w.j.abs() / sys.rep.a).abs();
        let bracket = if f_hi >= hi { 0.0 } else { f64::INFINITY };
        let residual = (sys.rest_density_map(e.fiber.rho0, w.j) - w.rho).abs() / w.rho.abs().max(1.0);
        o.bisection = Some(endpoint.max(bracket).max(residual));
    }
    o
}

/// Run every identity check on `n_samples` random interior states.
///
/// # Errors
///
/// `InvalidParameter` when `n_samples` is zero or the sampling box of the
/// system contains no admissible state.
pub fn run_suite(sys: &CovariantSystem, seed: u64, n_samples: usize) -> Result<VerifyReport> {
    run_suite_with(sys, seed, n_samples, ExecMode::default())
}

/// Catalog parameters recovered from a system built with a built-in datum.
fn catalog_params(sys: &CovariantSystem) -> Option<SystemParams> {
    let (sigma_bar, rho_star) = match sys.datum {
        EntropyDatum::Exponential { sigma_bar, rho_star } | EntropyDatum::Homographic { sigma_bar, rho_star } => {
            (sigma_bar, rho_star)
        }
        EntropyDatum::Custom(_) => return None,
    };
    Some(SystemParams {
        rho_star,
        sigma_bar,
        a: sys.rep.a,
        c: sys.group.c,
    })
}

/// [`run_suite`] with an explicit execution mode; the report does not depend
/// on the mode.
pub fn run_suite_with(sys: &CovariantSystem, seed: u64, n_samples: usize, mode: ExecMode) -> Result<VerifyReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (fp, w) = sample_state(sys, &mut rng)?;
        let (_, other) = sample_state(sys, &mut rng)?;
        let dw = unit_direction(&mut rng);
        let theta_g = (0..COVARIANCE_DRAWS)
            .map(|_| rng.gen_range(-THETA_G_RANGE..THETA_G_RANGE))
            .collect();
        draws.push(Draw {
            fp,
            w,
            other,
            dw,
            theta_g,
        });
    }

    let params = catalog_params(sys);
    let outcomes = map_indexed(mode, draws.len(), |i| evaluate_draw(sys, params.as_ref(), &draws[i]));

    let mut round_trip = Accumulator::new("round_trip", TOL_ROUND_TRIP);
    let mut gradient = Accumulator::new("entropy_gradient", TOL_GRADIENT);
    let mut legendre = Accumulator::new("legendre", TOL_LEGENDRE);
    let mut ortho = Accumulator::new("orthogonality", TOL_ORTHOGONALITY);
    let mut repr = Accumulator::new("representation_constraint", 0.0);
    let mut pressure = Accumulator::new("pressure_constraint", TOL_PRESSURE);
    let mut delta = Accumulator::new("jacobian_delta", TOL_DELTA);
    let mut hessian = Accumulator::new("hessian", TOL_HESSIAN);
    let mut positivity = Accumulator::new("convexity_positivity", 0.0);
    let mut compat = Accumulator::new("compatibility", TOL_COMPATIBILITY);
    let mut eflux = Accumulator::new("entropy_flux", TOL_COMPATIBILITY);
    let mut cov = Accumulator::new("covariance", TOL_COVARIANCE);
    let mut hyper = Accumulator::new("hyperbolicity", 0.0);
    let mut closed = Accumulator::new("closed_form_flux", TOL_CLOSED_FORM);
    let mut bisect = Accumulator::new("bisection", TOL_BISECTION);
    let mut outside = 0usize;
    let mut linear_variant_max: f64 = 0.0;

    for (d, o) in draws.iter().zip(&outcomes) {
        let at = |aux: Option<f64>| Sample {
            rho: d.w.rho,
            j: d.w.j,
            theta: d.fp.theta,
            rho0: d.fp.rho0,
            aux,
        };
        let pairs: [(&mut Accumulator, Option<f64>); 12] = [
            (&mut round_trip, o.round_trip),
            (&mut gradient, o.gradient),
            (&mut legendre, o.legendre),
            (&mut ortho, o.orthogonality),
            (&mut repr, o.representation),
            (&mut pressure, o.pressure),
            (&mut delta, o.delta),
            (&mut hessian, o.hessian),
            (&mut positivity, o.positivity),
            (&mut compat, o.compatibility),
            (&mut eflux, o.entropy_flux),
            (&mut hyper, o.hyperbolicity),
        ];
        for (acc, r) in pairs {
            // a state that fails to evaluate still counts against every check
            acc.push(r.unwrap_or(f64::INFINITY), at(None));
        }
        if let Some((r, tg)) = o.covariance {
            cov.push(r, at(Some(tg)));
        }
        outside += o.covariance_outside;
        if let Some((r, lin)) = o.closed_form {
            closed.push(r, at(None));
            if lin.is_finite() {
                linear_variant_max = linear_variant_max.max(lin);
            }
        }
        if let Some(r) = o.bisection {
            bisect.push(r, at(None));
        }
    }

    let mut notes = Vec::new();
    notes.push(format!(
        "covariance: {} of {} transported pairs left the validity domain and were reported as outside validity",
        outside,
        outside + cov.samples
    ));
    if sys.name == "lorentz-hyperbolic" && closed.samples > 0 {
        notes.push(format!(
            "lorentz first flux component: the generic construction matches (rho + rho0^2/rho_star)*u to {:.3e}; the variant (rho + rho0/rho_star)*u differs by up to {:.3e}",
            closed.max, linear_variant_max
        ));
    }

    let mut checks: Vec<CheckRecord> = [
        round_trip, gradient, legendre, ortho, repr, pressure, delta, hessian, positivity, compat, eflux, cov, hyper,
    ]
    .into_iter()
    .map(Accumulator::finish)
    .collect();
    if closed.samples > 0 {
        checks.push(closed.finish());
    }
    if bisect.samples > 0 {
        checks.push(bisect.finish());
    }
    checks.sort_by(|a, b| a.name.cmp(&b.name));

    Ok(VerifyReport {
        system: sys.name.clone(),
        seed,
        n_samples,
        checks,
        notes,
    })
}

/// Violation counts of a regular grid over the validity domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GridSweep {
    pub points: usize,
    pub non_positive_det: usize,
    pub non_positive_d2eta: usize,
    pub non_hyperbolic: usize,
}

/// Node `(i, k)` of the `n × n` grid over the validity domain.
///
/// The bounded Lorentz domain `|J|/a < ρ < ρ*/2` is covered in the state
/// coordinates `(ρ, J/(aρ))`; the other systems use the fiber sampling box.
fn grid_node(sys: &CovariantSystem, i: usize, k: usize, n: usize) -> Option<(FiberPoint, State)> {
    let node = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
    let (fp, w) = match sys.validity {
        Validity::LorentzHyperbolic { a, rho_star } => {
            let rho = node(i, 0.0, 0.5 * rho_star);
            let w = State::new(rho, a * rho * node(k, -1.0, 1.0));
            (sys.project(&w).ok()?, w)
        }
        _ => {
            let b = sys.sampling;
            let fp = FiberPoint::new(node(i, b.theta.0, b.theta.1), node(k, b.rho0.0, b.rho0.1));
            sys.fiber_admissible(&fp).ok()?;
            (fp, sys.lift(&fp).ok()?)
        }
    };
    sys.validate(&w).ok()?;
    Some((fp, w))
}

/// Evaluate convexity and hyperbolicity on an `n × n` grid over the validity
/// domain, skipping nodes that fail to evaluate.
pub fn grid_sweep(sys: &CovariantSystem, n: usize, mode: ExecMode) -> GridSweep {
    let rows = map_indexed(mode, n, |i| {
        let mut s = GridSweep::default();
        for k in 0..n {
            let Some((fp, w)) = grid_node(sys, i, k, n) else {
                continue;
            };
            s.points += 1;
            match sys.convexity_diagnostics(&fp) {
                Ok(c) => {
                    s.non_positive_det += usize::from(!(c.det_hessian > 0.0));
                    s.non_positive_d2eta += usize::from(!(c.d2eta_drho2 > 0.0));
                }
                Err(_) => {
                    s.non_positive_det += 1;
                    s.non_positive_d2eta += 1;
                }
            }
            let hyperbolic = sys
                .flux_jacobian(&w)
                .and_then(|m| eigenvalues(&m))
                .is_ok_and(|(l1, l2)| l1 < l2);
            s.non_hyperbolic += usize::from(!hyperbolic);
        }
        s
    });
    rows.into_iter().fold(GridSweep::default(), |a, r| GridSweep {
        points: a.points + r.points,
        non_positive_det: a.non_positive_det + r.non_positive_det,
        non_positive_d2eta: a.non_positive_d2eta + r.non_positive_d2eta,
        non_hyperbolic: a.non_hyperbolic + r.non_hyperbolic,
    })
}
