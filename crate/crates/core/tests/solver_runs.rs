use std::path::Path;

use covhyp::catalog::SystemKind;
use covhyp::parallel::ExecMode;
use covhyp::solver::{self, Boundary, Grid1D, InitialData, SimConfig, TimeSeries};
use covhyp::{Error, State};

fn riemann(system: SystemKind, left: State, right: State, n: usize, t_end: f64, boundary: Boundary) -> SimConfig {
    SimConfig {
        system,
        params: Default::default(),
        grid: Grid1D::new(n, 0.0, 1.0).unwrap(),
        cfl: solver::DEFAULT_CFL,
        t_end,
        boundary,
        initial: InitialData::Riemann {
            left,
            right,
            x_split: 0.5,
        },
        snapshot_every: 0,
    }
}

fn bump(system: SystemKind, n: usize) -> SimConfig {
    let bg = match system {
        SystemKind::LorentzHyperbolic => State::new(0.2, 0.0),
        _ => State::new(1.0, 0.0),
    };
    SimConfig {
        system,
        params: Default::default(),
        grid: Grid1D::new(n, 0.0, 1.0).unwrap(),
        cfl: solver::DEFAULT_CFL,
        t_end: 0.05,
        boundary: Boundary::Periodic,
        initial: InitialData::GaussianBump {
            background: bg,
            amplitude: State::new(0.25 * bg.rho, 0.05 * bg.rho),
            center: 0.5,
            width: 0.1,
        },
        snapshot_every: 0,
    }
}

/// `∫ D dt` over the run.
fn entropy_production(s: &TimeSeries) -> f64 {
    s.budget.windows(2).map(|w| w[1].d.unwrap() * (w[1].t - w[0].t)).sum()
}

#[test]
fn entropy_production_converges_at_first_order() {
    for kind in SystemKind::ALL {
        let prods: Vec<f64> = [100, 200, 400]
            .into_iter()
            .map(|n| entropy_production(&solver::run(&bump(kind, n)).unwrap()))
            .collect();
        for w in prods.windows(2) {
            assert!(w[0] < 0.0 && w[1] < 0.0, "{kind}: {prods:?}");
            let order = (w[0] / w[1]).log2();
            assert!((0.8..1.2).contains(&order), "{kind}: order {order}, {prods:?}");
        }
    }
}

#[test]
fn zero_length_run_keeps_initial_snapshot_only() {
    let cfg = riemann(
        SystemKind::CircularElliptic,
        State::new(1.0, 0.1),
        State::new(1.0, -0.1),
        20,
        0.0,
        Boundary::Periodic,
    );
    let s = solver::run(&cfg).unwrap();
    assert_eq!(s.steps, 0);
    assert_eq!(s.snapshots.len(), 1);
    assert_eq!(s.budget.len(), 1);
    assert!(s.budget[0].d.is_none());
}

#[test]
fn compression_past_the_light_cone_bound_is_reported() {
    let cfg = riemann(
        SystemKind::LorentzHyperbolic,
        State::new(0.45, 0.44),
        State::new(0.45, -0.44),
        200,
        0.5,
        Boundary::Outflow,
    );
    let out = solver::run_recorded(&cfg, ExecMode::Sequential).unwrap();
    match out.error {
        Some(Error::StateLeftDomain { cell, time, .. }) => {
            assert!(cell < 200);
            assert!(time > 0.0);
        }
        other => panic!("expected StateLeftDomain, got {other:?}"),
    }
    assert_eq!(out.series.snapshots[0].step, 0);
    assert!(matches!(solver::run(&cfg), Err(Error::StateLeftDomain { .. })));
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut cfg = riemann(
        SystemKind::CircularElliptic,
        State::new(1.0, 0.1),
        State::new(1.0, -0.1),
        20,
        0.1,
        Boundary::Periodic,
    );
    cfg.cfl = 1.5;
    assert!(matches!(solver::run(&cfg), Err(Error::Config(_))));
    let cfg = riemann(
        SystemKind::LorentzHyperbolic,
        State::new(0.6, 0.0),
        State::new(0.2, 0.0),
        20,
        0.1,
        Boundary::Periodic,
    );
    assert!(matches!(solver::run(&cfg), Err(Error::Config(_))));
}

#[test]
fn modes_agree_bitwise() {
    let cfg = riemann(
        SystemKind::GalileoElliptic,
        State::new(1.0, 0.3),
        State::new(0.8, -0.2),
        150,
        0.1,
        Boundary::Outflow,
    );
    let a = solver::run_recorded(&cfg, ExecMode::Sequential).unwrap().series;
    let b = solver::run_recorded(&cfg, ExecMode::Parallel).unwrap().series;
    assert_eq!(a.field, b.field);
    assert_eq!(a.budget_csv(), b.budget_csv());
}

fn check_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("COVHYP_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (set COVHYP_UPDATE_GOLDEN=1 to create)", path.display()));
    assert!(expected == actual, "{name} differs from the golden file");
}

#[test]
fn lorentz_riemann_matches_golden_files() {
    let cfg = riemann(
        SystemKind::LorentzHyperbolic,
        State::new(0.2, 0.05),
        State::new(0.2, -0.05),
        64,
        0.1,
        Boundary::Periodic,
    );
    let s = solver::run_recorded(&cfg, ExecMode::Sequential).unwrap().series;
    check_golden(
        "lorentz_riemann_final.csv",
        &TimeSeries::snapshot_csv(s.snapshots.last().unwrap()),
    );
    check_golden("lorentz_riemann_budget.csv", &s.budget_csv());
}
