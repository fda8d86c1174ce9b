use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use covhyp::catalog::{self, SystemKind, SystemParams};
use covhyp::parallel::ExecMode;
use covhyp::solver::{Boundary, Grid1D, InitialData, Solver};
use covhyp::verify;
use covhyp::State;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn solver_step(c: &mut Criterion) {
    let sys = catalog::build(SystemKind::LorentzHyperbolic, SystemParams::default()).unwrap();
    let mut group = c.benchmark_group("solver_step");
    for n in [1_000usize, 10_000] {
        let grid = Grid1D::new(n, 0.0, 1.0).unwrap();
        let field = InitialData::Riemann {
            left: State::new(0.2, 0.05),
            right: State::new(0.2, -0.05),
            x_split: 0.5,
        }
        .sample(&grid);
        for (label, mode) in MODES {
            let solver = Solver::new(sys.clone(), grid, Boundary::Periodic, 0.45).with_mode(mode);
            let dt = solver.stable_dt(&field).unwrap();
            group.bench_with_input(BenchmarkId::new(label, n), &field, |b, f| {
                b.iter(|| solver.step(black_box(f), dt, 0.0).unwrap())
            });
        }
    }
    group.finish();
}

fn verify_suite(c: &mut Criterion) {
    let sys = catalog::build(SystemKind::LorentzHyperbolic, SystemParams::default()).unwrap();
    let mut group = c.benchmark_group("verify_suite");
    group.sample_size(10);
    for (label, mode) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| verify::run_suite_with(&sys, black_box(42), 500, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solver_step, verify_suite);
criterion_main!(benches);
