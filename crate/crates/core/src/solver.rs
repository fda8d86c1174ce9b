//! First-order finite-volume solver with a Rusanov flux.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{self, SystemKind, SystemParams};
use crate::construction::{CovariantSystem, State};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, ExecMode};

pub const DEFAULT_CFL: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub n_cells: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self> {
        let g = Grid1D { n_cells, x_min, x_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::Config(format!("grid.n_cells must be > 1, got {}", self.n_cells)));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::Config("grid requires finite x_min < x_max".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }
}

pub type Field = Vec<State>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Outflow,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Riemann {
        left: State,
        right: State,
        x_split: f64,
    },
    /// `background + amplitude·exp(−((x − center)/width)²)`.
    GaussianBump {
        background: State,
        amplitude: State,
        center: f64,
        width: f64,
    },
}

impl InitialData {
    pub fn sample(&self, grid: &Grid1D) -> Field {
        (0..grid.n_cells)
            .map(|i| {
                let x = grid.center(i);
                match *self {
                    InitialData::Riemann { left, right, x_split } => {
                        if x < x_split {
                            left
                        } else {
                            right
                        }
                    }
                    InitialData::GaussianBump {
                        background,
                        amplitude,
                        center,
                        width,
                    } => {
                        let g = (-((x - center) / width).powi(2)).exp();
                        State::new(background.rho + amplitude.rho * g, background.j + amplitude.j * g)
                    }
                }
            })
            .collect()
    }
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub system: SystemKind,
    #[serde(default)]
    pub params: SystemParams,
    pub grid: Grid1D,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default)]
    pub boundary: Boundary,
    pub initial: InitialData,
    /// Steps between snapshots; 0 keeps only the first and last.
    #[serde(default)]
    pub snapshot_every: usize,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.grid.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        if let InitialData::GaussianBump { width, .. } = self.initial {
            if !(width > 0.0) {
                return Err(Error::Config(format!("initial.width must be positive, got {width}")));
            }
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<CovariantSystem> {
        catalog::build(self.system, self.params).map_err(|e| Error::Config(e.to_string()))
    }
}

/// `½(f(wl) + f(wr)) − ½·s·(wr − wl)` with `s` the larger spectral radius.
pub fn numerical_flux(sys: &CovariantSystem, wl: &State, wr: &State) -> Result<[f64; 2]> {
    let fl = sys.flux(wl)?;
    let fr = sys.flux(wr)?;
    let s = sys.spectral_radius(wl)?.max(sys.spectral_radius(wr)?);
    rusanov(fl, fr, wl, wr, s)
}

fn rusanov(fl: [f64; 2], fr: [f64; 2], wl: &State, wr: &State, s: f64) -> Result<[f64; 2]> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("wave speed must be positive, got {s}")));
    }
    Ok([
        0.5 * (fl[0] + fr[0]) - 0.5 * s * (wr.rho - wl.rho),
        0.5 * (fl[1] + fr[1]) - 0.5 * s * (wr.j - wl.j),
    ])
}

/// Flux, spectral radius and entropy pair of one cell.
#[derive(Debug, Clone, Copy)]
struct CellData {
    flux: [f64; 2],
    speed: f64,
    eta: f64,
    u: f64,
}

/// Compensated summation.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub sys: CovariantSystem,
    pub grid: Grid1D,
    pub boundary: Boundary,
    pub cfl: f64,
    pub mode: ExecMode,
}

impl Solver {
    pub fn new(sys: CovariantSystem, grid: Grid1D, boundary: Boundary, cfl: f64) -> Self {
        Solver {
            sys,
            grid,
            boundary,
            cfl,
            mode: ExecMode::default(),
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    fn cell_data(&self, field: &Field, time: f64) -> Result<Vec<CellData>> {
        let sys = &self.sys;
        let data = map_indexed(self.mode, field.len(), |i| {
            let w = &field[i];
            let e = sys.evaluate(w)?;
            Ok(CellData {
                flux: e.flux,
                speed: sys.spectral_radius(w)?,
                eta: e.eta,
                u: e.u,
            })
        });
        data.into_iter()
            .enumerate()
            .map(|(i, r): (usize, Result<CellData>)| {
                r.map_err(|e| Error::StateLeftDomain {
                    cell: i,
                    time,
                    reason: e.to_string(),
                })
            })
            .collect()
    }

    pub fn check_field(&self, field: &Field, time: f64) -> Result<()> {
        if field.len() != self.grid.n_cells {
            return Err(Error::InvalidParameter(format!(
                "field has {} cells, grid has {}",
                field.len(),
                self.grid.n_cells
            )));
        }
        for (i, w) in field.iter().enumerate() {
            self.sys.project(w).map_err(|e| Error::StateLeftDomain {
                cell: i,
                time,
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Largest characteristic speed over the field.
    pub fn max_speed(&self, field: &Field) -> Result<f64> {
        let data = self.cell_data(field, f64::NAN)?;
        Ok(data.iter().fold(0.0, |m, d| m.max(d.speed)))
    }

    /// `cfl·dx / max|λ|`.
    pub fn stable_dt(&self, field: &Field) -> Result<f64> {
        Ok(self.cfl * self.grid.dx() / self.max_speed(field)?)
    }

    fn neighbor(&self, i: isize) -> usize {
        let n = self.grid.n_cells as isize;
        match self.boundary {
            Boundary::Outflow => i.clamp(0, n - 1) as usize,
            Boundary::Periodic => i.rem_euclid(n) as usize,
        }
    }

    /// Advance `field` by `dt` from time `t`.
    ///
    /// # Errors
    ///
    /// `CflViolation` if `dt` exceeds the stable step of `field`, and
    /// `StateLeftDomain` if a cell is outside the validity domain before or
    /// after the update.
    pub fn step(&self, field: &Field, dt: f64, t: f64) -> Result<Field> {
        let data = self.cell_data(field, t)?;
        self.advance(field, &data, dt, t)
    }

    fn advance(&self, field: &Field, data: &[CellData], dt: f64, t: f64) -> Result<Field> {
        let n = self.grid.n_cells;
        let max_speed = data.iter().fold(0.0, |m: f64, d| m.max(d.speed));
        let limit = self.cfl * self.grid.dx() / max_speed;
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(Error::CflViolation { dt, limit });
        }
        // interface k sits between cells k − 1 and k
        let fluxes: Vec<Result<[f64; 2]>> = map_indexed(self.mode, n + 1, |k| {
            let l = self.neighbor(k as isize - 1);
            let r = self.neighbor(k as isize);
            let s = data[l].speed.max(data[r].speed);
            rusanov(data[l].flux, data[r].flux, &field[l], &field[r], s)
        });
        let fluxes: Vec<[f64; 2]> = fluxes.into_iter().collect::<Result<_>>()?;
        let ratio = dt / self.grid.dx();
        let next: Field = map_indexed(self.mode, n, |i| {
            let w = field[i];
            State::new(
                w.rho - ratio * (fluxes[i + 1][0] - fluxes[i][0]),
                w.j - ratio * (fluxes[i + 1][1] - fluxes[i][1]),
            )
        });
        self.check_field(&next, t + dt)?;
        Ok(next)
    }

    /// `Σ η·dx`.
    pub fn total_entropy(&self, field: &Field) -> Result<f64> {
        let data = self.cell_data(field, f64::NAN)?;
        Ok(neumaier_sum(data.iter().map(|d| d.eta)) * self.grid.dx())
    }

    /// Discrete entropy production of one step.
    pub fn entropy_budget(&self, before: &Field, after: &Field, dt: f64) -> Result<f64> {
        entropy_budget(&self.sys, before, after, dt, self.grid.dx(), self.boundary)
    }
}

/// `D = [Ση(after) − Ση(before)]·dx/dt + (uη)(last) − (uη)(first)`, the
/// boundary terms evaluated on `before` and dropped for periodic boundaries.
pub fn entropy_budget(
    sys: &CovariantSystem,
    before: &Field,
    after: &Field,
    dt: f64,
    dx: f64,
    boundary: Boundary,
) -> Result<f64> {
    let eta = |f: &Field| -> Result<Vec<f64>> { f.iter().map(|w| sys.entropy(w)).collect() };
    let eb = eta(before)?;
    let ea = eta(after)?;
    let change = neumaier_sum(ea.iter().zip(&eb).map(|(a, b)| a - b)) * dx / dt;
    let boundary_flux = match boundary {
        Boundary::Periodic => 0.0,
        Boundary::Outflow => {
            let zeta = |w: &State| -> Result<f64> {
                let e = sys.evaluate(w)?;
                Ok(e.eta * e.u)
            };
            zeta(&before[before.len() - 1])? - zeta(&before[0])?
        }
    };
    Ok(change + boundary_flux)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellRecord {
    pub x: f64,
    pub rho: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub eta: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetRow {
    pub step: usize,
    pub t: f64,
    pub total_entropy: f64,
    /// `None` for the initial row.
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: Grid1D,
    pub snapshots: Vec<Snapshot>,
    pub budget: Vec<BudgetRow>,
    pub steps: usize,
    pub t: f64,
    pub field: Field,
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl TimeSeries {
    pub fn snapshot_csv(s: &Snapshot) -> String {
        let mut out = String::from("t,x,rho,J,eta,u\n");
        for c in &s.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt17(s.t),
                fmt17(c.x),
                fmt17(c.rho),
                fmt17(c.j),
                fmt17(c.eta),
                fmt17(c.u)
            );
        }
        out
    }

    pub fn snapshot_file_name(index: usize) -> String {
        format!("snapshot_{index:05}.csv")
    }

    pub fn series_csv(&self) -> String {
        let mut out = String::from("index,step,t,file\n");
        for (i, s) in self.snapshots.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i, s.step, fmt17(s.t), Self::snapshot_file_name(i));
        }
        out
    }

    pub fn budget_csv(&self) -> String {
        let mut out = String::from("t,total_entropy,D\n");
        for r in &self.budget {
            let d = r.d.map(fmt17).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", fmt17(r.t), fmt17(r.total_entropy), d);
        }
        out
    }

    /// Write every snapshot, `series.csv` and `entropy_budget.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (i, s) in self.snapshots.iter().enumerate() {
            fs::write(dir.join(Self::snapshot_file_name(i)), Self::snapshot_csv(s))?;
        }
        fs::write(dir.join("series.csv"), self.series_csv())?;
        fs::write(dir.join("entropy_budget.csv"), self.budget_csv())?;
        Ok(())
    }
}

/// Outcome of a run; `error` is set when the run stopped early, in which case
/// `series` holds everything up to the last accepted step.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: TimeSeries,
    pub error: Option<Error>,
}

fn snapshot(
    sys: &CovariantSystem,
    grid: &Grid1D,
    field: &Field,
    step: usize,
    t: f64,
    mode: ExecMode,
) -> Result<Snapshot> {
    let cells = map_indexed(mode, field.len(), |i| {
        let w = field[i];
        sys.evaluate(&w).map(|e| CellRecord {
            x: grid.center(i),
            rho: w.rho,
            j: w.j,
            eta: e.eta,
            u: e.u,
        })
    });
    Ok(Snapshot {
        step,
        t,
        cells: cells.into_iter().collect::<Result<_>>()?,
    })
}

/// Run a configured simulation, keeping partial output on failure.
pub fn run_recorded(config: &SimConfig, mode: ExecMode) -> Result<RunOutcome> {
    config.validate()?;
    let sys = config.build_system()?;
    let solver = Solver::new(sys, config.grid, config.boundary, config.cfl).with_mode(mode);
    let mut field = config.initial.sample(&config.grid);
    solver.check_field(&field, 0.0).map_err(|e| match e {
        Error::StateLeftDomain { cell, reason, .. } => {
            Error::Config(format!("initial state in cell {cell} is invalid: {reason}"))
        }
        other => other,
    })?;

    let dx = config.grid.dx();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut series = TimeSeries {
        grid: config.grid,
        snapshots: vec![snapshot(&solver.sys, &config.grid, &field, 0, 0.0, mode)?],
        budget: vec![BudgetRow {
            step: 0,
            t: 0.0,
            total_entropy: solver.total_entropy(&field)?,
            d: None,
        }],
        steps: 0,
        t: 0.0,
        field: field.clone(),
    };

    let mut data = solver.cell_data(&field, 0.0)?;
    let mut error = None;
    while t < config.t_end {
        let attempt = (|| -> Result<(Field, Vec<CellData>, f64)> {
            let max_speed = data.iter().fold(0.0, |m: f64, d| m.max(d.speed));
            let dt = (config.cfl * dx / max_speed).min(config.t_end - t);
            let next = solver.advance(&field, &data, dt, t)?;
            let next_data = solver.cell_data(&next, t + dt)?;
            Ok((next, next_data, dt))
        })();
        let (next, next_data, dt) = match attempt {
            Ok(v) => v,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let change = neumaier_sum(next_data.iter().zip(&data).map(|(a, b)| a.eta - b.eta)) * dx / dt;
        let boundary = match config.boundary {
            Boundary::Periodic => 0.0,
            Boundary::Outflow => {
                let (first, last) = (&data[0], &data[data.len() - 1]);
                last.eta * last.u - first.eta * first.u
            }
        };
        let total = neumaier_sum(next_data.iter().map(|d| d.eta)) * dx;
        field = next;
        data = next_data;
        steps += 1;
        t = if config.t_end - t <= dt { config.t_end } else { t + dt };
        series.budget.push(BudgetRow {
            step: steps,
            t,
            total_entropy: total,
            d: Some(change + boundary),
        });
        if t >= config.t_end || (config.snapshot_every > 0 && steps.is_multiple_of(config.snapshot_every)) {
            series
                .snapshots
                .push(snapshot(&solver.sys, &config.grid, &field, steps, t, mode)?);
        }
    }
    series.steps = steps;
    series.t = t;
    series.field = field;
    Ok(RunOutcome { series, error })
}

/// Run a configured simulation.
pub fn run(config: &SimConfig) -> Result<TimeSeries> {
    let out = run_recorded(config, ExecMode::default())?;
    match out.error {
        Some(e) => Err(e),
        None => Ok(out.series),
    }
}
