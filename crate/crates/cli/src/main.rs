use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use covhyp::catalog::{self, SystemKind, SystemParams};
use covhyp::construction::eigenvalues;
use covhyp::parallel::ExecMode;
use covhyp::solver::{self, SimConfig};
use covhyp::verify;
use covhyp::{Error, State};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LEFT_DOMAIN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "covhyp",
    version,
    about = "Group-covariant hyperbolic 2x2 systems: inspect, verify, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every derived quantity at one state.
    Inspect(InspectArgs),
    /// Run the identity checks on random admissible states.
    Verify(VerifyArgs),
    /// Run a finite-volume simulation and write CSV output.
    Simulate(SimulateArgs),
    /// Catalog queries.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List the catalog systems and their validity domains.
    List {
        #[command(flatten)]
        params: ParamArgs,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    rho_star: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_bar: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl From<ParamArgs> for SystemParams {
    fn from(p: ParamArgs) -> Self {
        SystemParams {
            rho_star: p.rho_star,
            sigma_bar: p.sigma_bar,
            a: p.a,
            c: p.c,
        }
    }
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    system: SystemKind,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long = "J", allow_hyphen_values = true)]
    j: f64,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    system: SystemKind,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format printed to stdout.
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
    /// Scale the first flux component by 1.01.
    #[arg(long)]
    inject_flux_fault: bool,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    system: Option<SystemKind>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    n_cells: Option<usize>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    /// `outflow` or `periodic`.
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    rho_star: Option<f64>,
    #[arg(long)]
    sigma_bar: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn mode(sequential: bool) -> ExecMode {
    if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

/// Write to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn inspect(args: InspectArgs) -> ExitCode {
    let sys = match catalog::build(args.system, args.params.into()) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let w = State::new(args.rho, args.j);
    let record = (|| -> covhyp::Result<Vec<(&'static str, f64)>> {
        let e = sys.evaluate(&w)?;
        let (l1, l2) = eigenvalues(&sys.flux_jacobian(&w)?)?;
        let delta = sys.jacobian_delta(&e.fiber)?;
        let conv = sys.convexity_diagnostics(&e.fiber)?;
        Ok(vec![
            ("rho", w.rho),
            ("J", w.j),
            ("theta", e.fiber.theta),
            ("rho0", e.fiber.rho0),
            ("u", e.u),
            ("eta", e.eta),
            ("eta_star", e.eta_star),
            ("alpha", e.phi.alpha),
            ("beta", e.phi.beta),
            ("p0", e.p0),
            ("f1", e.flux[0]),
            ("f2", e.flux[1]),
            ("g1", e.thermo_flux[0]),
            ("g2", e.thermo_flux[1]),
            ("lambda1", l1),
            ("lambda2", l2),
            ("delta", delta),
            ("det_hessian", conv.det_hessian),
            ("d2eta_drho2", conv.d2eta_drho2),
        ])
    })();
    match record {
        Ok(fields) => {
            let mut text = format!("system={}\n", sys.name);
            for (k, v) in fields {
                let _ = writeln!(text, "{k}={}", fmt(v));
            }
            emit(&text);
            ExitCode::SUCCESS
        }
        Err(e @ (Error::OutsideValidity { .. } | Error::Domain { .. })) => fail(EXIT_USAGE, e),
        Err(e) => fail(EXIT_FAIL, e),
    }
}

fn verify_cmd(args: VerifyArgs) -> ExitCode {
    let sys = match catalog::build(args.system, args.params.into()) {
        Ok(s) if args.inject_flux_fault => s.with_flux_fault(1.01),
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let report = match verify::run_suite_with(&sys, args.seed, args.samples, mode(args.sequential)) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            return fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display()));
        }
    }
    match args.format {
        ReportFormat::Json => emit(&report.to_json()),
        ReportFormat::Table => emit(&report.to_table()),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

/// Config file contents with the flag overrides applied.
fn merged_config(args: &SimulateArgs) -> Result<Value, String> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str::<Value>(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => json!({}),
    };
    let root = doc
        .as_object_mut()
        .ok_or_else(|| "configuration must be a JSON object".to_string())?;
    let mut set = |path: &[&str], v: Value| {
        let mut obj: &mut Map<String, Value> = root;
        for key in &path[..path.len() - 1] {
            let entry = obj.entry(key.to_string()).or_insert_with(|| json!({}));
            if !entry.is_object() {
                *entry = json!({});
            }
            obj = entry.as_object_mut().unwrap();
        }
        obj.insert(path[path.len() - 1].to_string(), v);
    };
    if let Some(s) = args.system {
        set(&["system"], json!(s.name()));
    }
    if let Some(v) = args.cfl {
        set(&["cfl"], json!(v));
    }
    if let Some(v) = args.t_end {
        set(&["t_end"], json!(v));
    }
    if let Some(v) = args.n_cells {
        set(&["grid", "n_cells"], json!(v));
    }
    if let Some(v) = args.x_min {
        set(&["grid", "x_min"], json!(v));
    }
    if let Some(v) = args.x_max {
        set(&["grid", "x_max"], json!(v));
    }
    if let Some(v) = &args.boundary {
        set(&["boundary"], json!(v));
    }
    if let Some(v) = args.snapshot_every {
        set(&["snapshot_every"], json!(v));
    }
    for (key, v) in [
        ("rho_star", args.rho_star),
        ("sigma_bar", args.sigma_bar),
        ("a", args.a),
        ("c", args.c),
    ] {
        if let Some(v) = v {
            set(&["params", key], json!(v));
        }
    }
    Ok(doc)
}

fn simulate(args: SimulateArgs) -> ExitCode {
    let config = match merged_config(&args)
        .and_then(|doc| serde_json::from_value::<SimConfig>(doc).map_err(|e| format!("invalid configuration: {e}")))
    {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let outcome = match solver::run_recorded(&config, mode(args.sequential)) {
        Ok(o) => o,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out)
        .map_err(Error::from)
        .and_then(|_| outcome.series.write_csv(&args.out))
    {
        return fail(EXIT_FAIL, e);
    }
    let s = &outcome.series;
    emit(&format!(
        "steps={} t={} snapshots={} out={}\n",
        s.steps,
        fmt(s.t),
        s.snapshots.len(),
        args.out.display()
    ));
    match outcome.error {
        None => ExitCode::SUCCESS,
        Some(e @ Error::StateLeftDomain { .. }) => fail(EXIT_LEFT_DOMAIN, e),
        Some(e) => fail(EXIT_FAIL, e),
    }
}

fn catalog_list(params: SystemParams, as_json: bool) -> ExitCode {
    let list = match catalog::list(params) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if as_json {
        match serde_json::to_string_pretty(&list) {
            Ok(s) => emit(&format!("{s}\n")),
            Err(e) => return fail(EXIT_FAIL, e),
        }
    } else {
        let mut text = format!("{:<20} {:>4} {:>4}  validity\n", "system", "eps", "eps~");
        for d in list {
            let _ = writeln!(
                text,
                "{:<20} {:>4} {:>4}  {}",
                d.name,
                d.epsilon.value(),
                d.epsilon_tilde.value(),
                d.validity
            );
        }
        emit(&text);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Inspect(a) => inspect(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Catalog {
            command: CatalogCommand::List { params, json },
        } => catalog_list(params.into(), json),
    }
}
