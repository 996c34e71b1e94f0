//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 degenerate
//! equilibrium, 4 failed sensing demand check, 5 I/O error.

pub mod config;
pub mod plot;
pub mod table;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::model::{self, ModelParams};
use crate::solver::{self, Equilibrium};
use crate::statics;

pub use config::{ConfigError, DemandGrid, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("degenerate equilibrium: {0}")]
    Degenerate(String),
    #[error("sensing demand check failed: {0}")]
    Invalid(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "isac-market",
    version,
    about = "Monopoly equilibrium of a joint sensing and communication market"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one equilibrium and print it.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also run the brute-force grid oracle and report the discrepancy.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Sweep one parameter, write a CSV and print the direction table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Override the number of grid points.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Tabulate both inverse demand curves into demand_p1.csv and demand_p2.csv.
    Demand {
        #[command(flatten)]
        common: Common,
        /// Override the number of points on both grids.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Render SVG line charts from a sweep or demand CSV.
    Plot {
        csv: PathBuf,
        /// Column to plot; repeatable. Defaults to every column but the x axis.
        #[arg(long = "column")]
        columns: Vec<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve {
            common,
            verify,
            format,
        } => cmd_solve(&common, verify, format),
        Command::Sweep {
            common,
            steps,
            format,
        } => {
            require_csv(format)?;
            cmd_sweep(&common, steps)
        }
        Command::Demand {
            common,
            steps,
            format,
        } => {
            require_csv(format)?;
            cmd_demand(&common, steps)
        }
        Command::Plot { csv, columns, out } => cmd_plot(&csv, &columns, out.as_deref()),
    }
}

fn require_csv(format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => Ok(()),
        Format::Text => Err(CliError::Config("this command only writes csv".into())),
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            Ok(ScenarioConfig::parse(&text)?)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn equilibrium_report(params: &ModelParams, eq: &Equilibrium) -> String {
    let mut s = String::new();
    for p in model::Parameter::ALL {
        let _ = writeln!(s, "{} = {}", p.name(), table::format_f64(params.get(p)));
    }
    let rows: [(&str, f64); 14] = [
        ("P_r", eq.p_r),
        ("P_c", eq.p_c),
        ("W_c", eq.w_c),
        ("R_c", eq.r_c),
        ("p1", eq.p1),
        ("p2", eq.p2),
        ("theta", eq.theta),
        ("eta", eq.eta),
        ("profit_r", eq.profit_r),
        ("profit_c", eq.profit_c),
        ("profit", eq.profit),
        ("foc_residual_P_r", eq.foc_residuals[0]),
        ("foc_residual_P_c", eq.foc_residuals[1]),
        ("foc_residual_W_c", eq.foc_residuals[2]),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k} = {}", table::format_f64(v));
    }
    let _ = writeln!(s, "sensing_boundary = {}", eq.sensing_status.boundary);
    let _ = writeln!(s, "sensing_degenerate = {}", eq.sensing_status.degenerate);
    let _ = writeln!(s, "comm_boundary = {}", eq.comm_status.boundary);
    let _ = writeln!(s, "comm_degenerate = {}", eq.comm_status.degenerate);
    let _ = writeln!(s, "sensing_demand_valid = {}", eq.sensing_demand_valid);
    s
}

fn equilibrium_csv(eq: &Equilibrium) -> Result<Vec<u8>, CliError> {
    let header = &table::SWEEP_HEADER[2..];
    let values = [
        eq.p_r,
        eq.p_c,
        eq.w_c,
        eq.r_c,
        eq.p1,
        eq.p2,
        eq.theta,
        eq.eta,
        eq.profit_r,
        eq.profit_c,
        eq.profit,
    ];
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut record: Vec<String> = values.iter().map(|&v| table::format_f64(v)).collect();
    record.push(eq.is_valid().to_string());
    w.write_record(header)
        .and_then(|_| w.write_record(&record))
        .map_err(|e| CliError::Io(e.to_string()))?;
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn verify_report(
    params: &ModelParams,
    cfg: &solver::SolverConfig,
    eq: &Equilibrium,
) -> Result<String, CliError> {
    let oracle =
        solver::brute_force_oracle(params, cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let gap = (eq.profit - oracle.profit).abs();
    let scale = oracle.profit.abs().max(1.0);
    let mut s = String::new();
    let _ = writeln!(s, "oracle_profit = {}", table::format_f64(oracle.profit));
    let _ = writeln!(
        s,
        "oracle_P_r = {}",
        table::format_f64(oracle.allocation.p_r)
    );
    let _ = writeln!(
        s,
        "oracle_P_c = {}",
        table::format_f64(oracle.allocation.p_c)
    );
    let _ = writeln!(
        s,
        "oracle_W_c = {}",
        table::format_f64(oracle.allocation.w_c)
    );
    let _ = writeln!(s, "profit_discrepancy = {}", table::format_f64(gap / scale));
    let _ = writeln!(
        s,
        "oracle_cell_log_width = {} {} {}",
        table::format_f64(oracle.cell_log_width[0]),
        table::format_f64(oracle.cell_log_width[1]),
        table::format_f64(oracle.cell_log_width[2])
    );
    Ok(s)
}

pub fn cmd_solve(common: &Common, verify: bool, format: Format) -> Result<(), CliError> {
    let cfg = load_config(common.config.as_deref())?;
    let eq = solver::solve_equilibrium(&cfg.params, &cfg.solver)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut report = equilibrium_report(&cfg.params, &eq);
    if verify {
        report.push_str(&verify_report(&cfg.params, &cfg.solver, &eq)?);
    }
    print!("{report}");
    if eq.on_boundary() {
        eprintln!("warning: optimum sits on a search bracket edge; consider widening the brackets");
    }
    if let Some(out) = &common.out {
        let bytes = match format {
            Format::Text => report.into_bytes(),
            Format::Csv => equilibrium_csv(&eq)?,
        };
        write_file(out, &bytes)?;
    }
    if eq.is_degenerate() {
        let block = match (eq.sensing_status.degenerate, eq.comm_status.degenerate) {
            (true, true) => "both blocks",
            (true, false) => "sensing block",
            _ => "communication block",
        };
        return Err(CliError::Degenerate(format!(
            "no profitable allocation in the {block}"
        )));
    }
    if !eq.sensing_demand_valid {
        return Err(CliError::Invalid(format!(
            "user prefers the outside option at P_r = {}",
            table::format_f64(eq.p_r)
        )));
    }
    Ok(())
}

pub fn cmd_sweep(common: &Common, steps: Option<usize>) -> Result<(), CliError> {
    let cfg = load_config(common.config.as_deref())?;
    let mut spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("no sweep_parameter in the scenario".into()))?;
    if let Some(n) = steps {
        spec = spec
            .with_steps(n)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let result =
        statics::run_sweep(&spec, &cfg.solver).map_err(|e| CliError::Config(e.to_string()))?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("sweep_{}.csv", spec.parameter().name())));
    let mut buf = Vec::new();
    table::write_sweep(&mut buf, &table::sweep_rows(&result)).map_err(|e| io_err(&out, e))?;
    write_file(&out, &buf)?;

    println!("sweep of {} over {} points", spec.parameter(), spec.steps());
    println!("{}", result.monotonicity);
    for v in &result.validity_violations {
        eprintln!(
            "warning: sensing demand check failed at {} = {}",
            spec.parameter(),
            table::format_f64(*v)
        );
    }
    Ok(())
}

pub fn cmd_demand(common: &Common, steps: Option<usize>) -> Result<(), CliError> {
    let cfg = load_config(common.config.as_deref())?;
    let mut grid = cfg.demand;
    if let Some(n) = steps {
        if n < 2 {
            return Err(CliError::Config(format!(
                "steps must be at least 2, got {n}"
            )));
        }
        grid.p_r_points = n;
        grid.r_c_points = n;
    }
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;

    let model_err = |e: model::ModelError| CliError::Config(e.to_string());
    let p1: Vec<(f64, f64)> = grid
        .p_r_values()
        .into_iter()
        .map(|x| model::inverse_demand_p1(x, &cfg.params).map(|y| (x, y)))
        .collect::<Result<_, _>>()
        .map_err(model_err)?;
    let p2: Vec<(f64, f64)> = grid
        .r_c_values()
        .into_iter()
        .map(|x| model::inverse_demand_p2(x, &cfg.params).map(|y| (x, y)))
        .collect::<Result<_, _>>()
        .map_err(model_err)?;

    for (name, header, rows) in [
        ("demand_p1.csv", ["P_r", "p1"], &p1),
        ("demand_p2.csv", ["R_c", "p2"], &p2),
    ] {
        let path = dir.join(name);
        let mut buf = Vec::new();
        table::write_pairs(&mut buf, header, rows).map_err(|e| io_err(&path, e))?;
        write_file(&path, &buf)?;
        println!("wrote {} ({} rows)", path.display(), rows.len());
    }
    Ok(())
}

/// Columns a chart may be drawn for, and the x axis they share.
pub fn plottable_columns(header: &[String]) -> (usize, Vec<String>) {
    let is_sweep = header.first().map(String::as_str) == Some("param");
    let x = if is_sweep { 1 } else { 0 };
    let cols = header
        .iter()
        .filter(|h| h.as_str() != "param")
        .cloned()
        .collect();
    (x, cols)
}

fn cell_value(s: &str) -> f64 {
    match s {
        "true" => 1.0,
        "false" => 0.0,
        _ => s.parse().unwrap_or(f64::NAN),
    }
}

pub fn cmd_plot(csv_path: &Path, columns: &[String], out: Option<&Path>) -> Result<(), CliError> {
    let file = fs::File::open(csv_path).map_err(|e| io_err(csv_path, e))?;
    let t = table::read_table(file).map_err(|e| io_err(csv_path, e))?;
    let (x_idx, available) = plottable_columns(&t.header);
    let x_name = &t.header[x_idx];
    let requested: Vec<String> = if columns.is_empty() {
        available.iter().filter(|c| *c != x_name).cloned().collect()
    } else {
        columns.to_vec()
    };
    for c in &requested {
        if !available.contains(c) {
            return Err(CliError::Config(format!(
                "no column `{c}`; available columns: {}",
                available.join(", ")
            )));
        }
    }
    // a sweep's x axis is named after the swept parameter
    let x_label = if x_idx == 1 {
        t.rows
            .first()
            .map(|r| r[0].clone())
            .unwrap_or_else(|| x_name.clone())
    } else {
        x_name.clone()
    };
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    for c in &requested {
        let y_idx = t.header.iter().position(|h| h == c).expect("checked above");
        let chart = plot::LineChart {
            x_label: x_label.clone(),
            y_label: c.clone(),
            points: t
                .rows
                .iter()
                .map(|r| (cell_value(&r[x_idx]), cell_value(&r[y_idx])))
                .collect(),
        };
        let path = dir.join(format!("{stem}_{c}.svg"));
        write_file(&path, chart.to_svg().as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
