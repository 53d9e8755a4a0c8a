//! `igac`: information-geometric analysis of complexity from the command line.

mod commands;
mod config;
mod error;
mod output;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use config::{
    load_file, resolve, ChainParams, CurvatureParams, Format, GeodesicParams, Global, IgeParams,
    JacobiParams, MetricParams, ReportParams,
};
use error::CliError;
use output::Sink;

#[derive(Parser)]
#[command(name = "igac", version, about = "Information geometry of complexity: metrics, curvature, geodesic spreading and spin-chain statistics")]
struct Cli {
    /// JSON config file: global keys at top level, one section per command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads for grid evaluations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher–Rao metric of a statistical family, numerically and in closed form.
    Metric(MetricArgs),
    /// Christoffel symbols, Riemann, Ricci and scalar curvature.
    Curvature(CurvatureArgs),
    /// Integrate a geodesic.
    Geodesic(GeodesicArgs),
    /// Jacobi field along a geodesic and its growth exponent.
    Jacobi(JacobiArgs),
    /// Information-geometric entropy and its asymptotic growth.
    Ige(IgeArgs),
    /// Spectrum and level-spacing statistics of the transverse-field chain.
    Chain(ChainArgs),
    /// Combine run summaries into one record.
    Report(ReportArgs),
}

#[derive(Args, Serialize)]
struct MetricArgs {
    #[arg(long)]
    family: Option<String>,
    /// e.g. `lambda=0.5:2:4` or `mu=0:1:3,sigma=1`.
    #[arg(long)]
    grid: Option<String>,
    /// e.g. `mu=0,sigma=1`.
    #[arg(long)]
    point: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Serialize)]
struct CurvatureArgs {
    #[arg(long)]
    manifold: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    point: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    fd_step: Option<f64>,
}

#[derive(Args, Serialize)]
struct GeodesicArgs {
    #[arg(long)]
    manifold: Option<String>,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Args, Serialize)]
struct JacobiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    geodesic: GeodesicArgs,
    #[arg(long, allow_hyphen_values = true)]
    j0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dj0: Option<String>,
    /// Fit window `start:stop` in τ.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Args, Serialize)]
struct IgeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    geodesic: GeodesicArgs,
    #[arg(long)]
    quad_nodes: Option<usize>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    lambda_j: Option<f64>,
}

#[derive(Args, Serialize)]
struct ChainArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    hx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hy: Option<f64>,
    /// `full`, `reflection_even` or `reflection_odd`.
    #[arg(long)]
    sector: Option<String>,
    #[arg(long)]
    poly_degree: Option<usize>,
    #[arg(long)]
    trim: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    max_ks: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    /// Summary JSON files written by earlier runs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<PathBuf>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("arguments serialize")
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(load_file).transpose()?;
    let flags = json!({
        "seed": cli.seed,
        "out": cli.out,
        "format": cli.format,
        "plot": if cli.plot { Some(true) } else { None },
        "jobs": cli.jobs,
    });
    let global: Global = resolve(file.as_ref(), None, &flags)?;
    if global.jobs == 0 {
        return Err(CliError::validation("jobs", "jobs must be at least 1"));
    }
    // Only fails if a pool already exists, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(global.jobs)
        .build_global();

    let f = file.as_ref();
    let (name, params): (&str, Value) = match &cli.command {
        Command::Metric(a) => ("metric", to_value(&resolve::<MetricParams>(f, Some("metric"), &to_value(a))?)),
        Command::Curvature(a) => (
            "curvature",
            to_value(&resolve::<CurvatureParams>(f, Some("curvature"), &to_value(a))?),
        ),
        Command::Geodesic(a) => (
            "geodesic",
            to_value(&resolve::<GeodesicParams>(f, Some("geodesic"), &to_value(a))?),
        ),
        Command::Jacobi(a) => ("jacobi", to_value(&resolve::<JacobiParams>(f, Some("jacobi"), &to_value(a))?)),
        Command::Ige(a) => ("ige", to_value(&resolve::<IgeParams>(f, Some("ige"), &to_value(a))?)),
        Command::Chain(a) => ("chain", to_value(&resolve::<ChainParams>(f, Some("chain"), &to_value(a))?)),
        Command::Report(a) => ("report", to_value(&resolve::<ReportParams>(f, Some("report"), &to_value(a))?)),
    };

    // Validate report inputs before anything is written.
    let report = if name == "report" {
        let p: ReportParams = serde_json::from_value(params.clone()).map_err(|e| CliError::internal(e.to_string()))?;
        Some(report::build(&p.inputs)?)
    } else {
        None
    };

    let mut sink = Sink::create(&global.out, global.format)?;
    sink.json(
        "run_config.json",
        &json!({
            "command": name,
            "version": env!("CARGO_PKG_VERSION"),
            "global": global,
            "params": params,
        }),
    )?;

    let typed = |e: serde_json::Error| CliError::internal(e.to_string());
    let summary = match name {
        "metric" => commands::metric(&serde_json::from_value(params).map_err(typed)?, &mut sink)?,
        "curvature" => commands::curvature_cmd(&serde_json::from_value(params).map_err(typed)?, &global, &mut sink)?,
        "geodesic" => commands::geodesic(&serde_json::from_value(params).map_err(typed)?, &global, &mut sink)?,
        "jacobi" => commands::jacobi(&serde_json::from_value(params).map_err(typed)?, &global, &mut sink)?,
        "ige" => commands::ige(&serde_json::from_value(params).map_err(typed)?, &global, &mut sink)?,
        "chain" => commands::chain(&serde_json::from_value(params).map_err(typed)?, &global, &mut sink)?,
        _ => {
            let r = report.expect("report built above");
            sink.json("report.json", &r)?;
            r
        }
    };
    let files: Vec<String> = sink.written().iter().map(|p| p.display().to_string()).collect();
    let line = json!({ "command": name, "out": global.out, "files": files, "summary": summary });
    println!("{line}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
