mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicke::experiment::{run, scaling_study, RunConfig};
use dicke::ramancalc;
use dicke::CouplingScheme;
use serde::Serialize;

use config::{parse_initial, parse_n_list, parse_outputs, parse_scheme, FileConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(dicke::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<dicke::Error> for CliError {
    fn from(e: dicke::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "dicke", version, about = "Collective-spin dynamics in the Dicke basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of edge populations, GHZ fidelity and squeezing.
    Run(RunArgs),
    /// Minimum variance and its time across atom numbers, with power-law fits.
    Scaling(ScalingArgs),
    /// Molecular versus atomic Raman feasibility report.
    Raman(RamanArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML recipe; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// molmer-sorensen, one-axis-twisting or two-axis-raman.
    #[arg(long)]
    scheme: Option<String>,
    /// Coupling Ω_R in the chosen time units.
    #[arg(long)]
    rabi: Option<f64>,
    /// all_up, all_down or coherent(theta,phi).
    #[arg(long)]
    initial: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    n_atoms: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    /// Comma-separated subset of edge_populations, ghz_fidelity, squeezing, moments.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated ascending even atom numbers.
    #[arg(long)]
    n_list: Option<String>,
}

#[derive(Args)]
struct RamanArgs {
    /// TOML file with a [raman] section; sodium defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write raman.json here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| {
        CliError::Config(format!(
            "missing '{name}' (set it in the config or pass --{})",
            name.replace('_', "-")
        ))
    })
}

fn build_run_config(args: &RunArgs, file: &FileConfig) -> Result<RunConfig, CliError> {
    let c = &args.common;
    let scheme = parse_scheme(&required(c.scheme.clone().or(file.scheme.kind.clone()), "scheme")?)?;
    let n_atoms = required(args.n_atoms.or(file.system.n_atoms), "n_atoms")?;
    let t_max = required(args.t_max.or(file.grid.t_max), "t_max")?;
    let n_points = required(args.n_points.or(file.grid.n_points), "n_points")?;
    let mut rc = RunConfig::new(scheme, n_atoms, t_max, n_points);
    if let Some(r) = c.rabi.or(file.scheme.rabi) {
        rc.rabi = r;
    }
    if let Some(s) = c.initial.as_deref().or(file.system.initial.as_deref()) {
        rc.initial = Some(parse_initial(s)?);
    }
    if let Some(list) = args.outputs.as_ref().or(file.output.outputs.as_ref()) {
        rc.outputs = parse_outputs(list)?;
    }
    rc.seed = args.seed.or(file.output.seed).unwrap_or(0);
    rc.validate()?;
    Ok(rc)
}

fn out_dir(cli: Option<&PathBuf>, file: &FileConfig) -> PathBuf {
    cli.cloned().or_else(|| file.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let file = FileConfig::load_opt(args.common.config.as_deref())?;
    let rc = build_run_config(&args, &file)?;
    let dir = out_dir(args.common.out.as_ref(), &file);
    let output = run(&rc)?;
    fs::create_dir_all(&dir)?;
    let mut csv = BufWriter::new(fs::File::create(dir.join("series.csv"))?);
    output.write_csv(&mut csv)?;
    csv.flush()?;
    write_json(&dir.join("summary.json"), &output.summary)?;
    let s = &output.summary;
    eprintln!(
        "{} N={} points={} -> {} ({:.2}s)",
        s.scheme,
        s.n_atoms,
        output.rows.len(),
        dir.display(),
        s.runtime
    );
    Ok(())
}

fn cmd_scaling(args: ScalingArgs) -> Result<(), CliError> {
    let file = FileConfig::load_opt(args.common.config.as_deref())?;
    let c = &args.common;
    let kind = parse_scheme(&required(c.scheme.clone().or(file.scheme.kind.clone()), "scheme")?)?;
    let rabi = c.rabi.or(file.scheme.rabi).unwrap_or(1.0);
    let scheme = CouplingScheme::new(kind, rabi)?;
    let n_list = match &args.n_list {
        Some(s) => parse_n_list(s)?,
        None => file.scaling.n_list.clone().unwrap_or_else(|| vec![128, 256, 512, 1024, 2048]),
    };
    let initial = c.initial.as_deref().or(file.system.initial.as_deref()).map(parse_initial).transpose()?;
    let report = scaling_study(&scheme, &n_list, initial)?;
    let dir = out_dir(c.out.as_ref(), &file);
    fs::create_dir_all(&dir)?;
    write_json(&dir.join("scaling.json"), &report)?;
    eprintln!(
        "{kind}: variance exponent {:.4} ± {:.4}, t_min exponent {:.4} ± {:.4} -> {}",
        report.variance_fit.exponent,
        report.variance_fit.exponent_stderr,
        report.t_min_xi2_fit.exponent,
        report.t_min_xi2_fit.exponent_stderr,
        dir.display()
    );
    Ok(())
}

fn cmd_raman(args: RamanArgs) -> Result<(), CliError> {
    let file = FileConfig::load_opt(args.config.as_deref())?;
    let params = file.raman.unwrap_or_else(ramancalc::RamanParams::sodium);
    let report = ramancalc::report(&params)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match args.out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            write_json(&dir.join("raman.json"), &report)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Raman(a) => cmd_raman(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
