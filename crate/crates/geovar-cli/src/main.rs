use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harness_cli::{convergence_study, load_preset, run, CliError, RunConfig, PRESETS};

#[derive(Parser)]
#[command(name = "geovar", version, about = "Structure-preserving fluid, MHD and complex-fluid benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Step a preset or config file to t_end.
    Run {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        steps_per_snapshot: Option<usize>,
        /// Little-endian f64 snapshot payloads.
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        t_end: Option<f64>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Refinement study on a doubling ladder of grids.
    Convergence {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        resolutions: Vec<usize>,
        #[arg(long, default_value_t = 7.85)]
        eps_over_h: f64,
        #[arg(long, default_value_t = 0.25)]
        t_compare: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    ListPresets,
    /// Print a preset as a config file.
    DumpConfig {
        #[arg(long)]
        preset: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long)]
    picard_max: Option<usize>,
    #[arg(long)]
    residual_tol: Option<f64>,
    #[arg(long)]
    poisson_tol: Option<f64>,
}

fn load(src: &Source, flags: &SolverFlags) -> Result<RunConfig, CliError> {
    let mut c = match (&src.preset, &src.config) {
        (Some(p), _) => load_preset(p)?,
        (_, Some(path)) => RunConfig::load(path)?,
        _ => unreachable!("clap requires one source"),
    };
    let s = &mut c.solver;
    s.picard_max = flags.picard_max.or(s.picard_max);
    s.residual_tol = flags.residual_tol.or(s.residual_tol);
    s.poisson_tol = flags.poisson_tol.or(s.poisson_tol);
    Ok(c)
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run { src, out, steps_per_snapshot, binary, t_end, solver } => {
            let mut c = load(&src, &solver)?;
            c.run.steps_per_snapshot = steps_per_snapshot.unwrap_or(c.run.steps_per_snapshot);
            c.run.binary |= binary;
            c.run.t_end = t_end.unwrap_or(c.run.t_end);
            c.validate()?;
            let s = run(&c, &out)?;
            eprintln!("{} steps, {} snapshots in {}", s.records.len(), s.snapshots.len(), out.display());
        }
        Cmd::Convergence { src, resolutions, eps_over_h, t_compare, out, solver } => {
            let c = load(&src, &solver)?;
            c.validate()?;
            let t = convergence_study(&c, &resolutions, eps_over_h, t_compare)?;
            t.write(&out)?;
            print!("{}", t.to_csv());
            println!("order u {:.3}  B {:.3}", t.order_u, t.order_b);
        }
        Cmd::ListPresets => PRESETS.iter().for_each(|p| println!("{p}")),
        Cmd::DumpConfig { preset, output } => {
            let text = load_preset(&preset)?.to_toml();
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geovar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
