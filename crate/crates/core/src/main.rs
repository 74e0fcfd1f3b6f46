use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uhwave::commands::{exit_code, run, Command, RunOptions};
use uhwave::scenario::Scenario;

/// Synthesis, asymptotics and verification for `(Delta_t - Delta_x + m^2) u = f`.
#[derive(Parser)]
#[command(name = "uhwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample u at the scenario points; writes synthesize.csv.
    Synthesize(Common),
    /// Amplitudes and remainder fits per ray; writes amplitudes.csv and asymptotics.json.
    Asymptotics(Common),
    /// Density from a given amplitude; writes density.csv and invert.json.
    Invert(Common),
    /// Residual and decay checks; writes verify.json, exit 1 on failure.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file, TOML or JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sequential evaluation in a fixed order.
    #[arg(long)]
    deterministic: bool,
    /// Multiplies every quadrature node count.
    #[arg(long)]
    resolution_scale: Option<f64>,
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("UHWAVE_THREADS") else { return Ok(()) };
    let k: usize = v.trim().parse().map_err(|_| format!("UHWAVE_THREADS must be a positive integer, got {v:?}"))?;
    if k == 0 {
        return Err("UHWAVE_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (cmd, args) = match cli.command {
        Cmd::Synthesize(a) => (Command::Synthesize, a),
        Cmd::Asymptotics(a) => (Command::Asymptotics, a),
        Cmd::Invert(a) => (Command::Invert, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    if let Some(r) = args.resolution_scale {
        if !(r > 0.0 && r.is_finite()) {
            eprintln!("error: --resolution-scale must be positive");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions { out: args.out, deterministic: args.deterministic, resolution_scale: args.resolution_scale };
    let result = Scenario::load(&args.config).and_then(|sc| run(cmd, &sc, &opts));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
