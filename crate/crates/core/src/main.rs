use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kerrfock::job::{parse_jobspec_with, run_job, JobOverrides, Mode};
use kerrfock::Error;

/// Compile a Fock-state superposition into a Kerr-resolved pulse ladder
/// and simulate it.
#[derive(Debug, Parser)]
#[command(name = "kerrfock", version)]
struct Args {
    /// Job document (JSON). Reads standard input when omitted or `-`.
    input: Option<PathBuf>,

    /// compile, rwa, full, lindblad or sweep
    #[arg(long)]
    mode: Option<String>,

    /// Extra Fock levels above the target's highest index.
    #[arg(long)]
    guard: Option<usize>,

    /// Rescale the coefficients to unit norm instead of rejecting them.
    #[arg(long)]
    renormalize: bool,

    /// Directory for report.json (and sweep.csv). Prints the report when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Comma-separated g/chi values for sweep mode.
    #[arg(long, value_delimiter = ',')]
    sweep_ratios: Option<Vec<f64>>,

    /// Photon loss rate kappa/chi for lindblad mode.
    #[arg(long)]
    kappa: Option<f64>,
}

fn run(args: Args) -> Result<(), Error> {
    let text = match args.input.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)?,
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let overrides = JobOverrides {
        mode: args.mode.as_deref().map(str::parse::<Mode>).transpose()?,
        guard: args.guard,
        renormalize: args.renormalize,
        sweep_ratios: args.sweep_ratios,
        kappa_over_chi: args.kappa,
    };
    let spec = parse_jobspec_with(&text, &overrides)?;
    let output = run_job(&spec)?;
    match args.out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("report.json"), &output.report)?;
            if let Some(csv) = &output.sweep_csv {
                std::fs::write(dir.join("sweep.csv"), csv)?;
            }
        }
        None => print!("{}", output.report),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kerrfock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
