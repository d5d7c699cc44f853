use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use hspace::config::{load_config, Suite};
use hspace::fixtures::FIXTURES;
use hspace::report::{emit_report, Format, RunReport};
use hspace::runner::run_verify;
use hspace::{Error, Result};

const EXIT_SUITE_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SAMPLING: u8 = 3;

#[derive(Parser)]
#[command(name = "hspace", version, about = "Verify projective motions of rigid 6-dimensional h-spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected suites on one config file.
    Verify {
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite", value_enum)]
        suites: Vec<Suite>,
        /// Override the sampler seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of sampled points.
        #[arg(long)]
        points: Option<usize>,
        /// Record wall-clock time in the report (breaks byte determinism).
        #[arg(long)]
        timing: bool,
    },
    /// Shipped fixture configurations.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    /// Print fixture names.
    List,
    /// Verify every fixture and print one PASS/FAIL line each.
    RunAll {
        #[arg(long)]
        points: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SamplingExhausted { .. } => EXIT_SAMPLING,
        _ => EXIT_CONFIG,
    }
}

fn write_output(bytes: &[u8], out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(
    config: PathBuf,
    out: Option<PathBuf>,
    format: Format,
    suites: Vec<Suite>,
    seed: Option<u64>,
    points: Option<usize>,
    timing: bool,
) -> Result<RunReport> {
    let mut cfg = load_config(&config)?;
    if !suites.is_empty() {
        cfg = cfg.with_suites(&suites)?;
    }
    if let Some(s) = seed {
        cfg.sampler.seed = s;
    }
    if let Some(n) = points {
        cfg.sampler.count = n;
    }
    let start = Instant::now();
    let mut report = run_verify(&cfg)?;
    if timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    write_output(&emit_report(&report, format)?, out.as_ref())?;
    Ok(report)
}

fn run_all(points: Option<usize>) -> ExitCode {
    let mut code = 0;
    for f in FIXTURES {
        let result = f.config().and_then(|mut cfg| {
            if let Some(n) = points {
                cfg.sampler.count = n;
            }
            run_verify(&cfg)
        });
        match result {
            Ok(r) => {
                let failed: Vec<&str> = r
                    .suites
                    .iter()
                    .filter(|(_, s)| !s.passed)
                    .map(|(n, _)| n.as_str())
                    .collect();
                if r.passed {
                    println!("PASS {}", f.name);
                } else {
                    println!("FAIL {} ({})", f.name, failed.join(", "));
                    code = code.max(EXIT_SUITE_FAILURE);
                }
            }
            Err(e) => {
                println!("FAIL {} ({e})", f.name);
                code = code.max(exit_code(&e));
            }
        }
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            config,
            out,
            format,
            suites,
            seed,
            points,
            timing,
        } => match verify(config, out, format, suites, seed, points, timing) {
            Ok(r) if r.passed => ExitCode::SUCCESS,
            Ok(_) => ExitCode::from(EXIT_SUITE_FAILURE),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code(&e))
            }
        },
        Command::Fixtures { action } => match action {
            FixtureAction::List => {
                for f in FIXTURES {
                    println!("{}", f.name);
                }
                ExitCode::SUCCESS
            }
            FixtureAction::RunAll { points } => run_all(points),
        },
    }
}
