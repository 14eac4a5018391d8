use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use staticgeo_cli::config::Resolver;
use staticgeo_cli::{dump, exit, run_suite, suites, CliError, VerifyOptions};

#[derive(Parser)]
#[command(name = "staticgeo", version, about = "Checks for static potentials on asymptotically flat 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write its report.
    Verify {
        suite: String,
        /// TOML parameter file; every key is optional.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for report.json, timing.json and CSV tables.
        #[arg(long)]
        out: PathBuf,
        /// Run the suite's checks in parallel.
        #[arg(long)]
        parallel: bool,
        /// Seed for random sample points (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the registered suites.
    ListSuites,
    /// Print curvature data at the points in a file as JSON.
    DumpCurvature {
        /// e.g. `schwarzschild(2)` or `anisotropic(1, 0.5)`.
        #[arg(long)]
        metric: String,
        /// One point per line, three numbers separated by commas or spaces.
        #[arg(long)]
        points: PathBuf,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("staticgeo: {e}");
    code(exit::CONFIG)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { exit::CONFIG } else { exit::PASS });
        }
    };
    match cli.command {
        Command::ListSuites => {
            for s in suites::SUITES {
                println!("{:<24}{}", s.name, s.summary);
            }
            code(exit::PASS)
        }
        Command::DumpCurvature { metric, points } => match dump::dump_curvature(&metric, &points) {
            Ok(rows) => {
                println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialise"));
                code(exit::PASS)
            }
            Err(e) => fail(e),
        },
        Command::Verify {
            suite,
            config,
            out,
            parallel,
            seed,
        } => {
            let resolver = match config.as_deref().map(Resolver::from_path).unwrap_or_else(|| Ok(Resolver::empty())) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            match run_suite(&suite, &resolver, &out, &VerifyOptions { parallel, seed }) {
                Ok(report) => {
                    for c in &report.checks {
                        let tag = if c.pass { "PASS" } else { "FAIL" };
                        let computed = c.computed.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
                        print!(
                            "[{tag}] {}: computed {computed}, expected {:e} ({:?}, tol {:e})",
                            c.name, c.expected, c.norm, c.tolerance
                        );
                        match &c.message {
                            Some(m) => println!(" - {m}"),
                            None => println!(),
                        }
                    }
                    println!(
                        "{}: {}/{} checks pass; report in {}",
                        report.suite,
                        report.checks.iter().filter(|c| c.pass).count(),
                        report.checks.len(),
                        out.join("report.json").display()
                    );
                    code(if report.passed { exit::PASS } else { exit::FAIL })
                }
                Err(e) => fail(e),
            }
        }
    }
}
