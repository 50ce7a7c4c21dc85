use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use selfsim::limit::estimate_omega;
use selfsim::report::{emit_report, run_scenario, Format, RunOptions, ScenarioReport};
use selfsim::scenario::{builtin, parse_document, Pipeline, Scenario, BUILTIN_NAMES};
use selfsim::Error;

#[derive(Parser)]
#[command(name = "selfsim", version, about = "Self-similar resummation of truncated asymptotic series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario (or a scenario document given by path).
    Run {
        scenario: String,
        /// Comma-separated pipelines, e.g. `power_restriction,transformation`.
        #[arg(long, value_delimiter = ',', value_parser = parse_pipeline)]
        pipelines: Option<Vec<Pipeline>>,
        /// Order range `a..b` (inclusive).
        #[arg(long, value_parser = parse_orders)]
        orders: Option<RangeInclusive<usize>>,
        #[arg(long, default_value = "table-text", value_parser = parse_format)]
        format: Format,
    },
    /// Estimate `f(∞)` for a series document with both limit pipelines.
    Extrapolate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_orders)]
        orders: Option<RangeInclusive<usize>>,
        #[arg(long, default_value = "table-text", value_parser = parse_format)]
        format: Format,
    },
    /// Estimate the approach exponent ω of a series document.
    Omega {
        #[arg(long)]
        input: PathBuf,
        /// Largest even order of the β-approximants (default: the series order).
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// The string benchmark with both limit pipelines, k = 3..15.
    Table1 {
        #[arg(long, default_value = "table-text", value_parser = parse_format)]
        format: Format,
    },
}

fn parse_pipeline(s: &str) -> Result<Pipeline, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_orders(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected a range like 3..15, got {s:?}");
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn read_document(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(Failure::from)
}

enum Failure {
    Schema(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { .. } => Failure::Schema(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn print_report(report: &ScenarioReport, format: Format) -> Result<ExitCode, Failure> {
    print!("{}", emit_report(report, format)?);
    for note in &report.notes {
        if note.contains("normalized") {
            eprintln!("notice: {note}");
        }
    }
    Ok(if report.all_unavailable() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn execute(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Run {
            scenario,
            pipelines,
            orders,
            format,
        } => {
            let scenario = if BUILTIN_NAMES.contains(&scenario.as_str()) {
                builtin(&scenario)?
            } else if Path::new(&scenario).is_file() {
                read_document(Path::new(&scenario))?
            } else {
                return Err(Failure::Other(format!(
                    "unknown scenario {scenario:?}; built-ins are {}",
                    BUILTIN_NAMES.join(", ")
                )));
            };
            let report = run_scenario(&scenario, &RunOptions { pipelines, orders });
            print_report(&report, format)
        }
        Command::Extrapolate { input, orders, format } => {
            let scenario = read_document(&input)?;
            let pipelines = vec![Pipeline::PowerRestriction, Pipeline::Transformation];
            let orders = orders.or(Some(1..=scenario.series.order().max(1)));
            let report = run_scenario(
                &scenario,
                &RunOptions {
                    pipelines: Some(pipelines),
                    orders,
                },
            );
            print_report(&report, format)
        }
        Command::Omega { input, max_order } => {
            let scenario = read_document(&input)?;
            let max = max_order.unwrap_or(scenario.series.order());
            let estimate = match estimate_omega(&scenario.series, max) {
                Err(Error::OmegaUnavailable) => {
                    eprintln!("error: {}", Error::OmegaUnavailable);
                    return Ok(ExitCode::from(2));
                }
                other => other?,
            };
            println!("k,omega,status");
            for (k, c) in &estimate.per_order {
                match (&c.omega, &c.raw) {
                    (Some(w), _) => println!("{k},{:.6},ok", w.to_f64()),
                    (None, Some(raw)) => println!("{k},{:.6},rejected", raw.to_f64()),
                    (None, None) => println!("{k},,unavailable"),
                }
            }
            println!("selected,{:.6},order {}", estimate.selected.to_f64(), estimate.selected_order);
            Ok(ExitCode::SUCCESS)
        }
        Command::Table1 { format } => {
            let scenario = builtin("string")?;
            let options = RunOptions {
                pipelines: Some(vec![Pipeline::PowerRestriction, Pipeline::Transformation]),
                orders: Some(3..=15),
            };
            print_report(&run_scenario(&scenario, &options), format)
        }
    }
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for "nothing computable", so usage errors use 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Schema(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
        Err(Failure::Other(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
