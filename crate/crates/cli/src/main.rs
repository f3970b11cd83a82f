//! `bergman`: moment tables, kernels, curvature sweeps and the verification
//! suite from the command line.
//!
//! Exit codes: 0 success, 1 a check or computation failed, 2 bad
//! configuration or I/O.

mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use bergman::geometry::kernel_curvature_verdict;
use bergman::settings::tolerances;
use bergman::{run_paper_suite, DomainSpec, Error, KernelModel, MomentTable, Settings, TolProfile};
use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;
use output::{csv_string, num, point, read_points, timestamp_line, write_atomic};

#[derive(Debug)]
pub enum CliError {
    /// Configuration or I/O problem (exit 2).
    Config(String),
    /// A computation or check failed (exit 1).
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let mut root = &e;
        while let Error::Stage { source, .. } = root {
            root = source;
        }
        match root {
            Error::Input(_) | Error::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "bergman", version, about = "Bergman kernels, metrics and curvature checks")]
struct Cli {
    /// Omit the timestamp comment so reruns are byte-identical.
    #[arg(long, global = true)]
    reproducible: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment table up to a total degree.
    Moments {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        max_degree: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// log K at the points of a CSV file (re, im per coordinate).
    Kernel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        points_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Holomorphic sectional curvature over seeded interior samples.
    Curvature {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        dirs: usize,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_enum, default_value_t = Profile::Default)]
        tol_profile: Profile,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Default,
    Strict,
}

/// Kernel used for a domain: moment series for the sliver domain, the
/// automatically truncated series for the Hartogs domain, closed forms
/// otherwise.
fn kernel_for(domain: &DomainSpec, settings: &Settings) -> Result<KernelModel, CliError> {
    Ok(match *domain {
        DomainSpec::DAlpha { .. } => {
            let table = MomentTable::build(domain, settings.truncation as u32, settings)?;
            KernelModel::assemble_series(&table, settings.truncation)?
        }
        DomainSpec::HartogsGauss { n } => KernelModel::hartogs_gauss_series(n, None)?,
        _ => KernelModel::closed_form_for(domain)?,
    })
}

fn finish(body: String, reproducible: bool) -> String {
    if reproducible {
        body
    } else {
        timestamp_line() + &body
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let reproducible = cli.reproducible;
    match cli.command {
        Command::Moments { config, max_degree, out } => {
            let cfg = RunConfig::load(&config)?;
            let path = cfg.output_path(out)?;
            let table = MomentTable::build(&cfg.domain, max_degree, &cfg.settings)?;
            write_atomic(&path, &finish(table.to_csv(), reproducible))?;
            println!(
                "moments: {} degree <= {max_degree}: {} indices, {} convergent -> {}",
                cfg.domain,
                table.entries.len(),
                table.convergent().count(),
                path.display()
            );
        }
        Command::Kernel { config, points_file, out } => {
            let cfg = RunConfig::load(&config)?;
            let path = cfg.output_path(out)?;
            let points = read_points(&points_file, cfg.domain.dimension())?;
            let model = kernel_for(&cfg.domain, &cfg.settings)?;
            let mut rows = Vec::with_capacity(points.len());
            for p in &points {
                let v = model.eval(p)?;
                rows.push(vec![point(p), num(v.log_k), num(v.tail_bound)]);
            }
            let body = csv_string(&["point", "logK", "tail_bound"], &rows)?;
            write_atomic(&path, &finish(body, reproducible))?;
            println!("kernel: {} at {} points -> {}", cfg.domain, points.len(), path.display());
        }
        Command::Curvature {
            config,
            points,
            dirs,
            seed,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let path = cfg.output_path(out)?;
            let seed = seed.unwrap_or(cfg.seed);
            let model = kernel_for(&cfg.domain, &cfg.settings)?;
            let pts = cfg.domain.sample_interior(points, seed, 0.1)?;
            let tol = cfg.settings.tol(tolerances::CONSTANCY);
            let report = kernel_curvature_verdict(&model, &pts, dirs, seed, tol, &cfg.settings)?;
            let rows: Vec<Vec<String>> = report
                .points
                .iter()
                .zip(&pts)
                .map(|(r, p)| vec![point(p), num(r.hsc_min), num(r.hsc_max), num(r.spread())])
                .collect();
            let mut body = csv_string(&["point", "hsc_min", "hsc_max", "deviation"], &rows)?;
            let value = report.constant_value.map_or("none".to_string(), num);
            body.push_str(&format!(
                "# constant={} value={value} max_dev={}\n",
                report.is_constant,
                num(report.max_deviation)
            ));
            write_atomic(&path, &finish(body, reproducible))?;
            println!(
                "curvature: {} {points} points x {dirs} directions, constant={} value={value} max_dev={:.3e} -> {}",
                cfg.domain,
                report.is_constant,
                report.max_deviation,
                path.display()
            );
        }
        Command::Verify {
            suite: Suite::Paper,
            tol_profile,
            json,
        } => {
            let settings = Settings {
                tol_profile: match tol_profile {
                    Profile::Default => TolProfile::Default,
                    Profile::Strict => TolProfile::Strict,
                },
                ..Settings::default()
            };
            let report = run_paper_suite(&settings)?;
            print!("{}", report.to_table());
            if let Some(path) = json {
                let mut value = serde_json::to_value(&report).expect("suite report serialises");
                if !reproducible {
                    value["generated"] = serde_json::Value::String(timestamp_line()[2..].trim_end().to_string());
                }
                let text = serde_json::to_string_pretty(&value).expect("json value serialises") + "\n";
                write_atomic(&path, &text)?;
            }
            let failed = report.failures().count();
            println!(
                "verify: {}/{} checks passed",
                report.outcomes.len() - failed,
                report.outcomes.len()
            );
            if failed > 0 {
                let names: Vec<&str> = report.failures().map(|o| o.name.as_str()).collect();
                return Err(CliError::Failed(format!("failed checks: {}", names.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Failed(_) => ExitCode::from(1),
                CliError::Config(_) => ExitCode::from(2),
            }
        }
    }
}
