use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use trigzeros::analysis::compare;
use trigzeros::runner::{
    run_covariance_table, run_experiment, run_weyl_report, write_csv_rows, ExperimentConfig, OutputFormat, RunResult,
};
use trigzeros::sampling::ModelKind;
use trigzeros::{Angle, Error, Result};

#[derive(Parser)]
#[command(name = "trigzeros", version, about = "Zero counts of random trigonometric polynomials versus their limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its result.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the master seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Exact pair covariances against the limit covariance.
    Covariance {
        /// Takes the variances and the center from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        sigma1_sq: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma2_sq: f64,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value = "0*pi")]
        center: String,
        /// Comma-separated `t1:t2` pairs.
        #[arg(long, default_value = "0:2,1:1,0.5:3")]
        pairs: String,
        /// Comma-separated increasing degrees.
        #[arg(long, default_value = "512,1024,2048,10000")]
        n: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Normalized Weyl sums against their limits.
    Weyl {
        #[arg(long, default_value = "1,1/2*pi")]
        centers: String,
        #[arg(long, default_value = "1,1.5")]
        alphas: String,
        #[arg(long, default_value = "1000,100000,1000000")]
        n: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compare the polynomial count distributions of two stored results.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a stored result.
    Show { result: PathBuf },
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| Error::InvalidArgument(format!("bad {what} `{p}`"))))
        .collect()
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_result(result: &RunResult, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        OutputFormat::Json => writeln!(w, "{}", result.to_json_string()?)?,
        OutputFormat::Csv => result.write_csv(&mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn write_rows<T: serde::Serialize>(rows: &[T], format: Format, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(rows)?)?,
        Format::Csv => write_csv_rows(&mut w, rows)?,
    }
    w.flush()?;
    Ok(())
}

fn read_result(path: &Path) -> Result<RunResult> {
    RunResult::from_json_str(&std::fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            workers,
            out,
            format,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.run.master_seed = seed;
            }
            let result = run_experiment(&cfg, workers)?;
            match (format, out) {
                (Some(f), out) => write_result(&result, f.into(), out.as_deref()),
                (None, Some(path)) => {
                    for &f in &cfg.run.outputs {
                        let ext = match f {
                            OutputFormat::Json => "json",
                            OutputFormat::Csv => "csv",
                        };
                        write_result(&result, f, Some(&path.with_extension(ext)))?;
                    }
                    Ok(())
                }
                (None, None) => {
                    let f = cfg.run.outputs.first().copied().unwrap_or(OutputFormat::Json);
                    write_result(&result, f, None)
                }
            }
        }
        Command::Covariance {
            config,
            mut sigma1_sq,
            mut sigma2_sq,
            mut rho,
            center,
            pairs,
            n,
            out,
            format,
        } => {
            let mut center: Angle = center.parse()?;
            if let Some(path) = config {
                let cfg = ExperimentConfig::from_path(&path)?;
                match *cfg.model.kind() {
                    ModelKind::FiniteVariance {
                        sigma1_sq: a,
                        sigma2_sq: b,
                        rho: r,
                        ..
                    } => (sigma1_sq, sigma2_sq, rho) = (a, b, r),
                    _ => return Err(Error::Config("covariance needs a finite-variance model".into())),
                }
                center = cfg.window.center;
            }
            let pairs = pairs
                .split(',')
                .map(|p| {
                    let (a, b) = p
                        .split_once(':')
                        .ok_or_else(|| Error::InvalidArgument(format!("bad pair `{p}`")))?;
                    Ok((list::<f64>(a, "t1")?[0], list::<f64>(b, "t2")?[0]))
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = run_covariance_table(sigma1_sq, sigma2_sq, rho, &center, &pairs, &list(&n, "degree")?)?;
            write_rows(&rows, format, out.as_deref())
        }
        Command::Weyl {
            centers,
            alphas,
            n,
            out,
            format,
        } => {
            let rows = run_weyl_report(&list(&centers, "center")?, &list(&alphas, "alpha")?, &list(&n, "degree")?)?;
            write_rows(&rows, format, out.as_deref())
        }
        Command::Compare { first, second, out } => {
            let (a, b) = (read_result(&first)?, read_result(&second)?);
            let verdict = compare(&a.poly, &b.poly)?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "{}", serde_json::to_string_pretty(&verdict)?)?;
            Ok(())
        }
        Command::Show { result } => {
            let r = read_result(&result)?;
            let mut w = io::stdout().lock();
            writeln!(w, "experiment   {}", r.config.run.experiment_id)?;
            writeln!(w, "model        {}", r.config.model.label())?;
            writeln!(
                w,
                "window       center {} [{}, {}] n = {}",
                r.config.window.center, r.config.window.a, r.config.window.b, r.config.window.n
            )?;
            writeln!(w, "samples      {} of {} ({} discarded)", r.flags.n_samples, r.flags.replicas, r.flags.discarded)?;
            writeln!(w, "mean count   poly {:.5}  limit {:.5}", r.poly.mean(), r.limit.mean())?;
            writeln!(w, "tv           {:.5}", r.verdict.tv)?;
            match (r.verdict.chi2_stat, r.verdict.chi2_pvalue) {
                (Some(s), Some(p)) => writeln!(w, "chi2         {s:.3} (p = {p:.4})")?,
                _ => writeln!(w, "chi2         n/a")?,
            }
            writeln!(w, "k      poly      limit")?;
            let keys: std::collections::BTreeSet<usize> =
                r.poly.histogram().keys().chain(r.limit.histogram().keys()).copied().collect();
            for k in keys {
                writeln!(w, "{k:<5}  {:.6}  {:.6}", r.poly.prob(k), r.limit.prob(k))?;
            }
            writeln!(w, "wall time    {:.2} s", r.timing.wall_seconds)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
