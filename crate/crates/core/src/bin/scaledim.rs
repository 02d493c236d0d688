use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scaledim::analysis::{run_analyze, write_plot_tables, AnalysisConfig, AnalysisReport, DataSource};
use scaledim::io::{cloud_to_csv, CsvOptions};
use scaledim::null::{NullKey, NullProvider, NullStore};
use scaledim::synthetic::{GeneratorSpec, CIRCLE_NOISE_SD};
use scaledim::{Error, NormalizerMode};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, missing argument)
  3  invalid parameter
  4  unreadable or malformed input file
  5  degenerate data (identical points, too few distinct distances)
  6  generator trajectory escaped
  7  null table missing (pre-generate with `nulls` or pass --generate-nulls)
  8  corrupt null cache file
  9  I/O or report serialization failure";

/// Scale-space effective dimension of point clouds.
#[derive(Parser)]
#[command(name = "scaledim", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the effective dimension of a CSV or generated dataset at every scale.
    Analyze(AnalyzeArgs),
    /// Pre-generate and cache null tables.
    Nulls(NullsArgs),
    /// Emit a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Re-emit a stored report as flat plot tables.
    PlotData(PlotDataArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    LineToy,
    Circle,
    SwissRoll,
    Henon,
    Gaussian,
}

#[derive(Args)]
struct GeneratorArgs {
    /// Dataset family.
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Sample size (family default when omitted).
    #[arg(long)]
    n: Option<usize>,
    /// Noise standard deviation (line-toy, swiss-roll, henon).
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Circle ambient dimension, 2 or 6.
    #[arg(long, default_value_t = 2)]
    ambient: usize,
    /// Circle noise standard deviation.
    #[arg(long, default_value_t = CIRCLE_NOISE_SD)]
    noise_sd: f64,
    /// Hénon iterates dropped before sampling.
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    /// Gaussian dimension.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

impl GeneratorArgs {
    fn spec(&self) -> Option<GeneratorSpec> {
        let seed = self.data_seed;
        Some(match self.family? {
            Family::LineToy => GeneratorSpec::LineToy { n: self.n.unwrap_or(100), sigma: self.sigma, seed },
            Family::Circle => GeneratorSpec::Circle {
                n: self.n.unwrap_or(100),
                ambient: self.ambient,
                noise_sd: self.noise_sd,
                seed,
            },
            Family::SwissRoll => GeneratorSpec::SwissRoll { n: self.n.unwrap_or(1000), sigma: self.sigma, seed },
            Family::Henon => GeneratorSpec::Henon {
                n: self.n.unwrap_or(1000),
                burn_in: self.burn_in,
                sigma: self.sigma,
                seed,
            },
            Family::Gaussian => GeneratorSpec::Gaussian { n: self.n.unwrap_or(1000), d: self.d, seed },
        })
    }
}

#[derive(Args)]
struct GridArgs {
    /// Grid step in percent of the pairwise-distance distribution.
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    /// Scale standardization.
    #[arg(long, default_value = "max-pairwise", value_parser = ["max-pairwise", "p95-pairwise"])]
    mode: String,
    /// Significance level of the null bands.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Monte Carlo replicates per null table.
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    /// Seed of the null replicates.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Null table cache directory.
    #[arg(long, env = "SCALEDIM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input CSV (rows are observations).
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    /// CSV delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The CSV has a header row.
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Highest order tested (default min(d-1, n-2, 10)).
    #[arg(long)]
    k_max: Option<usize>,
    /// Bonferroni-correct alpha over labels and orders.
    #[arg(long)]
    bonferroni: bool,
    /// Generate null tables missing from the cache.
    #[arg(long)]
    generate_nulls: bool,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plot tables into this directory.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct NullsArgs {
    /// Orders to generate.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Sample sizes to generate.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// Report written by `analyze`.
    #[arg(long)]
    report: PathBuf,
    /// Directory for the tables.
    #[arg(long)]
    out_dir: PathBuf,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn mode(grid: &GridArgs) -> Result<NormalizerMode, Error> {
    grid.mode.parse()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze(a) => {
            let source = match (&a.input, a.generator.spec()) {
                (Some(path), _) => {
                    if !a.delimiter.is_ascii() {
                        return Err(Error::Parameter("delimiter must be a single ASCII character".into()));
                    }
                    DataSource::Csv {
                        path: path.clone(),
                        options: CsvOptions { delimiter: a.delimiter as u8, header: a.header },
                    }
                }
                (None, Some(spec)) => DataSource::Generator { spec },
                (None, None) => return Err(Error::Parameter("analyze needs --input or --family".into())),
            };
            let mut cfg = AnalysisConfig::new(source);
            cfg.step_percent = a.grid.step;
            cfg.mode = mode(&a.grid)?;
            cfg.alpha = a.grid.alpha;
            cfg.replicates = a.grid.replicates;
            cfg.seed = a.grid.seed;
            cfg.cache_dir = a.grid.cache_dir.clone();
            cfg.k_max = a.k_max;
            cfg.bonferroni = a.bonferroni;
            cfg.generate_nulls = a.generate_nulls;
            let report = run_analyze(&cfg)?;
            emit(a.out.as_ref(), &report.to_json()?)?;
            if let Some(dir) = &a.plot_dir {
                write_plot_tables(&report, dir)?;
            }
        }
        Command::Nulls(a) => {
            let Some(dir) = a.grid.cache_dir.clone() else {
                return Err(Error::Parameter("nulls needs --cache-dir or SCALEDIM_CACHE_DIR".into()));
            };
            let store = NullStore::new(Some(dir), true);
            for &k in &a.k {
                for &n in &a.n {
                    let key = NullKey {
                        k,
                        n,
                        step_percent: a.grid.step,
                        mode: mode(&a.grid)?,
                        replicates: a.grid.replicates,
                        seed: a.grid.seed,
                        alpha: a.grid.alpha,
                    };
                    store.null_table(&key)?;
                    println!("{}", key.file_name());
                }
            }
        }
        Command::Generate(a) => {
            let spec = a
                .generator
                .spec()
                .ok_or_else(|| Error::Parameter("generate needs --family".into()))?;
            emit(a.out.as_ref(), &cloud_to_csv(&spec.generate()?, ','))?;
        }
        Command::PlotData(a) => {
            let report = AnalysisReport::read(&a.report)?;
            for path in write_plot_tables(&report, &a.out_dir)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
