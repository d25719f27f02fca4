use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use periodlab::analysis::{analyze, AnalysisReport, AnalyzeConfig, AnalyzeError};
use periodlab::criterion::Thresholds;
use periodlab::domain::{
    gen_annulus, gen_dyadic, gen_inverse, gen_orbit, invert_domain, seeded_corpus,
    transform_domain, validate,
};
use periodlab::{DomainSpec, MobiusMap, Point};

mod svg;
mod sweep;

#[derive(Debug, Parser)]
#[command(
    name = "periodlab",
    version,
    about = "Period kernels, capacities and interpolation criteria on disk domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an example domain as JSON
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(short, long, global = true)]
        out: Option<PathBuf>,
    },
    /// Solve, evaluate the criterion and check every bound
    Analyze {
        domain: PathBuf,
        #[command(flatten)]
        opts: AnalyzeOpts,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Apply a disk automorphism or the inversion z -> 1/(2z)
    Transform {
        domain: PathBuf,
        #[command(subcommand)]
        map: MapKind,
        #[arg(short, long, global = true)]
        out: Option<PathBuf>,
    },
    /// One CSV row of constants per parameter value
    Sweep {
        #[arg(value_enum)]
        family: sweep::Family,
        /// Comma-separated parameter values; each family has a default list
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        #[command(flatten)]
        opts: AnalyzeOpts,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GenKind {
    Annulus {
        #[arg(long)]
        r: f64,
    },
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        m: usize,
    },
    Inverse {
        #[arg(long)]
        delta: f64,
    },
    Dyadic {
        #[arg(long)]
        n: u32,
    },
    /// Random disk domain drawn from the seeded corpus
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
}

#[derive(Debug, Subcommand)]
enum MapKind {
    Mobius {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
    },
    Invert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
struct AnalyzeOpts {
    #[arg(long = "grid", default_value_t = 512)]
    grid: usize,
    #[arg(long = "S", default_value_t = 2.0)]
    big_s: f64,
    #[arg(long = "s", default_value_t = 0.5)]
    small_s: f64,
    #[arg(long, default_value_t = 0.05)]
    eps_min: f64,
    #[arg(long, default_value_t = 5.0)]
    diamh_max: f64,
    /// Defaults to 3 N + 3 with N the ULF constant
    #[arg(long)]
    dist_max: Option<usize>,
}

impl AnalyzeOpts {
    fn config(&self) -> Result<AnalyzeConfig, Failure> {
        if !self.grid.is_power_of_two() || !(128..=4096).contains(&self.grid) {
            return Err(Failure::input(format!(
                "--grid must be a power of two in [128, 4096], got {}",
                self.grid
            )));
        }
        Ok(AnalyzeConfig {
            grid_n: self.grid,
            big_s: self.big_s,
            small_s: self.small_s,
            thresholds: Thresholds {
                eps_min: self.eps_min,
                diamh_max: self.diamh_max,
                dist_max: self.dist_max,
            },
        })
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    const BOUND: u8 = 1;
    const INPUT: u8 = 2;
    const SOLVER: u8 = 3;

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: Self::INPUT,
            message: message.into(),
        }
    }
}

fn read_domain(path: &Path) -> Result<DomainSpec, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let d = DomainSpec::from_json(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let report = validate(&d);
    if !report.is_valid() {
        return Err(Failure::input(format!("{}: {report}", path.display())));
    }
    Ok(d)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let text = format!("{text}\n");
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Failure::input(format!("stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

fn write_domain(d: &DomainSpec, out: Option<&Path>) -> Result<(), Failure> {
    let report = validate(d);
    eprintln!("{} holes, {report}", d.len());
    emit(out, &d.to_json())
}

fn gen(kind: &GenKind) -> Result<DomainSpec, Failure> {
    let d = match *kind {
        GenKind::Annulus { r } => gen_annulus(r),
        GenKind::Orbit { a, rho, m } => gen_orbit(a, rho, m),
        GenKind::Inverse { delta } => gen_inverse(delta).map(|(d, _)| d),
        GenKind::Dyadic { n } => gen_dyadic(n),
        GenKind::Random { seed, index } => Ok(seeded_corpus(seed, index + 1).swap_remove(index)),
    };
    d.map_err(|e| Failure::input(e.to_string()))
}

fn run_analyze(
    domain: &Path,
    opts: &AnalyzeOpts,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let d = read_domain(domain)?;
    let cfg = opts.config()?;
    let report = analyze(&d, &cfg).map_err(|e| match e {
        AnalyzeError::Invalid(m) | AnalyzeError::Config(m) => Failure::input(m),
    })?;
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => match &report.gram {
            Some(g) => g.to_csv(),
            None => String::new(),
        },
        Format::Svg => svg::render(&d, cfg.big_s),
    };
    emit(out, &text)?;
    verdict(&report)
}

fn verdict(report: &AnalysisReport) -> Result<(), Failure> {
    if !report.failures.is_empty() {
        let stages: Vec<String> = report
            .failures
            .iter()
            .map(|f| format!("{}: {}", f.stage, f.message))
            .collect();
        return Err(Failure {
            code: Failure::SOLVER,
            message: stages.join("; "),
        });
    }
    let failed: Vec<&str> = report
        .bounds
        .iter()
        .filter(|b| !b.holds)
        .map(|b| b.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(Failure {
            code: Failure::BOUND,
            message: format!("bound checks failed: {}", failed.join(", ")),
        });
    }
    Ok(())
}

fn transform(domain: &Path, map: &MapKind) -> Result<DomainSpec, Failure> {
    let d = read_domain(domain)?;
    let image = match *map {
        MapKind::Mobius { x, y, theta } => {
            let m = MobiusMap::new(Point::new(x, y), theta)
                .map_err(|e| Failure::input(e.to_string()))?;
            transform_domain(&d, &m)
        }
        MapKind::Invert => invert_domain(&d),
    };
    image.map_err(|e| Failure::input(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen { kind, out } => write_domain(&gen(kind)?, out.as_deref()),
        Command::Analyze {
            domain,
            opts,
            format,
            out,
        } => run_analyze(domain, opts, *format, out.as_deref()),
        Command::Transform { domain, map, out } => {
            write_domain(&transform(domain, map)?, out.as_deref())
        }
        Command::Sweep {
            family,
            values,
            a,
            rho,
            opts,
            out,
        } => {
            let cfg = opts.config()?;
            let values = if values.is_empty() {
                family.default_values()
            } else {
                values.clone()
            };
            let rows = sweep::run(*family, &values, *a, *rho, &cfg);
            emit(out.as_deref(), sweep::to_csv(&rows).trim_end())
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("PERIODLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
