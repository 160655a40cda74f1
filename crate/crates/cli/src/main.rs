use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ffproj_core::bounds::{classical_exponents, conjectured_exponent, Target};
use ffproj_core::fourier::fourier_suite;
use ffproj_core::sweep::{self, SweepConfig};
use ffproj_core::verify::{hyper_lemmas_from_report, FalconerCheck, SweepRecord};
use ffproj_core::{
    enumerate_subspaces, exceptional_set, project, ConstructionSpec, Error, PointSet, PrimeModulus,
    ScanOptions, SizeGuard, Subspace,
};

/// Exact projection experiments over prime fields.
#[derive(Parser)]
#[command(name = "ffproj", version)]
struct Cli {
    /// Lift the size guard (p^n points, Grassmannian size).
    #[arg(long, global = true)]
    no_guard: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List G(k, F_p^n) in canonical order, one subspace per line.
    Enumerate {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
        /// Stop after this many subspaces.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Print the cosets of a direction that meet a point set.
    Project {
        #[command(flatten)]
        input: Input,
        /// Basis rows, e.g. `1,0,2;0,1,1`.
        #[arg(long)]
        direction: String,
        #[arg(long)]
        json: bool,
    },
    /// Full exceptional-set report as JSON.
    Exceptional {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scan: Scan,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Fourier identities; exits 1 if any tolerance is missed.
    FourierCheck {
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Build a construction and write it in the point-set format.
    Construct {
        /// `kind:key=value,...`
        spec: String,
        /// Write the set here and print the prediction checks as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a bound against one set, or evaluate the exponent formulas.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Run a sweep config. CSV goes to stdout unless --csv is given; the
    /// summary table goes to stderr.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Sweep record for one set.
    Theorem {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scan: Scan,
    },
    /// Overlap-weighted and overlap-free forms of the Fourier bound.
    Falconer {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scan: Scan,
    },
    /// Overlap bound and per-slice incidence bound.
    Hyper {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scan: Scan,
    },
    /// Exponent formulas for given (n, k, a, s).
    Bounds {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
        #[arg(short)]
        a: f64,
        #[arg(short)]
        s: f64,
    },
    /// Piecewise lower bound in three dimensions.
    Conjectured {
        /// `lines` or `planes`.
        target: String,
        #[arg(short)]
        a: f64,
        #[arg(short)]
        s: f64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Point-set file.
    #[arg(long)]
    set: Option<PathBuf>,
    /// Build the set from `kind:key=value,...`.
    #[arg(long)]
    construct: Option<String>,
}

#[derive(Args)]
struct Scan {
    /// Directions are G(n-k, F_p^n).
    #[arg(short)]
    k: usize,
    #[arg(short)]
    s: f64,
    #[arg(long)]
    workers: Option<usize>,
}

impl Input {
    fn load(&self, guard: &SizeGuard) -> anyhow::Result<PointSet> {
        match (&self.set, &self.construct) {
            (Some(path), _) => {
                let set = PointSet::read_file(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                guard.check_points(set.prime(), set.ambient_dim())?;
                Ok(set)
            }
            (None, Some(spec)) => Ok(ConstructionSpec::parse(spec)?.build(guard)?.set),
            (None, None) => bail!("give --set or --construct"),
        }
    }
}

impl Scan {
    fn options(&self, guard: SizeGuard) -> ScanOptions {
        ScanOptions {
            guard,
            workers: self.workers,
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// `Ok(false)` means the command ran but a check failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let guard = if cli.no_guard {
        SizeGuard::unlimited()
    } else {
        SizeGuard::from_env()?
    };
    match cli.command {
        Command::Enumerate { p, n, k, limit } => {
            let p = PrimeModulus::new(p)?;
            let mut out = std::io::stdout().lock();
            for v in enumerate_subspaces(p, n, k, &guard)?.take(limit.unwrap_or(usize::MAX)) {
                writeln!(out, "{}", v.notation())?;
            }
        }
        Command::Project {
            input,
            direction,
            json,
        } => {
            let a = input.load(&guard)?;
            let v = Subspace::parse(a.prime(), a.ambient_dim(), &direction)?;
            let planes = project(&v, &a)?;
            if json {
                print_json(&serde_json::json!({
                    "direction": v,
                    "count": planes.len(),
                    "cosets": planes.iter().map(|w| w.rep_coords()).collect::<Vec<_>>(),
                }))?;
            } else {
                let mut out = std::io::stdout().lock();
                writeln!(out, "# {} cosets of {}", planes.len(), v)?;
                for w in &planes {
                    writeln!(out, "{w}")?;
                }
            }
        }
        Command::Exceptional { input, scan, out } => {
            let a = input.load(&guard)?;
            let report = exceptional_set(&a, scan.k, scan.s, &scan.options(guard))?;
            match out {
                Some(path) => std::fs::write(&path, report.to_json() + "\n")
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{}", report.to_json()),
            }
            if !report.in_range {
                eprintln!("note: s = {} is outside (0, min{{k, a}})", scan.s);
            }
        }
        Command::FourierCheck {
            primes,
            max_n,
            samples,
            seed,
        } => {
            let primes = primes
                .into_iter()
                .map(PrimeModulus::new)
                .collect::<Result<Vec<_>, _>>()?;
            let report = fourier_suite(&primes, max_n, samples, seed, &guard)?;
            print_json(&report)?;
            return Ok(report.passes());
        }
        Command::Construct { spec, out } => {
            let built = ConstructionSpec::parse(&spec)?.build(&guard)?;
            match out {
                Some(path) => {
                    built
                        .set
                        .write_file(&path)
                        .with_context(|| format!("writing {}", path.display()))?;
                    let checks = built.check()?;
                    let holds = checks.iter().all(|c| c.holds);
                    print_json(&serde_json::json!({
                        "spec": built.spec.to_string(),
                        "note": built.spec.note(),
                        "size": built.set.cardinality(),
                        "predictions": checks,
                    }))?;
                    return Ok(holds);
                }
                None => print!("{}", built.set.to_text()),
            }
        }
        Command::Verify { what } => match what {
            Verify::Theorem { input, scan } => {
                let a = input.load(&guard)?;
                let r = exceptional_set(&a, scan.k, scan.s, &scan.options(guard))?;
                let label = input.construct.as_deref().unwrap_or("input");
                print_json(&SweepRecord::from_report(&r, label, None))?;
            }
            Verify::Falconer { input, scan } => {
                let a = input.load(&guard)?;
                let r = exceptional_set(&a, scan.k, scan.s, &scan.options(guard))?;
                match FalconerCheck::from_report(&r) {
                    Some(f) => print_json(&f)?,
                    None => bail!(Error::Precondition("the set is empty".into())),
                }
            }
            Verify::Hyper { input, scan } => {
                let a = input.load(&guard)?;
                let r = exceptional_set(&a, scan.k, scan.s, &scan.options(guard))?;
                print_json(&hyper_lemmas_from_report(&a, &r)?)?;
            }
            Verify::Bounds { n, k, a, s } => print_json(&classical_exponents(n, k, a, s)?)?,
            Verify::Conjectured { target, a, s } => {
                let t: Target = target.parse()?;
                println!("{}", conjectured_exponent(t, a, s)?);
            }
        },
        Command::Sweep {
            config,
            csv,
            json,
            workers,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg =
                SweepConfig::parse(&text).with_context(|| format!("in {}", config.display()))?;
            let rows = sweep::run(&cfg, &guard, workers);
            let summary = sweep::summarize(&rows, &cfg);
            let table = sweep::to_csv(&rows);
            match csv {
                Some(path) => std::fs::write(&path, &table)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{table}"),
            }
            if let Some(path) = json {
                std::fs::write(&path, sweep::to_json(&rows, &summary) + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            eprint!("{}", sweep::summary_table(&summary));
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::InstanceTooLarge(_)) => 3,
        _ => 2,
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        let kind = e
            .downcast_ref::<std::io::Error>()
            .map(|e| e.kind())
            .or_else(|| {
                e.downcast_ref::<serde_json::Error>()
                    .and_then(|e| e.io_error_kind())
            });
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
