//! Experiment driver for residue-class sieves: pattern tables, expanding
//! total sieves, anchored tuple reductions, bundled reproductions, and the
//! prime oracle, with deterministic CSV or JSON-lines output.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 reproduction
//! mismatch, 3 scan cap exceeded.

mod config;
mod reproduce;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigInt, BigUint, ToPrimitive};

use sievelab::total_sieve::{BoundSeries, Expansion, ExperimentRecord, ScanLimits};

use config::FileConfig;

#[derive(Parser, Debug)]
#[command(name = "sievelab", version, about = "Residue-class sieve experiments")]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write data rows to this file instead of stdout; a run manifest is
    /// placed next to it.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Data row format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Cap on bits when materializing one pattern period.
    #[arg(long, global = true)]
    bitmap_cap: Option<u64>,

    /// Cap on positions visited by one scan step.
    #[arg(long, global = true)]
    scan_cap: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pattern bits over a window, with the exact period and density.
    Pattern(PatternArgs),
    /// Stream an expanding total sieve as rows n,size,beta_star,gamma,crossed.
    TotalSieve(TotalSieveArgs),
    /// Anchor an admissible tuple; print its reduced classes and survivors.
    Tuple(TupleArgs),
    /// Replay a bundled worked example and verify its expected values.
    Reproduce(ReproduceArgs),
    /// Primes up to a limit, from the segmented oracle.
    Primes(PrimesArgs),
}

#[derive(Args, Debug)]
struct PrefixArgs {
    /// Explicit classes as p:r pairs, e.g. 3:1,3:2,5:4.
    #[arg(long)]
    prefix: Option<String>,

    /// Regular parameters alpha,kappa; combine with --residues or --len.
    #[arg(long)]
    regular: Option<String>,

    /// Residues for the regular prime sequence, e.g. 1,2,4.
    #[arg(long)]
    residues: Option<String>,

    /// Number of seeded residues to draw for the regular sequence.
    #[arg(long)]
    len: Option<usize>,

    /// Seed for the fixed ChaCha8 residue generator.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct PatternArgs {
    #[command(flatten)]
    source: PrefixArgs,

    /// How many classes are active; defaults to the whole prefix.
    #[arg(long)]
    depth: Option<usize>,

    /// First position of the table.
    #[arg(long)]
    from: Option<i64>,

    /// Last position of the table; defaults to one fundamental period.
    #[arg(long)]
    to: Option<i64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TotalSieveArgs {
    #[command(flatten)]
    source: PrefixArgs,

    /// Center of the expanding sieve.
    #[arg(long)]
    z: Option<i64>,

    /// Expand for depths 1..=n-max; defaults to the whole prefix.
    #[arg(long = "n-max")]
    n_max: Option<usize>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TupleArgs {
    /// Tuple offsets, e.g. 0,2,6.
    offsets: Option<String>,

    /// Anchor index d; defaults to the smallest valid one.
    #[arg(long)]
    d: Option<usize>,

    /// Anchor position m; defaults to the smallest matching one.
    #[arg(long)]
    m: Option<u64>,

    /// How many primes the reduced classes cover.
    #[arg(long)]
    g: Option<usize>,

    /// Also report survivors at this depth.
    #[arg(long)]
    survivors: Option<usize>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// One of: figure1, guiding-example.
    scenario: Option<String>,
}

#[derive(Args, Debug)]
struct PrimesArgs {
    /// Inclusive upper bound, at least 2.
    #[arg(long)]
    limit: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_workers();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<sievelab::Error>() {
                Some(sievelab::Error::ScanCapExceeded { .. }) => 3u8,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

/// Worker count comes from SIEVELAB_WORKERS only; science parameters never
/// travel through the environment.
fn init_workers() {
    if let Ok(value) = std::env::var("SIEVELAB_WORKERS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

struct Sink {
    writer: Box<dyn Write>,
    rows: u64,
}

impl Sink {
    fn open(output: Option<&PathBuf>) -> Result<Self> {
        let writer: Box<dyn Write> = match output {
            Some(path) => Box::new(std::io::BufWriter::new(
                std::fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        };
        Ok(Self { writer, rows: 0 })
    }

    fn row(&mut self, line: &str) -> Result<()> {
        writeln!(self.writer, "{line}")?;
        self.rows += 1;
        Ok(())
    }

    fn header(&mut self, line: &str) -> Result<()> {
        writeln!(self.writer, "{line}")?;
        Ok(())
    }

    fn finish(
        mut self,
        output: Option<&PathBuf>,
        command: &str,
        resolved: &serde_json::Value,
    ) -> Result<()> {
        self.writer.flush()?;
        if let Some(path) = output {
            let manifest = config::write_manifest(path, command, resolved, self.rows)?;
            eprintln!("manifest: {}", manifest.display());
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<u8> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let output = cli.output.clone().or_else(|| file.output.clone());
    let file_format = match file.format.as_deref() {
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        Some(other) => bail!("config format must be csv or json, got {other:?}"),
        None => None,
    };
    let format = cli.format.or(file_format).unwrap_or(Format::Csv);
    let bitmap_cap = cli
        .bitmap_cap
        .or(file.bitmap_cap)
        .unwrap_or(sievelab::DEFAULT_BITMAP_CAP_BITS);
    let scan_cap = cli
        .scan_cap
        .or(file.scan_cap)
        .unwrap_or(sievelab::DEFAULT_STEP_CAP);
    if bitmap_cap == 0 || scan_cap == 0 {
        bail!("caps must be positive");
    }
    let limits = ScanLimits {
        max_step_positions: scan_cap,
    };

    match &cli.command {
        Command::Pattern(args) => cmd_pattern(args, &file, format, bitmap_cap, output.as_ref()),
        Command::TotalSieve(args) => cmd_total_sieve(args, &file, format, limits, output.as_ref()),
        Command::Tuple(args) => cmd_tuple(args, &file, format, output.as_ref()),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Primes(args) => cmd_primes(args, &file, format, output.as_ref()),
    }
}

fn resolve_source(
    args: &PrefixArgs,
    file: &FileConfig,
) -> Result<(sievelab::SievingPrefix, serde_json::Value)> {
    let prefix_spec = args.prefix.clone().or_else(|| file.prefix.clone());
    let regular = args.regular.clone().or_else(|| file.regular.clone());
    let residues = args.residues.clone().or_else(|| file.residues.clone());
    let len = args.len.or(file.len);
    let seed = args.seed.or(file.seed);
    let prefix = config::resolve_prefix(
        prefix_spec.as_deref(),
        regular.as_deref(),
        residues.as_deref(),
        len,
        seed,
    )?;
    let echo = serde_json::json!({
        "prefix": prefix_spec,
        "regular": regular,
        "residues": residues,
        "len": len,
        "seed": seed,
    });
    Ok((prefix, echo))
}

fn cmd_pattern(
    args: &PatternArgs,
    file: &FileConfig,
    format: Format,
    bitmap_cap: u64,
    output: Option<&PathBuf>,
) -> Result<u8> {
    let (prefix, source_echo) = resolve_source(&args.source, file)?;
    let depth = args.depth.or(file.depth).unwrap_or(prefix.len());
    let pattern = sievelab::Pattern::new(prefix, depth)?;

    let period = pattern.fundamental_period();
    let density = pattern.average_density();
    let from = args.from.or(file.from).unwrap_or(1);
    let to = match args.to.or(file.to) {
        Some(to) => to,
        None => {
            let period = period
                .to_u64()
                .filter(|&t| t <= 100_000)
                .context("period too large for a default window; pass --to")?;
            from + period as i64 - 1
        }
    };
    if to < from {
        bail!("window end {to} lies before start {from}");
    }

    match pattern.unsieved_count_in_period(bitmap_cap) {
        Some(count) => {
            eprintln!("depth={depth} period={period} density={density} unsieved_per_period={count}")
        }
        None => eprintln!("depth={depth} period={period} density={density}"),
    }

    let mut sink = Sink::open(output)?;
    if format == Format::Csv {
        sink.header("z,bit")?;
    }
    for z in from..=to {
        let bit = pattern.eval_i64(z);
        match format {
            Format::Csv => sink.row(&format!("{z},{bit}"))?,
            Format::Json => sink.row(&format!("{{\"z\":{z},\"bit\":{bit}}}"))?,
        }
    }
    let resolved = serde_json::json!({
        "source": source_echo,
        "depth": depth,
        "from": from,
        "to": to,
        "format": format_name(format),
    });
    sink.finish(output, "pattern", &resolved)?;
    Ok(0)
}

fn cmd_total_sieve(
    args: &TotalSieveArgs,
    file: &FileConfig,
    format: Format,
    limits: ScanLimits,
    output: Option<&PathBuf>,
) -> Result<u8> {
    let (prefix, source_echo) = resolve_source(&args.source, file)?;
    let z = args.z.or(file.z).unwrap_or(0);
    let n_max = args.n_max.or(file.n_max).unwrap_or(prefix.len());

    let resolved = serde_json::json!({
        "source": source_echo,
        "z": z,
        "n_max": n_max,
        "scan_cap": limits.max_step_positions,
        "format": format_name(format),
    });

    let bounds = BoundSeries::for_prefix(&prefix, n_max)?;
    let expansion = Expansion::new(&prefix, &bounds, BigInt::from(z), n_max, limits)?;

    let mut sink = Sink::open(output)?;
    if format == Format::Csv {
        sink.header(ExperimentRecord::csv_header())?;
    }
    for row in expansion {
        match row {
            Ok(record) => match format {
                Format::Csv => sink.row(&record.csv_line())?,
                Format::Json => sink.row(&serde_json::to_string(&record)?)?,
            },
            Err(e) => {
                sink.finish(output, "total-sieve", &resolved)?;
                eprintln!("aborted: {e}");
                return Err(e.into());
            }
        }
    }
    sink.finish(output, "total-sieve", &resolved)?;
    Ok(0)
}

fn cmd_tuple(
    args: &TupleArgs,
    file: &FileConfig,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<u8> {
    let offsets_spec = args
        .offsets
        .clone()
        .or_else(|| file.offsets.clone())
        .context("tuple offsets are required, e.g. 0,2,6")?;
    let offsets = config::parse_offsets(&offsets_spec)?;
    let tuple = sievelab::KTuple::new(offsets)?;
    let d = args.d.or(file.d);
    let m = args.m.or(file.m).map(BigUint::from);
    let g = args.g.or(file.g).unwrap_or(1);
    if g < 1 {
        bail!("g must be at least 1");
    }
    let survivors_depth = args.survivors.or(file.survivors);

    let anchor = sievelab::TupleAnchor::choose(tuple, d, m)?;
    eprintln!(
        "anchor: tuple={} d={} m={} primorial={}",
        anchor.tuple(),
        anchor.d(),
        anchor.m(),
        anchor.primorial()
    );

    let reduced = anchor.reduce(g);
    let survivors = survivors_depth.map(|n| anchor.survivors(n));

    let mut sink = Sink::open(output)?;
    match format {
        Format::Csv => {
            sink.row(&serde_json::to_string(&reduced)?)?;
            if let Some(rows) = &survivors {
                sink.header("z,position,all_prime")?;
                for s in rows {
                    sink.row(&format!("{},{},{}", s.z, s.position, s.all_prime))?;
                }
            }
        }
        Format::Json => {
            let survivors_json: Option<Vec<serde_json::Value>> = survivors.as_ref().map(|rows| {
                rows.iter()
                    .map(|s| {
                        serde_json::json!({
                            "z": s.z.to_string(),
                            "position": s.position.to_string(),
                            "all_prime": s.all_prime,
                        })
                    })
                    .collect()
            });
            let document = serde_json::json!({
                "anchor": {
                    "offsets": anchor.tuple().offsets(),
                    "d": anchor.d(),
                    "m": anchor.m().to_string(),
                    "primorial": anchor.primorial().to_string(),
                },
                "classes": &reduced,
                "survivors": survivors_json,
            });
            sink.row(&serde_json::to_string(&document)?)?;
        }
    }

    let resolved = serde_json::json!({
        "offsets": offsets_spec,
        "d": anchor.d(),
        "m": anchor.m().to_string(),
        "g": g,
        "survivors": survivors_depth,
        "format": format_name(format),
    });
    sink.finish(output, "tuple", &resolved)?;
    Ok(0)
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<u8> {
    let scenario = args.scenario.as_deref().unwrap_or_default();
    let checks = match scenario {
        "figure1" => reproduce::figure1(),
        "guiding-example" => reproduce::guiding_example(),
        other => bail!("unknown scenario {other:?}; expected figure1 or guiding-example"),
    };
    let mut mismatches = 0usize;
    for check in &checks {
        if check.ok() {
            println!("ok {}: {}", check.label, check.actual);
        } else {
            mismatches += 1;
            println!(
                "MISMATCH {}: expected {}, got {}",
                check.label, check.expected, check.actual
            );
        }
    }
    if mismatches == 0 {
        println!("PASS {} ({} checks)", scenario, checks.len());
        Ok(0)
    } else {
        println!(
            "FAIL {} ({mismatches} of {} checks)",
            scenario,
            checks.len()
        );
        Ok(2)
    }
}

fn cmd_primes(
    args: &PrimesArgs,
    file: &FileConfig,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<u8> {
    let limit = args
        .limit
        .or(file.limit)
        .context("--limit is required and must be at least 2")?;
    if limit < 2 {
        bail!("--limit must be at least 2");
    }
    let primes = sievelab::primes::primes_upto(limit);
    let mut sink = Sink::open(output)?;
    match format {
        Format::Csv => {
            sink.header("p")?;
            for p in &primes {
                sink.row(&p.to_string())?;
            }
        }
        Format::Json => {
            sink.row(&serde_json::to_string(&primes)?)?;
        }
    }
    let resolved = serde_json::json!({ "limit": limit, "format": format_name(format) });
    sink.finish(output, "primes", &resolved)?;
    Ok(0)
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}
