use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rescode::bits::{BitsFormat, FileBits};
use rescode::curve::{self, Grid};
use rescode::error::{CliError, Result, EXIT_FAILED, EXIT_USAGE};
use rescode::formats::{self, CodeJson, CodebookJson, SymbolFormat};
use rescode::run::{self, Source};
use rescode_core::baseline::build_block_code;
use rescode_core::encoder::{build_code, Scheme};
use rescode_core::mtype::quantize;
use rescode_core::probdist::kl_divergence;
use rescode_core::tunstall::{is_valid_size, round_down_size};
use rescode_core::{Pmf, ResolutionCode};

/// Fixed-to-variable length resolution codes: turn fair bits into symbols
/// that approximate a target distribution.
#[derive(Parser, Debug)]
#[command(name = "rescode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep (m, N) grids and write rate/divergence rows as CSV
    Curve(CurveArgs),
    /// Generate a symbol stream
    Generate(GenerateArgs),
    /// Generate a stream and compare its codeword histogram with the code
    Validate(ValidateArgs),
    /// Write a code as JSON
    Dump(DumpArgs),
    /// Check a codebook JSON file for completeness
    CheckCodebook { path: PathBuf },
    /// Print the KL-optimal M-type approximation of a distribution
    Quantize {
        /// Comma-separated probabilities; zero entries are allowed
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        q: Vec<f64>,
        /// Denominator M
        #[arg(long)]
        denominator: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GridTable {
    Default,
}

#[derive(Args, Debug)]
struct CurveArgs {
    /// Target distribution, e.g. 0.211,0.789
    #[arg(long)]
    p: Pmf,
    /// Input lengths (repeatable)
    #[arg(long = "m")]
    ms: Vec<u32>,
    /// Codebook exponents n: f2v uses N = 2^n, b2b uses blocks of length n
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<u32>,
    /// Use a built-in grid of (m, n) pairs
    #[arg(long, value_enum)]
    grid_table: Option<GridTable>,
    #[arg(long, value_delimiter = ',', default_value = "f2v,b2b")]
    schemes: Vec<SchemeArg>,
    /// Extra f2v codebook size, either `N` (paired with every m) or `m:N`
    #[arg(long)]
    extra_size: Vec<String>,
    /// Round f2v sizes down to the nearest reachable Tunstall size
    #[arg(long)]
    round_size: bool,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV destination; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write gnuplot-ready data here
    #[arg(long)]
    emit_gnuplot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    F2v,
    B2b,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::F2v => Scheme::F2v,
            SchemeArg::B2b => Scheme::B2b,
        }
    }
}

#[derive(Args, Debug)]
struct CodeArgs {
    /// Target distribution, e.g. 0.211,0.789
    #[arg(long)]
    p: Pmf,
    /// Input bits per codeword
    #[arg(long)]
    m: u32,
    /// Tunstall codebook size N
    #[arg(long)]
    size: u64,
    /// Round N down to the nearest reachable Tunstall size
    #[arg(long)]
    round_size: bool,
}

impl CodeArgs {
    fn build(&self) -> Result<ResolutionCode> {
        let d = self.p.alphabet_size();
        let size = if self.round_size && !is_valid_size(d, self.size) {
            round_down_size(d, self.size).ok_or_else(|| {
                CliError::usage(format!("no Tunstall size at or below {}", self.size))
            })?
        } else {
            self.size
        };
        Ok(build_code(&self.p, size, self.m)?)
    }
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Stop once at least this many symbols are out (required with --seed)
    #[arg(long)]
    symbols: Option<u64>,
    /// Seed for the xoshiro256** bit generator
    #[arg(long, conflicts_with = "bits_file")]
    seed: Option<u64>,
    /// Read fair bits from a file instead
    #[arg(long)]
    bits_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BitsFormat::Auto)]
    bits_format: BitsFormat,
}

impl SourceArgs {
    fn source(&self) -> Result<Source> {
        match (&self.bits_file, self.seed) {
            (Some(path), _) => Ok(Source::File(FileBits::load(path, self.bits_format)?)),
            (None, Some(seed)) => Ok(Source::Seed(seed)),
            (None, None) => Err(CliError::usage("one of --seed or --bits-file is required")),
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value_t = SymbolFormat::Text)]
    format: SymbolFormat,
    /// Destination; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    source: SourceArgs,
    /// Largest accepted variational distance
    #[arg(long, default_value_t = 0.01)]
    tv_threshold: f64,
}

#[derive(Args, Debug)]
struct DumpArgs {
    /// Target distribution, e.g. 0.211,0.789
    #[arg(long)]
    p: Pmf,
    #[arg(long)]
    m: u32,
    /// Tunstall codebook size N (f2v)
    #[arg(long, conflicts_with = "block")]
    size: Option<u64>,
    /// Block length n (b2b)
    #[arg(long)]
    block: Option<usize>,
    #[arg(long)]
    round_size: bool,
    /// Write only the codebook
    #[arg(long)]
    codebook_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, data: &[u8]) -> Result<()> {
    match out {
        Some(path) => formats::write_atomic(path, data),
        None => std::io::stdout()
            .write_all(data)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn parse_extra(spec: &str, ms: &[u32]) -> Result<Vec<(u32, u64)>> {
    let bad = || CliError::usage(format!("bad --extra-size {spec:?}; expected N or m:N"));
    match spec.split_once(':') {
        Some((m, n)) => Ok(vec![(
            m.trim().parse().map_err(|_| bad())?,
            n.trim().parse().map_err(|_| bad())?,
        )]),
        None => {
            let n: u64 = spec.trim().parse().map_err(|_| bad())?;
            if ms.is_empty() {
                return Err(CliError::usage("--extra-size N needs at least one m"));
            }
            Ok(ms.iter().map(|&m| (m, n)).collect())
        }
    }
}

fn curve(args: CurveArgs) -> Result<i32> {
    let pairs: Vec<(u32, u32)> = match args.grid_table {
        Some(GridTable::Default) => Grid::default_table()
            .into_iter()
            .filter(|(m, _)| args.ms.is_empty() || args.ms.contains(m))
            .collect(),
        None => args
            .ms
            .iter()
            .flat_map(|&m| args.n_list.iter().map(move |&n| (m, n)))
            .collect(),
    };
    let mut grid_ms: Vec<u32> = if args.ms.is_empty() {
        pairs.iter().map(|&(m, _)| m).collect()
    } else {
        args.ms.clone()
    };
    grid_ms.sort_unstable();
    grid_ms.dedup();
    let mut extra = Vec::new();
    for spec in &args.extra_size {
        extra.extend(parse_extra(spec, &grid_ms)?);
    }
    if pairs.is_empty() && extra.is_empty() {
        return Err(CliError::usage(
            "nothing to evaluate; give --grid-table, --m with --n-list, or --extra-size",
        ));
    }
    if args.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let grid = Grid {
        pairs,
        extra,
        schemes: args.schemes.iter().map(|&s| s.into()).collect(),
        round_size: args.round_size,
    };
    let points = grid.points(args.p.alphabet_size())?;
    let rows = curve::run(&args.p, &points, args.jobs)?;
    if let Some(path) = &args.emit_gnuplot {
        formats::write_atomic(path, formats::gnuplot_document(&rows).as_bytes())?;
    }
    emit(args.out.as_ref(), formats::csv_document(&rows).as_bytes())?;
    Ok(0)
}

fn generate(args: GenerateArgs) -> Result<i32> {
    let code = args.code.build()?;
    let stream = run::drive(&code, args.source.source()?, args.source.symbols, true)?;
    let d = code.codebook().alphabet_size();
    emit(
        args.out.as_ref(),
        &formats::encode_symbols(&stream.symbols, d, args.format),
    )?;
    let s = &stream.stats;
    eprintln!(
        "input_bits={} output_symbols={} empirical_rate={}",
        s.input_bits,
        s.output_symbols,
        s.empirical_rate()
    );
    Ok(0)
}

fn validate(args: ValidateArgs) -> Result<i32> {
    let code = args.code.build()?;
    let v = run::validate(
        &code,
        &args.code.p,
        args.source.source()?,
        args.source.symbols,
        args.tv_threshold,
    )?;
    println!(
        "codewords={} output_symbols={} empirical_rate={} rate={} rate_gap={}",
        v.codewords,
        v.output_symbols,
        v.empirical_rate,
        v.rate,
        v.rate_gap()
    );
    println!("tv={} threshold={}", v.tv, v.threshold);
    let exhaustive = match v.exhaustive {
        Some(true) => "match",
        Some(false) => "mismatch",
        None => "skipped",
    };
    println!("exhaustive={exhaustive}");
    println!("{}", if v.passed() { "PASS" } else { "FAIL" });
    Ok(if v.passed() { 0 } else { EXIT_FAILED })
}

fn dump(args: DumpArgs) -> Result<i32> {
    let code = match (args.size, args.block) {
        (Some(size), None) => CodeArgs {
            p: args.p.clone(),
            m: args.m,
            size,
            round_size: args.round_size,
        }
        .build()?,
        (None, Some(n)) => build_block_code(&args.p, n, args.m)?,
        _ => return Err(CliError::usage("give exactly one of --size or --block")),
    };
    let mut text = if args.codebook_only {
        serde_json::to_string(&CodebookJson::from_codebook(code.codebook()))
    } else {
        serde_json::to_string(&CodeJson::new(&code, args.p.probs()))
    }
    .expect("plain data serializes");
    text.push('\n');
    emit(args.out.as_ref(), text.as_bytes())?;
    Ok(0)
}

fn check_codebook(path: PathBuf) -> Result<i32> {
    let json: CodebookJson = formats::read_json(&path)?;
    match json.to_codebook() {
        Ok(book) => {
            println!(
                "complete: {} leaves, max depth {}",
                book.len(),
                book.max_len()
            );
            Ok(0)
        }
        Err(CliError::Core(e)) => {
            println!("invalid: {e}");
            Ok(EXIT_FAILED)
        }
        Err(e) => Err(e),
    }
}

fn quantize_cmd(q: Vec<f64>, m: u64) -> Result<i32> {
    let t = quantize(&q, m)?;
    let counts: Vec<String> = t.counts().iter().map(u64::to_string).collect();
    println!("counts={}", counts.join(","));
    println!("kl_bits={}", kl_divergence(&t, &q)?);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve(a) => curve(a),
        Command::Generate(a) => generate(a),
        Command::Validate(a) => validate(a),
        Command::Dump(a) => dump(a),
        Command::CheckCodebook { path } => check_codebook(path),
        Command::Quantize { q, denominator } => quantize_cmd(q, denominator),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
