//! File formats: codebook and code JSON, curve CSV, symbol streams.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rescode_core::codetree::{format_path, parse_path, validate_complete};
use rescode_core::encoder::Scheme;
use rescode_core::{Codebook, RateReport, ResolutionCode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookJson {
    pub d: usize,
    pub leaves: Vec<String>,
}

impl CodebookJson {
    pub fn from_codebook(c: &Codebook) -> Self {
        Self {
            d: c.alphabet_size(),
            leaves: c.leaves().iter().map(|l| format_path(l)).collect(),
        }
    }

    /// Parses the leaf strings and checks the tree is complete.
    pub fn to_codebook(&self) -> Result<Codebook> {
        let leaves = self
            .leaves
            .iter()
            .map(|s| parse_path(s).ok_or_else(|| CliError::usage(format!("bad leaf path {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(validate_complete(leaves, self.d)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeJson {
    pub scheme: String,
    pub p: Vec<f64>,
    pub m: u32,
    #[serde(rename = "N")]
    pub size: usize,
    pub d: usize,
    pub leaves: Vec<String>,
    pub target_probs: Vec<f64>,
    pub counts: Vec<u64>,
}

impl CodeJson {
    pub fn new(code: &ResolutionCode, p: &[f64]) -> Self {
        let book = CodebookJson::from_codebook(code.codebook());
        Self {
            scheme: code.scheme().name().to_owned(),
            p: p.to_vec(),
            m: code.m(),
            size: code.size(),
            d: book.d,
            leaves: book.leaves,
            target_probs: code.target().leaf_probs().to_vec(),
            counts: code.counts().counts().to_vec(),
        }
    }
}

pub const CSV_HEADER: &str =
    "scheme,m,N,n_bits,q,rate,entropy_rate,hv_rate,kl_bits,kl_bound_bits,exp_len";

/// One CSV line without the trailing newline. The divergence bound only
/// applies to f2v codes, so b2b rows leave that field empty.
pub fn csv_row(r: &RateReport) -> String {
    let bound = match r.scheme {
        Scheme::F2v => r.kl_bound.to_string(),
        Scheme::B2b => String::new(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.scheme.name(),
        r.m,
        r.size,
        r.n_bits,
        r.q,
        r.rate,
        r.entropy_rate,
        r.hv_rate,
        r.kl,
        bound,
        r.exp_len
    )
}

pub fn csv_document(rows: &[RateReport]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

/// Gnuplot data: one index block per (scheme, m) with `rate kl_bits N`
/// columns, blocks separated by two blank lines.
pub fn gnuplot_document(rows: &[RateReport]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first() {
        let _ = writeln!(out, "# target entropy {}", first.target_entropy);
    }
    let mut key = None;
    for r in rows {
        if key != Some((r.scheme, r.m)) {
            if key.is_some() {
                out.push_str("\n\n");
            }
            key = Some((r.scheme, r.m));
            let _ = writeln!(out, "# {} m={}", r.scheme.name(), r.m);
            out.push_str("# rate kl_bits N\n");
        }
        let _ = writeln!(out, "{} {} {}", r.rate, r.kl, r.size);
    }
    out
}

/// Output symbol encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SymbolFormat {
    /// One digit per symbol, newline after every 64 symbols.
    Text,
    /// `ceil(log2 D)` bits per symbol, most significant first, zero padded.
    Packed,
}

pub const TEXT_LINE: usize = 64;

pub fn encode_symbols(symbols: &[u8], d: usize, format: SymbolFormat) -> Vec<u8> {
    match format {
        SymbolFormat::Text => {
            let mut out = Vec::with_capacity(symbols.len() + symbols.len() / TEXT_LINE + 1);
            for line in symbols.chunks(TEXT_LINE) {
                out.extend(
                    line.iter()
                        .map(|&s| char::from_digit(s as u32, 36).unwrap() as u8),
                );
                out.push(b'\n');
            }
            out
        }
        SymbolFormat::Packed => {
            let width = (usize::BITS - (d - 1).leading_zeros()).max(1);
            let mut out = Vec::with_capacity(symbols.len() * width as usize / 8 + 1);
            let mut acc = 0u8;
            let mut used = 0;
            for &s in symbols {
                for i in (0..width).rev() {
                    acc = acc << 1 | (s >> i & 1);
                    used += 1;
                    if used == 8 {
                        out.push(acc);
                        acc = 0;
                        used = 0;
                    }
                }
            }
            if used > 0 {
                out.push(acc << (8 - used));
            }
            out
        }
    }
}

/// Writes `data` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(data).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}
