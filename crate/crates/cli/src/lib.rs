//! Batch front end. Everything the binary does goes through [`run`], which
//! returns the text to print and the exit code instead of printing, so the
//! commands can be driven from tests.

use std::fs;
use std::path::{Path, PathBuf};

use bquant::character::{VirtualCharacter, Weight};
use bquant::model::{self, Description};
use bquant::quantize::{self, QuantizationError};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bquant", version, about = "Exact formal quantization of toric and b-toric spaces")]
pub struct Cli {
    /// Worker threads for pointwise evaluation (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every hypothesis check and print one line per check
    Check { file: PathBuf },
    /// Compute Q(M)
    Quantize {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Re-check the result against pointwise evaluation on a 2x box
        #[arg(long)]
        verify: bool,
        /// Also write the JSON document to this file
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Signed count of the reduced space at one weight
    Reduce {
        file: PathBuf,
        /// Comma-separated integers, e.g. "1,-2"
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
    },
    /// Compare (Q(M) x Q(N))^T with the count over the zero fibre of M x N
    VerifyQr {
        m: PathBuf,
        n: PathBuf,
        /// Use this character for Q(M) instead of recomputing it
        #[arg(long)]
        character: Option<PathBuf>,
    },
    /// Show the local model at a hypersurface and its quantization
    Cancel {
        file: PathBuf,
        #[arg(long)]
        hypersurface: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub payload: Option<PathBuf>,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome { code: EXIT_OK, stdout, stderr: String::new(), payload: None }
    }

    fn fail(code: i32, stdout: String, stderr: impl Into<String>) -> Self {
        CommandOutcome { code, stdout, stderr: stderr.into(), payload: None }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Self::fail(EXIT_USAGE, String::new(), format!("error: {}\n", msg.into()))
    }
}

pub fn run(cli: &Cli) -> CommandOutcome {
    let result = match &cli.command {
        Command::Check { file } => cmd_check(file),
        Command::Quantize { file, format, verify, output } => cmd_quantize(file, *format, *verify, output.as_deref()),
        Command::Reduce { file, weight } => cmd_reduce(file, weight),
        Command::VerifyQr { m, n, character } => cmd_verify_qr(m, n, character.as_deref()),
        Command::Cancel { file, hypersurface } => cmd_cancel(file, *hypersurface),
    };
    result.unwrap_or_else(|o| o)
}

fn load(path: &Path) -> Result<Description, CommandOutcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandOutcome::usage(format!("cannot read {}: {e}", path.display())))?;
    model::parse_description(&text).map_err(|e| CommandOutcome::usage(format!("{}: {e}", path.display())))
}

fn exit_code(e: &QuantizationError) -> i32 {
    match e {
        QuantizationError::RankMismatch { .. } | QuantizationError::IndexOutOfRange { .. } => EXIT_USAGE,
        _ => EXIT_CHECK_FAILED,
    }
}

fn engine_failure(e: QuantizationError) -> CommandOutcome {
    match e {
        QuantizationError::NotValidated(report) => {
            CommandOutcome::fail(EXIT_CHECK_FAILED, report.to_lines(), "error: description failed validation\n")
        }
        e => CommandOutcome::fail(exit_code(&e), String::new(), format!("error: {e}\n")),
    }
}

fn require_valid(d: &Description) -> Result<(), CommandOutcome> {
    let report = model::validate_description(d);
    if report.passed() {
        Ok(())
    } else {
        Err(engine_failure(QuantizationError::NotValidated(report)))
    }
}

pub fn cmd_check(file: &Path) -> Result<CommandOutcome, CommandOutcome> {
    let d = load(file)?;
    let report = model::validate_description(&d);
    let out = report.to_lines();
    if report.passed() {
        Ok(CommandOutcome::ok(out))
    } else {
        Ok(CommandOutcome::fail(EXIT_CHECK_FAILED, out, ""))
    }
}

fn big(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(x) => json!(x),
        Err(_) => json!(n.to_string()),
    }
}

fn weights_json(ws: &[Weight]) -> Value {
    Value::Array(ws.iter().map(|w| json!(w.coords())).collect())
}

pub fn quantization_document(d: &Description, q: &VirtualCharacter) -> Value {
    let kind = match d {
        Description::CompactToric(_) => "compact_toric",
        Description::BToric(_) => "b_toric",
    };
    json!({
        "schema": bquant::format::SCHEMA,
        "kind": kind,
        "character": serde_json::to_value(q).expect("character serializes"),
        "dimension": big(&q.dimension()),
        "support_size": q.support_len(),
        "boundary_weights": weights_json(&quantize::singular_weights(d, q)),
    })
}

fn verify_pointwise(d: &Description, q: &VirtualCharacter) -> Result<String, CommandOutcome> {
    let rank = d.rank();
    let (lo, hi) = if q.is_zero() {
        (vec![0; rank], vec![0; rank])
    } else {
        let pts: Vec<&[i64]> = q.support().map(|w| w.coords()).collect();
        (
            (0..rank).map(|k| pts.iter().map(|p| p[k]).min().unwrap()).collect(),
            (0..rank).map(|k| pts.iter().map(|p| p[k]).max().unwrap()).collect(),
        )
    };
    let (lo, hi) = quantize::verification_box(&lo, &hi);
    let values = quantize::evaluate_on_box(q, &lo, &hi).map_err(engine_failure)?;
    let mismatch = values
        .par_iter()
        .map(|(w, m)| {
            let r = quantize::reduced_space_quantization(d, w).map_err(engine_failure)?;
            Ok((BigInt::from(r.count) != *m).then(|| w.clone()))
        })
        .collect::<Result<Vec<Option<Weight>>, CommandOutcome>>()?
        .into_iter()
        .flatten()
        .next();
    if let Some(w) = mismatch {
        return Err(CommandOutcome::fail(
            EXIT_CHECK_FAILED,
            String::new(),
            format!("error: verification failed: Q(M) disagrees with the reduced space count at {w}\n"),
        ));
    }
    Ok(format!(
        "verified: pointwise agreement on {} weights in [{}, {}]\n",
        values.len(),
        Weight(lo),
        Weight(hi)
    ))
}

pub fn cmd_quantize(
    file: &Path,
    format: Format,
    verify: bool,
    output: Option<&Path>,
) -> Result<CommandOutcome, CommandOutcome> {
    let d = load(file)?;
    let q = quantize::quantize(&d).map_err(engine_failure)?;
    let doc = quantization_document(&d, &q);
    let json_text = serde_json::to_string_pretty(&doc).expect("document serializes") + "\n";
    let mut out = match format {
        Format::Json => json_text.clone(),
        Format::Table => {
            let boundary = quantize::singular_weights(&d, &q);
            let boundary = if boundary.is_empty() {
                "none".to_string()
            } else {
                boundary.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
            };
            format!("{}{}\nboundary weights: {boundary}\n", q.to_table(), q.summary())
        }
    };
    if verify {
        let line = verify_pointwise(&d, &q)?;
        if format == Format::Table {
            out.push_str(&line);
        }
    }
    let mut outcome = CommandOutcome::ok(out);
    if let Some(path) = output {
        fs::write(path, &json_text)
            .map_err(|e| CommandOutcome::usage(format!("cannot write {}: {e}", path.display())))?;
        outcome.payload = Some(path.to_path_buf());
    }
    Ok(outcome)
}

fn parse_weight(s: &str) -> Result<Weight, CommandOutcome> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map(Weight)
        .map_err(|e| CommandOutcome::usage(format!("invalid weight {s:?}: {e}")))
}

pub fn cmd_reduce(file: &Path, weight: &str) -> Result<CommandOutcome, CommandOutcome> {
    let d = load(file)?;
    let alpha = parse_weight(weight)?;
    if alpha.rank() != d.rank() {
        return Err(CommandOutcome::usage(format!(
            "weight {alpha} has rank {}, description has rank {}",
            alpha.rank(),
            d.rank()
        )));
    }
    require_valid(&d)?;
    let r = quantize::reduced_space_quantization(&d, &alpha).map_err(engine_failure)?;
    Ok(CommandOutcome::ok(format!("weight = {alpha}\n{r}\n")))
}

pub fn cmd_verify_qr(m: &Path, n: &Path, character: Option<&Path>) -> Result<CommandOutcome, CommandOutcome> {
    let dm = load(m)?;
    let Description::CompactToric(dn) = load(n)? else {
        return Err(CommandOutcome::usage(format!("{}: N must be a compact toric description", n.display())));
    };
    if dm.rank() != dn.rank {
        return Err(CommandOutcome::usage(format!("rank mismatch: M has rank {}, N has rank {}", dm.rank(), dn.rank)));
    }
    require_valid(&dm)?;
    let report = match character {
        None => quantize::verify_qr_product(&dm, &dn),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CommandOutcome::usage(format!("cannot read {}: {e}", path.display())))?;
            let qm = VirtualCharacter::from_json(&text)
                .map_err(|e| CommandOutcome::usage(format!("{}: {e}", path.display())))?;
            quantize::verify_qr_with_character(&qm, &dm, &dn)
        }
    }
    .map_err(engine_failure)?;
    let out = format!("{report}\n");
    if report.verified() {
        Ok(CommandOutcome::ok(out))
    } else {
        Ok(CommandOutcome::fail(EXIT_CHECK_FAILED, out, ""))
    }
}

pub fn cmd_cancel(file: &Path, hypersurface: usize) -> Result<CommandOutcome, CommandOutcome> {
    let Description::BToric(d) = load(file)? else {
        return Err(CommandOutcome::usage("cancel needs a b_toric description"));
    };
    if hypersurface >= d.hypersurfaces.len() {
        return Err(CommandOutcome::usage(format!(
            "hypersurface {hypersurface} out of range ({} hypersurfaces)",
            d.hypersurfaces.len()
        )));
    }
    let torus = model::mapping_torus(&d.hypersurfaces[hypersurface]).map_err(|e| {
        CommandOutcome::fail(EXIT_CHECK_FAILED, String::new(), format!("error: {e}\n"))
    })?;
    let (lm, q) = quantize::cancel(&d, hypersurface).map_err(engine_failure)?;
    let mut out = format!("hypersurface {hypersurface}: Z = {torus}\nthreshold = {}\n", lm.threshold);
    for t in [&lm.plus, &lm.minus] {
        out.push_str(&format!("{} tail (component {}): {}\n", t.sign, t.component, t.tail));
    }
    if q.is_zero() {
        out.push_str("local quantization = 0\n");
        Ok(CommandOutcome::ok(out))
    } else {
        out.push_str(&q.to_table());
        Ok(CommandOutcome::fail(EXIT_CHECK_FAILED, out, ""))
    }
}
