//! Thin command-line front end over the library: tree enumeration,
//! potential construction, Newton polytopes, verification sweeps, pairwise
//! distinguishing, and SVG figures. All numeric input and output uses
//! decimal strings.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::One;

use vianna_tori::batch::{
    self, BatchError, OutputFormat, RunConfig, OUT_DIR_ENV,
};
use vianna_tori::markov::MarkovTriple;

#[derive(Parser)]
#[command(
    name = "vianna-tori",
    about = "Disk potentials of lifted Vianna tori: Markov-tree mutation, Newton polytopes, exact verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> OutputFormat {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Table => OutputFormat::Table,
        }
    }
}

fn parse_max(s: &str) -> Result<BigInt, String> {
    let v = BigInt::from_str(s).map_err(|e| format!("not a decimal integer: {e}"))?;
    if v < BigInt::one() {
        return Err("--max must be at least 1".into());
    }
    Ok(v)
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate Markov triples with maximum entry up to a bound.
    Tree {
        #[arg(long, value_parser = parse_max)]
        max: BigInt,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Construct the disk potential of one triple.
    Potential {
        /// Triple as "a,b,c" with decimal entries.
        triple: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Newton polytope of the potential of one triple.
    Newton {
        triple: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the expected structure for every triple up to a bound.
    Verify {
        #[arg(long, value_parser = parse_max)]
        max: BigInt,
        /// Comma-separated dimensions, each at least 2.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Output directory for reports and the potential cache.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Pairwise non-equivalence certificates for all triples up to a bound.
    Distinguish {
        #[arg(long, value_parser = parse_max)]
        max: BigInt,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Draw the Newton polytope of one triple as SVG (dimension 2 or 3).
    Render {
        triple: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn default_workers(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn out_dir(cli_out: Option<PathBuf>) -> Option<PathBuf> {
    cli_out.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), BatchError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_triple(s: &str) -> Result<MarkovTriple, BatchError> {
    MarkovTriple::from_str(s).map_err(BatchError::Markov)
}

fn run(cli: Cli) -> Result<bool, BatchError> {
    match cli.cmd {
        Cmd::Tree { max, out, format } => {
            let nodes = batch::tree_nodes(&max)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&nodes)? + "\n",
                Format::Table => batch::tree_table(&nodes),
            };
            emit(&text, out.as_ref())?;
            Ok(true)
        }
        Cmd::Potential { triple, dim, out } => {
            let t = parse_triple(&triple)?;
            let dir = out_dir(None);
            let record = batch::potential_record(&t, dim, dir.as_deref())?;
            let text = serde_json::to_string_pretty(&record)? + "\n";
            emit(&text, out.as_ref())?;
            Ok(true)
        }
        Cmd::Newton { triple, dim, out } => {
            let t = parse_triple(&triple)?;
            let text = batch::newton_json(&t, dim, None)?;
            emit(&text, out.as_ref())?;
            Ok(true)
        }
        Cmd::Verify {
            max,
            dims,
            out,
            workers,
            format,
        } => {
            let out = out_dir(out);
            let cfg = RunConfig {
                max_entry: max,
                dims,
                out: out.clone(),
                workers: default_workers(workers),
                format: format.into(),
            };
            let summary = batch::run_verify(&cfg)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
                Format::Table => batch::verify_table(&summary),
            };
            print!("{text}");
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
                fs::write(
                    dir.join("verify_report.json"),
                    serde_json::to_string_pretty(&summary)? + "\n",
                )?;
            }
            Ok(summary.all_pass())
        }
        Cmd::Distinguish {
            max,
            dim,
            out,
            workers,
            format,
        } => {
            let out = out_dir(out);
            let cfg = RunConfig {
                max_entry: max,
                dims: vec![dim],
                out: out.clone(),
                workers: default_workers(workers),
                format: format.into(),
            };
            let matrix = batch::run_distinguish(&cfg, dim)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&matrix)? + "\n",
                Format::Table => batch::distinguish_table(&matrix),
            };
            print!("{text}");
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
                fs::write(
                    dir.join(format!("distinguish_n{dim}.json")),
                    serde_json::to_string_pretty(&matrix)? + "\n",
                )?;
            }
            Ok(matrix.all_distinct_pairs_certified())
        }
        Cmd::Render { triple, dim, out } => {
            let t = parse_triple(&triple)?;
            let svg = batch::run_render(&t, dim)?;
            emit(&svg, out.as_ref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
