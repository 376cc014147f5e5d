//! Command-line front end: analyze a system file, scan sampling periods,
//! print the discretization, or run the bundled demo systems.

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use netctrl::analyzer::{analyze_model, AnalysisReport, Verdict};
use netctrl::numkernel::{CMatrix, Tolerance};
use netctrl::oracle::{scan_csv, scan_periods};
use netctrl::sysmodel::{discretize, fixtures, parse_document, InputDocument, Model, ParseOptions};
use netctrl::Error;

pub const EXIT_CONTROLLABLE: i32 = 0;
pub const EXIT_UNCONTROLLABLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "netctrl", version, about = "Controllability of networked sampled-data systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output format (scan defaults to CSV text).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Relative rank cutoff.
    #[arg(long)]
    pub tol_rank: Option<f64>,
    /// Relative eigenvalue clustering radius.
    #[arg(long)]
    pub tol_eig: Option<f64>,
    /// Relative residual allowed for chain vectors.
    #[arg(long)]
    pub tol_chain: Option<f64>,
    /// Warn about unknown keys instead of rejecting the file.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide controllability of the system in FILE ("-" for stdin).
    Analyze {
        file: String,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze the system over a grid of sampling periods.
    Scan {
        file: String,
        #[arg(long)]
        h_min: f64,
        #[arg(long)]
        h_max: f64,
        #[arg(long)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Print the sampled matrices of the system.
    Discretize {
        file: String,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze one of the bundled example systems.
    Demo {
        #[arg(value_parser = ["s1", "s2", "s3", "s4"])]
        id: String,
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_)
            | Error::Validation { .. }
            | Error::NonSquare { .. }
            | Error::NonPositivePeriod(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidTolerance(_)
            | Error::ZeroWeight { .. } => EXIT_DATA,
            _ => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the tool; `argv[0]` is the program name. Returns the exit code.
pub fn run(argv: &[String], input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, input, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "netctrl: {}", f.message);
            f.code
        }
    }
}

fn load(file: &str, common: &Common, input: &mut dyn Read) -> Result<InputDocument, Failure> {
    let bytes = if file == "-" {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("cannot read stdin: {e}"),
        })?;
        buf
    } else {
        std::fs::read(PathBuf::from(file)).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("cannot read {file}: {e}"),
        })?
    };
    Ok(parse_document(&bytes, ParseOptions { lenient: common.lenient })?)
}

/// Defaults, then the file's tolerance block, then command-line flags.
fn tolerance(file: Option<Tolerance>, common: &Common) -> Result<Tolerance, Failure> {
    let mut tol = file.unwrap_or_default();
    if let Some(v) = common.tol_rank {
        tol.rank_rel = v;
    }
    if let Some(v) = common.tol_eig {
        tol.eig_cluster = v;
    }
    if let Some(v) = common.tol_chain {
        tol.chain_residual = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Controllable => EXIT_CONTROLLABLE,
        Verdict::Uncontrollable => EXIT_UNCONTROLLABLE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn emit_report(report: &AnalysisReport, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    write_out(out, &text)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("cannot write output: {e}"),
    })
}

fn warn_all(doc: &InputDocument, err: &mut dyn Write) {
    for w in &doc.warnings {
        let _ = writeln!(err, "netctrl: warning: {w}");
    }
}

fn execute(cmd: Command, input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Analyze { file, common } => {
            let doc = load(&file, &common, input)?;
            warn_all(&doc, err);
            let tol = tolerance(doc.tolerance, &common)?;
            let report = analyze_model(&doc.model, &tol)?;
            emit_report(&report, common.format.unwrap_or(Format::Json), out)?;
            Ok(verdict_code(report.verdict))
        }
        Command::Demo { id, common } => {
            let sys = fixtures::by_name(&id).ok_or_else(|| Failure {
                code: EXIT_USAGE,
                message: format!("unknown demo {id}"),
            })?;
            let tol = tolerance(None, &common)?;
            let report = analyze_model(&Model::Single(sys), &tol)?;
            emit_report(&report, common.format.unwrap_or(Format::Json), out)?;
            Ok(verdict_code(report.verdict))
        }
        Command::Scan {
            file,
            h_min,
            h_max,
            count,
            common,
        } => {
            let doc = load(&file, &common, input)?;
            warn_all(&doc, err);
            let tol = tolerance(doc.tolerance, &common)?;
            let rows = scan_periods(doc.model.base(), h_min, h_max, count, &tol)?;
            let text = match common.format.unwrap_or(Format::Text) {
                Format::Text => scan_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
            };
            write_out(out, &text)?;
            Ok(0)
        }
        Command::Discretize { file, common } => {
            let doc = load(&file, &common, input)?;
            warn_all(&doc, err);
            let ss = discretize(doc.model.base())?;
            let mats = [
                ("e_ah", &ss.e_ah),
                ("h_h", &ss.hh),
                ("b_h", &ss.bh),
                ("phi_s", &ss.phi_s),
                ("psi_s", &ss.psi_s),
            ];
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut obj = serde_json::Map::new();
                    obj.insert("h".into(), json!(ss.h));
                    for (name, m) in mats {
                        obj.insert(name.into(), matrix_json(m));
                    }
                    serde_json::to_string_pretty(&Value::Object(obj)).expect("json") + "\n"
                }
                Format::Text => {
                    let mut s = format!("h = {}\n", ss.h);
                    for (name, m) in mats {
                        s.push_str(&format!("{name} =\n{}", matrix_text(m)));
                    }
                    s
                }
            };
            write_out(out, &text)?;
            Ok(0)
        }
    }
}

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Real matrices as nested rows; complex ones with `[re, im]` entries.
fn matrix_json(m: &CMatrix) -> Value {
    let real = is_real(m);
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            if real {
                                json!(z.re)
                            } else {
                                json!([z.re, z.im])
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn matrix_text(m: &CMatrix) -> String {
    let real = is_real(m);
    let mut s = String::new();
    for i in 0..m.nrows() {
        s.push_str("  ");
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if real {
                s.push_str(&format!("{:>12.6}", z.re));
            } else {
                s.push_str(&format!("{:>12.6}{:+.6}j", z.re, z.im));
            }
        }
        s.push('\n');
    }
    s
}
