//! The `topobelief` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input document,
//! 3 capacity exceeded, 4 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::evidence::{parse_frame, QuantitativeEvidenceFrame, CAR_FRAME_JSON};
use crate::fusion::{
    belief_report, cell, delta_table, format_columns, justification_frame, validate_allocators, AllocationTable,
    Allocator, JustificationFrame, JustificationKind,
};
use crate::rational::Rational;
use crate::sets::StateSet;
use crate::verify::run_all;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "topobelief",
    version,
    about = "Degrees of belief from uncertain, conflicting evidence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the opens of the evidential topology and whether each is dense.
    Topology(Common),
    /// Print the mass of every subset of the evidence.
    Mass(Common),
    /// Print where each allocator sends every subset of the evidence.
    Allocate(Common),
    /// Print degrees of belief, uncertainty and normalization factors.
    Believe(Common),
    /// Run every consistency check on the frame.
    Verify(Common),
    /// Print the bundled driving example and both of its reports.
    Demo {
        /// Write the files into this directory instead of printing them.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Frame document (JSON).
    #[arg(long)]
    frame: PathBuf,
    /// `ds`, `sd` or `custom:<path>`.
    #[arg(long, default_value = "ds")]
    justification: String,
    /// Comma-separated list of `i`, `u`, `d`, `yager` or `custom:<path>`.
    #[arg(long, default_value = "i,u,d")]
    alloc: String,
    /// Propositions as state lists, e.g. `dp,do,dm;sp,dp`.
    #[arg(long, default_value = "")]
    props: String,
    /// Decimal places for rendered values.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=12))]
    precision: u8,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
    /// Print exact fractions instead of decimals.
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Json,
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapacityExceeded { .. } => EXIT_CAPACITY,
            _ => EXIT_INVALID_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    let text = match command {
        Command::Topology(c) => cmd_topology(&c)?,
        Command::Mass(c) => cmd_mass(&c)?,
        Command::Allocate(c) => cmd_allocate(&c)?,
        Command::Believe(c) => cmd_believe(&c)?,
        Command::Verify(c) => {
            let (text, passed) = cmd_verify(&c)?;
            emit(out, &text)?;
            return Ok(if passed { 0 } else { EXIT_VERIFICATION });
        }
        Command::Demo { out: dir } => cmd_demo(dir.as_deref())?,
    };
    emit(out, &text)?;
    Ok(0)
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| usage(format!("cannot write output: {e}")))
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_frame(c: &Common) -> std::result::Result<QuantitativeEvidenceFrame, Failure> {
    Ok(parse_frame(&read(&c.frame)?)?)
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn render(value: &Rational, precision: u8, exact: bool) -> String {
    if exact {
        value.to_string()
    } else {
        value.to_decimal(precision.into())
    }
}

fn parse_allocators(frame: &QuantitativeEvidenceFrame, spec: &str) -> std::result::Result<Vec<Allocator>, Failure> {
    let mut allocators = Vec::new();
    for name in spec.split(',').map(str::trim) {
        if let Some(path) = name.strip_prefix("custom:") {
            let path = Path::new(path);
            let label = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("custom")
                .to_string();
            let table = AllocationTable::from_json(frame, label, &read(path)?)?;
            allocators.push(Allocator::CustomTable(table));
        } else {
            let a = Allocator::builtin(name).ok_or_else(|| usage(format!("unknown allocator `{name}`")))?;
            allocators.push(a);
        }
    }
    let mut labels: Vec<&str> = allocators.iter().map(Allocator::label).collect();
    labels.sort_unstable();
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateName(w[0].to_string()).into());
    }
    if allocators.iter().any(|a| matches!(a, Allocator::CustomTable(_))) {
        let report = validate_allocators(frame, &allocators)?;
        if let Some(v) = report.violations.first() {
            return Err(Failure {
                code: EXIT_INVALID_INPUT,
                message: format!("invalid allocators: {}", v.describe(frame)),
            });
        }
    }
    Ok(allocators)
}

fn parse_justification(
    frame: &QuantitativeEvidenceFrame,
    spec: &str,
) -> std::result::Result<JustificationFrame, Failure> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Doc {
        opens: Vec<Vec<String>>,
    }
    let kind = match spec {
        "ds" | "DS" => JustificationKind::DempsterShafer,
        "sd" | "SD" => JustificationKind::StrongDenseness,
        _ => {
            let path = spec
                .strip_prefix("custom:")
                .ok_or_else(|| usage(format!("unknown justification frame `{spec}`")))?;
            let doc: Doc = serde_json::from_str(&read(Path::new(path))?)
                .map_err(|e| Failure::from(Error::MalformedDocument(e.to_string())))?;
            let sets = doc
                .opens
                .iter()
                .map(|names| frame.universe().set(names))
                .collect::<crate::Result<Vec<_>>>()?;
            JustificationKind::Custom(sets)
        }
    };
    Ok(justification_frame(frame, kind)?)
}

fn parse_props(frame: &QuantitativeEvidenceFrame, spec: &str) -> std::result::Result<Vec<StateSet>, Failure> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split(';')
        .map(|p| {
            let names: Vec<&str> = p.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
            Ok(frame.universe().set(names)?)
        })
        .collect()
}

fn cmd_topology(c: &Common) -> std::result::Result<String, Failure> {
    let frame = load_frame(c)?;
    let t = frame.topology();
    let n = t.neighborhoods();
    let opens: Vec<(StateSet, bool)> = t
        .open_masks()
        .iter()
        .map(|&o| (frame.universe().from_mask(o), n.is_dense(o)))
        .collect();
    Ok(match c.output {
        Output::Json => pretty(&json!({
            "count": opens.len(),
            "opens": opens
                .iter()
                .map(|(s, d)| json!({"set": s.names(), "dense": d}))
                .collect::<Vec<_>>(),
        })),
        Output::Table => {
            let mut lines = vec![vec!["Open".to_string(), "Dense".to_string()]];
            for (s, d) in &opens {
                lines.push(vec![s.to_string(), if *d { "yes" } else { "no" }.to_string()]);
            }
            format_columns(&lines, 2)
        }
    })
}

fn cmd_mass(c: &Common) -> std::result::Result<String, Failure> {
    let frame = load_frame(c)?;
    let table = delta_table(&frame)?;
    Ok(match c.output {
        Output::Json => pretty(&json!({
            "rows": table
                .iter()
                .map(|(s, v)| json!({
                    "evidence": s.indices().map(|k| frame.items()[k].name.clone()).collect::<Vec<_>>(),
                    "delta": cell(v, c.precision.into()),
                }))
                .collect::<Vec<_>>(),
        })),
        Output::Table => {
            let mut lines = vec![vec!["Evidence".to_string(), "δ".to_string()]];
            for (s, v) in &table {
                lines.push(vec![s.label(&frame), render(v, c.precision, c.exact)]);
            }
            format_columns(&lines, 1)
        }
    })
}

fn cmd_allocate(c: &Common) -> std::result::Result<String, Failure> {
    let frame = load_frame(c)?;
    let allocators = parse_allocators(&frame, &c.alloc)?;
    let table = delta_table(&frame)?;
    let contents = frame.content_masks();
    let full = frame.universe().full_mask();
    let image = |a: &Allocator, bits: u64| frame.universe().from_mask(a.image_mask(&contents, full, bits));
    Ok(match c.output {
        Output::Json => pretty(&json!({
            "allocators": allocators.iter().map(Allocator::label).collect::<Vec<_>>(),
            "rows": table
                .iter()
                .map(|(s, v)| {
                    let mut images = serde_json::Map::new();
                    for a in &allocators {
                        images.insert(a.label().to_string(), json!(image(a, s.bits()).names()));
                    }
                    json!({
                        "evidence": s.indices().map(|k| frame.items()[k].name.clone()).collect::<Vec<_>>(),
                        "delta": cell(v, c.precision.into()),
                        "images": images,
                    })
                })
                .collect::<Vec<_>>(),
        })),
        Output::Table => {
            let mut header = vec!["Evidence".to_string()];
            header.extend(allocators.iter().map(|a| a.label().to_string()));
            header.push("δ".to_string());
            let mut lines = vec![header];
            for (s, v) in &table {
                let mut line = vec![s.label(&frame)];
                line.extend(allocators.iter().map(|a| image(a, s.bits()).to_string()));
                line.push(render(v, c.precision, c.exact));
                lines.push(line);
            }
            format_columns(&lines, 1 + allocators.len())
        }
    })
}

fn cmd_believe(c: &Common) -> std::result::Result<String, Failure> {
    let frame = load_frame(c)?;
    let props = parse_props(&frame, &c.props)?;
    let allocators = parse_allocators(&frame, &c.alloc)?;
    let j = parse_justification(&frame, &c.justification)?;
    let report = belief_report(&frame, &allocators, &j, &props)?;
    Ok(match c.output {
        Output::Json => pretty(&report.to_json(c.precision.into())),
        Output::Table => report.to_table(c.precision.into(), c.exact),
    })
}

fn cmd_verify(c: &Common) -> std::result::Result<(String, bool), Failure> {
    let frame = load_frame(c)?;
    let allocators = parse_allocators(&frame, &c.alloc)?;
    let outcomes = run_all(&frame, &allocators)?;
    let passed = outcomes.iter().all(|o| o.passed);
    let text = match c.output {
        Output::Json => pretty(&json!({
            "passed": passed,
            "checks": outcomes
                .iter()
                .map(|o| {
                    let mut w = o.witness();
                    w["passed"] = json!(o.passed);
                    w
                })
                .collect::<Vec<_>>(),
        })),
        Output::Table => {
            let mut lines = vec![vec!["Check".to_string(), "Result".to_string()]];
            for o in &outcomes {
                lines.push(vec![
                    o.check.clone(),
                    if o.passed { "pass" } else { "FAIL" }.to_string(),
                ]);
            }
            let mut text = format_columns(&lines, 2);
            for o in outcomes.iter().filter(|o| !o.passed) {
                text.push_str(&format!("witness: {}\n", o.witness()));
            }
            text
        }
    };
    Ok((text, passed))
}

/// The driving example's propositions: the object is dynamic; it is a
/// pedestrian.
pub const DEMO_PROPOSITIONS: &str = "dp,do,dm;sp,dp";

fn demo_reports() -> std::result::Result<(String, String), Failure> {
    let frame = parse_frame(CAR_FRAME_JSON)?;
    let props = parse_props(&frame, DEMO_PROPOSITIONS)?;
    let allocators = [Allocator::Intersection, Allocator::Union, Allocator::MinDense];
    let report = |kind| -> std::result::Result<String, Failure> {
        let j = justification_frame(&frame, kind)?;
        Ok(belief_report(&frame, &allocators, &j, &props)?.to_table(2, false))
    };
    Ok((
        report(JustificationKind::DempsterShafer)?,
        report(JustificationKind::StrongDenseness)?,
    ))
}

fn cmd_demo(dir: Option<&Path>) -> std::result::Result<String, Failure> {
    let (car_a, car_b) = demo_reports()?;
    match dir {
        None => Ok(format!(
            "Frame:\n{CAR_FRAME_JSON}\nCar A (every argument):\n{car_a}\nCar B (dense arguments only):\n{car_b}"
        )),
        Some(dir) => {
            let files = [
                ("car.json", CAR_FRAME_JSON),
                ("car-a.txt", &car_a),
                ("car-b.txt", &car_b),
            ];
            fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
            let mut listing = String::new();
            for (name, body) in files {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
                listing.push_str(&format!("{}\n", path.display()));
            }
            Ok(listing)
        }
    }
}
