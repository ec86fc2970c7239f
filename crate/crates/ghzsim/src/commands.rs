//! Subcommand implementations. Each returns the text for standard output and
//! an exit status: 0 success, 1 verification or simulation failure, 2 usage
//! error.

use std::fmt::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};

use ghzsim_core::protocol::{decode, SampledRun, Sampler};
use ghzsim_core::verify::{self, Clock, LabelResult, VerificationReport};
use ghzsim_core::{Error, GhzLabel, Outcome, Register, SystemShape};

use crate::cli::{ClassifyArgs, Cli, Command, CommonArgs, Format, RunArgs};
use crate::render::{fmt_num, json_num, render_oam, render_spatial, tables_json, tables_markdown};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct Output {
    pub status: u8,
    pub stdout: String,
}

#[derive(Debug)]
pub struct CliError {
    pub status: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { status: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Input(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self { status, message: e.to_string() }
    }
}

impl From<rayon::ThreadPoolBuildError> for CliError {
    fn from(e: rayon::ThreadPoolBuildError) -> Self {
        Self { status: EXIT_FAILURE, message: e.to_string() }
    }
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Tables(args) => cmd_tables(args),
        Command::Run(args) => cmd_run(args),
        Command::Classify(args) => cmd_classify(args),
    }
}

fn shape_of(args: &CommonArgs) -> Result<SystemShape, CliError> {
    if args.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    Ok(SystemShape::with_caps(args.dim, args.photons, args.dense_cap, args.label_cap)?)
}

struct StdClock(Instant);

impl Clock for StdClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

fn verify_report(shape: SystemShape, jobs: usize) -> Result<VerificationReport, CliError> {
    let clock = StdClock(Instant::now());
    if jobs == 1 {
        return Ok(verify::verify_shape_with(shape, &clock, |labels, check| {
            labels.iter().map(check).collect()
        })?);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| {
        verify::verify_shape_with(shape, &clock, |labels, check| {
            labels.par_iter().map(check).collect::<Vec<LabelResult>>()
        })
    })?)
}

pub fn cmd_verify(args: &CommonArgs) -> Result<Output, CliError> {
    let shape = shape_of(args)?;
    let report = verify_report(shape, args.jobs)?;
    let status = if report.passed() { EXIT_OK } else { EXIT_FAILURE };
    let stdout = match args.format {
        Format::Markdown => verify_markdown(&report),
        Format::Json => serde_json::to_string_pretty(&verify_json(&report)).expect("json") + "\n",
    };
    Ok(Output { status, stdout })
}

fn verify_markdown(report: &VerificationReport) -> String {
    let shape = report.shape;
    let mut out = String::new();
    let _ = writeln!(out, "# GHZ measurement verification ({shape})\n");
    let _ = writeln!(
        out,
        "{}/{} states distinguished. Overall: {}\n",
        report.labels_distinguished,
        report.labels_total,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    out.push_str("| check | result | worst deviation | runtime (s) | detail |\n|---|---|---|---|---|\n");
    for c in &report.checks {
        let result = match (c.skipped, c.passed) {
            (true, _) => "skipped",
            (false, true) => "pass",
            (false, false) => "FAIL",
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            c.name,
            result,
            fmt_num(c.worst_deviation),
            fmt_num(c.runtime.as_secs_f64()),
            c.detail.replace('|', "\\|")
        );
    }
    out.push('\n');
    out.push_str(&tables_markdown(shape.d(), shape.n(), &report.parity_table, &report.phase_table));
    out
}

fn verify_json(report: &VerificationReport) -> Value {
    let shape = report.shape;
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "passed": c.passed,
                "skipped": c.skipped,
                "worst_deviation": json_num(c.worst_deviation),
                "runtime_seconds": json_num(c.runtime.as_secs_f64()),
                "detail": c.detail,
            })
        })
        .collect();
    let labels: Vec<Value> = report
        .labels
        .iter()
        .map(|l| {
            json!({
                "x": l.label.x,
                "k": l.label.k,
                "distinguished": l.distinguished,
                "oam_outcomes": l.oam_outcomes,
                "spatial_outcomes": l.spatial_outcomes,
            })
        })
        .collect();
    let (parity, phase) = tables_json(shape.d(), &report.parity_table, &report.phase_table);
    json!({
        "dim": shape.d(),
        "photons": shape.n(),
        "passed": report.passed(),
        "labels_total": report.labels_total,
        "labels_distinguished": report.labels_distinguished,
        "dense_checks_skipped": report.dense_checks_skipped,
        "worst_deviation": json_num(report.worst_deviation()),
        "checks": checks,
        "labels": labels,
        "parity_table": parity,
        "phase_table": phase,
    })
}

pub fn cmd_tables(args: &CommonArgs) -> Result<Output, CliError> {
    let shape = shape_of(args)?;
    let parity = verify::parity_table(shape).map_err(failure)?;
    let phase = verify::phase_table(shape).map_err(failure)?;
    let stdout = match args.format {
        Format::Markdown => tables_markdown(shape.d(), shape.n(), &parity, &phase),
        Format::Json => {
            let (p, k) = tables_json(shape.d(), &parity, &phase);
            let v = json!({"dim": shape.d(), "photons": shape.n(), "parity_table": p, "phase_table": k});
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    };
    Ok(Output { status: EXIT_OK, stdout })
}

/// Simulation errors after validation are failures, not usage errors.
fn failure(e: Error) -> CliError {
    CliError { status: EXIT_FAILURE, message: e.to_string() }
}

pub fn cmd_run(args: &RunArgs) -> Result<Output, CliError> {
    let shape = shape_of(&args.common)?;
    let label: GhzLabel = args
        .label
        .as_deref()
        .ok_or_else(|| CliError::usage("run needs --label x_1,...,x_{n-1}:k"))?
        .parse()?;
    label.validate(&shape)?;
    if args.shots == 0 {
        return Err(CliError::usage("--shots must be at least 1"));
    }
    let mut runner = SampledRun::new(shape, &label).map_err(failure)?;
    let mut sampler = Sampler::new(args.seed);
    let records: Vec<_> = (0..args.shots).map(|_| runner.shot(&mut sampler)).collect();
    let correct = records.iter().filter(|r| r.decoded == label).count();
    let accuracy = correct as f64 / records.len() as f64;
    let d = shape.d();

    let stdout = match args.common.format {
        Format::Markdown => {
            let mut out = String::new();
            for (i, r) in records.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "shot {}: oam={} spatial={} decoded={} match={}",
                    i + 1,
                    render_oam(&r.oam_outcome.levels, d),
                    render_spatial(&r.spatial_outcome.levels, d),
                    r.decoded,
                    r.decoded == label
                );
            }
            let _ = writeln!(
                out,
                "accuracy: {} ({correct}/{}) label={label} seed={}",
                fmt_num(accuracy),
                records.len(),
                args.seed
            );
            out
        }
        Format::Json => {
            let recs: Vec<Value> = records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    json!({
                        "shot": i + 1,
                        "oam": r.oam_outcome.levels,
                        "spatial": r.spatial_outcome.levels,
                        "decoded": {"x": r.decoded.x, "k": r.decoded.k},
                        "match": r.decoded == label,
                        "probability": json_num(r.probability),
                    })
                })
                .collect();
            let v = json!({
                "dim": d,
                "photons": shape.n(),
                "label": {"x": label.x, "k": label.k},
                "seed": args.seed,
                "shots": args.shots,
                "records": recs,
                "accuracy": json_num(accuracy),
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    };
    let status = if correct == records.len() { EXIT_OK } else { EXIT_FAILURE };
    Ok(Output { status, stdout })
}

fn parse_levels(s: &str, flag: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| CliError::usage(format!("{flag}: {t:?} is not a level")))
        })
        .collect()
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<Output, CliError> {
    let shape = shape_of(&args.common)?;
    let oam = Outcome::new(Register::Oam, parse_levels(&args.oam, "--oam")?);
    let spatial = Outcome::new(Register::Spatial, parse_levels(&args.spatial, "--spatial")?);
    let label = decode(&shape, &oam, &spatial)?;
    let stdout = match args.common.format {
        Format::Markdown => {
            let x: Vec<String> = label.x.iter().map(|v| v.to_string()).collect();
            format!("x=({}), k={}\n", x.join(","), label.k)
        }
        Format::Json => {
            let v = json!({
                "dim": shape.d(),
                "photons": shape.n(),
                "oam": oam.levels,
                "spatial": spatial.levels,
                "label": {"x": label.x, "k": label.k},
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    };
    Ok(Output { status: EXIT_OK, stdout })
}
