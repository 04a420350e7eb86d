//! `qcalc`: batch frontend for the quantum-calculus library.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 domain
//! error, 4 degree error.

mod commands;
mod config;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qcalc_core::algebra::Tower;
use qcalc_core::config::{FrameSpec, RationalText};
use qcalc_core::derivative::make_preset;
use qcalc_core::{parse_rational, FrameKind, QcalcError, QuantumFrame, Rational};

use commands::{AlgebraArgs, AlgebraOp, FamilyChoice, Instance};
use config::{FrameArgs, RunConfig};
use report::{Format, Report};
use verify::{Sizes, Suite};

#[derive(Debug, Parser)]
#[command(name = "qcalc", version, about = "Generalized (sigma, tau) quantum calculus in exact rational arithmetic")]
struct Cli {
    /// JSON run config or frame definition
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(flatten)]
    frame: FrameArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate D^k f at one or more points
    Derive {
        /// Polynomial in x, e.g. "x^2 - 3/2*x + 1"
        #[arg(long = "fn")]
        function: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Dump the theta, zeta and Lambda basis polynomials at a point
    Basis {
        #[arg(long, value_enum, default_value_t = FamilyChoice::All)]
        family: FamilyChoice,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Expand a D-polynomial in the Lambda basis and check the reconstruction
    Taylor {
        #[arg(long = "fn")]
        function: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// Degree bound n
        #[arg(long, visible_alias = "n")]
        degree: Option<usize>,
        /// Orbit nodes used for the reconstruction check
        #[arg(long)]
        samples: Option<usize>,
        /// Additional reconstruction points
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Run a property suite and report every residual
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Random cases for the Leibniz suite (the Taylor suite uses at most 16)
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Finite difference operators: right inverses, gradations, Taylor identity
    Algebra {
        #[arg(long, value_enum, default_value_t = AlgebraOp::Taylor)]
        op: AlgebraOp,
        #[command(flatten)]
        instance: InstanceArgs,
        /// Comma-separated vector for --op expand
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Vec<String>,
    },
}

#[derive(Debug, clap::Args)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value_t = Instance::Forward)]
    instance: Instance,
    #[arg(long, default_value_t = 2)]
    stride: usize,
    /// Dimension N of the sequence space
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Order m of the Taylor identity, gradation depth or polynomial degree
    #[arg(long, default_value_t = 3)]
    m: usize,
}

enum Failure {
    Usage(String),
    Core(QcalcError),
}

impl From<QcalcError> for Failure {
    fn from(e: QcalcError) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &QcalcError) -> u8 {
    use QcalcError::*;
    match e {
        ZeroTension { .. } | DomainError { .. } | NoInverse | GridDegenerate(_) | GridExhausted { .. } => 3,
        DegreeExceeded(_) | NotAPolynomial(_) | DimensionOverflow { .. } => 4,
        Parse(_)
        | InvalidParams(_)
        | BadShape(_)
        | UnknownLabel(_)
        | MultiLabelUnsupported(_)
        | InsufficientSamples { .. } => 2,
        _ => 1,
    }
}

fn points(raw: &[String], fallback: &[RationalText]) -> Result<Vec<Rational>, Failure> {
    if raw.is_empty() {
        return Ok(fallback.iter().map(|r| r.0.clone()).collect());
    }
    raw.iter().map(|s| parse_rational(s.trim()).map_err(Failure::from)).collect()
}

fn point(raw: &Option<String>, fallback: &Option<RationalText>, default: Option<i64>) -> Result<Rational, Failure> {
    match (raw, fallback, default) {
        (Some(s), _, _) => Ok(parse_rational(s)?),
        (None, Some(r), _) => Ok(r.0.clone()),
        (None, None, Some(d)) => Ok(Rational::from_integer(d.into())),
        _ => Err(Failure::Usage("a point is required (--at)".into())),
    }
}

fn frame_of(spec: &Option<FrameSpec>) -> Result<QuantumFrame<Rational>, Failure> {
    match spec {
        Some(spec) => Ok(spec.to_frame()?),
        None => Err(Failure::Usage("no frame given: pass --kind with its parameters, or --config".into())),
    }
}

fn standard_presets() -> Vec<QuantumFrame<Rational>> {
    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    [
        FrameKind::H { h: r(1, 1) },
        FrameKind::H { h: r(1, 2) },
        FrameKind::Q { q: r(2, 1) },
        FrameKind::Q { q: r(3, 2) },
        FrameKind::HSymmetric { h: r(1, 1) },
        FrameKind::QSymmetric { q: r(2, 1) },
    ]
    .iter()
    .map(|k| make_preset(k).expect("standard presets are valid"))
    .collect()
}

fn run(cli: &Cli) -> Result<(Report, Option<PathBuf>), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.frame = cli.frame.apply(cfg.frame.take())?;
    let out = cli.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from));

    let report = match &cli.command {
        Command::Derive { function, at, order } => {
            let expr =
                function.clone().or(cfg.function.clone()).ok_or_else(|| Failure::Usage("--fn is required".into()))?;
            let pts = points(at, &cfg.points)?;
            if pts.is_empty() {
                return Err(Failure::Usage("--at is required".into()));
            }
            let order = order.or(cfg.order).unwrap_or(1);
            let frame = frame_of(&cfg.frame)?;
            cfg.command = Some("derive".into());
            cfg.function = Some(expr.clone());
            cfg.points = pts.iter().cloned().map(RationalText).collect();
            cfg.order = Some(order);
            commands::run_derive(new_report("derive", &cfg), &frame, &expr, &pts, order)?
        }
        Command::Basis { family, max_order, base, at } => {
            let frame = frame_of(&cfg.frame)?;
            let base = point(base, &cfg.base, Some(1))?;
            let at = point(at, &cfg.points.first().cloned(), None)?;
            let max_order = max_order.or(cfg.max_order).unwrap_or(4);
            cfg.command = Some("basis".into());
            cfg.base = Some(RationalText(base.clone()));
            cfg.points = vec![RationalText(at.clone())];
            cfg.max_order = Some(max_order);
            commands::run_basis(new_report("basis", &cfg), &frame, *family, max_order, &base, &at)?
        }
        Command::Taylor { function, base, degree, samples, at } => {
            let expr =
                function.clone().or(cfg.function.clone()).ok_or_else(|| Failure::Usage("--fn is required".into()))?;
            let frame = frame_of(&cfg.frame)?;
            let base = point(base, &cfg.base, Some(1))?;
            let degree = degree.or(cfg.max_order).unwrap_or(6);
            let samples = samples.or(cfg.samples).unwrap_or(12);
            let extra = points(at, &cfg.points)?;
            cfg.command = Some("taylor".into());
            cfg.function = Some(expr.clone());
            cfg.base = Some(RationalText(base.clone()));
            cfg.max_order = Some(degree);
            cfg.samples = Some(samples);
            commands::run_taylor(new_report("taylor", &cfg), &frame, &expr, &base, degree, samples, &extra)?
        }
        Command::Verify { suite, max_order, samples, cases, seed, instance } => {
            let sizes = Sizes {
                max_order: max_order.or(cfg.max_order).unwrap_or(8),
                samples: samples.or(cfg.samples).unwrap_or(12),
                cases: cases.or(cfg.cases).unwrap_or(200),
                seed: seed.or(cfg.seed).unwrap_or(0),
            };
            cfg.command = Some(format!("verify {suite:?}").to_lowercase());
            cfg.max_order = Some(sizes.max_order);
            cfg.samples = Some(sizes.samples);
            cfg.cases = Some(sizes.cases);
            cfg.seed = Some(sizes.seed);
            let mut report = new_report("verify", &cfg);
            if suite.needs_frame() {
                match &cfg.frame {
                    Some(_) => verify::run_frame_suites(&mut report, *suite, &frame_of(&cfg.frame)?, &sizes, ""),
                    None => {
                        for frame in standard_presets() {
                            let prefix = format!("{}/", frame.name);
                            verify::run_frame_suites(&mut report, *suite, &frame, &sizes, &prefix);
                        }
                    }
                }
            }
            if matches!(suite, Suite::Algebra | Suite::All) {
                let tower = Tower::difference(instance.instance.kind(instance.stride), instance.n)?;
                verify::algebra(&mut report, &tower, instance.m);
            }
            report
        }
        Command::Algebra { op, instance, vector } => {
            let vector = if vector.is_empty() { None } else { Some(points(vector, &[])?) };
            cfg.command = Some("algebra".into());
            let args = AlgebraArgs {
                kind: instance.instance.kind(instance.stride),
                n: instance.n,
                m: instance.m,
                op: *op,
                vector,
            };
            commands::run_algebra(new_report("algebra", &cfg), &args)?
        }
    };
    Ok((report.finish(), out))
}

fn new_report(command: &str, cfg: &RunConfig) -> Report {
    Report::new(command, serde_json::to_value(cfg).expect("run config serializes"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(&cli);
    let code = match outcome {
        Ok((report, out)) => {
            let text = report.render(cli.format);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if report.passed {
                0
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                eprintln!("{failed} check(s) failed");
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    eprintln!("elapsed: {:.1?}", start.elapsed());
    ExitCode::from(code)
}
