//! Command-line front end: JSON files in, one JSON document out.
//!
//! Exit status is 0 on success, 1 when `verify` finds a failing check and 2
//! for any error, which is reported as `{"code": ..., "message": ...}`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::curve::{AdmissiblePolynomial, CurveJson, DivisorJson};
use crate::error::{Error, Result};
use crate::kleinian::{EvalBundleJson, KleinianContext};
use crate::periods::{compute_period_data, PeriodData, PeriodDataJson, PeriodOptions};
use crate::theta::Vec2;
use crate::tol::Tolerances;
use crate::verify::{jet_deviation, measure_jets, run_suite, Jet};
use num_complex::Complex64 as C64;

#[derive(Debug, Parser)]
#[command(
    name = "kleinian2",
    version,
    about = "Genus-2 Kleinian functions for y² = f(x)",
    long_about = "Genus-2 Kleinian functions for y² = f(x).\n\n\
        Curve files hold {\"coeffs\": [[re, im] × 7]} in ascending degree order. \
        Complex numbers are always [re, im] pairs.\n\n\
        Tolerance precedence: --tol-* flag, then KLEINIAN2_TOL (identity tolerance), then the built-in default.\n\n\
        Exit status: 0 success, 1 verification failure, 2 error (JSON {code, message} on stdout)."
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub tolerances: ToleranceFlags,
    /// Write the JSON result to this file instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ToleranceFlags {
    /// Relative |S| counted as a zero of S [default: 1e-6]
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_zero: Option<f64>,
    /// Abel / inversion round-trip tolerance [default: 1e-7]
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_rt: Option<f64>,
    /// Taylor-jet tolerance at the origin [default: 1e-7]
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_jet: Option<f64>,
    /// Identity tolerance, overriding KLEINIAN2_TOL [default: 1e-7]
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_id: Option<f64>,
    /// Symmetry tolerance for Ω [default: 1e-8]
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_sym: Option<f64>,
    /// Legendre-relation tolerance [default: 1e-8]
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_leg: Option<f64>,
}

impl ToleranceFlags {
    pub fn resolve(&self) -> Result<Tolerances> {
        let mut t = Tolerances::from_env();
        let slots = [
            (self.tol_zero, &mut t.zero, "tol-zero"),
            (self.tol_rt, &mut t.rt, "tol-rt"),
            (self.tol_jet, &mut t.jet, "tol-jet"),
            (self.tol_id, &mut t.id, "tol-id"),
            (self.tol_sym, &mut t.sym, "tol-sym"),
            (self.tol_leg, &mut t.leg, "tol-leg"),
        ];
        for (flag, slot, name) in slots {
            if let Some(v) = flag {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("--{name} must be a positive number")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute and certify period data
    Periods {
        /// Curve JSON file
        curve: PathBuf,
        /// Branch-point chain for the cycle basis, e.g. 4,3,2,1,0
        #[arg(long, value_delimiter = ',')]
        chain: Option<Vec<usize>>,
    },
    /// Evaluate S, S11, S12, S22, ℘ (and σ with --sigma) at a point
    Eval {
        #[command(flatten)]
        source: CurveSource,
        /// Point as re,im,re,im
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Also evaluate σ, ζ and the third derivatives of ℘ (Weierstrass form only)
        #[arg(long)]
        sigma: bool,
    },
    /// Abel map of a divisor
    Abel {
        #[command(flatten)]
        source: CurveSource,
        /// Divisor JSON file
        #[arg(long)]
        divisor: PathBuf,
    },
    /// Jacobi inversion of a point
    Invert {
        #[command(flatten)]
        source: CurveSource,
        /// Point as re,im,re,im
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Run the identity suite
    Verify {
        #[command(flatten)]
        source: CurveSource,
        /// Random seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated subset of checks
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Measure the order-2 jets of S, S11, S12, S22 at the origin
    Taylor {
        #[command(flatten)]
        source: CurveSource,
    },
}

#[derive(Debug, Args)]
pub struct CurveSource {
    /// Curve JSON file
    #[arg(long)]
    pub curve: PathBuf,
    /// Period data produced by `periods`, reused instead of recomputing
    #[arg(long, value_name = "FILE")]
    pub periods: Option<PathBuf>,
}

/// Result of one invocation: exit status and the JSON document.
#[derive(Debug, Clone, PartialEq)]
pub struct CliOutput {
    pub status: i32,
    pub stdout: String,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn load_curve(path: &Path) -> Result<AdmissiblePolynomial> {
    read_json::<CurveJson>(path)?.to_poly()
}

fn load_context(source: &CurveSource, tol: Tolerances) -> Result<KleinianContext> {
    let f = load_curve(&source.curve)?;
    let pd: PeriodData = match &source.periods {
        Some(p) => read_json::<PeriodDataJson>(p)?.to_data(&f)?,
        None => compute_period_data(&f, &PeriodOptions { chain: None, tolerances: tol })?,
    };
    KleinianContext::with_tolerances(&f, &pd, tol)
}

/// Parses `re,im,re,im`.
pub fn parse_z(text: &str) -> Result<Vec2> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("--z: {e}")))?;
    if parts.len() != 4 || parts.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "--z expects four finite numbers re,im,re,im".into(),
        ));
    }
    Ok(Vec2::new(C64::new(parts[0], parts[1]), C64::new(parts[2], parts[3])))
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Serialize)]
struct JetJson {
    value: [f64; 2],
    grad: [[f64; 2]; 2],
    hess: [[[f64; 2]; 2]; 2],
}

impl From<&Jet> for JetJson {
    fn from(j: &Jet) -> Self {
        JetJson {
            value: pair(j.value),
            grad: [pair(j.grad[0]), pair(j.grad[1])],
            hess: [
                [pair(j.hess[0][0]), pair(j.hess[0][1])],
                [pair(j.hess[1][0]), pair(j.hess[1][1])],
            ],
        }
    }
}

#[derive(Serialize)]
struct TaylorJson {
    #[serde(rename = "S")]
    s: JetJson,
    #[serde(rename = "S11")]
    s11: JetJson,
    #[serde(rename = "S12")]
    s12: JetJson,
    #[serde(rename = "S22")]
    s22: JetJson,
    max_deviation: f64,
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn execute(cfg: &CliConfig) -> Result<(i32, String)> {
    let tol = cfg.tolerances.resolve()?;
    match &cfg.command {
        Command::Periods { curve, chain } => {
            let f = load_curve(curve)?;
            let opts = PeriodOptions {
                chain: chain.clone(),
                tolerances: tol,
            };
            let pd = compute_period_data(&f, &opts)?;
            Ok((0, pretty(&PeriodDataJson::from_data(&pd))?))
        }
        Command::Eval { source, z, sigma } => {
            let z = parse_z(z)?;
            let ctx = load_context(source, tol)?;
            let bundle = ctx.eval_bundle(&z, *sigma)?;
            Ok((0, pretty(&EvalBundleJson::from(&bundle))?))
        }
        Command::Abel { source, divisor } => {
            let ctx = load_context(source, tol)?;
            let d = read_json::<DivisorJson>(divisor)?.to_divisor(&ctx.f)?;
            let z = ctx.abel_forward(&d)?;
            Ok((0, pretty(&json!({ "z": [pair(z[0]), pair(z[1])] }))?))
        }
        Command::Invert { source, z } => {
            let z = parse_z(z)?;
            let ctx = load_context(source, tol)?;
            let d = ctx.jacobi_invert(&z)?;
            Ok((0, pretty(&DivisorJson::from_divisor(&d))?))
        }
        Command::Verify {
            source,
            seed,
            checks,
        } => {
            let ctx = load_context(source, tol)?;
            let report = run_suite(&ctx, *seed, checks.as_deref())?;
            let status = if report.pass { 0 } else { 1 };
            Ok((status, pretty(&report)?))
        }
        Command::Taylor { source } => {
            let ctx = load_context(source, tol)?;
            let jets = measure_jets(&ctx)?;
            let out = TaylorJson {
                s: (&jets[0]).into(),
                s11: (&jets[1]).into(),
                s12: (&jets[2]).into(),
                s22: (&jets[3]).into(),
                max_deviation: jet_deviation(&jets),
            };
            Ok((0, pretty(&out)?))
        }
    }
}

fn error_output(code: &str, message: &str) -> CliOutput {
    let body = json!({ "code": code, "message": message });
    CliOutput {
        status: 2,
        stdout: format!("{body}\n"),
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => CliOutput {
                    status: if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    },
                    stdout: e.render().to_string(),
                },
                _ => error_output("UsageError", e.render().to_string().trim()),
            };
        }
    };
    let (status, text) = match execute(&cfg) {
        Ok(v) => v,
        Err(e) => return error_output(e.code(), &e.to_string()),
    };
    match &cfg.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => CliOutput {
                status,
                stdout: String::new(),
            },
            Err(e) => error_output("IoError", &format!("{}: {e}", path.display())),
        },
        None => CliOutput {
            status,
            stdout: text,
        },
    }
}
