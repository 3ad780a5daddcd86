//! `sympack` command-line front end.
//!
//! Every command prints one JSON document (CSV for `atlas`). With `--json`
//! the document is wrapped in a [`RunReport`] that echoes the inputs and
//! records the tool version and precision settings.
//!
//! Exit codes: 0 success, accept or certified; 1 reject or not certified;
//! 2 invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use sympack_core::certify::{self, Assignment, Mode, Target};
use sympack_core::cremona::{self, BallSemantics, PackingVector};
use sympack_core::lattice::{self, BlowupForm};
use sympack_core::planner::{self, Polarization};
use sympack_core::rational::{self, Rational};
use sympack_core::{weights, Error, ToricDomain, DEFAULT_PRECISION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Largest expansion listed weight by weight; longer ones only as blocks.
const MAX_LISTED_WEIGHTS: u64 = 100_000;

const AFTER_HELP: &str = "\
EXAMPLES:
    $ sympack weights 5/2
    $ sympack decide --mu 1 --balls 3/5,3/5
    $ sympack certify --target \"T(3/2,3/2,1,1)\" --balls 19/100x10
    $ sympack atlas --amin 11/10 --amax 10 --step 1/10 > atlas.csv

ENVIRONMENT:
    SYMPACK_PRECISION
        Default binary precision for square-root enclosures (overridden
        by --precision).
";

#[derive(Parser, Debug)]
#[command(
    name = "sympack",
    version,
    about = "Exact packing-stability toolkit for symplectic 4-manifolds"
)]
#[command(after_help = AFTER_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Bits of precision for square roots
    #[arg(long, global = true, env = "SYMPACK_PRECISION", default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,

    /// Threshold mode: conservative halves the constructed bound
    #[arg(long, global = true, default_value = "conservative")]
    pub mode: Mode,

    /// Wrap output in a report with inputs, version and precision
    #[arg(long, global = true)]
    pub json: bool,

    /// Include reduction traces
    #[arg(long, global = true)]
    pub trace: bool,

    /// Record wall time in the report (makes it non-deterministic)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weight expansion w(a) of E(1, a)
    Weights {
        /// Rational a >= 1
        a: String,
    },
    /// Volume of B(c), E(a,b), T(a,b,alpha,beta) or P2(mu)
    Volume { domain: String },
    /// Bracket d_Omega of a blow-up of P2(1)
    Dstar {
        #[arg(long)]
        lambdas: String,
        /// Largest k enumerated; 0 skips the search
        #[arg(long, default_value_t = 8)]
        search_kmax: i64,
    },
    /// Do balls of the given capacities pack P2(mu)?
    Decide {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        balls: String,
        /// Closed balls (strict volume inequality)
        #[arg(long)]
        closed: bool,
    },
    /// Largest c such that n open balls of capacity c pack P2(1)
    MaxEqualBall {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1/1000000000")]
        tol: String,
    },
    /// Certify a ball packing below the stability threshold
    Certify {
        /// E(a,b), B(c), T(a,b,alpha,beta) or Blowup(l1,...,lp)
        #[arg(long)]
        target: String,
        #[arg(long)]
        balls: String,
    },
    /// Exact decision for balls into E(1, a)
    EllipsoidDecide {
        #[arg(short, long)]
        a: String,
        #[arg(long)]
        balls: String,
    },
    /// Check area budgets of ellipsoids placed along curve components
    DirectedCheck {
        /// JSON file {"components": [...], "assignments": [...]}
        input: PathBuf,
    },
    /// Decompose along a singular polarization and optionally place balls
    Decompose {
        #[arg(long)]
        polarization: PathBuf,
        #[arg(long)]
        balls: Option<PathBuf>,
    },
    /// CSV table of bounds for E(1, a) over a grid of a
    Atlas {
        #[arg(long)]
        amin: String,
        #[arg(long)]
        amax: String,
        #[arg(long)]
        step: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Weights { .. } => "weights",
            Command::Volume { .. } => "volume",
            Command::Dstar { .. } => "dstar",
            Command::Decide { .. } => "decide",
            Command::MaxEqualBall { .. } => "max-equal-ball",
            Command::Certify { .. } => "certify",
            Command::EllipsoidDecide { .. } => "ellipsoid-decide",
            Command::DirectedCheck { .. } => "directed-check",
            Command::Decompose { .. } => "decompose",
            Command::Atlas { .. } => "atlas",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PrecisionSettings {
    pub bits: u32,
    pub decimal_digits: usize,
    pub rounding: &'static str,
    pub mode: Mode,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: Value,
    pub outputs: Value,
    pub tool_version: &'static str,
    pub precision: PrecisionSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

struct Outcome {
    inputs: Value,
    outputs: Value,
    accepted: bool,
    csv: Option<String>,
}

impl Outcome {
    fn new(inputs: Value, outputs: impl Serialize, accepted: bool) -> Result<Self, Error> {
        Ok(Outcome {
            inputs,
            outputs: to_value(outputs)?,
            accepted,
            csv: None,
        })
    }
}

fn to_value(x: impl Serialize) -> Result<Value, Error> {
    serde_json::to_value(x).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T, Error> {
    serde_json::from_value(v).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

/// A JSON ball file: a list of capacity strings (each may use `cxn`), or an
/// object with such a list under `"balls"`.
fn read_balls(path: &Path) -> Result<Vec<Rational>, Error> {
    let v = read_json(path)?;
    let list = match v {
        Value::Object(mut m) => m.remove("balls").unwrap_or(Value::Null),
        other => other,
    };
    let items: Vec<String> = from_value(list, "ball file")?;
    let mut out = Vec::new();
    for item in items {
        out.extend(rational::parse_list(&item)?);
    }
    Ok(out)
}

fn strs(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn execute(cmd: &Command, g: &Global) -> Result<Outcome, Error> {
    let prec = g.precision;
    match cmd {
        Command::Weights { a } => {
            let a = rational::parse(a)?;
            let w = weights::weight_sequence(&a)?;
            let blocks: Vec<(String, u64)> = w.blocks().iter().map(|(x, n)| (x.to_string(), *n)).collect();
            let mut out = json!({
                "a": a.to_string(),
                "p": w.len(),
                "sum": w.sum().to_string(),
                "sum_sq": w.sum_of_squares().to_string(),
                "blocks": blocks,
            });
            if w.len() <= MAX_LISTED_WEIGHTS {
                out["weights"] = json!(strs(&w.to_vec()));
            }
            Outcome::new(json!({ "a": a.to_string() }), out, true)
        }
        Command::Volume { domain } => {
            let d: ToricDomain = domain.parse()?;
            let v = d.volume()?;
            let out = json!({ "domain": d.to_string(), "volume": v.to_string() });
            Outcome::new(json!({ "domain": domain }), out, true)
        }
        Command::Dstar { lambdas, search_kmax } => {
            let ls = rational::parse_list(lambdas)?;
            let form = BlowupForm::new(ls.clone())?;
            let k = (*search_kmax > 0).then_some(*search_kmax);
            let bracket = lattice::d_omega_bracket(&form, k, prec)?;
            let out = json!({
                "p": form.p(),
                "kappa_sq": form.kappa_sq().to_string(),
                "volume": form.volume().to_string(),
                "lower": bracket.lower,
                "upper": bracket.upper,
            });
            Outcome::new(json!({ "lambdas": strs(&ls), "search_kmax": search_kmax }), out, true)
        }
        Command::Decide { mu, balls, closed } => {
            let mu = rational::parse(mu)?;
            let ls = rational::parse_list(balls)?;
            if mu <= rational::int(0) {
                return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
            }
            if let Some(b) = ls.iter().find(|b| **b < rational::int(0)) {
                return Err(Error::InvalidInput(format!("ball capacity {b} is negative")));
            }
            let semantics = if *closed {
                BallSemantics::Closed
            } else {
                BallSemantics::Open
            };
            let trace = cremona::reduce_with(&PackingVector::new(mu.clone(), ls.clone()), semantics);
            let accepted = trace.verdict.is_accepted();
            let inputs = json!({ "mu": mu.to_string(), "balls": strs(&ls), "closed": closed });
            Outcome::new(inputs, trace_output(&trace, g.trace)?, accepted)
        }
        Command::MaxEqualBall { n, tol } => {
            let tol = rational::parse(tol)?;
            if tol <= rational::int(0) {
                return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
            }
            if *n == 0 {
                return Err(Error::InvalidInput("n must be at least 1".into()));
            }
            let c = cremona::max_equal_ball(*n, &tol);
            let out = json!({
                "n": n,
                "capacity": c.to_string(),
                "decimal": rational::to_decimal_floor(&c, 12),
                "tolerance": tol.to_string(),
            });
            Outcome::new(json!({ "n": n, "tol": tol.to_string() }), out, true)
        }
        Command::Certify { target, balls } => {
            let t: Target = target.parse()?;
            let ls = rational::parse_list(balls)?;
            let cert = certify::certify_packing(&t, &ls, g.mode, prec)?;
            let accepted = cert.is_certified();
            let inputs = json!({ "target": t.to_string(), "balls": strs(&ls) });
            Outcome::new(inputs, cert, accepted)
        }
        Command::EllipsoidDecide { a, balls } => {
            let a = rational::parse(a)?;
            let ls = rational::parse_list(balls)?;
            let trace = certify::decide_balls_into_ellipsoid(&a, &ls)?;
            let accepted = trace.verdict.is_accepted();
            let inputs = json!({ "a": a.to_string(), "balls": strs(&ls) });
            Outcome::new(inputs, trace_output(&trace, g.trace)?, accepted)
        }
        Command::DirectedCheck { input } => {
            let v = read_json(input)?;
            let components: Vec<String> = from_value(v["components"].clone(), "components")?;
            let components = components
                .iter()
                .map(|s| rational::parse(s))
                .collect::<Result<Vec<_>, _>>()?;
            let assignments: Vec<Assignment> = from_value(v["assignments"].clone(), "assignments")?;
            let check = certify::check_directed_hypotheses(&components, &assignments)?;
            let accepted = check.satisfied;
            Outcome::new(v, check, accepted)
        }
        Command::Decompose { polarization, balls } => {
            let raw = read_json(polarization)?;
            let pol: Polarization = from_value(raw.clone(), "polarization")?;
            let report = planner::validate_polarization(&pol);
            let plan = planner::plan(&pol, g.mode, prec)?;
            let mut out = json!({ "validation": report, "plan": plan });
            let mut inputs = json!({ "polarization": raw });
            let mut accepted = true;
            if let Some(path) = balls {
                let ls = read_balls(path)?;
                let placed = planner::place_balls(&pol, &plan, &ls, g.mode, prec)?;
                accepted = placed.all_certified;
                inputs["balls"] = json!(strs(&ls));
                out["placement"] = to_value(placed)?;
            }
            Ok(Outcome {
                inputs,
                outputs: out,
                accepted,
                csv: None,
            })
        }
        Command::Atlas { amin, amax, step } => {
            let (lo, hi, st) = (rational::parse(amin)?, rational::parse(amax)?, rational::parse(step)?);
            let rows = certify::atlas(&lo, &hi, &st, prec)?;
            let mut csv = String::from("a,conservative,optimistic,p,kappa_sq\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.a,
                    r.conservative.to_decimal(),
                    r.optimistic.to_decimal(),
                    r.p,
                    r.kappa_sq
                ));
            }
            let inputs = json!({ "amin": lo.to_string(), "amax": hi.to_string(), "step": st.to_string() });
            let mut o = Outcome::new(inputs, &rows, true)?;
            o.csv = Some(csv);
            Ok(o)
        }
    }
}

fn trace_output(trace: &cremona::ReductionTrace, with_steps: bool) -> Result<Value, Error> {
    let mut v = to_value(trace)?;
    v["moves"] = json!(trace.moves());
    v["step_count"] = json!(trace.steps.len());
    v["terminal"] = to_value(trace.terminal())?;
    if let Value::Object(m) = &mut v {
        if !with_steps {
            m.remove("steps");
        }
        if let Some(Value::String(r)) = m.get("reason") {
            let readable = r.replace('_', " ");
            m.insert("reason".into(), Value::String(readable));
        }
    }
    Ok(v)
}

/// Parses `args`, runs the command and writes its output to `out`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let g = &cli.global;
    let start = Instant::now();
    let result = execute(&cli.command, g);
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    match result {
        Err(e) => {
            if g.json {
                let _ = writeln!(
                    out,
                    "{}",
                    json!({ "command": cli.command.name(), "error": e.to_string() })
                );
            }
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
        Ok(o) => {
            let code = if o.accepted { EXIT_OK } else { EXIT_NEGATIVE };
            let text = if g.json {
                let report = RunReport {
                    command: cli.command.name(),
                    inputs: o.inputs,
                    outputs: o.outputs,
                    tool_version: env!("CARGO_PKG_VERSION"),
                    precision: PrecisionSettings {
                        bits: g.precision,
                        decimal_digits: (g.precision as usize * 30103) / 100_000,
                        rounding: "down",
                        mode: g.mode,
                    },
                    timing_ms: g.timing.then_some(elapsed),
                };
                serde_json::to_string_pretty(&report).expect("report serializes")
            } else if let Some(csv) = o.csv {
                csv.trim_end().to_string()
            } else {
                o.outputs.to_string()
            };
            if writeln!(out, "{text}").is_err() {
                return EXIT_INVALID;
            }
            code
        }
    }
}
