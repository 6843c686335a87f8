//! Command-line front end.
//!
//! Exit status: 0 on success or a positive verdict, 1 on a domain error or
//! a negative verdict, 2 on a usage or syntax error.

pub mod eval;
pub mod parse;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{asymptotic_integral, derive, lie_bracket, log_derivative, FieldContext};
use crate::conjugacy::{
    construct_conjugator, decide_powered, decide_transseries, verify_witness, PoweredVerdict, Verdict,
};
use crate::exponents::{DepthPolicy, Exponent, ExponentKind, LogLexExp, Monomial, RationalExp};
use crate::group::{compose, exp_map, invert_parabolic, log_map, star, GroupElement, ParabolicSeries};
use crate::series::Series;

pub use eval::evaluate;
pub use parse::{parse, Expr, SyntaxError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{input:?}: {source}")]
    Syntax { input: String, source: SyntaxError },
    #[error(transparent)]
    Kernel(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Kernel(_) => 1,
            CliError::Usage(_) | CliError::Syntax { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Field {
    /// Powered series with rational exponents
    K,
    /// Logarithmic transseries
    Tlog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "parconj",
    version,
    about = "Generalized power series, contracting derivations and parabolic conjugacy"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Field::K)]
    pub field: Field,
    /// Fixed log depth for the tlog field [default: 1]
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Adjoin log levels on demand (tlog only)
    #[arg(long = "extend-depth", global = true, value_enum, default_value_t = Switch::Off)]
    pub extend_depth: Switch,
    /// Truncation exponent: `-40`, `-81/2`, or coordinates `-40,1` for tlog
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub cutoff: Option<String>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Read further expressions from a file, one per line (`#` starts a comment line)
    #[arg(long = "in", global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Inputs {
    /// Series expressions, after all options
    #[arg(value_name = "EXPR", allow_hyphen_values = true)]
    pub exprs: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate EXPR to a series
    Eval(Inputs),
    /// Derivative of EXPR
    Derive(Inputs),
    /// Logarithmic derivative f'/f
    Logderive(Inputs),
    /// Lie bracket f g' - f' g of F and G
    Bracket(Inputs),
    /// Exponential map of a contracting F, printed as x + δ
    Exp(Inputs),
    /// Logarithm of a parabolic series x + δ
    LogMap(Inputs),
    /// Composition G ∘ P for a parabolic P
    Compose(Inputs),
    /// Multiplicative inverse, or compositional inverse with --parabolic
    Invert {
        #[arg(long)]
        parabolic: bool,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Group product F ∗ G
    Star(Inputs),
    /// Single-term asymptotic integral; exit 1 on the pseudo-gap
    Asymint(Inputs),
    /// Decide conjugacy of parabolic P and Q; exit 1 unless proved conjugate
    ConjCheck(Inputs),
    /// Construct a conjugator of parabolic P and Q; exit 1 unless conjugate
    ConjFind(Inputs),
    /// Check a witness W for parabolic P and Q; exit 1 if it fails
    Verify {
        /// W is a parabolic series rather than a contracting element
        #[arg(long)]
        parabolic: bool,
        #[command(flatten)]
        inputs: Inputs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Derive(_) => "derive",
            Command::Logderive(_) => "logderive",
            Command::Bracket(_) => "bracket",
            Command::Exp(_) => "exp",
            Command::LogMap(_) => "log-map",
            Command::Compose(_) => "compose",
            Command::Invert { .. } => "invert",
            Command::Star(_) => "star",
            Command::Asymint(_) => "asymint",
            Command::ConjCheck(_) => "conj-check",
            Command::ConjFind(_) => "conj-find",
            Command::Verify { .. } => "verify",
        }
    }

    fn inputs(&self) -> &Inputs {
        match self {
            Command::Invert { inputs, .. } | Command::Verify { inputs, .. } => inputs,
            Command::Eval(i)
            | Command::Derive(i)
            | Command::Logderive(i)
            | Command::Bracket(i)
            | Command::Exp(i)
            | Command::LogMap(i)
            | Command::Compose(i)
            | Command::Star(i)
            | Command::Asymint(i)
            | Command::ConjCheck(i)
            | Command::ConjFind(i) => i,
        }
    }

    fn arity(&self) -> usize {
        match self {
            Command::Bracket(_)
            | Command::Compose(_)
            | Command::Star(_)
            | Command::ConjCheck(_)
            | Command::ConjFind(_) => 2,
            Command::Verify { .. } => 3,
            _ => 1,
        }
    }
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub exit_code: i32,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json values always serialize"),
        }
    }
}

/// Text form of a series, with `O(m)` marking a truncation at `m`.
pub fn render<E: Exponent>(s: &Series<E>) -> String {
    match s.cutoff() {
        None => s.to_string(),
        Some(c) if s.terms().is_empty() => format!("O({})", Monomial(c)),
        Some(c) => format!("{s} + O({})", Monomial(c)),
    }
}

fn series_json<E: Exponent>(s: &Series<E>) -> Value {
    json!({ "text": render(s), "series": s.to_json() })
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut exprs = cli.command.inputs().exprs.clone();
    if let Some(flag) = exprs.iter().find(|e| e.starts_with("--")) {
        return Err(CliError::Usage(format!("option {flag} must come before the expressions")));
    }
    if let Some(path) = &cli.input {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        exprs.extend(content.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from));
    }
    let arity = cli.command.arity();
    if exprs.len() != arity {
        return Err(CliError::Usage(format!(
            "{} takes {arity} expression(s), got {}",
            cli.command.name(),
            exprs.len()
        )));
    }
    match cli.field {
        Field::K => {
            if cli.depth.is_some() || cli.extend_depth == Switch::On {
                return Err(CliError::Usage("--depth and --extend-depth apply to --field tlog only".into()));
            }
            dispatch(cli, &exprs, configure(cli, FieldContext::<RationalExp>::rational())?)
        }
        Field::Tlog => {
            let policy = match (cli.extend_depth, cli.depth) {
                (Switch::On, Some(_)) => {
                    return Err(CliError::Usage("--depth conflicts with --extend-depth on".into()))
                }
                (Switch::On, None) => DepthPolicy::Extendable,
                (Switch::Off, depth) => DepthPolicy::Fixed(depth.unwrap_or(1)),
            };
            dispatch(cli, &exprs, configure(cli, FieldContext::<LogLexExp>::loglex(policy))?)
        }
    }
}

fn configure<E: Exponent>(cli: &Cli, mut ctx: FieldContext<E>) -> Result<FieldContext<E>, CliError> {
    if let Some(spec) = &cli.cutoff {
        let cutoff = E::parse_spec(spec).map_err(|e| CliError::Usage(format!("--cutoff {spec}: {e}")))?;
        ctx = ctx.with_cutoff(cutoff);
    }
    if let Some(n) = cli.max_iter {
        ctx = ctx.with_max_iter(n);
    }
    Ok(ctx)
}

struct Session<E: Exponent> {
    ctx: FieldContext<E>,
}

impl<E: Exponent> Session<E> {
    fn series(&self, input: &str) -> Result<Series<E>, CliError> {
        let e = parse(input).map_err(|source| CliError::Syntax { input: input.to_string(), source })?;
        Ok(evaluate(&e, &self.ctx)?)
    }

    fn element(&self, input: &str) -> Result<GroupElement<E>, CliError> {
        Ok(GroupElement::new(self.series(input)?)?)
    }

    fn parabolic(&self, input: &str) -> Result<ParabolicSeries<E>, CliError> {
        Ok(ParabolicSeries::new(self.series(input)?)?)
    }
}

fn series_report<E: Exponent>(command: &str, s: &Series<E>) -> Report {
    Report { text: render(s), json: json!({ "command": command, "result": series_json(s) }), exit_code: 0 }
}

fn dispatch<E: Exponent>(cli: &Cli, exprs: &[String], ctx: FieldContext<E>) -> Result<Report, CliError> {
    let name = cli.command.name();
    let s = Session { ctx };
    let ctx = &s.ctx;
    let report = match &cli.command {
        Command::Eval(_) => series_report(name, &s.series(&exprs[0])?),
        Command::Derive(_) => series_report(name, &derive(&s.series(&exprs[0])?)),
        Command::Logderive(_) => series_report(name, &log_derivative(&s.series(&exprs[0])?, ctx)?),
        Command::Bracket(_) => series_report(name, &lie_bracket(&s.series(&exprs[0])?, &s.series(&exprs[1])?)),
        Command::Exp(_) => series_report(name, exp_map(&s.element(&exprs[0])?, ctx)?.series()),
        Command::LogMap(_) => series_report(name, log_map(&s.parabolic(&exprs[0])?, ctx)?.series()),
        Command::Compose(_) => series_report(name, &compose(&s.series(&exprs[0])?, &s.parabolic(&exprs[1])?, ctx)?),
        Command::Invert { parabolic: true, .. } => {
            series_report(name, invert_parabolic(&s.parabolic(&exprs[0])?, ctx)?.series())
        }
        Command::Invert { parabolic: false, .. } => series_report(name, &s.series(&exprs[0])?.invert(ctx)?),
        Command::Star(_) => series_report(name, star(&s.element(&exprs[0])?, &s.element(&exprs[1])?, ctx)?.series()),
        Command::Asymint(_) => {
            let a = asymptotic_integral(&s.series(&exprs[0])?, ctx)?;
            let mut text = a.term.to_string();
            if a.extended() {
                write!(text, "\ndepth: {} -> {}", a.input_depth, a.result_depth).unwrap();
            }
            let json = json!({
                "command": name,
                "result": series_json(&Series::from_terms(vec![a.term.clone()], None)),
                "input_depth": a.input_depth,
                "result_depth": a.result_depth,
                "extended": a.extended(),
            });
            Report { text, json, exit_code: 0 }
        }
        Command::ConjCheck(_) => {
            let (p, q) = (s.parabolic(&exprs[0])?, s.parabolic(&exprs[1])?);
            let (delta, epsilon) = (p.delta(), q.delta());
            let (verdict, positive) = match E::KIND {
                ExponentKind::LogLex => {
                    let yes = decide_transseries(&delta, &epsilon)?;
                    (if yes { "Conjugate" } else { "NotConjugate" }.to_string(), yes)
                }
                ExponentKind::Rational => {
                    let v = decide_powered(&delta, &epsilon, ctx)?;
                    (v.to_string(), v == PoweredVerdict::SufficientYes)
                }
            };
            Report {
                text: verdict.clone(),
                json: json!({ "command": name, "verdict": verdict }),
                exit_code: if positive { 0 } else { 1 },
            }
        }
        Command::ConjFind(_) => {
            let g = log_map(&s.parabolic(&exprs[0])?, ctx)?;
            let f = log_map(&s.parabolic(&exprs[1])?, ctx)?;
            let out = construct_conjugator(&f, &g, ctx)?;
            let mut text = format!("verdict: {}\ncutoff: {}\n", out.verdict, Monomial(&out.cutoff));
            if let Some(w) = &out.witness {
                writeln!(text, "witness: {}", render(w.series())).unwrap();
            }
            if let Some(w) = &out.witness_series {
                writeln!(text, "witness series: {}", render(w.series())).unwrap();
            }
            if let Some(o) = &out.obstruction {
                writeln!(text, "obstruction: {} at {}", o.kind, Monomial(&o.exponent)).unwrap();
            }
            writeln!(text, "depth: {} -> {}", out.input_depth, out.depth).unwrap();
            writeln!(text, "trace: {} step(s)", out.trace.len()).unwrap();
            for t in &out.trace {
                let mark = if t.extended { " (depth extended)" } else { "" };
                writeln!(text, "  {}: residual {}, correction {}{mark}", t.step, t.residual, t.correction).unwrap();
            }
            let mut json = out.to_json();
            json["command"] = json!(name);
            Report {
                text: text.trim_end().to_string(),
                json,
                exit_code: if out.verdict == Verdict::Conjugate { 0 } else { 1 },
            }
        }
        Command::Verify { parabolic, .. } => {
            let g = log_map(&s.parabolic(&exprs[0])?, ctx)?;
            let f = log_map(&s.parabolic(&exprs[1])?, ctx)?;
            let phi = if *parabolic { log_map(&s.parabolic(&exprs[2])?, ctx)? } else { s.element(&exprs[2])? };
            let ok = verify_witness(&f, &g, &phi, ctx);
            Report {
                text: if ok { "verified" } else { "not verified" }.to_string(),
                json: json!({ "command": name, "verified": ok, "cutoff": ctx.cutoff.to_json() }),
                exit_code: if ok { 0 } else { 1 },
            }
        }
    };
    Ok(report)
}
