//! Conjugacy of contracting elements and of parabolic series.
//!
//! The solver conjugates the reference `g` step by step towards the target
//! `f`. Each step integrates the leading term of the residual `f - g_cur`
//! and applies the single-term correction `s`, so `φ <- s ∗ φ`. The
//! accumulated `σ = exp_map(φ)` is updated by the cheap flow `σ ∘ exp_map(s)`
//! and `g_cur` by the adjoint series of `s`. The witness satisfies
//! `φ ∗ g ∗ (-φ) = f` up to the working cutoff, while `φ` and `σ` are kept
//! only to the precision that reaches it.

use std::fmt;

use serde_json::{json, Value};

use crate::calculus::{asymptotic_integral, derive, is_contracting, FieldContext};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, Monomial};
use crate::group::{
    adjoint, compose, exp_map, flow, flow_increment, group_conjugate, log_map, GroupElement, ParabolicSeries,
};
use crate::series::{asymptotic, coarser, prec, Series, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Conjugate,
    NotConjugate,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Conjugate => "Conjugate",
            Verdict::NotConjugate => "NotConjugate",
            Verdict::Undetermined => "Undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionKind {
    /// The leading term of the residual equation sits on the pseudo-gap.
    PseudoGap,
    /// The two elements have different leading terms.
    NotAsymptotic,
    /// The correction term would not be contracting.
    NotContracting,
}

impl fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObstructionKind::PseudoGap => "pseudo-gap",
            ObstructionKind::NotAsymptotic => "not-asymptotic",
            ObstructionKind::NotContracting => "not-contracting",
        })
    }
}

/// Why a step of the solver could not proceed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction<E: Exponent> {
    pub kind: ObstructionKind,
    /// For a pseudo-gap, the exponent that admits no asymptotic integral;
    /// otherwise the leading exponent of the offending series.
    pub exponent: E,
}

/// One step of the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep<E: Exponent> {
    pub step: usize,
    /// Leading term of `f - g_cur` before the step.
    pub residual: Term<E>,
    /// The single-term correction applied.
    pub correction: Term<E>,
    /// Whether the step adjoined a new log level.
    pub extended: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyOutcome<E: Exponent> {
    pub verdict: Verdict,
    /// `φ` with `φ ∗ g ∗ (-φ) = f`, present exactly when conjugate.
    pub witness: Option<GroupElement<E>>,
    /// `exp_map(φ)`.
    pub witness_series: Option<ParabolicSeries<E>>,
    pub obstruction: Option<Obstruction<E>>,
    pub trace: Vec<TraceStep<E>>,
    /// Cutoff to which the verdict is certified.
    pub cutoff: E,
    /// Largest log depth among the inputs.
    pub input_depth: usize,
    /// Largest log depth used by the witness or the corrections.
    pub depth: usize,
}

impl<E: Exponent> ConjugacyOutcome<E> {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.to_string(),
            "witness": self.witness.as_ref().map(|w| w.series().to_json()),
            "witness_parabolic": self.witness_series.as_ref().map(|w| w.series().to_json()),
            "obstruction": self.obstruction.as_ref().map(|o| json!({
                "kind": o.kind.to_string(),
                "exponent": o.exponent.to_json(),
                "monomial": Monomial(&o.exponent).to_string(),
            })),
            "trace": self.trace.iter().map(|t| json!({
                "step": t.step,
                "residual": t.residual.to_string(),
                "correction": t.correction.to_string(),
                "extended": t.extended,
            })).collect::<Vec<_>>(),
            "cutoff": self.cutoff.to_json(),
            "input_depth": self.input_depth,
            "depth": self.depth,
        })
    }
}

/// Result of one asymptotic conjugation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome<E: Exponent> {
    /// `y` conjugates `g` to within `≺ f - g` of `f`.
    Correction {
        y: GroupElement<E>,
        extended: bool,
    },
    Obstructed(Obstruction<E>),
}

/// The single-term correction `lead(g) τ`, where `τ' ∼ -lead(f - g) / lead(g)^2`.
fn correction_step<E: Exponent>(r: &Term<E>, g: &Series<E>, ctx: &FieldContext<E>) -> Result<StepOutcome<E>> {
    let lg = g.lead()?;
    let integrand = Term::new(-&r.coeff / (&lg.coeff * &lg.coeff), r.exp.exp_sub(&lg.exp).exp_sub(&lg.exp));
    let integral = match asymptotic_integral(&Series::from_terms(vec![integrand.clone()], None), ctx) {
        Ok(i) => i,
        Err(Error::PseudoGap { .. }) => {
            return Ok(StepOutcome::Obstructed(Obstruction {
                kind: ObstructionKind::PseudoGap,
                exponent: integrand.exp,
            }));
        }
        Err(e) => return Err(e),
    };
    let y = Series::from_terms(vec![lg.mul(&integral.term)], None);
    match GroupElement::new(y) {
        Ok(y) => Ok(StepOutcome::Correction { y, extended: integral.extended() }),
        Err(_) => Ok(StepOutcome::Obstructed(Obstruction {
            kind: ObstructionKind::NotContracting,
            exponent: lg.exp.exp_add(&integral.term.exp),
        })),
    }
}

/// One step of asymptotic conjugation of `g` towards `f`.
pub fn asymptotically_conjugate<E: Exponent>(
    f: &GroupElement<E>,
    g: &GroupElement<E>,
    ctx: &FieldContext<E>,
) -> Result<StepOutcome<E>> {
    let (fs, gs) = (f.series(), g.series());
    if fs.is_zero() || gs.is_zero() {
        return Err(Error::Precondition("both elements must be nonzero".into()));
    }
    let r = fs.sub(gs);
    let Ok(lead_r) = r.lead() else {
        return Err(Error::Precondition("elements must differ".into()));
    };
    if !asymptotic(fs, gs)? {
        return Ok(StepOutcome::Obstructed(Obstruction {
            kind: ObstructionKind::NotAsymptotic,
            exponent: lead_r.exp.clone(),
        }));
    }
    correction_step(lead_r, gs, ctx)
}

/// Searches for `φ` with `φ ∗ g ∗ (-φ) = f`.
///
/// A failed first step proves non-conjugacy. A failure at a later step
/// leaves the question open. Running out of precision while the corrections
/// still make progress is reported as [`Error::Precision`].
pub fn construct_conjugator<E: Exponent>(
    f: &GroupElement<E>,
    g: &GroupElement<E>,
    ctx: &FieldContext<E>,
) -> Result<ConjugacyOutcome<E>> {
    if f.series().is_zero() || g.series().is_zero() {
        return Err(Error::Precondition("both elements must be nonzero".into()));
    }
    let target = ctx.target(coarser(&f.series().cutoff().cloned(), &g.series().cutoff().cloned()).as_ref());
    let wctx = ctx.clone().with_cutoff(target.clone());
    let input_depth = f.series().depth().max(g.series().depth());
    let mut outcome = ConjugacyOutcome {
        verdict: Verdict::Undetermined,
        witness: None,
        witness_series: None,
        obstruction: None,
        trace: Vec::new(),
        cutoff: target.clone(),
        input_depth,
        depth: input_depth,
    };
    let fs = f.series().clip(&target);
    let mut g_cur = GroupElement::unchecked(g.series().clip(&target));
    let sctx = wctx.clone().with_cutoff(witness_cutoff(g.series(), &target)?);
    let mut sigma = Series::x();
    let mut previous: Option<E> = None;

    for step in 0..ctx.max_iter {
        let Some(lead_r) = fs.lead_of_difference(g_cur.series()).filter(|t| t.exp > target) else {
            let sigma = ParabolicSeries::unchecked(sigma);
            let phi = log_map(&sigma, &sctx)?;
            if !verify_with_flow(f, g, &phi, &sigma, &wctx) {
                return Err(Error::Invariant(format!("constructed witness {phi} does not verify")));
            }
            outcome.depth = outcome.depth.max(phi.series().depth());
            outcome.verdict = Verdict::Conjugate;
            outcome.witness_series = Some(sigma);
            outcome.witness = Some(phi);
            return Ok(outcome);
        };
        if previous.as_ref().is_some_and(|p| lead_r.exp >= *p) {
            return Err(Error::Invariant(format!("residual {lead_r} did not decrease")));
        }
        previous = Some(lead_r.exp.clone());

        let first = if step == 0 {
            asymptotically_conjugate(&GroupElement::unchecked(fs.clone()), &g_cur, &wctx)?
        } else {
            correction_step(&lead_r, g_cur.series(), &wctx)?
        };
        match first {
            StepOutcome::Obstructed(o) => {
                outcome.verdict = if step == 0 { Verdict::NotConjugate } else { Verdict::Undetermined };
                outcome.obstruction = Some(o);
                return Ok(outcome);
            }
            StepOutcome::Correction { y, extended } => {
                let correction = y.series().lead()?.clone();
                if correction.exp <= target {
                    return Err(Error::Precision(format!(
                        "correction {correction} lies below the cutoff {}; refine the cutoff",
                        Monomial(&target)
                    )));
                }
                outcome.depth = outcome.depth.max(correction.exp.depth());
                outcome.trace.push(TraceStep { step, residual: lead_r.clone(), correction, extended });
                g_cur = adjoint(&y, &g_cur, &wctx)?;
                sigma = flow(&sigma, &y, &sctx)?;
            }
        }
    }
    Err(Error::IterationLimit { what: "conjugacy solver", limit: ctx.max_iter })
}

/// Precision to which `φ` and `σ = exp_map(φ)` matter: an error `e` in
/// either moves `φ ∗ g ∗ (-φ)` by about `e g / x`.
fn witness_cutoff<E: Exponent>(g: &Series<E>, target: &E) -> Result<E> {
    let lead = g.lead()?;
    Ok(target.exp_add(&E::x()).exp_sub(&lead.exp))
}

/// Checks `φ ∗ g ∗ (-φ) = f` both through the adjoint action and, through
/// the exponential map, as `exp_map(g) ∘ σ = σ ∘ exp_map(f)` with
/// `σ = exp_map(φ)`.
pub fn verify_witness<E: Exponent>(
    f: &GroupElement<E>,
    g: &GroupElement<E>,
    phi: &GroupElement<E>,
    ctx: &FieldContext<E>,
) -> bool {
    let Ok(cut) = witness_cutoff(g.series(), &ctx.cutoff) else {
        return false;
    };
    exp_map(phi, &ctx.clone().with_cutoff(cut)).is_ok_and(|sigma| verify_with_flow(f, g, phi, &sigma, ctx))
}

fn verify_with_flow<E: Exponent>(
    f: &GroupElement<E>,
    g: &GroupElement<E>,
    phi: &GroupElement<E>,
    sigma: &ParabolicSeries<E>,
    ctx: &FieldContext<E>,
) -> bool {
    let group_side = || -> Result<bool> {
        let conj = group_conjugate(phi, g, ctx)?;
        Ok(conj.series().clip(&ctx.cutoff).eq_to_cutoff(f.series()))
    };
    // both sides minus σ, so that the truncation of σ cancels exactly
    let series_side = || -> Result<bool> {
        let lhs = compose(&exp_map(g, ctx)?.delta(), sigma, ctx)?;
        let rhs = exp_map(f, ctx)?.delta().add(&flow_increment(&sigma.delta(), f, ctx)?);
        Ok(lhs.clip(&ctx.cutoff).eq_to_cutoff(&rhs.clip(&ctx.cutoff)))
    };
    matches!(group_side(), Ok(true)) && matches!(series_side(), Ok(true))
}

fn require_contracting<E: Exponent>(s: &Series<E>, name: &str) -> Result<()> {
    if s.is_zero() {
        return Err(Error::Precondition(format!("{name} must be nonzero")));
    }
    if !is_contracting(s) {
        return Err(Error::NotContracting(format!("{name} = {s}")));
    }
    Ok(())
}

/// `δ (1 - x δ†) = δ - x δ'`
pub fn conjugacy_scale<E: Exponent>(delta: &Series<E>) -> Series<E> {
    delta.sub(&Series::x().mul(&derive(delta)))
}

/// Whether `x + δ` and `x + ε` are conjugate among parabolic logarithmic
/// transseries: `ε - δ ≺ δ (1 - x δ†)`.
pub fn decide_transseries<E: Exponent>(delta: &Series<E>, epsilon: &Series<E>) -> Result<bool> {
    require_contracting(delta, "delta")?;
    require_contracting(epsilon, "epsilon")?;
    prec(&epsilon.sub(delta), &conjugacy_scale(delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoweredVerdict {
    /// The sufficient condition holds, so the series are conjugate.
    SufficientYes,
    /// The first correction step hits the pseudo-gap.
    NoByObstruction,
    /// Neither test applies.
    Unknown,
}

impl fmt::Display for PoweredVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoweredVerdict::SufficientYes => "SufficientYes",
            PoweredVerdict::NoByObstruction => "NoByObstruction",
            PoweredVerdict::Unknown => "Unknown",
        })
    }
}

/// Conjugacy test for powered series with rational exponents.
///
/// Sufficient: `ε - δ ≺ δ (1 - x δ†)` and `ε - δ ≺ δ² / x`. Every later
/// residual is then `≺ δ²/x`, so no correction ever meets the pseudo-gap.
pub fn decide_powered<E: Exponent>(
    delta: &Series<E>,
    epsilon: &Series<E>,
    ctx: &FieldContext<E>,
) -> Result<PoweredVerdict> {
    require_contracting(delta, "delta")?;
    require_contracting(epsilon, "epsilon")?;
    if !asymptotic(delta, epsilon)? {
        return Err(Error::Precondition(format!("epsilon = {epsilon} is not asymptotic to delta = {delta}")));
    }
    let d = epsilon.sub(delta);
    let Ok(lead_d) = d.lead() else {
        return Ok(PoweredVerdict::SufficientYes);
    };
    let grounded = delta.mul(delta).mul_term(&Term::monomial(E::x().exp_neg()));
    if prec(&d, &conjugacy_scale(delta))? && prec(&d, &grounded)? {
        return Ok(PoweredVerdict::SufficientYes);
    }
    Ok(match correction_step(lead_d, delta, ctx)? {
        StepOutcome::Obstructed(_) => PoweredVerdict::NoByObstruction,
        StepOutcome::Correction { .. } => PoweredVerdict::Unknown,
    })
}
