//! Differential structure: the standard derivation, logarithmic derivative,
//! Lie bracket, the contraction test and asymptotic integration.

use std::borrow::Cow;
use std::collections::BTreeMap;

use malachite_base::num::basic::traits::Zero;

use crate::error::{Error, Result};
use crate::exponents::{DepthPolicy, Exponent, IntegrationFailure, LogLexExp, Monomial, RationalExp, Q};
use crate::series::{asymptotic, Factor, Series, Term};

/// Default number of iterations any fixed-point loop may take.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Which differential field is in play: the exponent type fixes the field,
/// the context adds the depth policy, the default cutoff and loop limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldContext<E: Exponent> {
    pub policy: DepthPolicy,
    /// Cutoff used whenever an iterative operation runs on exact inputs.
    pub cutoff: E,
    pub max_iter: usize,
}

impl FieldContext<RationalExp> {
    /// Powered series with rational exponents, cutoff `x^-40`.
    pub fn rational() -> Self {
        FieldContext { policy: DepthPolicy::Fixed(0), cutoff: RationalExp::int(-40), max_iter: DEFAULT_MAX_ITER }
    }
}

impl FieldContext<LogLexExp> {
    /// Logarithmic transseries, cutoff `x^-40`.
    pub fn loglex(policy: DepthPolicy) -> Self {
        FieldContext { policy, cutoff: LogLexExp::from_ints(&[-40]), max_iter: DEFAULT_MAX_ITER }
    }
}

impl<E: Exponent> FieldContext<E> {
    pub fn with_cutoff(mut self, cutoff: E) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// The monomial that admits no asymptotic integral, if any.
    pub fn pseudo_gap(&self) -> Option<E> {
        E::pseudo_gap(self.policy)
    }

    /// The cutoff an iterative operation works to: the natural one of its
    /// inputs, or the context default for exact inputs.
    pub fn target(&self, natural: Option<&E>) -> E {
        natural.cloned().unwrap_or_else(|| self.cutoff.clone())
    }
}

/// Term-wise derivative. Every derivative exponent lies at or below
/// `e - 1` (in `x`-units), so the cutoff drops by the exponent of `x`.
pub fn derive<E: Exponent>(f: &Series<E>) -> Series<E> {
    let cutoff = f.cutoff().map(|c| c.exp_sub(&E::x()));
    let mut map: BTreeMap<E, Q> = BTreeMap::new();
    for t in f.terms() {
        for (c, e) in t.exp.monomial_derivative() {
            *map.entry(e).or_insert(Q::ZERO) += &t.coeff * c;
        }
    }
    Series::from_terms(map.into_iter().map(|(e, c)| Term::new(c, e)), cutoff)
}

/// `f' / f`
pub fn log_derivative<E: Exponent>(f: &Series<E>, ctx: &FieldContext<E>) -> Result<Series<E>> {
    if f.is_zero() {
        return Err(Error::ZeroSeries);
    }
    Ok(derive(f).mul(&f.invert(ctx)?))
}

/// `f g' - f' g`
pub fn lie_bracket<E: Exponent>(f: &Series<E>, g: &Series<E>) -> Series<E> {
    bracket_with(f)(g)
}

/// `g ↦ ⟦f,g⟧` with `f` and `f'` prepared once for repeated use.
pub(crate) fn bracket_with<E: Exponent>(f: &Series<E>) -> impl Fn(&Series<E>) -> Series<E> + '_ {
    let (f, df) = (f.factor(), Factor::new(Cow::Owned(derive(f))));
    move |g| f.mul(&derive(g)).sub(&df.mul(g))
}

/// Whether `f ∂` is contracting, i.e. `f ≺ x`. A series known only to be
/// zero down to a cutoff at or above `x` is not certified.
pub fn is_contracting<E: Exponent>(f: &Series<E>) -> bool {
    f.is_below(&E::x()).unwrap_or(false)
}

/// A single-term asymptotic integral together with the log depth it needed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticIntegral<E: Exponent> {
    pub term: Term<E>,
    pub input_depth: usize,
    pub result_depth: usize,
}

impl<E: Exponent> AsymptoticIntegral<E> {
    /// True when a new log level had to be adjoined.
    pub fn extended(&self) -> bool {
        self.result_depth > self.input_depth
    }
}

/// A term `τ` with `τ' ∼ f`, integrating the leading term of `f`.
pub fn asymptotic_integral<E: Exponent>(f: &Series<E>, ctx: &FieldContext<E>) -> Result<AsymptoticIntegral<E>> {
    let lead = f.lead()?;
    let (factor, exp) = lead.exp.monomial_antiderivative(ctx.policy).map_err(|e| match e {
        IntegrationFailure::PseudoGap => Error::PseudoGap { monomial: Monomial(&lead.exp).to_string() },
        IntegrationFailure::DepthExceeded { found, limit } => Error::DepthExceeded { found, limit },
    })?;
    let term = Term::new(&lead.coeff * factor, exp);
    let check = derive(&Series::from_terms(vec![term.clone()], None));
    if !asymptotic(&check, &Series::from_terms(vec![lead.clone()], None))? {
        return Err(Error::Invariant(format!("derivative of {term} is not asymptotic to {lead}")));
    }
    Ok(AsymptoticIntegral { input_depth: f.depth(), result_depth: term.exp.depth().max(f.depth()), term })
}
