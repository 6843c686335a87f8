//! Evaluation of parsed expressions to series.

use malachite_base::num::arithmetic::traits::{CheckedRoot, Pow};
use malachite_base::num::basic::traits::{One, Zero};

use super::parse::Expr;
use crate::calculus::FieldContext;
use crate::error::{Error, Result};
use crate::exponents::{DepthPolicy, Exponent, Q};
use crate::group::crossing_bound;
use crate::series::{Series, Term};

pub fn evaluate<E: Exponent>(e: &Expr, ctx: &FieldContext<E>) -> Result<Series<E>> {
    let s = match e {
        Expr::Rational(r) => Series::constant(r.clone()),
        Expr::X => Series::x(),
        Expr::Log(a) => log(&evaluate(a, ctx)?, ctx)?,
        Expr::BigO(a) => big_o(&evaluate(a, ctx)?)?,
        Expr::Power(b, r) => power(&evaluate(b, ctx)?, r, ctx)?,
        Expr::Neg(a) => evaluate(a, ctx)?.neg(),
        Expr::Sum(a, b) => evaluate(a, ctx)?.add(&evaluate(b, ctx)?),
        Expr::Difference(a, b) => evaluate(a, ctx)?.sub(&evaluate(b, ctx)?),
        Expr::Product(a, b) => evaluate(a, ctx)?.mul(&evaluate(b, ctx)?),
        Expr::Quotient(a, b) => evaluate(a, ctx)?.mul(&evaluate(b, ctx)?.invert(ctx)?),
    };
    if let DepthPolicy::Fixed(limit) = ctx.policy {
        if s.depth() > limit {
            return Err(Error::DepthExceeded { found: s.depth(), limit });
        }
    }
    Ok(s)
}

fn big_o<E: Exponent>(m: &Series<E>) -> Result<Series<E>> {
    match m.terms() {
        [t] if m.is_exact() => Ok(Series::zero_to(t.exp.clone())),
        _ => Err(Error::Domain(format!("O(...) needs a single monomial, got {m}"))),
    }
}

/// `a0 + sum_{k>=1} coeff(k) eps^k` for `eps ≺ 1`, down to `target`.
fn unit_series<E: Exponent>(
    eps: &Series<E>,
    target: &E,
    ctx: &FieldContext<E>,
    a0: Q,
    mut coeff: impl FnMut(usize) -> Q,
) -> Result<Series<E>> {
    let mut sum = Series::constant(a0);
    let Some(step) = eps.top() else {
        return Ok(sum.add(eps));
    };
    let bound = crossing_bound(&E::zero(), &step, target, ctx, "power series")?;
    let mut power = Series::one();
    for k in 1..=bound {
        power = power.mul(eps).coarsen(target);
        sum = sum.add(&power.scale(&coeff(k)));
    }
    Ok(sum.coarsen(target))
}

/// Splits `s = lead * (1 + eps)`.
fn split_lead<E: Exponent>(s: &Series<E>) -> Option<(Term<E>, Series<E>)> {
    let lead = s.lead().ok()?.clone();
    let eps = s.mul_term(&lead.recip()).sub(&Series::one());
    Some((lead, eps))
}

fn power<E: Exponent>(s: &Series<E>, r: &Q, ctx: &FieldContext<E>) -> Result<Series<E>> {
    if let Ok(n) = i64::try_from(r) {
        let base = if n < 0 { s.invert(ctx)? } else { s.clone() };
        let n = u32::try_from(n.unsigned_abs()).map_err(|_| Error::Domain(format!("exponent {r} is too large")))?;
        return Ok(base.pow(n));
    }
    let (lead, eps) = split_lead(s).ok_or_else(|| Error::Domain(format!("zero to the power {r}")))?;
    let (num, den) = r.numerator_and_denominator_ref();
    let root = u64::try_from(den).ok().and_then(|d| (&lead.coeff).checked_root(d));
    let num = i64::try_from(num).ok();
    let (Some(root), Some(num)) = (root, num) else {
        return Err(Error::Domain(format!("({})^({r}) is not rational", lead.coeff)));
    };
    let sign = if *r < 0u32 { -1 } else { 1 };
    let head = Term::new(root.pow(sign * num), lead.exp.scale(r));
    let target = eps.cutoff().cloned().unwrap_or_else(|| ctx.cutoff.exp_sub(&head.exp));
    let mut binomial = Q::ONE;
    let tail = unit_series(&eps, &target, ctx, Q::ONE, |k| {
        binomial = &binomial * (r - Q::from(k - 1)) / Q::from(k);
        binomial.clone()
    })?;
    Ok(tail.mul_term(&head))
}

fn log<E: Exponent>(s: &Series<E>, ctx: &FieldContext<E>) -> Result<Series<E>> {
    let (lead, eps) = split_lead(s).ok_or_else(|| Error::Domain("log of zero".into()))?;
    let logs = lead.exp.monomial_log().ok_or_else(|| Error::ContextMismatch("log needs the tlog field".into()))?;
    if lead.exp <= E::zero() || lead.coeff != 1u32 {
        return Err(Error::Domain(format!("log needs an argument ~ m with m ≻ 1, got {s}")));
    }
    let target = eps.cutoff().cloned().unwrap_or_else(|| ctx.cutoff.clone());
    let tail = unit_series(&eps, &target, ctx, Q::ZERO, |k| {
        let sign = if k % 2 == 1 { Q::ONE } else { -Q::ONE };
        sign / Q::from(k)
    })?;
    let head = Series::from_terms(logs.into_iter().map(|(c, e)| Term::new(c, e)), None);
    Ok(head.add(&tail))
}
