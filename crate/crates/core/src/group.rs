//! The group of contracting elements under the BCH product, the exponential
//! map onto parabolic series, and composition of parabolic series.
//!
//! Composition conventions: `compose(g, p) = g ∘ p`, and right composition
//! with `exp_map(s)` is the Lie series `exp(s∂)`. Hence
//! `exp_map(f ∗ g) = exp_map(g) ∘ exp_map(f)`.

use std::collections::BTreeMap;
use std::fmt;

use malachite_base::num::arithmetic::traits::{AddMulAssign, Lcm, Reciprocal};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;

use crate::calculus::{bracket_with, derive, is_contracting, lie_bracket, FieldContext};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, Monomial, Q};
use crate::series::{add_bounds, coarser, Series, Term};

/// A series `f` with `f ≺ x`, so that `f∂` is contracting.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement<E: Exponent>(Series<E>);

impl<E: Exponent> GroupElement<E> {
    pub fn new(f: Series<E>) -> Result<Self> {
        if is_contracting(&f) {
            Ok(GroupElement(f))
        } else {
            Err(Error::NotContracting(f.to_string()))
        }
    }

    pub fn zero() -> Self {
        GroupElement(Series::zero())
    }

    pub fn series(&self) -> &Series<E> {
        &self.0
    }

    pub fn into_series(self) -> Series<E> {
        self.0
    }

    /// Group inverse.
    pub fn inverse(&self) -> Self {
        GroupElement(self.0.neg())
    }
}

impl<E: Exponent> fmt::Display for GroupElement<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A series `x + δ` with `δ ≺ x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParabolicSeries<E: Exponent>(Series<E>);

impl<E: Exponent> ParabolicSeries<E> {
    pub fn new(p: Series<E>) -> Result<Self> {
        let delta = p.sub(&Series::x());
        if is_contracting(&delta) && p.coefficient(&E::x()) == 1u32 {
            Ok(ParabolicSeries(p))
        } else {
            Err(Error::NotParabolic(p.to_string()))
        }
    }

    pub fn identity() -> Self {
        ParabolicSeries(Series::x())
    }

    pub fn from_delta(delta: &GroupElement<E>) -> Self {
        ParabolicSeries(Series::x().add(delta.series()))
    }

    pub fn series(&self) -> &Series<E> {
        &self.0
    }

    pub fn into_series(self) -> Series<E> {
        self.0
    }

    /// `p - x`
    pub fn delta(&self) -> Series<E> {
        self.0.sub(&Series::x())
    }
}

impl<E: Exponent> fmt::Display for ParabolicSeries<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Number of steps of size `step` from `start` until `target` is reached.
pub(crate) fn crossing_bound<E: Exponent>(
    start: &E,
    step: &E,
    target: &E,
    ctx: &FieldContext<E>,
    what: &'static str,
) -> Result<usize> {
    let k = E::steps_to_cross(start, step, target).ok_or_else(|| {
        Error::Precision(format!(
            "{what}: steps of size {} from {} never reach the cutoff {}",
            Monomial(step),
            Monomial(start),
            Monomial(target)
        ))
    })?;
    if k > ctx.max_iter {
        return Err(Error::IterationLimit { what, limit: ctx.max_iter });
    }
    Ok(k)
}

/// Cutoff of an operation applying `s`-weighted derivations to `h`: unknown
/// terms of `h` stay unknown, unknown terms of `s` act through `h'`.
fn flow_cutoff<E: Exponent>(h: &Series<E>, s: &Series<E>, ctx: &FieldContext<E>) -> E {
    let through_s = add_bounds(&s.cutoff().cloned(), &h.top().map(|t| t.exp_sub(&E::x())));
    ctx.target(coarser(&h.cutoff().cloned(), &through_s).as_ref())
}

/// `Σ op^k(h) / k!` where `op` lowers every exponent by at least `-step`.
fn lie_series<E: Exponent>(
    h: &Series<E>,
    step: Option<E>,
    target: &E,
    ctx: &FieldContext<E>,
    what: &'static str,
    op: impl Fn(&Series<E>) -> Series<E>,
) -> Result<Series<E>> {
    let h = h.clip(target);
    let (Some(step), Some(top)) = (step, h.top()) else {
        return Ok(h);
    };
    let bound = crossing_bound(&top, &step, target, ctx, what)?;
    let mut sum = h.clone();
    let mut t = h;
    let mut k = 0usize;
    while !t.is_zero() {
        if k == bound {
            return Err(Error::Invariant(format!("{what}: term {k} survives the cutoff")));
        }
        k += 1;
        t = op(&t).clip(target).scale(&Q::from_unsigneds(1, k));
        sum = sum.add(&t);
    }
    Ok(sum.clip(target))
}

fn flow_step<E: Exponent>(s: &Series<E>) -> Option<E> {
    s.top().map(|t| t.exp_sub(&E::x()))
}

/// `exp(f∂)(x) = x + f + f f'/2 + ...`
pub fn exp_map<E: Exponent>(f: &GroupElement<E>, ctx: &FieldContext<E>) -> Result<ParabolicSeries<E>> {
    let f = f.series();
    let x = Series::x();
    let target = flow_cutoff(&x, f, ctx);
    let ff = f.factor();
    let p = lie_series(&x, flow_step(f), &target, ctx, "exponential map", |t| ff.mul(&derive(t)))?;
    Ok(ParabolicSeries(p))
}

/// `h ∘ exp_map(s)`, computed as the Lie series `exp(s∂)(h)`.
pub fn flow<E: Exponent>(h: &Series<E>, s: &GroupElement<E>, ctx: &FieldContext<E>) -> Result<Series<E>> {
    let s = s.series();
    let target = flow_cutoff(h, s, ctx);
    if let [y] = s.terms() {
        if s.is_exact() {
            return monomial_lie_series(h, y, false, &target, ctx, "flow");
        }
    }
    let sf = s.factor();
    lie_series(h, flow_step(s), &target, ctx, "flow", |t| sf.mul(&derive(t)))
}

/// `h ∘ exp_map(s) - h = Σ_{k≥1} (s∂)^k(h) / k!`. Unknown terms of `h`
/// only enter through `s h'`, so the result can be finer than `h`.
pub fn flow_increment<E: Exponent>(h: &Series<E>, s: &GroupElement<E>, ctx: &FieldContext<E>) -> Result<Series<E>> {
    let s = s.series();
    let (Some(step), Some(top)) = (flow_step(s), h.top()) else {
        return Ok(Series::zero_to(ctx.target(coarser(&h.cutoff().cloned(), &s.cutoff().cloned()).as_ref())));
    };
    let through_s = add_bounds(&s.cutoff().cloned(), &Some(top.exp_sub(&E::x())));
    let through_h = add_bounds(&h.cutoff().cloned(), &Some(step.clone()));
    let target = ctx.target(coarser(&through_h, &through_s).as_ref());
    let bound = crossing_bound(&top, &step, &target, ctx, "flow increment")?;
    let sf = s.factor();
    let mut sum = Series::zero();
    let mut t = h.clone();
    for k in 1..=bound + 1 {
        t = sf.mul(&derive(&t)).clip(&target).scale(&Q::from_unsigneds(1, k));
        if t.is_zero() {
            return Ok(sum.add(&t).clip(&target));
        }
        sum = sum.add(&t);
    }
    Err(Error::Invariant("flow increment: a term survives the cutoff".into()))
}

/// `exp(ad_φ)(h) = h + ⟦φ,h⟧ + ⟦φ,⟦φ,h⟧⟧/2 + ...`, which equals
/// `φ ∗ h ∗ (-φ)`.
pub fn adjoint<E: Exponent>(
    phi: &GroupElement<E>,
    h: &GroupElement<E>,
    ctx: &FieldContext<E>,
) -> Result<GroupElement<E>> {
    let (phi, h) = (phi.series(), h.series());
    let target = flow_cutoff(h, phi, ctx);
    if let [y] = phi.terms() {
        if phi.is_exact() {
            return monomial_lie_series(h, y, true, &target, ctx, "adjoint series").map(GroupElement);
        }
    }
    let r = lie_series(h, flow_step(phi), &target, ctx, "adjoint series", bracket_with(phi))?;
    Ok(GroupElement(r))
}

/// [`lie_series`] for a single-term generator `y`, applied term by term:
/// `op = y∂`, or `op = ad_y` when `bracket` is set.
fn monomial_lie_series<E: Exponent>(
    h: &Series<E>,
    y: &Term<E>,
    bracket: bool,
    target: &E,
    ctx: &FieldContext<E>,
    what: &'static str,
) -> Result<Series<E>> {
    let h = h.clip(target);
    let Some(top) = h.top() else {
        return Ok(h);
    };
    let bound = crossing_bound(&top, &y.exp.exp_sub(&E::x()), target, ctx, what)?;
    let dy = y.exp.monomial_derivative();
    let mut lost = !h.is_exact();
    let mut op = |e: &E| -> Vec<(E, Q)> {
        let mut out: BTreeMap<E, Q> = BTreeMap::new();
        for (q, d) in e.monomial_derivative() {
            *out.entry(y.exp.exp_add(&d)).or_insert(Q::ZERO) += &y.coeff * q;
        }
        if bracket {
            for (p, d) in &dy {
                *out.entry(e.exp_add(d)).or_insert(Q::ZERO) -= &y.coeff * p;
            }
        }
        out.retain(|_, c| *c != 0u32);
        lost |= out.keys().any(|e| e <= target);
        out.into_iter().filter(|(e, _)| e > target).collect()
    };
    // integer numerators over one shared denominator, reduced once at the end
    let (mut denom, numers) = h.common_denominator();
    let mut sum: BTreeMap<E, Integer> = h.terms().iter().map(|t| t.exp.clone()).zip(numers).collect();
    let mut layer: Vec<(E, Integer)> = sum.iter().map(|(e, n)| (e.clone(), n.clone())).collect();
    let mut k = 0usize;
    while !layer.is_empty() {
        if k == bound {
            return Err(Error::Invariant(format!("{what}: term {k} survives the cutoff")));
        }
        k += 1;
        let kq = Q::from(k);
        let images: Vec<Vec<(E, Q)>> =
            layer.iter().map(|(e, _)| op(e).into_iter().map(|(f, m)| (f, m / &kq)).collect()).collect();
        let scale = images.iter().flatten().fold(Natural::ONE, |acc, (_, m)| acc.lcm(m.denominator_ref()));
        let mut next: BTreeMap<E, Integer> = BTreeMap::new();
        for ((_, n), image) in layer.iter().zip(&images) {
            for (f, m) in image {
                let factor = Integer::from_sign_and_abs(*m >= 0u32, m.numerator_ref() * (&scale / m.denominator_ref()));
                next.entry(f.clone()).or_insert(Integer::ZERO).add_mul_assign(n, factor);
            }
        }
        next.retain(|_, n| *n != 0u32);
        if scale != 1u32 {
            let scale = Integer::from(&scale);
            sum.values_mut().for_each(|n| *n *= &scale);
        }
        denom *= scale;
        for (e, n) in &next {
            *sum.entry(e.clone()).or_insert(Integer::ZERO) += n;
        }
        layer = next.into_iter().collect();
    }
    let denom = Integer::from(denom);
    let terms = sum.into_iter().map(|(e, n)| Term::new(Q::from_integers_ref(&n, &denom), e));
    let cutoff = lost.then(|| target.clone());
    Ok(Series::from_terms(terms, cutoff))
}

/// Taylor coefficients of `z / (1 - e^-z) = 1 + z/2 + z^2/12 - z^4/720 + ...`,
/// i.e. Bernoulli numbers with `B_1 = +1/2` over `k!`.
fn bch_linear_coefficients(n: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![Q::ONE];
    for m in 1..=n {
        let mut sum = Q::ZERO;
        let mut binom = Natural::ONE;
        for (j, bj) in b.iter().enumerate() {
            sum += bj * Q::from(&binom);
            binom = binom * Natural::from(m + 1 - j) / Natural::from(j + 1);
        }
        b.push(-sum / Q::from(m + 1));
    }
    let mut fact = Natural::ONE;
    b.into_iter()
        .enumerate()
        .map(|(k, bk)| {
            if k > 0 {
                fact *= Natural::from(k);
            }
            let bk = if k == 1 { -bk } else { bk };
            bk / Q::from(&fact)
        })
        .collect()
}

/// The part of `h ∗ z` linear in `z`: `Σ β_k ad_h^k(z)` with the
/// coefficients of [`bch_linear_coefficients`].
fn bch_linear<E: Exponent>(h: &Series<E>, z: &Series<E>, target: &E, ctx: &FieldContext<E>) -> Result<Series<E>> {
    let z = z.clip(target);
    let (Some(step), Some(top)) = (flow_step(h), z.top()) else {
        return Ok(z);
    };
    let bound = crossing_bound(&top, &step, target, ctx, "BCH linearization")?;
    let beta = bch_linear_coefficients(bound);
    let ad_h = bracket_with(h);
    let mut sum = z.clone();
    let mut t = z;
    for b in beta.iter().skip(1) {
        t = ad_h(&t).clip(target);
        if t.is_zero() {
            return Ok(sum.add(&t).clip(target));
        }
        sum = sum.add(&t.scale(b));
    }
    Err(Error::Invariant("BCH linearization: a term survives the cutoff".into()))
}

/// Working cutoff for the Newton step after a residual with leading
/// exponent `lead`: the error roughly squares per step, so two steps ahead
/// it lies near `4 lead - 3x`. Never finer than `target`.
fn newton_cutoff<E: Exponent>(lead: &E, target: &E) -> E {
    let ahead = lead.scale(&Q::from(4u32)).exp_sub(&E::x().scale(&Q::from(3u32)));
    if ahead > *target {
        ahead
    } else {
        target.clone()
    }
}

/// Inverse of [`exp_map`] by Newton iteration. With `r = p - exp_map(h)`,
/// `h ∗ z` solves the equation for `z = log(p ∘ exp_map(-h))`, and
/// `z ≈ r ∘ exp_map(-h)` to first order, so `h <- h + Σ β_k ad_h^k(z)`.
/// Intermediate steps run at a reduced cutoff; only a zero residual at the
/// full cutoff ends the loop.
pub fn log_map<E: Exponent>(p: &ParabolicSeries<E>, ctx: &FieldContext<E>) -> Result<GroupElement<E>> {
    let delta = p.delta();
    let target = ctx.target(delta.cutoff());
    let p = p.series().clip(&target);
    let mut h = delta.without_cutoff();
    let mut cut = match delta.top() {
        Some(top) => newton_cutoff(&top, &target),
        None => target.clone(),
    };
    for _ in 0..ctx.max_iter {
        let wctx = ctx.clone().with_cutoff(cut.clone());
        let hc = GroupElement(h.clip(&cut));
        let r = p.sub(exp_map(&hc, &wctx)?.series()).clip(&cut);
        let Ok(lead) = r.lead() else {
            if cut == target {
                return Ok(if r.is_exact() { hc } else { GroupElement(hc.0.coarsen(&target)) });
            }
            cut = target.clone();
            continue;
        };
        let z = flow(&r, &hc.inverse(), &wctx)?;
        h = hc.0.add(&bch_linear(&hc.0, &z, &cut, &wctx)?).without_cutoff();
        cut = newton_cutoff(&lead.exp, &target);
    }
    Err(Error::IterationLimit { what: "logarithm map", limit: ctx.max_iter })
}

/// `g ∘ p` by the Taylor sum `Σ g^(i) δ^i / i!` with `δ = p - x`.
pub fn compose<E: Exponent>(g: &Series<E>, p: &ParabolicSeries<E>, ctx: &FieldContext<E>) -> Result<Series<E>> {
    let delta = p.delta();
    let target = flow_cutoff(g, &delta, ctx);
    let g = g.clip(&target);
    let (Some(top_g), Some(top_d)) = (g.top(), delta.top()) else {
        return Ok(g);
    };
    let step = top_d.exp_sub(&E::x());
    let bound = crossing_bound(&top_g, &step, &target, ctx, "composition")?;
    let mut sum = g.clone();
    let mut d = g;
    let mut power = Series::one();
    let delta_f = delta.factor();
    let mut finished = false;
    for i in 1..bound {
        let n = Q::from(i);
        d = derive(&d).clip(&target.exp_sub(&top_d.scale(&n)));
        power = delta_f.mul(&power).scale(&(&n).reciprocal()).clip(&target.exp_sub(&top_g).exp_add(&E::x().scale(&n)));
        sum = sum.add(&d.mul(&power).clip(&target));
        if d.is_zero() || power.is_zero() {
            finished = true;
            break;
        }
    }
    // the remaining Taylor terms lie below the cutoff but need not vanish
    let rest = derive(&d);
    if !finished && !(rest.is_zero() && rest.is_exact()) {
        sum = sum.coarsen(&target);
    }
    Ok(sum.clip(&target))
}

/// `p ∘ q` as a parabolic series.
pub fn compose_parabolic<E: Exponent>(
    p: &ParabolicSeries<E>,
    q: &ParabolicSeries<E>,
    ctx: &FieldContext<E>,
) -> Result<ParabolicSeries<E>> {
    ParabolicSeries::new(compose(p.series(), q, ctx)?)
}

/// Compositional inverse by Newton iteration
/// `q <- q - (p ∘ q - x) / (p' ∘ q)`, with the same cutoff schedule as
/// [`log_map`].
pub fn invert_parabolic<E: Exponent>(p: &ParabolicSeries<E>, ctx: &FieldContext<E>) -> Result<ParabolicSeries<E>> {
    let delta = p.delta();
    let target = ctx.target(delta.cutoff());
    let x = Series::x();
    let dp = derive(p.series());
    let mut q = x.sub(&delta).without_cutoff();
    let mut cut = target.clone();
    for _ in 0..ctx.max_iter {
        let wctx = ctx.clone().with_cutoff(cut.clone());
        let qc = ParabolicSeries(q.clip(&cut));
        let r = compose(p.series(), &qc, &wctx)?.sub(&x).clip(&cut);
        let Ok(lead) = r.lead() else {
            if cut == target {
                return Ok(if r.is_exact() { qc } else { ParabolicSeries(qc.0.coarsen(&target)) });
            }
            cut = target.clone();
            continue;
        };
        let slope = compose(&dp, &qc, &wctx)?.invert(&wctx)?;
        q = qc.0.sub(&r.mul(&slope).clip(&cut)).without_cutoff();
        cut = newton_cutoff(&lead.exp, &target);
    }
    Err(Error::IterationLimit { what: "compositional inverse", limit: ctx.max_iter })
}

/// The BCH product, via `exp_map(f ∗ g) = exp_map(g) ∘ exp_map(f)`.
pub fn star<E: Exponent>(f: &GroupElement<E>, g: &GroupElement<E>, ctx: &FieldContext<E>) -> Result<GroupElement<E>> {
    let composed = compose(exp_map(g, ctx)?.series(), &exp_map(f, ctx)?, ctx)?;
    log_map(&ParabolicSeries(composed), ctx)
}

/// `f + g + ⟦f,g⟧/2 + (⟦f,⟦f,g⟧⟧ - ⟦g,⟦f,g⟧⟧)/12`
pub fn bch_truncated<E: Exponent>(f: &GroupElement<E>, g: &GroupElement<E>) -> Series<E> {
    let (f, g) = (f.series(), g.series());
    let fg = lie_bracket(f, g);
    let third = lie_bracket(f, &fg).sub(&lie_bracket(g, &fg));
    f.add(g).add(&fg.scale(&Q::from_unsigneds(1u32, 2))).add(&third.scale(&Q::from_unsigneds(1u32, 12)))
}

/// `φ ∗ h ∗ (-φ)`, evaluated as the adjoint series.
pub fn group_conjugate<E: Exponent>(
    phi: &GroupElement<E>,
    h: &GroupElement<E>,
    ctx: &FieldContext<E>,
) -> Result<GroupElement<E>> {
    if phi.series().is_zero() && phi.series().is_exact() {
        return Ok(h.clone());
    }
    adjoint(phi, h, ctx)
}

impl<E: Exponent> GroupElement<E> {
    pub(crate) fn unchecked(f: Series<E>) -> Self {
        GroupElement(f)
    }
}

impl<E: Exponent> ParabolicSeries<E> {
    pub(crate) fn unchecked(p: Series<E>) -> Self {
        ParabolicSeries(p)
    }
}

/// Whether `q` is the identity `x` up to its cutoff.
pub fn is_identity<E: Exponent>(q: &ParabolicSeries<E>) -> bool {
    q.delta().is_zero()
}
