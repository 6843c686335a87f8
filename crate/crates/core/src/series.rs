//! Truncated generalized power series with exact rational coefficients.
//!
//! A [`Series`] stores finitely many terms, strictly decreasing in monomial
//! size, plus an optional cutoff exponent. Terms at or below the cutoff are
//! unknown. A series without cutoff is exact: it has no other terms at all.
//! Every operation propagates the coarsest cutoff it can guarantee and never
//! fabricates terms inside the unknown zone.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use malachite_base::num::arithmetic::traits::{Abs, AddMulAssign, Lcm, PowerOf2, Reciprocal, UnsignedAbs};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;
use malachite_nz::platform::Limb;
use serde_json::{json, Value};

use crate::calculus::FieldContext;
use crate::error::{Error, Result};
use crate::exponents::{fmt_rational, parse_rational, Exponent, Monomial, Q};
use crate::group::crossing_bound;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term<E: Exponent> {
    pub coeff: Q,
    pub exp: E,
}

impl<E: Exponent> Term<E> {
    pub fn new(coeff: Q, exp: E) -> Self {
        Term { coeff, exp }
    }

    pub fn monomial(exp: E) -> Self {
        Term { coeff: Q::ONE, exp }
    }

    pub fn mul(&self, other: &Term<E>) -> Term<E> {
        Term { coeff: &self.coeff * &other.coeff, exp: self.exp.exp_add(&other.exp) }
    }

    /// Multiplicative inverse; the coefficient must be nonzero.
    pub fn recip(&self) -> Term<E> {
        Term { coeff: (&self.coeff).reciprocal(), exp: self.exp.exp_neg() }
    }
}

impl<E: Exponent> fmt::Display for Term<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let abs = (&self.coeff).abs();
        if self.coeff < 0u32 {
            f.write_str("-")?;
        }
        if self.exp.is_zero() {
            f.write_str(&fmt_rational(&abs))
        } else if abs == 1u32 {
            write!(f, "{}", Monomial(&self.exp))
        } else {
            write!(f, "{}*{}", fmt_rational(&abs), Monomial(&self.exp))
        }
    }
}

/// Outcome of comparing two series for dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// `f ≺ g`
    Smaller,
    /// `f ≍ g`
    Comparable,
    /// `f ≻ g`
    Larger,
}

/// The coarser (larger) of two cutoffs; `None` is minus infinity.
pub(crate) fn coarser<E: Exponent>(a: &Option<E>, b: &Option<E>) -> Option<E> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if a >= b { a.clone() } else { b.clone() }),
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(b.clone()),
        (None, None) => None,
    }
}

/// Sum of two bounds where `None` is minus infinity.
pub(crate) fn add_bounds<E: Exponent>(a: &Option<E>, b: &Option<E>) -> Option<E> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.exp_add(b)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Series<E: Exponent> {
    terms: Vec<Term<E>>,
    cutoff: Option<E>,
}

impl<E: Exponent> Series<E> {
    /// The exact zero series.
    pub fn zero() -> Self {
        Series { terms: Vec::new(), cutoff: None }
    }

    /// Zero up to `cutoff`; unknown below it.
    pub fn zero_to(cutoff: E) -> Self {
        Series { terms: Vec::new(), cutoff: Some(cutoff) }
    }

    pub fn one() -> Self {
        Self::term(Q::ONE, E::zero())
    }

    pub fn x() -> Self {
        Self::term(Q::ONE, E::x())
    }

    pub fn constant(c: Q) -> Self {
        Self::term(c, E::zero())
    }

    pub fn term(coeff: Q, exp: E) -> Self {
        Self::from_terms(vec![Term::new(coeff, exp)], None)
    }

    pub fn monomial(exp: E) -> Self {
        Self::term(Q::ONE, exp)
    }

    /// Builds a series from arbitrary terms: equal exponents are merged,
    /// zeros and terms at or below the cutoff are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = Term<E>>, cutoff: Option<E>) -> Self {
        let mut map: BTreeMap<E, Q> = BTreeMap::new();
        for t in terms {
            *map.entry(t.exp).or_insert(Q::ZERO) += t.coeff;
        }
        Self::from_map(map, cutoff)
    }

    fn from_map(map: BTreeMap<E, Q>, cutoff: Option<E>) -> Self {
        let terms = map
            .into_iter()
            .rev()
            .filter(|(e, c)| *c != 0u32 && cutoff.as_ref().is_none_or(|k| e > k))
            .map(|(exp, coeff)| Term { coeff, exp })
            .collect();
        Series { terms, cutoff }
    }

    pub fn terms(&self) -> &[Term<E>] {
        &self.terms
    }

    pub fn cutoff(&self) -> Option<&E> {
        self.cutoff.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.cutoff.is_none()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no term is known above the cutoff.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &E) -> Q {
        self.terms.iter().find(|t| t.exp == *e).map(|t| t.coeff.clone()).unwrap_or(Q::ZERO)
    }

    /// Largest term in monomial-size order.
    pub fn lead(&self) -> Result<&Term<E>> {
        self.terms.first().ok_or(Error::ZeroSeries)
    }

    /// Exponent bounding every possibly nonzero term from above: the lead
    /// exponent, else the cutoff; `None` for the exact zero.
    pub fn top(&self) -> Option<E> {
        match self.terms.first() {
            Some(t) => Some(t.exp.clone()),
            None => self.cutoff.clone(),
        }
    }

    /// Largest log level used by any term.
    pub fn depth(&self) -> usize {
        self.terms.iter().map(|t| t.exp.depth()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        Series {
            terms: self.terms.iter().map(|t| Term::new(-&t.coeff, t.exp.clone())).collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if *c == 0u32 {
            return Series { terms: Vec::new(), cutoff: self.cutoff.clone() };
        }
        Series {
            terms: self.terms.iter().map(|t| Term::new(&t.coeff * c, t.exp.clone())).collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let cutoff = coarser(&self.cutoff, &other.cutoff);
        let above = |e: &E| cutoff.as_ref().is_none_or(|k| e > k);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.exp.cmp(&b.exp),
                (Some(_), None) => Ordering::Greater,
                _ => Ordering::Less,
            };
            let t = match ord {
                Ordering::Greater => {
                    i += 1;
                    self.terms[i - 1].clone()
                }
                Ordering::Less => {
                    j += 1;
                    other.terms[j - 1].clone()
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    let a = &self.terms[i - 1];
                    Term::new(&a.coeff + &other.terms[j - 1].coeff, a.exp.clone())
                }
            };
            if t.coeff != 0u32 && above(&t.exp) {
                out.push(t);
            }
        }
        Series { terms: out, cutoff }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product. The unknown part of `f` times `g` is bounded by
    /// `cutoff(f) + top(g)`, and symmetrically; the coarser bound wins.
    /// Leading term of `self - other`, found without forming the difference.
    pub fn lead_of_difference(&self, other: &Self) -> Option<Term<E>> {
        let bound = coarser(&self.cutoff, &other.cutoff);
        let (mut a, mut b) = (self.terms.iter().peekable(), other.terms.iter().peekable());
        let lead = loop {
            match (a.peek(), b.peek()) {
                (None, None) => return None,
                (Some(s), Some(t)) if s.exp == t.exp => {
                    let (s, t) = (a.next()?, b.next()?);
                    if s.coeff != t.coeff {
                        break Term::new(&s.coeff - &t.coeff, s.exp.clone());
                    }
                }
                (Some(s), t) if t.is_none_or(|t| s.exp > t.exp) => break (*s).clone(),
                (_, Some(t)) => break Term::new(-&t.coeff, t.exp.clone()),
                (Some(_), None) => unreachable!(),
            }
        };
        bound.as_ref().is_none_or(|k| lead.exp > *k).then_some(lead)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.factor().mul(other)
    }

    /// Prepares `self` as the fixed left operand of many products.
    pub(crate) fn factor(&self) -> Factor<'_, E> {
        Factor::new(Cow::Borrowed(self))
    }

    pub(crate) fn common_denominator(&self) -> (Natural, Vec<Integer>) {
        let d = self.terms.iter().fold(Natural::ONE, |acc, t| acc.lcm(t.coeff.denominator_ref()));
        let numers = self
            .terms
            .iter()
            .map(|t| {
                let n = t.coeff.numerator_ref() * (&d / t.coeff.denominator_ref());
                Integer::from_sign_and_abs(t.coeff >= 0u32, n)
            })
            .collect();
        (d, numers)
    }

    pub fn mul_term(&self, t: &Term<E>) -> Self {
        if t.coeff == 0u32 {
            return Series { terms: Vec::new(), cutoff: self.cutoff.clone() }.mul(&Self::zero());
        }
        Series {
            terms: self.terms.iter().map(|s| s.mul(t)).collect(),
            cutoff: self.cutoff.as_ref().map(|c| c.exp_add(&t.exp)),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Drops every term at or below `new_cutoff`. Refining the cutoff would
    /// claim knowledge of unknown terms and is rejected.
    pub fn truncate(&self, new_cutoff: &E) -> Result<Self> {
        if let Some(c) = &self.cutoff {
            if new_cutoff < c {
                return Err(Error::Precision(format!(
                    "cannot refine cutoff {} to {}",
                    Monomial(c),
                    Monomial(new_cutoff)
                )));
            }
        }
        Ok(self.coarsen(new_cutoff))
    }

    /// Like [`Series::truncate`], but a finer `new_cutoff` leaves the series
    /// untouched.
    pub fn coarsen(&self, new_cutoff: &E) -> Self {
        if self.cutoff.as_ref().is_some_and(|c| c >= new_cutoff) {
            return self.clone();
        }
        Series {
            terms: self.terms.iter().filter(|t| t.exp > *new_cutoff).cloned().collect(),
            cutoff: Some(new_cutoff.clone()),
        }
    }

    /// Coarsens to `c` unless the series is exact with every term above `c`,
    /// in which case nothing would be lost and exactness is kept.
    pub fn clip(&self, c: &E) -> Self {
        if self.is_exact() && self.terms.last().is_none_or(|t| t.exp > *c) {
            return self.clone();
        }
        self.coarsen(c)
    }

    /// The same terms read as an exact series. For iterates of approximation
    /// schemes, whose truncation is tracked separately.
    pub fn without_cutoff(&self) -> Self {
        Series { terms: self.terms.clone(), cutoff: None }
    }

    /// Equality of all terms above the coarser of the two cutoffs.
    pub fn eq_to_cutoff(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Whether `self ≺ m` for the monomial with exponent `e`.
    pub fn is_below(&self, e: &E) -> Result<bool> {
        match self.terms.first() {
            Some(t) => Ok(t.exp < *e),
            None => match &self.cutoff {
                None => Ok(true),
                Some(c) if c < e => Ok(true),
                Some(c) => Err(Error::Precision(format!(
                    "series is zero only above {}, cannot compare with {}",
                    Monomial(c),
                    Monomial(e)
                ))),
            },
        }
    }

    /// Multiplicative inverse via the geometric series
    /// `1/(c*m*(1+eps)) = (c*m)^-1 * sum (-eps)^k`.
    pub fn invert(&self, ctx: &FieldContext<E>) -> Result<Self> {
        let lead = self.lead().map_err(|_| Error::DivisionByZero)?.clone();
        let inv_lead = lead.recip();
        let eps = self.mul_term(&inv_lead).sub(&Self::one());
        let target = match &eps.cutoff {
            Some(c) => c.clone(),
            None => ctx.cutoff.exp_add(&lead.exp),
        };
        let mut sum = Self::one();
        if let Some(step) = eps.top() {
            let bound = crossing_bound(&E::zero(), &step, &target, ctx, "geometric series")?;
            let minus_eps = eps.neg();
            let mut power = Self::one();
            for _ in 0..bound {
                power = power.mul(&minus_eps).coarsen(&target);
                sum = sum.add(&power);
            }
            sum = sum.coarsen(&target);
        }
        Ok(sum.mul_term(&inv_lead))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self.terms.iter().map(|t| json!({
                "coeff": fmt_rational(&t.coeff),
                "exponent": t.exp.to_json(),
            })).collect::<Vec<_>>(),
            "cutoff": self.cutoff.as_ref().map(|c| c.to_json()).unwrap_or(Value::Null),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Domain(format!("malformed series record: {what}"));
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("terms"))?;
        let terms = terms
            .iter()
            .map(|t| {
                let coeff = t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("coeff"))?;
                let exp = t.get("exponent").ok_or_else(|| bad("exponent"))?;
                Ok(Term::new(parse_rational(coeff)?, E::from_json(exp)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let cutoff = match v.get("cutoff") {
            None | Some(Value::Null) => None,
            Some(c) => Some(E::from_json(c)?),
        };
        Ok(Self::from_terms(terms, cutoff))
    }
}

const KRONECKER_MIN_TERMS: usize = 16;

/// Signed coefficients `ns` at `slots`, each `width` limbs wide, as one integer.
fn pack(ns: &[Integer], slots: &[usize], len: usize, width: usize) -> Integer {
    let mut pos: Vec<Limb> = vec![0; len * width];
    let mut neg: Vec<Limb> = vec![0; len * width];
    for (n, &s) in ns.iter().zip(slots) {
        let buf = if *n >= 0u32 { &mut pos } else { &mut neg };
        for (j, limb) in n.unsigned_abs_ref().limbs().enumerate() {
            buf[s * width + j] = limb;
        }
    }
    Integer::from(Natural::from_owned_limbs_asc(pos)) - Integer::from(Natural::from_owned_limbs_asc(neg))
}

/// Inverse of [`pack`] for `len` signed slots of `width` limbs.
fn unpack(n: Integer, len: usize, width: usize) -> Vec<Integer> {
    let negative = n < 0u32;
    let mut limbs = n.unsigned_abs().into_limbs_asc();
    limbs.resize(len * width, 0);
    let bits = width as u64 * u64::from(Limb::BITS);
    let (modulus, half) = (Integer::from(Natural::power_of_2(bits)), Integer::from(Natural::power_of_2(bits - 1)));
    let mut carry = false;
    limbs
        .chunks(width)
        .map(|chunk| {
            let mut digit = Integer::from(Natural::from_limbs_asc(chunk));
            if carry {
                digit += Integer::ONE;
            }
            carry = digit >= half;
            if carry {
                digit -= &modulus;
            }
            if negative {
                -digit
            } else {
                digit
            }
        })
        .collect()
}

/// A series in common-denominator form, reused across products.
pub(crate) struct Factor<'a, E: Exponent> {
    series: Cow<'a, Series<E>>,
    denom: Natural,
    numers: Vec<Integer>,
}

impl<'a, E: Exponent> Factor<'a, E> {
    pub(crate) fn new(series: Cow<'a, Series<E>>) -> Self {
        let (denom, numers) = if series.is_exact() && series.len() == 1 {
            (Natural::ONE, Vec::new())
        } else {
            series.common_denominator()
        };
        Factor { series, denom, numers }
    }

    /// [`Series::mul`] with the prepared series on the left.
    pub(crate) fn mul(&self, other: &Series<E>) -> Series<E> {
        let f = &*self.series;
        if other.is_exact() && other.len() == 1 {
            return f.mul_term(&other.terms[0]);
        }
        if f.is_exact() && f.len() == 1 {
            return other.mul_term(&f.terms[0]);
        }
        let cutoff = coarser(&add_bounds(&f.cutoff, &other.top()), &add_bounds(&other.cutoff, &f.top()));
        // integer numerators over common denominators avoid a gcd per product
        let (db, nb) = other.common_denominator();
        let d = Integer::from(&self.denom * db);
        if let Some(terms) = self.kronecker(other, &nb, &d, cutoff.as_ref()) {
            return Series { terms, cutoff };
        }
        let mut map: BTreeMap<E, Integer> = BTreeMap::new();
        for (a, x) in f.terms.iter().zip(&self.numers) {
            for (b, y) in other.terms.iter().zip(&nb) {
                let e = a.exp.exp_add(&b.exp);
                if cutoff.as_ref().is_some_and(|k| e <= *k) {
                    break;
                }
                map.entry(e).or_insert(Integer::ZERO).add_mul_assign(x, y);
            }
        }
        let map = map.into_iter().map(|(e, n)| (e, Q::from_integers_ref(&n, &d))).collect();
        Series::from_map(map, cutoff)
    }

    /// The product as one big-integer multiplication: each series becomes
    /// an integer with one coefficient per slot of `KRONECKER_LIMBS` width.
    /// Applies to rational exponents whose lattice is not much finer than
    /// the supports.
    fn kronecker(&self, other: &Series<E>, nb: &[Integer], d: &Integer, cutoff: Option<&E>) -> Option<Vec<Term<E>>> {
        let f = &*self.series;
        if f.len().min(other.len()) < KRONECKER_MIN_TERMS {
            return None;
        }
        let exps = f.terms.iter().chain(&other.terms).map(|t| t.exp.as_rational());
        let step = exps.clone().try_fold(Natural::ONE, |acc, e| Some(acc.lcm(e?.denominator_ref())))?;
        let step = Q::from(step);
        let slot = |top: &Q, e: &E| usize::try_from(((top - e.as_rational()?) * &step).numerator_ref()).ok();
        let (ftop, gtop) = (f.terms[0].exp.as_rational()?, other.terms[0].exp.as_rational()?);
        let fslots: Vec<usize> = f.terms.iter().map(|t| slot(ftop, &t.exp)).collect::<Option<_>>()?;
        let gslots: Vec<usize> = other.terms.iter().map(|t| slot(gtop, &t.exp)).collect::<Option<_>>()?;
        let (flen, glen) = (fslots.last()? + 1, gslots.last()? + 1);
        if flen > 4 * f.len() || glen > 4 * other.len() {
            return None;
        }
        let bits = |ns: &[Integer]| ns.iter().map(|n| n.significant_bits()).max().unwrap_or(0);
        let guard = u64::from(usize::BITS - flen.min(glen).leading_zeros()) + 2;
        let width = (bits(&self.numers) + bits(nb) + guard).div_ceil(u64::from(Limb::BITS)) as usize;
        let product = pack(&self.numers, &fslots, flen, width) * pack(nb, &gslots, glen, width);
        let top = f.terms[0].exp.exp_add(&other.terms[0].exp);
        let slot_exp = |s: usize| top.exp_sub(&E::x().scale(&(Q::from(s) / &step)));
        let terms = unpack(product, flen + glen - 1, width)
            .into_iter()
            .enumerate()
            .filter(|(_, n)| *n != 0u32)
            .map(|(s, n)| Term::new(Q::from_integers_ref(&n, d), slot_exp(s)))
            .take_while(|t| cutoff.is_none_or(|k| t.exp > *k))
            .collect();
        Some(terms)
    }
}

impl<E: Exponent> fmt::Display for Series<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{t}")?;
            } else if t.coeff < 0u32 {
                write!(f, " - {}", Term::new(-&t.coeff, t.exp.clone()))?;
            } else {
                write!(f, " + {t}")?;
            }
        }
        Ok(())
    }
}

/// Dominance comparison decided on leading exponents. The zero series is
/// `≺` every nonzero series, provided its cutoff lies below that series.
pub fn dominance<E: Exponent>(f: &Series<E>, g: &Series<E>) -> Result<Dominance> {
    let ord = match (f.terms.first(), g.terms.first()) {
        (Some(a), Some(b)) => a.exp.cmp(&b.exp),
        (None, Some(b)) => {
            return if f.is_below(&b.exp)? { Ok(Dominance::Smaller) } else { unreachable!() };
        }
        (Some(a), None) => {
            return if g.is_below(&a.exp)? { Ok(Dominance::Larger) } else { unreachable!() };
        }
        (None, None) => {
            if f.is_exact() && g.is_exact() {
                Ordering::Equal
            } else {
                return Err(Error::Precision("comparing two series that vanish to their cutoffs".into()));
            }
        }
    };
    Ok(match ord {
        Ordering::Less => Dominance::Smaller,
        Ordering::Equal => Dominance::Comparable,
        Ordering::Greater => Dominance::Larger,
    })
}

/// `f ≺ g`
pub fn prec<E: Exponent>(f: &Series<E>, g: &Series<E>) -> Result<bool> {
    Ok(dominance(f, g)? == Dominance::Smaller)
}

/// `f ∼ g`: same leading term. Both operands must be nonzero.
pub fn asymptotic<E: Exponent>(f: &Series<E>, g: &Series<E>) -> Result<bool> {
    Ok(f.lead()? == g.lead()?)
}
