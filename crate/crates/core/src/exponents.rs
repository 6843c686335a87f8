//! Ordered abelian groups of monomial exponents.
//!
//! Two concrete groups are provided. [`RationalExp`] is the value group of
//! power series with rational exponents, monomials `x^e`. [`LogLexExp`]
//! is the value group of logarithmic transseries, monomials
//! `x^a0 * log(x)^a1 * log(log(x))^a2 * ...`, ordered lexicographically.
//!
//! Throughout the crate the order is the *monomial-size* order: a larger
//! exponent means a larger monomial, so `x^2 > x > 1 > x^-1`.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use malachite_base::num::arithmetic::traits::{Ceiling, Reciprocal, Sign};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::conversion::traits::IsInteger;
use malachite_nz::integer::Integer;
use malachite_q::Rational;
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact rational numbers used for both coefficients and exponents.
pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_signeds(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from(n)
}

/// Renders a rational as `p/q`, or `p` for integers.
pub fn fmt_rational(r: &Q) -> String {
    r.to_string()
}

/// Parses `p`, `-p`, `p/q` or `-p/q`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Domain(format!("not a rational number: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: Integer = n.parse().map_err(|_| bad())?;
    let d: Integer = d.parse().map_err(|_| bad())?;
    if d == 0u32 {
        return Err(Error::DivisionByZero);
    }
    Ok(Q::from_integers(n, d))
}

/// How far `LogLex` asymptotic integration may reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DepthPolicy {
    /// Only `log` levels `0..=n` are available; the field has a pseudo-gap
    /// at `1/(l0*l1*...*ln)`.
    Fixed(usize),
    /// New `log` levels are adjoined on demand; there is no pseudo-gap.
    Extendable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentKind {
    Rational,
    LogLex,
}

impl Display for ExponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentKind::Rational => f.write_str("rational"),
            ExponentKind::LogLex => f.write_str("loglex"),
        }
    }
}

/// Why a monomial has no asymptotic integral under the given policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntegrationFailure {
    PseudoGap,
    DepthExceeded { found: usize, limit: usize },
}

/// An ordered abelian group of monomial exponents together with the
/// differential data of its monomials.
pub trait Exponent: Clone + Eq + Ord + Hash + Debug + Display + Send + Sync + 'static {
    const KIND: ExponentKind;

    fn zero() -> Self;

    /// Exponent of the monomial `x`.
    fn x() -> Self;

    fn exp_add(&self, other: &Self) -> Self;

    fn exp_neg(&self) -> Self;

    fn exp_sub(&self, other: &Self) -> Self {
        self.exp_add(&other.exp_neg())
    }

    fn exp_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Multiplies the exponent by a rational, i.e. `m -> m^r`.
    fn scale(&self, r: &Q) -> Self;

    /// The exponent as a point of `Q`, for groups inside `Q` with `x` at 1.
    fn as_rational(&self) -> Option<&Q> {
        None
    }

    /// Highest log level carrying a nonzero coordinate (0 for `Rational`).
    fn depth(&self) -> usize;

    /// Terms `(coefficient, exponent)` of the derivative of the monomial.
    fn monomial_derivative(&self) -> Vec<(Q, Self)>;

    /// A term `r * n` with `(r*n)' ~ m` for the monomial `m = self`.
    fn monomial_antiderivative(&self, policy: DepthPolicy) -> std::result::Result<(Q, Self), IntegrationFailure>;

    /// The pseudo-gap monomial of the field under `policy`, if there is one.
    fn pseudo_gap(policy: DepthPolicy) -> Option<Self>;

    /// Terms of `log m`, or `None` when the field has no logarithms.
    fn monomial_log(&self) -> Option<Vec<(Q, Self)>>;

    /// Smallest `k >= 0` such that `start + k*step <= target`, for a
    /// strictly negative `step`. `None` when no finite `k` exists.
    fn steps_to_cross(start: &Self, step: &Self, target: &Self) -> Option<usize>;

    fn fmt_monomial(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    /// Parses a command-line exponent spec (`-40`, `-81/2`, or `1,-8` for
    /// `LogLex` coordinates).
    fn parse_spec(s: &str) -> Result<Self>;
}

/// Exact comparison tuned for the small rationals that occur as exponents.
fn cmp_small(a: &Q, b: &Q) -> Ordering {
    let (sa, sb) = (a.sign(), b.sign());
    if sa != sb {
        return sa.cmp(&sb);
    }
    let (an, ad) = a.numerator_and_denominator_ref();
    let (bn, bd) = b.numerator_and_denominator_ref();
    let magnitude = if ad == bd { an.cmp(bn) } else { (an * bd).cmp(&(bn * ad)) };
    if sa == Ordering::Less {
        magnitude.reverse()
    } else {
        magnitude
    }
}

fn ceil_to_usize(r: &Q) -> Option<usize> {
    if *r < 0u32 {
        return Some(0);
    }
    usize::try_from(&r.ceiling()).ok()
}

fn fmt_power(f: &mut fmt::Formatter<'_>, base: &str, e: &Q) -> fmt::Result {
    if *e == 1u32 {
        f.write_str(base)
    } else if e.is_integer() && *e > 0u32 {
        write!(f, "{base}^{e}")
    } else {
        write!(f, "{base}^({})", fmt_rational(e))
    }
}

fn rational_from_json(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n.as_i64().map(qi).ok_or_else(|| Error::Domain(format!("not an exact integer: {n}"))),
        other => Err(Error::Domain(format!("expected a rational, got {other}"))),
    }
}

/// Exponent `e` of a monomial `x^e` with `e` rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalExp(pub Q);

impl Ord for RationalExp {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_small(&self.0, &other.0)
    }
}

impl PartialOrd for RationalExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RationalExp {
    pub fn new(n: i64, d: i64) -> Self {
        RationalExp(q(n, d))
    }

    pub fn int(n: i64) -> Self {
        RationalExp(qi(n))
    }

    pub fn value(&self) -> &Q {
        &self.0
    }
}

impl Debug for RationalExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rational(&self.0))
    }
}

impl Display for RationalExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_rational(&self.0))
    }
}

impl Exponent for RationalExp {
    const KIND: ExponentKind = ExponentKind::Rational;

    fn zero() -> Self {
        RationalExp(Q::ZERO)
    }

    fn x() -> Self {
        RationalExp(Q::ONE)
    }

    fn as_rational(&self) -> Option<&Q> {
        Some(&self.0)
    }

    fn exp_add(&self, other: &Self) -> Self {
        RationalExp(&self.0 + &other.0)
    }

    fn exp_neg(&self) -> Self {
        RationalExp(-&self.0)
    }

    fn exp_sub(&self, other: &Self) -> Self {
        RationalExp(&self.0 - &other.0)
    }

    fn scale(&self, r: &Q) -> Self {
        RationalExp(&self.0 * r)
    }

    fn depth(&self) -> usize {
        0
    }

    fn monomial_derivative(&self) -> Vec<(Q, Self)> {
        if self.0 == 0u32 {
            return Vec::new();
        }
        vec![(self.0.clone(), RationalExp(&self.0 - Q::ONE))]
    }

    fn monomial_antiderivative(&self, _policy: DepthPolicy) -> std::result::Result<(Q, Self), IntegrationFailure> {
        let e1 = &self.0 + Q::ONE;
        if e1 == 0u32 {
            return Err(IntegrationFailure::PseudoGap);
        }
        Ok(((&e1).reciprocal(), RationalExp(e1)))
    }

    fn pseudo_gap(_policy: DepthPolicy) -> Option<Self> {
        Some(RationalExp(-Q::ONE))
    }

    fn monomial_log(&self) -> Option<Vec<(Q, Self)>> {
        None
    }

    fn steps_to_cross(start: &Self, step: &Self, target: &Self) -> Option<usize> {
        if step.0 >= 0u32 {
            return None;
        }
        ceil_to_usize(&((&start.0 - &target.0) / -&step.0))
    }

    fn fmt_monomial(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0u32 {
            f.write_str("1")
        } else {
            fmt_power(f, "x", &self.0)
        }
    }

    fn to_json(&self) -> Value {
        Value::String(fmt_rational(&self.0))
    }

    fn from_json(v: &Value) -> Result<Self> {
        rational_from_json(v).map(RationalExp)
    }

    fn parse_spec(s: &str) -> Result<Self> {
        if s.contains(',') {
            return Err(Error::ContextMismatch(format!(
                "{s:?} is a log-lexicographic exponent, the field has rational exponents"
            )));
        }
        parse_rational(s).map(RationalExp)
    }
}

/// Exponent `(a0, a1, ..., an)` of the monomial `l0^a0 * l1^a1 * ... * ln^an`
/// where `l0 = x` and `l(k+1) = log(lk)`.
///
/// Trailing zero coordinates are never stored, so the empty sequence is the
/// zero exponent and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LogLexExp {
    coords: Vec<Q>,
}

impl LogLexExp {
    pub fn new(coords: Vec<Q>) -> Self {
        let mut e = LogLexExp { coords };
        e.normalize();
        e
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&c| qi(c)).collect())
    }

    /// The monomial `l_k` (iterated logarithm of depth `k`).
    pub fn log_level(k: usize) -> Self {
        let mut coords = vec![Q::ZERO; k + 1];
        coords[k] = Q::ONE;
        LogLexExp { coords }
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    /// Coordinate `k`, zero beyond the stored length.
    pub fn coord(&self, k: usize) -> Q {
        self.coords.get(k).cloned().unwrap_or(Q::ZERO)
    }

    fn normalize(&mut self) {
        while self.coords.last().is_some_and(|c| *c == 0u32) {
            self.coords.pop();
        }
    }

    /// `self * l0 * l1 * ... * lk`
    fn times_log_product(&self, k: usize) -> Self {
        let len = self.coords.len().max(k + 1);
        let coords = (0..len)
            .map(|i| {
                let c = self.coord(i);
                if i <= k {
                    c + Q::ONE
                } else {
                    c
                }
            })
            .collect();
        Self::new(coords)
    }
}

impl Ord for LogLexExp {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.coords.len().max(other.coords.len());
        let zero = Q::ZERO;
        for i in 0..len {
            let a = self.coords.get(i).unwrap_or(&zero);
            let b = other.coords.get(i).unwrap_or(&zero);
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for LogLexExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Debug for LogLexExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&fmt_rational(c))?;
        }
        f.write_str(")")
    }
}

impl Display for LogLexExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_monomial(f)
    }
}

fn log_level_name(k: usize) -> String {
    let mut s = "x".to_string();
    for _ in 0..k {
        s = format!("log({s})");
    }
    s
}

impl Exponent for LogLexExp {
    const KIND: ExponentKind = ExponentKind::LogLex;

    fn zero() -> Self {
        LogLexExp::default()
    }

    fn x() -> Self {
        LogLexExp { coords: vec![Q::ONE] }
    }

    fn exp_add(&self, other: &Self) -> Self {
        let len = self.coords.len().max(other.coords.len());
        Self::new((0..len).map(|i| self.coord(i) + other.coord(i)).collect())
    }

    fn exp_neg(&self) -> Self {
        LogLexExp { coords: self.coords.iter().map(|c| -c).collect() }
    }

    fn scale(&self, r: &Q) -> Self {
        Self::new(self.coords.iter().map(|c| c * r).collect())
    }

    fn depth(&self) -> usize {
        self.coords.len().saturating_sub(1)
    }

    // m' = m * sum_k a_k / (l0 * ... * lk)
    fn monomial_derivative(&self) -> Vec<(Q, Self)> {
        let mut out = Vec::new();
        let mut shift = LogLexExp::zero();
        for (k, a) in self.coords.iter().enumerate() {
            shift = shift.exp_sub(&LogLexExp::log_level(k));
            if *a != 0u32 {
                out.push((a.clone(), self.exp_add(&shift)));
            }
        }
        out
    }

    fn monomial_antiderivative(&self, policy: DepthPolicy) -> std::result::Result<(Q, Self), IntegrationFailure> {
        let limit = match policy {
            DepthPolicy::Fixed(n) => {
                if self.depth() > n {
                    return Err(IntegrationFailure::DepthExceeded { found: self.depth(), limit: n });
                }
                n
            }
            // Scanning one level past the stored coordinates always finds a
            // zero, i.e. yields l_(n+1) for the pseudo-gap monomial of depth n.
            DepthPolicy::Extendable => self.coords.len(),
        };
        let minus_one = -Q::ONE;
        for k in 0..=limit {
            let a = self.coord(k);
            if a != minus_one {
                let factor = (a + Q::ONE).reciprocal();
                return Ok((factor, self.times_log_product(k)));
            }
        }
        Err(IntegrationFailure::PseudoGap)
    }

    fn pseudo_gap(policy: DepthPolicy) -> Option<Self> {
        match policy {
            DepthPolicy::Fixed(n) => Some(LogLexExp { coords: vec![-Q::ONE; n + 1] }),
            DepthPolicy::Extendable => None,
        }
    }

    // log(l0^a0 * ... * ln^an) = a0*l1 + ... + an*l(n+1)
    fn monomial_log(&self) -> Option<Vec<(Q, Self)>> {
        Some(
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0u32)
                .map(|(k, a)| (a.clone(), LogLexExp::log_level(k + 1)))
                .collect(),
        )
    }

    fn steps_to_cross(start: &Self, step: &Self, target: &Self) -> Option<usize> {
        let j = step.coords.iter().position(|c| *c != 0u32)?;
        if step.coords[j] >= 0u32 {
            return None;
        }
        for i in 0..j {
            match start.coord(i).cmp(&target.coord(i)) {
                Ordering::Less => return Some(0),
                Ordering::Greater => return None,
                Ordering::Equal => {}
            }
        }
        let mut k = ceil_to_usize(&((start.coord(j) - target.coord(j)) / -&step.coords[j]))?;
        let at = |k: usize| start.exp_add(&step.scale(&Q::from(k)));
        if at(k) > *target {
            k += 1;
        }
        Some(k)
    }

    fn fmt_monomial(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in self.coords.iter().enumerate() {
            if *a == 0u32 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            fmt_power(f, &log_level_name(k), a)?;
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        Value::Array(self.coords.iter().map(|c| Value::String(fmt_rational(c))).collect())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(items) => Ok(Self::new(items.iter().map(rational_from_json).collect::<Result<_>>()?)),
            other => Err(Error::ContextMismatch(format!(
                "expected a coordinate array for a log-lexicographic exponent, got {other}"
            ))),
        }
    }

    fn parse_spec(s: &str) -> Result<Self> {
        let coords = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coords))
    }
}

/// An exponent whose group is only known at run time.
///
/// Mixing the two groups is a [`Error::ContextMismatch`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AnyExponent {
    Rational(RationalExp),
    LogLex(LogLexExp),
}

impl AnyExponent {
    pub fn kind(&self) -> ExponentKind {
        match self {
            AnyExponent::Rational(_) => ExponentKind::Rational,
            AnyExponent::LogLex(_) => ExponentKind::LogLex,
        }
    }

    fn mismatch(&self, other: &Self) -> Error {
        Error::ContextMismatch(format!("cannot combine {} and {} exponents", self.kind(), other.kind()))
    }

    pub fn exp_add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (AnyExponent::Rational(a), AnyExponent::Rational(b)) => Ok(AnyExponent::Rational(a.exp_add(b))),
            (AnyExponent::LogLex(a), AnyExponent::LogLex(b)) => Ok(AnyExponent::LogLex(a.exp_add(b))),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn exp_cmp(&self, other: &Self) -> Result<Ordering> {
        match (self, other) {
            (AnyExponent::Rational(a), AnyExponent::Rational(b)) => Ok(a.cmp(b)),
            (AnyExponent::LogLex(a), AnyExponent::LogLex(b)) => Ok(a.cmp(b)),
            _ => Err(self.mismatch(other)),
        }
    }
}

impl Display for AnyExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyExponent::Rational(e) => e.fmt_monomial(f),
            AnyExponent::LogLex(e) => e.fmt_monomial(f),
        }
    }
}

/// Wraps an exponent so that it prints as a monomial.
pub struct Monomial<'a, E: Exponent>(pub &'a E);

impl<E: Exponent> Display for Monomial<'_, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_monomial(f)
    }
}
