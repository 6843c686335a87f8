//! How far `f ∗ g` is from its BCH terms of length at most three.

use proptest::prelude::*;

use parabolic::calculus::{lie_bracket, FieldContext};
use parabolic::exponents::{q, qi, DepthPolicy, Exponent, LogLexExp, RationalExp, Q};
use parabolic::group::{bch_truncated, star, GroupElement};
use parabolic::series::{prec, Series, Term};

type K = Series<RationalExp>;

fn k(terms: &[(Q, i64, i64)]) -> GroupElement<RationalExp> {
    GroupElement::new(K::from_terms(terms.iter().map(|(c, n, d)| Term::new(c.clone(), RationalExp::new(*n, *d))), None))
        .unwrap()
}

fn remainder(f: &GroupElement<RationalExp>, g: &GroupElement<RationalExp>) -> K {
    let ctx = FieldContext::rational().with_cutoff(RationalExp::int(-8));
    star(f, g, &ctx).unwrap().series().sub(&bch_truncated(f, g))
}

/// `ad_g(c x^A) = c (4A - 2) x^(A - 1/2)` for `g = 4 x^(1/2)`.
fn ad_g_power(c: Q, a: Q, times: usize) -> (Q, Q) {
    (0..times).fold((c, a), |(c, a), _| (&c * (qi(4) * &a - qi(2)), a - q(1, 2)))
}

#[test]
fn fifth_order_term_dominates_a_third_order_bracket() {
    let (f, g) = (k(&[(qi(3), -3, 2)]), k(&[(qi(4), 1, 2)]));
    let r = remainder(&f, &g);
    let (c, a) = ad_g_power(qi(3), q(-3, 2), 4);
    assert_eq!((c.clone(), a.clone()), (qi(40320), q(-7, 2)));
    // the linear part of f ∗ g in f carries -1/720 ad_g^4 f
    assert_eq!(r.lead().unwrap(), &Term::new(-c / qi(720), RationalExp(a)));
    let ffg = lie_bracket(f.series(), &lie_bracket(f.series(), g.series()));
    assert_eq!(ffg, k(&[(qi(-36), -9, 2)]).into_series());
    assert!(!prec(&r, &ffg).unwrap());
}

#[test]
fn fourth_order_term_dominates_the_combined_third_order_term() {
    // f - g is small, so ⟦f,⟦f,g⟧⟧ - ⟦g,⟦f,g⟧⟧ = ⟦f - g, ⟦f,g⟧⟧ cancels
    let (f, g) = (k(&[(qi(-1), 0, 1)]), k(&[(qi(-1), 0, 1), (q(-5, 2), -5, 3)]));
    let (fs, gs) = (f.series(), g.series());
    let fg = lie_bracket(fs, gs);
    assert_eq!(fg, k(&[(q(-25, 6), -8, 3)]).into_series());
    let third = lie_bracket(fs, &fg).sub(&lie_bracket(gs, &fg));
    assert_eq!(third, k(&[(q(125, 12), -16, 3)]).into_series());
    // -1/24 ⟦g,⟦f,⟦f,g⟧⟧⟧, where ad_f = -d/dx and ad_g ∼ -d/dx
    let ffg = -(q(-25, 6) * q(-8, 3));
    let fourth = q(-1, 24) * -(ffg * q(-11, 3));
    assert_eq!(fourth, q(275, 162));
    let r = remainder(&f, &g);
    assert_eq!(r.lead().unwrap(), &Term::new(fourth, RationalExp::new(-14, 3)));
    assert!(!prec(&r, &third).unwrap());
}

fn k_series() -> impl Strategy<Value = K> {
    let term = (-5i64..=5, 1i64..=4, -6i64..=1, 1i64..=2)
        .prop_filter("nonzero", |(n, ..)| *n != 0)
        .prop_map(|(n, d, en, ed)| Term::new(q(n, d), RationalExp::new(en, ed)));
    prop::collection::vec(term, 1..=3).prop_map(|ts| K::from_terms(ts, None)).prop_filter("nonzero", |s| !s.is_zero())
}

fn l_series() -> impl Strategy<Value = Series<LogLexExp>> {
    let term = (-5i64..=5, 1i64..=4, -4i64..=1, -2i64..=2)
        .prop_filter("nonzero", |(n, ..)| *n != 0)
        .prop_map(|(n, d, a0, a1)| Term::new(q(n, d), LogLexExp::new(vec![q(a0, 2), qi(a1)])));
    prop::collection::vec(term, 1..=3)
        .prop_map(|ts| Series::from_terms(ts, None))
        .prop_filter("nonzero", |s| !s.is_zero())
}

/// Every bracket of length four or more is an image of `⟦f,g⟧` under
/// contracting `ad` maps.
fn check_length_two_bound<E: Exponent>(f: Series<E>, g: Series<E>, ctx: FieldContext<E>) -> Result<(), TestCaseError> {
    let (Ok(f), Ok(g)) = (GroupElement::new(f), GroupElement::new(g)) else {
        return Ok(());
    };
    let fg = lie_bracket(f.series(), g.series());
    let Some(top) = fg.top() else {
        return Ok(());
    };
    let ctx = ctx.with_cutoff(top.exp_sub(&E::x()).exp_sub(&E::x()));
    let r = star(&f, &g, &ctx).unwrap().series().sub(&bch_truncated(&f, &g));
    for b in [f.series(), g.series(), &fg] {
        prop_assert!(prec(&r, b).unwrap(), "remainder {} not ≺ {}", r, b);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn remainder_is_below_the_length_two_brackets_k(f in k_series(), g in k_series()) {
        check_length_two_bound(f, g, FieldContext::rational())?;
    }

    #[test]
    fn remainder_is_below_the_length_two_brackets_tlog(f in l_series(), g in l_series()) {
        check_length_two_bound(f, g, FieldContext::loglex(DepthPolicy::Fixed(1)))?;
    }
}
