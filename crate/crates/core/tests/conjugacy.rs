//! Properties of the conjugacy solver and the decision procedures.

use proptest::prelude::*;

use parabolic::calculus::FieldContext;
use parabolic::conjugacy::{
    asymptotically_conjugate, conjugacy_scale, construct_conjugator, decide_transseries, verify_witness, StepOutcome,
    Verdict,
};
use parabolic::exponents::{q, qi, DepthPolicy, Exponent, LogLexExp, RationalExp, Q};
use parabolic::group::{group_conjugate, log_map, GroupElement, ParabolicSeries};
use parabolic::series::{prec, Series, Term};

type K = Series<RationalExp>;
type L = Series<LogLexExp>;

fn coeff() -> impl Strategy<Value = Q> {
    (-5i64..=5, 1i64..=4).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, d)| q(n, d))
}

/// Contracting `g` with a constant lead, and `f = g + t` for a smaller term `t`.
fn k_pair() -> impl Strategy<Value = (K, K)> {
    let tail = prop::collection::vec((coeff(), -6i64..=-1, 1i64..=3), 0..=2);
    (coeff(), tail, coeff(), -9i64..=-1, 1i64..=3).prop_map(|(lead, tail, c, n, d)| {
        let terms = std::iter::once(Term::new(lead, RationalExp::int(0)))
            .chain(tail.into_iter().map(|(c, n, d)| Term::new(c, RationalExp::new(n, d))));
        let g = K::from_terms(terms, None);
        let f = g.add(&K::term(c, RationalExp::new(n, d)));
        (f, g)
    })
}

fn loglex_term(a0: (i64, i64), a1: i64) -> LogLexExp {
    LogLexExp::new(vec![q(a0.0, a0.1), qi(a1)])
}

/// A non-degenerate `δ ∼ c x^a log(x)^b` with `a < 1`.
fn transseries_delta() -> impl Strategy<Value = L> {
    (coeff(), -2i64..=1, -2i64..=2, prop::option::of((coeff(), -2i64..=-1)))
        .prop_map(|(c, a0, a1, tail)| {
            let mut s = L::term(c, loglex_term((a0, 2), a1));
            if let Some((t, drop)) = tail {
                s = s.add(&L::term(t, loglex_term((a0 + 2 * drop, 2), 0)));
            }
            s
        })
        .prop_filter("non-degenerate", |d| d.top().is_some_and(|t| t.coord(0) < qi(1)))
}

fn k_ctx() -> FieldContext<RationalExp> {
    FieldContext::rational().with_cutoff(RationalExp::int(-12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_step_contracts_the_residual((f, g) in k_pair()) {
        let ctx = k_ctx();
        let (fe, ge) = (GroupElement::new(f.clone()).unwrap(), GroupElement::new(g.clone()).unwrap());
        if let StepOutcome::Correction { y, .. } = asymptotically_conjugate(&fe, &ge, &ctx).unwrap() {
            let moved = group_conjugate(&y, &ge, &ctx).unwrap();
            prop_assert!(prec(&moved.series().sub(&f), &f.sub(&g)).unwrap());
        }
    }

    #[test]
    fn solver_witnesses_verify_and_residuals_descend((f, g) in k_pair()) {
        let ctx = k_ctx();
        let (fe, ge) = (GroupElement::new(f).unwrap(), GroupElement::new(g).unwrap());
        let out = construct_conjugator(&fe, &ge, &ctx).unwrap();
        prop_assert!(out.trace.windows(2).all(|w| w[1].residual.exp < w[0].residual.exp));
        match out.verdict {
            Verdict::Conjugate => prop_assert!(verify_witness(&fe, &ge, out.witness.as_ref().unwrap(), &ctx)),
            Verdict::NotConjugate => prop_assert!(out.trace.is_empty() && out.obstruction.is_some()),
            Verdict::Undetermined => prop_assert!(!out.trace.is_empty() && out.obstruction.is_some()),
        }
    }

    #[test]
    fn transseries_conjugacy_is_downward_closed(
        delta in transseries_delta(),
        c in coeff(),
        smaller in coeff(),
        offset in 0i64..=2,
        drop in 1i64..=3,
    ) {
        let top = conjugacy_scale(&delta).top().unwrap();
        let e = top.exp_add(&loglex_term((-offset, 2), -1));
        let below = e.exp_add(&loglex_term((0, 1), -drop));
        let (eps, eps_below) = (delta.add(&L::term(c, e.clone())), delta.add(&L::term(smaller, below)));
        prop_assume!(GroupElement::new(eps.clone()).is_ok() && GroupElement::new(eps_below.clone()).is_ok());
        prop_assert!(decide_transseries(&delta, &eps).unwrap());
        prop_assert!(decide_transseries(&delta, &eps_below).unwrap());

        // the correction chains at the residual's x-level need a log cutoff
        let cutoff = LogLexExp::new(vec![e.coord(0), qi(-6)]);
        let ctx = FieldContext::loglex(DepthPolicy::Extendable).with_cutoff(cutoff);
        let x = L::x();
        let g = log_map(&ParabolicSeries::new(x.add(&delta)).unwrap(), &ctx).unwrap();
        for target in [&eps, &eps_below] {
            let f = log_map(&ParabolicSeries::new(x.add(target)).unwrap(), &ctx).unwrap();
            let out = construct_conjugator(&f, &g, &ctx).unwrap();
            prop_assert_eq!(out.verdict, Verdict::Conjugate);
            prop_assert!(verify_witness(&f, &g, out.witness.as_ref().unwrap(), &ctx));
            prop_assert!(out.depth <= out.input_depth + 1);
        }
    }
}

#[test]
fn witness_at_the_level_of_x_is_kept_to_relative_precision() {
    // δ ∼ x^(1/2) log(x) and ε - δ at the same x-level: the first correction
    // is ∼ x log(x)^-2, whose exponential has infinitely many terms ≻ x^(1/2)
    let l = |c: Q, a1: i64| L::term(c, loglex_term((1, 2), a1));
    let delta = l(qi(-3), 1);
    let eps = delta.add(&l(q(-4, 3), -1));
    assert!(decide_transseries(&delta, &eps).unwrap());
    let ctx = FieldContext::loglex(DepthPolicy::Extendable).with_cutoff(loglex_term((1, 2), -6));
    let x = L::x();
    let g = log_map(&ParabolicSeries::new(x.add(&delta)).unwrap(), &ctx).unwrap();
    let f = log_map(&ParabolicSeries::new(x.add(&eps)).unwrap(), &ctx).unwrap();
    let out = construct_conjugator(&f, &g, &ctx).unwrap();
    assert_eq!(out.verdict, Verdict::Conjugate);
    let phi = out.witness.as_ref().unwrap();
    assert_eq!(phi.series().top(), Some(loglex_term((1, 1), -2)));
    // φ and σ are known to ctx.cutoff · x / lead(g)
    assert_eq!(phi.series().cutoff(), Some(&loglex_term((1, 1), -7)));
    assert!(verify_witness(&f, &g, phi, &ctx));
    let bad = GroupElement::new(phi.series().add(&L::term(qi(1), loglex_term((1, 1), -5)))).unwrap();
    assert!(!verify_witness(&f, &g, &bad, &ctx));
}

#[test]
fn logarithmic_chain_ends_at_a_log_cutoff() {
    // the conjugator of x + 5/4 log(x) and x + 5/4 log(x) - 1/4 log(x)/x runs
    // through c_k x^-1 log(x)^-k for every k
    let delta = L::term(q(5, 4), LogLexExp::from_ints(&[0, 1]));
    let eps = delta.add(&L::term(q(-1, 4), LogLexExp::from_ints(&[-1, 1])));
    let ctx = FieldContext::loglex(DepthPolicy::Extendable).with_cutoff(LogLexExp::from_ints(&[-2, -6]));
    let x = L::x();
    let g = log_map(&ParabolicSeries::new(x.add(&delta)).unwrap(), &ctx).unwrap();
    let f = log_map(&ParabolicSeries::new(x.add(&eps)).unwrap(), &ctx).unwrap();
    let out = construct_conjugator(&f, &g, &ctx).unwrap();
    assert_eq!(out.verdict, Verdict::Conjugate);
    let chain: Vec<_> = out.trace.iter().filter(|t| t.correction.exp.coord(0) == qi(-1)).collect();
    assert!(chain.len() >= 4, "{:?}", out.trace);
    assert!(verify_witness(&f, &g, out.witness.as_ref().unwrap(), &ctx));
}

#[test]
fn resonant_family_has_a_witness_at_every_exponent() {
    let ctx = FieldContext::rational().with_cutoff(RationalExp::int(-8));
    let k = |ts: &[(i64, i64)]| {
        ParabolicSeries::new(K::from_terms(ts.iter().map(|&(n, d)| Term::new(qi(1), RationalExp::new(n, d))), None))
            .unwrap()
    };
    let g = log_map(&k(&[(1, 1), (0, 1)]), &ctx).unwrap();
    for (n, d) in [(-2, 3), (-3, 5), (-7, 10)] {
        let f = log_map(&k(&[(1, 1), (0, 1), (n, d)]), &ctx).unwrap();
        let out = construct_conjugator(&f, &g, &ctx).unwrap();
        assert_eq!(out.verdict, Verdict::Conjugate, "c = {n}/{d}");
        assert!(verify_witness(&f, &g, out.witness.as_ref().unwrap(), &ctx));
        assert!(out.trace.len() >= 2);
    }
    let f = log_map(&k(&[(1, 1), (0, 1), (-1, 1)]), &ctx).unwrap();
    assert_eq!(construct_conjugator(&f, &g, &ctx).unwrap().verdict, Verdict::NotConjugate);
}
