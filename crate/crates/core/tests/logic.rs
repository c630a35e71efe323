use std::collections::BTreeMap;

use graded_theory::combine::catalog;
use graded_theory::logic::{
    derive_closure, entails, ClosureConfig, Entailment, Normalizer, StateNormalizer,
};
use graded_theory::{Error, Grade, Term};

fn top() -> Grade {
    Grade::set(["*"])
}

fn x() -> Term {
    Term::var("x")
}

fn upd(v: usize, t: Term) -> Term {
    Term::app(format!("update_{v}"), vec![t])
}

#[test]
fn exception_variable_and_raise_are_apart() {
    let th = catalog::exception(&["e1"]);
    let u = derive_closure(&th, &["x".to_string()], &ClosureConfig::with_depth(2)).unwrap();
    assert_eq!(u.equivalent(&x(), &Term::constant("raise_e1")).unwrap(), Some(false));
    let ok_e1 = Grade::set(["Ok", "e1"]);
    let cx = Term::coerce(ok_e1.clone(), x());
    let cr = Term::coerce(ok_e1, Term::constant("raise_e1"));
    assert_eq!(u.equivalent(&cx, &cr).unwrap(), Some(false));
    for t in u.terms() {
        assert_eq!(u.equivalent(t, t).unwrap(), Some(true));
    }
}

#[test]
fn state_lookup_update_is_proved() {
    let th = catalog::state(2);
    let lhs = Term::app("lookup", vec![upd(0, x()), upd(1, x())]);
    let rhs = Term::coerce(top(), x());
    assert_eq!(entails(&th, &lhs, &rhs, &ClosureConfig::with_depth(3)).unwrap(), Entailment::Proved);
}

#[test]
fn entailment_examples() {
    let th = catalog::state(2);
    let s = upd(0, upd(1, x()));
    assert_eq!(entails(&th, &s, &s, &ClosureConfig::with_depth(1)).unwrap(), Entailment::Proved);

    let ex = catalog::exception(&["e1", "e2"]);
    let both = Grade::set(["e1", "e2"]);
    let a = Term::coerce(both.clone(), Term::constant("raise_e1"));
    let b = Term::coerce(both, Term::constant("raise_e2"));
    assert_eq!(entails(&ex, &a, &b, &ClosureConfig::with_depth(3)).unwrap(), Entailment::Unknown);

    let err = entails(&th, &x(), &upd(0, x()), &ClosureConfig::with_depth(2)).unwrap_err();
    assert!(matches!(err, Error::GradeMismatch { .. }));
}

#[test]
fn proved_is_monotone_in_depth() {
    let th = catalog::state(2);
    let s = upd(0, upd(1, x()));
    let t = upd(1, x());
    for d in 2..=3 {
        let cfg = ClosureConfig::with_depth(d);
        assert_eq!(entails(&th, &s, &t, &cfg).unwrap(), Entailment::Proved, "depth {d}");
    }
}

#[test]
fn universe_cap_is_reported() {
    let th = catalog::state(2);
    let cfg = ClosureConfig {
        depth: 3,
        max_terms: 50,
        ..Default::default()
    };
    let err = derive_closure(&th, &["x".to_string()], &cfg).unwrap_err();
    assert!(matches!(err, Error::Resource { cap: 50, .. }));
}

#[test]
fn state_closure_matches_normalizer_fibres() {
    let th = catalog::state(2);
    let nz = StateNormalizer::new(th.clone()).unwrap();
    let ctx = vec!["x".to_string()];
    let u = derive_closure(&th, &ctx, &ClosureConfig::with_depth(3)).unwrap();
    let mut fibres: BTreeMap<Term, Vec<Term>> = BTreeMap::new();
    for t in u.terms() {
        fibres.entry(nz.normalize_in(t, &ctx).unwrap()).or_default().push(t.clone());
    }
    let mut classes: Vec<Vec<Term>> = u.classes();
    let mut fibres: Vec<Vec<Term>> = fibres.into_values().collect();
    for c in classes.iter_mut().chain(fibres.iter_mut()) {
        c.sort();
    }
    classes.sort();
    fibres.sort();
    assert_eq!(classes.len(), 5);
    assert_eq!(classes, fibres);
}

#[test]
fn state_normal_forms() {
    let nz = StateNormalizer::new(catalog::state(2)).unwrap();
    assert_eq!(nz.normalize(&upd(0, upd(1, x()))).unwrap(), upd(1, x()));
    let t = Term::app("lookup", vec![upd(1, x()), upd(0, x())]);
    let n = nz.normalize(&t).unwrap();
    assert_eq!(nz.normalize(&n).unwrap(), n);
}
