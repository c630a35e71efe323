use std::sync::Arc;
use std::time::Instant;

use graded_theory::combine::catalog;
use graded_theory::freemonad::{
    check_monad_laws, kleisli_compose, ExceptionMonad, GradedMonad, KleisliHom, LawMode, Outcome, StateMonad,
    TermMonad,
};
use graded_theory::logic::{CoercionNormalizer, Normalizer, StateNormalizer, StateValue};
use graded_theory::{Grade, GradeMonoid, Result, Term};

fn sets() -> Vec<Vec<String>> {
    vec![vec![], vec!["x0".into()], vec!["x0".into(), "x1".into()]]
}

fn exception_terms() -> TermMonad {
    TermMonad::new(Arc::new(CoercionNormalizer::new(catalog::exception(&["e1", "e2"])).unwrap()))
}

fn state_terms() -> TermMonad {
    TermMonad::new(Arc::new(StateNormalizer::new(catalog::state(2)).unwrap()))
}

#[test]
fn exception_term_monad_laws_exhaustive() {
    let m = exception_terms();
    let grades = m.monoid().enumerate(0);
    assert_eq!(grades.len(), 7);
    let start = Instant::now();
    let report = check_monad_laws(&m, &grades, &sets(), &LawMode::Exhaustive).unwrap();
    assert!(report.is_empty(), "{report:#?}");
    eprintln!("exhaustive exception laws in {:?}", start.elapsed());
}

#[test]
fn closed_form_monads_satisfy_laws() {
    let ex = ExceptionMonad::new(&["e1", "e2"]);
    let grades = ex.monoid().enumerate(0);
    assert!(check_monad_laws(&ex, &grades, &sets(), &LawMode::Exhaustive).unwrap().is_empty());

    let st = StateMonad::new(2);
    let gm = GradeMonoid::two();
    let grades = gm.enumerate(0);
    let small = vec![vec![], vec!["x0".to_string()]];
    assert!(check_monad_laws(&st, &grades, &small, &LawMode::Exhaustive).unwrap().is_empty());
    let mode = LawMode::Random { trials: 1000, seed: 7 };
    assert!(check_monad_laws(&st, &grades, &sets(), &mode).unwrap().is_empty());
}

#[test]
fn state_term_monad_laws_sampled() {
    let m = state_terms();
    let grades = m.monoid().enumerate(0);
    let mode = LawMode::Random { trials: 1000, seed: 11 };
    let report = check_monad_laws(&m, &grades, &sets(), &mode).unwrap();
    assert!(report.is_empty(), "{report:#?}");
}

#[test]
fn term_and_closed_exception_monads_agree() {
    let terms = exception_terms();
    let closed = ExceptionMonad::new(&["e1", "e2"]);
    let to_closed = |t: &Term| -> Outcome {
        let mut t = t;
        while let Term::Coerce(_, b) = t {
            t = b;
        }
        match t {
            Term::Var(x) => Outcome::Ok(x.clone()),
            Term::App { op, .. } => Outcome::Er(op.trim_start_matches("raise_").to_string()),
            Term::Coerce(..) => unreachable!(),
        }
    };
    let xs = vec!["x0".to_string(), "x1".to_string()];
    for g in closed.monoid().enumerate(0) {
        let mut a: Vec<Outcome> = terms.elements(&g, &xs).unwrap().iter().map(to_closed).collect();
        let mut b = closed.elements(&g, &xs).unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b, "at {g}");
    }
}

#[test]
fn term_and_closed_state_monads_agree() {
    let nz = StateNormalizer::new(catalog::state(2)).unwrap();
    let closed = StateMonad::new(2);
    let gm = GradeMonoid::two();
    let xs = vec!["x0".to_string(), "x1".to_string()];
    for g in gm.enumerate(0) {
        let mut a: Vec<StateValue> = nz
            .elements(&g, &xs)
            .unwrap()
            .iter()
            .map(|t| {
                let v = nz.eval(t).unwrap();
                closed.coerce(&gm.unit(), &g, &v).unwrap_or(v)
            })
            .collect();
        let mut b = closed.elements(&g, &xs).unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b, "at {g}");
    }
}

/// Flattening that rewrites every continuation's `e1` into `e2`.
struct BrokenMu(ExceptionMonad);

impl GradedMonad for BrokenMu {
    type Elem = Outcome;
    fn monoid(&self) -> &GradeMonoid {
        self.0.monoid()
    }
    fn elements(&self, m: &Grade, xs: &[String]) -> Result<Vec<Outcome>> {
        self.0.elements(m, xs)
    }
    fn unit(&self, x: &str) -> Outcome {
        self.0.unit(x)
    }
    fn coerce(&self, from: &Grade, to: &Grade, e: &Outcome) -> Result<Outcome> {
        self.0.coerce(from, to, e)
    }
    fn map(&self, m: &Grade, e: &Outcome, f: &dyn Fn(&str) -> String, ys: &[String]) -> Result<Outcome> {
        self.0.map(m, e, f, ys)
    }
    fn bind(
        &self,
        m1: &Grade,
        m2: &Grade,
        e: &Outcome,
        k: &dyn Fn(&str) -> Result<Outcome>,
        xs: &[String],
    ) -> Result<Outcome> {
        Ok(match self.0.bind(m1, m2, e, k, xs)? {
            Outcome::Er(x) if x == "e1" => Outcome::Er("e2".into()),
            other => other,
        })
    }
}

#[test]
fn broken_flattening_is_detected() {
    let m = BrokenMu(ExceptionMonad::new(&["e1", "e2"]));
    let grades = m.monoid().enumerate(0);
    let report = check_monad_laws(&m, &grades, &sets(), &LawMode::Exhaustive).unwrap();
    assert!(report.iter().any(|l| l.starts_with("right unit")), "{report:#?}");
}

#[test]
fn kleisli_composition_multiplies_grades() {
    let m = state_terms();
    let gm = m.monoid().clone();
    let top = gm.top().unwrap();
    let xs = vec!["x".to_string()];
    let f = KleisliHom {
        source: xs.clone(),
        target: xs.clone(),
        grade: top.clone(),
        images: vec![Term::app("update_0", vec![Term::var("x")])],
    };
    let g = KleisliHom {
        source: xs.clone(),
        target: xs.clone(),
        grade: top.clone(),
        images: vec![Term::app("update_1", vec![Term::var("x")])],
    };
    let fg = kleisli_compose(&m, &f, &g).unwrap();
    assert_eq!(fg.grade, top);
    assert_eq!(fg.images, g.images);
    let gf = kleisli_compose(&m, &g, &f).unwrap();
    assert_eq!(gf.images, f.images);

    let eta = KleisliHom::unit(&m, &xs);
    assert_eq!(kleisli_compose(&m, &eta, &f).unwrap(), f);
    assert_eq!(kleisli_compose(&m, &f, &eta).unwrap(), f);
}
