use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use graded_theory::combine::{catalog, sum};
use graded_theory::freemonad::{ExceptionMonad, GradedMonad, Outcome, StateMonad};
use graded_theory::lawvere::{
    check_lawvere, generic_term, isomorphism_check, l_of, roundtrip_check, th_of, Arrow, GradedLawvere,
    TheoryLawvere, TheoryMorphism,
};
use graded_theory::logic::{CoercionNormalizer, Normalizer, StateNormalizer};
use graded_theory::syntax::standard_vars;
use graded_theory::{Grade, GradeMonoid, Result, Signature, Term, Theory};

fn exception_nz() -> Arc<dyn Normalizer> {
    Arc::new(CoercionNormalizer::new(catalog::exception(&["e1", "e2"])).unwrap())
}

fn state_nz() -> Arc<StateNormalizer> {
    Arc::new(StateNormalizer::new(catalog::state(2)).unwrap())
}

fn exception_grades() -> Vec<Grade> {
    GradeMonoid::exception(["e1", "e2"]).enumerate(0)
}

fn th_exception(bound: usize) -> TheoryLawvere {
    th_of(exception_nz(), bound, exception_grades()).unwrap()
}

fn th_state(bound: usize) -> TheoryLawvere {
    th_of(state_nz(), bound, GradeMonoid::two().enumerate(0)).unwrap()
}

#[test]
fn hom_set_sizes() {
    let th = th_exception(3);
    assert_eq!(th.hom(1, 1, &Grade::set(["Ok"])).unwrap().len(), 1);
    assert_eq!(th.hom(0, 1, &Grade::set(["e1"])).unwrap().len(), 1);

    let l = l_of(ExceptionMonad::new(&["e1", "e2"]), 3, exception_grades()).unwrap();
    for m in exception_grades() {
        assert_eq!(l.hom(1, 0, &m).unwrap().len(), 1);
    }
    assert_eq!(l.hom(1, 1, &Grade::set(["Ok", "e1"])).unwrap().len(), 2);

    let st = th_state(3);
    assert_eq!(st.hom(1, 1, &Grade::set(["*"])).unwrap().len(), 4);
    assert_eq!(st.hom(3, 1, &Grade::set(["*"])).unwrap().len(), 36);
}

#[test]
fn compose_multiplies_grades() {
    let th = th_state(2);
    let top = Grade::set(["*"]);
    let bot = GradeMonoid::two().unit();
    for (m1, m2) in [(&bot, &top), (&top, &bot), (&top, &top)] {
        let f = th.hom(1, 1, m1).unwrap().pop().unwrap();
        let g = th.hom(2, 1, m2).unwrap().pop().unwrap();
        let h = th.compose(&f, &g).unwrap();
        assert_eq!(h.grade, top);
        let sig = &th.normalizer().theory().signature;
        assert_eq!(sig.infer_grade(&h.components[0]).unwrap(), top);
    }
}

#[test]
fn exception_instances_pass_checks() {
    let start = Instant::now();
    let th = th_exception(3);
    assert_eq!(check_lawvere(&th), Vec::<String>::new());
    assert_eq!(roundtrip_check(&th), Vec::<String>::new());
    let l = l_of(ExceptionMonad::new(&["e1", "e2"]), 3, exception_grades()).unwrap();
    assert_eq!(check_lawvere(&l), Vec::<String>::new());
    assert_eq!(roundtrip_check(&l), Vec::<String>::new());
    eprintln!("exception lawvere checks in {:?}", start.elapsed());
}

#[test]
fn state_instances_pass_checks() {
    let start = Instant::now();
    let th = th_state(3);
    assert_eq!(check_lawvere(&th), Vec::<String>::new());
    assert_eq!(roundtrip_check(&th), Vec::<String>::new());
    let l = l_of(StateMonad::new(2), 3, GradeMonoid::two().enumerate(0)).unwrap();
    assert_eq!(check_lawvere(&l), Vec::<String>::new());
    assert_eq!(roundtrip_check(&l), Vec::<String>::new());
    eprintln!("state lawvere checks in {:?}", start.elapsed());
}

fn outcome_of(t: &Term) -> Outcome {
    match t {
        Term::Coerce(_, b) => outcome_of(b),
        Term::Var(x) => Outcome::Ok(x.clone()),
        Term::App { op, .. } => Outcome::Er(op.trim_start_matches("raise_").to_string()),
    }
}

#[test]
fn term_and_monad_lawvere_theories_are_isomorphic() {
    let th = th_exception(3);
    let l = l_of(ExceptionMonad::new(&["e1", "e2"]), 3, exception_grades()).unwrap();
    assert_eq!(isomorphism_check(&th, &l, |_, _, t| Ok(outcome_of(t))), Vec::<String>::new());

    let nz = state_nz();
    let st = th_state(3);
    let monad = StateMonad::new(2);
    let two = GradeMonoid::two();
    let ls = l_of(monad.clone(), 3, two.enumerate(0)).unwrap();
    let iso = |_: usize, m: &Grade, t: &Term| monad.coerce(&two.unit(), m, &nz.eval(t)?).or_else(|_| nz.eval(t));
    assert_eq!(isomorphism_check(&st, &ls, iso), Vec::<String>::new());
}

/// `π₁` replaced by `π₂` whenever both exist.
struct DuplicatedProjection(TheoryLawvere);

impl GradedLawvere for DuplicatedProjection {
    type Elem = Term;
    fn monoid(&self) -> &GradeMonoid {
        self.0.monoid()
    }
    fn bound(&self) -> usize {
        self.0.bound()
    }
    fn grades(&self) -> &[Grade] {
        self.0.grades()
    }
    fn basic(&self, n: usize, m: &Grade) -> Result<Vec<Term>> {
        self.0.basic(n, m)
    }
    fn projection(&self, n: usize, i: usize) -> Result<Arrow<Term>> {
        self.0.projection(n, if i == 0 && n >= 2 { 1 } else { i })
    }
    fn compose(&self, f: &Arrow<Term>, g: &Arrow<Term>) -> Result<Arrow<Term>> {
        self.0.compose(f, g)
    }
    fn coerce(&self, to: &Grade, f: &Arrow<Term>) -> Result<Arrow<Term>> {
        self.0.coerce(to, f)
    }
}

#[test]
fn duplicated_projection_breaks_tupling() {
    let report = check_lawvere(&DuplicatedProjection(th_exception(2)));
    assert!(report.iter().any(|l| l.starts_with("tupling is not injective at (n, n', m) = (")), "{report:#?}");
}

#[test]
fn identity_morphism_and_composition() {
    let th = catalog::state(2);
    let nz = state_nz();
    let id = TheoryMorphism::identity(th.clone());
    let vars = standard_vars(2);
    let upd = |v: usize, x: &str| Term::app(format!("update_{v}"), vec![Term::var(x)]);
    let t = Term::app("lookup", vec![upd(1, "x1"), upd(0, "x2")]);
    assert_eq!(id.apply(nz.as_ref(), &t, &vars).unwrap(), nz.normalize_in(&t, &vars).unwrap());

    // swap the two values: update_v ↦ update_{1-v}, lookup(x1, x2) ↦ lookup(x2, x1)
    let swap = BTreeMap::from([
        ("update_0".to_string(), generic_term("update_1", 1)),
        ("update_1".to_string(), generic_term("update_0", 1)),
        ("lookup".to_string(), Term::app("lookup", vec![Term::var("x2"), Term::var("x1")])),
    ]);
    let alpha = TheoryMorphism::new(th.clone(), th.clone(), swap).unwrap();
    assert!(alpha.preservation_failures(nz.as_ref()).unwrap().is_empty());
    let twice = alpha.then(&alpha).unwrap();
    for op in th.signature.ops() {
        let generic = generic_term(&op.name, op.arity);
        let vars = standard_vars(op.arity);
        assert_eq!(
            twice.apply(nz.as_ref(), &generic, &vars).unwrap(),
            alpha.apply(nz.as_ref(), &alpha.apply(nz.as_ref(), &generic, &vars).unwrap(), &vars).unwrap()
        );
        assert_eq!(
            twice.apply(nz.as_ref(), &generic, &vars).unwrap(),
            nz.normalize_in(&generic, &vars).unwrap()
        );
    }

    let bad = BTreeMap::from([
        ("update_0".to_string(), generic_term("update_0", 1)),
        ("update_1".to_string(), generic_term("update_0", 1)),
        ("lookup".to_string(), generic_term("lookup", 2)),
    ]);
    let beta = TheoryMorphism::new(th.clone(), th, bad).unwrap();
    assert!(!beta.preservation_failures(nz.as_ref()).unwrap().is_empty());
}

fn only_raise(e: &str) -> Theory {
    let sig = Signature::new(GradeMonoid::exception(["e1", "e2"]))
        .with_op(format!("raise_{e}"), 0, Grade::set([e]))
        .unwrap();
    Theory::free(sig)
}

#[test]
fn sum_inclusions_are_injective_and_copairing_is_unique() {
    let s = sum(&only_raise("e1"), &only_raise("e2")).unwrap();
    let nz = CoercionNormalizer::new(s.theory.clone()).unwrap();
    let small = CoercionNormalizer::new(only_raise("e1")).unwrap();
    let xs = standard_vars(1);
    for m in exception_grades() {
        let classes = small.elements(&m, &xs).unwrap();
        let mut images: Vec<Term> = classes.iter().map(|t| s.inl.apply(&nz, t, &xs).unwrap()).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), classes.len(), "at {m}");
    }

    // every morphism from the sum into the full exception theory agreeing
    // with the evident maps on both summands
    let target = catalog::exception(&["e1", "e2"]);
    let tnz = CoercionNormalizer::new(target.clone()).unwrap();
    let candidates: Vec<Vec<(String, Term)>> = s
        .theory
        .signature
        .ops()
        .iter()
        .map(|op| {
            tnz.elements(&op.grade, &standard_vars(op.arity))
                .unwrap()
                .into_iter()
                .map(|t| (op.name.clone(), t))
                .collect()
        })
        .collect();
    let mut found = 0;
    for choice in itertools::Itertools::multi_cartesian_product(candidates.into_iter().map(|c| c.into_iter())) {
        let m = TheoryMorphism::new(s.theory.clone(), target.clone(), choice.into_iter().collect()).unwrap();
        let via_inl = s.inl.then(&m).unwrap();
        let via_inr = s.inr.then(&m).unwrap();
        if via_inl.assignment["raise_e1"] == Term::constant("raise_e1")
            && via_inr.assignment["raise_e2"] == Term::constant("raise_e2")
        {
            found += 1;
        }
    }
    assert_eq!(found, 1);
}
