use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graded_theory::combine::{catalog, tensor};
use graded_theory::logic::{Normalizer, StateNormalizer};
use graded_theory::syntax::{normalize_coercions, rename, substitute_at};
use graded_theory::{Grade, GradeMonoid, Signature, Term, Theory};

const VARS: [&str; 2] = ["x", "y"];

/// A random term of exactly grade `g`, or `None` when none exists within
/// `depth`.
fn term_at(sig: &Signature, grades: &[Grade], g: &Grade, depth: usize, rng: &mut ChaCha8Rng) -> Option<Term> {
    let m = sig.monoid();
    let mut options: Vec<u8> = Vec::new();
    if *g == m.unit() {
        options.push(0);
    }
    if grades.iter().any(|h| h != g && m.leq(h, g).unwrap()) {
        options.push(1);
    }
    if sig.ops().iter().any(|o| depth > 0 || o.arity == 0) {
        options.push(2);
    }
    for _ in 0..8 {
        match *options.choose(rng)? {
            0 => return Some(Term::var(*VARS.choose(rng).unwrap())),
            1 => {
                let below: Vec<&Grade> = grades.iter().filter(|h| *h != g && m.leq(h, g).unwrap()).collect();
                let h = below.choose(rng).unwrap();
                if let Some(t) = term_at(sig, grades, h, depth, rng) {
                    return Some(Term::coerce(g.clone(), t));
                }
            }
            _ => {
                let ops: Vec<_> = sig.ops().iter().filter(|o| depth > 0 || o.arity == 0).collect();
                let op = ops.choose(rng).unwrap();
                let inner: Vec<&Grade> = grades
                    .iter()
                    .filter(|h| m.tensor(&op.grade, h).unwrap() == *g)
                    .collect();
                let Some(h) = inner.choose(rng) else { continue };
                if op.arity == 0 {
                    return Some(if **h == m.unit() && rng.gen_bool(0.5) {
                        Term::constant(op.name.clone())
                    } else {
                        Term::constant_at(op.name.clone(), (*h).clone())
                    });
                }
                let args: Option<Vec<Term>> = (0..op.arity)
                    .map(|_| term_at(sig, grades, h, depth - 1, rng))
                    .collect();
                if let Some(args) = args {
                    return Some(Term::app(op.name.clone(), args));
                }
            }
        }
    }
    None
}

fn theories() -> Vec<Theory> {
    vec![
        catalog::exception(&["e1", "e2"]),
        catalog::state(2),
        catalog::lifted_maybe(),
        tensor(&catalog::state(2), &catalog::exception(&["e1"])).unwrap(),
    ]
}

fn random_term(th: &Theory, seed: u64) -> Option<(Term, Grade)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grades = th.monoid().enumerate(2);
    let g = grades.choose(&mut rng).unwrap().clone();
    term_at(&th.signature, &grades, &g, 3, &mut rng).map(|t| (t, g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_terms_have_their_grade(which in 0usize..4, seed in any::<u64>()) {
        let th = &theories()[which];
        if let Some((t, g)) = random_term(th, seed) {
            prop_assert_eq!(th.signature.infer_grade(&t).unwrap(), g);
        }
    }

    #[test]
    fn coercion_normalisation_is_idempotent_and_keeps_grade_and_depth(which in 0usize..4, seed in any::<u64>()) {
        let th = &theories()[which];
        let sig = &th.signature;
        if let Some((t, g)) = random_term(th, seed) {
            let n = normalize_coercions(sig, &t).unwrap();
            prop_assert_eq!(sig.infer_grade(&n).unwrap(), g);
            prop_assert_eq!(n.depth(), t.depth());
            prop_assert_eq!(normalize_coercions(sig, &n).unwrap(), n);
        }
    }

    #[test]
    fn substitution_tensors_grades(which in 0usize..4, seed in any::<u64>(), seed2 in any::<u64>()) {
        let th = &theories()[which];
        let sig = &th.signature;
        let (Some((s, m)), Some((u, m2))) = (random_term(th, seed), random_term(th, seed2)) else {
            return Ok(());
        };
        let v = match random_term(th, seed2.wrapping_add(1)) {
            Some((v, g)) if g == m2 => v,
            _ => u.clone(),
        };
        let binding = BTreeMap::from([("x".to_string(), u), ("y".to_string(), v)]);
        let r = substitute_at(sig, &s, &binding, &m2).unwrap();
        prop_assert_eq!(sig.infer_grade(&r).unwrap(), sig.tensor(&m, &m2).unwrap());
    }

    #[test]
    fn normalisation_commutes_with_substitution(which in 0usize..4, seed in any::<u64>(), seed2 in any::<u64>()) {
        let th = &theories()[which];
        let sig = &th.signature;
        let (Some((s, _)), Some((u, m2))) = (random_term(th, seed), random_term(th, seed2)) else {
            return Ok(());
        };
        let binding = BTreeMap::from([("x".to_string(), u.clone()), ("y".to_string(), u.clone())]);
        let nb = BTreeMap::from([
            ("x".to_string(), normalize_coercions(sig, &u).unwrap()),
            ("y".to_string(), normalize_coercions(sig, &u).unwrap()),
        ]);
        let direct = normalize_coercions(sig, &substitute_at(sig, &s, &binding, &m2).unwrap()).unwrap();
        let ns = normalize_coercions(sig, &s).unwrap();
        let staged = normalize_coercions(sig, &substitute_at(sig, &ns, &nb, &m2).unwrap()).unwrap();
        prop_assert_eq!(direct, staged);
    }

    #[test]
    fn renaming_commutes_with_normalisation(which in 0usize..4, seed in any::<u64>()) {
        let th = &theories()[which];
        let sig = &th.signature;
        if let Some((t, _)) = random_term(th, seed) {
            let sigma = BTreeMap::from([("x".to_string(), "y".to_string()), ("y".to_string(), "z".to_string())]);
            let a = normalize_coercions(sig, &rename(&t, &sigma).unwrap()).unwrap();
            let b = rename(&normalize_coercions(sig, &t).unwrap(), &sigma).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn state_normal_forms_keep_meaning(seed in any::<u64>()) {
        let th = catalog::state(2);
        let nz = StateNormalizer::new(th.clone()).unwrap();
        if let Some((t, _)) = random_term(&th, seed) {
            let n = nz.normalize(&t).unwrap();
            prop_assert_eq!(nz.eval(&n).unwrap(), nz.eval(&t).unwrap());
            prop_assert_eq!(nz.normalize(&n).unwrap(), n);
        }
    }

    #[test]
    fn exception_grades_form_a_preordered_monoid(a in 0usize..7, b in 0usize..7, c in 0usize..7, d in 0usize..7) {
        let gm = GradeMonoid::exception(["e1", "e2"]);
        let g = gm.enumerate(0);
        let (a, b, c, d) = (&g[a], &g[b], &g[c], &g[d]);
        let t = |x: &Grade, y: &Grade| gm.tensor(x, y).unwrap();
        prop_assert_eq!(t(&t(a, b), c), t(a, &t(b, c)));
        prop_assert_eq!(t(a, &gm.unit()), a.clone());
        prop_assert_eq!(t(&gm.unit(), a), a.clone());
        if gm.leq(a, b).unwrap() && gm.leq(c, d).unwrap() {
            prop_assert!(gm.leq(&t(a, c), &t(b, d)).unwrap());
        }
    }
}
