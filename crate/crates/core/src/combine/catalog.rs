//! Built-in theories.

use crate::error::Result;
use crate::grade::{Grade, GradeMonoid, LaxMonoidalMap};
use crate::logic::{ClosureConfig, NormalizerKind};
use crate::syntax::{Equation, Signature, Term, Theory};

use super::extend;

/// A named theory together with the normalizer that decides it.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub theory: Theory,
    pub normalizer: NormalizerKind,
}

fn top() -> Grade {
    Grade::set(["*"])
}

fn var(x: &str) -> Term {
    Term::var(x)
}

/// Graded exceptions: one nullary `raise_e` of grade `{e}` per exception,
/// no equations.
pub fn exception<S: AsRef<str>>(exceptions: &[S]) -> Theory {
    let names: Vec<&str> = exceptions.iter().map(AsRef::as_ref).collect();
    let mut sig = Signature::new(GradeMonoid::exception(names.iter().copied()));
    for e in &names {
        sig.add_op(format!("raise_{e}"), 0, Grade::set([*e]))
            .expect("distinct exception names");
    }
    Theory::free(sig)
}

/// Global state with values `0..values` over the two-element chain:
/// `lookup` of arity `|V|` and `update_v` of arity 1, all at grade ⊤.
pub fn state(values: usize) -> Theory {
    state_try(values).expect("state theory is well formed")
}

fn state_try(k: usize) -> Result<Theory> {
    let mut sig = Signature::new(GradeMonoid::two());
    sig.add_op("lookup", k, top())?;
    for v in 0..k {
        sig.add_op(format!("update_{v}"), 1, top())?;
    }
    let upd = |v: usize, t: Term| Term::app(format!("update_{v}"), vec![t]);
    let lookup = |args: Vec<Term>| Term::app("lookup", args);
    let mut axioms = Vec::new();

    // reading and writing back the value read does nothing
    axioms.push(
        Equation::new(
            &sig,
            vec!["x".into()],
            lookup((0..k).map(|v| upd(v, var("x"))).collect()),
            Term::coerce(top(), var("x")),
        )?
        .labelled("lookup-update"),
    );
    // the second write wins
    for v in 0..k {
        for w in 0..k {
            axioms.push(
                Equation::new(&sig, vec!["x".into()], upd(v, upd(w, var("x"))), upd(w, var("x")))?
                    .labelled("update-update"),
            );
        }
    }
    // reading after a write sees the written value
    let xs: Vec<String> = (0..k).map(|v| format!("x{v}")).collect();
    for v in 0..k {
        axioms.push(
            Equation::new(
                &sig,
                xs.clone(),
                upd(v, lookup(xs.iter().map(|x| var(x)).collect())),
                upd(v, var(&xs[v])),
            )?
            .labelled("update-lookup"),
        );
    }
    // two consecutive reads see the same value
    let xss: Vec<String> = (0..k)
        .flat_map(|v| (0..k).map(move |w| format!("x{v}{w}")))
        .collect();
    axioms.push(
        Equation::new(
            &sig,
            xss.clone(),
            lookup(
                (0..k)
                    .map(|v| lookup((0..k).map(|w| var(&xss[v * k + w])).collect()))
                    .collect(),
            ),
            lookup((0..k).map(|v| var(&xss[v * k + v])).collect()),
        )?
        .labelled("lookup-lookup"),
    );
    Theory::new(sig, axioms)
}

/// An ordinary theory (trivial grading) with a single constant `fail`:
/// its monad is `X ↦ X + 1`.
pub fn maybe() -> Theory {
    let sig = Signature::new(GradeMonoid::Trivial)
        .with_op("fail", 0, Grade::Unit)
        .expect("single operation");
    Theory::free(sig)
}

/// [`maybe`] regarded as a theory over the two-element chain with its
/// operation at the unit grade.
pub fn lifted_maybe() -> Theory {
    extend(&LaxMonoidalMap::unit_into(GradeMonoid::two()), &maybe()).expect("unit map is lax monoidal")
}

/// Modules over the ℕ-graded ring `GF(2)[t]/(t³)`: abelian group structure
/// at grade 0 and scalar multiplication `s_k` by `t^k` at grade `k`.
pub fn graded_module() -> Theory {
    graded_module_try().expect("graded module theory is well formed")
}

fn graded_module_try() -> Result<Theory> {
    let n = Grade::Nat;
    let sig = Signature::new(GradeMonoid::DiscreteNat)
        .with_op("add", 2, n(0))?
        .with_op("neg", 1, n(0))?
        .with_op("zero", 0, n(0))?
        .with_op("s0", 1, n(0))?
        .with_op("s1", 1, n(1))?
        .with_op("s2", 1, n(2))?;
    let add = |a: Term, b: Term| Term::app("add", vec![a, b]);
    let s = |k: usize, a: Term| Term::app(format!("s{k}"), vec![a]);
    let x = || var("x");
    let y = || var("y");
    let z = || var("z");
    let zero = || Term::constant("zero");
    let ctx = |vs: &[&str]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>();
    let mut axioms = vec![
        Equation::new(&sig, ctx(&["x", "y", "z"]), add(add(x(), y()), z()), add(x(), add(y(), z())))?
            .labelled("assoc"),
        Equation::new(&sig, ctx(&["x", "y"]), add(x(), y()), add(y(), x()))?.labelled("comm"),
        Equation::new(&sig, ctx(&["x"]), add(x(), zero()), x())?.labelled("zero"),
        Equation::new(&sig, ctx(&["x"]), add(x(), Term::app("neg", vec![x()])), zero())?
            .labelled("neg"),
        Equation::new(&sig, ctx(&["x"]), Term::app("neg", vec![x()]), x())?.labelled("char2"),
        Equation::new(&sig, ctx(&["x"]), s(0, x()), x())?.labelled("unit"),
    ];
    for k in 0..3 {
        axioms.push(
            Equation::new(&sig, ctx(&["x", "y"]), s(k, add(x(), y())), add(s(k, x()), s(k, y())))?
                .labelled("linear"),
        );
    }
    // derivable from linearity, stated so that shallow closures see it
    for k in 1..3 {
        axioms.push(
            Equation::new(&sig, vec![], s(k, zero()), Term::constant_at("zero", n(k as u64)))?
                .labelled("scale-zero"),
        );
    }
    axioms.push(Equation::new(&sig, ctx(&["x"]), s(1, s(1, x())), s(2, x()))?.labelled("mult"));
    for (a, b) in [(1, 2), (2, 1), (2, 2)] {
        axioms.push(
            Equation::new(
                &sig,
                ctx(&["x"]),
                s(a, s(b, x())),
                Term::constant_at("zero", n((a + b) as u64)),
            )?
            .labelled("truncate"),
        );
    }
    Theory::new(sig, axioms)
}

/// The theory with no operations over `gm`.
pub fn empty(gm: GradeMonoid) -> Theory {
    Theory::free(Signature::new(gm))
}

/// Every built-in theory with its normalizer.
pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "exception".into(),
            theory: exception(&["e1", "e2"]),
            normalizer: NormalizerKind::Coercion,
        },
        CatalogEntry {
            name: "state".into(),
            theory: state(2),
            normalizer: NormalizerKind::State,
        },
        CatalogEntry {
            name: "lifted-maybe".into(),
            theory: lifted_maybe(),
            normalizer: NormalizerKind::Coercion,
        },
        CatalogEntry {
            name: "graded-module".into(),
            theory: graded_module(),
            normalizer: NormalizerKind::Closure(ClosureConfig {
                depth: 2,
                nat_bound: 3,
                ..Default::default()
            }),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_theories_are_well_formed() {
        for e in entries() {
            e.theory.validate().unwrap();
        }
    }

    #[test]
    fn state_has_four_schemas() {
        let s = state(2);
        assert_eq!(s.schema_count(), 4);
        assert_eq!(s.axioms.len(), 1 + 4 + 2 + 1);
        assert_eq!(s.signature.op("lookup").unwrap().arity, 2);
    }

    #[test]
    fn lifted_operation_sits_at_unit() {
        let t = lifted_maybe();
        assert_eq!(t.signature.op("fail").unwrap().grade, Grade::set(Vec::<String>::new()));
    }
}
