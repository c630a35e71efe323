//! Combining theories: sums, coequalizers, tensors and change of grading.

pub mod catalog;

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grade::{Grade, GradeMonoid, LaxMonoidalMap};
use crate::lawvere::TheoryMorphism;
use crate::syntax::{normalize_coercions, standard_vars, Equation, Signature, Term, Theory};

/// Renames operations throughout a term; unmapped names are kept.
pub fn rename_ops(t: &Term, names: &BTreeMap<String, String>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Coerce(g, b) => Term::coerce(g.clone(), rename_ops(b, names)),
        Term::App { op, args, ambient } => Term::App {
            op: names.get(op).cloned().unwrap_or_else(|| op.clone()),
            args: args.iter().map(|a| rename_ops(a, names)).collect(),
            ambient: ambient.clone(),
        },
    }
}

fn rename_equation(e: &Equation, names: &BTreeMap<String, String>) -> Equation {
    Equation {
        label: e.label.clone(),
        context: e.context.clone(),
        lhs: rename_ops(&e.lhs, names),
        rhs: rename_ops(&e.rhs, names),
        grade: e.grade.clone(),
    }
}

/// Old-to-new names for both sides: operations whose names clash get the
/// given prefixes, the others keep their names.
fn disambiguate(
    left: &Signature,
    right: &Signature,
    prefixes: (&str, &str),
) -> (BTreeMap<String, String>, BTreeMap<String, String>) {
    let clash: BTreeSet<&str> = left
        .ops()
        .iter()
        .map(|o| o.name.as_str())
        .filter(|n| right.contains(n))
        .collect();
    let side = |sig: &Signature, prefix: &str| {
        sig.ops()
            .iter()
            .map(|o| {
                let new = if clash.contains(o.name.as_str()) {
                    format!("{prefix}{}", o.name)
                } else {
                    o.name.clone()
                };
                (o.name.clone(), new)
            })
            .collect()
    };
    (side(left, prefixes.0), side(right, prefixes.1))
}

/// A coproduct of theories with its injections.
#[derive(Clone, Debug)]
pub struct Sum {
    pub theory: Theory,
    pub inl: TheoryMorphism,
    pub inr: TheoryMorphism,
}

/// Disjoint union of operations and equations. Clashing names are
/// prefixed with `inl_` and `inr_`.
pub fn sum(t1: &Theory, t2: &Theory) -> Result<Sum> {
    if t1.monoid() != t2.monoid() {
        return Err(Error::Structural(format!(
            "cannot sum theories over {} and {}",
            t1.monoid(),
            t2.monoid()
        )));
    }
    let (ln, rn) = disambiguate(&t1.signature, &t2.signature, ("inl_", "inr_"));
    let mut sig = Signature::new(t1.monoid().clone());
    for (t, names) in [(t1, &ln), (t2, &rn)] {
        for op in t.signature.ops() {
            sig.add_op(names[&op.name].clone(), op.arity, op.grade.clone())?;
        }
    }
    let axioms = t1
        .axioms
        .iter()
        .map(|e| rename_equation(e, &ln))
        .chain(t2.axioms.iter().map(|e| rename_equation(e, &rn)))
        .collect();
    let theory = Theory::new(sig, axioms)?;
    let inl = TheoryMorphism::renaming(t1.clone(), theory.clone(), &ln)?;
    let inr = TheoryMorphism::renaming(t2.clone(), theory.clone(), &rn)?;
    Ok(Sum { theory, inl, inr })
}

/// The target theory with `α(f) = β(f)` added for every source operation.
pub fn coequalize(alpha: &TheoryMorphism, beta: &TheoryMorphism) -> Result<Theory> {
    if alpha.source != beta.source || alpha.target != beta.target {
        return Err(Error::Structural(
            "coequalizer needs two morphisms with the same endpoints".into(),
        ));
    }
    let mut theory = alpha.target.clone();
    for op in alpha.source.signature.ops() {
        let (a, b) = (&alpha.assignment[&op.name], &beta.assignment[&op.name]);
        if a == b {
            continue;
        }
        let eq = Equation::new(&theory.signature, standard_vars(op.arity), a.clone(), b.clone())?
            .labelled(format!("coeq-{}", op.name));
        theory.axioms.push(eq);
    }
    theory.validate()?;
    Ok(theory)
}

/// The quotient morphism from the target of `alpha` into the coequalizer.
pub fn coequalizer_map(alpha: &TheoryMorphism, quotient: &Theory) -> Result<TheoryMorphism> {
    TheoryMorphism::renaming(alpha.target.clone(), quotient.clone(), &BTreeMap::new())
}

/// `G_*(t)` for a term of the source theory.
pub fn extend_term(g: &LaxMonoidalMap, sig: &Signature, t: &Term) -> Result<Term> {
    let raw = extend_raw(g, sig, t)?;
    let mut target = Signature::new(g.target().clone());
    for op in sig.ops() {
        target.add_op(op.name.clone(), op.arity, g.apply(&op.grade)?)?;
    }
    normalize_coercions(&target, &raw)
}

fn extend_raw(g: &LaxMonoidalMap, sig: &Signature, t: &Term) -> Result<Term> {
    let m = sig.monoid();
    Ok(match t {
        Term::Var(_) => Term::coerce(g.apply(&m.unit())?, t.clone()),
        Term::Coerce(target, body) => Term::coerce(g.apply(target)?, extend_raw(g, sig, body)?),
        Term::App { op, args, ambient } => {
            let o = sig.op(op)?;
            if args.is_empty() {
                let a = ambient.clone().unwrap_or_else(|| m.unit());
                let image = Term::constant_at(op.clone(), g.apply(&a)?);
                Term::coerce(g.apply(&m.tensor(&o.grade, &a)?)?, image)
            } else {
                let child = sig.infer_grade(&args[0])?;
                let kids = args
                    .iter()
                    .map(|a| extend_raw(g, sig, a))
                    .collect::<Result<Vec<_>>>()?;
                Term::coerce(g.apply(&m.tensor(&o.grade, &child)?)?, Term::app(op.clone(), kids))
            }
        }
    })
}

/// Extension of a theory along a lax monoidal map: each operation keeps
/// its arity and moves to grade `G(m)`; terms are translated with the
/// coercions witnessing `I' ≤ G(I)` and `G(m) ⊗ G(m') ≤ G(m ⊗ m')`.
pub fn extend(g: &LaxMonoidalMap, t: &Theory) -> Result<Theory> {
    if g.source() != t.monoid() {
        return Err(Error::Structural(format!(
            "map {} starts at {}, theory is graded by {}",
            g.name(),
            g.source(),
            t.monoid()
        )));
    }
    g.validate(6)?;
    let mut sig = Signature::new(g.target().clone());
    for op in t.signature.ops() {
        sig.add_op(op.name.clone(), op.arity, g.apply(&op.grade)?)?;
    }
    let axioms = t
        .axioms
        .iter()
        .map(|e| {
            let lhs = normalize_coercions(&sig, &extend_raw(g, &t.signature, &e.lhs)?)?;
            let rhs = normalize_coercions(&sig, &extend_raw(g, &t.signature, &e.rhs)?)?;
            let mut eq = Equation::new(&sig, e.context.clone(), lhs, rhs)?;
            eq.label = e.label.clone();
            Ok(eq)
        })
        .collect::<Result<Vec<_>>>()?;
    Theory::new(sig, axioms)
}

/// Tensor product over the product grading: both theories embedded by
/// `m ↦ (m, I₂)` and `m ↦ (I₁, m)`, plus one commutation equation for each
/// pair of operations from different sides. Clashing names are prefixed
/// with `fst_` and `snd_`.
pub fn tensor(t1: &Theory, t2: &Theory) -> Result<Theory> {
    let (m1, m2) = (t1.monoid().clone(), t2.monoid().clone());
    let (ln, rn) = disambiguate(&t1.signature, &t2.signature, ("fst_", "snd_"));
    let rename_theory = |t: &Theory, names: &BTreeMap<String, String>| -> Result<Theory> {
        let mut sig = Signature::new(t.monoid().clone());
        for op in t.signature.ops() {
            sig.add_op(names[&op.name].clone(), op.arity, op.grade.clone())?;
        }
        Theory::new(sig, t.axioms.iter().map(|e| rename_equation(e, names)).collect())
    };
    let left = extend(&LaxMonoidalMap::embed_left(m1.clone(), m2.clone()), &rename_theory(t1, &ln)?)?;
    let right = extend(&LaxMonoidalMap::embed_right(m1.clone(), m2.clone()), &rename_theory(t2, &rn)?)?;

    let pm = GradeMonoid::product(m1, m2);
    let mut sig = Signature::new(pm.clone());
    for op in left.signature.ops().iter().chain(right.signature.ops()) {
        sig.add_op(op.name.clone(), op.arity, op.grade.clone())?;
    }
    let mut axioms: Vec<Equation> = left.axioms.into_iter().chain(right.axioms).collect();
    for f in left.signature.ops() {
        for g in right.signature.ops() {
            axioms.push(commutation(&sig, &f.name, f.arity, &g.name, g.arity)?);
        }
    }
    Theory::new(sig, axioms)
}

/// `f(λi. g(λj. x_ij)) = g(λj. f(λi. x_ij))`. When `f` or `g` is nullary
/// the outer occurrence carries the other operation's grade as ambient.
fn commutation(sig: &Signature, f: &str, n: usize, g: &str, k: usize) -> Result<Equation> {
    let x = |i: usize, j: usize| Term::var(format!("x{i}_{j}"));
    let gf = sig.op(f)?.grade.clone();
    let gg = sig.op(g)?.grade.clone();
    let lhs = if n == 0 {
        Term::constant_at(f, gg.clone())
    } else {
        Term::app(f, (1..=n).map(|i| Term::app(g, (1..=k).map(|j| x(i, j)).collect())).collect())
    };
    let rhs = if k == 0 {
        Term::constant_at(g, gf)
    } else {
        Term::app(g, (1..=k).map(|j| Term::app(f, (1..=n).map(|i| x(i, j)).collect())).collect())
    };
    let context = if n == 0 || k == 0 {
        Vec::new()
    } else {
        (1..=n)
            .cartesian_product(1..=k)
            .map(|(i, j)| format!("x{i}_{j}"))
            .collect()
    };
    let lhs = normalize_coercions(sig, &lhs)?;
    let rhs = normalize_coercions(sig, &rhs)?;
    Ok(Equation::new(sig, context, lhs, rhs)?.labelled(format!("commute-{f}-{g}")))
}

/// A computation on `|L|` locations: the result for each store, stores
/// listed in lexicographic order.
pub type StoreMap = Vec<(Vec<usize>, String)>;

/// All maps `f : V^L → V^L × X` that touch only the locations in `used`:
/// the outputs depend only on the values at `used` and locations outside
/// `used` keep their values.
pub fn lfold_state_oracle(
    locations: &[String],
    values: usize,
    xs: &[String],
    used: &BTreeSet<String>,
    cap: usize,
) -> Result<Vec<StoreMap>> {
    if let Some(l) = used.iter().find(|l| !locations.contains(l)) {
        return Err(Error::Structural(format!("unknown location `{l}`")));
    }
    let stores = all_stores(locations.len(), values);
    let outputs: Vec<(Vec<usize>, String)> = stores.iter().cloned().cartesian_product(xs.iter().cloned()).collect();
    let total = (outputs.len() as f64).powi(stores.len() as i32);
    if total > cap as f64 {
        return Err(Error::Resource {
            what: "enumerating store maps".into(),
            cap,
        });
    }
    if outputs.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: Vec<StoreMap> = (0..stores.len())
        .map(|_| outputs.iter().cloned())
        .multi_cartesian_product()
        .filter(|f| store_map_touches_only(locations, &stores, f, used))
        .collect();
    out.sort();
    Ok(out)
}

/// `V^L` in lexicographic order.
pub fn all_stores(locations: usize, values: usize) -> Vec<Vec<usize>> {
    if locations == 0 {
        return vec![Vec::new()];
    }
    (0..locations).map(|_| 0..values).multi_cartesian_product().collect()
}

/// Checks the defining predicates of [`lfold_state_oracle`] on an explicit
/// map, independently of how it was produced.
pub fn store_map_touches_only(
    locations: &[String],
    stores: &[Vec<usize>],
    f: &StoreMap,
    used: &BTreeSet<String>,
) -> bool {
    let inside: Vec<bool> = locations.iter().map(|l| used.contains(l)).collect();
    let agree = |a: &[usize], b: &[usize]| a.iter().zip(b).zip(&inside).all(|((x, y), &i)| !i || x == y);
    let reads = stores.iter().zip(f).all(|(s, (o, x))| {
        stores.iter().zip(f).all(|(s2, (o2, x2))| !agree(s, s2) || (x == x2 && agree(o, o2)))
    });
    let writes = stores
        .iter()
        .zip(f)
        .all(|(s, (o, _))| s.iter().zip(o).zip(&inside).all(|((a, b), &i)| i || a == b));
    reads && writes
}

/// Reads grades of `tensor(state, state)` as location sets `{1, 2}`.
pub fn two_location_reading() -> Result<LaxMonoidalMap> {
    let two = GradeMonoid::two();
    let names = |n: &str| BTreeMap::from([("*".to_string(), n.to_string())]);
    LaxMonoidalMap::powerset_union(&two, &two, names("1"), names("2"))
}

/// The product grade of `tensor(state, state)` touching the given locations
/// among `{1, 2}`.
pub fn two_location_grade(used: &BTreeSet<String>) -> Grade {
    let side = |l: &str| {
        if used.contains(l) {
            Grade::set(["*"])
        } else {
            Grade::set(Vec::<String>::new())
        }
    };
    Grade::pair(side("1"), side("2"))
}
