//! Morphisms of presentations: operations sent to target terms.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::Normalizer;
use crate::syntax::{normalize_coercions, standard_vars, subst_rec, Term, Theory};

/// Assigns to each source operation `f` of arity `n` and grade `m` a target
/// term over `x1..xn` of grade `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryMorphism {
    pub source: Theory,
    pub target: Theory,
    pub assignment: BTreeMap<String, Term>,
}

impl TheoryMorphism {
    pub fn new(source: Theory, target: Theory, assignment: BTreeMap<String, Term>) -> Result<Self> {
        if source.monoid() != target.monoid() {
            return Err(Error::Structural(
                "source and target of a morphism need the same grade monoid".into(),
            ));
        }
        for op in source.signature.ops() {
            let t = assignment
                .get(&op.name)
                .ok_or_else(|| Error::Structural(format!("no image for operation `{}`", op.name)))?;
            let vars = standard_vars(op.arity);
            if let Some(x) = t.free_vars().into_iter().find(|x| !vars.contains(x)) {
                return Err(Error::UnboundVariable(x));
            }
            let g = target.signature.infer_grade(t)?;
            if g != op.grade {
                return Err(Error::GradeMismatch {
                    expected: op.grade.clone(),
                    found: g,
                });
            }
        }
        if let Some(extra) = assignment.keys().find(|k| !source.signature.contains(k)) {
            return Err(Error::UnknownOperation(extra.clone()));
        }
        Ok(TheoryMorphism {
            source,
            target,
            assignment,
        })
    }

    /// `1_T(f) = [f(x1, ..., xn)]`.
    pub fn identity(theory: Theory) -> Self {
        let assignment = theory
            .signature
            .ops()
            .iter()
            .map(|op| (op.name.clone(), generic_term(&op.name, op.arity)))
            .collect();
        TheoryMorphism {
            source: theory.clone(),
            target: theory,
            assignment,
        }
    }

    /// Sends each source operation to the target operation of the given name.
    pub fn renaming(source: Theory, target: Theory, names: &BTreeMap<String, String>) -> Result<Self> {
        let assignment = source
            .signature
            .ops()
            .iter()
            .map(|op| {
                let to = names.get(&op.name).cloned().unwrap_or_else(|| op.name.clone());
                (op.name.clone(), generic_term(&to, op.arity))
            })
            .collect();
        TheoryMorphism::new(source, target, assignment)
    }

    /// `|t|` in the target free model with operations read through the
    /// assignment, as a coercion-normal target term.
    pub fn translate(&self, t: &Term) -> Result<Term> {
        let raw = self.translate_raw(t)?;
        normalize_coercions(&self.target.signature, &raw)
    }

    fn translate_raw(&self, t: &Term) -> Result<Term> {
        let src = &self.source.signature;
        let tgt = &self.target.signature;
        Ok(match t {
            Term::Var(_) => t.clone(),
            Term::Coerce(g, b) => Term::coerce(g.clone(), self.translate_raw(b)?),
            Term::App { op, args, ambient } => {
                let image = self
                    .assignment
                    .get(op)
                    .ok_or_else(|| Error::UnknownOperation(op.clone()))?;
                let shift = if args.is_empty() {
                    ambient.clone().unwrap_or_else(|| src.unit())
                } else {
                    src.infer_grade(&args[0])?
                };
                let binding: BTreeMap<String, Term> = standard_vars(args.len())
                    .into_iter()
                    .zip(args.iter().map(|a| self.translate_raw(a)).collect::<Result<Vec<_>>>()?)
                    .collect();
                subst_rec(tgt, image, &binding, &shift)?
            }
        })
    }

    /// `F_α([t])`: the translated term's class, as a normal form of `nz`
    /// over `vars`.
    pub fn apply(&self, nz: &dyn Normalizer, t: &Term, vars: &[String]) -> Result<Term> {
        self.source.signature.infer_grade(t)?;
        nz.normalize_in(&self.translate(t)?, vars)
    }

    /// `(β ∘ α)(f) = F_β(α(f))`.
    pub fn then(&self, beta: &TheoryMorphism) -> Result<TheoryMorphism> {
        if self.target != beta.source {
            return Err(Error::Structural("morphisms are not composable".into()));
        }
        let assignment = self
            .assignment
            .iter()
            .map(|(f, t)| Ok((f.clone(), beta.translate(t)?)))
            .collect::<Result<_>>()?;
        Ok(TheoryMorphism {
            source: self.source.clone(),
            target: beta.target.clone(),
            assignment,
        })
    }

    /// Checks that every source axiom is preserved, using `nz` to decide
    /// equality in the target. Returns the labels or texts of failures.
    pub fn preservation_failures(&self, nz: &dyn Normalizer) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for ax in &self.source.axioms {
            let l = self.apply(nz, &ax.lhs, &ax.context)?;
            let r = self.apply(nz, &ax.rhs, &ax.context)?;
            if l != r {
                out.push(ax.to_string());
            }
        }
        Ok(out)
    }
}

/// `f(x1, ..., xn)`.
pub fn generic_term(op: &str, arity: usize) -> Term {
    Term::app(op, standard_vars(arity).into_iter().map(Term::Var).collect())
}
