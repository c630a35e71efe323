//! Graded signatures, terms, substitution and coercion normalisation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grade::{Grade, GradeMonoid};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub grade: Grade,
}

/// A finite graded signature: operations with arity and grade over one
/// grade monoid. Operations keep their declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    monoid: GradeMonoid,
    ops: Vec<Operation>,
    index: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new(monoid: GradeMonoid) -> Self {
        Signature {
            monoid,
            ops: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    pub fn monoid(&self) -> &GradeMonoid {
        &self.monoid
    }

    pub fn add_op(&mut self, name: impl Into<String>, arity: usize, grade: Grade) -> Result<()> {
        let name = name.into();
        self.monoid.check(&grade)?;
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateOperation(name));
        }
        self.index.insert(name.clone(), self.ops.len());
        self.ops.push(Operation { name, arity, grade });
        Ok(())
    }

    pub fn with_op(mut self, name: impl Into<String>, arity: usize, grade: Grade) -> Result<Self> {
        self.add_op(name, arity, grade)?;
        Ok(self)
    }

    pub fn op(&self, name: &str) -> Result<&Operation> {
        self.index
            .get(name)
            .map(|&i| &self.ops[i])
            .ok_or_else(|| Error::UnknownOperation(name.to_string()))
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn unit(&self) -> Grade {
        self.monoid.unit()
    }

    pub fn tensor(&self, a: &Grade, b: &Grade) -> Result<Grade> {
        self.monoid.tensor(a, b)
    }

    pub fn leq(&self, a: &Grade, b: &Grade) -> Result<bool> {
        self.monoid.leq(a, b)
    }

    /// Grade of a well-formed term.
    ///
    /// Variables have grade `I`; `c[m](t)` has grade `m` provided the grade
    /// of `t` is below `m`; `f(t1..tn)` has grade `grade(f) ⊗ m'` where `m'`
    /// is the common grade of the children, or the ambient annotation
    /// (default `I`) when `f` is nullary.
    pub fn infer_grade(&self, t: &Term) -> Result<Grade> {
        match t {
            Term::Var(_) => Ok(self.unit()),
            Term::Coerce(target, body) => {
                let g = self.infer_grade(body)?;
                if self.leq(&g, target)? {
                    Ok(target.clone())
                } else {
                    Err(Error::BadCoercion {
                        from: g,
                        to: target.clone(),
                    })
                }
            }
            Term::App { op, args, ambient } => {
                let o = self.op(op)?;
                if o.arity != args.len() {
                    return Err(Error::Arity {
                        op: op.clone(),
                        expected: o.arity,
                        found: args.len(),
                    });
                }
                let child = if args.is_empty() {
                    ambient.clone().unwrap_or_else(|| self.unit())
                } else {
                    if ambient.is_some() {
                        return Err(Error::IllFormed(format!(
                            "ambient grade on non-nullary operation `{op}`"
                        )));
                    }
                    self.common_grade(op, args)?
                };
                self.tensor(&o.grade, &child)
            }
        }
    }

    fn common_grade(&self, op: &str, args: &[Term]) -> Result<Grade> {
        let mut grades = args.iter().map(|a| self.infer_grade(a));
        let first = grades.next().expect("nonempty args")?;
        for g in grades {
            let g = g?;
            if g != first {
                return Err(Error::UnequalChildGrades {
                    op: op.to_string(),
                    left: first,
                    right: g,
                });
            }
        }
        Ok(first)
    }
}

/// A graded term. Coercions carry only their target grade: in a thin grade
/// category the witness `m → m'` is unique when it exists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Coerce(Grade, Box<Term>),
    App {
        op: String,
        args: Vec<Term>,
        /// Grade of the (empty) argument list of a nullary operation.
        /// `None` stands for the unit; always `None` when `args` is nonempty.
        ambient: Option<Grade>,
    },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App {
            op: op.into(),
            args,
            ambient: None,
        }
    }

    pub fn constant(op: impl Into<String>) -> Term {
        Term::app(op, Vec::new())
    }

    pub fn constant_at(op: impl Into<String>, ambient: Grade) -> Term {
        Term::App {
            op: op.into(),
            args: Vec::new(),
            ambient: Some(ambient),
        }
    }

    pub fn coerce(target: Grade, body: Term) -> Term {
        Term::Coerce(target, Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Coerce(_, b) => b.collect_vars(out),
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Height counted in operation nodes; variables have depth 0 and
    /// coercions are transparent.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Coerce(_, b) => b.depth(),
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Coerce(_, b) => 1 + b.size(),
            Term::App { args, .. } => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Orders by size, then by printed form. Used to pick class
    /// representatives deterministically.
    pub fn canonical_cmp(&self, other: &Term) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }

    /// Immediate subterms.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) => Vec::new(),
            Term::Coerce(_, b) => vec![b],
            Term::App { args, .. } => args.iter().collect(),
        }
    }

    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let kids = out[i].children();
            out.extend(kids);
            i += 1;
        }
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Coerce(g, b) => write!(f, "c[{g}]({b})"),
            Term::App { op, args, ambient } => {
                write!(f, "{op}")?;
                if let Some(a) = ambient {
                    write!(f, "@{a}")?;
                }
                write!(f, "({})", args.iter().join(", "))
            }
        }
    }
}

/// Structural renaming of variables; `sigma` must cover every free variable.
pub fn rename(t: &Term, sigma: &BTreeMap<String, String>) -> Result<Term> {
    Ok(match t {
        Term::Var(x) => Term::Var(
            sigma
                .get(x)
                .cloned()
                .ok_or_else(|| Error::UnboundVariable(x.clone()))?,
        ),
        Term::Coerce(g, b) => Term::coerce(g.clone(), rename(b, sigma)?),
        Term::App { op, args, ambient } => Term::App {
            op: op.clone(),
            args: args.iter().map(|a| rename(a, sigma)).collect::<Result<_>>()?,
            ambient: ambient.clone(),
        },
    })
}

/// `s[t1/x1, ..., tk/xk]` where every `ti` has grade `m'`; the result has
/// grade `grade(s) ⊗ m'`. The grade `m'` is inferred from the binding and
/// defaults to the unit when the binding is empty.
pub fn substitute(sig: &Signature, s: &Term, binding: &BTreeMap<String, Term>) -> Result<Term> {
    let mut grades = binding.values().map(|t| sig.infer_grade(t));
    let shift = match grades.next() {
        None => sig.unit(),
        Some(g) => g?,
    };
    substitute_at(sig, s, binding, &shift)
}

/// Substitution with the binding grade `shift` given explicitly, which
/// matters when `s` is closed.
pub fn substitute_at(
    sig: &Signature,
    s: &Term,
    binding: &BTreeMap<String, Term>,
    shift: &Grade,
) -> Result<Term> {
    for (x, t) in binding {
        let g = sig.infer_grade(t)?;
        if &g != shift {
            return Err(Error::Structural(format!(
                "binding for `{x}` has grade {g}, expected {shift}"
            )));
        }
    }
    sig.monoid().check(shift)?;
    subst_rec(sig, s, binding, shift)
}

/// Substitution without re-checking binding grades.
pub(crate) fn subst_rec(
    sig: &Signature,
    s: &Term,
    binding: &BTreeMap<String, Term>,
    shift: &Grade,
) -> Result<Term> {
    let m = sig.monoid();
    Ok(match s {
        Term::Var(x) => binding
            .get(x)
            .cloned()
            .ok_or_else(|| Error::UnboundVariable(x.clone()))?,
        Term::Coerce(g, b) => {
            Term::coerce(m.tensor_unchecked(g, shift), subst_rec(sig, b, binding, shift)?)
        }
        Term::App { op, args, ambient } if args.is_empty() => {
            let a = ambient.clone().unwrap_or_else(|| m.unit());
            let shifted = m.tensor(&a, shift)?;
            Term::App {
                op: op.clone(),
                args: Vec::new(),
                ambient: (shifted != m.unit()).then_some(shifted),
            }
        }
        Term::App { op, args, .. } => Term::App {
            op: op.clone(),
            args: args
                .iter()
                .map(|a| subst_rec(sig, a, binding, shift))
                .collect::<Result<_>>()?,
            ambient: None,
        },
    })
}

/// Rewrites `t` with the coercion laws alone:
///
/// * `c_{1_m}(t) = t`
/// * `c_{w'}(c_w(t)) = c_{w'∘w}(t)`
/// * `f(c_w(t1), ..., c_w(tn)) = c_{m⊗w}(f(t1, ..., tn))`, including the
///   nullary instance that moves an ambient grade above the unit into a
///   coercion.
///
/// Nullary ambients that do not change the resulting grade are dropped,
/// since `f()` is the same element of every grade set it belongs to.
pub fn normalize_coercions(sig: &Signature, t: &Term) -> Result<Term> {
    Ok(norm(sig, t)?.0)
}

/// Normalises and returns the grade in one pass.
pub fn normalize_with_grade(sig: &Signature, t: &Term) -> Result<(Term, Grade)> {
    norm(sig, t)
}

/// The operation and ambient grade of a possibly coerced nullary
/// application.
fn as_nullary<'t>(sig: &Signature, t: &'t Term) -> Option<(&'t str, Grade)> {
    match t {
        Term::App { op, args, ambient } if args.is_empty() => {
            Some((op.as_str(), ambient.clone().unwrap_or_else(|| sig.unit())))
        }
        Term::Coerce(_, inner) => as_nullary(sig, inner),
        _ => None,
    }
}

/// Canonical form of `c[target](f@a)`. Naturality of `f` in its ambient
/// grade gives `f@b = c(f@a)` for `a ≤ b`, so the class is determined by
/// the component of `a` among the ambients `b` with `m_f ⊗ b ≤ target`,
/// connected by `≤`.
fn nullary_form(m: &GradeMonoid, name: &str, grade: &Grade, a: &Grade, target: &Grade) -> Term {
    let bare = || {
        let f = Term::constant(name);
        if grade == target {
            f
        } else {
            Term::coerce(target.clone(), f)
        }
    };
    // `I ≤ a` already connects `a` to the unit
    if m.leq_unchecked(&m.unit(), a) {
        return bare();
    }
    let fits = |b: &Grade| m.leq_unchecked(&m.tensor_unchecked(grade, b), target);
    // a fitting top element lies above both `a` and `I`
    if m.top().is_some_and(|top| fits(&top)) {
        return bare();
    }
    let mut seen = BTreeSet::from([a.clone()]);
    let mut queue = vec![a.clone()];
    while let Some(b) = queue.pop() {
        for c in m.comparable(&b) {
            if fits(&c) && seen.insert(c.clone()) {
                queue.push(c);
            }
        }
    }
    if seen.contains(&m.unit()) {
        return bare();
    }
    match seen.iter().find(|b| &m.tensor_unchecked(grade, b) == target) {
        Some(b) => Term::constant_at(name, b.clone()),
        None => Term::coerce(target.clone(), Term::constant_at(name, seen.first().expect("nonempty").clone())),
    }
}

fn norm(sig: &Signature, t: &Term) -> Result<(Term, Grade)> {
    let m = sig.monoid();
    match t {
        Term::Var(_) => Ok((t.clone(), m.unit())),
        Term::Coerce(target, body) => {
            m.check(target)?;
            let (nb, gb) = norm(sig, body)?;
            if !m.leq_unchecked(&gb, target) {
                return Err(Error::BadCoercion {
                    from: gb,
                    to: target.clone(),
                });
            }
            if &gb == target {
                return Ok((nb, gb));
            }
            if let Some((name, a)) = as_nullary(sig, &nb) {
                let o = sig.op(name)?;
                return Ok((nullary_form(m, name, &o.grade, &a, target), target.clone()));
            }
            let inner = match nb {
                Term::Coerce(_, inner) => *inner,
                other => other,
            };
            Ok((Term::Coerce(target.clone(), Box::new(inner)), target.clone()))
        }
        Term::App { op, args, ambient } => {
            let o = sig.op(op)?;
            if o.arity != args.len() {
                return Err(Error::Arity {
                    op: op.clone(),
                    expected: o.arity,
                    found: args.len(),
                });
            }
            if args.is_empty() {
                let unit = m.unit();
                let a = ambient.clone().unwrap_or_else(|| unit.clone());
                m.check(&a)?;
                let result = m.tensor_unchecked(&o.grade, &a);
                return Ok((nullary_form(m, op, &o.grade, &a, &result), result));
            }
            if ambient.is_some() {
                return Err(Error::IllFormed(format!(
                    "ambient grade on non-nullary operation `{op}`"
                )));
            }
            let mut kids = Vec::with_capacity(args.len());
            let mut child_grade: Option<Grade> = None;
            for a in args {
                let (na, ga) = norm(sig, a)?;
                match &child_grade {
                    None => child_grade = Some(ga),
                    Some(g) if *g != ga => {
                        return Err(Error::UnequalChildGrades {
                            op: op.clone(),
                            left: g.clone(),
                            right: ga,
                        })
                    }
                    _ => {}
                }
                kids.push(na);
            }
            let child_grade = child_grade.expect("nonempty");
            let result = m.tensor_unchecked(&o.grade, &child_grade);
            if let Some(inner) = hoistable(sig, &kids)? {
                let (inner_terms, inner_grade) = inner;
                let base = Term::app(op.clone(), inner_terms);
                let base_grade = m.tensor_unchecked(&o.grade, &inner_grade);
                if base_grade == result {
                    return Ok((base, result));
                }
                return Ok((Term::coerce(result.clone(), base), result));
            }
            Ok((Term::app(op.clone(), kids), result))
        }
    }
}

/// If every child is a coercion (necessarily to the common child grade) of
/// a body with one shared grade, returns the bodies and that grade.
fn hoistable(sig: &Signature, kids: &[Term]) -> Result<Option<(Vec<Term>, Grade)>> {
    let mut bodies = Vec::with_capacity(kids.len());
    let mut grade: Option<Grade> = None;
    for k in kids {
        let Term::Coerce(_, body) = k else {
            return Ok(None);
        };
        let g = sig.infer_grade(body)?;
        match &grade {
            None => grade = Some(g),
            Some(prev) if *prev != g => return Ok(None),
            _ => {}
        }
        bodies.push((**body).clone());
    }
    Ok(Some((bodies, grade.expect("nonempty"))))
}

/// `∀ context. lhs = rhs` at a fixed grade. The optional label groups the
/// instances of one axiom schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub label: Option<String>,
    pub context: Vec<String>,
    pub lhs: Term,
    pub rhs: Term,
    pub grade: Grade,
}

impl Equation {
    pub fn new(sig: &Signature, context: Vec<String>, lhs: Term, rhs: Term) -> Result<Self> {
        let grade = sig.infer_grade(&lhs)?;
        let eq = Equation {
            label: None,
            context,
            lhs,
            rhs,
            grade,
        };
        eq.validate(sig)?;
        Ok(eq)
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        let ctx: BTreeSet<&String> = self.context.iter().collect();
        if ctx.len() != self.context.len() {
            return Err(Error::IllFormed(format!("repeated variable in context of {self}")));
        }
        for side in [&self.lhs, &self.rhs] {
            if let Some(x) = side.free_vars().iter().find(|x| !ctx.contains(x)) {
                return Err(Error::UnboundVariable(x.clone()));
            }
            let g = sig.infer_grade(side)?;
            if g != self.grade {
                return Err(Error::GradeMismatch {
                    expected: self.grade.clone(),
                    found: g,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "forall {} : {} = {}",
            self.context.join(", "),
            self.lhs,
            self.rhs
        )
    }
}

/// A presentation `(Σ, E)` of a graded algebraic theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub signature: Signature,
    pub axioms: Vec<Equation>,
}

impl Theory {
    pub fn new(signature: Signature, axioms: Vec<Equation>) -> Result<Self> {
        let th = Theory { signature, axioms };
        th.validate()?;
        Ok(th)
    }

    pub fn free(signature: Signature) -> Self {
        Theory {
            signature,
            axioms: Vec::new(),
        }
    }

    pub fn monoid(&self) -> &GradeMonoid {
        self.signature.monoid()
    }

    pub fn validate(&self) -> Result<()> {
        self.axioms.iter().try_for_each(|e| e.validate(&self.signature))
    }

    /// Number of distinct axiom schemas; unlabelled equations count once each.
    pub fn schema_count(&self) -> usize {
        let labels: BTreeSet<&str> = self.axioms.iter().filter_map(|e| e.label.as_deref()).collect();
        labels.len() + self.axioms.iter().filter(|e| e.label.is_none()).count()
    }
}

/// Variables `x1..xn`, the standard context for arity-`n` terms.
pub fn standard_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}
