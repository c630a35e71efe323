//! Finite models in grade-indexed sets.
//!
//! A model assigns a finite carrier `A(m)` to each supported grade, an
//! action `A(m) → A(m')` to each `m ≤ m'`, and to each operation `f` of
//! grade `m_f` a family `|f|_{m'} : A(m')ⁿ → A(m_f ⊗ m')`. The action of a
//! grade on the model is index shifting, so the unit and multiplication of
//! that action are identities.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grade::{Grade, GradeMonoid};
use crate::logic::Normalizer;
use crate::syntax::{Equation, Term, Theory};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    theory: Theory,
    support: Vec<Grade>,
    carriers: BTreeMap<Grade, Vec<String>>,
    actions: BTreeMap<(Grade, Grade), Vec<usize>>,
    ops: BTreeMap<(String, Grade), Vec<usize>>,
}

/// Index of a tuple in the lexicographic enumeration of `Aⁿ`, `|A| = base`.
fn tuple_index(args: &[usize], base: usize) -> usize {
    args.iter().fold(0, |acc, a| acc * base + a)
}

/// All tuples of `Aⁿ` in lexicographic order.
pub fn tuples(base: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (0..n).map(|_| 0..base).multi_cartesian_product().collect()
}

impl FiniteModel {
    /// Builds a model from label-level descriptions of its carriers,
    /// actions (`m < m'` only) and operations.
    pub fn build<C, A, O>(
        theory: Theory,
        support: Vec<Grade>,
        mut carrier: C,
        mut action: A,
        mut op: O,
    ) -> Result<Self>
    where
        C: FnMut(&Grade) -> Result<Vec<String>>,
        A: FnMut(&Grade, &Grade, &str) -> Result<String>,
        O: FnMut(&str, &Grade, &[&str]) -> Result<String>,
    {
        let gm = theory.monoid().clone();
        for g in &support {
            gm.check(g)?;
        }
        let mut m = FiniteModel {
            theory,
            support,
            carriers: BTreeMap::new(),
            actions: BTreeMap::new(),
            ops: BTreeMap::new(),
        };
        for g in m.support.clone() {
            let labels = carrier(&g)?;
            if labels.iter().duplicates().next().is_some() {
                return Err(Error::IllFormed(format!("repeated element in carrier at {g}")));
            }
            m.carriers.insert(g, labels);
        }
        for (a, b) in m.support.clone().into_iter().tuple_combinations::<(_, _)>().flat_map(|(a, b)| [(a.clone(), b.clone()), (b, a)]) {
            if !gm.leq_unchecked(&a, &b) {
                continue;
            }
            let table = m.carriers[&a]
                .clone()
                .iter()
                .map(|x| m.index_of(&b, &action(&a, &b, x)?))
                .collect::<Result<Vec<_>>>()?;
            m.actions.insert((a, b), table);
        }
        for g in m.support.clone() {
            let n = m.carriers[&g].len();
            m.actions.insert((g.clone(), g), (0..n).collect());
        }
        for o in m.theory.signature.ops().to_vec() {
            for g in m.support.clone() {
                let out = gm.tensor_unchecked(&o.grade, &g);
                if !m.carriers.contains_key(&out) {
                    continue;
                }
                let labels = m.carriers[&g].clone();
                let table = tuples(labels.len(), o.arity)
                    .into_iter()
                    .map(|t| {
                        let args: Vec<&str> = t.iter().map(|&i| labels[i].as_str()).collect();
                        m.index_of(&out, &op(&o.name, &g, &args)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                m.ops.insert((o.name.clone(), g), table);
            }
        }
        Ok(m)
    }

    /// The model with a single element at every supported grade.
    pub fn terminal(theory: Theory, support: Vec<Grade>) -> Result<Self> {
        FiniteModel::build(
            theory,
            support,
            |_| Ok(vec!["*".to_string()]),
            |_, _, _| Ok("*".to_string()),
            |_, _, _| Ok("*".to_string()),
        )
    }

    /// The free model over `xs` restricted to `support`: carriers are the
    /// normal forms of the normalizer, elements labelled by their printed
    /// form.
    pub fn free(nz: &dyn Normalizer, xs: &[String], support: Vec<Grade>) -> Result<Self> {
        let mut terms: BTreeMap<Grade, Vec<Term>> = BTreeMap::new();
        for g in &support {
            terms.insert(g.clone(), nz.elements(g, xs)?);
        }
        let parse = |g: &Grade, label: &str| -> Result<Term> {
            terms[g]
                .iter()
                .find(|t| t.to_string() == label)
                .cloned()
                .ok_or_else(|| Error::Structural(format!("no element {label} at {g}")))
        };
        let show = |t: Term| -> Result<String> { Ok(nz.normalize_in(&t, xs)?.to_string()) };
        FiniteModel::build(
            nz.theory().clone(),
            support.clone(),
            |g| Ok(terms[g].iter().map(Term::to_string).collect()),
            |a, b, x| show(Term::coerce(b.clone(), parse(a, x)?)),
            |op, g, args| {
                let t = if args.is_empty() {
                    Term::constant_at(op, g.clone())
                } else {
                    Term::app(op, args.iter().map(|a| parse(g, a)).collect::<Result<_>>()?)
                };
                show(t)
            },
        )
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn monoid(&self) -> &GradeMonoid {
        self.theory.monoid()
    }

    pub fn support(&self) -> &[Grade] {
        &self.support
    }

    pub fn carrier(&self, g: &Grade) -> Result<&[String]> {
        self.carriers
            .get(g)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Support(g.clone()))
    }

    pub fn index_of(&self, g: &Grade, label: &str) -> Result<usize> {
        self.carrier(g)?
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Structural(format!("`{label}` is not an element at {g}")))
    }

    pub fn act(&self, from: &Grade, to: &Grade, i: usize) -> Result<usize> {
        let table = self.actions.get(&(from.clone(), to.clone())).ok_or_else(|| {
            if self.carriers.contains_key(from) {
                Error::Support(to.clone())
            } else {
                Error::Support(from.clone())
            }
        })?;
        Ok(table[i])
    }

    /// `|f|_{m'}(args)`.
    pub fn op_value(&self, op: &str, at: &Grade, args: &[usize]) -> Result<usize> {
        let o = self.theory.signature.op(op)?;
        let table = self.ops.get(&(op.to_string(), at.clone())).ok_or_else(|| {
            Error::Support(self.monoid().tensor_unchecked(&o.grade, at))
        })?;
        Ok(table[tuple_index(args, self.carrier(at)?.len())])
    }

    /// Replaces one entry of an operation table; used to build mutants.
    pub fn override_op(&mut self, op: &str, at: &Grade, args: &[usize], value: usize) -> Result<()> {
        let base = self.carrier(at)?.len();
        let table = self
            .ops
            .get_mut(&(op.to_string(), at.clone()))
            .ok_or_else(|| Error::Support(at.clone()))?;
        table[tuple_index(args, base)] = value;
        Ok(())
    }

    /// Value of `t` at component `m'` with `vars[i] ↦ env[i] ∈ A(m')`.
    /// The result lies in `A(grade(t) ⊗ m')`.
    pub fn eval(&self, vars: &[String], t: &Term, at: &Grade, env: &[usize]) -> Result<usize> {
        Ok(self.eval_graded(vars, t, at, env)?.0)
    }

    fn eval_graded(&self, vars: &[String], t: &Term, at: &Grade, env: &[usize]) -> Result<(usize, Grade)> {
        let gm = self.monoid();
        let sig = &self.theory.signature;
        match t {
            Term::Var(x) => {
                let i = vars
                    .iter()
                    .position(|v| v == x)
                    .ok_or_else(|| Error::UnboundVariable(x.clone()))?;
                self.carrier(at)?;
                Ok((env[i], sig.unit()))
            }
            Term::Coerce(g, body) => {
                let (v, gb) = self.eval_graded(vars, body, at, env)?;
                if !gm.leq(&gb, g)? {
                    return Err(Error::BadCoercion { from: gb, to: g.clone() });
                }
                let from = gm.tensor_unchecked(&gb, at);
                let to = gm.tensor_unchecked(g, at);
                Ok((self.act(&from, &to, v)?, g.clone()))
            }
            Term::App { op, args, ambient } => {
                let o = sig.op(op)?;
                let (vals, child) = if args.is_empty() {
                    (Vec::new(), ambient.clone().unwrap_or_else(|| sig.unit()))
                } else {
                    let mut vals = Vec::with_capacity(args.len());
                    let mut child: Option<Grade> = None;
                    for a in args {
                        let (v, g) = self.eval_graded(vars, a, at, env)?;
                        if let Some(c) = &child {
                            if *c != g {
                                return Err(Error::UnequalChildGrades {
                                    op: op.clone(),
                                    left: c.clone(),
                                    right: g,
                                });
                            }
                        }
                        child = Some(g);
                        vals.push(v);
                    }
                    (vals, child.expect("nonempty"))
                };
                let component = gm.tensor(&child, at)?;
                let v = self.op_value(op, &component, &vals)?;
                Ok((v, gm.tensor_unchecked(&o.grade, &child)))
            }
        }
    }

    /// `|t| : A(m')ⁿ → A(grade(t) ⊗ m')` as a table over lexicographically
    /// ordered argument tuples.
    pub fn interpret(&self, vars: &[String], t: &Term, at: &Grade) -> Result<Vec<usize>> {
        let base = self.carrier(at)?.len();
        tuples(base, vars.len())
            .iter()
            .map(|env| self.eval(vars, t, at, env))
            .collect()
    }

    /// Whether both sides agree at every component where the equation
    /// lives inside the support, for every assignment of the context.
    pub fn satisfies(&self, eq: &Equation) -> Result<bool> {
        for at in &self.support {
            let l = match self.interpret(&eq.context, &eq.lhs, at) {
                Err(Error::Support(_)) => continue,
                other => other?,
            };
            let r = match self.interpret(&eq.context, &eq.rhs, at) {
                Err(Error::Support(_)) => continue,
                other => other?,
            };
            if l != r {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Functoriality of the actions, naturality of the operations and the
    /// axioms; one line per failure.
    pub fn check_model(&self) -> Vec<String> {
        let mut report = Vec::new();
        let gm = self.monoid();
        for (a, b, c) in self.support.iter().tuple_combinations::<(_, _, _)>().flat_map(|(a, b, c)| {
            [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
        }) {
            if !(gm.leq_unchecked(a, b) && gm.leq_unchecked(b, c)) {
                continue;
            }
            for i in 0..self.carriers[a].len() {
                let two = self.act(a, b, i).and_then(|j| self.act(b, c, j));
                if two.ok() != self.act(a, c, i).ok() {
                    report.push(format!("functoriality fails on {a} ≤ {b} ≤ {c}"));
                    break;
                }
            }
        }
        for o in self.theory.signature.ops() {
            for (m1, m2) in self.support.iter().cartesian_product(&self.support) {
                if m1 == m2 || !gm.leq_unchecked(m1, m2) {
                    continue;
                }
                let (o1, o2) = (gm.tensor_unchecked(&o.grade, m1), gm.tensor_unchecked(&o.grade, m2));
                if !self.carriers.contains_key(&o1) || !self.carriers.contains_key(&o2) {
                    continue;
                }
                let base = self.carriers[m1].len();
                for args in tuples(base, o.arity) {
                    let moved: Vec<usize> = args.iter().map(|&a| self.actions[&(m1.clone(), m2.clone())][a]).collect();
                    let left = self.op_value(&o.name, m2, &moved);
                    let right = self.op_value(&o.name, m1, &args).and_then(|v| self.act(&o1, &o2, v));
                    if left.ok() != right.ok() {
                        report.push(format!("naturality of {} fails on {m1} ≤ {m2}", o.name));
                        break;
                    }
                }
            }
        }
        for ax in &self.theory.axioms {
            match self.satisfies(ax) {
                Ok(true) => {}
                Ok(false) => report.push(format!("axiom fails: {ax}")),
                Err(e) => report.push(format!("axiom {ax}: {e}")),
            }
        }
        report
    }
}

impl fmt::Display for FiniteModel {
    /// The model description format read by the command line tool.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.support {
            writeln!(f, "carrier {g} = {}", self.carriers[g].join(", "))?;
        }
        for ((a, b), table) in &self.actions {
            if a == b {
                continue;
            }
            let pairs = table
                .iter()
                .enumerate()
                .map(|(i, &j)| format!("{} -> {}", self.carriers[a][i], self.carriers[b][j]));
            writeln!(f, "action {a} -> {b} : {}", pairs.format(", "))?;
        }
        for ((op, g), table) in &self.ops {
            let arity = self.theory.signature.op(op).map(|o| o.arity).unwrap_or(0);
            let out = self.monoid().tensor_unchecked(&self.theory.signature.op(op).unwrap().grade, g);
            let labels = &self.carriers[g];
            let rows = tuples(labels.len(), arity).into_iter().zip(table).map(|(args, &v)| {
                format!(
                    "({}) -> {}",
                    args.iter().map(|&i| labels[i].as_str()).join(", "),
                    self.carriers[&out][v]
                )
            });
            writeln!(f, "interp {op} @ {g} : {}", rows.format(", "))?;
        }
        Ok(())
    }
}

/// A grade-indexed family of maps between two models of one theory.
#[derive(Clone, Debug)]
pub struct ModelHom<'a> {
    pub source: &'a FiniteModel,
    pub target: &'a FiniteModel,
    pub components: BTreeMap<Grade, Vec<usize>>,
}

fn compatible(a: &FiniteModel, b: &FiniteModel) -> Result<()> {
    if a.theory != b.theory || a.support != b.support {
        return Err(Error::Structural(
            "homomorphisms need models of one theory on one support".into(),
        ));
    }
    Ok(())
}

impl<'a> ModelHom<'a> {
    pub fn identity(model: &'a FiniteModel) -> Self {
        let components = model
            .carriers
            .iter()
            .map(|(g, c)| (g.clone(), (0..c.len()).collect()))
            .collect();
        ModelHom {
            source: model,
            target: model,
            components,
        }
    }

    /// The map sending everything to the single element of each carrier.
    pub fn to_terminal(source: &'a FiniteModel, terminal: &'a FiniteModel) -> Result<Self> {
        compatible(source, terminal)?;
        let components = source
            .carriers
            .iter()
            .map(|(g, c)| (g.clone(), vec![0; c.len()]))
            .collect();
        Ok(ModelHom {
            source,
            target: terminal,
            components,
        })
    }

    /// Naturality in the grade and the homomorphism law for every operation.
    pub fn check(&self) -> Result<bool> {
        compatible(self.source, self.target)?;
        Ok(violations(self.source, self.target, &self.components, None).is_empty())
    }
}

/// Failed constraints among those whose grades all have components in
/// `components`; when `only` is given, constraints not touching that grade
/// are skipped.
fn violations(
    a: &FiniteModel,
    b: &FiniteModel,
    components: &BTreeMap<Grade, Vec<usize>>,
    only: Option<&Grade>,
) -> Vec<String> {
    let gm = a.monoid();
    let mut out = Vec::new();
    let touches = |gs: &[&Grade]| only.is_none_or(|o| gs.contains(&o));
    for ((m1, m2), table) in &a.actions {
        let (Some(h1), Some(h2)) = (components.get(m1), components.get(m2)) else {
            continue;
        };
        if m1 == m2 || !touches(&[m1, m2]) {
            continue;
        }
        for (i, &j) in table.iter().enumerate() {
            if b.actions[&(m1.clone(), m2.clone())][h1[i]] != h2[j] {
                out.push(format!("not natural on {m1} ≤ {m2}"));
                break;
            }
        }
    }
    for o in a.theory.signature.ops() {
        for at in &a.support {
            let res = gm.tensor_unchecked(&o.grade, at);
            let (Some(h_at), Some(h_res)) = (components.get(at), components.get(&res)) else {
                continue;
            };
            if !touches(&[at, &res]) {
                continue;
            }
            for args in tuples(a.carriers[at].len(), o.arity) {
                let image: Vec<usize> = args.iter().map(|&i| h_at[i]).collect();
                let lhs = h_res[a.op_value(&o.name, at, &args).expect("table present")];
                let rhs = b.op_value(&o.name, at, &image).expect("table present");
                if lhs != rhs {
                    out.push(format!("does not preserve {} at {at}", o.name));
                    break;
                }
            }
        }
    }
    out
}

/// `hom_check`: whether the family is a homomorphism of models.
pub fn hom_check(h: &ModelHom<'_>) -> Result<bool> {
    h.check()
}

/// Every homomorphism `a → b` agreeing with `fixed` (grade ↦ element ↦
/// image), found by backtracking over the support in order.
pub fn enumerate_homs<'a>(
    a: &'a FiniteModel,
    b: &'a FiniteModel,
    fixed: &BTreeMap<Grade, BTreeMap<usize, usize>>,
    limit: usize,
) -> Result<Vec<ModelHom<'a>>> {
    compatible(a, b)?;
    let mut found = Vec::new();
    let mut partial = BTreeMap::new();
    search(a, b, fixed, 0, &mut partial, &mut found, limit)?;
    Ok(found
        .into_iter()
        .map(|components| ModelHom {
            source: a,
            target: b,
            components,
        })
        .collect())
}

fn search(
    a: &FiniteModel,
    b: &FiniteModel,
    fixed: &BTreeMap<Grade, BTreeMap<usize, usize>>,
    k: usize,
    partial: &mut BTreeMap<Grade, Vec<usize>>,
    found: &mut Vec<BTreeMap<Grade, Vec<usize>>>,
    limit: usize,
) -> Result<()> {
    if k == a.support.len() {
        if found.len() >= limit {
            return Err(Error::Resource {
                what: "enumerating homomorphisms".into(),
                cap: limit,
            });
        }
        found.push(partial.clone());
        return Ok(());
    }
    let g = a.support[k].clone();
    let (na, nb) = (a.carriers[&g].len(), b.carriers[&g].len());
    let pins = fixed.get(&g);
    for choice in tuples(nb, na) {
        if pins.is_some_and(|p| p.iter().any(|(&i, &j)| choice[i] != j)) {
            continue;
        }
        partial.insert(g.clone(), choice);
        if violations(a, b, partial, Some(&g)).is_empty() {
            search(a, b, fixed, k + 1, partial, found, limit)?;
        }
        partial.remove(&g);
    }
    Ok(())
}
