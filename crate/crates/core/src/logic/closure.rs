//! Bounded congruence closure: the reference semantics for entailment.
//!
//! The universe holds coercion-normal terms over a fixed context. Every way
//! of building a universe term from universe terms by one operation or one
//! coercion is recorded as an e-node, so the coercion laws are applied by
//! normalisation and congruence by the usual hash-consing rebuild.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grade::Grade;
use crate::syntax::{normalize_with_grade, subst_rec, Term, Theory};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureConfig {
    /// Maximal operation depth of universe terms.
    pub depth: usize,
    /// Largest natural number used when the grade monoid is infinite.
    pub nat_bound: u64,
    /// Upper limit on universe size.
    pub max_terms: usize,
    /// Upper limit on axiom instances examined.
    pub max_instances: usize,
    /// Restrict the universe to terms whose grade lies below this one.
    pub grade_ceiling: Option<Grade>,
    /// Rounds of substitution into already derived equations.
    pub derived_rounds: usize,
    /// Upper limit on derived-equation instances per round; exceeding it
    /// ends the round early, which only weakens the closure.
    pub derived_budget: usize,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig {
            depth: 3,
            nat_bound: 4,
            max_terms: 250_000,
            max_instances: 5_000_000,
            grade_ceiling: None,
            derived_rounds: 2,
            derived_budget: 200_000,
        }
    }
}

impl ClosureConfig {
    pub fn with_depth(depth: usize) -> Self {
        ClosureConfig {
            depth,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entailment {
    Proved,
    Unknown,
}

/// A finished closure: universe terms partitioned into provable-equality
/// classes, each represented by its least term under
/// [`Term::canonical_cmp`].
#[derive(Clone, Debug)]
pub struct ClosureUniverse {
    theory: Theory,
    context: Vec<String>,
    depth: usize,
    terms: Vec<Term>,
    grades: Vec<Grade>,
    index: HashMap<Term, usize>,
    rep: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Head {
    Op(String, Option<Grade>),
    Coerce(Grade),
}

struct Builder<'a> {
    theory: &'a Theory,
    config: &'a ClosureConfig,
    grades: Vec<Grade>,
    terms: Vec<Term>,
    term_grades: Vec<Grade>,
    depths: Vec<usize>,
    index: HashMap<Term, usize>,
    parent: Vec<usize>,
    size: Vec<usize>,
    heads: HashMap<Head, usize>,
    enodes: Vec<(usize, Vec<usize>, usize)>,
    instances: usize,
}

/// Builds the closure over all terms in `context` up to the configured depth.
pub fn derive_closure(
    theory: &Theory,
    context: &[String],
    config: &ClosureConfig,
) -> Result<ClosureUniverse> {
    if config.depth == 0 {
        return Err(Error::Structural("closure depth must be at least 1".into()));
    }
    let mut b = Builder::new(theory, config)?;
    b.generate(context)?;
    b.close(config.depth)?;
    Ok(b.freeze(context, config.depth))
}

/// Builds the closure over the subterms of `seeds` only. Used when the full
/// universe at the wanted depth is too large.
pub fn derive_closure_seeded(
    theory: &Theory,
    context: &[String],
    seeds: &[Term],
    config: &ClosureConfig,
) -> Result<ClosureUniverse> {
    let mut b = Builder::new(theory, config)?;
    for s in seeds {
        if let Some(x) = s.free_vars().iter().find(|x| !context.contains(x)) {
            return Err(Error::UnboundVariable(x.clone()));
        }
        let (n, _) = normalize_with_grade(&theory.signature, s)?;
        for sub in n.subterms() {
            b.insert(sub.clone())?;
        }
    }
    let depth = b.depths.iter().copied().max().unwrap_or(0);
    b.close(depth)?;
    Ok(b.freeze(context, depth))
}

/// Semi-decides `theory ⊢ s = t` with a closure at `config.depth` over the
/// free variables of both sides.
pub fn entails(theory: &Theory, s: &Term, t: &Term, config: &ClosureConfig) -> Result<Entailment> {
    let sig = &theory.signature;
    let (ns, gs) = normalize_with_grade(sig, s)?;
    let (nt, gt) = normalize_with_grade(sig, t)?;
    if gs != gt {
        return Err(Error::GradeMismatch {
            expected: gs,
            found: gt,
        });
    }
    if ns == nt {
        return Ok(Entailment::Proved);
    }
    if ns.depth() > config.depth || nt.depth() > config.depth {
        return Ok(Entailment::Unknown);
    }
    let ctx: Vec<String> = s.free_vars().union(&t.free_vars()).cloned().collect();
    let u = derive_closure(theory, &ctx, config)?;
    Ok(match u.equivalent(&ns, &nt)? {
        Some(true) => Entailment::Proved,
        _ => Entailment::Unknown,
    })
}

impl<'a> Builder<'a> {
    fn new(theory: &'a Theory, config: &'a ClosureConfig) -> Result<Self> {
        theory.validate()?;
        let gm = theory.monoid();
        let mut grades = gm.enumerate(config.nat_bound);
        if let Some(c) = &config.grade_ceiling {
            gm.check(c)?;
            grades.retain(|g| gm.leq_unchecked(g, c));
        }
        Ok(Builder {
            theory,
            config,
            grades,
            terms: Vec::new(),
            term_grades: Vec::new(),
            depths: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
            size: Vec::new(),
            heads: HashMap::new(),
            enodes: Vec::new(),
            instances: 0,
        })
    }

    fn admits(&self, g: &Grade) -> bool {
        self.grades.contains(g)
    }

    /// Inserts a normal-form term; returns its id, or `None` when its grade
    /// is outside the admitted grades.
    fn insert(&mut self, t: Term) -> Result<Option<usize>> {
        if let Some(&i) = self.index.get(&t) {
            return Ok(Some(i));
        }
        let g = self.theory.signature.infer_grade(&t)?;
        if !self.admits(&g) {
            return Ok(None);
        }
        if self.terms.len() >= self.config.max_terms {
            return Err(Error::Resource {
                what: "building the closure universe".into(),
                cap: self.config.max_terms,
            });
        }
        let i = self.terms.len();
        self.depths.push(t.depth());
        self.index.insert(t.clone(), i);
        self.terms.push(t);
        self.term_grades.push(g);
        self.parent.push(i);
        self.size.push(1);
        Ok(Some(i))
    }

    fn insert_with_coercions(&mut self, t: Term) -> Result<()> {
        let sig = &self.theory.signature;
        let g = sig.infer_grade(&t)?;
        if self.insert(t.clone())?.is_none() {
            return Ok(());
        }
        let targets: Vec<Grade> = self
            .grades
            .iter()
            .filter(|h| **h != g && sig.monoid().leq_unchecked(&g, h))
            .cloned()
            .collect();
        for h in targets {
            let (n, _) = normalize_with_grade(sig, &Term::coerce(h, t.clone()))?;
            self.insert(n)?;
        }
        Ok(())
    }

    fn generate(&mut self, context: &[String]) -> Result<()> {
        let sig = &self.theory.signature;
        for x in context {
            self.insert_with_coercions(Term::var(x.clone()))?;
        }
        let ops = sig.ops().to_vec();
        for op in ops.iter().filter(|o| o.arity == 0) {
            for a in self.grades.clone() {
                let raw = Term::constant_at(op.name.clone(), a);
                let (n, _) = normalize_with_grade(sig, &raw)?;
                self.insert_with_coercions(n)?;
            }
        }
        for level in 1..=self.config.depth {
            let snapshot = self.terms.len();
            for op in ops.iter().filter(|o| o.arity > 0) {
                for g in self.grades.clone() {
                    let result = sig.monoid().tensor_unchecked(&op.grade, &g);
                    if !self.admits(&result) {
                        continue;
                    }
                    let pool: Vec<usize> = (0..snapshot)
                        .filter(|&i| self.term_grades[i] == g && self.depths[i] < level)
                        .collect();
                    let fresh = pool.iter().filter(|&&i| self.depths[i] == level - 1).count();
                    if fresh == 0 {
                        continue;
                    }
                    let total = pool.len().checked_pow(op.arity as u32).unwrap_or(usize::MAX);
                    let old = (pool.len() - fresh).checked_pow(op.arity as u32).unwrap_or(0);
                    if self.terms.len().saturating_add(total - old) > self.config.max_terms {
                        return Err(Error::Resource {
                            what: format!("building the closure universe at depth {level}"),
                            cap: self.config.max_terms,
                        });
                    }
                    for tuple in (0..op.arity).map(|_| pool.iter().copied()).multi_cartesian_product() {
                        if tuple.iter().all(|&i| self.depths[i] + 1 < level) {
                            continue;
                        }
                        let args = tuple.iter().map(|&i| self.terms[i].clone()).collect();
                        let (n, _) = normalize_with_grade(sig, &Term::app(op.name.clone(), args))?;
                        self.insert_with_coercions(n)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn head(&mut self, h: Head) -> usize {
        let n = self.heads.len();
        *self.heads.entry(h).or_insert(n)
    }

    fn lookup_normal(&self, raw: &Term) -> Result<Option<usize>> {
        let (n, _) = normalize_with_grade(&self.theory.signature, raw)?;
        Ok(self.index.get(&n).copied())
    }

    /// Records every one-step construction of a universe term from universe
    /// terms: structural nodes, coercions of each term and raw applications
    /// to coerced arguments that normalise into the universe.
    fn build_enodes(&mut self) -> Result<()> {
        let sig = &self.theory.signature;
        let gm = sig.monoid().clone();
        for i in 0..self.terms.len() {
            let t = self.terms[i].clone();
            match &t {
                Term::Var(_) => {}
                Term::Coerce(g, body) => {
                    let h = self.head(Head::Coerce(g.clone()));
                    let b = self.index[&**body];
                    self.enodes.push((h, vec![b], i));
                }
                Term::App { op, args, ambient } => {
                    let h = self.head(Head::Op(op.clone(), ambient.clone()));
                    let kids = args.iter().map(|a| self.index[a]).collect();
                    self.enodes.push((h, kids, i));
                }
            }
            let g = self.term_grades[i].clone();
            for target in self.grades.clone() {
                if !gm.leq_unchecked(&g, &target) {
                    continue;
                }
                if let Some(j) = self.lookup_normal(&Term::coerce(target.clone(), t.clone()))? {
                    let h = self.head(Head::Coerce(target));
                    self.enodes.push((h, vec![i], j));
                }
            }
            if let Term::App { op, args, .. } = &t {
                if args.is_empty() {
                    continue;
                }
                let child = sig.infer_grade(&args[0])?;
                for target in self.grades.clone() {
                    if target == child || !gm.leq_unchecked(&child, &target) {
                        continue;
                    }
                    let mut coerced = Vec::with_capacity(args.len());
                    for a in args {
                        let (n, _) = normalize_with_grade(sig, &Term::coerce(target.clone(), a.clone()))?;
                        match self.index.get(&n) {
                            Some(&k) => coerced.push((n, k)),
                            None => break,
                        }
                    }
                    if coerced.len() != args.len() {
                        continue;
                    }
                    let raw = Term::app(op.clone(), coerced.iter().map(|(n, _)| n.clone()).collect());
                    if let Some(j) = self.lookup_normal(&raw)? {
                        let h = self.head(Head::Op(op.clone(), None));
                        self.enodes.push((h, coerced.iter().map(|(_, k)| *k).collect(), j));
                    }
                }
            }
        }
        for op in sig.ops().iter().filter(|o| o.arity == 0) {
            for a in self.grades.clone() {
                if let Some(j) = self.lookup_normal(&Term::constant_at(op.name.clone(), a.clone()))? {
                    let h = self.head(Head::Op(op.name.clone(), Some(a)));
                    self.enodes.push((h, Vec::new(), j));
                }
            }
        }
        Ok(())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        debug_assert_eq!(self.term_grades[ra], self.term_grades[rb]);
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }

    /// Merges the targets of e-nodes that became equal; repeats to fixpoint.
    fn rebuild(&mut self) {
        loop {
            let mut table: HashMap<(usize, Vec<usize>), usize> = HashMap::with_capacity(self.enodes.len());
            let mut changed = false;
            for k in 0..self.enodes.len() {
                let (h, kids, target) = self.enodes[k].clone();
                let key = (h, kids.into_iter().map(|c| self.find(c)).collect::<Vec<_>>());
                let t = self.find(target);
                match table.get(&key) {
                    Some(&other) => {
                        if self.union(other, t) {
                            changed = true;
                        }
                    }
                    None => {
                        table.insert(key, t);
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// For each variable of `sides`, the largest depth a binding may have so
    /// that every instance can still lie in a universe of depth `depth`.
    fn binding_bounds(sides: &[&Term], depth: usize) -> Option<BTreeMap<String, usize>> {
        fn walk(t: &Term, p: usize, depth: usize, out: &mut BTreeMap<String, usize>) -> bool {
            match t {
                Term::Var(x) => {
                    if p > depth {
                        return false;
                    }
                    let b = out.entry(x.clone()).or_insert(depth - p);
                    *b = (*b).min(depth - p);
                    true
                }
                Term::Coerce(_, body) => walk(body, p, depth, out),
                Term::App { args, .. } => {
                    if p + 1 > depth {
                        return false;
                    }
                    args.iter().all(|a| walk(a, p + 1, depth, out))
                }
            }
        }
        let mut out = BTreeMap::new();
        sides
            .iter()
            .all(|s| walk(s, 0, depth, &mut out))
            .then_some(out)
    }

    /// All instances of `lhs = rhs` whose two sides land in the universe.
    fn instances(
        &mut self,
        lhs: &Term,
        rhs: &Term,
        depth: usize,
        mut budget: Option<&mut usize>,
    ) -> Result<(Vec<(usize, usize)>, bool)> {
        let Some(bounds) = Self::binding_bounds(&[lhs, rhs], depth) else {
            return Ok((Vec::new(), true));
        };
        let sig = &self.theory.signature;
        let vars: Vec<(String, usize)> = bounds.into_iter().collect();
        let mut out = Vec::new();
        for shift in self.grades.clone() {
            let pools: Vec<Vec<usize>> = vars
                .iter()
                .map(|(_, b)| {
                    (0..self.terms.len())
                        .filter(|&i| self.term_grades[i] == shift && self.depths[i] <= *b)
                        .collect()
                })
                .collect();
            let count = pools.iter().map(Vec::len).product::<usize>();
            match budget.as_deref_mut() {
                Some(remaining) => {
                    if count > *remaining {
                        return Ok((out, false));
                    }
                    *remaining -= count;
                }
                None => {
                    if self.instances + count > self.config.max_instances {
                        return Err(Error::Resource {
                            what: "instantiating axioms".into(),
                            cap: self.config.max_instances,
                        });
                    }
                    self.instances += count;
                }
            }
            let combos: Box<dyn Iterator<Item = Vec<usize>>> = if pools.is_empty() {
                Box::new(std::iter::once(Vec::new()))
            } else {
                Box::new(pools.into_iter().multi_cartesian_product())
            };
            for choice in combos {
                let binding: BTreeMap<String, Term> = vars
                    .iter()
                    .zip(&choice)
                    .map(|((x, _), &i)| (x.clone(), self.terms[i].clone()))
                    .collect();
                let l = subst_rec(sig, lhs, &binding, &shift)?;
                let r = subst_rec(sig, rhs, &binding, &shift)?;
                if let (Some(a), Some(b)) = (self.lookup_normal(&l)?, self.lookup_normal(&r)?) {
                    out.push((a, b));
                }
            }
        }
        Ok((out, true))
    }

    fn close(&mut self, depth: usize) -> Result<()> {
        self.build_enodes()?;
        let axioms = self.theory.axioms.clone();
        for ax in &axioms {
            let (pairs, _) = self.instances(&ax.lhs, &ax.rhs, depth, None)?;
            for (a, b) in pairs {
                self.union(a, b);
            }
        }
        self.rebuild();
        for _ in 0..self.config.derived_rounds {
            if !self.derived_round(depth)? {
                break;
            }
        }
        Ok(())
    }

    /// Substitutes into equations already derived; returns whether any new
    /// equality was found.
    fn derived_round(&mut self, depth: usize) -> Result<bool> {
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.terms.len() {
            let r = self.find(i);
            classes.entry(r).or_default().push(i);
        }
        let mut budget = self.config.derived_budget;
        let mut pairs = Vec::new();
        'outer: for members in classes.values().filter(|m| m.len() > 1) {
            let first = self.terms[members[0]].clone();
            for &j in &members[1..] {
                let other = self.terms[j].clone();
                let (found, complete) = self.instances(&first, &other, depth, Some(&mut budget))?;
                pairs.extend(found);
                if !complete {
                    break 'outer;
                }
            }
        }
        let mut changed = false;
        for (a, b) in pairs {
            changed |= self.union(a, b);
        }
        if changed {
            self.rebuild();
        }
        Ok(changed)
    }

    fn freeze(mut self, context: &[String], depth: usize) -> ClosureUniverse {
        let n = self.terms.len();
        let roots: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        let mut best: HashMap<usize, usize> = HashMap::new();
        for (i, &root) in roots.iter().enumerate() {
            let e = best.entry(root).or_insert(i);
            if self.terms[i].canonical_cmp(&self.terms[*e]).is_lt() {
                *e = i;
            }
        }
        let rep = roots.iter().map(|r| best[r]).collect();
        ClosureUniverse {
            theory: self.theory.clone(),
            context: context.to_vec(),
            depth,
            terms: self.terms,
            grades: self.term_grades,
            index: self.index,
            rep,
        }
    }
}

impl ClosureUniverse {
    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn context(&self) -> &[String] {
        &self.context
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn id(&self, t: &Term) -> Result<Option<usize>> {
        let (n, _) = normalize_with_grade(&self.theory.signature, t)?;
        Ok(self.index.get(&n).copied())
    }

    pub fn contains(&self, t: &Term) -> Result<bool> {
        Ok(self.id(t)?.is_some())
    }

    /// Class representative, or `None` when `t` is outside the universe.
    pub fn representative(&self, t: &Term) -> Result<Option<&Term>> {
        Ok(self.id(t)?.map(|i| &self.terms[self.rep[i]]))
    }

    /// `Some(true)` when both terms are in the universe and provably equal,
    /// `Some(false)` when both are in the universe but not identified,
    /// `None` when either lies outside.
    pub fn equivalent(&self, s: &Term, t: &Term) -> Result<Option<bool>> {
        Ok(match (self.id(s)?, self.id(t)?) {
            (Some(a), Some(b)) => Some(self.rep[a] == self.rep[b]),
            _ => None,
        })
    }

    /// All classes, each sorted canonically, ordered by representative.
    pub fn classes(&self) -> Vec<Vec<Term>> {
        self.classes_where(|_| true)
    }

    pub fn classes_at(&self, g: &Grade) -> Vec<Vec<Term>> {
        self.classes_where(|i| &self.grades[i] == g)
    }

    fn classes_where(&self, keep: impl Fn(usize) -> bool) -> Vec<Vec<Term>> {
        let mut by_rep: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
        for i in (0..self.terms.len()).filter(|&i| keep(i)) {
            by_rep.entry(self.rep[i]).or_default().push(self.terms[i].clone());
        }
        let mut out: Vec<Vec<Term>> = by_rep
            .into_values()
            .map(|mut c| {
                c.sort_by(Term::canonical_cmp);
                c
            })
            .collect();
        out.sort_by(|a, b| a[0].canonical_cmp(&b[0]));
        out
    }

    /// Representatives of the classes at grade `g`, sorted canonically.
    pub fn representatives_at(&self, g: &Grade) -> Vec<Term> {
        let reps: BTreeSet<usize> = (0..self.terms.len())
            .filter(|&i| &self.grades[i] == g)
            .map(|i| self.rep[i])
            .collect();
        let mut out: Vec<Term> = reps.into_iter().map(|i| self.terms[i].clone()).collect();
        out.sort_by(Term::canonical_cmp);
        out
    }

    pub fn class_count_at(&self, g: &Grade) -> usize {
        self.representatives_at(g).len()
    }
}
