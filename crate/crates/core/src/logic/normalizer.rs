//! Normal-form procedures for theories whose free models are known.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::grade::{Grade, GradeMonoid};
use crate::logic::closure::{derive_closure, ClosureConfig, ClosureUniverse};
use crate::syntax::{normalize_coercions, normalize_with_grade, Term, Theory};

/// A decision procedure for provable equality: two terms over the same
/// variables are provably equal iff their normal forms coincide.
pub trait Normalizer: Send + Sync {
    fn theory(&self) -> &Theory;

    /// Normal form of `t` viewed as a term over `vars`.
    fn normalize_in(&self, t: &Term, vars: &[String]) -> Result<Term>;

    /// Normal form of `t` over its own free variables.
    fn normalize(&self, t: &Term) -> Result<Term> {
        let vars: Vec<String> = t.free_vars().into_iter().collect();
        self.normalize_in(t, &vars)
    }

    /// All normal forms of grade `m` over `vars`, sorted canonically.
    fn elements(&self, m: &Grade, vars: &[String]) -> Result<Vec<Term>>;
}

fn check_vars(t: &Term, vars: &[String]) -> Result<()> {
    match t.free_vars().into_iter().find(|x| !vars.contains(x)) {
        Some(x) => Err(Error::UnboundVariable(x)),
        None => Ok(()),
    }
}

/// Exact for theories without axioms: provable equality is then generated
/// by the coercion laws alone.
#[derive(Clone, Debug)]
pub struct CoercionNormalizer {
    theory: Theory,
    nat_bound: u64,
}

impl CoercionNormalizer {
    pub fn new(theory: Theory) -> Result<Self> {
        theory.validate()?;
        if !theory.axioms.is_empty() {
            return Err(Error::Structural(
                "the coercion normalizer only decides theories without axioms".into(),
            ));
        }
        Ok(CoercionNormalizer {
            theory,
            nat_bound: 8,
        })
    }

    pub fn with_nat_bound(mut self, bound: u64) -> Self {
        self.nat_bound = bound;
        self
    }
}

impl Normalizer for CoercionNormalizer {
    fn theory(&self) -> &Theory {
        &self.theory
    }

    fn normalize_in(&self, t: &Term, vars: &[String]) -> Result<Term> {
        check_vars(t, vars)?;
        normalize_coercions(&self.theory.signature, t)
    }

    fn elements(&self, m: &Grade, vars: &[String]) -> Result<Vec<Term>> {
        let sig = &self.theory.signature;
        let gm = sig.monoid();
        gm.check(m)?;
        if let Some(op) = sig.ops().iter().find(|o| o.arity > 0) {
            return Err(Error::Structural(format!(
                "operation `{}` generates infinitely many terms",
                op.name
            )));
        }
        let mut atoms: Vec<Term> = vars.iter().map(|x| Term::var(x.clone())).collect();
        for op in sig.ops() {
            for a in gm.enumerate(self.nat_bound) {
                atoms.push(Term::constant_at(op.name.clone(), a));
            }
        }
        let mut out = Vec::new();
        for a in atoms {
            let (n, g) = normalize_with_grade(sig, &a)?;
            if gm.leq_unchecked(&g, m) {
                out.push(normalize_coercions(sig, &Term::coerce(m.clone(), n))?);
            }
        }
        out.sort_by(Term::canonical_cmp);
        out.dedup();
        Ok(out)
    }
}

/// Semantic value of a term of the global-state theory: either a bare
/// variable (grade ⊥) or a function `V → V × X` (grade ⊤).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateValue {
    Pure(String),
    Stateful(Vec<(usize, String)>),
}

impl StateValue {
    fn at(&self, v: usize) -> (usize, String) {
        match self {
            StateValue::Pure(x) => (v, x.clone()),
            StateValue::Stateful(f) => f[v].clone(),
        }
    }
}

/// Decides the two-graded global-state theory with values `0..k` by
/// evaluating terms to functions `V → V × X`.
#[derive(Clone, Debug)]
pub struct StateNormalizer {
    theory: Theory,
    values: usize,
}

impl StateNormalizer {
    /// Expects operations `lookup` of arity `k` and `update_0 .. update_{k-1}`
    /// of arity 1, all at grade ⊤ of the two-element chain.
    pub fn new(theory: Theory) -> Result<Self> {
        let sig = &theory.signature;
        if sig.monoid() != &GradeMonoid::two() {
            return Err(Error::Structural(
                "the state normalizer needs the two-element grade chain".into(),
            ));
        }
        let top = Grade::set(["*"]);
        let lookup = sig.op("lookup")?;
        let k = lookup.arity;
        let well_shaped = lookup.grade == top
            && sig.ops().len() == k + 1
            && (0..k).all(|v| {
                sig.op(&format!("update_{v}"))
                    .map(|o| o.arity == 1 && o.grade == top)
                    .unwrap_or(false)
            });
        if !well_shaped || k == 0 {
            return Err(Error::Structural(
                "the state normalizer needs exactly lookup and update_v for each value".into(),
            ));
        }
        Ok(StateNormalizer { theory, values: k })
    }

    pub fn values(&self) -> usize {
        self.values
    }

    pub fn eval(&self, t: &Term) -> Result<StateValue> {
        let sig = &self.theory.signature;
        sig.infer_grade(t)?;
        self.eval_rec(t)
    }

    fn eval_rec(&self, t: &Term) -> Result<StateValue> {
        Ok(match t {
            Term::Var(x) => StateValue::Pure(x.clone()),
            Term::Coerce(g, body) => {
                let inner = self.eval_rec(body)?;
                match (g, inner) {
                    (Grade::Set(s), StateValue::Pure(x)) if !s.is_empty() => {
                        StateValue::Stateful((0..self.values).map(|v| (v, x.clone())).collect())
                    }
                    (_, other) => other,
                }
            }
            Term::App { op, args, .. } if op == "lookup" => {
                let vals = args.iter().map(|a| self.eval_rec(a)).collect::<Result<Vec<_>>>()?;
                StateValue::Stateful((0..self.values).map(|v| vals[v].at(v)).collect())
            }
            Term::App { op, args, .. } => {
                let w = update_index(op)?;
                let inner = self.eval_rec(&args[0])?;
                StateValue::Stateful((0..self.values).map(|_| inner.at(w)).collect())
            }
        })
    }

    /// The literal canonical term `lookup(λv. update_{f_V(v)}(f_X(v)))`.
    pub fn canonical_term(&self, f: &[(usize, String)]) -> Term {
        Term::app(
            "lookup",
            f.iter()
                .map(|(w, x)| Term::app(format!("update_{w}"), vec![Term::var(x.clone())]))
                .collect(),
        )
    }

    /// Chosen representative of a semantic value. Identity-on-state and
    /// constant-state functions get the shorter forms `c[⊤](x)` and
    /// `update_w(x)`; everything else is the canonical lookup form.
    pub fn reify(&self, v: &StateValue) -> Term {
        match v {
            StateValue::Pure(x) => Term::var(x.clone()),
            StateValue::Stateful(f) => {
                let (w0, x0) = &f[0];
                let same_x = f.iter().all(|(_, x)| x == x0);
                if same_x && f.iter().enumerate().all(|(v, (w, _))| *w == v) {
                    Term::coerce(Grade::set(["*"]), Term::var(x0.clone()))
                } else if same_x && f.iter().all(|(w, _)| w == w0) {
                    Term::app(format!("update_{w0}"), vec![Term::var(x0.clone())])
                } else {
                    self.canonical_term(f)
                }
            }
        }
    }

    /// Every function `V → V × vars`, in lexicographic order.
    pub fn all_functions(&self, vars: &[String]) -> Vec<Vec<(usize, String)>> {
        let outputs: Vec<(usize, String)> = (0..self.values)
            .cartesian_product(vars.iter().cloned())
            .collect();
        if outputs.is_empty() {
            return Vec::new();
        }
        (0..self.values)
            .map(|_| outputs.iter().cloned())
            .multi_cartesian_product()
            .collect()
    }
}

fn update_index(op: &str) -> Result<usize> {
    op.strip_prefix("update_")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::UnknownOperation(op.to_string()))
}

impl Normalizer for StateNormalizer {
    fn theory(&self) -> &Theory {
        &self.theory
    }

    fn normalize_in(&self, t: &Term, vars: &[String]) -> Result<Term> {
        check_vars(t, vars)?;
        Ok(self.reify(&self.eval(t)?))
    }

    fn elements(&self, m: &Grade, vars: &[String]) -> Result<Vec<Term>> {
        self.theory.monoid().check(m)?;
        let mut out: Vec<Term> = if m == &self.theory.monoid().unit() {
            vars.iter().map(|x| Term::var(x.clone())).collect()
        } else {
            self.all_functions(vars)
                .into_iter()
                .map(|f| self.reify(&StateValue::Stateful(f)))
                .collect()
        };
        out.sort_by(Term::canonical_cmp);
        Ok(out)
    }
}

/// Falls back on closure-class representatives; one closure per variable
/// list, built on first use.
#[derive(Debug)]
pub struct ClosureNormalizer {
    theory: Theory,
    config: ClosureConfig,
    cache: Mutex<BTreeMap<Vec<String>, Arc<ClosureUniverse>>>,
}

impl ClosureNormalizer {
    pub fn new(theory: Theory, config: ClosureConfig) -> Self {
        ClosureNormalizer {
            theory,
            config,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn config(&self) -> &ClosureConfig {
        &self.config
    }

    pub fn closure(&self, vars: &[String]) -> Result<Arc<ClosureUniverse>> {
        let key = vars.to_vec();
        if let Some(u) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(u.clone());
        }
        let u = Arc::new(derive_closure(&self.theory, vars, &self.config)?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(key, u.clone());
        Ok(u)
    }
}

impl Normalizer for ClosureNormalizer {
    fn theory(&self) -> &Theory {
        &self.theory
    }

    fn normalize_in(&self, t: &Term, vars: &[String]) -> Result<Term> {
        check_vars(t, vars)?;
        let u = self.closure(vars)?;
        u.representative(t)?.cloned().ok_or_else(|| Error::Resource {
            what: format!("normalising `{t}`, which is deeper than the closure bound"),
            cap: self.config.depth,
        })
    }

    fn elements(&self, m: &Grade, vars: &[String]) -> Result<Vec<Term>> {
        self.theory.monoid().check(m)?;
        Ok(self.closure(vars)?.representatives_at(m))
    }
}
