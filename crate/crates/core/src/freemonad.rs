//! Free models, the graded monads they induce, and Kleisli-style homs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grade::{Grade, GradeMonoid, OK};
use crate::logic::{Normalizer, StateValue};
use crate::model::{FiniteModel, ModelHom};
use crate::syntax::{normalize_coercions, rename, substitute_at, Term, Theory};

/// A graded monad materialised on finite sets of named generators.
pub trait GradedMonad {
    type Elem: Clone + Ord + fmt::Debug + fmt::Display;

    fn monoid(&self) -> &GradeMonoid;

    /// `T(m, X)`, in a fixed order.
    fn elements(&self, m: &Grade, xs: &[String]) -> Result<Vec<Self::Elem>>;

    /// `η_X(x) ∈ T(I, X)`.
    fn unit(&self, x: &str) -> Self::Elem;

    /// `T(w, X)` for `w : from ≤ to`.
    fn coerce(&self, from: &Grade, to: &Grade, e: &Self::Elem) -> Result<Self::Elem>;

    /// `T(m, f)` for `f : X → Y`; `ys` lists `Y`.
    fn map(&self, m: &Grade, e: &Self::Elem, f: &dyn Fn(&str) -> String, ys: &[String]) -> Result<Self::Elem>;

    /// `μ ∘ T(m1, k)`: flattens `e ∈ T(m1, Y)` along `k : Y → T(m2, X)`
    /// into `T(m1 ⊗ m2, X)`; `xs` lists `X`.
    fn bind(
        &self,
        m1: &Grade,
        m2: &Grade,
        e: &Self::Elem,
        k: &dyn Fn(&str) -> Result<Self::Elem>,
        xs: &[String],
    ) -> Result<Self::Elem>;
}

/// The monad `F_T` induced by a theory, on normal forms of a normalizer.
#[derive(Clone)]
pub struct TermMonad {
    nz: Arc<dyn Normalizer>,
}

impl fmt::Debug for TermMonad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TermMonad").finish_non_exhaustive()
    }
}

impl TermMonad {
    pub fn new(nz: Arc<dyn Normalizer>) -> Self {
        TermMonad { nz }
    }

    pub fn theory(&self) -> &Theory {
        self.nz.theory()
    }

    pub fn normalizer(&self) -> &dyn Normalizer {
        self.nz.as_ref()
    }
}

impl GradedMonad for TermMonad {
    type Elem = Term;

    fn monoid(&self) -> &GradeMonoid {
        self.nz.theory().monoid()
    }

    fn elements(&self, m: &Grade, xs: &[String]) -> Result<Vec<Term>> {
        self.nz.elements(m, xs)
    }

    fn unit(&self, x: &str) -> Term {
        Term::var(x)
    }

    fn coerce(&self, from: &Grade, to: &Grade, e: &Term) -> Result<Term> {
        let sig = &self.nz.theory().signature;
        let g = sig.infer_grade(e)?;
        if &g != from {
            return Err(Error::GradeMismatch {
                expected: from.clone(),
                found: g,
            });
        }
        let vars: Vec<String> = e.free_vars().into_iter().collect();
        self.nz.normalize_in(&Term::coerce(to.clone(), e.clone()), &vars)
    }

    fn map(&self, _m: &Grade, e: &Term, f: &dyn Fn(&str) -> String, ys: &[String]) -> Result<Term> {
        let sigma = e.free_vars().into_iter().map(|x| {
            let y = f(&x);
            (x, y)
        });
        let renamed = rename(e, &sigma.collect())?;
        self.nz.normalize_in(&renamed, ys)
    }

    fn bind(
        &self,
        _m1: &Grade,
        m2: &Grade,
        e: &Term,
        k: &dyn Fn(&str) -> Result<Term>,
        xs: &[String],
    ) -> Result<Term> {
        let binding = e
            .free_vars()
            .into_iter()
            .map(|y| Ok((y.clone(), k(&y)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let t = substitute_at(&self.nz.theory().signature, e, &binding, m2)?;
        self.nz.normalize_in(&t, xs)
    }
}

/// Elements of `m ∗ X` for graded exceptions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Er(String),
    Ok(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Er(e) => write!(f, "Er({e})"),
            Outcome::Ok(x) => write!(f, "Ok({x})"),
        }
    }
}

/// The graded exception monad in closed form:
/// `m ∗ X = { Er(e) | e ∈ m \ {Ok} } ∪ { Ok(x) | x ∈ X, Ok ∈ m }`.
#[derive(Clone, Debug)]
pub struct ExceptionMonad {
    monoid: GradeMonoid,
}

impl ExceptionMonad {
    pub fn new<S: AsRef<str>>(exceptions: &[S]) -> Self {
        ExceptionMonad {
            monoid: GradeMonoid::exception(exceptions.iter().map(|e| e.as_ref().to_string())),
        }
    }

    fn atoms<'g>(&self, m: &'g Grade) -> Result<&'g std::collections::BTreeSet<String>> {
        self.monoid.check(m)?;
        match m {
            Grade::Set(s) => Ok(s),
            _ => unreachable!("checked exception grade"),
        }
    }

    fn member(&self, m: &Grade, e: &Outcome) -> Result<bool> {
        let s = self.atoms(m)?;
        Ok(match e {
            Outcome::Er(x) => s.contains(x),
            Outcome::Ok(_) => s.contains(OK),
        })
    }
}

impl GradedMonad for ExceptionMonad {
    type Elem = Outcome;

    fn monoid(&self) -> &GradeMonoid {
        &self.monoid
    }

    fn elements(&self, m: &Grade, xs: &[String]) -> Result<Vec<Outcome>> {
        let s = self.atoms(m)?;
        let mut out: Vec<Outcome> = s.iter().filter(|e| *e != OK).map(|e| Outcome::Er(e.clone())).collect();
        if s.contains(OK) {
            out.extend(xs.iter().map(|x| Outcome::Ok(x.clone())));
        }
        Ok(out)
    }

    fn unit(&self, x: &str) -> Outcome {
        Outcome::Ok(x.to_string())
    }

    fn coerce(&self, from: &Grade, to: &Grade, e: &Outcome) -> Result<Outcome> {
        if !self.monoid.leq(from, to)? {
            return Err(Error::BadCoercion {
                from: from.clone(),
                to: to.clone(),
            });
        }
        if !self.member(from, e)? {
            return Err(Error::Structural(format!("{e} is not in grade {from}")));
        }
        Ok(e.clone())
    }

    fn map(&self, _m: &Grade, e: &Outcome, f: &dyn Fn(&str) -> String, _ys: &[String]) -> Result<Outcome> {
        Ok(match e {
            Outcome::Ok(x) => Outcome::Ok(f(x)),
            other => other.clone(),
        })
    }

    fn bind(
        &self,
        _m1: &Grade,
        _m2: &Grade,
        e: &Outcome,
        k: &dyn Fn(&str) -> Result<Outcome>,
        _xs: &[String],
    ) -> Result<Outcome> {
        match e {
            Outcome::Er(_) => Ok(e.clone()),
            Outcome::Ok(y) => k(y),
        }
    }
}

impl fmt::Display for StateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateValue::Pure(x) => write!(f, "{x}"),
            StateValue::Stateful(g) => write!(
                f,
                "[{}]",
                g.iter().enumerate().map(|(v, (w, x))| format!("{v}->({w},{x})")).join(" ")
            ),
        }
    }
}

/// Global state over the two-element chain in closed form:
/// `⊥ ∗ X = X` and `⊤ ∗ X = (V × X)^V`.
#[derive(Clone, Debug)]
pub struct StateMonad {
    values: usize,
    monoid: GradeMonoid,
}

impl StateMonad {
    pub fn new(values: usize) -> Self {
        StateMonad {
            values,
            monoid: GradeMonoid::two(),
        }
    }

    fn is_top(&self, m: &Grade) -> Result<bool> {
        self.monoid.check(m)?;
        Ok(m != &self.monoid.unit())
    }
}

impl GradedMonad for StateMonad {
    type Elem = StateValue;

    fn monoid(&self) -> &GradeMonoid {
        &self.monoid
    }

    fn elements(&self, m: &Grade, xs: &[String]) -> Result<Vec<StateValue>> {
        if !self.is_top(m)? {
            return Ok(xs.iter().map(|x| StateValue::Pure(x.clone())).collect());
        }
        let outputs: Vec<(usize, String)> = (0..self.values).cartesian_product(xs.iter().cloned()).collect();
        if outputs.is_empty() {
            return Ok(Vec::new());
        }
        Ok((0..self.values)
            .map(|_| outputs.iter().cloned())
            .multi_cartesian_product()
            .map(StateValue::Stateful)
            .collect())
    }

    fn unit(&self, x: &str) -> StateValue {
        StateValue::Pure(x.to_string())
    }

    fn coerce(&self, from: &Grade, to: &Grade, e: &StateValue) -> Result<StateValue> {
        if !self.monoid.leq(from, to)? {
            return Err(Error::BadCoercion {
                from: from.clone(),
                to: to.clone(),
            });
        }
        Ok(match (self.is_top(to)?, e) {
            (true, StateValue::Pure(x)) => StateValue::Stateful((0..self.values).map(|v| (v, x.clone())).collect()),
            (_, other) => other.clone(),
        })
    }

    fn map(&self, _m: &Grade, e: &StateValue, f: &dyn Fn(&str) -> String, _ys: &[String]) -> Result<StateValue> {
        Ok(match e {
            StateValue::Pure(x) => StateValue::Pure(f(x)),
            StateValue::Stateful(g) => StateValue::Stateful(g.iter().map(|(w, x)| (*w, f(x))).collect()),
        })
    }

    fn bind(
        &self,
        _m1: &Grade,
        _m2: &Grade,
        e: &StateValue,
        k: &dyn Fn(&str) -> Result<StateValue>,
        _xs: &[String],
    ) -> Result<StateValue> {
        match e {
            StateValue::Pure(y) => k(y),
            StateValue::Stateful(g) => {
                let mut out = Vec::with_capacity(self.values);
                for (w, y) in g {
                    out.push(match k(y)? {
                        StateValue::Pure(x) => (*w, x),
                        StateValue::Stateful(h) => h[*w].clone(),
                    });
                }
                Ok(StateValue::Stateful(out))
            }
        }
    }
}

/// `F_T X` on a finite support: grade-indexed sets of normal forms with
/// the coercion action and operations acting on representatives.
#[derive(Clone)]
pub struct FreeModel {
    nz: Arc<dyn Normalizer>,
    xs: Vec<String>,
    support: Vec<Grade>,
}

impl fmt::Debug for FreeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FreeModel")
            .field("xs", &self.xs)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl FreeModel {
    pub fn new(nz: Arc<dyn Normalizer>, xs: Vec<String>, support: Vec<Grade>) -> Result<Self> {
        for g in &support {
            nz.theory().monoid().check(g)?;
        }
        Ok(FreeModel { nz, xs, support })
    }

    pub fn theory(&self) -> &Theory {
        self.nz.theory()
    }

    pub fn vars(&self) -> &[String] {
        &self.xs
    }

    pub fn support(&self) -> &[Grade] {
        &self.support
    }

    /// The classes of grade `m`, by representative.
    pub fn elements(&self, m: &Grade) -> Result<Vec<Term>> {
        self.nz.elements(m, &self.xs)
    }

    /// `[t]`.
    pub fn representative(&self, t: &Term) -> Result<Term> {
        self.nz.normalize_in(t, &self.xs)
    }

    /// `F_T X w ([t]_m) = [c_w(t)]_{m'}`.
    pub fn coerce(&self, to: &Grade, t: &Term) -> Result<Term> {
        self.representative(&Term::coerce(to.clone(), t.clone()))
    }

    pub fn as_finite_model(&self) -> Result<FiniteModel> {
        FiniteModel::free(self.nz.as_ref(), &self.xs, self.support.clone())
    }

    /// The extension `v̄ : F X → A` of `v : X → A(I)`: each class is sent
    /// to the value of its representative under `v`. `free` must be
    /// [`FreeModel::as_finite_model`] of `self`.
    pub fn universal_hom<'a>(
        &self,
        free: &'a FiniteModel,
        target: &'a FiniteModel,
        v: &BTreeMap<String, usize>,
    ) -> Result<ModelHom<'a>> {
        let unit = self.theory().signature.unit();
        let env: Vec<usize> = self
            .xs
            .iter()
            .map(|x| v.get(x).copied().ok_or_else(|| Error::UnboundVariable(x.clone())))
            .collect::<Result<_>>()?;
        let mut components = BTreeMap::new();
        for g in &self.support {
            let images = self
                .elements(g)?
                .iter()
                .map(|t| target.eval(&self.xs, t, &unit, &env))
                .collect::<Result<Vec<_>>>()?;
            components.insert(g.clone(), images);
        }
        Ok(ModelHom {
            source: free,
            target,
            components,
        })
    }
}

/// `f : X → T(m, Y)`, one image per source generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KleisliHom<E> {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub grade: Grade,
    pub images: Vec<E>,
}

impl<E: Clone> KleisliHom<E> {
    /// `η_X` as a grade-`I` hom `X → T(I, X)`.
    pub fn unit<M: GradedMonad<Elem = E>>(monad: &M, xs: &[String]) -> Self {
        KleisliHom {
            source: xs.to_vec(),
            target: xs.to_vec(),
            grade: monad.monoid().unit(),
            images: xs.iter().map(|x| monad.unit(x)).collect(),
        }
    }

    pub fn image(&self, x: &str) -> Result<E> {
        self.source
            .iter()
            .position(|s| s == x)
            .map(|i| self.images[i].clone())
            .ok_or_else(|| Error::UnboundVariable(x.to_string()))
    }
}

/// `f ⊙ g = μ ∘ (m_f ∗ g) ∘ f`: first `f : X → T(m_f, Y)`, then
/// `g : Y → T(m_g, Z)`; the result has grade `m_f ⊗ m_g`.
pub fn kleisli_compose<M: GradedMonad>(
    monad: &M,
    f: &KleisliHom<M::Elem>,
    g: &KleisliHom<M::Elem>,
) -> Result<KleisliHom<M::Elem>> {
    if f.target != g.source {
        return Err(Error::Structural(format!(
            "cannot compose: {:?} is not {:?}",
            f.target, g.source
        )));
    }
    let images = f
        .images
        .iter()
        .map(|e| monad.bind(&f.grade, &g.grade, e, &|y| g.image(y), &g.target))
        .collect::<Result<Vec<_>>>()?;
    Ok(KleisliHom {
        source: f.source.clone(),
        target: g.target.clone(),
        grade: monad.monoid().tensor(&f.grade, &g.grade)?,
        images,
    })
}

/// How thoroughly [`check_monad_laws`] quantifies.
#[derive(Clone, Debug)]
pub enum LawMode {
    Exhaustive,
    /// Uniformly drawn instances from a seeded generator.
    Random { trials: usize, seed: u64 },
}

const REPORT_CAP: usize = 100;

struct Report(Vec<String>);

impl Report {
    fn push(&mut self, line: String) {
        if self.0.len() < REPORT_CAP {
            self.0.push(line);
        }
    }

    fn same<E: PartialEq + fmt::Display>(&mut self, what: impl Fn() -> String, l: Result<E>, r: Result<E>) {
        match (l, r) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(a), Ok(b)) => self.push(format!("{}: {a} ≠ {b}", what())),
            (Err(e), _) | (_, Err(e)) => self.push(format!("{}: {e}", what())),
        }
    }
}

fn functions<E: Clone>(dom: usize, cod: &[E]) -> Vec<Vec<E>> {
    if dom == 0 {
        return vec![Vec::new()];
    }
    (0..dom).map(|_| cod.iter().cloned()).multi_cartesian_product().collect()
}

fn lookup<E: Clone>(names: &[String], values: &[E], y: &str) -> Result<E> {
    names
        .iter()
        .position(|n| n == y)
        .map(|i| values[i].clone())
        .ok_or_else(|| Error::UnboundVariable(y.to_string()))
}

/// Unit laws, associativity, naturality of `μ` in the grades and
/// naturality of `η`, `μ` in the sets, over `grades` and the sample sets.
/// Returns one line per failure (at most a hundred).
pub fn check_monad_laws<M: GradedMonad>(
    monad: &M,
    grades: &[Grade],
    sets: &[Vec<String>],
    mode: &LawMode,
) -> Result<Vec<String>> {
    let gm = monad.monoid();
    let unit = gm.unit();
    let mut report = Report(Vec::new());
    let ys = vec!["y".to_string()];

    for m in grades {
        for xs in sets {
            for e in monad.elements(m, xs)? {
                report.same(
                    || format!("left unit at {m}, X = {xs:?}, {e}"),
                    monad.bind(&unit, m, &monad.unit("y"), &|_| Ok(e.clone()), xs),
                    Ok(e.clone()),
                );
                report.same(
                    || format!("right unit at {m}, X = {xs:?}, {e}"),
                    monad.bind(m, &unit, &e, &|x| Ok(monad.unit(x)), xs),
                    Ok(e.clone()),
                );
                // naturality of η and μ along X → {y}
                let collapse = |_: &str| "y".to_string();
                report.same(
                    || format!("naturality of μ at {m}, X = {xs:?}, {e}"),
                    monad.map(m, &e, &collapse, &ys),
                    monad.bind(m, &unit, &e, &|x| Ok(monad.unit(&collapse(x))), &ys),
                );
            }
        }
    }

    let mut check_assoc = |m1: &Grade, m2: &Grade, m3: &Grade, ys: &[String], zs: &[String], xs: &[String], e: &M::Elem, k1: &[M::Elem], k2: &[M::Elem]| {
        let m12 = gm.tensor_unchecked(m1, m2);
        let m23 = gm.tensor_unchecked(m2, m3);
        let inner = |z: &str| lookup(zs, k2, z);
        let left = monad
            .bind(m1, m2, e, &|y| lookup(ys, k1, y), zs)
            .and_then(|f| monad.bind(&m12, m3, &f, &inner, xs));
        let right = monad.bind(
            m1,
            &m23,
            e,
            &|y| monad.bind(m2, m3, &lookup(ys, k1, y)?, &inner, xs),
            xs,
        );
        report.same(|| format!("associativity at ({m1}, {m2}, {m3}) on {e}"), left, right);
    };

    match mode {
        LawMode::Exhaustive => {
            for (m1, m2, m3) in grades.iter().cartesian_product(grades).cartesian_product(grades).map(|((a, b), c)| (a, b, c)) {
                for (ys, zs, xs) in sets.iter().cartesian_product(sets).cartesian_product(sets).map(|((a, b), c)| (a, b, c)) {
                    let t2 = monad.elements(m2, zs)?;
                    let t3 = monad.elements(m3, xs)?;
                    let k1s = functions(ys.len(), &t2);
                    let k2s = functions(zs.len(), &t3);
                    for e in monad.elements(m1, ys)? {
                        for k1 in &k1s {
                            for k2 in &k2s {
                                check_assoc(m1, m2, m3, ys, zs, xs, &e, k1, k2);
                            }
                        }
                    }
                }
            }
        }
        LawMode::Random { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut done = 0;
            let mut attempts = 0;
            while done < *trials && attempts < trials * 50 {
                attempts += 1;
                let pick = |rng: &mut ChaCha8Rng| grades.choose(rng).expect("grades").clone();
                let (m1, m2, m3) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                let set = |rng: &mut ChaCha8Rng| sets.choose(rng).expect("sets").clone();
                let (ys, zs, xs) = (set(&mut rng), set(&mut rng), set(&mut rng));
                let (t1, t2, t3) = (monad.elements(&m1, &ys)?, monad.elements(&m2, &zs)?, monad.elements(&m3, &xs)?);
                if t1.is_empty() || (t2.is_empty() && !ys.is_empty()) || (t3.is_empty() && !zs.is_empty()) {
                    continue;
                }
                let e = t1.choose(&mut rng).expect("nonempty").clone();
                let k1: Vec<M::Elem> = ys.iter().map(|_| t2.choose(&mut rng).expect("nonempty").clone()).collect();
                let k2: Vec<M::Elem> = zs.iter().map(|_| t3.choose(&mut rng).expect("nonempty").clone()).collect();
                check_assoc(&m1, &m2, &m3, &ys, &zs, &xs, &e, &k1, &k2);
                done += 1;
            }
            if done < *trials {
                report.push(format!("only {done} of {trials} random instances could be drawn"));
            }
        }
    }

    // μ is natural in both grades
    for (m1, n1) in grades.iter().cartesian_product(grades) {
        if m1 == n1 || !gm.leq_unchecked(m1, n1) {
            continue;
        }
        for m2 in grades {
            for (ys, xs) in sets.iter().cartesian_product(sets) {
                let t2 = monad.elements(m2, xs)?;
                for e in monad.elements(m1, ys)? {
                    for k in functions(ys.len(), &t2).into_iter().take(16) {
                        let k = |y: &str| lookup(ys, &k, y);
                        let left = monad
                            .coerce(m1, n1, &e)
                            .and_then(|c| monad.bind(n1, m2, &c, &k, xs));
                        let right = monad.bind(m1, m2, &e, &k, xs).and_then(|r| {
                            monad.coerce(&gm.tensor_unchecked(m1, m2), &gm.tensor_unchecked(n1, m2), &r)
                        });
                        report.same(|| format!("grade naturality of μ on {m1} ≤ {n1}, {m2}"), left, right);
                    }
                }
            }
        }
    }
    Ok(report.0)
}

/// Theory-level convenience: coercion-normal form of a raw term.
pub fn coercion_normal(theory: &Theory, t: &Term) -> Result<Term> {
    normalize_coercions(&theory.signature, t)
}
