//! Grade-indexed hom-sets on the objects `0..=bound`.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::freemonad::{kleisli_compose, GradedMonad, KleisliHom};
use crate::grade::{Grade, GradeMonoid};
use crate::logic::Normalizer;
use crate::syntax::{standard_vars, substitute_at, Term};

/// An element of `L(source, components.len())grade`, stored as its
/// tuple of components in `L(source, 1)grade`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arrow<E> {
    pub source: usize,
    pub grade: Grade,
    pub components: Vec<E>,
}

impl<E> Arrow<E> {
    pub fn target(&self) -> usize {
        self.components.len()
    }
}

impl<E: fmt::Display> fmt::Display for Arrow<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}> : {} -> {} @ {}",
            self.components.iter().join(", "),
            self.source,
            self.target(),
            self.grade
        )
    }
}

/// A graded Lawvere theory materialised up to an arity bound on a finite
/// set of grades. Hom-sets are tuples of basic arrows; composition,
/// projections and coercions are supplied by the instance.
pub trait GradedLawvere {
    type Elem: Clone + Ord + fmt::Debug + fmt::Display;

    fn monoid(&self) -> &GradeMonoid;

    fn bound(&self) -> usize;

    fn grades(&self) -> &[Grade];

    /// `L(n, 1)m`.
    fn basic(&self, n: usize, m: &Grade) -> Result<Vec<Self::Elem>>;

    /// `π_i ∈ L(n, 1)I`, zero-based.
    fn projection(&self, n: usize, i: usize) -> Result<Arrow<Self::Elem>>;

    /// `f ∘ g` for `f ∈ L(n', n'')m1` and `g ∈ L(n, n')m2`, in
    /// `L(n, n'')(m1 ⊗ m2)`.
    fn compose(&self, f: &Arrow<Self::Elem>, g: &Arrow<Self::Elem>) -> Result<Arrow<Self::Elem>>;

    /// `L(n, n')w` for `w : f.grade ≤ to`.
    fn coerce(&self, to: &Grade, f: &Arrow<Self::Elem>) -> Result<Arrow<Self::Elem>>;

    fn hom(&self, n: usize, n2: usize, m: &Grade) -> Result<Vec<Arrow<Self::Elem>>> {
        let basic = self.basic(n, m)?;
        let tuples: Vec<Vec<Self::Elem>> = if n2 == 0 {
            vec![Vec::new()]
        } else {
            (0..n2).map(|_| basic.iter().cloned()).multi_cartesian_product().collect()
        };
        Ok(tuples
            .into_iter()
            .map(|components| Arrow {
                source: n,
                grade: m.clone(),
                components,
            })
            .collect())
    }

    /// `1_n = ⟨π_1, ..., π_n⟩`.
    fn identity(&self, n: usize) -> Result<Arrow<Self::Elem>> {
        let components = (0..n)
            .map(|i| Ok(self.projection(n, i)?.components.remove(0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arrow {
            source: n,
            grade: self.monoid().unit(),
            components,
        })
    }
}

fn check_composable<E>(f: &Arrow<E>, g: &Arrow<E>) -> Result<()> {
    if f.source != g.target() {
        return Err(Error::Structural(format!(
            "cannot compose an arrow from {} after an arrow into {}",
            f.source,
            g.target()
        )));
    }
    Ok(())
}

/// `Th T`: `(Th T)(n, n')m = (F_T n m)^{n'}` with composition by
/// substitution. Variables of object `n` are `x1..xn`.
#[derive(Clone)]
pub struct TheoryLawvere {
    nz: Arc<dyn Normalizer>,
    bound: usize,
    grades: Vec<Grade>,
}

impl fmt::Debug for TheoryLawvere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TheoryLawvere")
            .field("bound", &self.bound)
            .field("grades", &self.grades)
            .finish_non_exhaustive()
    }
}

/// The Lawvere theory of the theory decided by `nz`, up to arity `bound`
/// over the given grades.
pub fn th_of(nz: Arc<dyn Normalizer>, bound: usize, grades: Vec<Grade>) -> Result<TheoryLawvere> {
    for g in &grades {
        nz.theory().monoid().check(g)?;
    }
    Ok(TheoryLawvere { nz, bound, grades })
}

impl TheoryLawvere {
    pub fn normalizer(&self) -> &dyn Normalizer {
        self.nz.as_ref()
    }
}

impl GradedLawvere for TheoryLawvere {
    type Elem = Term;

    fn monoid(&self) -> &GradeMonoid {
        self.nz.theory().monoid()
    }

    fn bound(&self) -> usize {
        self.bound
    }

    fn grades(&self) -> &[Grade] {
        &self.grades
    }

    fn basic(&self, n: usize, m: &Grade) -> Result<Vec<Term>> {
        self.nz.elements(m, &standard_vars(n))
    }

    fn projection(&self, n: usize, i: usize) -> Result<Arrow<Term>> {
        let vars = standard_vars(n);
        let x = vars.get(i).ok_or_else(|| Error::UnboundVariable(format!("x{}", i + 1)))?;
        Ok(Arrow {
            source: n,
            grade: self.monoid().unit(),
            components: vec![Term::var(x.clone())],
        })
    }

    fn compose(&self, f: &Arrow<Term>, g: &Arrow<Term>) -> Result<Arrow<Term>> {
        check_composable(f, g)?;
        let binding = standard_vars(g.target()).into_iter().zip(g.components.iter().cloned()).collect();
        let vars = standard_vars(g.source);
        let sig = &self.nz.theory().signature;
        let components = f
            .components
            .iter()
            .map(|t| self.nz.normalize_in(&substitute_at(sig, t, &binding, &g.grade)?, &vars))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arrow {
            source: g.source,
            grade: self.monoid().tensor(&f.grade, &g.grade)?,
            components,
        })
    }

    fn coerce(&self, to: &Grade, f: &Arrow<Term>) -> Result<Arrow<Term>> {
        if !self.monoid().leq(&f.grade, to)? {
            return Err(Error::BadCoercion {
                from: f.grade.clone(),
                to: to.clone(),
            });
        }
        let vars = standard_vars(f.source);
        let components = f
            .components
            .iter()
            .map(|t| self.nz.normalize_in(&Term::coerce(to.clone(), t.clone()), &vars))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arrow {
            source: f.source,
            grade: to.clone(),
            components,
        })
    }
}

/// `L_T`: `L_T(n, n')m = Set(n', m ∗ n)`, composed in the Kleisli-like
/// category. The generators of object `n` are `x1..xn`.
#[derive(Clone, Debug)]
pub struct MonadLawvere<M> {
    monad: M,
    bound: usize,
    grades: Vec<Grade>,
}

/// The Lawvere theory of `monad`, with `L(n, 1)m = m ∗ n`.
pub fn l_of<M: GradedMonad>(monad: M, bound: usize, grades: Vec<Grade>) -> Result<MonadLawvere<M>> {
    for g in &grades {
        monad.monoid().check(g)?;
    }
    Ok(MonadLawvere { monad, bound, grades })
}

impl<M: GradedMonad> MonadLawvere<M> {
    pub fn monad(&self) -> &M {
        &self.monad
    }

    fn kleisli(&self, f: &Arrow<M::Elem>) -> KleisliHom<M::Elem> {
        KleisliHom {
            source: standard_vars(f.target()),
            target: standard_vars(f.source),
            grade: f.grade.clone(),
            images: f.components.clone(),
        }
    }
}

impl<M: GradedMonad> GradedLawvere for MonadLawvere<M> {
    type Elem = M::Elem;

    fn monoid(&self) -> &GradeMonoid {
        self.monad.monoid()
    }

    fn bound(&self) -> usize {
        self.bound
    }

    fn grades(&self) -> &[Grade] {
        &self.grades
    }

    fn basic(&self, n: usize, m: &Grade) -> Result<Vec<M::Elem>> {
        self.monad.elements(m, &standard_vars(n))
    }

    /// `π_i = (∗ ↦ η(i))`.
    fn projection(&self, n: usize, i: usize) -> Result<Arrow<M::Elem>> {
        let vars = standard_vars(n);
        let x = vars.get(i).ok_or_else(|| Error::UnboundVariable(format!("x{}", i + 1)))?;
        Ok(Arrow {
            source: n,
            grade: self.monoid().unit(),
            components: vec![self.monad.unit(x)],
        })
    }

    fn compose(&self, f: &Arrow<M::Elem>, g: &Arrow<M::Elem>) -> Result<Arrow<M::Elem>> {
        check_composable(f, g)?;
        let h = kleisli_compose(&self.monad, &self.kleisli(f), &self.kleisli(g))?;
        Ok(Arrow {
            source: g.source,
            grade: h.grade,
            components: h.images,
        })
    }

    fn coerce(&self, to: &Grade, f: &Arrow<M::Elem>) -> Result<Arrow<M::Elem>> {
        let components = f
            .components
            .iter()
            .map(|e| self.monad.coerce(&f.grade, to, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arrow {
            source: f.source,
            grade: to.clone(),
            components,
        })
    }
}
