//! Grading structures.
//!
//! A grade monoid is a preordered monoid `(M, ≤, ⊗, I)`, i.e. a thin strict
//! monoidal category. Coercions between grades exist exactly when `leq`
//! holds, so no witnesses are stored anywhere in the crate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Reserved atom of the exception monoid marking normal termination.
pub const OK: &str = "Ok";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GradeMonoid {
    /// The one-element monoid `1`.
    Trivial,
    /// `(ℕ, +, 0)` with the discrete order.
    DiscreteNat,
    /// `(2^L, ⊆, ∪, ∅)` over a finite location set.
    PowersetJoin(BTreeSet<String>),
    /// Nonempty subsets of `Ex ∪ {Ok}` under inclusion, unit `{Ok}`,
    /// with the non-commutative sequencing product.
    Exception(BTreeSet<String>),
    Product(Box<GradeMonoid>, Box<GradeMonoid>),
}

/// Canonical element of a [`GradeMonoid`]. Sets are kept sorted and
/// deduplicated, so grade equality is structural equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Unit,
    Nat(u64),
    Set(BTreeSet<String>),
    Pair(Box<Grade>, Box<Grade>),
}

impl Grade {
    pub fn set<I, S>(atoms: I) -> Grade
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Grade::Set(atoms.into_iter().map(Into::into).collect())
    }

    pub fn pair(a: Grade, b: Grade) -> Grade {
        Grade::Pair(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Unit => write!(f, "I"),
            Grade::Nat(k) => write!(f, "nat:{k}"),
            Grade::Set(s) => write!(f, "{{{}}}", s.iter().join(", ")),
            Grade::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl fmt::Display for GradeMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradeMonoid::Trivial => write!(f, "trivial"),
            GradeMonoid::DiscreteNat => write!(f, "nat"),
            GradeMonoid::PowersetJoin(l) => write!(f, "powerset {{{}}}", l.iter().join(", ")),
            GradeMonoid::Exception(e) => write!(f, "exception {{{}}}", e.iter().join(", ")),
            GradeMonoid::Product(a, b) => write!(f, "product({a}, {b})"),
        }
    }
}

impl GradeMonoid {
    pub fn powerset<I, S>(locations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GradeMonoid::PowersetJoin(locations.into_iter().map(Into::into).collect())
    }

    pub fn exception<I, S>(exceptions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GradeMonoid::Exception(exceptions.into_iter().map(Into::into).collect())
    }

    pub fn product(a: GradeMonoid, b: GradeMonoid) -> Self {
        GradeMonoid::Product(Box::new(a), Box::new(b))
    }

    /// The two-element chain `⊥ ≤ ⊤`, realised as the powerset of `{*}`.
    pub fn two() -> Self {
        GradeMonoid::powerset(["*"])
    }

    pub fn unit(&self) -> Grade {
        match self {
            GradeMonoid::Trivial => Grade::Unit,
            GradeMonoid::DiscreteNat => Grade::Nat(0),
            GradeMonoid::PowersetJoin(_) => Grade::Set(BTreeSet::new()),
            GradeMonoid::Exception(_) => Grade::set([OK]),
            GradeMonoid::Product(a, b) => Grade::pair(a.unit(), b.unit()),
        }
    }

    /// Largest element, when the monoid has one.
    pub fn top(&self) -> Option<Grade> {
        match self {
            GradeMonoid::Trivial => Some(Grade::Unit),
            GradeMonoid::DiscreteNat => None,
            GradeMonoid::PowersetJoin(l) => Some(Grade::Set(l.clone())),
            GradeMonoid::Exception(e) => {
                let mut s = e.clone();
                s.insert(OK.to_string());
                Some(Grade::Set(s))
            }
            GradeMonoid::Product(a, b) => Some(Grade::pair(a.top()?, b.top()?)),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            GradeMonoid::DiscreteNat => false,
            GradeMonoid::Product(a, b) => a.is_finite() && b.is_finite(),
            _ => true,
        }
    }

    pub fn contains(&self, g: &Grade) -> bool {
        match (self, g) {
            (GradeMonoid::Trivial, Grade::Unit) => true,
            (GradeMonoid::DiscreteNat, Grade::Nat(_)) => true,
            (GradeMonoid::PowersetJoin(l), Grade::Set(s)) => s.is_subset(l),
            (GradeMonoid::Exception(e), Grade::Set(s)) => {
                !s.is_empty() && s.iter().all(|a| a == OK || e.contains(a))
            }
            (GradeMonoid::Product(a, b), Grade::Pair(x, y)) => a.contains(x) && b.contains(y),
            _ => false,
        }
    }

    pub fn check(&self, g: &Grade) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::ForeignGrade {
                grade: g.to_string(),
                monoid: self.to_string(),
            })
        }
    }

    pub fn tensor(&self, a: &Grade, b: &Grade) -> Result<Grade> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.tensor_unchecked(a, b))
    }

    /// Tensor without membership checks; callers guarantee both arguments
    /// belong to `self`.
    pub(crate) fn tensor_unchecked(&self, a: &Grade, b: &Grade) -> Grade {
        match (self, a, b) {
            (GradeMonoid::Trivial, _, _) => Grade::Unit,
            (GradeMonoid::DiscreteNat, Grade::Nat(x), Grade::Nat(y)) => Grade::Nat(x + y),
            (GradeMonoid::PowersetJoin(_), Grade::Set(x), Grade::Set(y)) => {
                Grade::Set(x.union(y).cloned().collect())
            }
            (GradeMonoid::Exception(_), Grade::Set(x), Grade::Set(y)) => {
                if x.contains(OK) {
                    let mut s: BTreeSet<String> = x.iter().filter(|a| *a != OK).cloned().collect();
                    s.extend(y.iter().cloned());
                    Grade::Set(s)
                } else {
                    a.clone()
                }
            }
            (GradeMonoid::Product(ma, mb), Grade::Pair(x1, y1), Grade::Pair(x2, y2)) => {
                Grade::pair(ma.tensor_unchecked(x1, x2), mb.tensor_unchecked(y1, y2))
            }
            _ => unreachable!("tensor_unchecked on foreign grades"),
        }
    }

    /// `a ≤ b`, i.e. a (necessarily unique) morphism `a → b` exists.
    pub fn leq(&self, a: &Grade, b: &Grade) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.leq_unchecked(a, b))
    }

    pub(crate) fn leq_unchecked(&self, a: &Grade, b: &Grade) -> bool {
        match (self, a, b) {
            (GradeMonoid::Product(ma, mb), Grade::Pair(x1, y1), Grade::Pair(x2, y2)) => {
                ma.leq_unchecked(x1, x2) && mb.leq_unchecked(y1, y2)
            }
            (GradeMonoid::PowersetJoin(_) | GradeMonoid::Exception(_), Grade::Set(x), Grade::Set(y)) => {
                x.is_subset(y)
            }
            _ => a == b,
        }
    }

    /// Every grade above or below `g`, including `g`. Finite because the
    /// naturals are ordered discretely.
    pub(crate) fn comparable(&self, g: &Grade) -> Vec<Grade> {
        let related = |h: &Grade| self.leq_unchecked(g, h) || self.leq_unchecked(h, g);
        match (self, g) {
            (GradeMonoid::Product(a, b), Grade::Pair(x, y)) => a
                .comparable(x)
                .into_iter()
                .cartesian_product(b.comparable(y))
                .map(|(x, y)| Grade::pair(x, y))
                .filter(related)
                .collect(),
            (GradeMonoid::PowersetJoin(_) | GradeMonoid::Exception(_), _) => {
                self.enumerate(0).into_iter().filter(related).collect()
            }
            _ => vec![g.clone()],
        }
    }

    /// All elements for finite monoids; `0..=bound` for the naturals.
    pub fn enumerate(&self, bound: u64) -> Vec<Grade> {
        match self {
            GradeMonoid::Trivial => vec![Grade::Unit],
            GradeMonoid::DiscreteNat => (0..=bound).map(Grade::Nat).collect(),
            GradeMonoid::PowersetJoin(l) => subsets(l).map(Grade::Set).collect(),
            GradeMonoid::Exception(e) => {
                let mut atoms = e.clone();
                atoms.insert(OK.to_string());
                subsets(&atoms)
                    .filter(|s| !s.is_empty())
                    .map(Grade::Set)
                    .collect()
            }
            GradeMonoid::Product(a, b) => a
                .enumerate(bound)
                .into_iter()
                .cartesian_product(b.enumerate(bound))
                .map(|(x, y)| Grade::pair(x, y))
                .collect(),
        }
    }
}

fn subsets(atoms: &BTreeSet<String>) -> impl Iterator<Item = BTreeSet<String>> + '_ {
    let items: Vec<&String> = atoms.iter().collect();
    let n = items.len();
    assert!(n < 32, "location set too large to enumerate");
    let mut all: Vec<BTreeSet<String>> = (0u32..(1 << n))
        .map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| items[i].clone())
                .collect()
        })
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all.into_iter()
}

type GradeFn = dyn Fn(&Grade) -> Grade + Send + Sync;

/// A lax monoidal map `G : M → M'` between thin monoidal categories. The
/// structure maps `η^G : I' → G(I)` and `μ^G : G(m) ⊗ G(m') → G(m ⊗ m')`
/// reduce to the inequalities checked by [`LaxMonoidalMap::validate`].
#[derive(Clone)]
pub struct LaxMonoidalMap {
    name: String,
    source: GradeMonoid,
    target: GradeMonoid,
    map: Arc<GradeFn>,
}

impl fmt::Debug for LaxMonoidalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaxMonoidalMap")
            .field("name", &self.name)
            .field("source", &self.source)
            .field("target", &self.target)
            .finish()
    }
}

impl LaxMonoidalMap {
    pub fn new<F>(name: impl Into<String>, source: GradeMonoid, target: GradeMonoid, map: F) -> Self
    where
        F: Fn(&Grade) -> Grade + Send + Sync + 'static,
    {
        LaxMonoidalMap {
            name: name.into(),
            source,
            target,
            map: Arc::new(map),
        }
    }

    pub fn identity(m: GradeMonoid) -> Self {
        LaxMonoidalMap::new("id", m.clone(), m, Grade::clone)
    }

    /// The strict monoidal map `1 → M` picking out the unit.
    pub fn unit_into(target: GradeMonoid) -> Self {
        let unit = target.unit();
        LaxMonoidalMap::new("lift", GradeMonoid::Trivial, target, move |_| unit.clone())
    }

    /// `K m = (m, I₂)`.
    pub fn embed_left(left: GradeMonoid, right: GradeMonoid) -> Self {
        let unit = right.unit();
        let target = GradeMonoid::product(left.clone(), right);
        LaxMonoidalMap::new("left", left, target, move |g| Grade::pair(g.clone(), unit.clone()))
    }

    /// `K' m = (I₁, m)`.
    pub fn embed_right(left: GradeMonoid, right: GradeMonoid) -> Self {
        let unit = left.unit();
        let target = GradeMonoid::product(left, right.clone());
        LaxMonoidalMap::new("right", right, target, move |g| Grade::pair(unit.clone(), g.clone()))
    }

    /// Reads a product of two powerset monoids as one powerset monoid,
    /// relabelling each side's locations through the given maps.
    pub fn powerset_union(
        left: &GradeMonoid,
        right: &GradeMonoid,
        left_names: BTreeMap<String, String>,
        right_names: BTreeMap<String, String>,
    ) -> Result<Self> {
        let (GradeMonoid::PowersetJoin(l), GradeMonoid::PowersetJoin(r)) = (left, right) else {
            return Err(Error::Structural(
                "powerset_union needs two powerset monoids".into(),
            ));
        };
        for (dom, names) in [(l, &left_names), (r, &right_names)] {
            if let Some(missing) = dom.iter().find(|a| !names.contains_key(*a)) {
                return Err(Error::Structural(format!("no new name for location `{missing}`")));
            }
        }
        let target = GradeMonoid::powerset(left_names.values().chain(right_names.values()).cloned());
        let source = GradeMonoid::product(left.clone(), right.clone());
        Ok(LaxMonoidalMap::new("union", source, target, move |g| match g {
            Grade::Pair(a, b) => {
                let mut out = BTreeSet::new();
                if let Grade::Set(s) = &**a {
                    out.extend(s.iter().map(|x| left_names[x].clone()));
                }
                if let Grade::Set(s) = &**b {
                    out.extend(s.iter().map(|x| right_names[x].clone()));
                }
                Grade::Set(out)
            }
            other => other.clone(),
        }))
    }

    /// A map given by an explicit table on a finite source monoid.
    pub fn from_table(
        name: impl Into<String>,
        source: GradeMonoid,
        target: GradeMonoid,
        table: BTreeMap<Grade, Grade>,
    ) -> Result<Self> {
        for g in source.enumerate(0) {
            let image = table
                .get(&g)
                .ok_or_else(|| Error::Structural(format!("table has no image for {g}")))?;
            target.check(image)?;
        }
        Ok(LaxMonoidalMap::new(name, source, target, move |g| table[g].clone()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &GradeMonoid {
        &self.source
    }

    pub fn target(&self) -> &GradeMonoid {
        &self.target
    }

    pub fn apply(&self, g: &Grade) -> Result<Grade> {
        self.source.check(g)?;
        let image = (self.map)(g);
        self.target.check(&image)?;
        Ok(image)
    }

    /// Checks monotonicity, `I' ≤ G(I)` and `G(a) ⊗ G(b) ≤ G(a ⊗ b)` on
    /// the source elements enumerated with `bound`.
    pub fn validate(&self, bound: u64) -> Result<()> {
        let src = &self.source;
        let tgt = &self.target;
        let g_unit = self.apply(&src.unit())?;
        if !tgt.leq(&tgt.unit(), &g_unit)? {
            return Err(Error::Structural(format!(
                "{}: lax unit fails, {} is not below {}",
                self.name,
                tgt.unit(),
                g_unit
            )));
        }
        let elems = src.enumerate(bound);
        for a in &elems {
            for b in &elems {
                let (ga, gb) = (self.apply(a)?, self.apply(b)?);
                if src.leq(a, b)? && !tgt.leq(&ga, &gb)? {
                    return Err(Error::Structural(format!(
                        "{}: not monotone on {a} ≤ {b}",
                        self.name
                    )));
                }
                let gab = self.apply(&src.tensor(a, b)?)?;
                if !tgt.leq(&tgt.tensor(&ga, &gb)?, &gab)? {
                    return Err(Error::Structural(format!(
                        "{}: lax tensor fails on ({a}, {b})",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex2() -> GradeMonoid {
        GradeMonoid::exception(["e1", "e2"])
    }

    #[test]
    fn exception_tensor_cases() {
        let m = ex2();
        let ok = Grade::set([OK]);
        let e1 = Grade::set(["e1"]);
        assert_eq!(m.tensor(&ok, &e1).unwrap(), e1);
        assert_eq!(m.tensor(&e1, &Grade::set(["e2", OK])).unwrap(), e1);
        // not commutative
        let a = Grade::set(["e1", OK]);
        let b = Grade::set(["e2"]);
        assert_eq!(m.tensor(&a, &b).unwrap(), Grade::set(["e1", "e2"]));
        assert_eq!(m.tensor(&b, &a).unwrap(), b);
    }

    #[test]
    fn powerset_tensor_is_union() {
        let m = GradeMonoid::powerset(["1", "2"]);
        let g = m.tensor(&Grade::set(["1"]), &Grade::set(["2"])).unwrap();
        assert_eq!(g, Grade::set(["1", "2"]));
    }

    #[test]
    fn order_examples() {
        let p = GradeMonoid::powerset(["1", "2"]);
        assert!(p.leq(&Grade::set(["1"]), &Grade::set(["1", "2"])).unwrap());
        assert!(!GradeMonoid::DiscreteNat.leq(&Grade::Nat(2), &Grade::Nat(3)).unwrap());
        assert!(ex2().leq(&Grade::set([OK]), &Grade::set([OK, "e1"])).unwrap());
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(ex2().enumerate(0).len(), 7);
        assert_eq!(GradeMonoid::Trivial.enumerate(9), vec![Grade::Unit]);
        let p = GradeMonoid::powerset(["1", "2"]).enumerate(0);
        assert_eq!(
            p,
            vec![
                Grade::set(Vec::<String>::new()),
                Grade::set(["1"]),
                Grade::set(["2"]),
                Grade::set(["1", "2"])
            ]
        );
        assert_eq!(GradeMonoid::DiscreteNat.enumerate(3).len(), 4);
        let prod = GradeMonoid::product(ex2(), GradeMonoid::two());
        assert_eq!(prod.enumerate(0).len(), 14);
    }

    #[test]
    fn mismatched_monoid_is_an_error() {
        let err = ex2().tensor(&Grade::Nat(1), &Grade::set([OK])).unwrap_err();
        assert!(matches!(err, Error::ForeignGrade { .. }));
        assert!(ex2().leq(&Grade::set(Vec::<String>::new()), &Grade::set([OK])).is_err());
    }

    fn finite_kinds() -> Vec<GradeMonoid> {
        vec![
            GradeMonoid::Trivial,
            GradeMonoid::powerset(["1", "2"]),
            ex2(),
            GradeMonoid::product(ex2(), GradeMonoid::two()),
        ]
    }

    #[test]
    fn monoid_laws_exhaustive() {
        for m in finite_kinds() {
            let els = m.enumerate(0);
            let i = m.unit();
            for a in &els {
                assert_eq!(&m.tensor(&i, a).unwrap(), a);
                assert_eq!(&m.tensor(a, &i).unwrap(), a);
                for b in &els {
                    for c in &els {
                        let l = m.tensor(&m.tensor(a, b).unwrap(), c).unwrap();
                        let r = m.tensor(a, &m.tensor(b, c).unwrap()).unwrap();
                        assert_eq!(l, r, "{m}: associativity on {a} {b} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn order_is_preorder_and_tensor_monotone() {
        for m in finite_kinds() {
            let els = m.enumerate(0);
            for a in &els {
                assert!(m.leq(a, a).unwrap());
                for b in &els {
                    for c in &els {
                        if m.leq(a, b).unwrap() && m.leq(b, c).unwrap() {
                            assert!(m.leq(a, c).unwrap());
                        }
                    }
                }
            }
            for (a, a2) in els.iter().cartesian_product(&els) {
                if !m.leq(a, a2).unwrap() {
                    continue;
                }
                for (b, b2) in els.iter().cartesian_product(&els) {
                    if m.leq(b, b2).unwrap() {
                        let lo = m.tensor(a, b).unwrap();
                        let hi = m.tensor(a2, b2).unwrap();
                        assert!(m.leq(&lo, &hi).unwrap(), "{m}: monotonicity");
                    }
                }
            }
        }
    }

    #[test]
    fn product_order_and_unit() {
        let m = GradeMonoid::product(GradeMonoid::two(), GradeMonoid::two());
        let bot = Grade::set(Vec::<String>::new());
        let top = Grade::set(["*"]);
        assert_eq!(m.unit(), Grade::pair(bot.clone(), bot.clone()));
        assert!(m
            .leq(&Grade::pair(bot.clone(), top.clone()), &Grade::pair(top.clone(), top.clone()))
            .unwrap());
        assert!(!m
            .leq(&Grade::pair(bot.clone(), top.clone()), &Grade::pair(top, bot))
            .unwrap());
    }

    #[test]
    fn lax_maps_validate() {
        let two = GradeMonoid::two();
        LaxMonoidalMap::identity(ex2()).validate(0).unwrap();
        LaxMonoidalMap::unit_into(two.clone()).validate(0).unwrap();
        LaxMonoidalMap::embed_left(two.clone(), ex2()).validate(0).unwrap();
        LaxMonoidalMap::embed_right(ex2(), two.clone()).validate(0).unwrap();
        let names = |n: &str| BTreeMap::from([("*".to_string(), n.to_string())]);
        let u = LaxMonoidalMap::powerset_union(&two, &two, names("1"), names("2")).unwrap();
        u.validate(0).unwrap();
        let img = u
            .apply(&Grade::pair(Grade::set(["*"]), Grade::set(Vec::<String>::new())))
            .unwrap();
        assert_eq!(img, Grade::set(["1"]));
    }

    #[test]
    fn non_monotone_map_is_rejected() {
        let two = GradeMonoid::two();
        let bot = Grade::set(Vec::<String>::new());
        let top = Grade::set(["*"]);
        let table = BTreeMap::from([(bot.clone(), top.clone()), (top, bot)]);
        let g = LaxMonoidalMap::from_table("flip", two.clone(), two, table).unwrap();
        assert!(g.validate(0).is_err());
    }
}
