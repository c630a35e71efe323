//! Executable checks of the enriched-category laws, tupling bijections and
//! roundtrips. Every failure becomes one report line naming its cell.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::hom::{Arrow, GradedLawvere};
use crate::error::Result;
use crate::grade::Grade;

const SEED: u64 = 0x1a3e;
/// Random associativity triples per tuple of objects once one exceeds 1.
const ASSOC_SAMPLES: usize = 64;
/// Random arrows per cell for naturality and roundtrip composition.
const SAMPLES: usize = 8;

#[derive(PartialEq)]
struct Tuple<E>(Vec<E>);

impl<E: fmt::Display> fmt::Display for Tuple<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(", "))
    }
}

fn cell(n: usize, n2: usize, m: &Grade) -> String {
    format!("(n, n', m) = ({n}, {n2}, {m})")
}

struct Ctx<'l, L: GradedLawvere> {
    l: &'l L,
    basic: BTreeMap<(usize, Grade), Vec<L::Elem>>,
    rng: ChaCha8Rng,
    report: Vec<String>,
}

impl<'l, L: GradedLawvere> Ctx<'l, L> {
    fn new(l: &'l L) -> Self {
        Ctx {
            l,
            basic: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(SEED),
            report: Vec::new(),
        }
    }

    fn basic(&mut self, n: usize, m: &Grade) -> Result<&[L::Elem]> {
        if !self.basic.contains_key(&(n, m.clone())) {
            let b = self.l.basic(n, m)?;
            self.basic.insert((n, m.clone()), b);
        }
        Ok(&self.basic[&(n, m.clone())])
    }

    /// A uniformly drawn element of `L(n, n2)m`, or `None` if it is empty.
    fn sample(&mut self, n: usize, n2: usize, m: &Grade) -> Result<Option<Arrow<L::Elem>>> {
        let basic = self.basic(n, m)?.to_vec();
        if basic.is_empty() && n2 > 0 {
            return Ok(None);
        }
        let components = (0..n2)
            .map(|_| basic.choose(&mut self.rng).expect("nonempty").clone())
            .collect();
        Ok(Some(Arrow {
            source: n,
            grade: m.clone(),
            components,
        }))
    }

    fn expect_eq<E: PartialEq + fmt::Display>(&mut self, what: &str, at: String, l: Result<E>, r: Result<E>) -> bool {
        let line = match (l, r) {
            (Ok(a), Ok(b)) if a == b => return true,
            (Ok(a), Ok(b)) => format!("{what} fails at {at}: {a} vs {b}"),
            (Err(e), _) | (_, Err(e)) => format!("{what} fails at {at}: {e}"),
        };
        self.report.push(line);
        false
    }

    fn objects(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.l.bound()
    }

    fn components(&self, f: &Arrow<L::Elem>) -> Result<Vec<L::Elem>> {
        (0..f.target())
            .map(|i| {
                let p = self.l.projection(f.target(), i)?;
                let c = self.l.compose(&p, f)?;
                if c.grade != f.grade || c.target() != 1 {
                    return Err(crate::error::Error::GradeMismatch {
                        expected: f.grade.clone(),
                        found: c.grade,
                    });
                }
                Ok(c.components.into_iter().next().expect("one component"))
            })
            .collect()
    }

    fn identity(&mut self) -> Result<()> {
        let grades = self.l.grades().to_vec();
        for (n, n2) in self.objects().cartesian_product(self.objects()) {
            let (id_n, id_n2) = (self.l.identity(n)?, self.l.identity(n2)?);
            for m in &grades {
                for f in self.l.hom(n, n2, m)? {
                    let at = cell(n, n2, m);
                    if !self.expect_eq("right identity", at.clone(), self.l.compose(&f, &id_n), Ok(f.clone()))
                        || !self.expect_eq("left identity", at, self.l.compose(&id_n2, &f), Ok(f.clone()))
                    {
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    fn tupling(&mut self) -> Result<()> {
        let grades = self.l.grades().to_vec();
        for (n, n2) in self.objects().cartesian_product(self.objects()) {
            for m in &grades {
                let at = cell(n, n2, m);
                let hom = self.l.hom(n, n2, m)?;
                let basic: BTreeSet<L::Elem> = self.basic(n, m)?.iter().cloned().collect();
                let mut images = BTreeSet::new();
                let mut ok = true;
                for f in &hom {
                    match self.components(f) {
                        Ok(c) if c.iter().all(|e| basic.contains(e)) => {
                            images.insert(c);
                        }
                        Ok(c) => {
                            self.report.push(format!(
                                "tupling leaves L(n, 1)m at {at}: {}",
                                c.iter().join(", ")
                            ));
                            ok = false;
                            break;
                        }
                        Err(e) => {
                            self.report.push(format!("tupling fails at {at}: {e}"));
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let expected = (basic.len() as u128).pow(n2 as u32);
                if images.len() != hom.len() {
                    self.report.push(format!(
                        "tupling is not injective at {at}: {} arrows, {} tuples",
                        hom.len(),
                        images.len()
                    ));
                } else if images.len() as u128 != expected {
                    self.report.push(format!(
                        "tupling is not surjective at {at}: {} of {expected} tuples",
                        images.len()
                    ));
                }
            }
        }
        Ok(())
    }

    fn grading(&mut self) -> Result<()> {
        let gm = self.l.monoid().clone();
        let grades = self.l.grades().to_vec();
        let leq: Vec<(Grade, Grade)> = grades
            .iter()
            .cartesian_product(&grades)
            .filter(|(a, b)| gm.leq_unchecked(a, b))
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        for n in self.objects() {
            for m in &grades {
                for f in self.l.hom(n, 1, m)? {
                    self.expect_eq("reflexive coercion", cell(n, 1, m), self.l.coerce(m, &f), Ok(f.clone()));
                }
            }
            for (a, b) in &leq {
                for c in grades.iter().filter(|c| gm.leq_unchecked(b, c)) {
                    for f in self.l.hom(n, 1, a)? {
                        let two = self.l.coerce(b, &f).and_then(|g| self.l.coerce(c, &g));
                        self.expect_eq("functoriality of coercion", cell(n, 1, a), two, self.l.coerce(c, &f));
                    }
                }
            }
        }
        for (k, n) in self.objects().cartesian_product(self.objects()) {
            for ((a, b), c) in leq.iter().cartesian_product(&grades) {
                for _ in 0..SAMPLES {
                    let (Some(f), Some(g)) = (self.sample(n, 1, a)?, self.sample(k, n, c)?) else {
                        break;
                    };
                    let at = cell(k, 1, &gm.tensor_unchecked(a, c));
                    let left = self.l.coerce(b, &f).and_then(|f1| self.l.compose(&f1, &g));
                    let right = self
                        .l
                        .compose(&f, &g)
                        .and_then(|h| self.l.coerce(&gm.tensor_unchecked(b, c), &h));
                    self.expect_eq("naturality of composition in the first grade", at, left, right);
                }
                for _ in 0..SAMPLES {
                    let (Some(f), Some(g)) = (self.sample(n, 1, c)?, self.sample(k, n, a)?) else {
                        break;
                    };
                    let at = cell(k, 1, &gm.tensor_unchecked(c, a));
                    let left = self.l.coerce(b, &g).and_then(|g1| self.l.compose(&f, &g1));
                    let right = self
                        .l
                        .compose(&f, &g)
                        .and_then(|h| self.l.coerce(&gm.tensor_unchecked(c, b), &h));
                    self.expect_eq("naturality of composition in the second grade", at, left, right);
                }
            }
        }
        Ok(())
    }

    fn associativity(&mut self) -> Result<()> {
        let grades = self.l.grades().to_vec();
        let objects: Vec<usize> = self.objects().collect();
        for (((k, n), n1), n2) in objects
            .iter()
            .cartesian_product(&objects)
            .cartesian_product(&objects)
            .cartesian_product(&objects)
        {
            let small = [*k, *n, *n1, *n2].iter().all(|&o| o <= 1);
            let mut triples = Vec::new();
            if small {
                for ((m1, m2), m3) in grades.iter().cartesian_product(&grades).cartesian_product(&grades) {
                    let hs = self.l.hom(*n1, *n2, m1)?;
                    let gs = self.l.hom(*n, *n1, m2)?;
                    let fs = self.l.hom(*k, *n, m3)?;
                    for ((h, g), f) in hs.iter().cartesian_product(&gs).cartesian_product(&fs) {
                        triples.push((h.clone(), g.clone(), f.clone()));
                    }
                }
            } else {
                for _ in 0..ASSOC_SAMPLES {
                    let m1 = grades.choose(&mut self.rng).expect("grades").clone();
                    let m2 = grades.choose(&mut self.rng).expect("grades").clone();
                    let m3 = grades.choose(&mut self.rng).expect("grades").clone();
                    if let (Some(h), Some(g), Some(f)) =
                        (self.sample(*n1, *n2, &m1)?, self.sample(*n, *n1, &m2)?, self.sample(*k, *n, &m3)?)
                    {
                        triples.push((h, g, f));
                    }
                }
            }
            for (h, g, f) in triples {
                let at = format!(
                    "(k, n, n', n'') = ({k}, {n}, {n1}, {n2}) at grades ({}, {}, {})",
                    h.grade, g.grade, f.grade
                );
                let left = self.l.compose(&h, &g).and_then(|hg| self.l.compose(&hg, &f));
                let right = self.l.compose(&g, &f).and_then(|gf| self.l.compose(&h, &gf));
                if !self.expect_eq("associativity", at, left, right) {
                    break;
                }
            }
        }
        Ok(())
    }

    fn roundtrip(&mut self) -> Result<()> {
        let grades = self.l.grades().to_vec();
        for (n, n2) in self.objects().cartesian_product(self.objects()) {
            for m in &grades {
                let at = cell(n, n2, m);
                for f in self.l.hom(n, n2, m)? {
                    let back = self.components(&f).map(|components| Arrow {
                        source: n,
                        grade: m.clone(),
                        components,
                    });
                    if !self.expect_eq("roundtrip through (L(n, 1)m)^n'", at.clone(), back, Ok(f.clone())) {
                        break;
                    }
                }
            }
        }
        for n in self.objects() {
            let eta = (0..n)
                .map(|i| Ok(self.l.projection(n, i)?.components.remove(0)))
                .collect::<Result<Vec<_>>>();
            let id = self.l.identity(n).and_then(|id| self.components(&id));
            self.expect_eq(
                "identity is the tuple of units",
                cell(n, n, &self.l.monoid().unit()),
                id.map(Tuple),
                eta.map(Tuple),
            );
        }
        // composition in L_{T_L}: the j-th component of f ∘ g is f_j
        // flattened along the tuple of g
        for ((n, n1), n2) in self.objects().cartesian_product(self.objects()).cartesian_product(self.objects()) {
            for (m1, m2) in grades.iter().cartesian_product(&grades) {
                for _ in 0..SAMPLES {
                    let (Some(f), Some(g)) = (self.sample(n1, n2, m1)?, self.sample(n, n1, m2)?) else {
                        break;
                    };
                    let at = cell(n, n2, &self.l.monoid().tensor_unchecked(m1, m2));
                    let direct = self.l.compose(&f, &g).and_then(|h| self.components(&h));
                    let flattened = self.components(&f).and_then(|fs| {
                        let tuple = Arrow {
                            source: n,
                            grade: m2.clone(),
                            components: self.components(&g)?,
                        };
                        fs.into_iter()
                            .map(|fj| {
                                let fj = Arrow {
                                    source: n1,
                                    grade: m1.clone(),
                                    components: vec![fj],
                                };
                                Ok(self.l.compose(&fj, &tuple)?.components.remove(0))
                            })
                            .collect::<Result<Vec<_>>>()
                    });
                    self.expect_eq("composition through (L(n, 1)m)^n'", at, direct.map(Tuple), flattened.map(Tuple));
                }
            }
        }
        Ok(())
    }
}

fn finish<L: GradedLawvere>(mut ctx: Ctx<'_, L>, outcome: Result<()>) -> Vec<String> {
    if let Err(e) = outcome {
        ctx.report.push(format!("check aborted: {e}"));
    }
    ctx.report
}

/// Identity, associativity, naturality in the grades and the tupling
/// bijection `f ↦ (π_1 ∘ f, ..., π_n ∘ f)`, up to `l.bound()`.
/// Identity, tupling and coercions are exhaustive; associativity is
/// exhaustive on objects up to 1 and sampled beyond.
pub fn check_lawvere<L: GradedLawvere>(l: &L) -> Vec<String> {
    let mut ctx = Ctx::new(l);
    let outcome = ctx
        .identity()
        .and_then(|_| ctx.tupling())
        .and_then(|_| ctx.grading())
        .and_then(|_| ctx.associativity());
    finish(ctx, outcome)
}

/// `L_{T_L} ≅ L`: every arrow is recovered from its components, the
/// identity corresponds to the units and composition to flattening.
pub fn roundtrip_check<L: GradedLawvere>(l: &L) -> Vec<String> {
    let mut ctx = Ctx::new(l);
    let outcome = ctx.roundtrip();
    finish(ctx, outcome)
}

/// Whether `iso`, given on basic arrows `L1(n, 1)m → L2(n, 1)m`, is a
/// family of bijections commuting with projections, coercions and
/// composition on both theories' common window.
pub fn isomorphism_check<L1, L2, F>(l1: &L1, l2: &L2, iso: F) -> Vec<String>
where
    L1: GradedLawvere,
    L2: GradedLawvere,
    F: Fn(usize, &Grade, &L1::Elem) -> Result<L2::Elem>,
{
    let mut ctx = Ctx::new(l1);
    let outcome = iso_inner(&mut ctx, l2, &iso);
    finish(ctx, outcome)
}

fn iso_inner<L1, L2, F>(ctx: &mut Ctx<'_, L1>, l2: &L2, iso: &F) -> Result<()>
where
    L1: GradedLawvere,
    L2: GradedLawvere,
    F: Fn(usize, &Grade, &L1::Elem) -> Result<L2::Elem>,
{
    let l1 = ctx.l;
    let bound = l1.bound().min(l2.bound());
    let grades: Vec<Grade> = l1.grades().iter().filter(|g| l2.grades().contains(g)).cloned().collect();
    let map = |a: &Arrow<L1::Elem>| -> Result<Arrow<L2::Elem>> {
        Ok(Arrow {
            source: a.source,
            grade: a.grade.clone(),
            components: a.components.iter().map(|e| iso(a.source, &a.grade, e)).collect::<Result<_>>()?,
        })
    };
    for n in 0..=bound {
        for m in &grades {
            let at = cell(n, 1, m);
            let image: BTreeSet<L2::Elem> = l1
                .basic(n, m)?
                .iter()
                .map(|e| iso(n, m, e))
                .collect::<Result<_>>()?;
            let target: BTreeSet<L2::Elem> = l2.basic(n, m)?.into_iter().collect();
            let count = l1.basic(n, m)?.len();
            if image.len() != count || image != target {
                ctx.report.push(format!(
                    "not a bijection at {at}: {count} arrows onto {} of {}",
                    image.len(),
                    target.len()
                ));
            }
        }
        for i in 0..n {
            let p = l1.projection(n, i).and_then(|p| map(&p));
            ctx.expect_eq("projection", cell(n, 1, &l1.monoid().unit()), p, l2.projection(n, i));
        }
    }
    for ((n, n1), (m1, m2)) in (0..=bound)
        .cartesian_product(0..=bound)
        .cartesian_product(grades.iter().cartesian_product(&grades))
    {
        for _ in 0..SAMPLES {
            let (Some(f), Some(g)) = (ctx.sample(n1, 1, m1)?, ctx.sample(n, n1, m2)?) else {
                break;
            };
            let at = cell(n, 1, &l1.monoid().tensor_unchecked(m1, m2));
            let left = l1.compose(&f, &g).and_then(|h| map(&h));
            let right = map(&f).and_then(|f2| l2.compose(&f2, &map(&g)?));
            ctx.expect_eq("composition", at, left, right);
        }
    }
    Ok(())
}
