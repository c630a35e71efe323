//! Graded Lawvere theories and morphisms of presentations.

mod check;
mod hom;
mod morphism;

pub use check::{check_lawvere, isomorphism_check, roundtrip_check};
pub use hom::{l_of, th_of, Arrow, GradedLawvere, MonadLawvere, TheoryLawvere};
pub use morphism::{generic_term, TheoryMorphism};
