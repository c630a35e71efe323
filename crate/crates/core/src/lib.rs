//! Graded algebraic theories over preordered monoids.
//!
//! Terms carry grades drawn from a thin monoidal category, entailment is
//! semi-decided by a bounded congruence closure, and theories can be turned
//! into free models, graded monads and graded Lawvere theories, or combined
//! by sums, coequalizers, tensors and extension along lax monoidal maps.

pub mod combine;
pub mod error;
pub mod freemonad;
pub mod grade;
pub mod lawvere;
pub mod logic;
pub mod model;
pub mod syntax;

pub use error::{Error, Result};
pub use grade::{Grade, GradeMonoid, LaxMonoidalMap, OK};
pub use syntax::{Equation, Operation, Signature, Term, Theory};
