//! Graded equational entailment.

mod closure;
mod normalizer;

use std::sync::Arc;

pub use closure::{derive_closure, derive_closure_seeded, entails, ClosureConfig, ClosureUniverse, Entailment};
pub use normalizer::{
    ClosureNormalizer, CoercionNormalizer, Normalizer, StateNormalizer, StateValue,
};

use crate::error::Result;
use crate::syntax::Theory;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizerKind {
    Coercion,
    State,
    Closure(ClosureConfig),
}

impl NormalizerKind {
    /// The coercion normalizer for axiom-free theories, otherwise the
    /// closure fallback with the given configuration.
    pub fn auto(theory: &Theory, config: ClosureConfig) -> Self {
        if theory.axioms.is_empty() {
            NormalizerKind::Coercion
        } else {
            NormalizerKind::Closure(config)
        }
    }
}

pub fn build_normalizer(theory: &Theory, kind: &NormalizerKind) -> Result<Arc<dyn Normalizer>> {
    Ok(match kind {
        NormalizerKind::Coercion => Arc::new(CoercionNormalizer::new(theory.clone())?),
        NormalizerKind::State => Arc::new(StateNormalizer::new(theory.clone())?),
        NormalizerKind::Closure(c) => Arc::new(ClosureNormalizer::new(theory.clone(), c.clone())),
    })
}
