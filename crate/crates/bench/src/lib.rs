//! Fixtures shared by the benchmarks.

use polyball::phases::{validate_lambda, LambdaEntry, PhaseMatrix};

/// k = 2, n = (1,1), λ₁₂ = i.
pub fn twisted_pair() -> PhaseMatrix {
    validate_lambda(&[1, 1], &[LambdaEntry::new(1, 2, 1, 1, 1, 4)]).expect("valid twist")
}

/// k = 2, n = (2,1), λ₁₂(1,1) = i, λ₁₂(2,1) = −1.
pub fn mixed_arity() -> PhaseMatrix {
    validate_lambda(
        &[2, 1],
        &[LambdaEntry::new(1, 2, 1, 1, 1, 4), LambdaEntry::new(1, 2, 2, 1, 1, 2)],
    )
    .expect("valid twist")
}
