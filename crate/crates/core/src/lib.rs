//! Twisted multi-shifts: Λ-commuting row isometries, their truncated Fock
//! model, polyball membership, Berezin kernels, Wold decompositions and
//! Beurling factorizations.

pub mod berezin;
pub mod beurling;
pub mod error;
pub mod fockmodel;
pub mod linalg;
pub mod mwords;
pub mod phases;
pub mod polyball;
pub mod rewrite;
pub mod sampling;
pub mod wold;

pub use error::{Error, Result};
pub use fockmodel::{OperatorMatrix, TruncatedModel};
pub use linalg::CMat;
pub use mwords::{enumerate_basis, MultiWord, Word};
pub use phases::{validate_lambda, LambdaEntry, Phase, PhaseMatrix, Turns};
pub use polyball::{MembershipReport, RowTuple, Tolerances};
pub use rewrite::{reduce_word, Letter, NormalMonomial, StarPolynomial};
pub use beurling::SubspaceHandle;
pub use wold::{AssembledTuple, Piece, TupleSpec, WanderingData};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
