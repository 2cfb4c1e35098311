//! Sequents, derivations, the rule checker, split-context elaboration and
//! bounded proof search.

mod check;
mod derivation;
pub mod elaborate;
pub mod random;
mod search;

pub use check::{
    annotate, check_derivation, check_struct, shape, show_path, validate_sequent, Annotated, CheckError, ErrorCode,
};
pub use derivation::{Derivation, Entry, Sequent};
pub use elaborate::{coerce, elaborate_sequent, split_view, ElabError, SplitSequent};
pub use search::{rotate_to_front, search, SearchBudget};
