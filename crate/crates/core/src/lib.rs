//! A doctrine-parameterized proof engine for linear/non-linear logics.
//!
//! A [`base::BaseTheory`] fixes the sorts and which signed lists are allowed,
//! a [`doctrine::Doctrine`] adds discrete cones (the connectives), and a
//! [`sketch::Sketch`] supplies generators. Derivations in the generic sequent
//! calculus are checked by [`calculus`], compared by [`rewrite`], enumerated
//! by [`completion`] and moved between doctrines by [`translate`].

pub mod base;
pub mod calculus;
pub mod cli;
pub mod completion;
pub mod corpus;
pub mod doctrine;
pub mod rewrite;
pub mod sketch;
pub mod syntax;
pub mod translate;
pub mod types;
pub mod validation;
pub mod workspace;
