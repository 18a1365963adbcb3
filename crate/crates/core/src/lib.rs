//! A computational toolkit for graphs of groups: splitting moves, the
//! Stallings fold calculus at quotient level, an exhaustive finite-action
//! sandbox oracle, alternating decomposition hierarchies, and word-metric
//! experiments (ends, translation lengths, commensurizers) on a catalog of
//! groups with decidable word problems.

pub mod error;
pub mod words;

pub mod cayley;
pub mod corpus;
pub mod folds;
pub mod gog;
pub mod hierarchy;
pub mod groups;
pub mod sandbox;

pub use error::{Decision, Error, Result};
pub use words::{Letter, Word};
