//! Protocol completion for networks of labeled transition systems.
//!
//! Candidates are models of a propositional constraint store over transition
//! variables. Each candidate is decoded into a network, model checked against
//! safety and Büchi monitors, and blocked together with a generalization.
//! Isomorphic completions (state permutations over the permutable set) are
//! pruned as whole classes.

pub mod bench;
pub mod encoding;
pub mod engine;
pub mod error;
pub mod generalize;
pub mod iso;
pub mod lts;
pub mod mc;
pub mod oracle;
pub mod product;
pub mod sat;

pub use error::{Error, Result};
