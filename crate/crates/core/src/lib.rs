//! Exact desk-scale tooling for rainbow relation algebras built from pairs of
//! finite binary structures, together with the three games used to reason
//! about them:
//!
//! * the complete-representation game on atomic networks ([`repgame`]),
//! * the c-colour set-colouring ("Seurat") game on binary structures ([`seurat`]),
//! * the c-pebble equivalence game on finite relation algebras ([`pebble`]).
//!
//! [`harness`] ties these together into condition pipelines and an exhaustive
//! hunt over small digraph pairs.

pub mod error;
pub mod harness;
pub mod pebble;
pub mod ra;
pub mod rainbow;
pub mod repgame;
pub mod seurat;
pub mod structures;

pub use error::{Error, Result};

/// Version string recorded in persisted hunt records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
