//! An engine for logics of first-order constraints over finite base
//! categories (finite sets and finite directed multigraphs).
//!
//! The layers build on each other: [`cat`] provides objects, morphisms,
//! hom-set search and pushouts; [`footprint`] adds feature symbols and
//! structures; [`expr`] gives feature expressions their solution sets;
//! [`sketch`] binds expressions into contexts and checks models and
//! entailment; [`rules`] matches, applies, and saturates sketch rules; and
//! [`surface`] reads and writes the `.lfoc` text format and JSON results.

pub mod cat;
pub mod error;
pub mod expr;
pub mod footprint;
pub mod rules;
pub mod sketch;
pub mod surface;

pub use error::{Error, Result};
