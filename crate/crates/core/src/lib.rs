//! Trees on ω, derivatives and ranks, broom sets, admissible maps, Suslin schemes and leaf-schemes,
//! computed exactly on finite descriptions and cross-checked against finite truncations.

pub mod admissible;
pub mod broom;
pub mod corpus;
pub mod error;
pub mod leaf_scheme;
pub mod omega;
pub mod ordinal;
pub mod reindex;
pub mod sexp;
pub mod suslin;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
pub use ordinal::{Ordinal, Rank};
pub use trees::{FiniteTree, Seq};
