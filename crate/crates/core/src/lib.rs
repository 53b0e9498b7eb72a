//! Typed feature structures, grammar loading, morphological analysis,
//! chart parsing and MRS semantics.

pub mod grammar;
pub mod morpho;
pub mod parser;
pub mod semantics;
pub mod tfs;
