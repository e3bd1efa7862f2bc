//! Finite coarse-geometry computations: coarse disjoint unions of graph
//! blocks, box spaces of quotient maps, exact and floating-point witness
//! optimization, universal-cover tree witnesses, and fibred witness
//! assembly/checking.

pub mod cover;
pub mod error;
pub mod fibred;
pub mod folner;
pub mod graph;
pub mod group;
pub mod lp;
pub mod metric;
pub mod oracle;
pub mod profile;
pub mod quotient;
pub mod report;
pub mod witness;

pub use error::{Error, Result};
