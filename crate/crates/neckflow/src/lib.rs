//! Numerical toolkit for Lawlor necks, the glued desingularization of two
//! intersecting special Lagrangian tori, and the neck-size balancing law.

pub mod error;
pub mod cli;
pub mod dynamics;
pub mod glue;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod lawlor;
pub mod norms;
pub mod numerics;

pub use error::{Error, Result};
