//! Exact construction and classification of maximal closed subroot systems
//! of affine reflection systems.

pub mod arsys;
pub mod classify;
pub mod error;
pub mod lattice;
pub mod rootsys;
pub mod subroot;
pub mod toroidal;

pub use error::{Error, Result};
