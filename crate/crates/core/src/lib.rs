//! Numerical laboratory for Bloch-type spaces on the polydisk and the
//! composition operators acting on them.

pub mod criteria;
pub mod error;
pub mod experiment;
pub mod holo;
pub mod norms;
pub mod oracle;
pub mod polydisk;
pub mod sampling;
pub mod testfn;

pub use error::{BlochError, Result};
