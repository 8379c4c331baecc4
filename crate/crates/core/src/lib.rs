//! Multicast network coding over finite fields: network families, closed-form
//! solvability, explicit linear solutions and field-pair discovery.

pub mod criterion;
pub mod error;
pub mod exec;
pub mod gf;
pub mod lnc;
pub mod netmodel;
pub mod numtheory;
pub mod solvability;
pub mod zn;

pub use error::{Error, Result};
pub use exec::Exec;
