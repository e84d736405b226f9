//! Exact p-adic kernel for refined ramification breaks of bicyclic
//! `C_p x C_p` extensions of local fields and the Galois module structure of
//! their ideals.

pub mod breaks;
pub mod error;
pub mod field;
pub mod groupring;
pub mod linalg;
pub mod modules;
pub mod padic;
pub mod tower;

pub use error::{Error, Result};
