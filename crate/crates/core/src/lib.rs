//! Self-similar groups acting on regular rooted trees: wreath recursions,
//! finite level quotients, stabilizer lemmas checked at finite levels, and
//! commensurability certificates.

pub mod catalog;
pub mod lab;
mod error;
pub mod quotient;
pub mod recursion;

pub use error::{Error, Result};
pub use ssg_perm as perm;
