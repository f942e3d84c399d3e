//! Finite permutation groups: stabilizer chains, subgroup handles,
//! intersections, normalizers and index-p subgroups.
//!
//! Points are `0..degree`. Products are function compositions, so `g.compose(&h)`
//! applies `h` first.

mod abelian;
mod chain;
mod group;
mod perm;
mod search;

use thiserror::Error;

pub use abelian::{index_p_subgroups, normal_closure, IndexPSubgroups};
pub use chain::StabChain;
pub use group::{block_orders_consistent, index, PermGroup, SubgroupHandle};
pub use perm::Perm;
pub use search::{intersection, normalizer, SearchBudget};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("images do not form a bijection")]
    NotBijective,
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("{0} is not an element of the containing group")]
    NotSubgroup(String),
    #[error("invalid block system: {0}")]
    InvalidBlocks(String),
    #[error("inconclusive: {stage} exceeded its budget")]
    Inconclusive { stage: String },
}
