//! Desk-scale laboratory for the bipartite null-codeword problem: folded
//! Reed-Solomon codes and their dual decoder, exact sparse simulation of the
//! quantum simultaneous-message protocol, classical protocol-tree machinery,
//! and the total variant built on low-degree hashing.

pub mod budget;
pub mod codes;
pub mod error;
pub mod gf;
pub mod hashing;
pub mod instances;
pub mod linalg;
pub mod proto;
pub mod qsim;
pub mod tbnc;
pub mod toy;

pub use budget::Budget;
pub use error::{Error, Result};
