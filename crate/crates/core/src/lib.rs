//! Joint spectral radius of finite matrix families via invariant polytopes.

pub mod apps;
pub mod balancer;
pub mod cli;
pub mod candidates;
pub mod error;
pub mod exact;
pub mod family;
pub mod linalg;
pub mod lp;
pub mod pipeline;
pub mod polytope;
pub mod reduction;
pub mod words;

pub use error::{Error, Result};
pub use family::MatrixFamily;
