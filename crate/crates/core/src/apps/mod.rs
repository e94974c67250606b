//! Regularity applications: Daubechies wavelets and the Butterfly scheme.

pub mod butterfly;
pub mod daubechies;
