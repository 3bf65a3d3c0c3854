//! Robust sup-inf optimization over discrete adapted strategies on finite
//! scenario lattices, under a family of probability laws.
pub mod integrand;
pub mod lattice;
pub mod models;
pub mod noarb;
pub mod oracle;
pub mod solver;
pub mod strategy;
pub use integrand::XReal;
pub mod cli;
