//! Discrete Bayesian networks with tools for enforcing fair equality of
//! opportunity: exact inference, parameter learning, CPT repair for a
//! control variable, and seeded ancestral sampling.

pub mod fixtures;
pub mod inference;
pub mod learning;
pub mod network;
pub mod roles;
pub mod sampler;
pub mod solver;
