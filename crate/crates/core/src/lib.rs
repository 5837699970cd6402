//! Gibbs measures for nearest-neighbour models on the Cayley tree `Γ^k`.
//!
//! Balls and shells of the tree ([`topology`]), an interaction table on a
//! `q`-point spin set ([`model`]), the boundary-field recursion and its
//! translation-invariant fixed points ([`fields`]), exact finite-volume
//! measures ([`measures`]) and the factor-type classifier ([`classifier`]).

pub mod classifier;
pub mod error;
pub mod fields;
pub mod logspace;
pub mod measures;
pub mod model;
pub mod scalar;
pub mod schema;
pub mod topology;

pub use error::{Error, Result};
pub use fields::FieldAssignment;
pub use model::{LambdaModel, LambdaTable, SpinSet, StochasticMatrix};
pub use scalar::Scalar;
pub use topology::{Ball, Vertex, Word};
