//! Graph topology inference from spectrally sparse signals.
//!
//! The pipeline has two phases. Phase one alternates closed-form sparse
//! coding and an orthogonal Procrustes update to learn an orthonormal
//! eigenbasis from the observation matrix. Phase two recovers eigenvalues
//! for which the reassembled matrix is a valid adjacency matrix, via a
//! linear-program feasibility solve, and thresholds the result into a graph.

pub mod eig;
pub mod error;
pub mod gft;
pub mod graph;
pub mod harness;
pub mod io;
pub mod learn;
pub mod metrics;
pub mod recover;
pub mod seed;
pub mod simplex;
pub mod synth;

pub use eig::{eig_sym, Eigenbasis};
pub use error::{Error, Result};
pub use graph::Graph;
