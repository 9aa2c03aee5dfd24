//! Metric dimension reduction laboratory.
//!
//! Finite metric spaces and embeddings, exact Johnson–Lindenstrauss
//! calculators and transforms, Euclidean distortion by semidefinite
//! feasibility, nonlinear spectral gaps, and random girth-constrained
//! metric constructions.

pub mod graph;
pub mod jl;
pub mod matousek;
pub mod metric;
pub mod rng;
pub mod sdp;
pub mod special;
pub mod spectral;
pub mod verify;
