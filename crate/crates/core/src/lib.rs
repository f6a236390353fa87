//! Graph Laplacians on bond-percolation subgraphs of the integer lattice.
//!
//! The crate samples finite-volume percolation graphs, splits them into
//! clusters, assembles the Neumann, Pseudo-Dirichlet and Dirichlet
//! Laplacians per cluster, and pools the spectra into an empirical
//! integrated density of states (IDS). On top of that it checks the
//! isoperimetric eigenvalue bounds cluster by cluster and estimates
//! Lifshits-tail exponents, with an exact one-dimensional series as the
//! reference for the deep tail.
//!
//! Module map:
//!
//! - [`lattice`]: boxes, sampling, cluster decomposition, linear and cubic clusters
//! - [`laplacian`]: operator assembly and the structural symmetries
//! - [`spectral`]: eigenvalues, inertia counting, pooled IDS
//! - [`isoperimetry`]: Cheeger, crude Cheeger, Faber–Krahn and variational bounds
//! - [`tails`]: 1-D series, tail exponent fits, cluster-size decay
//! - [`config`], [`runner`]: experiment configuration and the `perclap` CLI driver
//!
//! Data-parallel loops run on rayon when the default `parallel` feature is
//! enabled; results never depend on the number of worker threads.

pub mod config;
pub mod error;
pub mod exec;
pub mod isoperimetry;
pub mod laplacian;
pub mod lattice;
pub mod rng;
pub mod runner;
pub mod spectral;
pub mod tails;

pub use error::{Error, Result};
pub use exec::Execution;
pub use laplacian::{assemble, BoundaryCondition, SymmetricOperator, DENSE_THRESHOLD};
pub use lattice::{
    clusters, make_cubic_cluster, make_linear_cluster, sample_graph, Cluster, LatticeBox,
    PercolationGraph,
};
