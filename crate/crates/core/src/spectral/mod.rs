//! Per-cluster spectra, eigenvalue counting and the empirical integrated
//! density of states.
//!
//! Clusters up to [`DENSE_THRESHOLD`] vertices are diagonalized in full.
//! Larger ones are only ever queried through inertia counts, including
//! their lowest eigenvalues, which are found by bisection.

mod eigen;
mod ids;
mod inertia;

pub use eigen::{eigenpairs, eigenvalues};
pub use ids::{
    empirical_ids, energy_grid, pool_ensemble, zero_mode_density, EmpiricalIDS, Ensemble, GridSpec,
    IdsTable, ZeroModes,
};
pub use inertia::{count_leq, count_lt, kth_eigenvalue, InertiaCount};

use crate::error::Result;
use crate::laplacian::{assemble, BoundaryCondition, SymmetricOperator, DENSE_THRESHOLD};
use crate::lattice::Cluster;

/// Tolerance below which a Neumann eigenvalue counts as a zero mode: `1e-9·4d`.
pub fn zero_tolerance(dim: usize) -> f64 {
    1e-9 * 4.0 * dim as f64
}

/// Absolute accuracy of bisected eigenvalues.
const BISECTION_TOL: f64 = 1e-13;

/// Answers `#{λ ≤ E}` queries for one operator, from a full spectrum when
/// the operator is dense-sized and from inertia otherwise.
#[derive(Debug, Clone)]
pub enum Counter {
    Spectrum(Vec<f64>),
    Inertia(SymmetricOperator),
}

impl Counter {
    pub fn new(op: SymmetricOperator) -> Result<Self> {
        if op.size() <= DENSE_THRESHOLD {
            Ok(Counter::Spectrum(eigenvalues(&op)?))
        } else {
            Ok(Counter::Inertia(op))
        }
    }

    pub fn count_leq(&self, energy: f64) -> Result<usize> {
        match self {
            Counter::Spectrum(ev) => Ok(ev.partition_point(|&x| x <= energy)),
            Counter::Inertia(op) => count_leq(op, energy).map(|c| c.count),
        }
    }
}

/// Eigenvalue information for one cluster and boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub size: usize,
    pub bc: BoundaryCondition,
    /// Full ascending spectrum; `None` above the dense threshold.
    pub eigenvalues: Option<Vec<f64>>,
    /// Lowest non-zero eigenvalue `E^(1)_X`; defined for `|V| ≥ 2`.
    pub lowest_nonzero: Option<f64>,
}

/// Spectral summary of `Δ_X(C)`.
pub fn summarize(cluster: &Cluster, bc: BoundaryCondition) -> Result<SpectralSummary> {
    let op = assemble(cluster, bc);
    let size = op.size();
    // Neumann has exactly one zero mode on a connected cluster
    let rank = if bc == BoundaryCondition::Neumann {
        2
    } else {
        1
    };
    let (eigenvalues, lowest_nonzero) = if size <= DENSE_THRESHOLD {
        let ev = eigenvalues(&op)?;
        let low = (size >= 2).then(|| ev[rank - 1]);
        (Some(ev), low)
    } else {
        (None, Some(kth_eigenvalue(&op, rank, BISECTION_TOL)?))
    };
    Ok(SpectralSummary {
        size,
        bc,
        eigenvalues,
        lowest_nonzero,
    })
}

/// Lowest non-zero eigenvalue of `Δ_X(C)`, or `None` for an isolated vertex.
pub fn lowest_nonzero(cluster: &Cluster, bc: BoundaryCondition) -> Result<Option<f64>> {
    if cluster.len() < 2 {
        return Ok(None);
    }
    let op = assemble(cluster, bc);
    let rank = if bc == BoundaryCondition::Neumann {
        2
    } else {
        1
    };
    if op.size() <= DENSE_THRESHOLD {
        Ok(Some(eigenvalues(&op)?[rank - 1]))
    } else {
        kth_eigenvalue(&op, rank, BISECTION_TOL).map(Some)
    }
}

/// Full spectrum of a dense-sized cluster, with the isolated vertex
/// short-circuited; `None` above the dense threshold.
pub fn cluster_spectrum(cluster: &Cluster, bc: BoundaryCondition) -> Result<Option<Vec<f64>>> {
    if cluster.is_isolated() {
        return Ok(Some(vec![f64::from(
            bc.isolated_vertex_value(cluster.dim()),
        )]));
    }
    if cluster.len() > DENSE_THRESHOLD {
        return Ok(None);
    }
    eigenvalues(&assemble(cluster, bc)).map(Some)
}
