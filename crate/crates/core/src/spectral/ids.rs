use serde::{Deserialize, Serialize};

use super::{cluster_spectrum, count_leq, count_lt, zero_tolerance};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::laplacian::{assemble, BoundaryCondition};
use crate::lattice::{clusters, sample_graph_with, Cluster, LatticeBox, PercolationGraph};
use crate::rng::derive_seed;

/// Energy grid: `points` uniform energies on `[0, 4d]` plus the geometric
/// refinement `4d·2^-k` and `4d − 4d·2^-k`, `k = 1..=refine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub refine: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 512,
            refine: 20,
        }
    }
}

pub fn energy_grid(dim: usize, spec: GridSpec) -> Vec<f64> {
    let width = 4.0 * dim as f64;
    let mut grid: Vec<f64> = match spec.points {
        0 => Vec::new(),
        1 => vec![0.0],
        m => (0..m).map(|i| width * i as f64 / (m - 1) as f64).collect(),
    };
    for k in 1..=spec.refine {
        let h = width * 0.5f64.powi(k as i32);
        grid.push(h);
        grid.push(width - h);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `R` realizations on one box with positionally derived seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ensemble {
    pub lattice: LatticeBox,
    pub p: f64,
    pub master_seed: u64,
    pub realizations: usize,
}

impl Ensemble {
    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    pub fn graph(&self, index: usize) -> Result<PercolationGraph> {
        sample_graph_with(
            self.lattice,
            self.p,
            self.seed(index),
            Execution::Sequential,
        )
    }

    pub fn total_vertices(&self) -> usize {
        self.realizations * self.lattice.vertex_count()
    }
}

/// Pooled eigenvalue multiset of `Δ_X,Λ` over one or more realizations.
///
/// Each eigenvalue carries weight `1/|Λ|` where `|Λ|` is the total number of
/// vertices pooled. Clusters above the dense threshold are kept as clusters
/// and counted by inertia on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalIDS {
    bc: BoundaryCondition,
    dim: usize,
    total_vertices: usize,
    eigenvalues: Vec<f64>,
    large: Vec<Cluster>,
}

/// IDS values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IdsTable {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid energies within `1e-9·4d` of a pooled eigenvalue.
    pub collisions: Vec<f64>,
}

impl EmpiricalIDS {
    pub fn from_clusters(
        bc: BoundaryCondition,
        dim: usize,
        total_vertices: usize,
        clusters: &[Cluster],
    ) -> Result<Self> {
        let mut ids = EmpiricalIDS {
            bc,
            dim,
            total_vertices,
            eigenvalues: Vec::new(),
            large: Vec::new(),
        };
        for c in clusters {
            match cluster_spectrum(c, bc)? {
                Some(ev) => ids.eigenvalues.extend(ev),
                None => ids.large.push(c.clone()),
            }
        }
        ids.eigenvalues.sort_by(f64::total_cmp);
        Ok(ids)
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_vertices(&self) -> usize {
        self.total_vertices
    }

    /// Sorted eigenvalues of the dense-sized clusters.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn large_clusters(&self) -> &[Cluster] {
        &self.large
    }

    /// `#{λ ≤ E}`; eigenvalues within `1e-9·4d` of `E` count as equal to it,
    /// so computed zero modes such as `1e-16` land at `E = 0`.
    pub fn count_leq(&self, energy: f64) -> Result<usize> {
        let e = energy + zero_tolerance(self.dim);
        let mut k = self.eigenvalues.partition_point(|&x| x <= e);
        for c in &self.large {
            k += count_leq(&assemble(c, self.bc), e)?.count;
        }
        Ok(k)
    }

    /// `#{λ < E}` with the same tolerance.
    pub fn count_lt(&self, energy: f64) -> Result<usize> {
        let e = energy - zero_tolerance(self.dim);
        let mut k = self.eigenvalues.partition_point(|&x| x < e);
        for c in &self.large {
            k += count_lt(&assemble(c, self.bc), e)?;
        }
        Ok(k)
    }

    /// `N̂(E) = #{λ ≤ E}/|Λ|`, right-continuous.
    pub fn value(&self, energy: f64) -> Result<f64> {
        Ok(self.count_leq(energy)? as f64 / self.total_vertices as f64)
    }

    /// `lim_{ε↑E} N̂(ε)`.
    pub fn left_limit(&self, energy: f64) -> Result<f64> {
        Ok(self.count_lt(energy)? as f64 / self.total_vertices as f64)
    }

    pub fn table(&self, grid: &[f64]) -> Result<IdsTable> {
        let values = grid.iter().map(|&e| self.value(e)).collect::<Result<_>>()?;
        let tol = zero_tolerance(self.dim);
        let collisions = grid
            .iter()
            .copied()
            .filter(|&e| {
                let k = self.eigenvalues.partition_point(|&x| x < e - tol);
                self.eigenvalues.get(k).is_some_and(|&x| x <= e + tol)
            })
            .collect();
        Ok(IdsTable {
            energies: grid.to_vec(),
            values,
            collisions,
        })
    }

    /// Pools another multiset with the same boundary condition.
    pub fn merge(&mut self, other: EmpiricalIDS) -> Result<()> {
        if other.bc != self.bc || other.dim != self.dim {
            return Err(Error::Domain(
                "cannot pool spectra of different operators".into(),
            ));
        }
        self.total_vertices += other.total_vertices;
        self.eigenvalues.extend(other.eigenvalues);
        self.eigenvalues.sort_by(f64::total_cmp);
        self.large.extend(other.large);
        Ok(())
    }

    /// The multiset `{4d − λ}`, relabelled N ↔ D (Dt maps to itself).
    pub fn reflected(&self) -> EmpiricalIDS {
        let width = 4.0 * self.dim as f64;
        let bc = match self.bc {
            BoundaryCondition::Neumann => BoundaryCondition::Dirichlet,
            BoundaryCondition::Dirichlet => BoundaryCondition::Neumann,
            BoundaryCondition::PseudoDirichlet => BoundaryCondition::PseudoDirichlet,
        };
        EmpiricalIDS {
            bc,
            dim: self.dim,
            total_vertices: self.total_vertices,
            eigenvalues: self.eigenvalues.iter().rev().map(|x| width - x).collect(),
            large: self.large.clone(),
        }
    }
}

fn check_graphs(graphs: &[PercolationGraph]) -> Result<usize> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::Domain("no graphs supplied".into()))?;
    let dim = first.lattice().dim();
    if graphs.iter().any(|g| g.lattice().dim() != dim) {
        return Err(Error::Domain("graphs differ in dimension".into()));
    }
    Ok(dim)
}

/// Pools per-cluster spectra of the graphs and evaluates on `grid`.
pub fn empirical_ids(
    graphs: &[PercolationGraph],
    bc: BoundaryCondition,
    grid: &[f64],
) -> Result<(EmpiricalIDS, IdsTable)> {
    let dim = check_graphs(graphs)?;
    let parts = Execution::default().map_slice(graphs, |g| {
        EmpiricalIDS::from_clusters(bc, dim, g.lattice().vertex_count(), &clusters(g))
    });
    let ids = pool_parts(parts)?;
    let table = ids.table(grid)?;
    Ok((ids, table))
}

fn pool_parts(parts: Vec<Result<EmpiricalIDS>>) -> Result<EmpiricalIDS> {
    let mut parts = parts.into_iter();
    let mut acc = parts
        .next()
        .ok_or_else(|| Error::Domain("empty ensemble".into()))??;
    let mut eigen = std::mem::take(&mut acc.eigenvalues);
    for part in parts {
        let part = part?;
        acc.total_vertices += part.total_vertices;
        eigen.extend(part.eigenvalues);
        acc.large.extend(part.large);
    }
    eigen.sort_by(f64::total_cmp);
    acc.eigenvalues = eigen;
    Ok(acc)
}

/// Samples every realization of the ensemble and pools its spectra for each
/// boundary condition in `bcs`; realizations are never held all at once.
pub fn pool_ensemble(
    ensemble: &Ensemble,
    bcs: &[BoundaryCondition],
    exec: Execution,
) -> Result<Vec<EmpiricalIDS>> {
    if ensemble.realizations == 0 {
        return Err(Error::Domain("empty ensemble".into()));
    }
    let dim = ensemble.lattice.dim();
    let per_realization = exec.map(ensemble.realizations, |i| -> Result<Vec<EmpiricalIDS>> {
        let graph = ensemble.graph(i)?;
        let cs = clusters(&graph);
        bcs.iter()
            .map(|&bc| EmpiricalIDS::from_clusters(bc, dim, graph.lattice().vertex_count(), &cs))
            .collect()
    });
    let mut by_bc: Vec<Vec<Result<EmpiricalIDS>>> = bcs.iter().map(|_| Vec::new()).collect();
    for r in per_realization {
        for (slot, ids) in by_bc.iter_mut().zip(r?) {
            slot.push(Ok(ids));
        }
    }
    by_bc.into_iter().map(pool_parts).collect()
}

/// Zero modes of the pooled Neumann operator against the cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroModes {
    pub zero_modes: usize,
    pub clusters: usize,
    pub total_vertices: usize,
}

impl ZeroModes {
    /// Counts Neumann eigenvalues `≤ tol` cluster by cluster via inertia.
    pub fn from_clusters(clusters: &[Cluster], total_vertices: usize, tol: f64) -> Result<Self> {
        let mut zero_modes = 0;
        for (id, c) in clusters.iter().enumerate() {
            let op = assemble(c, BoundaryCondition::Neumann);
            zero_modes += count_leq(&op, tol).map_err(|e| e.at_cluster(id))?.count;
        }
        Ok(ZeroModes {
            zero_modes,
            clusters: clusters.len(),
            total_vertices,
        })
    }

    /// `κ̂ = #zero modes / |Λ|`.
    pub fn density(&self) -> f64 {
        self.zero_modes as f64 / self.total_vertices as f64
    }

    pub fn matches_cluster_count(&self) -> bool {
        self.zero_modes == self.clusters
    }
}

/// Density of Neumann zero modes over the graphs, i.e. the empirical
/// cluster density `κ̂(p)`.
pub fn zero_mode_density(graphs: &[PercolationGraph], tol: f64) -> Result<ZeroModes> {
    check_graphs(graphs)?;
    if tol <= 0.0 {
        return Err(Error::Domain("zero tolerance must be positive".into()));
    }
    let parts = Execution::default().map_slice(graphs, |g| {
        ZeroModes::from_clusters(&clusters(g), g.lattice().vertex_count(), tol)
    });
    let mut total = ZeroModes {
        zero_modes: 0,
        clusters: 0,
        total_vertices: 0,
    };
    for z in parts {
        let z = z?;
        total.zero_modes += z.zero_modes;
        total.clusters += z.clusters;
        total.total_vertices += z.total_vertices;
    }
    Ok(total)
}
