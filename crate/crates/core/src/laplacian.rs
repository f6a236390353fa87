//! Neumann, Pseudo-Dirichlet and Dirichlet Laplacians of a single cluster.
//!
//! With `D` the degree matrix and `A` the adjacency matrix of a cluster in
//! dimension `d`:
//!
//! | boundary condition | matrix                 | isolated vertex |
//! |--------------------|------------------------|-----------------|
//! | Neumann            | `D - A`                | `0`             |
//! | Pseudo-Dirichlet   | `2d·1 - A`             | `2d`            |
//! | Dirichlet          | `2d·1 + (2d·1 - D) - A`| `4d`            |
//!
//! Entries are small integers and are kept exact until a solver asks for
//! floating point. Because the percolation Laplacian is block diagonal over
//! clusters, only per-cluster operators are ever built.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Cluster;
use crate::spectral;

/// Largest cluster stored (and diagonalized) densely.
pub const DENSE_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryCondition {
    #[serde(rename = "N")]
    Neumann,
    #[serde(rename = "Dt")]
    PseudoDirichlet,
    #[serde(rename = "D")]
    Dirichlet,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [
        BoundaryCondition::Neumann,
        BoundaryCondition::PseudoDirichlet,
        BoundaryCondition::Dirichlet,
    ];

    /// The value the operator takes on an isolated vertex: 0, 2d or 4d.
    pub fn isolated_vertex_value(self, dim: usize) -> i32 {
        let d = dim as i32;
        match self {
            BoundaryCondition::Neumann => 0,
            BoundaryCondition::PseudoDirichlet => 2 * d,
            BoundaryCondition::Dirichlet => 4 * d,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "N",
            BoundaryCondition::PseudoDirichlet => "Dt",
            BoundaryCondition::Dirichlet => "D",
        }
    }

    /// Diagonal entry of a vertex with `degree` cluster neighbours.
    #[inline]
    fn diagonal(self, dim: usize, degree: usize) -> i32 {
        let (d, k) = (dim as i32, degree as i32);
        match self {
            BoundaryCondition::Neumann => k,
            BoundaryCondition::PseudoDirichlet => 2 * d,
            BoundaryCondition::Dirichlet => 4 * d - k,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" => Ok(BoundaryCondition::Neumann),
            "Dt" => Ok(BoundaryCondition::PseudoDirichlet),
            "D" => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::Config(format!(
                "unknown boundary condition {other:?} (expected N, Dt or D)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    /// Row-major `n × n`.
    Dense(Vec<i32>),
    /// Diagonal plus the upper-triangular positions of the `-1` entries.
    Sparse {
        diag: Vec<i32>,
        edges: Vec<(u32, u32)>,
    },
}

/// A real symmetric matrix with integer entries, one per cluster and
/// boundary condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricOperator {
    bc: BoundaryCondition,
    dim: usize,
    n: usize,
    bandwidth: usize,
    storage: Storage,
}

/// Builds `Δ_X(C)`.
pub fn assemble(cluster: &Cluster, bc: BoundaryCondition) -> SymmetricOperator {
    let n = cluster.len();
    let dim = cluster.dim();
    let diag: Vec<i32> = (0..n)
        .map(|i| bc.diagonal(dim, cluster.degree(i)))
        .collect();
    let storage = if n <= DENSE_THRESHOLD {
        let mut m = vec![0i32; n * n];
        for (i, &v) in diag.iter().enumerate() {
            m[i * n + i] = v;
        }
        for &(i, j) in cluster.edges() {
            let (i, j) = (i as usize, j as usize);
            m[i * n + j] = -1;
            m[j * n + i] = -1;
        }
        Storage::Dense(m)
    } else {
        Storage::Sparse {
            diag,
            edges: cluster.edges().to_vec(),
        }
    };
    SymmetricOperator {
        bc,
        dim,
        n,
        bandwidth: cluster.bandwidth(),
        storage,
    }
}

impl SymmetricOperator {
    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Half-bandwidth in the cluster's vertex order.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Upper end of the spectrum, `4d`.
    pub fn spectral_width(&self) -> f64 {
        4.0 * self.dim as f64
    }

    pub fn entry(&self, i: usize, j: usize) -> i32 {
        match &self.storage {
            Storage::Dense(m) => m[i * self.n + j],
            Storage::Sparse { diag, edges } => {
                if i == j {
                    diag[i]
                } else {
                    let key = (i.min(j) as u32, i.max(j) as u32);
                    if edges.binary_search(&key).is_ok() {
                        -1
                    } else {
                        0
                    }
                }
            }
        }
    }

    pub fn diagonal(&self, i: usize) -> i32 {
        self.entry(i, i)
    }

    /// Exact trace.
    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| i64::from(self.diagonal(i))).sum()
    }

    /// Nonzero strictly-upper entries as `(i, j, value)`.
    pub fn upper_entries(&self) -> Vec<(usize, usize, i32)> {
        match &self.storage {
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for i in 0..self.n {
                    for j in i + 1..self.n {
                        let v = m[i * self.n + j];
                        if v != 0 {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse { edges, .. } => edges
                .iter()
                .map(|&(i, j)| (i as usize, j as usize, -1))
                .collect(),
        }
    }

    pub fn to_dense_f64(&self) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = f64::from(self.diagonal(i));
        }
        for (i, j, v) in self.upper_entries() {
            m[(i, j)] = f64::from(v);
            m[(j, i)] = f64::from(v);
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y: Vec<f64> = (0..self.n)
            .map(|i| f64::from(self.diagonal(i)) * x[i])
            .collect();
        for (i, j, v) in self.upper_entries() {
            let v = f64::from(v);
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
        y
    }

    /// `⟨x, Δ x⟩`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Dense CSV dump, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.entry(i, j).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Outcome of comparing two spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionCheck {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Checks `spec Δ_D = 4d − spec Δ_N` (sorted, entrywise) on one cluster.
pub fn reflection_check(cluster: &Cluster, tol: f64) -> Result<ReflectionCheck> {
    let neumann = spectral::eigenvalues(&assemble(cluster, BoundaryCondition::Neumann))?;
    let dirichlet = spectral::eigenvalues(&assemble(cluster, BoundaryCondition::Dirichlet))?;
    Ok(compare_reflected(
        &neumann,
        &dirichlet,
        4.0 * cluster.dim() as f64,
        tol,
    ))
}

/// Compares sorted `upper` against `width − reversed(lower)`.
pub fn compare_reflected(lower: &[f64], upper: &[f64], width: f64, tol: f64) -> ReflectionCheck {
    if lower.len() != upper.len() {
        return ReflectionCheck {
            holds: false,
            max_deviation: f64::INFINITY,
        };
    }
    let max_deviation = upper
        .iter()
        .zip(lower.iter().rev())
        .map(|(u, l)| (u - (width - l)).abs())
        .fold(0.0, f64::max);
    ReflectionCheck {
        holds: max_deviation <= tol,
        max_deviation,
    }
}

/// Matrix-level reflection: `4d·1 − U Δ_N U == Δ_D` entrywise, exactly,
/// where `U` is the parity involution `(−1)^(Σ|x_ν|)`.
pub fn bipartite_reflection_exact(cluster: &Cluster) -> bool {
    let neumann = assemble(cluster, BoundaryCondition::Neumann);
    let dirichlet = assemble(cluster, BoundaryCondition::Dirichlet);
    let four_d = 4 * cluster.dim() as i32;
    let n = cluster.len();
    let diag_ok = (0..n).all(|i| four_d - neumann.diagonal(i) == dirichlet.diagonal(i));
    let upper_n = neumann.upper_entries();
    let upper_d = dirichlet.upper_entries();
    diag_ok
        && upper_n.len() == upper_d.len()
        && upper_n
            .iter()
            .zip(&upper_d)
            .all(|(&(i, j, a), &(k, l, b))| {
                let conj = cluster.parity_sign(i) * cluster.parity_sign(j) * a;
                i == k && j == l && -conj == b
            })
}

/// Per-energy eigenvalue counts for the three boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheck {
    pub holds: bool,
    /// `(E, count_N, count_Dt, count_D)` at the first grid point that breaks
    /// the ordering, if any.
    pub first_violation: Option<(f64, usize, usize, usize)>,
    /// All eigenvalues lie in `[−tol, 4d + tol]`.
    pub in_range: bool,
}

/// Checks `count(Δ_N ≤ E) ≥ count(Δ_Dt ≤ E) ≥ count(Δ_D ≤ E)` on the grid
/// and that every spectrum lies in `[−tol, 4d + tol]`. Counts are taken at
/// `E + tol` so eigenvalues that equal a grid energy count on every side.
pub fn chain_check(cluster: &Cluster, grid: &[f64], tol: f64) -> Result<ChainCheck> {
    if grid.is_empty() {
        return Err(Error::Domain("chain check needs a nonempty grid".into()));
    }
    let width = 4.0 * cluster.dim() as f64;
    let counters: Vec<spectral::Counter> = BoundaryCondition::ALL
        .iter()
        .map(|&bc| spectral::Counter::new(assemble(cluster, bc)))
        .collect::<Result<_>>()?;
    let n = cluster.len();
    let mut in_range = true;
    for c in &counters {
        in_range &= c.count_leq(-tol)? == 0 && c.count_leq(width + tol)? == n;
    }
    let mut first_violation = None;
    for &e in grid {
        let k: Vec<usize> = counters
            .iter()
            .map(|c| c.count_leq(e + tol))
            .collect::<Result<_>>()?;
        if !(k[0] >= k[1] && k[1] >= k[2]) {
            first_violation = Some((e, k[0], k[1], k[2]));
            break;
        }
    }
    Ok(ChainCheck {
        holds: first_violation.is_none() && in_range,
        first_violation,
        in_range,
    })
}
