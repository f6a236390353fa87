//! Exact IDS increments for one-dimensional bond percolation.
//!
//! In d = 1 every cluster is a path, and a vertex lies in a cluster of `n`
//! vertices with probability `n(1−p)²p^(n−1)`. Pooling per vertex gives
//! `N_X(E) − N_X(0) = Σ_n (1−p)² p^(n−1) c_n(E)` with `c_n` the number of
//! nonzero path eigenvalues at or below `E`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::laplacian::BoundaryCondition;

/// Truncated tail must stay below this.
pub const SERIES_TAIL: f64 = 1e-16;

/// `λ_k = 2 − 2cos(πk/m)`: `m = n` for N, `m = n + 1` for Dt.
#[cfg(test)]
fn path_eigenvalue(k: usize, m: usize) -> f64 {
    if 2 * k == m {
        return 2.0;
    }
    2.0 - 2.0 * (PI * k as f64 / m as f64).cos()
}

/// Index range `(m, kmax)` of the nonzero eigenvalues of a path of `n` vertices.
fn path_family(bc: BoundaryCondition, n: usize) -> (usize, usize) {
    match bc {
        BoundaryCondition::PseudoDirichlet => (n + 1, n),
        _ => (n, n - 1),
    }
}

/// Relative slack on the eigenvalue index, so energies that hit an
/// eigenvalue exactly (`E = 1` on a path of 3) count it despite rounding.
const INDEX_SLACK: f64 = 1e-9;

/// Number of nonzero path eigenvalues `≤ E` (or `< E` when `strict`).
///
/// `λ_k ≤ E` iff `k ≤ m·acos(1 − E/2)/π`, read off directly.
pub(crate) fn path_count(bc: BoundaryCondition, n: usize, energy: f64, strict: bool) -> usize {
    let (m, kmax) = path_family(bc, n);
    let arg = (1.0 - energy / 2.0).clamp(-1.0, 1.0);
    let k = m as f64 * arg.acos() / PI;
    let count = if strict {
        (k - INDEX_SLACK * k.max(1.0)).ceil() - 1.0
    } else {
        (k + INDEX_SLACK * k.max(1.0)).floor()
    };
    (count.max(0.0) as usize).min(kmax)
}

/// Smallest `n` with `p^n < 1e-16`, raised to `⌈4π/√E_min⌉`.
pub fn default_n_max(p: f64, e_min: f64) -> usize {
    let mut n = 1usize;
    let mut pn = p;
    while pn >= SERIES_TAIL {
        n += 1;
        pn *= p;
    }
    let geometric = if e_min > 0.0 {
        (4.0 * PI / e_min.sqrt()).ceil() as usize
    } else {
        0
    };
    n.max(geometric)
}

fn check_series(p: f64, energy: f64, bc: BoundaryCondition, n_max: usize) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("series needs 0 < p < 1, got {p}")));
    }
    if !(energy > 0.0 && energy <= 4.0) {
        return Err(Error::Domain(format!(
            "series needs 0 < E <= 4, got {energy}"
        )));
    }
    if bc == BoundaryCondition::Dirichlet {
        return Err(Error::Domain(
            "series is defined for N and Dt; use the reflection for D".into(),
        ));
    }
    let tail = p.powf(n_max as f64);
    if n_max == 0 || tail >= SERIES_TAIL {
        // Σ_{n>n_max} (1−p)² p^(n−1) n bounds the neglected mass.
        let tail_bound = tail * (1.0 + n_max as f64 * (1.0 - p));
        return Err(Error::Precision { n_max, tail_bound });
    }
    Ok(())
}

fn series(p: f64, energy: f64, bc: BoundaryCondition, n_max: usize, strict: bool) -> Result<f64> {
    check_series(p, energy, bc, n_max)?;
    let q2 = (1.0 - p) * (1.0 - p);
    let ln_p = p.ln();
    let mut sum = 0.0;
    // Terms shrink in n once c_n saturates, so summing from the tail end
    // keeps the small contributions from being swamped.
    for n in (1..=n_max).rev() {
        let c = path_count(bc, n, energy, strict);
        if c > 0 {
            sum += q2 * ((n - 1) as f64 * ln_p).exp() * c as f64;
        }
    }
    Ok(sum)
}

/// `N_X(E) − N_X(0)` for d = 1, `X ∈ {N, Dt}`.
pub fn ids_1d_series(p: f64, energy: f64, bc: BoundaryCondition, n_max: usize) -> Result<f64> {
    series(p, energy, bc, n_max, false)
}

/// Left limit `N_X^-(E) − N_X(0)`.
pub fn ids_1d_series_left(p: f64, energy: f64, bc: BoundaryCondition, n_max: usize) -> Result<f64> {
    series(p, energy, bc, n_max, true)
}

/// Zero-mode density `κ(p)` in d = 1 for the given operator.
pub fn kappa_1d(p: f64, bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Neumann => 1.0 - p,
        _ => 0.0,
    }
}
