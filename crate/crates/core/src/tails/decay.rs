use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::LatticeBox;
use crate::rng::{derive_seed, uniform_at};
use nalgebra::{DMatrix, DVector};

/// The fit uses sizes `n` with `P̂(|V_0| ≥ n) ≥ MIN_EVENTS / samples`.
pub const MIN_EVENTS: f64 = 50.0;

/// Default half-width of the growth box per dimension.
pub fn default_radius(dim: usize) -> usize {
    match dim {
        1 => 500,
        2 => 120,
        _ => 40,
    }
}

/// Origin-cluster size statistics and the fitted decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub d: usize,
    pub p: f64,
    pub samples: usize,
    pub seed: u64,
    pub zeta_hat: f64,
    /// Power-law exponent of the prefactor, `n^(−θ)`.
    pub theta_hat: f64,
    /// Weighted coefficient of determination of the fit.
    pub r2: f64,
    /// Inclusive range of `n` used in the regression.
    pub fit_range: [usize; 2],
    /// `P̂(|V_0| ≥ n)` for `n = 1, 2, …`.
    pub survival: Vec<f64>,
    /// Survival with each sample weighted by `1/|V_0|`, normalised to 1 at `n = 1`.
    pub weighted_survival: Vec<f64>,
    /// Samples whose cluster reached the box boundary.
    pub truncated: usize,
}

fn check_subcritical(dim: usize, p: f64) -> Result<()> {
    let ok = match dim {
        1 => p > 0.0 && p < 1.0,
        2 => p > 0.0 && p < 0.4,
        3 => p > 0.0 && p < 0.2,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "cluster-size decay needs a safely subcritical p, got d = {dim}, p = {p}"
        )))
    }
}

/// Grows the cluster of the box centre, evaluating bonds lazily from the
/// counter-based stream. Returns the size and whether it touched the boundary.
fn origin_cluster(lattice: LatticeBox, p: f64, seed: u64) -> (usize, bool) {
    let dim = lattice.dim();
    let side = lattice.side();
    let centre: Vec<usize> = vec![side / 2; dim];
    let start = lattice.index(&centre);
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    let mut touched = false;
    while let Some(v) = queue.pop_front() {
        let x = lattice.coords(v);
        for (axis, &xa) in x.iter().enumerate() {
            if xa == 0 || xa + 1 == side {
                touched = true;
            }
            // Forward bond owned by v, backward bond owned by the neighbour.
            if xa + 1 < side {
                let w = v + lattice.stride(axis);
                if !seen.contains(&w) && uniform_at(seed, (v * dim + axis) as u64) < p {
                    seen.insert(w);
                    queue.push_back(w);
                }
            }
            if xa > 0 {
                let w = v - lattice.stride(axis);
                if !seen.contains(&w) && uniform_at(seed, (w * dim + axis) as u64) < p {
                    seen.insert(w);
                    queue.push_back(w);
                }
            }
        }
    }
    (seen.len(), touched)
}

/// Estimates `P(|V_0| ≥ n)` and fits its exponential rate `ζ̂`.
///
/// Sampling the cluster of a fixed vertex size-biases cluster sizes
/// (`P(|V_0| = n)` carries a factor `n`), so the regression runs on the
/// `1/|V_0|`-reweighted survival `T(n)`, which shares the same rate. The
/// model is `ln T(n) = a − ζ n − θ ln n`, fitted by least squares with
/// weights proportional to the number of samples reaching `n`. In d = 1
/// `T(n) = p^(n−1)` exactly, so `θ̂ ≈ 0` there.
pub fn cluster_size_decay(dim: usize, p: f64, samples: usize, seed: u64) -> Result<DecayFit> {
    cluster_size_decay_with(
        dim,
        p,
        samples,
        seed,
        default_radius(dim),
        Execution::default(),
    )
}

pub fn cluster_size_decay_with(
    dim: usize,
    p: f64,
    samples: usize,
    seed: u64,
    radius: usize,
    exec: Execution,
) -> Result<DecayFit> {
    check_subcritical(dim, p)?;
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let lattice = LatticeBox::new(dim, 2 * radius + 1)?;
    let grown = exec.map(samples, |i| {
        origin_cluster(lattice, p, derive_seed(seed, i as u64))
    });
    let truncated = grown.iter().filter(|g| g.1).count();
    if truncated > 0 {
        log::warn!("{truncated} of {samples} origin clusters reached the box boundary");
    }
    let max = grown.iter().map(|g| g.0).max().unwrap_or(1);
    let mut count = vec![0usize; max + 2];
    for &(s, _) in &grown {
        count[s] += 1;
    }
    // survival[n-1] = P̂(|V_0| ≥ n); weighted likewise with 1/n.
    let mut survival = vec![0.0; max];
    let mut weighted = vec![0.0; max];
    let (mut acc, mut wacc) = (0usize, 0.0f64);
    for n in (1..=max).rev() {
        acc += count[n];
        wacc += count[n] as f64 / n as f64;
        survival[n - 1] = acc as f64 / samples as f64;
        weighted[n - 1] = wacc;
    }
    let total_w = weighted[0];
    let threshold = MIN_EVENTS / samples as f64;
    let usable: Vec<usize> = (1..=max)
        .filter(|&n| survival[n - 1] >= threshold)
        .collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientData {
            usable: usable.len(),
            required: 4,
        });
    }
    let ys: Vec<f64> = usable
        .iter()
        .map(|&n| (weighted[n - 1] / total_w).ln())
        .collect();
    let ws: Vec<f64> = usable.iter().map(|&n| survival[n - 1]).collect();
    let (coef, r2) = weighted_fit(&usable, &ys, &ws)?;
    Ok(DecayFit {
        d: dim,
        p,
        samples,
        seed,
        zeta_hat: -coef[1],
        theta_hat: -coef[2],
        r2,
        fit_range: [usable[0], *usable.last().unwrap()],
        survival,
        weighted_survival: weighted.iter().map(|w| w / total_w).collect(),
        truncated,
    })
}

/// Weighted least squares of `y` on `[1, n, ln n]`; returns the
/// coefficients and the weighted R².
fn weighted_fit(ns: &[usize], ys: &[f64], ws: &[f64]) -> Result<([f64; 3], f64)> {
    let m = ns.len();
    let x = DMatrix::from_fn(m, 3, |i, j| {
        let n = ns[i] as f64;
        let v = [1.0, n, n.ln()][j];
        v * ws[i].sqrt()
    });
    let y = DVector::from_fn(m, |i, _| ys[i] * ws[i].sqrt());
    let beta = x
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Numeric {
            cluster: 0,
            message: format!("decay regression failed: {e}"),
        })?;
    let coef = [beta[0], beta[1], beta[2]];
    let sw: f64 = ws.iter().sum();
    let mean = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for i in 0..m {
        let n = ns[i] as f64;
        let fit = coef[0] + coef[1] * n + coef[2] * n.ln();
        ss_res += ws[i] * (ys[i] - fit).powi(2);
        ss_tot += ws[i] * (ys[i] - mean).powi(2);
    }
    Ok((coef, 1.0 - ss_res / ss_tot))
}
