//! Eigenvalue counting by matrix inertia.
//!
//! `#{λ ≤ E}` is read off a banded `LDLᵀ` factorization of `Δ − E·1`: by
//! Sylvester's law of inertia the number of negative pivots equals the
//! number of eigenvalues below the shift. A zero pivot means the shift sits
//! on an eigenvalue of a leading block; the factorization is then repeated
//! slightly to the right, which also implements the right-continuous "≤"
//! convention when `E` is itself an eigenvalue.

use crate::error::{Error, Result};
use crate::laplacian::SymmetricOperator;

/// Pivots smaller than this multiple of `4d` count as breakdown.
const PIVOT_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Retry step, as a multiple of `4d`.
const RETRY_STEP: f64 = 1e-12;
const MAX_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaCount {
    pub count: usize,
    /// The shift actually factorized.
    pub shift: f64,
    /// True if the factorization broke down at the requested energy.
    pub retried: bool,
}

/// Number of eigenvalues `≤ energy`.
pub fn count_leq(op: &SymmetricOperator, energy: f64) -> Result<InertiaCount> {
    let band = Band::new(op);
    let step = RETRY_STEP * op.spectral_width();
    for attempt in 0..=MAX_RETRIES {
        let shift = energy + step * attempt as f64;
        if let Some(count) = band.negative_pivots(shift, PIVOT_FLOOR * op.spectral_width()) {
            return Ok(InertiaCount {
                count,
                shift,
                retried: attempt > 0,
            });
        }
    }
    Err(Error::Numeric {
        cluster: 0,
        message: format!("LDLᵀ breakdown persisted near E = {energy}"),
    })
}

/// Number of eigenvalues strictly below `energy`.
pub fn count_lt(op: &SymmetricOperator, energy: f64) -> Result<usize> {
    count_leq(op, energy.next_down()).map(|c| c.count)
}

/// The `k`-th smallest eigenvalue (1-based) by bisection on counts, to an
/// absolute accuracy of `tol`.
/// Counts come from an unpivoted factorization, so near a repeated
/// eigenvalue the result is accurate to about `1e-8` rather than `tol`.
pub fn kth_eigenvalue(op: &SymmetricOperator, k: usize, tol: f64) -> Result<f64> {
    if k == 0 || k > op.size() {
        return Err(Error::Domain(format!(
            "eigenvalue index {k} out of range 1..={}",
            op.size()
        )));
    }
    let width = op.spectral_width();
    let (mut lo, mut hi) = (-width * 1e-9, width * (1.0 + 1e-9));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if count_leq(op, mid)?.count >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lower band of the operator: row `i` holds columns `i-b ..= i`.
struct Band {
    n: usize,
    b: usize,
    rows: Vec<f64>,
}

impl Band {
    fn new(op: &SymmetricOperator) -> Self {
        let n = op.size();
        let b = op.bandwidth();
        let mut rows = vec![0.0; n * (b + 1)];
        for i in 0..n {
            rows[i * (b + 1) + b] = f64::from(op.diagonal(i));
        }
        for (i, j, v) in op.upper_entries() {
            // entry (j, i) with i < j lives in row j at offset i + b - j
            rows[j * (b + 1) + i + b - j] = f64::from(v);
        }
        Band { n, b, rows }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i * (self.b + 1) + j + self.b - i]
    }

    /// Counts negative pivots of `A − shift·1`, or `None` on breakdown.
    fn negative_pivots(&self, shift: f64, floor: f64) -> Option<usize> {
        let (n, b) = (self.n, self.b);
        let w = b.max(1);
        // l[i*w + (j + b - i)] = L_ij for j in [i-b, i)
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let mut row = vec![0.0; w];
        let mut negatives = 0;
        for i in 0..n {
            let lo = i.saturating_sub(b);
            // row[j - lo] = (L·D)_ij
            for j in lo..i {
                let mut s = self.at(i, j);
                for k in lo.max(j.saturating_sub(b))..j {
                    s -= row[k - lo] * l[j * w + k + b - j];
                }
                row[j - lo] = s;
            }
            let mut di = self.at(i, i) - shift;
            for j in lo..i {
                let lij = row[j - lo] / d[j];
                l[i * w + j + b - i] = lij;
                di -= row[j - lo] * lij;
            }
            if !di.is_finite() || di.abs() <= floor {
                return None;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        Some(negatives)
    }
}
