use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::laplacian::{SymmetricOperator, DENSE_THRESHOLD};

/// All eigenvalues of a dense-sized operator, ascending.
pub fn eigenvalues(op: &SymmetricOperator) -> Result<Vec<f64>> {
    check_size(op)?;
    if op.size() == 1 {
        return Ok(vec![f64::from(op.diagonal(0))]);
    }
    let mut ev: Vec<f64> = op
        .to_dense_f64()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric {
            cluster: 0,
            message: "symmetric eigensolver returned non-finite values".into(),
        });
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues with eigenvectors (columns), ascending.
pub fn eigenpairs(op: &SymmetricOperator) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_size(op)?;
    let n = op.size();
    let eig = SymmetricEigen::try_new(op.to_dense_f64(), f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::Numeric {
            cluster: 0,
            message: format!("symmetric eigensolver did not converge (n = {n})"),
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok((values, vectors))
}

fn check_size(op: &SymmetricOperator) -> Result<()> {
    if op.size() > DENSE_THRESHOLD {
        return Err(Error::UnsupportedSize {
            what: "dense eigensolve",
            size: op.size(),
            limit: DENSE_THRESHOLD,
        });
    }
    Ok(())
}
