use serde::{Deserialize, Serialize};

use super::series::{default_n_max, ids_1d_series, ids_1d_series_left};
use crate::error::{Error, Result};
use crate::laplacian::BoundaryCondition;
use crate::spectral::EmpiricalIDS;

/// Minimum number of usable points in a fit.
pub const MIN_POINTS: usize = 8;
/// Floor on the IDS increment for analytic data.
pub const ANALYTIC_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Lower,
    Upper,
}

/// Log-spaced distances from the spectral edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailWindow {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for TailWindow {
    fn default() -> Self {
        TailWindow {
            lo: 1e-8,
            hi: 1e-3,
            points: 64,
        }
    }
}

impl TailWindow {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let width = 4.0 * dim as f64;
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi < width) {
            return Err(Error::Domain(format!(
                "tail window [{}, {}] must lie strictly inside (0, {width})",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::Domain("tail window needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn distances(&self) -> Vec<f64> {
        let ratio = (self.hi / self.lo).ln();
        let m = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.lo,
                i if i + 1 == self.points => self.hi,
                i => self.lo * (ratio * i as f64 / m).exp(),
            })
            .collect()
    }

    /// Upper half of the window on the log scale.
    pub fn halved(&self) -> TailWindow {
        TailWindow {
            lo: (self.lo * self.hi).sqrt(),
            hi: self.hi,
            points: self.points.div_ceil(2),
        }
    }
}

/// IDS data a tail can be fitted to.
#[derive(Debug, Clone, Copy)]
pub enum TailData<'a> {
    /// Exact d = 1 series with bond probability `p`.
    Series {
        p: f64,
    },
    Empirical(&'a EmpiricalIDS),
}

impl TailData<'_> {
    fn dim(&self) -> usize {
        match self {
            TailData::Series { .. } => 1,
            TailData::Empirical(ids) => ids.dim(),
        }
    }

    fn floor(&self) -> f64 {
        match self {
            TailData::Series { .. } => ANALYTIC_FLOOR,
            TailData::Empirical(ids) => 10.0 / ids.total_vertices() as f64,
        }
    }

    fn p(&self) -> Option<f64> {
        match self {
            TailData::Series { p } => Some(*p),
            TailData::Empirical(_) => None,
        }
    }

    /// The IDS increment at distance `delta` from the edge:
    /// `N(δ) − N(0)` below, `N⁻(4d) − N(4d − δ)` above.
    fn excess(&self, bc: BoundaryCondition, edge: Edge, delta: f64, n_max: usize) -> Result<f64> {
        use BoundaryCondition::*;
        match (self, edge) {
            (TailData::Series { p }, Edge::Lower) => ids_1d_series(*p, delta, bc, n_max),
            // Reflection: the upper edge of D (resp. Dt) is the left limit
            // of the N (resp. Dt) increment at the lower edge.
            (TailData::Series { p }, Edge::Upper) => match bc {
                Dirichlet => ids_1d_series_left(*p, delta, Neumann, n_max),
                PseudoDirichlet => ids_1d_series_left(*p, delta, PseudoDirichlet, n_max),
                Neumann => Err(Error::Domain("no series for the Neumann upper edge".into())),
            },
            (TailData::Empirical(ids), Edge::Lower) => Ok(ids.value(delta)? - ids.value(0.0)?),
            (TailData::Empirical(ids), Edge::Upper) => {
                let w = 4.0 * ids.dim() as f64;
                Ok(ids.left_limit(w)? - ids.value(w - delta)?)
            }
        }
    }
}

/// `−1/2` where the edge is governed by the cluster-size tail, `−d/2` where
/// it is governed by large cubes.
pub fn expected_slope(bc: BoundaryCondition, edge: Edge, dim: usize) -> f64 {
    let fast = matches!(
        (bc, edge),
        (BoundaryCondition::Neumann, Edge::Lower) | (BoundaryCondition::Dirichlet, Edge::Upper)
    );
    if fast {
        -0.5
    } else {
        -(dim as f64) / 2.0
    }
}

/// Least-squares slope of `ln|ln ΔN|` against `ln δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub bc: BoundaryCondition,
    pub edge: Edge,
    pub d: usize,
    pub p: Option<f64>,
    pub window: [f64; 2],
    pub slope: f64,
    pub expected_slope: f64,
    /// Root-mean-square residual of the regression.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_tail(
    data: TailData<'_>,
    bc: BoundaryCondition,
    edge: Edge,
    window: TailWindow,
) -> Result<TailFit> {
    let dim = data.dim();
    window.validate(dim)?;
    if let TailData::Empirical(ids) = data {
        if ids.bc() != bc {
            return Err(Error::Domain(format!(
                "data are for {} but fit requested for {bc}",
                ids.bc()
            )));
        }
    }
    let n_max = match data {
        TailData::Series { p } => default_n_max(p, window.lo),
        TailData::Empirical(_) => 0,
    };
    let floor = data.floor();
    let mut xs = Vec::with_capacity(window.points);
    let mut ys = Vec::with_capacity(window.points);
    for delta in window.distances() {
        let v = data.excess(bc, edge, delta, n_max)?;
        if v > floor && v < 1.0 {
            xs.push(delta.ln());
            ys.push(v.ln().abs().ln());
        }
    }
    if xs.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            required: MIN_POINTS,
        });
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(TailFit {
        bc,
        edge,
        d: dim,
        p: data.p(),
        window: [window.lo, window.hi],
        slope,
        expected_slope: expected_slope(bc, edge, dim),
        residual: (ss / xs.len() as f64).sqrt(),
        points: xs.len(),
    })
}

/// Ordinary least squares `y ≈ a + b x`, returned as `(b, a)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::sample_graph;
    use crate::lattice::{clusters, LatticeBox};

    const N: BoundaryCondition = BoundaryCondition::Neumann;
    const DT: BoundaryCondition = BoundaryCondition::PseudoDirichlet;
    const D: BoundaryCondition = BoundaryCondition::Dirichlet;

    #[test]
    fn analytic_lower_slopes() {
        let w = TailWindow::default();
        for bc in [N, DT] {
            let fit = fit_tail(TailData::Series { p: 0.3 }, bc, Edge::Lower, w).unwrap();
            assert!((-0.55..=-0.45).contains(&fit.slope), "{bc}: {}", fit.slope);
            assert!(fit.points >= MIN_POINTS);
            assert_eq!(fit.expected_slope, -0.5);
        }
    }

    #[test]
    fn reflected_upper_matches_lower() {
        let w = TailWindow::default();
        let lower = fit_tail(TailData::Series { p: 0.3 }, N, Edge::Lower, w).unwrap();
        let upper = fit_tail(TailData::Series { p: 0.3 }, D, Edge::Upper, w).unwrap();
        assert_eq!(lower.slope, upper.slope);
        assert_eq!(lower.residual, upper.residual);
        assert_eq!(upper.expected_slope, -0.5);
    }

    #[test]
    fn neumann_upper_series_unavailable() {
        let w = TailWindow::default();
        assert!(fit_tail(TailData::Series { p: 0.3 }, N, Edge::Upper, w).is_err());
    }

    #[test]
    fn halving_is_stable() {
        let w = TailWindow::default();
        let full = fit_tail(TailData::Series { p: 0.3 }, N, Edge::Lower, w).unwrap();
        let half = fit_tail(TailData::Series { p: 0.3 }, N, Edge::Lower, w.halved()).unwrap();
        assert!((full.slope - half.slope).abs() < 0.03);
    }

    #[test]
    fn window_validation() {
        let bad = TailWindow {
            lo: 0.0,
            hi: 1e-3,
            points: 64,
        };
        assert!(bad.validate(1).is_err());
        let bad = TailWindow {
            lo: 1e-3,
            hi: 4.0,
            points: 64,
        };
        assert!(bad.validate(1).is_err());
        let w = TailWindow::default().distances();
        assert_eq!(w.len(), 64);
        assert_eq!(w[0], 1e-8);
        assert_eq!(w[63], 1e-3);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn empirical_deep_tail_is_insufficient() {
        let g = sample_graph(LatticeBox::new(2, 8).unwrap(), 0.3, 1).unwrap();
        let cs = clusters(&g);
        let ids = EmpiricalIDS::from_clusters(N, 2, 64, &cs).unwrap();
        let err = fit_tail(
            TailData::Empirical(&ids),
            N,
            Edge::Lower,
            TailWindow::default(),
        );
        assert!(matches!(err, Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn least_squares_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (b, a) = least_squares(&xs, &ys);
        assert!((b - 2.0).abs() < 1e-14 && (a - 1.0).abs() < 1e-14);
    }
}
