//! Isoperimetric lower bounds and variational upper bounds on the lowest
//! non-zero cluster eigenvalues.
//!
//! Lower bounds checked per cluster:
//!
//! - Cheeger: `E¹_N ≥ h_Ch² / (4d)`, with `h_Ch` found by exhaustive search
//!   for clusters of at most [`EXHAUSTIVE_CUTOFF`] vertices;
//! - crude Cheeger: `E¹_N ≥ 1 / (d·|V|²)`, valid for any size;
//! - Faber–Krahn: `E¹_Dt · |V|^(2/d)` is bounded below by a dimension-only
//!   constant, estimated here as a population minimum.
//!
//! Upper bounds: `E¹_N(path of n) ≤ 12/n²` and `E¹_D(cube of side l) ≤ 27d/l²`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::laplacian::BoundaryCondition;
use crate::lattice::{make_cubic_cluster, make_linear_cluster, Cluster};
use crate::spectral::lowest_nonzero;

/// Largest cluster for which the Cheeger constant is computed exactly.
pub const EXHAUSTIVE_CUTOFF: usize = 20;

/// Slack allowed on every certified margin.
pub const MARGIN_TOL: f64 = 1e-12;

/// `min |∂W| / |W|` over vertex subsets with `1 ≤ |W| ≤ |V|/2`, where `∂W`
/// is the set of cluster edges with exactly one endpoint in `W`.
///
/// Subsets are visited in Gray-code order so each step toggles one vertex
/// and updates the boundary in O(1).
pub fn cheeger_constant(cluster: &Cluster) -> Result<Ratio<u64>> {
    let n = cluster.len();
    if n < 2 {
        return Err(Error::Domain("Cheeger constant needs |V| >= 2".into()));
    }
    if n > EXHAUSTIVE_CUTOFF {
        return Err(Error::UnsupportedSize {
            what: "exhaustive Cheeger search",
            size: n,
            limit: EXHAUSTIVE_CUTOFF,
        });
    }
    let mut adj = vec![0u32; n];
    for &(i, j) in cluster.edges() {
        adj[i as usize] |= 1 << j;
        adj[j as usize] |= 1 << i;
    }
    let degree: Vec<i64> = (0..n).map(|i| cluster.degree(i) as i64).collect();

    let mut set = 0u32;
    let mut size = 0u64;
    let mut boundary = 0i64;
    // best = best_num / best_den, start above any possible ratio
    let (mut best_num, mut best_den) = (u64::MAX, 1u64);
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let bit = 1u32 << v;
        set ^= bit;
        let inside = i64::from((adj[v] & set & !bit).count_ones());
        if set & bit != 0 {
            size += 1;
            boundary += degree[v] - 2 * inside;
        } else {
            size -= 1;
            boundary -= degree[v] - 2 * inside;
        }
        if size >= 1 && 2 * size <= n as u64 {
            let b = boundary as u64;
            if best_num == u64::MAX || b * best_den < best_num * size {
                best_num = b;
                best_den = size;
            }
        }
    }
    Ok(Ratio::new(best_num, best_den))
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn require_pair(cluster: &Cluster) -> Result<()> {
    if cluster.len() < 2 {
        return Err(Error::Domain("bound needs a cluster with |V| >= 2".into()));
    }
    Ok(())
}

fn e1(cluster: &Cluster, bc: BoundaryCondition) -> Result<f64> {
    require_pair(cluster)?;
    Ok(lowest_nonzero(cluster, bc)?.expect("cluster has at least two vertices"))
}

/// Result of checking one inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub eigenvalue: f64,
    pub bound: f64,
    /// Non-negative (up to [`MARGIN_TOL`]) iff the inequality holds.
    pub margin: f64,
}

impl BoundCheck {
    fn lower(eigenvalue: f64, bound: f64) -> Self {
        BoundCheck {
            eigenvalue,
            bound,
            margin: eigenvalue - bound,
        }
    }

    fn upper(eigenvalue: f64, bound: f64) -> Self {
        BoundCheck {
            eigenvalue,
            bound,
            margin: bound - eigenvalue,
        }
    }

    pub fn holds(&self) -> bool {
        self.margin >= -MARGIN_TOL
    }
}

/// `E¹_N ≥ h_Ch²/(4d)`.
pub fn check_cheeger(cluster: &Cluster) -> Result<BoundCheck> {
    let h = ratio_f64(cheeger_constant(cluster)?);
    let d = cluster.dim() as f64;
    Ok(BoundCheck::lower(
        e1(cluster, BoundaryCondition::Neumann)?,
        h * h / (4.0 * d),
    ))
}

/// `E¹_N ≥ 1/(d·|V|²)`.
pub fn check_crude_cheeger(cluster: &Cluster) -> Result<BoundCheck> {
    let e = e1(cluster, BoundaryCondition::Neumann)?;
    Ok(BoundCheck::lower(
        e,
        crude_cheeger_bound(cluster.dim(), cluster.len()),
    ))
}

pub fn crude_cheeger_bound(dim: usize, size: usize) -> f64 {
    let n = size as f64;
    1.0 / (dim as f64 * n * n)
}

/// `E¹_Dt · |V|^(2/d)`.
pub fn fk_ratio(cluster: &Cluster) -> Result<f64> {
    let e = e1(cluster, BoundaryCondition::PseudoDirichlet)?;
    Ok(fk_scale(e, cluster.len(), cluster.dim()))
}

fn fk_scale(e1_dt: f64, size: usize, dim: usize) -> f64 {
    e1_dt * (size as f64).powf(2.0 / dim as f64)
}

/// Smallest Faber–Krahn ratio over the clusters with at least two vertices.
pub fn estimate_fk_constant<'a, I>(clusters: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Cluster>,
{
    let mut best: Option<f64> = None;
    for c in clusters.into_iter().filter(|c| c.len() >= 2) {
        let r = fk_ratio(c)?;
        best = Some(best.map_or(r, |b: f64| b.min(r)));
    }
    best.ok_or_else(|| Error::Domain("no cluster with |V| >= 2".into()))
}

/// `E¹_N(path of n) ≤ 12/n²`.
pub fn linear_bound_check(n: usize, dim: usize) -> Result<BoundCheck> {
    let path = make_linear_cluster(n, dim)?;
    let nf = n as f64;
    Ok(BoundCheck::upper(
        e1(&path, BoundaryCondition::Neumann)?,
        12.0 / (nf * nf),
    ))
}

/// `E¹_D(cube of side l) ≤ 27d/l²`.
pub fn cubic_bound_check(l: usize, dim: usize) -> Result<BoundCheck> {
    let cube = make_cubic_cluster(l, dim)?;
    let lf = l as f64;
    Ok(BoundCheck::upper(
        e1(&cube, BoundaryCondition::Dirichlet)?,
        27.0 * dim as f64 / (lf * lf),
    ))
}

/// Per-cluster row of the isoperimetry report.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoperimetryReport {
    pub cluster: usize,
    pub size: usize,
    pub e1_neumann: f64,
    pub e1_pseudo_dirichlet: f64,
    pub e1_dirichlet: f64,
    /// Present iff `size ≤ EXHAUSTIVE_CUTOFF`.
    pub cheeger: Option<Ratio<u64>>,
    pub cheeger_margin: Option<f64>,
    pub crude_margin: f64,
    pub fk_ratio: f64,
}

impl IsoperimetryReport {
    /// Analyses one cluster; `None` for isolated vertices.
    pub fn analyse(id: usize, cluster: &Cluster) -> Result<Option<Self>> {
        if cluster.len() < 2 {
            return Ok(None);
        }
        let lowest = |bc| e1(cluster, bc).map_err(|e| e.at_cluster(id));
        let e1_n = lowest(BoundaryCondition::Neumann)?;
        let e1_dt = lowest(BoundaryCondition::PseudoDirichlet)?;
        let e1_d = lowest(BoundaryCondition::Dirichlet)?;
        let d = cluster.dim() as f64;
        let cheeger = if cluster.len() <= EXHAUSTIVE_CUTOFF {
            Some(cheeger_constant(cluster)?)
        } else {
            None
        };
        let cheeger_margin = cheeger.map(|h| {
            let h = ratio_f64(h);
            e1_n - h * h / (4.0 * d)
        });
        Ok(Some(IsoperimetryReport {
            cluster: id,
            size: cluster.len(),
            e1_neumann: e1_n,
            e1_pseudo_dirichlet: e1_dt,
            e1_dirichlet: e1_d,
            cheeger,
            cheeger_margin,
            crude_margin: e1_n - crude_cheeger_bound(cluster.dim(), cluster.len()),
            fk_ratio: fk_scale(e1_dt, cluster.len(), cluster.dim()),
        }))
    }

    pub fn cheeger_value(&self) -> Option<f64> {
        self.cheeger.map(ratio_f64)
    }

    /// All recorded margins certify their inequality.
    pub fn certified(&self) -> bool {
        self.cheeger_margin.is_none_or(|m| m >= -MARGIN_TOL) && self.crude_margin >= -MARGIN_TOL
    }

    pub const CSV_HEADER: &'static str =
        "size,e1_N,e1_Dt,e1_D,h_ch,cheeger_margin,crude_margin,fk_ratio";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.size,
            fmt17(self.e1_neumann),
            fmt17(self.e1_pseudo_dirichlet),
            fmt17(self.e1_dirichlet),
            opt(self.cheeger_value()),
            opt(self.cheeger_margin),
            fmt17(self.crude_margin),
            fmt17(self.fk_ratio),
        )
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// The Neumann spectral gap of a path in closed form, `2(1 − cos(π/n))`.
pub fn path_gap(n: usize) -> f64 {
    2.0 * (1.0 - (std::f64::consts::PI / n as f64).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{clusters, sample_graph, LatticeBox};

    /// Direct enumeration of all subsets with an explicit edge scan.
    fn brute_cheeger(c: &Cluster) -> Ratio<u64> {
        let n = c.len();
        let mut best: Option<Ratio<u64>> = None;
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as u64;
            if 2 * size > n as u64 {
                continue;
            }
            let cut = c
                .edges()
                .iter()
                .filter(|&&(i, j)| ((mask >> i) & 1) != ((mask >> j) & 1))
                .count() as u64;
            let r = Ratio::new(cut, size);
            best = Some(best.map_or(r, |b| b.min(r)));
        }
        best.unwrap()
    }

    #[test]
    fn small_cheeger_constants() {
        assert_eq!(
            cheeger_constant(&make_linear_cluster(2, 1).unwrap()).unwrap(),
            Ratio::from_integer(1)
        );
        assert_eq!(
            cheeger_constant(&make_cubic_cluster(2, 2).unwrap()).unwrap(),
            Ratio::from_integer(1)
        );
        for n in 2..=20 {
            let h = cheeger_constant(&make_linear_cluster(n, 1).unwrap()).unwrap();
            assert_eq!(h, Ratio::new(1, (n / 2) as u64), "n = {n}");
        }
    }

    #[test]
    fn gray_code_matches_brute_force() {
        let b = LatticeBox::new(2, 9).unwrap();
        for seed in 0..20 {
            let g = sample_graph(b, 0.45, seed).unwrap();
            for c in clusters(&g).iter().filter(|c| (2..=14).contains(&c.len())) {
                assert_eq!(cheeger_constant(c).unwrap(), brute_cheeger(c));
            }
        }
    }

    #[test]
    fn cheeger_size_limits() {
        assert!(matches!(
            cheeger_constant(&make_linear_cluster(21, 1).unwrap()),
            Err(Error::UnsupportedSize { .. })
        ));
        let x = Cluster::new(1, &[vec![0]], &[]).unwrap();
        assert!(cheeger_constant(&x).is_err());
    }

    #[test]
    fn cheeger_bound_examples() {
        let c = check_cheeger(&make_linear_cluster(2, 1).unwrap()).unwrap();
        assert!((c.eigenvalue - 2.0).abs() < 1e-12 && c.bound == 0.25 && c.holds());
        let c = check_cheeger(&make_cubic_cluster(2, 2).unwrap()).unwrap();
        assert!((c.eigenvalue - 2.0).abs() < 1e-12 && c.bound == 0.125 && c.holds());
    }

    #[test]
    fn crude_bound_examples() {
        let c = check_crude_cheeger(&make_linear_cluster(100, 1).unwrap()).unwrap();
        assert!((c.eigenvalue - path_gap(100)).abs() < 1e-12);
        assert!((c.eigenvalue - 9.8688e-4).abs() < 1e-7);
        assert_eq!(c.bound, 1e-4);
        let c = check_crude_cheeger(&make_linear_cluster(2, 2).unwrap()).unwrap();
        assert!(c.holds() && c.bound == 0.125);
        let c = check_crude_cheeger(&make_cubic_cluster(3, 2).unwrap()).unwrap();
        assert!((c.eigenvalue - 1.0).abs() < 1e-12);
        assert_eq!(c.bound, 1.0 / 162.0);
    }

    #[test]
    fn crude_bound_is_weaker_on_paths() {
        for n in 2..=20 {
            let path = make_linear_cluster(n, 1).unwrap();
            let h = ratio_f64(cheeger_constant(&path).unwrap());
            assert!(crude_cheeger_bound(1, n) <= h * h / 4.0);
        }
    }

    #[test]
    fn fk_examples() {
        let r = fk_ratio(&make_linear_cluster(2, 1).unwrap()).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        let b = LatticeBox::new(2, 10).unwrap();
        let cs = clusters(&sample_graph(b, 0.35, 3).unwrap());
        let est = estimate_fk_constant(&cs).unwrap();
        assert!(est > 0.0);
        for c in cs.iter().filter(|c| c.len() >= 2) {
            assert!(fk_ratio(c).unwrap() >= est);
        }
        let single = [Cluster::new(2, &[vec![0, 0]], &[]).unwrap()];
        assert!(estimate_fk_constant(&single).is_err());
    }

    #[test]
    fn variational_examples() {
        let c = linear_bound_check(2, 1).unwrap();
        assert!((c.eigenvalue - 2.0).abs() < 1e-12);
        assert_eq!(c.bound, 3.0);
        let c = cubic_bound_check(3, 2).unwrap();
        assert_eq!(c.bound, 6.0);
        assert!(c.holds());
        for n in 2..=60 {
            let c = linear_bound_check(n, 1).unwrap();
            assert!(c.holds());
            assert!((c.eigenvalue - path_gap(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn path_gap_approaches_pi_squared_from_below() {
        let pi2 = std::f64::consts::PI.powi(2);
        let mut prev = 0.0;
        for n in 2..=300 {
            let scaled = path_gap(n) * (n * n) as f64;
            assert!(scaled < pi2 + 1e-8);
            assert!(scaled >= prev - 1e-8);
            assert!(scaled <= 12.0);
            prev = scaled;
        }
        assert!((prev - pi2).abs() < 1e-3);
    }

    #[test]
    fn report_rows() {
        let r = IsoperimetryReport::analyse(0, &make_cubic_cluster(2, 2).unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(r.cheeger, Some(Ratio::from_integer(1)));
        assert!(r.certified());
        assert_eq!(r.csv_row().split(',').count(), 8);
        let x = Cluster::new(2, &[vec![0, 0]], &[]).unwrap();
        assert!(IsoperimetryReport::analyse(1, &x).unwrap().is_none());
    }
}
