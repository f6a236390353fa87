//! Finite boxes of the integer lattice, bond-percolation realizations on
//! them, and their decomposition into clusters.
//!
//! Vertices of a box of side `L` in `d` dimensions are linearized row-major
//! with the first coordinate fastest: `x ↦ Σ_ν x_ν L^ν`. Candidate bonds are
//! addressed by a slot `v·d + ν` joining `v` to `v + e_ν`; slots whose far
//! endpoint leaves the box are never open. The slot number is also the
//! counter fed to the random stream, so a bond's state depends only on
//! `(seed, slot)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;

/// Axis-aligned box `{0, …, L-1}^d` with free boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    dim: usize,
    side: usize,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if side == 0 {
            return Err(Error::Config("side length must be at least 1".into()));
        }
        let fits = u32::try_from(dim)
            .ok()
            .and_then(|e| side.checked_pow(e))
            .and_then(|n| n.checked_mul(dim))
            .is_some();
        if !fits {
            return Err(Error::Config(format!(
                "box {side}^{dim} is too large to index"
            )));
        }
        Ok(LatticeBox { dim, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// `L^d`.
    pub fn vertex_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// `d · L^(d-1) · (L-1)`.
    pub fn candidate_edge_count(&self) -> usize {
        self.dim * self.side.pow(self.dim as u32 - 1) * (self.side - 1)
    }

    /// Number of bond slots, including the ones that leave the box.
    pub fn slot_count(&self) -> usize {
        self.dim * self.vertex_count()
    }

    /// `L^axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.side.pow(axis as u32)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords.iter().rev().fold(0, |acc, &x| acc * self.side + x)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim);
        for _ in 0..self.dim {
            out.push(index % self.side);
            index /= self.side;
        }
        out
    }

    #[inline]
    fn coord(&self, index: usize, axis: usize) -> usize {
        (index / self.stride(axis)) % self.side
    }

    /// Endpoints of the bond in `slot`, or `None` when it leaves the box.
    #[inline]
    pub fn slot_endpoints(&self, slot: usize) -> Option<(usize, usize)> {
        let v = slot / self.dim;
        let axis = slot % self.dim;
        if self.coord(v, axis) + 1 < self.side {
            Some((v, v + self.stride(axis)))
        } else {
            None
        }
    }

    /// Slot of the bond `[u, w]`, if the two vertices are lattice neighbours.
    pub fn slot_of(&self, u: usize, w: usize) -> Option<usize> {
        let (lo, hi) = if u < w { (u, w) } else { (w, u) };
        (0..self.dim).find_map(|axis| {
            let s = lo * self.dim + axis;
            match self.slot_endpoints(s) {
                Some((_, far)) if far == hi => Some(s),
                _ => None,
            }
        })
    }

    /// All candidate bonds as `(slot, lower, upper)` in slot order.
    pub fn candidate_edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.slot_count()).filter_map(move |s| self.slot_endpoints(s).map(|(u, w)| (s, u, w)))
    }

    /// Number of lattice neighbours of `v` inside the box.
    pub fn neighbour_count(&self, v: usize) -> usize {
        (0..self.dim)
            .map(|axis| {
                let x = self.coord(v, axis);
                usize::from(x > 0) + usize::from(x + 1 < self.side)
            })
            .sum()
    }
}

/// How a graph came to be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSource {
    Sampled { p: f64, seed: u64 },
    Fixture,
}

/// One realization of the percolation graph restricted to a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationGraph {
    lattice: LatticeBox,
    source: GraphSource,
    open: Vec<bool>,
}

impl PercolationGraph {
    /// Builds a graph from an explicit list of open bonds given by linear
    /// vertex indices.
    pub fn from_open_edges(lattice: LatticeBox, edges: &[(usize, usize)]) -> Result<Self> {
        let mut open = vec![false; lattice.slot_count()];
        let n = lattice.vertex_count();
        for &(u, w) in edges {
            if u >= n || w >= n {
                return Err(Error::Domain(format!("edge [{u}, {w}] outside the box")));
            }
            let slot = lattice
                .slot_of(u, w)
                .ok_or_else(|| Error::Domain(format!("[{u}, {w}] is not a lattice bond")))?;
            open[slot] = true;
        }
        Ok(PercolationGraph {
            lattice,
            source: GraphSource::Fixture,
            open,
        })
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn source(&self) -> GraphSource {
        self.source
    }

    pub fn is_open(&self, slot: usize) -> bool {
        self.open[slot]
    }

    /// Open bonds as `(lower, upper)` vertex pairs in slot order.
    pub fn open_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.open
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .filter_map(|(s, _)| self.lattice.slot_endpoints(s))
    }

    pub fn open_edge_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn dump(&self) -> GraphDump {
        let (p, seed) = match self.source {
            GraphSource::Sampled { p, seed } => (Some(p), Some(seed)),
            GraphSource::Fixture => (None, None),
        };
        GraphDump {
            d: self.lattice.dim,
            side: self.lattice.side,
            p,
            seed,
            open_edges: self.open_edges().map(|(u, w)| [u, w]).collect(),
        }
    }
}

/// Debug dump of a realization with linearized vertex indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub d: usize,
    #[serde(rename = "L")]
    pub side: usize,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub open_edges: Vec<[usize; 2]>,
}

/// Samples a realization: every candidate bond is open independently with
/// probability `p`. The endpoints 0 and 1 are accepted for fixtures.
pub fn sample_graph(lattice: LatticeBox, p: f64, seed: u64) -> Result<PercolationGraph> {
    sample_graph_with(lattice, p, seed, Execution::default())
}

pub fn sample_graph_with(
    lattice: LatticeBox,
    p: f64,
    seed: u64,
    exec: Execution,
) -> Result<PercolationGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "bond probability {p} outside [0, 1]"
        )));
    }
    let mut open = rng::bernoulli_mask(seed, lattice.slot_count(), p, exec);
    for (slot, o) in open.iter_mut().enumerate() {
        if *o && lattice.slot_endpoints(slot).is_none() {
            *o = false;
        }
    }
    Ok(PercolationGraph {
        lattice,
        source: GraphSource::Sampled { p, seed },
        open,
    })
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// A maximally connected component.
///
/// Vertices are stored in ascending order of their linear index in the
/// parent box, so local and global orders agree. Edges use local indices
/// `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    dim: usize,
    coords: Vec<i64>,
    sites: Vec<usize>,
    edges: Vec<(u32, u32)>,
    degree: Vec<u8>,
}

impl Cluster {
    /// Builds a cluster from lattice points and local edges, checking that
    /// every edge is a unit lattice step and the result is connected.
    pub fn new(dim: usize, points: &[Vec<i64>], edges: &[(usize, usize)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("a cluster needs at least one vertex".into()));
        }
        if dim == 0 || points.iter().any(|x| x.len() != dim) {
            return Err(Error::Domain("point dimension mismatch".into()));
        }
        let n = points.len();
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::Domain(format!("bad edge ({a}, {b})")));
            }
            let step: i64 = points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| (x - y).abs())
                .sum();
            if step != 1 {
                return Err(Error::Domain(format!("({a}, {b}) is not a lattice bond")));
            }
            norm.push((a.min(b) as u32, a.max(b) as u32));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("duplicate edge".into()));
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in &norm {
            uf.union(a as usize, b as usize);
        }
        let root = uf.find(0);
        if (1..n).any(|v| uf.find(v) != root) {
            return Err(Error::Domain("cluster is not connected".into()));
        }
        let mut degree = vec![0u8; n];
        for &(a, b) in &norm {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        Ok(Cluster {
            dim,
            coords: points.concat(),
            sites: (0..n).collect(),
            edges: norm,
            degree,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn is_isolated(&self) -> bool {
        self.len() == 1
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Linear indices of the vertices in the parent box.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        usize::from(self.degree[i])
    }

    pub fn degrees(&self) -> &[u8] {
        &self.degree
    }

    /// `(-1)^(Σ|x_ν|)` as a sign.
    pub fn parity_sign(&self, i: usize) -> i32 {
        if self.point(i).iter().map(|x| x.abs()).sum::<i64>() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Largest `j - i` over edges, i.e. the half-bandwidth of any Laplacian.
    pub fn bandwidth(&self) -> usize {
        self.edges
            .iter()
            .map(|&(i, j)| (j - i) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Neighbour lists in local indices.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for &(i, j) in &self.edges {
            adj[i as usize].push(j as usize);
            adj[j as usize].push(i as usize);
        }
        adj
    }
}

/// Decomposes a realization into clusters, ordered by smallest vertex index.
/// Isolated vertices are singleton clusters.
pub fn clusters(graph: &PercolationGraph) -> Vec<Cluster> {
    let lattice = graph.lattice;
    let n = lattice.vertex_count();
    let d = lattice.dim;
    let mut uf = UnionFind::new(n);
    for (u, w) in graph.open_edges() {
        uf.union(u, w);
    }

    const UNSET: usize = usize::MAX;
    let mut id_of_root = vec![UNSET; n];
    let mut cluster_of = vec![0usize; n];
    let mut local = vec![0u32; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if id_of_root[r] == UNSET {
            id_of_root[r] = members.len();
            members.push(Vec::new());
        }
        let c = id_of_root[r];
        cluster_of[v] = c;
        local[v] = members[c].len() as u32;
        members[c].push(v);
    }

    let mut edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); members.len()];
    for (u, w) in graph.open_edges() {
        edges[cluster_of[u]].push((local[u], local[w]));
    }

    members
        .into_iter()
        .zip(edges)
        .map(|(sites, mut es)| {
            es.sort_unstable();
            let mut degree = vec![0u8; sites.len()];
            for &(i, j) in &es {
                degree[i as usize] += 1;
                degree[j as usize] += 1;
            }
            let mut coords = Vec::with_capacity(sites.len() * d);
            for &s in &sites {
                coords.extend(lattice.coords(s).into_iter().map(|x| x as i64));
            }
            Cluster {
                dim: d,
                coords,
                sites,
                edges: es,
                degree,
            }
        })
        .collect()
}

/// The linear cluster: a path of `n` vertices along the first axis.
pub fn make_linear_cluster(n: usize, dim: usize) -> Result<Cluster> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "linear cluster needs n >= 2, got {n}"
        )));
    }
    let points: Vec<Vec<i64>> = (0..n)
        .map(|k| {
            let mut x = vec![0i64; dim.max(1)];
            x[0] = k as i64;
            x
        })
        .collect();
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|k| (k, k + 1)).collect();
    Cluster::new(dim, &points, &edges)
}

/// The cubic cluster: every bond of an `l^d` box open.
pub fn make_cubic_cluster(l: usize, dim: usize) -> Result<Cluster> {
    if l < 2 {
        return Err(Error::Domain(format!(
            "cubic cluster needs l >= 2, got {l}"
        )));
    }
    let lattice = LatticeBox::new(dim, l)?;
    let graph = sample_graph_with(lattice, 1.0, 0, Execution::Sequential)?;
    let mut cs = clusters(&graph);
    debug_assert_eq!(cs.len(), 1);
    Ok(cs.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Depth-first component sizes straight from the open-edge list.
    fn dfs_component_sizes(graph: &PercolationGraph) -> Vec<usize> {
        let n = graph.lattice().vertex_count();
        let mut adj = vec![Vec::new(); n];
        for (u, w) in graph.open_edges() {
            adj[u].push(w);
            adj[w].push(u);
        }
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }

    #[test]
    fn box_counts() {
        let b = LatticeBox::new(3, 5).unwrap();
        assert_eq!(b.vertex_count(), 125);
        assert_eq!(b.candidate_edge_count(), 3 * 25 * 4);
        assert_eq!(b.candidate_edges().count(), b.candidate_edge_count());
        for v in 0..b.vertex_count() {
            let k = b.neighbour_count(v);
            assert!((3..=6).contains(&k));
        }
        assert_eq!(b.index(&[1, 2, 3]), 1 + 2 * 5 + 3 * 25);
        assert_eq!(b.coords(1 + 2 * 5 + 3 * 25), vec![1, 2, 3]);
    }

    #[test]
    fn invalid_boxes() {
        assert!(LatticeBox::new(0, 4).is_err());
        assert!(LatticeBox::new(2, 0).is_err());
        assert!(LatticeBox::new(64, 1 << 20).is_err());
    }

    #[test]
    fn endpoint_probabilities() {
        let b = LatticeBox::new(1, 4).unwrap();
        assert_eq!(sample_graph(b, 0.0, 9).unwrap().open_edge_count(), 0);
        let full = sample_graph(b, 1.0, 9).unwrap();
        assert_eq!(full.open_edge_count(), 3);
        assert!(sample_graph(b, 1.2, 0).is_err());
        assert!(sample_graph(b, f64::NAN, 0).is_err());
    }

    #[test]
    fn isolated_vertices_are_singletons() {
        let b = LatticeBox::new(2, 5).unwrap();
        let g = sample_graph(b, 0.0, 1).unwrap();
        let cs = clusters(&g);
        assert_eq!(cs.len(), 25);
        assert!(cs.iter().all(|c| c.is_isolated() && c.edge_count() == 0));
    }

    #[test]
    fn full_path_is_one_cluster() {
        let b = LatticeBox::new(1, 4).unwrap();
        let cs = clusters(&sample_graph(b, 1.0, 0).unwrap());
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].len(), 4);
    }

    #[test]
    fn hand_enumerated_fixture() {
        let b = LatticeBox::new(2, 3).unwrap();
        let at = |x: usize, y: usize| b.index(&[x, y]);
        let edges = [
            (at(0, 0), at(0, 1)),
            (at(0, 1), at(0, 2)),
            (at(2, 0), at(2, 1)),
        ];
        let g = PercolationGraph::from_open_edges(b, &edges).unwrap();
        let cs = clusters(&g);
        let mut sizes: Vec<usize> = cs.iter().map(Cluster::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![3, 2, 1, 1, 1, 1]);
        let mut oracle = dfs_component_sizes(&g);
        oracle.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, oracle);
        // ordered by smallest vertex
        let heads: Vec<usize> = cs.iter().map(|c| c.sites()[0]).collect();
        assert!(heads.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_non_bonds() {
        let b = LatticeBox::new(2, 3).unwrap();
        assert!(PercolationGraph::from_open_edges(b, &[(0, 4)]).is_err());
        assert!(PercolationGraph::from_open_edges(b, &[(2, 3)]).is_err());
        assert!(PercolationGraph::from_open_edges(b, &[(0, 9)]).is_err());
    }

    #[test]
    fn linear_clusters() {
        let l2 = make_linear_cluster(2, 1).unwrap();
        assert_eq!(l2.edge_count(), 1);
        assert_eq!(l2.degrees(), &[1, 1]);
        let l5 = make_linear_cluster(5, 3).unwrap();
        assert_eq!(l5.degrees(), &[1, 2, 2, 2, 1]);
        let l3 = make_linear_cluster(3, 2).unwrap();
        assert_eq!(l3.edge_count(), 2);
        assert!(l3.point(2) == [2, 0]);
        assert!(make_linear_cluster(1, 1).is_err());
    }

    #[test]
    fn cubic_clusters() {
        let q = make_cubic_cluster(2, 2).unwrap();
        assert_eq!((q.len(), q.edge_count()), (4, 4));
        assert!(q.degrees().iter().all(|&k| k == 2));
        assert_eq!(
            make_cubic_cluster(2, 1).unwrap(),
            make_linear_cluster(2, 1).unwrap()
        );
        let q3 = make_cubic_cluster(3, 3).unwrap();
        assert_eq!((q3.len(), q3.edge_count()), (27, 54));
        assert!(make_cubic_cluster(1, 2).is_err());
    }

    #[test]
    fn cluster_validation() {
        let pts = vec![vec![0i64, 0], vec![1, 0], vec![3, 0]];
        assert!(Cluster::new(2, &pts, &[(0, 1)]).is_err()); // disconnected
        assert!(Cluster::new(2, &pts, &[(0, 1), (1, 2)]).is_err()); // not a bond
        assert!(Cluster::new(2, &[], &[]).is_err());
        let c = Cluster::new(2, &[vec![4, -1]], &[]).unwrap();
        assert!(c.is_isolated());
        assert_eq!(c.parity_sign(0), -1);
    }

    #[test]
    fn dump_uses_linear_indices() {
        let b = LatticeBox::new(2, 2).unwrap();
        let g = PercolationGraph::from_open_edges(b, &[(0, 2), (1, 0)]).unwrap();
        let dump = g.dump();
        assert_eq!(dump.open_edges, vec![[0, 1], [0, 2]]);
        let json = serde_json::to_value(&dump).unwrap();
        assert_eq!(json["L"], 2);
        assert!(json["p"].is_null());
    }
}
