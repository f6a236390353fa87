//! Task orchestration and persistence.
//!
//! A run writes its outputs into one directory and finishes with
//! `manifest.json`, which carries the effective config (without the output
//! directory, so relocated reruns compare equal) and the SHA-256 of every
//! output file. Outputs written before a failure are kept and the manifest
//! is marked failed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, TailMode, Task};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::isoperimetry::{fmt17, IsoperimetryReport};
use crate::laplacian::{chain_check, reflection_check, BoundaryCondition};
use crate::lattice::clusters;
use crate::spectral::{
    energy_grid, pool_ensemble, zero_tolerance, EmpiricalIDS, Ensemble, ZeroModes,
};
use crate::tails::{cluster_size_decay_with, fit_tail, Edge, TailData, TailWindow};

/// Clusters up to this size get the eigenvalue-level reflection check.
pub const REFLECTION_MAX_SIZE: usize = 500;
pub const REFLECTION_TOL: f64 = 1e-9;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputEntry>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

/// Process exit code for an error: 2 for caller mistakes, 3 for failures
/// during the computation.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::UnsupportedSize { .. } => 2,
        _ => 3,
    }
}

struct Outputs {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Outputs {
    fn write(&mut self, file: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.entries.push(OutputEntry {
            file: file.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(file, text.as_bytes())
    }
}

/// Runs the configured task into `config.out_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let dir = config
        .out_dir
        .clone()
        .ok_or_else(|| Error::Config("no output directory given".into()))?;
    run_with(config, &dir, Execution::default())
}

pub fn run_with(config: &ExperimentConfig, out_dir: &Path, exec: Execution) -> Result<RunReport> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut effective = config.resolved();
    effective.out_dir = None;
    let mut out = Outputs {
        dir: out_dir.to_path_buf(),
        entries: Vec::new(),
    };
    let result = execute(&effective, &mut out, exec);
    let manifest = Manifest {
        config: effective,
        outputs: out.entries,
        status: if result.is_ok() { "ok" } else { "failed" }.into(),
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let path = out_dir.join(MANIFEST);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    result.map(|()| RunReport {
        out_dir: out_dir.to_path_buf(),
        manifest,
    })
}

fn ensemble(config: &ExperimentConfig) -> Result<Ensemble> {
    Ok(Ensemble {
        lattice: config.lattice()?,
        p: config.p,
        master_seed: config.seed,
        realizations: config.realizations,
    })
}

fn execute(config: &ExperimentConfig, out: &mut Outputs, exec: Execution) -> Result<()> {
    let ens = ensemble(config)?;
    if config.emit_graph && (config.task != Task::Decay) {
        for i in 0..ens.realizations {
            out.write_json(&format!("graph_{i:05}.json"), &ens.graph(i)?.dump())?;
        }
    }
    let mut pooled: Option<Vec<EmpiricalIDS>> = None;
    if config.task.includes(Task::Ids) {
        let ids = pool_ensemble(&ens, &config.bcs, exec)?;
        write_ids(config, &ids, out)?;
        pooled = Some(ids);
    }
    if config.task.includes(Task::Verify) {
        write_verify(config, &ens, out, exec)?;
    }
    if config.task.includes(Task::Tails) {
        let ids = match (config.tail.mode, pooled) {
            (TailMode::Empirical, None) => pool_ensemble(&ens, &config.bcs, exec)?,
            (_, p) => p.unwrap_or_default(),
        };
        write_tails(config, &ids, out)?;
    }
    if config.task.includes(Task::Decay) {
        let radius = config
            .decay
            .radius
            .unwrap_or_else(|| crate::tails::default_radius(config.dim));
        let fit = cluster_size_decay_with(
            config.dim,
            config.p,
            config.decay.samples,
            config.seed,
            radius,
            exec,
        )?;
        out.write_json(
            "decay.json",
            &json!({
                "d": fit.d,
                "p": fit.p,
                "samples": fit.samples,
                "zeta_hat": fit.zeta_hat,
                "theta_hat": fit.theta_hat,
                "r2": fit.r2,
                "seed": fit.seed,
                "radius": radius,
                "fit_range": fit.fit_range,
                "truncated": fit.truncated,
            }),
        )?;
    }
    Ok(())
}

fn write_ids(config: &ExperimentConfig, pooled: &[EmpiricalIDS], out: &mut Outputs) -> Result<()> {
    let grid = energy_grid(config.dim, config.grid);
    for ids in pooled {
        let table = ids.table(&grid)?;
        let mut csv = String::from("E,N\n");
        for (e, v) in table.energies.iter().zip(&table.values) {
            let _ = writeln!(csv, "{},{}", fmt17(*e), fmt17(*v));
        }
        let tag = ids.bc().tag();
        out.write(&format!("ids_{tag}.csv"), csv.as_bytes())?;
        out.write_json(
            &format!("ids_summary_{tag}.json"),
            &json!({
                "bc": ids.bc(),
                "p": config.p,
                "d": config.dim,
                "L": config.side,
                "realizations": config.realizations,
                "seed": config.seed,
                "kappa_hat": ids.value(0.0)?,
                "total_vertices": ids.total_vertices(),
                "large_clusters": ids.large_clusters().len(),
                "grid_collisions": table.collisions.len(),
            }),
        )?;
    }
    Ok(())
}

/// Per-realization verification counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyRow {
    pub realization: usize,
    pub seed: u64,
    pub clusters: usize,
    pub zero_modes: usize,
    pub reflection_checked: usize,
    pub reflection_max_dev: f64,
    pub reflection_failures: usize,
    pub chain_failures: usize,
    pub cheeger_checked: usize,
    pub cheeger_failures: usize,
    pub crude_failures: usize,
    pub fk_min: Option<f64>,
}

impl VerifyRow {
    pub const CSV_HEADER: &'static str = "realization,seed,clusters,zero_modes,reflection_checked,reflection_max_dev,reflection_failures,chain_failures,cheeger_checked,cheeger_failures,crude_failures,fk_min,violations";

    pub fn violations(&self) -> usize {
        usize::from(self.zero_modes != self.clusters)
            + self.reflection_failures
            + self.chain_failures
            + self.cheeger_failures
            + self.crude_failures
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.realization,
            self.seed,
            self.clusters,
            self.zero_modes,
            self.reflection_checked,
            fmt17(self.reflection_max_dev),
            self.reflection_failures,
            self.chain_failures,
            self.cheeger_checked,
            self.cheeger_failures,
            self.crude_failures,
            self.fk_min.map(fmt17).unwrap_or_default(),
            self.violations(),
        )
    }
}

/// Runs every per-cluster check on one realization.
pub fn verify_realization(
    ens: &Ensemble,
    index: usize,
    grid: &[f64],
) -> Result<(VerifyRow, Vec<IsoperimetryReport>)> {
    let graph = ens.graph(index)?;
    let dim = ens.lattice.dim();
    let tol = zero_tolerance(dim);
    let cs = clusters(&graph);
    let zero = ZeroModes::from_clusters(&cs, graph.lattice().vertex_count(), tol)?;
    let mut row = VerifyRow {
        realization: index,
        seed: ens.seed(index),
        clusters: zero.clusters,
        zero_modes: zero.zero_modes,
        ..VerifyRow::default()
    };
    let mut reports = Vec::new();
    for (id, c) in cs.iter().enumerate() {
        if c.len() <= REFLECTION_MAX_SIZE {
            let r = reflection_check(c, REFLECTION_TOL).map_err(|e| e.at_cluster(id))?;
            row.reflection_checked += 1;
            row.reflection_max_dev = row.reflection_max_dev.max(r.max_deviation);
            row.reflection_failures += usize::from(!r.holds);
        }
        let chain = chain_check(c, grid, tol).map_err(|e| e.at_cluster(id))?;
        row.chain_failures += usize::from(!chain.holds);
        if let Some(rep) = IsoperimetryReport::analyse(id, c)? {
            if let Some(m) = rep.cheeger_margin {
                row.cheeger_checked += 1;
                row.cheeger_failures += usize::from(m < -crate::isoperimetry::MARGIN_TOL);
            }
            row.crude_failures += usize::from(rep.crude_margin < -crate::isoperimetry::MARGIN_TOL);
            row.fk_min = Some(row.fk_min.map_or(rep.fk_ratio, |f| f.min(rep.fk_ratio)));
            reports.push(rep);
        }
    }
    Ok((row, reports))
}

fn write_verify(
    config: &ExperimentConfig,
    ens: &Ensemble,
    out: &mut Outputs,
    exec: Execution,
) -> Result<()> {
    let grid = energy_grid(config.dim, config.grid);
    let results = exec.map(ens.realizations, |i| verify_realization(ens, i, &grid));
    let mut verify = format!("{}\n", VerifyRow::CSV_HEADER);
    let mut iso = format!("realization,{}\n", IsoperimetryReport::CSV_HEADER);
    let mut violations = 0;
    for r in results {
        let (row, reports) = r?;
        violations += row.violations();
        let _ = writeln!(verify, "{}", row.csv_row());
        for rep in reports {
            let _ = writeln!(iso, "{},{}", row.realization, rep.csv_row());
        }
    }
    out.write("verify.csv", verify.as_bytes())?;
    out.write("isoperimetry.csv", iso.as_bytes())?;
    if violations > 0 {
        log::warn!("verification found {violations} violations");
    }
    Ok(())
}

fn write_tails(
    config: &ExperimentConfig,
    pooled: &[EmpiricalIDS],
    out: &mut Outputs,
) -> Result<()> {
    use BoundaryCondition::*;
    let window = config.tail.window();
    let jobs: Vec<(TailData<'_>, BoundaryCondition, Edge)> = match config.tail.mode {
        TailMode::Analytic => {
            let data = TailData::Series { p: config.p };
            vec![
                (data, Neumann, Edge::Lower),
                (data, PseudoDirichlet, Edge::Lower),
                (data, Dirichlet, Edge::Upper),
                (data, PseudoDirichlet, Edge::Upper),
            ]
        }
        TailMode::Empirical => pooled
            .iter()
            .flat_map(|ids| {
                [Edge::Lower, Edge::Upper].map(|e| (TailData::Empirical(ids), ids.bc(), e))
            })
            .collect(),
    };
    for (data, bc, edge) in jobs {
        let name = format!("tail_{}_{}.json", bc.tag(), edge_tag(edge));
        let report = tail_report(config, data, bc, edge, window)?;
        out.write_json(&name, &report)?;
    }
    Ok(())
}

fn edge_tag(edge: Edge) -> &'static str {
    match edge {
        Edge::Lower => "lower",
        Edge::Upper => "upper",
    }
}

/// Fit report, or a status record when the window holds too few points.
fn tail_report(
    config: &ExperimentConfig,
    data: TailData<'_>,
    bc: BoundaryCondition,
    edge: Edge,
    window: TailWindow,
) -> Result<serde_json::Value> {
    match fit_tail(data, bc, edge, window) {
        Ok(fit) => {
            let halved = fit_tail(data, bc, edge, window.halved())
                .ok()
                .map(|h| h.slope);
            Ok(json!({
                "bc": fit.bc,
                "edge": fit.edge,
                "d": fit.d,
                "p": config.p,
                "window": fit.window,
                "slope": fit.slope,
                "expected_slope": fit.expected_slope,
                "residual": fit.residual,
                "points": fit.points,
                "halved_window_slope": halved,
                "status": "ok",
            }))
        }
        Err(Error::InsufficientData { usable, required }) => Ok(json!({
            "bc": bc,
            "edge": edge,
            "d": config.dim,
            "p": config.p,
            "window": [window.lo, window.hi],
            "expected_slope": crate::tails::expected_slope(bc, edge, config.dim),
            "points": usable,
            "required": required,
            "status": "insufficient_data",
        })),
        Err(e) => Err(e),
    }
}
