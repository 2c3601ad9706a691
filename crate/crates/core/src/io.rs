//! File formats: run configurations, graphs, sample files, CSV matrices and
//! run manifests.
//!
//! Matrices are comma-separated and row-major with an optional header row.
//! Every JSON document carries a `schema_version`; node and group indices are
//! 0-based.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bdrj::{ChainOutput, SamplerConfig};
use crate::error::{Error, Result};
use crate::functional::SmootherConfig;
use crate::graph::{BlockGraph, EdgePrior, Graph, Multigraph, Partition};
use crate::gwishart::{ExactSamplerOptions, GWishartParams};
use crate::posterior::{GraphEstimate, InclusionMatrix};
use crate::simbench::{ExperimentConfig, ReplicateResult, SyntheticScenario};

pub const SCHEMA_VERSION: u32 = 1;

fn path_string(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a JSON document, reporting syntax and schema errors with their line.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        path: path_string(path),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::other)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV matrix; `header` skips the first row.
pub fn read_matrix_csv(path: &Path, header: bool) -> Result<DMatrix<f64>> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path_string(path),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    path: path_string(path),
                    line,
                    message: format!("column {}: cannot parse {field:?} as a number", col + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    path: path_string(path),
                    line,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path_string(path),
            line: 1,
            message: "no data rows".into(),
        });
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Writes a matrix as CSV, with `header` as the first row when given.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>, header: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::other)?;
    if let Some(h) = header {
        w.write_record(h).map_err(std::io::Error::other)?;
    }
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(std::io::Error::other)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid stored as one column or one row of numbers.
pub fn read_grid_csv(path: &Path, header: bool) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path, header)?;
    if m.ncols() == 1 || m.nrows() == 1 {
        Ok(m.iter().copied().collect())
    } else {
        Err(Error::Parse {
            path: path_string(path),
            line: 1,
            message: format!(
                "expected a single row or column, found {}x{}",
                m.nrows(),
                m.ncols()
            ),
        })
    }
}

/// Resolves `p` against the directory of the configuration file.
pub fn resolve_path(config_path: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn square_matrix(rows: &[Vec<f64>], p: usize) -> Result<DMatrix<f64>> {
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidConfig(format!(
            "D must be a {p} x {p} matrix"
        )));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

/// Graph on disk, optionally with its block structure and selection data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub schema_version: u32,
    pub p: usize,
    /// Group sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<usize>>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multigraph_edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bfdr: Option<f64>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            p: g.p(),
            partition: None,
            edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect(),
            multigraph_edges: None,
            tau: None,
            bfdr: None,
        }
    }

    pub fn from_block_graph(g: &BlockGraph) -> Self {
        Self {
            partition: Some(g.partition().sizes().to_vec()),
            multigraph_edges: Some(
                g.multigraph()
                    .edges()
                    .into_iter()
                    .map(|(l, m)| [l, m])
                    .collect(),
            ),
            ..Self::from_graph(g.graph())
        }
    }

    /// Attaches the partition and, when the graph is block structured, its
    /// multigraph.
    pub fn with_partition(mut self, partition: &Arc<Partition>) -> Result<Self> {
        let g = self.to_graph()?;
        self.partition = Some(partition.sizes().to_vec());
        if let Ok(bg) = BlockGraph::try_from_graph(g, partition) {
            self.multigraph_edges = Some(
                bg.multigraph()
                    .edges()
                    .into_iter()
                    .map(|(l, m)| [l, m])
                    .collect(),
            );
        }
        Ok(self)
    }

    pub fn from_estimate(est: &GraphEstimate) -> Self {
        Self {
            tau: est.tau,
            bfdr: est.bfdr,
            ..Self::from_graph(&est.graph)
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(self.p, &edges)
    }

    /// The graph as a block graph; requires a partition.
    pub fn to_block_graph(&self) -> Result<BlockGraph> {
        let sizes = self
            .partition
            .clone()
            .ok_or_else(|| Error::InvalidConfig("graph file has no partition".into()))?;
        let partition = Arc::new(Partition::from_sizes(sizes)?);
        BlockGraph::try_from_graph(self.to_graph()?, &partition)
    }
}

pub fn read_graph_json(path: &Path) -> Result<Graph> {
    let file: GraphFile = read_json(path)?;
    check_schema(path, file.schema_version)?;
    file.to_graph()
}

fn check_schema(path: &Path, version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Parse {
            path: path_string(path),
            line: 1,
            message: format!("unsupported schema_version {version} (expected {SCHEMA_VERSION})"),
        });
    }
    Ok(())
}

/// Inclusion frequencies as a `p x p` CSV (symmetric, zero diagonal).
pub fn write_inclusion_csv(path: &Path, pm: &InclusionMatrix) -> Result<()> {
    write_matrix_csv(path, pm.matrix(), None)
}

pub fn read_inclusion_csv(path: &Path) -> Result<InclusionMatrix> {
    InclusionMatrix::from_matrix(read_matrix_csv(path, false)?)
}

/// Recorded draws of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleFile {
    pub schema_version: u32,
    pub p: usize,
    pub partition: Vec<usize>,
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub recorded_iterations: Vec<usize>,
    /// Multigraph edge list of each recorded draw.
    pub multigraphs: Vec<Vec<[usize; 2]>>,
    /// Row-major precision matrix of each recorded draw, when kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precisions: Option<Vec<Vec<f64>>>,
}

impl SampleFile {
    pub fn from_output(out: &ChainOutput<f64>, cfg: &SamplerConfig<f64>) -> Self {
        let p = out.partition.p();
        Self {
            schema_version: SCHEMA_VERSION,
            p,
            partition: out.partition.sizes().to_vec(),
            iterations: cfg.iterations,
            burn_in: cfg.burn_in,
            thinning: cfg.thinning,
            seed: cfg.seed,
            acceptance_rate: out.acceptance_rate(),
            recorded_iterations: out.recorded_iterations.clone(),
            multigraphs: out
                .graphs
                .iter()
                .map(|g| {
                    g.multigraph()
                        .edges()
                        .into_iter()
                        .map(|(l, m)| [l, m])
                        .collect()
                })
                .collect(),
            precisions: (!out.precisions.is_empty()).then(|| {
                out.precisions
                    .iter()
                    .map(|k| k.transpose().iter().copied().collect())
                    .collect()
            }),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file: Self = read_json(path)?;
        check_schema(path, file.schema_version)?;
        Ok(file)
    }

    pub fn partition(&self) -> Result<Arc<Partition>> {
        Ok(Arc::new(Partition::from_sizes(self.partition.clone())?))
    }

    pub fn graphs(&self) -> Result<Vec<BlockGraph>> {
        let partition = self.partition()?;
        self.multigraphs
            .iter()
            .map(|edges| {
                let edges: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                Ok(crate::graph::rho(&Multigraph::from_edges(
                    partition.clone(),
                    &edges,
                )?))
            })
            .collect()
    }

    pub fn precision_matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        let p = self.p;
        self.precisions
            .iter()
            .flatten()
            .map(|flat| {
                if flat.len() != p * p {
                    return Err(Error::DimensionMismatch {
                        expected: p * p,
                        found: flat.len(),
                    });
                }
                Ok(DMatrix::from_row_slice(p, p, flat))
            })
            .collect()
    }
}

/// Overrides of the exact sampler's stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_newton_after")]
    pub newton_after: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        let d = ExactSamplerOptions::default();
        Self {
            tol: d.tol,
            max_sweeps: d.max_sweeps,
            newton_after: d.newton_after,
        }
    }
}

impl From<ExactConfig> for ExactSamplerOptions {
    fn from(c: ExactConfig) -> Self {
        Self {
            tol: c.tol,
            max_sweeps: c.max_sweeps,
            newton_after: c.newton_after,
        }
    }
}

fn default_tol() -> f64 {
    ExactSamplerOptions::default().tol
}
fn default_max_sweeps() -> usize {
    ExactSamplerOptions::default().max_sweeps
}
fn default_newton_after() -> usize {
    ExactSamplerOptions::default().newton_after
}
fn default_shape() -> f64 {
    3.0
}
fn default_alpha() -> f64 {
    0.5
}
fn default_half() -> f64 {
    0.5
}
fn default_one() -> f64 {
    1.0
}
fn default_thinning() -> usize {
    1
}
fn default_target() -> f64 {
    0.05
}

/// Configuration of `sample`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub partition: Vec<usize>,
    pub theta: f64,
    #[serde(default = "default_shape")]
    pub b: f64,
    #[serde(default, rename = "D", alias = "d")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_alpha")]
    pub alpha_g: f64,
    #[serde(default = "default_half")]
    pub sigma_g2: f64,
    pub iterations: usize,
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default)]
    pub seed: u64,
    /// Data CSV (`n x p`), relative to the configuration file.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub record_precision: bool,
    #[serde(default)]
    pub exact: ExactConfig,
}

impl SampleConfig {
    pub fn partition(&self) -> Result<Arc<Partition>> {
        Ok(Arc::new(Partition::from_sizes(self.partition.clone())?))
    }

    pub fn gwishart(&self, p: usize) -> Result<GWishartParams<f64>> {
        match &self.d {
            Some(rows) => GWishartParams::new(self.b, square_matrix(rows, p)?),
            None => GWishartParams::identity(p, self.b),
        }
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig<f64>> {
        let p = self.partition()?.p();
        let mut cfg = SamplerConfig::new(EdgePrior::new(self.theta)?, self.gwishart(p)?);
        cfg.alpha_g = self.alpha_g;
        cfg.sigma_g2 = self.sigma_g2;
        cfg.iterations = self.iterations;
        cfg.burn_in = self.burn_in;
        cfg.thinning = self.thinning;
        cfg.seed = self.seed;
        cfg.record_precision = self.record_precision;
        cfg.exact = self.exact.into();
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sampler settings of a replicated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSettings {
    pub iterations: usize,
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default = "default_alpha")]
    pub alpha_g: f64,
    #[serde(default = "default_half")]
    pub sigma_g2: f64,
    #[serde(default = "default_half")]
    pub prior_theta: f64,
    #[serde(default = "default_target")]
    pub bfdr_target: f64,
}

/// Configuration of `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub scenario: SyntheticScenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// When present, each replicate is also sampled and scored.
    #[serde(default)]
    pub experiment: Option<ExperimentSettings>,
}

fn default_replicates() -> usize {
    1
}

impl SimulateConfig {
    pub fn experiment_config(&self) -> Option<ExperimentConfig> {
        self.experiment.as_ref().map(|e| ExperimentConfig {
            scenario: self.scenario.clone(),
            replicates: self.replicates,
            iterations: e.iterations,
            burn_in: e.burn_in,
            thinning: e.thinning,
            alpha_g: e.alpha_g,
            sigma_g2: e.sigma_g2,
            prior_theta: e.prior_theta,
            bfdr_target: e.bfdr_target,
            seed: self.seed,
        })
    }
}

/// Configuration of `smooth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothConfig {
    /// Group sizes over the spline basis; their sum is the basis size.
    pub partition: Vec<usize>,
    /// Curves CSV, one curve per row.
    #[serde(default)]
    pub curves: Option<PathBuf>,
    /// Grid CSV, a single row or column.
    #[serde(default)]
    pub grid: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
    #[serde(default = "default_ig_shape")]
    pub ig_shape: f64,
    #[serde(default = "default_ig_rate")]
    pub ig_rate: f64,
    #[serde(default = "default_mu_var")]
    pub mu_prior_var: f64,
    #[serde(default = "default_shape")]
    pub gwishart_shape: f64,
    #[serde(default, rename = "D", alias = "d")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha_g: f64,
    #[serde(default = "default_one")]
    pub sigma_g2: f64,
    pub iterations: usize,
    pub burn_in: usize,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default = "default_target")]
    pub bfdr_target: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub exact: ExactConfig,
}

fn default_ig_shape() -> f64 {
    2.0
}
fn default_ig_rate() -> f64 {
    0.01
}
fn default_mu_var() -> f64 {
    100.0
}

impl SmoothConfig {
    pub fn smoother_config(&self) -> Result<SmootherConfig> {
        let p: usize = self.partition.iter().sum();
        let cfg = SmootherConfig {
            group_sizes: self.partition.clone(),
            ig_shape: self.ig_shape,
            ig_rate: self.ig_rate,
            mu_prior_var: self.mu_prior_var,
            gwishart_shape: self.gwishart_shape,
            gwishart_scale: self
                .d
                .as_deref()
                .map(|rows| square_matrix(rows, p))
                .transpose()?,
            theta: self.theta,
            alpha_g: self.alpha_g,
            sigma_g2: self.sigma_g2,
            burn_in: self.burn_in,
            iterations: self.iterations,
            thinning: self.thinning,
            bfdr_target: self.bfdr_target,
            seed: self.seed,
            exact: self.exact.into(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Configuration of `oracle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub partition: Vec<usize>,
    pub theta: f64,
    #[serde(default = "default_shape")]
    pub b: f64,
    #[serde(default, rename = "D", alias = "d")]
    pub d: Option<Vec<Vec<f64>>>,
    /// Data CSV; the prior is enumerated when absent.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
}

impl OracleConfig {
    pub fn partition(&self) -> Result<Arc<Partition>> {
        Ok(Arc::new(Partition::from_sizes(self.partition.clone())?))
    }

    pub fn gwishart(&self, p: usize) -> Result<GWishartParams<f64>> {
        match &self.d {
            Some(rows) => GWishartParams::new(self.b, square_matrix(rows, p)?),
            None => GWishartParams::identity(p, self.b),
        }
    }
}

/// Written next to every run's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

/// Per-replicate rows of an experiment.
pub fn write_replicates_csv(path: &Path, rows: &[ReplicateResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::other)?;
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    w.flush()?;
    Ok(())
}
