use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use blockgraph::bdrj::{run_chain, ChainOutput, DataSummary};
use blockgraph::functional::{smooth, FunctionalDataset};
use blockgraph::graph::{EdgePrior, Graph};
use blockgraph::io::{
    read_grid_csv, read_json, read_matrix_csv, resolve_path, write_inclusion_csv, write_json,
    write_matrix_csv, write_replicates_csv, GraphFile, OracleConfig, RunManifest, SampleConfig,
    SampleFile, SimulateConfig, SmoothConfig, SCHEMA_VERSION,
};
use blockgraph::posterior::{
    bfdr_graph, edge_inclusion, exact_graph_posterior, median_model, posterior_mean_precision,
    InclusionMatrix,
};
use blockgraph::simbench::{confusion, generate_block_scenario, median, run_experiment, Scenario};
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Command, Common};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(blockgraph::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Run(e) => e.fmt(f),
        }
    }
}

impl From<blockgraph::Error> for CliError {
    fn from(e: blockgraph::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Collects output paths for the manifest.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.display().to_string());
        p
    }
}

fn require_config(common: &Common) -> CliResult<&Path> {
    common
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("this subcommand needs --config PATH".into()))
}

fn input_path(
    flag: Option<PathBuf>,
    from_config: Option<&Path>,
    config: &Path,
    what: &str,
) -> CliResult<PathBuf> {
    match (flag, from_config) {
        (Some(p), _) => Ok(p),
        (None, Some(p)) => Ok(resolve_path(config, p)),
        (None, None) => Err(CliError::Usage(format!(
            "no {what} given: pass it on the command line or in the configuration"
        ))),
    }
}

fn column_header(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}{j}")).collect()
}

pub fn run(command: Command, common: Common) -> CliResult<()> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let start = Instant::now();
    let mut out = Outputs::new(&common.out)?;
    let (name, info) = match command {
        Command::Simulate => ("simulate", simulate(&common, &mut out)?),
        Command::Sample { data } => ("sample", sample(&common, data, &mut out)?),
        Command::Summarize { samples, target } => {
            ("summarize", summarize(&samples, target, &mut out)?)
        }
        Command::Metrics { estimate, truth } => ("metrics", metrics(&estimate, &truth, &mut out)?),
        Command::Smooth { curves, grid } => {
            ("smooth", smooth_curves(&common, curves, grid, &mut out)?)
        }
        Command::Oracle { data } => ("oracle", oracle(&common, data, &mut out)?),
    };
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: info.seed,
        config: info.config,
        duration_seconds: start.elapsed().as_secs_f64(),
        outputs: out.files.clone(),
    };
    write_json(&out.dir.join("manifest.json"), &manifest)?;
    log::info!("{name} finished in {:.2}s", manifest.duration_seconds);
    Ok(())
}

/// Seed used and configuration echo of a command.
struct RunInfo {
    seed: Option<u64>,
    config: serde_json::Value,
}

fn echo<T: Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

fn simulate(common: &Common, out: &mut Outputs) -> CliResult<RunInfo> {
    let path = require_config(common)?;
    let mut cfg: SimulateConfig = read_json(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.scenario.validate()?;
    let p: usize = cfg.scenario.group_sizes.iter().sum();
    let partition = cfg.scenario.partition()?;
    for r in 0..cfg.replicates {
        let suffix = if cfg.replicates == 1 {
            String::new()
        } else {
            format!("_{r}")
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        let _chain_seed: u64 = rng.random();
        let sc: Scenario<f64> = generate_block_scenario(&cfg.scenario, &mut rng)?;
        let header = column_header("x", p);
        write_matrix_csv(
            &out.path(&format!("data{suffix}.csv")),
            &sc.data,
            common.header.then_some(header.as_slice()),
        )?;
        write_matrix_csv(
            &out.path(&format!("precision{suffix}.csv")),
            sc.precision.matrix(),
            None,
        )?;
        let truth = GraphFile::from_graph(&sc.truth).with_partition(&partition)?;
        write_json(&out.path(&format!("truth{suffix}.json")), &truth)?;
    }
    if let Some(exp) = cfg.experiment_config() {
        let rows = run_experiment(&exp)?;
        write_replicates_csv(&out.path("replicates.csv"), &rows)?;
        let col = |f: fn(&blockgraph::simbench::ReplicateResult) -> f64| {
            median(&rows.iter().map(f).collect::<Vec<_>>())
        };
        let summary = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "replicates": rows.len(),
            "median_f1": col(|r| r.f1),
            "median_std_shd": col(|r| r.std_shd),
            "median_sensitivity": col(|r| r.sensitivity),
            "median_specificity": col(|r| r.specificity),
        });
        write_json(&out.path("experiment.json"), &summary)?;
    }
    Ok(RunInfo {
        seed: Some(cfg.seed),
        config: echo(&cfg),
    })
}

#[derive(Serialize)]
struct SampleSummary {
    schema_version: u32,
    acceptance_rate: f64,
    recorded: usize,
    samples: String,
    inclusion: String,
    edge_frequencies: Vec<Vec<f64>>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn write_graph_summaries(pm: &InclusionMatrix, target: f64, out: &mut Outputs) -> CliResult<()> {
    write_inclusion_csv(&out.path("inclusion.csv"), pm)?;
    write_json(
        &out.path("graph_bfdr.json"),
        &GraphFile::from_estimate(&bfdr_graph(pm, target)),
    )?;
    write_json(
        &out.path("graph_median.json"),
        &GraphFile::from_estimate(&median_model(pm)),
    )?;
    Ok(())
}

fn sample(common: &Common, data: Option<PathBuf>, out: &mut Outputs) -> CliResult<RunInfo> {
    let path = require_config(common)?;
    let mut cfg: SampleConfig = read_json(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let data_path = input_path(data, cfg.data.as_deref(), path, "data file")?;
    let y = read_matrix_csv(&data_path, cfg.header || common.header)?;
    let sampler = cfg.sampler_config()?;
    let output: ChainOutput<f64> = run_chain(&y, cfg.partition()?, &sampler)?;
    let samples_path = out.path("samples.json");
    write_json(&samples_path, &SampleFile::from_output(&output, &sampler))?;
    let pm = edge_inclusion(&output.graphs)?;
    write_graph_summaries(&pm, 0.05, out)?;
    if !output.precisions.is_empty() {
        write_matrix_csv(
            &out.path("precision_mean.csv"),
            &posterior_mean_precision(&output.precisions)?,
            None,
        )?;
    }
    let summary = SampleSummary {
        schema_version: SCHEMA_VERSION,
        acceptance_rate: output.acceptance_rate(),
        recorded: output.graphs.len(),
        samples: "samples.json".into(),
        inclusion: "inclusion.csv".into(),
        edge_frequencies: matrix_rows(pm.matrix()),
    };
    write_json(&out.path("summary.json"), &summary)?;
    Ok(RunInfo {
        seed: Some(cfg.seed),
        config: echo(&cfg),
    })
}

fn summarize(samples: &Path, target: f64, out: &mut Outputs) -> CliResult<RunInfo> {
    if !(target > 0.0 && target < 1.0) {
        return Err(CliError::Usage(format!(
            "--target must lie in (0, 1), got {target}"
        )));
    }
    let file = SampleFile::read(samples)?;
    let pm = edge_inclusion(&file.graphs()?)?;
    write_graph_summaries(&pm, target, out)?;
    let precisions = file.precision_matrices()?;
    if !precisions.is_empty() {
        write_matrix_csv(
            &out.path("precision_mean.csv"),
            &posterior_mean_precision(&precisions)?,
            None,
        )?;
    }
    Ok(RunInfo {
        seed: Some(file.seed),
        config: serde_json::json!({ "samples": samples.display().to_string(), "target": target }),
    })
}

fn metrics(estimate: &Path, truth: &Path, out: &mut Outputs) -> CliResult<RunInfo> {
    let est: Graph = blockgraph::io::read_graph_json(estimate)?;
    let tru: Graph = blockgraph::io::read_graph_json(truth)?;
    let report = confusion(&est, &tru)?;
    write_json(&out.path("metrics.json"), &report)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).unwrap_or_default()
    );
    Ok(RunInfo {
        seed: None,
        config: serde_json::json!({
            "estimate": estimate.display().to_string(),
            "truth": truth.display().to_string(),
        }),
    })
}

fn smooth_curves(
    common: &Common,
    curves: Option<PathBuf>,
    grid: Option<PathBuf>,
    out: &mut Outputs,
) -> CliResult<RunInfo> {
    let path = require_config(common)?;
    let mut cfg: SmoothConfig = read_json(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let header = cfg.header || common.header;
    let y = read_matrix_csv(
        &input_path(curves, cfg.curves.as_deref(), path, "curves file")?,
        header,
    )?;
    let s = read_grid_csv(
        &input_path(grid, cfg.grid.as_deref(), path, "grid file")?,
        header,
    )?;
    let data = FunctionalDataset::new(s, y)?;
    let res = smooth(&data, &cfg.smoother_config()?)?;
    write_matrix_csv(&out.path("fitted.csv"), &res.fitted, None)?;
    write_graph_summaries(&res.inclusion, cfg.bfdr_target, out)?;
    write_matrix_csv(&out.path("precision_mean.csv"), &res.precision_mean, None)?;
    write_matrix_csv(
        &out.path("mu_mean.csv"),
        &DMatrix::from_column_slice(res.mu_mean.len(), 1, res.mu_mean.as_slice()),
        None,
    )?;
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tau2_mean": res.tau2_mean,
        "acceptance_rate": res.acceptance_rate,
        "recorded": res.graphs.len(),
    });
    write_json(&out.path("summary.json"), &summary)?;
    Ok(RunInfo {
        seed: Some(cfg.seed),
        config: echo(&cfg),
    })
}

#[derive(Serialize)]
struct OracleEntry {
    multigraph_edges: Vec<[usize; 2]>,
    log_posterior: f64,
    probability: f64,
}

fn oracle(common: &Common, data: Option<PathBuf>, out: &mut Outputs) -> CliResult<RunInfo> {
    let path = require_config(common)?;
    let cfg: OracleConfig = read_json(path)?;
    let partition = cfg.partition()?;
    let summary = match data.or_else(|| cfg.data.as_deref().map(|p| resolve_path(path, p))) {
        Some(p) => {
            let y = read_matrix_csv(&p, cfg.header || common.header)?;
            if y.ncols() != partition.p() {
                return Err(blockgraph::Error::DimensionMismatch {
                    expected: partition.p(),
                    found: y.ncols(),
                }
                .into());
            }
            DataSummary::from_data(&y)
        }
        None => DataSummary::empty(partition.p()),
    };
    let post = exact_graph_posterior(
        &partition,
        &EdgePrior::new(cfg.theta)?,
        &cfg.gwishart(partition.p())?,
        &summary,
    )?;
    let total: f64 = post.iter().map(|g| g.probability).sum();
    let graphs: Vec<OracleEntry> = post
        .iter()
        .map(|g| OracleEntry {
            multigraph_edges: g
                .multigraph
                .edges()
                .into_iter()
                .map(|(l, m)| [l, m])
                .collect(),
            log_posterior: g.log_posterior,
            probability: g.probability,
        })
        .collect();
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "partition": partition.sizes(),
        "n": summary.n,
        "total_probability": total,
        "graphs": graphs,
    });
    write_json(&out.path("oracle.json"), &doc)?;
    Ok(RunInfo {
        seed: None,
        config: echo(&cfg),
    })
}
