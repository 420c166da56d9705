//! Seeded experiment runs: configuration, per-seed rows, CSV and JSON
//! reports, and the success-versus-`s` sweep.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{verify_coloring, PartialColoring};
use crate::cover::{cover_from_lists, pull_back, random_cover, random_lists, CorrespondenceCover, Instance, ListAssignment};
use crate::graph::{gen_locally_sparse, local_sparsity, Graph};
use crate::io::{self, FormatError};
use crate::nibble::{solve, Policy, SolveFailure, SolveOptions, SolveReport};
use crate::query::{end_to_end_query_color, QueryOracle, Strategy};
use crate::rng::{self, Purpose};
use crate::sparsify::{derive_params, sparsify, Setting, SparsifyParams};
use crate::streaming::{stream_color, stream_color_correspondence, EdgeStream, StreamOptions};

pub const SCHEMA: &str = "palette-sparse/1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code: 3 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Format(_) => 3,
            ExperimentError::Io(_) => 1,
        }
    }
}

fn config_err(msg: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Config(msg.to_string())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    #[default]
    Plain,
    List,
    Cover,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Offline,
    Stream,
    Query,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Generated graph; lists or covers (if the pipeline needs them) are
    /// drawn from the same seed.
    Generate {
        n: usize,
        delta: usize,
        k: usize,
        seed: u64,
        /// Per-vertex list size; defaults to `q`.
        #[serde(default)]
        list_size: Option<usize>,
        /// Color universe for random lists; defaults to twice the list size.
        #[serde(default)]
        universe: Option<usize>,
        /// Matching density for random covers; 1.0 by default.
        #[serde(default)]
        density: Option<f64>,
    },
    Files {
        graph: PathBuf,
        #[serde(default)]
        lists: Option<PathBuf>,
        #[serde(default)]
        cover: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    /// Overrides the measured local sparsity.
    #[serde(default)]
    pub k: Option<usize>,
    /// Overrides the measured maximum degree.
    #[serde(default)]
    pub delta: Option<usize>,
}

fn default_gamma() -> f64 {
    0.1
}

fn default_epsilon() -> f64 {
    1.0
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec {
            alpha: None,
            gamma: default_gamma(),
            epsilon: default_epsilon(),
            q: None,
            s: None,
            k: None,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    /// Shuffle the edge order per seed.
    #[serde(default)]
    pub permute: bool,
    #[serde(default)]
    pub observed_delta: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    /// Directory for one coloring file per successful seed.
    #[serde(default)]
    pub colorings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub pipeline: Pipeline,
    #[serde(default)]
    pub model: Model,
    #[serde(default)]
    pub params: ParamSpec,
    pub seeds: Vec<u64>,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_policy")]
    pub solver: String,
    #[serde(default)]
    pub stream: StreamSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_strategy() -> Strategy {
    Strategy::Auto
}

fn default_policy() -> String {
    "auto".into()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(config_err)?;
        if cfg.schema != SCHEMA {
            return Err(config_err(format!("schema `{}` is not `{SCHEMA}`", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn solve_options(&self) -> Result<SolveOptions, ExperimentError> {
        let policy: Policy = self.solver.parse().map_err(config_err)?;
        Ok(SolveOptions::with_policy(policy))
    }
}

/// The instance shared by every seed of a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Graph,
    pub lists: Option<ListAssignment>,
    pub cover: Option<CorrespondenceCover>,
    pub params: SparsifyParams,
}

impl Prepared {
    fn setting(&self) -> Setting<'_> {
        match (&self.lists, &self.cover) {
            (Some(l), _) => Setting::Lists(l),
            (None, Some(c)) => Setting::Cover(c),
            (None, None) => Setting::Plain,
        }
    }

    /// The instance every returned coloring is checked against.
    pub fn full_instance(&self) -> Instance {
        self.setting().full_instance(self.graph.n(), self.params.q)
    }
}

fn resolve_params(spec: &ParamSpec, delta: usize, n: usize, k: usize) -> Result<SparsifyParams, ExperimentError> {
    let derived = match spec.alpha {
        Some(alpha) => Some(derive_params(delta, n, k, alpha, spec.gamma, spec.epsilon).map_err(config_err)?),
        None => None,
    };
    let q = spec.q.or(derived.as_ref().map(|p| p.q));
    let s = spec.s.or(derived.as_ref().map(|p| p.s));
    match (q, s, derived) {
        (Some(q), Some(s), Some(p)) if q == p.q && s == p.s => Ok(p),
        (Some(q), Some(s), _) => {
            SparsifyParams::explicit(q, s.min(q), delta as f64, spec.gamma, spec.epsilon).map_err(config_err)
        }
        _ => Err(config_err("give alpha, or both q and s")),
    }
}

/// Parameters from the measured (or overridden) `Δ` and `k` of `graph`.
pub fn base_params(spec: &ParamSpec, graph: &Graph) -> Result<SparsifyParams, ExperimentError> {
    let report = local_sparsity(graph);
    let delta = spec.delta.unwrap_or(report.max_degree).max(1);
    let k = spec.k.unwrap_or(report.k_star);
    resolve_params(spec, delta, graph.n(), k)
}

/// Align `q` with the given lists or cover; for covers the threshold uses
/// `Δ(H)` unless `Δ` was overridden.
pub fn fit_params(
    mut params: SparsifyParams,
    spec: &ParamSpec,
    n: usize,
    lists: Option<&ListAssignment>,
    cover: Option<&CorrespondenceCover>,
) -> Result<SparsifyParams, ExperimentError> {
    if let Some(l) = lists {
        if l.n() != n {
            return Err(config_err("lists and graph disagree on n"));
        }
        params.q = l.min_list_size();
        params = params.with_delta_ref(params.delta_ref);
    }
    if let Some(c) = cover {
        if c.n() != n {
            return Err(config_err("cover and graph disagree on n"));
        }
        params.q = c.min_list_size();
        let delta_ref = match spec.delta {
            Some(_) => params.delta_ref,
            None => c.cover_graph().max_degree().max(1) as f64,
        };
        params = params.with_delta_ref(delta_ref);
    }
    if params.s > params.q {
        return Err(config_err(format!("s = {} exceeds the list size {}", params.s, params.q)));
    }
    Ok(params)
}

/// Build the graph, lists or cover, and parameters.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, ExperimentError> {
    let (graph, file_lists, file_cover) = match &cfg.instance {
        InstanceSpec::Generate { n, delta, k, seed, .. } => {
            (gen_locally_sparse(*n, *delta, *k, *seed).map_err(config_err)?, None, None)
        }
        InstanceSpec::Files { graph, lists, cover } => {
            let g = io::load(graph, io::read_graph)?;
            let l = lists.as_deref().map(|p| io::load(p, io::read_list_assignment)).transpose()?;
            let c = cover.as_deref().map(|p| io::load(p, io::read_cover)).transpose()?;
            (g, l, c)
        }
    };
    let n = graph.n();
    let params = base_params(&cfg.params, &graph)?;

    let (mut lists, mut cover) = (None, None);
    match (cfg.pipeline, &cfg.instance) {
        (Pipeline::Plain, _) => {}
        (Pipeline::List, InstanceSpec::Files { .. }) => {
            lists = Some(file_lists.ok_or_else(|| config_err("list pipeline needs a lists file"))?);
        }
        (Pipeline::Cover, InstanceSpec::Files { .. }) => {
            cover = Some(file_cover.ok_or_else(|| config_err("cover pipeline needs a cover file"))?);
        }
        (Pipeline::List, InstanceSpec::Generate { seed, list_size, universe, .. }) => {
            let size = list_size.unwrap_or(params.q);
            let universe = universe.unwrap_or(2 * size).max(size);
            lists = Some(random_lists(n, size, universe, &mut rng::stream(*seed, Purpose::RandomLists)));
        }
        (Pipeline::Cover, InstanceSpec::Generate { seed, list_size, density, .. }) => {
            let size = list_size.unwrap_or(params.q);
            let density = density.unwrap_or(1.0);
            cover = Some(random_cover(&graph, size, density, &mut rng::stream(*seed, Purpose::RandomCover)));
        }
    }
    let params = fit_params(params, &cfg.params, n, lists.as_ref(), cover.as_ref())?;
    Ok(Prepared {
        graph,
        lists,
        cover,
        params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Success,
    Failure,
    Unsupported,
    Error,
}

impl RowStatus {
    fn as_str(self) -> &'static str {
        match self {
            RowStatus::Success => "success",
            RowStatus::Failure => "failure",
            RowStatus::Unsupported => "unsupported",
            RowStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub status: RowStatus,
    pub q: usize,
    pub s: usize,
    pub conflict_edges: Option<usize>,
    pub peak_words: Option<u64>,
    pub queries: Option<u64>,
    pub solver_path: String,
    pub coloring_file: Option<String>,
    pub detail: String,
    /// Kept out of the CSV so reruns compare byte for byte.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_conflict_edges: Option<f64>,
    pub max_peak_words: Option<u64>,
    pub max_queries: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: RunConfig,
    pub rows: Vec<SeedRow>,
}

impl SweepResult {
    pub fn aggregates(&self) -> Aggregates {
        let successes = self.rows.iter().filter(|r| r.status == RowStatus::Success).count();
        let conflicts: Vec<usize> = self.rows.iter().filter_map(|r| r.conflict_edges).collect();
        Aggregates {
            runs: self.rows.len(),
            successes,
            success_rate: if self.rows.is_empty() { 0.0 } else { successes as f64 / self.rows.len() as f64 },
            mean_conflict_edges: (!conflicts.is_empty())
                .then(|| conflicts.iter().sum::<usize>() as f64 / conflicts.len() as f64),
            max_peak_words: self.rows.iter().filter_map(|r| r.peak_words).max(),
            max_queries: self.rows.iter().filter_map(|r| r.queries).max(),
        }
    }

    /// 0 when every seed succeeded, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().all(|r| r.status == RowStatus::Success) {
            0
        } else {
            2
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# config: {}\n", self.config.to_json());
        out.push_str("seed,status,q,s,conflict_edges,peak_words,queries,solver_path,coloring_file,detail\n");
        let opt = |x: Option<String>| x.unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.status.as_str(),
                r.q,
                r.s,
                opt(r.conflict_edges.map(|x| x.to_string())),
                opt(r.peak_words.map(|x| x.to_string())),
                opt(r.queries.map(|x| x.to_string())),
                r.solver_path,
                opt(r.coloring_file.clone()),
                csv_quote(&r.detail),
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "schema": SCHEMA,
            "config": self.config,
            "rows": self.rows,
            "aggregates": self.aggregates(),
        }))
        .expect("report serializes")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

fn path_string(report: &Result<SolveReport, SolveFailure>) -> String {
    let path = match report {
        Ok(r) => &r.path,
        Err(f) => &f.path,
    };
    path.iter()
        .map(|a| format!("{}:{}", a.stage, format!("{:?}", a.status).to_lowercase()))
        .collect::<Vec<_>>()
        .join(">")
}

struct Attempt {
    conflict_edges: Option<usize>,
    peak_words: Option<u64>,
    queries: Option<u64>,
    report: Result<SolveReport, SolveFailure>,
    /// Coloring in the full instance's names, when the solver returned one.
    coloring: Option<PartialColoring>,
}

fn attempt(cfg: &RunConfig, prep: &Prepared, canonical: Option<&CorrespondenceCover>, seed: u64) -> Result<Attempt, String> {
    let solve_opts = cfg.solve_options().map_err(|e| e.to_string())?;
    let g = &prep.graph;
    let p = &prep.params;
    match cfg.model {
        Model::Offline => {
            let sp = sparsify(g, prep.setting(), p, seed).map_err(|e| e.to_string())?;
            let report = solve(&sp.conflict.conflict_graph, &sp.conflict.instance, &solve_opts, seed);
            Ok(Attempt {
                conflict_edges: Some(sp.conflict.conflict_graph.m()),
                peak_words: None,
                queries: None,
                coloring: report.as_ref().ok().map(|r| r.coloring.clone()),
                report,
            })
        }
        Model::Stream => {
            let cover = prep.cover.as_ref().or(canonical);
            let mut stream = match cover {
                Some(c) => EdgeStream::from_cover(g, c),
                None => EdgeStream::from_graph(g),
            };
            if cfg.stream.permute {
                stream = stream.permuted(seed);
            }
            let opts = StreamOptions {
                observed_delta: cfg.stream.observed_delta,
                space_cap: None,
                solve: solve_opts,
            };
            let out = match cover {
                Some(_) => stream_color_correspondence(&stream, p, &opts, seed),
                None => stream_color(&stream, p, &opts, seed),
            }
            .map_err(|e| e.to_string())?;
            let coloring = out.result.as_ref().ok().map(|r| match (&prep.lists, canonical) {
                (Some(l), Some(c)) => pull_back(l, c, &r.coloring),
                _ => r.coloring.clone(),
            });
            Ok(Attempt {
                conflict_edges: Some(out.conflict_graph.m()),
                peak_words: Some(out.ledger.peak_words),
                queries: None,
                coloring,
                report: out.result,
            })
        }
        Model::Query => {
            let mut oracle = QueryOracle::new(g);
            let out = end_to_end_query_color(&mut oracle, p, cfg.strategy, &solve_opts, seed).map_err(|e| e.to_string())?;
            Ok(Attempt {
                conflict_edges: Some(out.conflict_graph.m()),
                peak_words: None,
                queries: Some(out.counts.total()),
                coloring: out.result.as_ref().ok().map(|r| r.coloring.clone()),
                report: out.result,
            })
        }
    }
}

fn run_seed(
    cfg: &RunConfig,
    prep: &Prepared,
    full: &Instance,
    canonical: Option<&CorrespondenceCover>,
    seed: u64,
) -> Result<SeedRow, ExperimentError> {
    let start = Instant::now();
    let mut row = SeedRow {
        seed,
        status: RowStatus::Error,
        q: prep.params.q,
        s: prep.params.s,
        conflict_edges: None,
        peak_words: None,
        queries: None,
        solver_path: String::new(),
        coloring_file: None,
        detail: String::new(),
        wall_ms: 0.0,
    };
    if cfg.model == Model::Query && cfg.pipeline != Pipeline::Plain {
        row.status = RowStatus::Unsupported;
        row.detail = "query model supports plain coloring only".into();
        return Ok(row);
    }
    match attempt(cfg, prep, canonical, seed) {
        Err(e) => row.detail = e,
        Ok(a) => {
            row.conflict_edges = a.conflict_edges;
            row.peak_words = a.peak_words;
            row.queries = a.queries;
            row.solver_path = path_string(&a.report);
            match (a.report, a.coloring) {
                (Ok(_), Some(phi)) => {
                    let check = verify_coloring(&prep.graph, full, &phi);
                    if check.passed() {
                        row.status = RowStatus::Success;
                        if let Some(dir) = &cfg.output.colorings {
                            let file = dir.join(format!("seed-{seed}.col"));
                            io::save(&file, &io::write_coloring(&phi))?;
                            row.coloring_file = Some(file.display().to_string());
                        }
                    } else {
                        row.detail = format!("coloring failed verification: {:?}", check.witness);
                    }
                }
                (Err(f), _) => {
                    row.status = RowStatus::Failure;
                    row.detail = f.to_string();
                }
                (Ok(_), None) => unreachable!("a solved run carries a coloring"),
            }
        }
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(row)
}

/// Run every seed, verify every coloring, write the configured outputs.
pub fn run(cfg: &RunConfig) -> Result<SweepResult, ExperimentError> {
    if cfg.seeds.is_empty() {
        return Err(config_err("no seeds"));
    }
    cfg.solve_options()?;
    let prep = prepare(cfg)?;
    run_prepared(cfg, &prep)
}

fn run_prepared(cfg: &RunConfig, prep: &Prepared) -> Result<SweepResult, ExperimentError> {
    let full = prep.full_instance();
    let canonical = prep.lists.as_ref().map(|l| cover_from_lists(&prep.graph, l));
    let rows = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, prep, &full, canonical.as_ref(), seed))
        .collect::<Result<Vec<_>, _>>()?;
    let result = SweepResult {
        config: cfg.clone(),
        rows,
    };
    if let Some(path) = &cfg.output.csv {
        io::save(path, &result.to_csv())?;
    }
    if let Some(path) = &cfg.output.json {
        io::save(path, &result.to_json())?;
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessPoint {
    pub s: usize,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessTable {
    pub q: usize,
    pub points: Vec<SuccessPoint>,
    /// Whether the rate never drops as `s` grows. Reported, not enforced.
    pub monotone: bool,
}

impl SuccessTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# q = {}, monotone = {}\ns,runs,successes,success_rate\n", self.q, self.monotone);
        for p in &self.points {
            writeln!(out, "{},{},{},{:.6}", p.s, p.runs, p.successes, p.success_rate).unwrap();
        }
        out
    }
}

/// Hold `q` fixed and vary `s`. Output paths in the config are ignored.
pub fn sweep_success_vs_s(cfg: &RunConfig, s_values: &[usize]) -> Result<SuccessTable, ExperimentError> {
    let mut base = cfg.clone();
    base.output = OutputSpec::default();
    let q = prepare(&base)?.params.q;
    let mut points = Vec::with_capacity(s_values.len());
    for &s in s_values {
        if s == 0 || s > q {
            return Err(config_err(format!("s = {s} must lie in 1..={q}")));
        }
        let mut c = base.clone();
        c.params.q = Some(q);
        c.params.s = Some(s);
        let res = run(&c)?;
        let agg = res.aggregates();
        points.push(SuccessPoint {
            s,
            runs: agg.runs,
            successes: agg.successes,
            success_rate: agg.success_rate,
        });
    }
    let monotone = points.windows(2).all(|w| w[1].success_rate >= w[0].success_rate);
    Ok(SuccessTable { q, points, monotone })
}
