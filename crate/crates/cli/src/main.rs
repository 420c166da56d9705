use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use palette_sparse::cover::{validate_cover, CorrespondenceCover, ListAssignment};
use palette_sparse::experiment::{self, base_params, fit_params, ParamSpec, RunConfig};
use palette_sparse::graph::{gen_locally_sparse, local_sparsity, Graph};
use palette_sparse::io;
use palette_sparse::nibble::{solve, Policy, SolveOptions};
use palette_sparse::query::{end_to_end_query_color, QueryOracle, Strategy};
use palette_sparse::sparsify::{sparsify, Setting, SparsifyParams};
use palette_sparse::streaming::{stream_color, stream_color_correspondence, EdgeStream, StreamOptions};
use palette_sparse::{verify_coloring, Instance};

#[derive(Parser)]
#[command(name = "palette-sparse", version, about = "Palette sparsification toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a k-locally-sparse graph.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a correspondence cover against a graph.
    VerifyCover {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cover: PathBuf,
    },
    /// Sample and prune palettes; print or write the palette dump.
    Sparsify {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Color a graph from full lists or a cover, without sparsification.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, conflicts_with = "cover")]
        lists: Option<PathBuf>,
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Plain q-coloring when neither lists nor a cover is given.
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value = "auto")]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-pass streaming sparsification and coloring.
    Stream {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Shuffle the edge order with this seed.
        #[arg(long)]
        permute_seed: Option<u64>,
        #[arg(long)]
        observed_delta: bool,
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-adaptive query-model coloring.
    Queries {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON experiment config over its seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated sample sizes; runs the success-versus-s table.
        #[arg(long, value_delimiter = ',')]
        s_values: Vec<usize>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ParamArgs {
    fn spec(&self) -> ParamSpec {
        ParamSpec {
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
            q: self.q,
            s: self.s,
            k: self.k,
            delta: self.delta,
        }
    }

    fn load(&self, cover: Option<&Path>) -> Result<(Graph, Option<CorrespondenceCover>, SparsifyParams)> {
        let g = load_graph(&self.graph)?;
        let cov = cover.map(load_cover).transpose()?;
        let spec = self.spec();
        let params = base_params(&spec, &g)?;
        let params = fit_params(params, &spec, g.n(), None, cov.as_ref())?;
        for w in &params.warnings {
            eprintln!("warning: {w:?}");
        }
        Ok((g, cov, params))
    }
}

fn load_graph(p: &Path) -> Result<Graph> {
    io::load(p, io::read_graph).with_context(|| format!("reading graph {}", p.display()))
}

fn load_cover(p: &Path) -> Result<CorrespondenceCover> {
    io::load(p, io::read_cover).with_context(|| format!("reading cover {}", p.display()))
}

/// Exit codes: 0 success, 2 a run failed, 3 bad input or configuration.
enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<experiment::ExperimentError>().map_or(3, |x| x.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

fn params_line(p: &SparsifyParams) -> String {
    format!(
        "q = {}, s = {}, prune threshold = {:.4}, degenerate = {}",
        p.q, p.s, p.prune_threshold, p.degenerate
    )
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.cmd {
        Cmd::Gen { n, delta, k, seed, out } => {
            let g = gen_locally_sparse(n, delta, k, seed)?;
            let r = local_sparsity(&g);
            io::save(&out, &io::write_graph(&g))?;
            println!("n = {}, m = {}, max degree = {}, k* = {}", g.n(), g.m(), r.max_degree, r.k_star);
            Ok(Outcome::Ok)
        }
        Cmd::VerifyCover { graph, cover } => {
            let g = load_graph(&graph)?;
            let cov = load_cover(&cover)?;
            let report = validate_cover(&g, &cov);
            match report.first_violation() {
                None => {
                    println!("valid");
                    Ok(Outcome::Ok)
                }
                Some(v) => {
                    println!("invalid: {v:?}");
                    Ok(Outcome::Failed)
                }
            }
        }
        Cmd::Sparsify { p, cover, out } => {
            let (g, cov, params) = p.load(cover.as_deref())?;
            let setting = cov.as_ref().map_or(Setting::Plain, Setting::Cover);
            let sp = sparsify(&g, setting, &params, p.seed)?;
            eprintln!("{}; conflict edges = {}", params_line(&params), sp.conflict.conflict_graph.m());
            let dump = io::write_palettes(&sp.sampled, &sp.pruned);
            match out {
                Some(path) => io::save(&path, &dump)?,
                None => print!("{dump}"),
            }
            Ok(Outcome::Ok)
        }
        Cmd::Solve {
            graph,
            lists,
            cover,
            q,
            policy,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let instance = match (lists, cover, q) {
                (Some(l), _, _) => Instance::Lists(io::load(&l, io::read_list_assignment)?),
                (_, Some(c), _) => Instance::Cover(load_cover(&c)?),
                (None, None, Some(q)) => Instance::Lists(ListAssignment::uniform(g.n(), q)),
                (None, None, None) => bail!("give --lists, --cover or --q"),
            };
            let result = solve(&g, &instance, &SolveOptions::with_policy(policy), seed);
            finish(&g, &instance, result.map(|r| (r.stage.to_string(), r.coloring)), out.as_deref())
        }
        Cmd::Stream {
            p,
            cover,
            permute_seed,
            observed_delta,
            ledger,
            out,
        } => {
            let (g, cov, params) = p.load(cover.as_deref())?;
            let mut stream = match &cov {
                Some(c) => EdgeStream::from_cover(&g, c),
                None => EdgeStream::from_graph(&g),
            };
            if let Some(ps) = permute_seed {
                stream = stream.permuted(ps);
            }
            let opts = StreamOptions {
                observed_delta,
                ..StreamOptions::default()
            };
            let res = match &cov {
                Some(_) => stream_color_correspondence(&stream, &params, &opts, p.seed)?,
                None => stream_color(&stream, &params, &opts, p.seed)?,
            };
            let l = &res.ledger;
            eprintln!("{}; retained edges = {}; peak words = {}", params_line(&params), res.retained.len(), l.peak_words);
            if let Some(path) = ledger {
                let mut csv = String::from("n,q,s,retained_edges,stored_edges,stored_pairs,palette_words,counter_words,peak_words\n");
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{}",
                    g.n(),
                    params.q,
                    params.s,
                    res.retained.len(),
                    l.stored_edges,
                    l.stored_pairs,
                    l.palette_words,
                    l.counter_words,
                    l.peak_words
                )?;
                io::save(&path, &csv)?;
            }
            let instance = full_instance(&g, cov, &params);
            finish(&g, &instance, res.result.map(|r| (r.stage.to_string(), r.coloring)), out.as_deref())
        }
        Cmd::Queries { p, strategy, out } => {
            let (g, _, params) = p.load(None)?;
            let mut oracle = QueryOracle::new(&g);
            let res = end_to_end_query_color(&mut oracle, &params, strategy, &SolveOptions::default(), p.seed)?;
            let c = res.counts;
            let strategy_name = format!("{:?}", res.strategy).to_lowercase();
            let mut csv = String::from("n,m,q,s,strategy,degree,neighbor,pair,total,conflict_edges\n");
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                g.n(),
                g.m(),
                params.q,
                params.s,
                strategy_name,
                c.degree,
                c.neighbor,
                c.pair,
                c.total(),
                res.discovered.len()
            )?;
            match out {
                Some(path) => io::save(&path, &csv)?,
                None => print!("{csv}"),
            }
            let instance = full_instance(&g, None, &params);
            finish(&g, &instance, res.result.map(|r| (r.stage.to_string(), r.coloring)), None)
        }
        Cmd::Sweep { config, s_values, table } => {
            let cfg = RunConfig::load(&config)?;
            if !s_values.is_empty() {
                let t = experiment::sweep_success_vs_s(&cfg, &s_values)?;
                let csv = t.to_csv();
                match table {
                    Some(path) => io::save(&path, &csv)?,
                    None => print!("{csv}"),
                }
                if !t.monotone {
                    eprintln!("note: success rate is not monotone in s");
                }
                return Ok(Outcome::Ok);
            }
            let res = experiment::run(&cfg)?;
            let agg = res.aggregates();
            println!("{} / {} seeds succeeded", agg.successes, agg.runs);
            if cfg.output.csv.is_none() {
                print!("{}", res.to_csv());
            }
            Ok(if res.exit_code() == 0 { Outcome::Ok } else { Outcome::Failed })
        }
    }
}

fn full_instance(g: &Graph, cov: Option<CorrespondenceCover>, p: &SparsifyParams) -> Instance {
    match cov {
        Some(c) => Instance::Cover(c),
        None => Instance::Lists(ListAssignment::uniform(g.n(), p.q)),
    }
}

fn finish<E: std::fmt::Display>(
    g: &Graph,
    instance: &Instance,
    result: std::result::Result<(String, palette_sparse::PartialColoring), E>,
    out: Option<&Path>,
) -> Result<Outcome> {
    match result {
        Ok((stage, phi)) => {
            if !verify_coloring(g, instance, &phi).passed() {
                bail!("solver returned a coloring that fails verification");
            }
            println!("colored by {stage}; verified");
            if let Some(path) = out {
                io::save(path, &io::write_coloring(&phi))?;
            }
            Ok(Outcome::Ok)
        }
        Err(e) => {
            println!("failed: {e}");
            Ok(Outcome::Failed)
        }
    }
}
