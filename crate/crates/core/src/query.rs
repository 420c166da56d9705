//! Non-adaptive query-model simulator.
//!
//! The hidden graph is reachable only through [`QueryOracle`], which counts
//! every degree, neighbor and pair query it answers. Plans are fixed from
//! the sampled palettes before the oracle is consulted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{Color, Instance};
use crate::graph::{sorted_intersects, Graph, Vertex};
use crate::nibble::{solve, SolveFailure, SolveOptions, SolveReport};
use crate::sparsify::{build_conflict, prune, sample_palettes, ConflictSource, Palette, PaletteFamily, SparsifyError, SparsifyParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub degree: u64,
    pub neighbor: u64,
    pub pair: u64,
}

impl QueryCounts {
    pub fn total(&self) -> u64 {
        self.degree + self.neighbor + self.pair
    }
}

/// Counting access to a hidden graph.
pub struct QueryOracle<'a> {
    hidden: &'a Graph,
    counts: QueryCounts,
}

impl<'a> QueryOracle<'a> {
    pub fn new(hidden: &'a Graph) -> Self {
        QueryOracle {
            hidden,
            counts: QueryCounts::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.hidden.n()
    }

    pub fn degree(&mut self, v: Vertex) -> usize {
        self.counts.degree += 1;
        self.hidden.degree(v)
    }

    /// The `i`-th neighbor of `v` in sorted order, if it exists.
    pub fn neighbor(&mut self, v: Vertex, i: usize) -> Option<Vertex> {
        self.counts.neighbor += 1;
        self.hidden.neighbors(v).get(i).copied()
    }

    pub fn pair(&mut self, u: Vertex, v: Vertex) -> bool {
        self.counts.pair += 1;
        self.hidden.has_edge(u, v)
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Scan,
    Classes,
    Auto,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scan" => Ok(Strategy::Scan),
            "classes" => Ok(Strategy::Classes),
            "auto" => Ok(Strategy::Auto),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("color-class discovery needs one global palette; per-vertex lists and covers are unsupported")]
    Unsupported,
    #[error("vertex {vertex} has degree {degree}, above the hint {hint}")]
    DegreeAboveHint { vertex: Vertex, degree: usize, hint: usize },
    #[error(transparent)]
    Sparsify(#[from] SparsifyError),
}

/// A fixed query plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryPlan {
    /// `n` degree queries, then neighbor slots `0..delta_hint` per vertex;
    /// slots at or beyond the answered degree are not issued.
    Scan { n: usize, delta_hint: usize },
    /// For every color `c`, the pairs of `V_c` whose smallest common color
    /// is `c`, so each pair is asked once.
    Classes { classes: Vec<Vec<Vertex>>, palettes: PaletteFamily },
}

impl QueryPlan {
    pub fn strategy(&self) -> Strategy {
        match self {
            QueryPlan::Scan { .. } => Strategy::Scan,
            QueryPlan::Classes { .. } => Strategy::Classes,
        }
    }

    /// Pair queries in plan order.
    pub fn pairs(&self) -> Box<dyn Iterator<Item = (Vertex, Vertex)> + '_> {
        match self {
            QueryPlan::Scan { .. } => Box::new(std::iter::empty()),
            QueryPlan::Classes { classes, palettes } => Box::new(classes.iter().enumerate().flat_map(move |(c, class)| {
                let c = c as Color;
                class.iter().enumerate().flat_map(move |(i, &u)| {
                    class[i + 1..]
                        .iter()
                        .filter(move |&&v| first_common(palettes.set(u), palettes.set(v)) == Some(c))
                        .map(move |&v| (u, v))
                })
            })),
        }
    }

    /// Upper bound on the queries the plan issues, computable before
    /// execution: `n + n·Δ_hint` for a scan, the exact pair count otherwise.
    pub fn cost_bound(&self) -> u64 {
        match self {
            QueryPlan::Scan { n, delta_hint } => (*n as u64) * (1 + *delta_hint as u64),
            QueryPlan::Classes { .. } => self.pairs().count() as u64,
        }
    }
}

fn first_common(a: &[Color], b: &[Color]) -> Option<Color> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Some(a[i]),
        }
    }
    None
}

/// Build a plan from the palettes alone. `q` is the global palette size;
/// `None` marks per-vertex lists, for which only the scan is available.
pub fn plan_queries(
    n: usize,
    fam: &PaletteFamily,
    q: Option<usize>,
    strategy: Strategy,
    delta_hint: usize,
) -> Result<QueryPlan, QueryError> {
    let scan = QueryPlan::Scan { n, delta_hint };
    let classes = || -> Result<QueryPlan, QueryError> {
        let q = q.ok_or(QueryError::Unsupported)?;
        Ok(QueryPlan::Classes {
            classes: fam.color_classes(q),
            palettes: fam.clone(),
        })
    };
    match strategy {
        Strategy::Scan => Ok(scan),
        Strategy::Classes => classes(),
        Strategy::Auto => {
            let classes = classes()?;
            Ok(if classes.cost_bound() < scan.cost_bound() { classes } else { scan })
        }
    }
}

/// Run a plan; returns the discovered conflict edges (sorted, `u < v`).
pub fn execute_plan(
    oracle: &mut QueryOracle<'_>,
    plan: &QueryPlan,
    fam: &PaletteFamily,
) -> Result<Vec<(Vertex, Vertex)>, QueryError> {
    let mut found = Vec::new();
    match plan {
        QueryPlan::Scan { n, delta_hint } => {
            let degrees: Vec<usize> = (0..*n).map(|v| oracle.degree(v)).collect();
            for (v, &deg) in degrees.iter().enumerate() {
                if deg > *delta_hint {
                    return Err(QueryError::DegreeAboveHint {
                        vertex: v,
                        degree: deg,
                        hint: *delta_hint,
                    });
                }
                for i in 0..deg {
                    let u = oracle.neighbor(v, i).expect("slot below the degree");
                    if v < u && sorted_intersects(fam.set(v), fam.set(u)) {
                        found.push((v, u));
                    }
                }
            }
        }
        QueryPlan::Classes { .. } => {
            for (u, v) in plan.pairs() {
                if oracle.pair(u, v) {
                    found.push((u.min(v), u.max(v)));
                }
            }
        }
    }
    found.sort_unstable();
    Ok(found)
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub strategy: Strategy,
    pub sampled: PaletteFamily,
    pub pruned: PaletteFamily,
    pub discovered: Vec<(Vertex, Vertex)>,
    pub counts: QueryCounts,
    pub conflict_graph: Graph,
    pub instance: Instance,
    pub result: Result<SolveReport, SolveFailure>,
}

/// Sample, plan, execute, prune on the discovered edges, solve.
pub fn end_to_end_query_color(
    oracle: &mut QueryOracle<'_>,
    params: &SparsifyParams,
    strategy: Strategy,
    solve_opts: &SolveOptions,
    seed: u64,
) -> Result<QueryOutcome, QueryError> {
    let n = oracle.n();
    let sampled = sample_palettes(Palette::Global(params.q), n, params.s, seed)?;
    let delta_hint = params.delta_ref.ceil() as usize;
    let plan = plan_queries(n, &sampled, Some(params.q), strategy, delta_hint)?;
    let discovered = execute_plan(oracle, &plan, &sampled)?;
    // Conflict counts only ever involve conflicting neighbors, so the
    // discovered edges suffice.
    let known = Graph::from_edges(n, discovered.iter().copied()).expect("discovered edges are simple");
    let pruned = prune(ConflictSource::Graph(&known), &sampled, params.prune_threshold);
    let conflict = build_conflict(&known, &pruned, None);
    let result = solve(&conflict.conflict_graph, &conflict.instance, solve_opts, seed);
    Ok(QueryOutcome {
        strategy: plan.strategy(),
        sampled,
        pruned,
        discovered,
        counts: oracle.counts(),
        conflict_graph: conflict.conflict_graph,
        instance: conflict.instance,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::verify_coloring;
    use crate::cover::ListAssignment;
    use crate::graph::gen_locally_sparse;
    use crate::sparsify::{conflict_edges, sparsify, Setting};
    use std::collections::BTreeSet;

    #[test]
    fn full_palettes_query_every_pair_once() {
        let fam = sample_palettes(Palette::Global(2), 7, 2, 0).unwrap();
        let plan = plan_queries(7, &fam, Some(2), Strategy::Classes, 6).unwrap();
        assert_eq!(plan.cost_bound(), 21);
    }

    #[test]
    fn scan_issues_n_plus_twice_m() {
        let g = gen_locally_sparse(200, 9, 3, 3).unwrap();
        let fam = sample_palettes(Palette::Global(20), 200, 3, 1).unwrap();
        let plan = plan_queries(200, &fam, Some(20), Strategy::Scan, 9).unwrap();
        let mut oracle = QueryOracle::new(&g);
        let found = execute_plan(&mut oracle, &plan, &fam).unwrap();
        assert_eq!(oracle.counts().total(), 200 + 2 * g.m() as u64);
        assert_eq!(found, conflict_edges(&g, &fam));
    }

    #[test]
    fn class_plan_covers_exactly_the_pair_union() {
        let g = gen_locally_sparse(150, 8, 3, 4).unwrap();
        let fam = sample_palettes(Palette::Global(30), 150, 4, 2).unwrap();
        let plan = plan_queries(150, &fam, Some(30), Strategy::Classes, 8).unwrap();
        let union: BTreeSet<(Vertex, Vertex)> = (0..150)
            .flat_map(|u| (u + 1..150).map(move |v| (u, v)))
            .filter(|&(u, v)| sorted_intersects(fam.set(u), fam.set(v)))
            .collect();
        let issued: Vec<_> = plan.pairs().collect();
        assert_eq!(issued.len(), union.len());
        assert_eq!(issued.iter().copied().collect::<BTreeSet<_>>(), union);
        let mut oracle = QueryOracle::new(&g);
        let found = execute_plan(&mut oracle, &plan, &fam).unwrap();
        assert_eq!(oracle.counts().pair, union.len() as u64);
        assert_eq!(found, conflict_edges(&g, &fam));
    }

    #[test]
    fn plans_do_not_depend_on_the_graph() {
        let fam = sample_palettes(Palette::Global(10), 60, 3, 8).unwrap();
        let a = plan_queries(60, &fam, Some(10), Strategy::Auto, 5).unwrap();
        let b = plan_queries(60, &fam, Some(10), Strategy::Auto, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pairs().collect::<Vec<_>>(), b.pairs().collect::<Vec<_>>());
    }

    #[test]
    fn auto_picks_the_cheaper_plan() {
        // Sparse palettes: classes are cheap.
        let fam = sample_palettes(Palette::Global(400), 100, 2, 3).unwrap();
        let plan = plan_queries(100, &fam, Some(400), Strategy::Auto, 50).unwrap();
        assert_eq!(plan.strategy(), Strategy::Classes);
        // Crowded palettes: scanning is cheaper.
        let fam = sample_palettes(Palette::Global(4), 100, 3, 3).unwrap();
        let plan = plan_queries(100, &fam, Some(4), Strategy::Auto, 3).unwrap();
        assert_eq!(plan.strategy(), Strategy::Scan);
    }

    #[test]
    fn classes_need_a_global_palette() {
        let fam = PaletteFamily::from_sets(vec![vec![1], vec![2]]);
        assert_eq!(plan_queries(2, &fam, None, Strategy::Classes, 1), Err(QueryError::Unsupported));
        assert!(plan_queries(2, &fam, None, Strategy::Scan, 1).is_ok());
    }

    #[test]
    fn disjoint_palettes_issue_no_pair_queries() {
        let fam = PaletteFamily::from_sets((0..5).map(|v| vec![v as Color]).collect());
        let plan = plan_queries(5, &fam, Some(5), Strategy::Classes, 4).unwrap();
        let g = crate::graph::named::complete(5);
        let mut oracle = QueryOracle::new(&g);
        assert!(execute_plan(&mut oracle, &plan, &fam).unwrap().is_empty());
        assert_eq!(oracle.counts().total(), 0);
    }

    #[test]
    fn end_to_end_matches_offline_pipeline() {
        let g = gen_locally_sparse(300, 10, 3, 6).unwrap();
        let p = SparsifyParams::explicit(40, 12, 10.0, 0.1, 1.0).unwrap();
        for strategy in [Strategy::Scan, Strategy::Classes, Strategy::Auto] {
            let mut oracle = QueryOracle::new(&g);
            let out = end_to_end_query_color(&mut oracle, &p, strategy, &SolveOptions::default(), 9).unwrap();
            let offline = sparsify(&g, Setting::Plain, &p, 9).unwrap();
            assert_eq!(out.pruned, offline.pruned);
            assert_eq!(out.conflict_graph, offline.conflict.conflict_graph);
            assert!(offline.pruned.min_size() > 0);
            let report = out.result.unwrap();
            assert!(verify_coloring(&g, &Instance::Lists(ListAssignment::uniform(300, 40)), &report.coloring).passed());
        }
    }

    #[test]
    fn edgeless_hidden_graph() {
        let g = Graph::empty(30);
        let p = SparsifyParams::explicit(6, 2, 1.0, 0.1, 1.0).unwrap();
        let mut oracle = QueryOracle::new(&g);
        let out = end_to_end_query_color(&mut oracle, &p, Strategy::Scan, &SolveOptions::default(), 1).unwrap();
        assert_eq!(out.counts.total(), 30);
        assert!(out.result.is_ok());
    }
}
