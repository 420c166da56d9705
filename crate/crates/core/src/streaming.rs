//! Single-pass edge-stream simulator with exact space accounting.
//!
//! Word model: one word per vertex id, color id or counter. A retained edge
//! costs 2 words, each retained matching pair 2 more, the sampled palettes
//! `n·s` words, and every allocated `(v, c)` counter 1 word.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{Color, CorrespondenceCover, Instance, ListAssignment};
use crate::graph::{Graph, Vertex};
use crate::nibble::{solve, SolveFailure, SolveOptions, SolveReport};
use crate::rng::{self, Purpose};
use crate::sparsify::{prune_with_counts, sample_palettes, Palette, PaletteFamily, SparsifyError, SparsifyParams};

/// One stream item: an edge and, for covers, its matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub u: Vertex,
    pub v: Vertex,
    pub pairs: Vec<(Color, Color)>,
}

/// Edges in arrival order. For covers the per-vertex lists are known before
/// the first record, like `n` and `Δ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeStream {
    pub n: usize,
    pub records: Vec<StreamRecord>,
    pub lists: Option<Vec<Vec<Color>>>,
}

impl EdgeStream {
    pub fn from_graph(g: &Graph) -> Self {
        EdgeStream {
            n: g.n(),
            records: g.edges().map(|(u, v)| StreamRecord { u, v, pairs: Vec::new() }).collect(),
            lists: None,
        }
    }

    /// One record per edge of `g`, carrying its (possibly empty) matching.
    pub fn from_cover(g: &Graph, cov: &CorrespondenceCover) -> Self {
        let records = g
            .edges()
            .map(|(u, v)| StreamRecord {
                u,
                v,
                pairs: cov.matchings().get(&(u, v)).cloned().unwrap_or_default(),
            })
            .collect();
        EdgeStream {
            n: g.n(),
            records,
            lists: Some(cov.lists().to_vec()),
        }
    }

    /// Same records in a uniformly shuffled order.
    pub fn permuted(mut self, seed: u64) -> Self {
        self.records.shuffle(&mut rng::stream(seed, Purpose::StreamOrder));
        self
    }

    /// Rebuild the streamed graph (for offline checks only).
    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.n, self.records.iter().map(|r| (r.u, r.v))).expect("stream edges form a simple graph")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLedger {
    pub stored_edges: u64,
    pub stored_pairs: u64,
    pub palette_words: u64,
    pub counter_words: u64,
    pub peak_words: u64,
}

impl SpaceLedger {
    pub fn current_words(&self) -> u64 {
        2 * self.stored_edges + 2 * self.stored_pairs + self.palette_words + self.counter_words
    }

    fn touch(&mut self) {
        self.peak_words = self.peak_words.max(self.current_words());
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamOptions {
    /// Recompute the pruning threshold from the observed maximum degree
    /// instead of the a-priori `Δ`. Costs one degree counter per vertex.
    pub observed_delta: bool,
    /// Abort once the stored words exceed this.
    pub space_cap: Option<u64>,
    pub solve: SolveOptions,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error(transparent)]
    Sparsify(#[from] SparsifyError),
    #[error("space cap of {cap} words exceeded ({words} words)")]
    SpaceCapExceeded { cap: u64, words: u64 },
    #[error("stream has no cover lists")]
    MissingLists,
}

#[derive(Debug, Clone)]
pub struct StreamOutcome {
    pub sampled: PaletteFamily,
    pub pruned: PaletteFamily,
    /// Retained edges in arrival order.
    pub retained: Vec<(Vertex, Vertex)>,
    pub ledger: SpaceLedger,
    /// Instance handed to the solver after pruning.
    pub conflict_graph: Graph,
    pub instance: Instance,
    pub result: Result<SolveReport, SolveFailure>,
}

impl StreamOutcome {
    /// Retained edges as a sorted set, for comparison with offline runs.
    pub fn retained_sorted(&self) -> Vec<(Vertex, Vertex)> {
        let mut edges = self.retained.clone();
        edges.sort_unstable();
        edges
    }
}

/// Plain `q`-coloring over a stream.
pub fn stream_color(
    stream: &EdgeStream,
    params: &SparsifyParams,
    opts: &StreamOptions,
    seed: u64,
) -> Result<StreamOutcome, StreamError> {
    run(stream, Palette::Global(params.q), false, params, opts, seed)
}

/// Correspondence coloring over a stream whose records carry matchings.
pub fn stream_color_correspondence(
    stream: &EdgeStream,
    params: &SparsifyParams,
    opts: &StreamOptions,
    seed: u64,
) -> Result<StreamOutcome, StreamError> {
    let lists = stream.lists.as_ref().ok_or(StreamError::MissingLists)?;
    run(stream, Palette::PerVertex(lists), true, params, opts, seed)
}

/// Lazily allocated `(v, c)` counters, aligned with the sampled sets.
struct Counters {
    slots: Vec<Vec<Option<usize>>>,
}

impl Counters {
    fn bump(&mut self, fam: &PaletteFamily, v: Vertex, c: Color, ledger: &mut SpaceLedger) {
        let i = fam.set(v).binary_search(&c).expect("counted color is sampled");
        let slot = &mut self.slots[v][i];
        if slot.is_none() {
            ledger.counter_words += 1;
        }
        *slot.get_or_insert(0) += 1;
    }

    fn counts(&self) -> Vec<Vec<usize>> {
        self.slots.iter().map(|row| row.iter().map(|c| c.unwrap_or(0)).collect()).collect()
    }
}

fn run(
    stream: &EdgeStream,
    palette: Palette<'_>,
    cover: bool,
    params: &SparsifyParams,
    opts: &StreamOptions,
    seed: u64,
) -> Result<StreamOutcome, StreamError> {
    let n = stream.n;
    let sampled = sample_palettes(palette, n, params.s, seed)?;
    let mut ledger = SpaceLedger {
        palette_words: sampled.total_size() as u64,
        ..SpaceLedger::default()
    };
    let mut degrees = opts.observed_delta.then(|| {
        ledger.counter_words += n as u64;
        vec![0usize; n]
    });
    ledger.touch();
    let check_cap = |ledger: &SpaceLedger| match opts.space_cap {
        Some(cap) if ledger.current_words() > cap => Err(StreamError::SpaceCapExceeded {
            cap,
            words: ledger.current_words(),
        }),
        _ => Ok(()),
    };
    check_cap(&ledger)?;

    let mut counters = Counters {
        slots: sampled.sets().iter().map(|s| vec![None; s.len()]).collect(),
    };
    let mut retained = Vec::new();
    let mut retained_pairs: Vec<Vec<(Color, Color)>> = Vec::new();
    for record in &stream.records {
        let (u, v) = (record.u, record.v);
        if let Some(deg) = degrees.as_mut() {
            deg[u] += 1;
            deg[v] += 1;
        }
        if cover {
            let live: Vec<(Color, Color)> = record
                .pairs
                .iter()
                .copied()
                .filter(|&(a, b)| sampled.contains(u, a) && sampled.contains(v, b))
                .collect();
            if live.is_empty() {
                continue;
            }
            for &(a, b) in &live {
                counters.bump(&sampled, u, a, &mut ledger);
                counters.bump(&sampled, v, b, &mut ledger);
            }
            ledger.stored_pairs += live.len() as u64;
            // Stored oriented from the smaller endpoint.
            retained_pairs.push(if u < v { live } else { live.into_iter().map(|(a, b)| (b, a)).collect() });
        } else {
            let common: Vec<Color> = sampled.set(u).iter().copied().filter(|&c| sampled.contains(v, c)).collect();
            if common.is_empty() {
                continue;
            }
            for c in common {
                counters.bump(&sampled, u, c, &mut ledger);
                counters.bump(&sampled, v, c, &mut ledger);
            }
            retained_pairs.push(Vec::new());
        }
        retained.push((u.min(v), u.max(v)));
        ledger.stored_edges += 1;
        ledger.touch();
        check_cap(&ledger)?;
    }

    let threshold = match &degrees {
        Some(deg) => {
            let observed = deg.iter().copied().max().unwrap_or(0) as f64;
            params.with_delta_ref(observed).prune_threshold
        }
        None => params.prune_threshold,
    };
    let pruned = prune_with_counts(&sampled, &counters.counts(), threshold);

    // Conflict instance from the retained records only.
    let (edges, instance) = if cover {
        let lists = stream.lists.as_ref().expect("cover streams carry lists");
        let bound = lists.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
        let mut matchings = std::collections::BTreeMap::new();
        for (&(u, v), pairs) in retained.iter().zip(&retained_pairs) {
            let kept: Vec<(Color, Color)> = pairs
                .iter()
                .copied()
                .filter(|&(a, b)| pruned.contains(u, a) && pruned.contains(v, b))
                .collect();
            if !kept.is_empty() {
                matchings.insert((u, v), kept);
            }
        }
        let edges: Vec<_> = matchings.keys().copied().collect();
        (edges, Instance::Cover(CorrespondenceCover::new(bound, pruned.sets().to_vec(), matchings)))
    } else {
        let edges: Vec<_> = retained
            .iter()
            .copied()
            .filter(|&(u, v)| pruned.set(u).iter().any(|&c| pruned.contains(v, c)))
            .collect();
        (edges, Instance::Lists(ListAssignment::new(pruned.sets().to_vec()).expect("sets are duplicate free")))
    };
    let conflict_graph = Graph::from_edges(n, edges).expect("retained edges are simple");
    let result = solve(&conflict_graph, &instance, &opts.solve, seed);
    Ok(StreamOutcome {
        sampled,
        pruned,
        retained,
        ledger,
        conflict_graph,
        instance,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::verify_coloring;
    use crate::cover::{cover_from_lists, random_cover};
    use crate::graph::gen_locally_sparse;
    use crate::graph::named::*;
    use crate::sparsify::{build_conflict, conflict_edges, conflict_edges_cover, sparsify, Setting};

    fn params(q: usize, s: usize, delta: f64) -> SparsifyParams {
        SparsifyParams::explicit(q, s, delta, 0.1, 1.0).unwrap()
    }

    #[test]
    fn disjoint_palettes_store_no_edges() {
        let g = path(4);
        let stream = EdgeStream::from_graph(&g);
        // q = 8, s = 2 on a path: search for a seed whose palettes are
        // pairwise disjoint along the path.
        let p = params(8, 2, 2.0);
        let seed = (0..500)
            .find(|&seed| {
                let fam = sample_palettes(Palette::Global(8), 4, 2, seed).unwrap();
                conflict_edges(&g, &fam).is_empty()
            })
            .unwrap();
        let out = stream_color(&stream, &p, &StreamOptions::default(), seed).unwrap();
        assert!(out.retained.is_empty());
        assert_eq!(out.ledger.peak_words, 8);
        assert!(verify_coloring(&g, &Instance::Lists(ListAssignment::uniform(4, 8)), &out.result.unwrap().coloring).passed());
    }

    #[test]
    fn retention_matches_offline_and_ignores_order() {
        let g = gen_locally_sparse(300, 12, 4, 5).unwrap();
        let p = params(30, 4, 12.0);
        for seed in 0..5 {
            let a = stream_color(&EdgeStream::from_graph(&g), &p, &StreamOptions::default(), seed).unwrap();
            let b = stream_color(&EdgeStream::from_graph(&g).permuted(seed + 100), &p, &StreamOptions::default(), seed)
                .unwrap();
            let offline = sparsify(&g, Setting::Plain, &p, seed).unwrap();
            assert_eq!(a.retained_sorted(), conflict_edges(&g, &offline.sampled));
            assert_eq!(a.retained_sorted(), b.retained_sorted());
            assert_eq!(a.pruned, offline.pruned);
            assert_eq!(b.pruned, offline.pruned);
            assert_eq!(a.conflict_graph, offline.conflict.conflict_graph);
            assert_eq!(a.ledger, b.ledger);
            assert!(a.ledger.peak_words >= 2 * a.ledger.stored_edges + a.ledger.palette_words);
        }
    }

    #[test]
    fn empty_matchings_store_only_palettes() {
        let g = cycle(6);
        let cov = CorrespondenceCover::new(
            18,
            (0..6).map(|v| vec![3 * v, 3 * v + 1, 3 * v + 2]).collect(),
            Default::default(),
        );
        let stream = EdgeStream::from_cover(&g, &cov);
        let out = stream_color_correspondence(&stream, &params(3, 2, 2.0), &StreamOptions::default(), 1).unwrap();
        assert!(out.retained.is_empty());
        assert_eq!(out.ledger.peak_words, 12);
        assert!(verify_coloring(&g, &Instance::Cover(cov), &out.result.unwrap().coloring).passed());
    }

    #[test]
    fn canonical_cover_tracks_the_plain_stream() {
        let g = gen_locally_sparse(120, 8, 3, 2).unwrap();
        let q = 20;
        let cov = cover_from_lists(&g, &ListAssignment::uniform(120, q));
        let p = params(q, 4, 8.0);
        for seed in 0..5 {
            let plain = stream_color(&EdgeStream::from_graph(&g), &p, &StreamOptions::default(), seed).unwrap();
            let dp = stream_color_correspondence(&EdgeStream::from_cover(&g, &cov), &p, &StreamOptions::default(), seed)
                .unwrap();
            assert_eq!(plain.retained, dp.retained);
            assert_eq!(plain.conflict_graph, dp.conflict_graph);
            let full = Instance::Cover(cov.clone());
            if let Ok(report) = &dp.result {
                assert!(verify_coloring(&g, &full, &report.coloring).passed());
            }
        }
    }

    #[test]
    fn cover_stream_matches_offline_conflicts() {
        let g = gen_locally_sparse(150, 8, 3, 7).unwrap();
        let mut r = rng::stream(3, Purpose::RandomCover);
        let cov = random_cover(&g, 12, 0.7, &mut r);
        let p = params(12, 4, 8.0);
        for seed in 0..5 {
            let out = stream_color_correspondence(
                &EdgeStream::from_cover(&g, &cov).permuted(seed),
                &p,
                &StreamOptions::default(),
                seed,
            )
            .unwrap();
            let offline = sparsify(&g, Setting::Cover(&cov), &p, seed).unwrap();
            assert_eq!(out.retained_sorted(), conflict_edges_cover(&cov, &offline.sampled));
            assert_eq!(out.pruned, offline.pruned);
            let rebuilt = build_conflict(&g, &offline.pruned, Some(&cov));
            assert_eq!(out.instance, rebuilt.instance);
            assert!(out.ledger.stored_pairs <= out.ledger.stored_edges * p.s as u64);
        }
    }

    #[test]
    fn space_cap_is_signalled() {
        let g = complete(10);
        let opts = StreamOptions {
            space_cap: Some(25),
            ..StreamOptions::default()
        };
        let err = stream_color(&EdgeStream::from_graph(&g), &params(4, 2, 9.0), &opts, 0).unwrap_err();
        assert!(matches!(err, StreamError::SpaceCapExceeded { cap: 25, .. }));
    }

    #[test]
    fn observed_delta_costs_a_counter_per_vertex() {
        let g = gen_locally_sparse(50, 5, 2, 1).unwrap();
        let p = params(10, 3, 5.0);
        let opts = StreamOptions {
            observed_delta: true,
            ..StreamOptions::default()
        };
        let a = stream_color(&EdgeStream::from_graph(&g), &p, &StreamOptions::default(), 4).unwrap();
        let b = stream_color(&EdgeStream::from_graph(&g), &p, &opts, 4).unwrap();
        assert_eq!(b.ledger.counter_words, a.ledger.counter_words + 50);
    }
}
