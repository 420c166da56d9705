//! Palette sampling, high-conflict color pruning and conflict-instance
//! construction.
//!
//! Logarithms are natural throughout. Palettes are drawn from a single
//! ChaCha stream in ascending vertex order; for each vertex an `s`-subset of
//! positions in its sorted palette is drawn with `rand::seq::index::sample`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{Color, CorrespondenceCover, Instance, ListAssignment};
use crate::graph::{sorted_intersects, Graph, Vertex};
use crate::rng::{self, Purpose};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsifyError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("palette of vertex {vertex} has {size} colors, fewer than the sample size {s}")]
    PaletteTooSmall { vertex: Vertex, size: usize, s: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamWarning {
    /// `k` lies outside `[1, Δ^(2αγ)]`; the formulas are evaluated anyway.
    KOutsideRange { k: usize, upper: f64 },
    /// `s` exceeded `q`; the whole palette is sampled.
    Degenerate { s_formula: f64, q: usize },
}

/// Palette size, sample size and pruning threshold for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyParams {
    pub q: usize,
    pub s: usize,
    pub alpha: Option<f64>,
    pub gamma: f64,
    pub epsilon: f64,
    /// `ε² / (3(1+γ))`.
    pub gamma_prime: f64,
    /// `3 γ'^(-3/2)`.
    pub big_c: f64,
    /// Δ(G) for plain and list coloring, the cover degree bound `d` for covers.
    pub delta_ref: f64,
    /// `(1+γ') s Δ_ref / q`; colors whose conflict count exceeds it are pruned.
    pub prune_threshold: f64,
    pub degenerate: bool,
    pub warnings: Vec<ParamWarning>,
}

pub fn gamma_prime(gamma: f64, epsilon: f64) -> f64 {
    epsilon * epsilon / (3.0 * (1.0 + gamma))
}

pub fn big_c(gamma_prime: f64) -> f64 {
    3.0 * gamma_prime.powf(-1.5)
}

fn check_unit_interval(name: &str, x: f64) -> Result<(), SparsifyError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(SparsifyError::InvalidParameters(format!("{name} = {x} must lie in (0, 1)")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), SparsifyError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(SparsifyError::InvalidParameters(format!("epsilon = {epsilon} must be positive")))
    }
}

/// Palette and sample sizes for a `k`-locally-sparse graph of maximum degree
/// `delta` on `n` vertices:
/// `q = ⌈4(1+γ+ε)Δ / ln(Δ^α/√k)⌉` and `s = ⌈Δ^α + C√(ln n)⌉`.
pub fn derive_params(
    delta: usize,
    n: usize,
    k: usize,
    alpha: f64,
    gamma: f64,
    epsilon: f64,
) -> Result<SparsifyParams, SparsifyError> {
    check_unit_interval("alpha", alpha)?;
    check_unit_interval("gamma", gamma)?;
    check_epsilon(epsilon)?;
    if delta == 0 || n == 0 {
        return Err(SparsifyError::InvalidParameters("delta and n must be positive".into()));
    }
    let mut warnings = Vec::new();
    let delta_f = delta as f64;
    let upper = delta_f.powf(2.0 * alpha * gamma);
    if k == 0 || k as f64 > upper {
        warnings.push(ParamWarning::KOutsideRange { k, upper });
    }
    // k = 0 (no neighborhood edges) is covered by the k = 1 formula.
    let k_eff = k.max(1) as f64;
    let log_arg = delta_f.powf(alpha) / k_eff.sqrt();
    if log_arg <= 1.0 {
        return Err(SparsifyError::InvalidParameters(format!(
            "Δ^α = {} must exceed √k = {}",
            delta_f.powf(alpha),
            k_eff.sqrt()
        )));
    }
    let q = (4.0 * (1.0 + gamma + epsilon) * delta_f / log_arg.ln()).ceil() as usize;
    let gp = gamma_prime(gamma, epsilon);
    let c = big_c(gp);
    let s_formula = delta_f.powf(alpha) + c * (n as f64).ln().sqrt();
    let mut s = s_formula.ceil() as usize;
    let degenerate = s > q;
    if degenerate {
        warnings.push(ParamWarning::Degenerate { s_formula, q });
        s = q;
    }
    Ok(SparsifyParams {
        q,
        s,
        alpha: Some(alpha),
        gamma,
        epsilon,
        gamma_prime: gp,
        big_c: c,
        delta_ref: delta_f,
        prune_threshold: (1.0 + gp) * s as f64 * delta_f / q as f64,
        degenerate,
        warnings,
    })
}

impl SparsifyParams {
    /// Parameters with `q` and `s` fixed by the caller, e.g. the
    /// `(Δ+1, Θ(log n))` baseline regime.
    pub fn explicit(q: usize, s: usize, delta_ref: f64, gamma: f64, epsilon: f64) -> Result<Self, SparsifyError> {
        check_unit_interval("gamma", gamma)?;
        check_epsilon(epsilon)?;
        if q == 0 || s == 0 || s > q {
            return Err(SparsifyError::InvalidParameters(format!("need q ≥ s ≥ 1, got q = {q}, s = {s}")));
        }
        let gp = gamma_prime(gamma, epsilon);
        Ok(SparsifyParams {
            q,
            s,
            alpha: None,
            gamma,
            epsilon,
            gamma_prime: gp,
            big_c: big_c(gp),
            delta_ref,
            prune_threshold: (1.0 + gp) * s as f64 * delta_ref / q as f64,
            degenerate: s == q,
            warnings: Vec::new(),
        })
    }

    /// Same parameters with the threshold recomputed for another `Δ_ref`.
    pub fn with_delta_ref(&self, delta_ref: f64) -> Self {
        let mut p = self.clone();
        p.delta_ref = delta_ref;
        p.prune_threshold = (1.0 + p.gamma_prime) * p.s as f64 * delta_ref / p.q as f64;
        p
    }
}

/// Where each vertex's palette comes from.
#[derive(Debug, Clone, Copy)]
pub enum Palette<'a> {
    /// Every vertex samples from `0..q`.
    Global(usize),
    /// Vertex `v` samples from the sorted list `lists[v]`.
    PerVertex(&'a [Vec<Color>]),
}

impl Palette<'_> {
    fn size(&self, v: Vertex) -> usize {
        match self {
            Palette::Global(q) => *q,
            Palette::PerVertex(lists) => lists[v].len(),
        }
    }

    fn color(&self, v: Vertex, index: usize) -> Color {
        match self {
            Palette::Global(_) => index as Color,
            Palette::PerVertex(lists) => lists[v][index],
        }
    }
}

/// Per-vertex sorted color sets, either `S(v)` or the pruned `S'(v)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaletteFamily {
    sets: Vec<Vec<Color>>,
}

impl PaletteFamily {
    pub fn from_sets(mut sets: Vec<Vec<Color>>) -> Self {
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
        }
        PaletteFamily { sets }
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, v: Vertex) -> &[Color] {
        &self.sets[v]
    }

    pub fn sets(&self) -> &[Vec<Color>] {
        &self.sets
    }

    pub fn contains(&self, v: Vertex, c: Color) -> bool {
        self.sets[v].binary_search(&c).is_ok()
    }

    pub fn total_size(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn min_size(&self) -> usize {
        self.sets.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_subfamily_of(&self, other: &PaletteFamily) -> bool {
        self.n() == other.n()
            && self
                .sets
                .iter()
                .zip(&other.sets)
                .all(|(small, big)| small.iter().all(|c| big.binary_search(c).is_ok()))
    }

    /// Color classes `V_c = {v : c ∈ S(v)}` for colors `0..q`.
    pub fn color_classes(&self, q: usize) -> Vec<Vec<Vertex>> {
        let mut classes = vec![Vec::new(); q];
        for (v, set) in self.sets.iter().enumerate() {
            for &c in set {
                classes[c as usize].push(v);
            }
        }
        classes
    }

    pub fn into_list_assignment(self) -> ListAssignment {
        ListAssignment::new(self.sets).expect("palette sets are duplicate free")
    }
}

/// Draw an independent uniform `s`-subset of every vertex's palette.
pub fn sample_palettes(palette: Palette<'_>, n: usize, s: usize, seed: u64) -> Result<PaletteFamily, SparsifyError> {
    if s == 0 {
        return Err(SparsifyError::InvalidParameters("sample size s must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, Purpose::Palette);
    let mut sets = Vec::with_capacity(n);
    for v in 0..n {
        let size = palette.size(v);
        if size < s {
            return Err(SparsifyError::PaletteTooSmall { vertex: v, size, s });
        }
        let mut set: Vec<Color> = rand::seq::index::sample(&mut rng, size, s)
            .into_iter()
            .map(|i| palette.color(v, i))
            .collect();
        set.sort_unstable();
        sets.push(set);
    }
    Ok(PaletteFamily { sets })
}

/// What the conflict count of a sampled color is measured against.
#[derive(Debug, Clone, Copy)]
pub enum ConflictSource<'a> {
    /// `|{u ∈ N(v) : c ∈ S(u)}|` (plain and list coloring).
    Graph(&'a Graph),
    /// `|N_H(c) ∩ S|` over the cover graph (correspondence coloring).
    Cover(&'a CorrespondenceCover),
}

/// Conflict count of every sampled color, aligned with `fam`'s sets.
pub fn conflict_counts(source: ConflictSource<'_>, fam: &PaletteFamily) -> Vec<Vec<usize>> {
    match source {
        ConflictSource::Graph(g) => (0..fam.n())
            .map(|v| {
                let sv = fam.set(v);
                let mut counts = vec![0usize; sv.len()];
                for &u in g.neighbors(v) {
                    let su = fam.set(u);
                    let (mut i, mut j) = (0, 0);
                    while i < sv.len() && j < su.len() {
                        match sv[i].cmp(&su[j]) {
                            std::cmp::Ordering::Less => i += 1,
                            std::cmp::Ordering::Greater => j += 1,
                            std::cmp::Ordering::Equal => {
                                counts[i] += 1;
                                i += 1;
                                j += 1;
                            }
                        }
                    }
                }
                counts
            })
            .collect(),
        ConflictSource::Cover(cov) => {
            let h = cov.cover_graph();
            let mut sampled = vec![false; h.color_bound()];
            for set in fam.sets() {
                for &c in set {
                    sampled[c as usize] = true;
                }
            }
            fam.sets()
                .iter()
                .map(|set| {
                    set.iter()
                        .map(|&c| h.neighbors(c).iter().filter(|&&x| sampled[x as usize]).count())
                        .collect()
                })
                .collect()
        }
    }
}

/// Keep the colors whose conflict count is at most `threshold`.
pub fn prune(source: ConflictSource<'_>, fam: &PaletteFamily, threshold: f64) -> PaletteFamily {
    let counts = conflict_counts(source, fam);
    prune_with_counts(fam, &counts, threshold)
}

pub(crate) fn prune_with_counts(fam: &PaletteFamily, counts: &[Vec<usize>], threshold: f64) -> PaletteFamily {
    let sets = fam
        .sets()
        .iter()
        .zip(counts)
        .map(|(set, counts)| {
            set.iter()
                .zip(counts)
                .filter(|(_, &count)| count as f64 <= threshold)
                .map(|(&c, _)| c)
                .collect()
        })
        .collect();
    PaletteFamily { sets }
}

/// Edges `uv` (with `u < v`) whose sets share a color.
pub fn conflict_edges(g: &Graph, fam: &PaletteFamily) -> Vec<(Vertex, Vertex)> {
    g.edges()
        .filter(|&(u, v)| sorted_intersects(fam.set(u), fam.set(v)))
        .collect()
}

/// Edges whose matching still has a pair inside `S(u) × S(v)`.
pub fn conflict_edges_cover(cov: &CorrespondenceCover, fam: &PaletteFamily) -> Vec<(Vertex, Vertex)> {
    cov.matchings()
        .iter()
        .filter(|(&(u, v), pairs)| pairs.iter().any(|&(a, b)| fam.contains(u, a) && fam.contains(v, b)))
        .map(|(&key, _)| key)
        .collect()
}

/// Conflict graph plus the restricted instance a colorer has to solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictInstance {
    pub conflict_graph: Graph,
    pub instance: Instance,
}

/// Keep exactly the edges that can become monochromatic (or matched) when
/// every vertex uses a color of `fam`. Any proper coloring of the result
/// with `φ(v) ∈ fam(v)` is proper for the original graph or cover.
pub fn build_conflict(g: &Graph, fam: &PaletteFamily, cover: Option<&CorrespondenceCover>) -> ConflictInstance {
    match cover {
        None => {
            let edges = conflict_edges(g, fam);
            ConflictInstance {
                conflict_graph: Graph::from_edges(g.n(), edges).expect("subgraph of a simple graph"),
                instance: Instance::Lists(fam.clone().into_list_assignment()),
            }
        }
        Some(cov) => {
            let restricted = cov.restrict(|v, c| fam.contains(v, c));
            let edges: Vec<_> = restricted.matchings().keys().copied().collect();
            ConflictInstance {
                conflict_graph: Graph::from_edges(g.n(), edges).expect("subgraph of a simple graph"),
                instance: Instance::Cover(restricted),
            }
        }
    }
}

/// Coloring setting for the offline pipeline.
#[derive(Debug, Clone, Copy)]
pub enum Setting<'a> {
    /// Ordinary `q`-coloring from the palette `0..q`.
    Plain,
    /// List coloring from a `q`-fold list assignment.
    Lists(&'a ListAssignment),
    /// Correspondence coloring from a `q`-fold cover.
    Cover(&'a CorrespondenceCover),
}

impl<'a> Setting<'a> {
    pub fn palette(&self, q: usize) -> Palette<'a> {
        match *self {
            Setting::Plain => Palette::Global(q),
            Setting::Lists(l) => Palette::PerVertex(l.lists()),
            Setting::Cover(c) => Palette::PerVertex(c.lists()),
        }
    }

    /// The full instance the sparsified coloring must be proper for.
    pub fn full_instance(&self, n: usize, q: usize) -> Instance {
        match *self {
            Setting::Plain => Instance::Lists(ListAssignment::uniform(n, q)),
            Setting::Lists(l) => Instance::Lists(l.clone()),
            Setting::Cover(c) => Instance::Cover(c.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sparsified {
    pub sampled: PaletteFamily,
    pub pruned: PaletteFamily,
    pub conflict: ConflictInstance,
}

/// Sample, prune and build the conflict instance in one go.
pub fn sparsify(g: &Graph, setting: Setting<'_>, params: &SparsifyParams, seed: u64) -> Result<Sparsified, SparsifyError> {
    let sampled = sample_palettes(setting.palette(params.q), g.n(), params.s, seed)?;
    let (source, cover) = match setting {
        Setting::Cover(c) => (ConflictSource::Cover(c), Some(c)),
        _ => (ConflictSource::Graph(g), None),
    };
    let pruned = prune(source, &sampled, params.prune_threshold);
    let conflict = build_conflict(g, &pruned, cover);
    Ok(Sparsified {
        sampled,
        pruned,
        conflict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{verify_coloring, PartialColoring};
    use crate::cover::{cover_from_lists, random_cover, validate_cover};
    use crate::graph::gen_locally_sparse;
    use crate::graph::named::*;
    use rand::Rng;
    use std::collections::BTreeMap;

    #[test]
    fn gamma_prime_and_c_closed_forms() {
        let gp = gamma_prime(0.1, 0.05);
        assert!((gp - 0.0025 / 3.3).abs() < 1e-18);
        assert!((big_c(gp) - 3.0 * gp.powf(-1.5)).abs() < 1e-9);
    }

    #[test]
    fn palette_size_at_a_million() {
        let p = derive_params(1_000_000, 1_000_000, 1, 0.5, 0.1, 0.05).unwrap();
        // 4·1.15·10⁶ / ln(10³) = 665 918.6…; independently via log10.
        let expected = (4.6e6 / (3.0 * std::f64::consts::LN_10)).ceil() as usize;
        assert_eq!(p.q, expected);
        assert_eq!(p.q, 665_919);
        // C = 3·1320^(3/2) ≈ 143 874 and √(ln 10⁶) ≈ 3.7169.
        assert_eq!(p.s, 535_769);
        assert!(!p.degenerate);
    }

    #[test]
    fn log_argument_at_one_is_rejected() {
        // Δ^α = 10 = √100.
        assert!(matches!(
            derive_params(100, 50, 100, 0.5, 0.1, 0.05),
            Err(SparsifyError::InvalidParameters(_))
        ));
    }

    #[test]
    fn out_of_range_k_warns_but_evaluates() {
        let p = derive_params(400, 100, 30, 0.5, 0.1, 1.0).unwrap();
        assert!(p.warnings.iter().any(|w| matches!(w, ParamWarning::KOutsideRange { .. })));
        assert!(p.q >= p.s);
    }

    #[test]
    fn sampling_whole_palette_when_s_equals_q() {
        let fam = sample_palettes(Palette::Global(5), 4, 5, 1).unwrap();
        for v in 0..4 {
            assert_eq!(fam.set(v), &[0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn zero_sample_size_is_an_error() {
        assert!(sample_palettes(Palette::Global(5), 4, 0, 1).is_err());
        let lists = vec![vec![1, 2], vec![3]];
        assert_eq!(
            sample_palettes(Palette::PerVertex(&lists), 2, 2, 0),
            Err(SparsifyError::PaletteTooSmall { vertex: 1, size: 1, s: 2 })
        );
    }

    #[test]
    fn inclusion_frequency_matches_hypergeometric_marginal() {
        // 10⁵ vertices, each an independent draw; color 0 appears with
        // probability s/q = 0.3.
        let draws = 100_000;
        let fam = sample_palettes(Palette::Global(10), draws, 3, 2024).unwrap();
        let sigma = (0.3f64 * 0.7 / draws as f64).sqrt();
        for c in 0..10 {
            let hits = fam.sets().iter().filter(|s| s.contains(&c)).count();
            let freq = hits as f64 / draws as f64;
            assert!((freq - 0.3).abs() <= 3.0 * sigma, "color {c}: {freq}");
        }
    }

    #[test]
    fn edgeless_graph_keeps_everything() {
        let g = Graph::empty(6);
        let fam = sample_palettes(Palette::Global(8), 6, 3, 5).unwrap();
        assert_eq!(prune(ConflictSource::Graph(&g), &fam, 0.0), fam);
    }

    #[test]
    fn zero_threshold_removes_conflicting_colors() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let fam = PaletteFamily::from_sets(vec![vec![1, 2], vec![2, 3]]);
        let pruned = prune(ConflictSource::Graph(&g), &fam, 0.0);
        assert_eq!(pruned.set(0), &[1]);
        assert_eq!(pruned.set(1), &[3]);
    }

    #[test]
    fn conflict_edges_follow_shared_colors() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let apart = PaletteFamily::from_sets(vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(build_conflict(&g, &apart, None).conflict_graph.m(), 0);
        let shared = PaletteFamily::from_sets(vec![vec![1, 2], vec![2, 3]]);
        assert_eq!(build_conflict(&g, &shared, None).conflict_graph.m(), 1);
    }

    #[test]
    fn cover_conflict_requires_a_surviving_pair() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let mut m = BTreeMap::new();
        m.insert((0, 1), vec![(1, 3)]);
        let cov = CorrespondenceCover::new(5, vec![vec![1, 2], vec![3, 4]], m);
        let fam = PaletteFamily::from_sets(vec![vec![1], vec![4]]);
        let conflict = build_conflict(&g, &fam, Some(&cov));
        assert_eq!(conflict.conflict_graph.m(), 0);
        let fam = PaletteFamily::from_sets(vec![vec![1], vec![3]]);
        assert_eq!(build_conflict(&g, &fam, Some(&cov)).conflict_graph.m(), 1);
    }

    #[test]
    fn raising_the_threshold_never_shrinks_sets() {
        let g = gen_locally_sparse(80, 10, 3, 9).unwrap();
        let fam = sample_palettes(Palette::Global(12), 80, 4, 9).unwrap();
        let mut previous = prune(ConflictSource::Graph(&g), &fam, 0.0);
        for t in 1..12 {
            let next = prune(ConflictSource::Graph(&g), &fam, t as f64);
            assert!(previous.is_subfamily_of(&next));
            assert!(next.is_subfamily_of(&fam));
            previous = next;
        }
    }

    #[test]
    fn cover_counts_agree_with_graph_counts_on_canonical_cover() {
        let g = gen_locally_sparse(40, 6, 2, 4).unwrap();
        let q = 9;
        let l = ListAssignment::uniform(40, q);
        let cov = cover_from_lists(&g, &l);
        let plain = sample_palettes(Palette::Global(q), 40, 3, 17).unwrap();
        let via_cover = sample_palettes(Palette::PerVertex(cov.lists()), 40, 3, 17).unwrap();
        // Same draw schedule: cover id of name c at v is v·q + c.
        for v in 0..40 {
            let mapped: Vec<Color> = plain.set(v).iter().map(|&c| (v * q) as Color + c).collect();
            assert_eq!(via_cover.set(v), mapped.as_slice());
        }
        assert_eq!(
            conflict_counts(ConflictSource::Graph(&g), &plain),
            conflict_counts(ConflictSource::Cover(&cov), &via_cover)
        );
        assert_eq!(conflict_edges(&g, &plain), conflict_edges_cover(&cov, &via_cover));
    }

    #[test]
    fn sampling_and_conflicts_are_deterministic() {
        let g = gen_locally_sparse(50, 7, 2, 3).unwrap();
        let params = SparsifyParams::explicit(10, 3, 7.0, 0.1, 1.0).unwrap();
        let a = sparsify(&g, Setting::Plain, &params, 77).unwrap();
        let b = sparsify(&g, Setting::Plain, &params, 77).unwrap();
        assert_eq!(a.sampled, b.sampled);
        assert_eq!(a.pruned, b.pruned);
        assert_eq!(a.conflict, b.conflict);
    }

    /// Exact pre-prune conflict probability for plain coloring:
    /// `1 − C(q−s, s)/C(q, s)`.
    fn exact_conflict_probability(q: usize, s: usize) -> f64 {
        let mut ratio = 1.0;
        for i in 0..s {
            ratio *= (q - s - i) as f64 / (q - i) as f64;
        }
        1.0 - ratio
    }

    #[test]
    fn conflict_edge_count_matches_its_exact_mean() {
        let g = gen_locally_sparse(200, 6, 6, 1).unwrap();
        let (q, s) = (20, 3);
        let p = exact_conflict_probability(q, s);
        assert!(p <= (s * s) as f64 / q as f64);
        let seeds = 200;
        let total: usize = (0..seeds)
            .map(|seed| {
                let fam = sample_palettes(Palette::Global(q), g.n(), s, seed).unwrap();
                conflict_edges(&g, &fam).len()
            })
            .sum();
        let mean = total as f64 / seeds as f64;
        let expected = g.m() as f64 * p;
        // Edges are not independent; the binomial σ of a single seed's count,
        // scaled by √seeds, gives the standard error used here.
        let sigma = (g.m() as f64 * p * (1.0 - p)).sqrt() / (seeds as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * sigma * 2.0, "mean {mean} vs {expected}");
    }

    #[test]
    fn reduction_is_sound_for_plain_and_cover_instances() {
        let mut rng = rng::stream(5, Purpose::Experiment);
        for trial in 0..200u64 {
            let n = rng.gen_range(2..=30);
            let delta = rng.gen_range(1..n.min(8));
            let g = gen_locally_sparse(n, delta, 3, trial).unwrap();
            let params = SparsifyParams::explicit(6, 2, delta as f64, 0.1, 1.0).unwrap();
            let cov = random_cover(&g, 6, 0.7, &mut rng);
            assert!(validate_cover(&g, &cov).is_valid());
            for setting in [Setting::Plain, Setting::Cover(&cov)] {
                let out = sparsify(&g, setting, &params, trial).unwrap();
                // Any proper coloring of the conflict instance: take a
                // random one and keep only proper outcomes.
                let phi = PartialColoring::from_assignment(
                    (0..n)
                        .map(|v| {
                            let set = out.pruned.set(v);
                            (!set.is_empty()).then(|| set[rng.gen_range(0..set.len())])
                        })
                        .collect(),
                );
                if verify_coloring(&out.conflict.conflict_graph, &out.conflict.instance, &phi).passed() {
                    let full = setting.full_instance(n, params.q);
                    assert!(verify_coloring(&g, &full, &phi).passed());
                }
            }
        }
    }

    #[test]
    fn triangle_conflict_instance_keeps_all_edges_with_full_palettes() {
        let g = complete(3);
        let params = SparsifyParams::explicit(3, 3, 2.0, 0.1, 1.0).unwrap();
        let out = sparsify(&g, Setting::Plain, &params, 0).unwrap();
        assert_eq!(out.conflict.conflict_graph.m(), 3);
    }
}
