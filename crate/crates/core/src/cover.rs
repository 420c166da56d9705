//! List assignments, correspondence covers and their audits.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::PartialColoring;
use crate::graph::{local_sparsity, Graph, Vertex};

/// Color id. For list assignments this is a color name; for covers it is a
/// vertex of the cover graph.
pub type Color = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("color {color} listed twice for vertex {vertex}")]
    DuplicateColor { vertex: Vertex, color: Color },
    #[error("instance has {found} lists but the graph has {expected} vertices")]
    VertexCountMismatch { expected: usize, found: usize },
    #[error("invalid correspondence cover: {0}")]
    Invalid(CoverViolation),
}

/// Per-vertex color lists, each sorted and duplicate free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListAssignment {
    lists: Vec<Vec<Color>>,
}

impl ListAssignment {
    pub fn new(mut lists: Vec<Vec<Color>>) -> Result<Self, CoverError> {
        for (vertex, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(CoverError::DuplicateColor { vertex, color: w[0] });
            }
        }
        Ok(ListAssignment { lists })
    }

    /// Every vertex gets the palette `0..q`.
    pub fn uniform(n: usize, q: usize) -> Self {
        ListAssignment {
            lists: vec![(0..q as Color).collect(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    pub fn list(&self, v: Vertex) -> &[Color] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<Color>] {
        &self.lists
    }

    pub fn contains(&self, v: Vertex, c: Color) -> bool {
        self.lists[v].binary_search(&c).is_ok()
    }

    pub fn min_list_size(&self) -> usize {
        self.lists.iter().map(Vec::len).min().unwrap_or(0)
    }
}

/// Correspondence (DP) cover: per-vertex lists of cover colors plus, for
/// every graph edge `uv` with `u < v`, a set of pairs `(a, b)` with `a` in
/// `L(u)` and `b` in `L(v)`.
///
/// Cover-color ids are drawn from `0..color_bound`. Ids that appear in no
/// list are simply not colors of this cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceCover {
    color_bound: Color,
    lists: Vec<Vec<Color>>,
    matchings: BTreeMap<(Vertex, Vertex), Vec<(Color, Color)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverViolation {
    ListCountMismatch { expected: usize, found: usize },
    ColorOutOfRange { vertex: Vertex, color: Color },
    ColorSharedByVertices { color: Color, first: Vertex, second: Vertex },
    ColorRepeatedInList { vertex: Vertex, color: Color },
    PairInsideList { vertex: Vertex, pair: (Color, Color) },
    MatchingOnNonEdge { u: Vertex, v: Vertex },
    MalformedEdgeKey { u: Vertex, v: Vertex },
    PairOutsideLists { u: Vertex, v: Vertex, pair: (Color, Color) },
    ColorMatchedTwice { u: Vertex, v: Vertex, color: Color },
}

impl std::fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Outcome of [`validate_cover`]: the first witness for each failed condition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub cc1: Option<CoverViolation>,
    pub cc2: Option<CoverViolation>,
    pub cc3: Option<CoverViolation>,
}

impl CoverReport {
    pub fn is_valid(&self) -> bool {
        self.cc1.is_none() && self.cc2.is_none() && self.cc3.is_none()
    }

    pub fn first_violation(&self) -> Option<&CoverViolation> {
        self.cc1.as_ref().or(self.cc2.as_ref()).or(self.cc3.as_ref())
    }
}

impl CorrespondenceCover {
    /// Assemble a cover without validating it; see [`validate_cover`].
    /// Lists are sorted, pair lists are kept as given.
    pub fn new(
        color_bound: Color,
        mut lists: Vec<Vec<Color>>,
        matchings: BTreeMap<(Vertex, Vertex), Vec<(Color, Color)>>,
    ) -> Self {
        for list in &mut lists {
            list.sort_unstable();
        }
        CorrespondenceCover {
            color_bound,
            lists,
            matchings,
        }
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    pub fn color_bound(&self) -> Color {
        self.color_bound
    }

    pub fn list(&self, v: Vertex) -> &[Color] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<Color>] {
        &self.lists
    }

    pub fn matchings(&self) -> &BTreeMap<(Vertex, Vertex), Vec<(Color, Color)>> {
        &self.matchings
    }

    /// Pairs on edge `uv`, oriented so the first entry belongs to `u`.
    pub fn matching(&self, u: Vertex, v: Vertex) -> Vec<(Color, Color)> {
        if u < v {
            self.matchings.get(&(u, v)).cloned().unwrap_or_default()
        } else {
            self.matchings
                .get(&(v, u))
                .map(|m| m.iter().map(|&(a, b)| (b, a)).collect())
                .unwrap_or_default()
        }
    }

    pub fn color_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }

    pub fn min_list_size(&self) -> usize {
        self.lists.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Derived color-level adjacency. Assumes CC1 holds.
    pub fn cover_graph(&self) -> CoverGraph {
        let bound = self.color_bound as usize;
        let mut owner = vec![None; bound];
        for (v, list) in self.lists.iter().enumerate() {
            for &c in list {
                owner[c as usize] = Some(v);
            }
        }
        let mut adjacency: Vec<Vec<Color>> = vec![Vec::new(); bound];
        for pairs in self.matchings.values() {
            for &(a, b) in pairs {
                adjacency[a as usize].push(b);
                adjacency[b as usize].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        CoverGraph { owner, adjacency }
    }

    /// Restrict every list to the colors `keep` accepts; pairs touching a
    /// dropped color disappear, as do edges left with no pairs.
    pub fn restrict(&self, mut keep: impl FnMut(Vertex, Color) -> bool) -> CorrespondenceCover {
        let lists: Vec<Vec<Color>> = self
            .lists
            .iter()
            .enumerate()
            .map(|(v, list)| list.iter().copied().filter(|&c| keep(v, c)).collect())
            .collect();
        let mut matchings = BTreeMap::new();
        for (&(u, v), pairs) in &self.matchings {
            let kept: Vec<(Color, Color)> = pairs
                .iter()
                .copied()
                .filter(|&(a, b)| {
                    lists[u].binary_search(&a).is_ok() && lists[v].binary_search(&b).is_ok()
                })
                .collect();
            if !kept.is_empty() {
                matchings.insert((u, v), kept);
            }
        }
        CorrespondenceCover {
            color_bound: self.color_bound,
            lists,
            matchings,
        }
    }
}

/// Color-level view of a cover: owner of every color and its corresponding
/// colors (neighbors in the cover graph `H`).
#[derive(Debug, Clone)]
pub struct CoverGraph {
    owner: Vec<Option<Vertex>>,
    adjacency: Vec<Vec<Color>>,
}

impl CoverGraph {
    pub fn owner(&self, c: Color) -> Option<Vertex> {
        self.owner.get(c as usize).copied().flatten()
    }

    pub fn neighbors(&self, c: Color) -> &[Color] {
        &self.adjacency[c as usize]
    }

    pub fn degree(&self, c: Color) -> usize {
        self.adjacency[c as usize].len()
    }

    pub fn corresponds(&self, a: Color, b: Color) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    pub fn color_bound(&self) -> usize {
        self.adjacency.len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `H` as a plain graph on vertex set `0..color_bound`.
    pub fn as_graph(&self) -> Graph {
        let edges = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b as usize > a).map(move |&b| (a, b as usize)));
        Graph::from_edges(self.adjacency.len(), edges).expect("cover adjacency is simple")
    }
}

/// Check CC1–CC3 and report the first violating witness of each.
pub fn validate_cover(g: &Graph, cov: &CorrespondenceCover) -> CoverReport {
    let mut report = CoverReport::default();
    if cov.n() != g.n() {
        report.cc1 = Some(CoverViolation::ListCountMismatch {
            expected: g.n(),
            found: cov.n(),
        });
        return report;
    }

    // CC1: lists partition the color set.
    let bound = cov.color_bound as usize;
    let mut owner: Vec<Option<Vertex>> = vec![None; bound];
    'cc1: for (v, list) in cov.lists.iter().enumerate() {
        for (i, &c) in list.iter().enumerate() {
            if c as usize >= bound {
                report.cc1 = Some(CoverViolation::ColorOutOfRange { vertex: v, color: c });
                break 'cc1;
            }
            if i > 0 && list[i - 1] == c {
                report.cc1 = Some(CoverViolation::ColorRepeatedInList { vertex: v, color: c });
                break 'cc1;
            }
            match owner[c as usize] {
                Some(first) => {
                    report.cc1 = Some(CoverViolation::ColorSharedByVertices {
                        color: c,
                        first,
                        second: v,
                    });
                    break 'cc1;
                }
                None => owner[c as usize] = Some(v),
            }
        }
    }
    let owner_of = |c: Color| owner.get(c as usize).copied().flatten();

    for (&(u, v), pairs) in &cov.matchings {
        for &(a, b) in pairs {
            // CC2: a pair whose ends share an owner is an edge inside a list.
            if report.cc2.is_none() {
                if let (Some(x), Some(y)) = (owner_of(a), owner_of(b)) {
                    if x == y {
                        report.cc2 = Some(CoverViolation::PairInsideList {
                            vertex: x,
                            pair: (a, b),
                        });
                    }
                }
            }
        }
        if report.cc3.is_some() {
            continue;
        }
        if u >= v || v >= g.n() {
            report.cc3 = Some(CoverViolation::MalformedEdgeKey { u, v });
            continue;
        }
        if !g.has_edge(u, v) {
            if !pairs.is_empty() {
                report.cc3 = Some(CoverViolation::MatchingOnNonEdge { u, v });
            }
            continue;
        }
        let mut seen_u: Vec<Color> = Vec::with_capacity(pairs.len());
        let mut seen_v: Vec<Color> = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if owner_of(a) != Some(u) || owner_of(b) != Some(v) {
                // CC2 already names pairs inside a single list.
                let inside = matches!((owner_of(a), owner_of(b)), (Some(x), Some(y)) if x == y);
                if !inside {
                    report.cc3 = Some(CoverViolation::PairOutsideLists { u, v, pair: (a, b) });
                    break;
                }
                continue;
            }
            if seen_u.contains(&a) {
                report.cc3 = Some(CoverViolation::ColorMatchedTwice { u, v, color: a });
                break;
            }
            if seen_v.contains(&b) {
                report.cc3 = Some(CoverViolation::ColorMatchedTwice { u, v, color: b });
                break;
            }
            seen_u.push(a);
            seen_v.push(b);
        }
    }
    report
}

/// Canonical embedding of a list assignment: vertex `v`'s `i`-th list color
/// becomes cover color `offset(v) + i`, and same-name colors on adjacent
/// vertices correspond.
pub fn cover_from_lists(g: &Graph, l: &ListAssignment) -> CorrespondenceCover {
    assert_eq!(g.n(), l.n(), "list assignment and graph disagree on n");
    let mut offsets = Vec::with_capacity(l.n());
    let mut next: Color = 0;
    let lists: Vec<Vec<Color>> = l
        .lists
        .iter()
        .map(|list| {
            offsets.push(next);
            let ids = (next..next + list.len() as Color).collect();
            next += list.len() as Color;
            ids
        })
        .collect();
    let mut matchings = BTreeMap::new();
    for (u, v) in g.edges() {
        let (lu, lv) = (&l.lists[u], &l.lists[v]);
        let (mut i, mut j) = (0, 0);
        let mut pairs = Vec::new();
        while i < lu.len() && j < lv.len() {
            match lu[i].cmp(&lv[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    pairs.push((offsets[u] + i as Color, offsets[v] + j as Color));
                    i += 1;
                    j += 1;
                }
            }
        }
        if !pairs.is_empty() {
            matchings.insert((u, v), pairs);
        }
    }
    CorrespondenceCover {
        color_bound: next,
        lists,
        matchings,
    }
}

/// Translate a coloring of `cover_from_lists(g, l)` back to color names.
pub fn pull_back(l: &ListAssignment, cov: &CorrespondenceCover, phi: &PartialColoring) -> PartialColoring {
    let assignment = phi
        .assignment()
        .iter()
        .enumerate()
        .map(|(v, c)| {
            c.map(|c| {
                let pos = cov.lists[v]
                    .binary_search(&c)
                    .expect("coloring uses a color of the vertex's list");
                l.lists[v][pos]
            })
        })
        .collect();
    PartialColoring::from_assignment(assignment)
}

/// Translate a list coloring to the cover colors of `cover_from_lists(g, l)`.
pub fn push_forward(l: &ListAssignment, cov: &CorrespondenceCover, phi: &PartialColoring) -> PartialColoring {
    let assignment = phi
        .assignment()
        .iter()
        .enumerate()
        .map(|(v, c)| {
            c.and_then(|c| l.lists[v].binary_search(&c).ok().map(|pos| cov.lists[v][pos]))
        })
        .collect();
    PartialColoring::from_assignment(assignment)
}

/// A coloring instance: a list assignment or a correspondence cover over a
/// shared graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instance {
    Lists(ListAssignment),
    Cover(CorrespondenceCover),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Lists(l) => l.n(),
            Instance::Cover(c) => c.n(),
        }
    }

    pub fn list(&self, v: Vertex) -> &[Color] {
        match self {
            Instance::Lists(l) => l.list(v),
            Instance::Cover(c) => c.list(v),
        }
    }

    pub fn min_list_size(&self) -> usize {
        match self {
            Instance::Lists(l) => l.min_list_size(),
            Instance::Cover(c) => c.min_list_size(),
        }
    }
}

/// Color-degrees `deg(v, c)` aligned with each vertex's list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CDegreeTable {
    pub per_vertex: Vec<Vec<usize>>,
    pub max_c_degree: usize,
}

impl CDegreeTable {
    fn from_rows(per_vertex: Vec<Vec<usize>>) -> Self {
        let max_c_degree = per_vertex.iter().flatten().copied().max().unwrap_or(0);
        CDegreeTable {
            per_vertex,
            max_c_degree,
        }
    }

    /// Average color-degree of `v`; zero for an empty list.
    pub fn average(&self, v: Vertex) -> f64 {
        let row = &self.per_vertex[v];
        if row.is_empty() {
            0.0
        } else {
            row.iter().sum::<usize>() as f64 / row.len() as f64
        }
    }

    pub fn vertex_max(&self, v: Vertex) -> usize {
        self.per_vertex[v].iter().copied().max().unwrap_or(0)
    }
}

/// `deg_L(v, c) = |{u in N(v) : c in L(u)}|`.
pub fn c_degrees_lists(g: &Graph, l: &ListAssignment) -> CDegreeTable {
    let rows = (0..g.n())
        .map(|v| {
            l.list(v)
                .iter()
                .map(|&c| g.neighbors(v).iter().filter(|&&u| l.contains(u, c)).count())
                .collect()
        })
        .collect();
    CDegreeTable::from_rows(rows)
}

/// `deg_H(c)` for every cover color, aligned with the lists.
pub fn c_degrees_cover(cov: &CorrespondenceCover) -> CDegreeTable {
    let h = cov.cover_graph();
    let rows = cov
        .lists
        .iter()
        .map(|list| list.iter().map(|&c| h.degree(c)).collect())
        .collect();
    CDegreeTable::from_rows(rows)
}

pub fn c_degrees(g: &Graph, instance: &Instance) -> CDegreeTable {
    match instance {
        Instance::Lists(l) => c_degrees_lists(g, l),
        Instance::Cover(c) => c_degrees_cover(c),
    }
}

/// Largest number of cover-graph edges inside a color's neighborhood.
pub fn cover_sparsity(cov: &CorrespondenceCover) -> usize {
    local_sparsity(&cov.cover_graph().as_graph()).k_star
}

/// Cover with lists of `list_size` fresh colors per vertex; on each edge
/// every color of `u` is paired, with probability `density`, with a distinct
/// color of `v` chosen by a uniform permutation.
pub fn random_cover<R: Rng>(g: &Graph, list_size: usize, density: f64, rng: &mut R) -> CorrespondenceCover {
    let lists: Vec<Vec<Color>> = (0..g.n())
        .map(|v| ((v * list_size) as Color..((v + 1) * list_size) as Color).collect())
        .collect();
    let mut matchings = BTreeMap::new();
    let mut perm: Vec<usize> = (0..list_size).collect();
    for (u, v) in g.edges() {
        perm.shuffle(rng);
        let pairs: Vec<(Color, Color)> = (0..list_size)
            .filter(|_| rng.gen_bool(density))
            .map(|i| (lists[u][i], lists[v][perm[i]]))
            .collect();
        if !pairs.is_empty() {
            matchings.insert((u, v), pairs);
        }
    }
    CorrespondenceCover {
        color_bound: (g.n() * list_size) as Color,
        lists,
        matchings,
    }
}

/// `n` lists, each a uniform `list_size`-subset of `0..universe`.
pub fn random_lists<R: Rng>(n: usize, list_size: usize, universe: usize, rng: &mut R) -> ListAssignment {
    assert!(list_size <= universe);
    let lists = (0..n)
        .map(|_| {
            let mut list: Vec<Color> = index::sample(rng, universe, list_size)
                .into_iter()
                .map(|i| i as Color)
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    ListAssignment { lists }
}
