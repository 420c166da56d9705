//! Moser–Tardos resampling for covers whose lists are much longer than the
//! largest cover degree.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NibbleError;
use crate::coloring::PartialColoring;
use crate::cover::{CorrespondenceCover, CoverGraph};
use crate::graph::{Graph, Vertex};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LllOptions {
    /// Lists must hold at least `factor · max deg_H(c)` colors. The classical
    /// argument uses 8; 2 is known to suffice for existence.
    pub factor: f64,
    pub max_resamples: u64,
}

impl Default for LllOptions {
    fn default() -> Self {
        LllOptions {
            factor: 8.0,
            max_resamples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LllOutcome {
    pub coloring: PartialColoring,
    pub resamples: u64,
}

/// Check `|L(v)| ≥ factor · deg_H(c)` over the vertices in `active`.
pub(crate) fn lll_precondition(
    cov: &CorrespondenceCover,
    h: &CoverGraph,
    active: &[bool],
    factor: f64,
) -> Result<(), NibbleError> {
    let mut ell = usize::MAX;
    let mut max_deg = 0;
    for (v, list) in cov.lists().iter().enumerate() {
        if !active[v] {
            continue;
        }
        ell = ell.min(list.len());
        for &c in list {
            max_deg = max_deg.max(h.degree(c));
        }
    }
    if ell == usize::MAX {
        return Ok(());
    }
    if ell == 0 || factor * max_deg as f64 > ell as f64 {
        return Err(NibbleError::Precondition(format!(
            "minimum list size {ell} is below {factor} × max cover degree {max_deg}"
        )));
    }
    Ok(())
}

/// Color every vertex of `g` from its cover list.
pub fn finish_lll(g: &Graph, cov: &CorrespondenceCover, opts: &LllOptions, seed: u64) -> Result<LllOutcome, NibbleError> {
    if g.n() != cov.n() {
        return Err(NibbleError::Precondition(format!(
            "graph has {} vertices, cover has {}",
            g.n(),
            cov.n()
        )));
    }
    let h = cov.cover_graph();
    let active = vec![true; cov.n()];
    finish_lll_with(cov, &h, &active, opts, &mut rng::stream(seed, Purpose::Solver))
}

/// Moser–Tardos over the vertices in `active`; other vertices stay blank and
/// are assumed to carry no matching edges. Each vertex is a variable, each
/// cover edge `uv` the bad event "φ(u) and φ(v) correspond". The violated
/// edge of smallest index (matching-map order) is resampled.
pub(crate) fn finish_lll_with<R: Rng>(
    cov: &CorrespondenceCover,
    h: &CoverGraph,
    active: &[bool],
    opts: &LllOptions,
    rng: &mut R,
) -> Result<LllOutcome, NibbleError> {
    lll_precondition(cov, h, active, opts.factor)?;
    let n = cov.n();
    let edges: Vec<(Vertex, Vertex)> = cov
        .matchings()
        .keys()
        .copied()
        .filter(|&(u, v)| active[u] && active[v])
        .collect();
    let mut incident = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(i);
        incident[v].push(i);
    }

    let mut phi = PartialColoring::blank(n);
    let draw = |v: Vertex, phi: &mut PartialColoring, rng: &mut R| {
        let list = cov.list(v);
        phi.set(v, Some(list[rng.gen_range(0..list.len())]));
    };
    for (v, _) in active.iter().enumerate().filter(|(_, &a)| a) {
        draw(v, &mut phi, rng);
    }
    let violated = |i: usize, phi: &PartialColoring| {
        let (u, v) = edges[i];
        h.corresponds(phi.get(u).unwrap(), phi.get(v).unwrap())
    };
    let mut bad: BTreeSet<usize> = (0..edges.len()).filter(|&i| violated(i, &phi)).collect();
    let mut resamples = 0u64;
    while let Some(&i) = bad.iter().next() {
        if resamples >= opts.max_resamples {
            return Err(NibbleError::BudgetExceeded { resamples });
        }
        resamples += 1;
        let (u, v) = edges[i];
        draw(u, &mut phi, rng);
        draw(v, &mut phi, rng);
        for &j in incident[u].iter().chain(&incident[v]) {
            if violated(j, &phi) {
                bad.insert(j);
            } else {
                bad.remove(&j);
            }
        }
    }
    Ok(LllOutcome { coloring: phi, resamples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::verify_coloring;
    use crate::cover::{cover_from_lists, random_lists, Instance, ListAssignment};
    use crate::graph::named::*;

    #[test]
    fn edgeless_graph_needs_no_resampling() {
        let g = Graph::empty(5);
        let cov = cover_from_lists(&g, &ListAssignment::uniform(5, 3));
        let out = finish_lll(&g, &cov, &LllOptions::default(), 4).unwrap();
        assert_eq!(out.resamples, 0);
        assert!(out.coloring.is_total());
    }

    #[test]
    fn single_edge_at_the_boundary() {
        let g = path(2);
        let cov = cover_from_lists(&g, &ListAssignment::uniform(2, 8));
        for seed in 0..50 {
            let out = finish_lll(&g, &cov, &LllOptions::default(), seed).unwrap();
            assert!(verify_coloring(&g, &Instance::Cover(cov.clone()), &out.coloring).passed());
        }
    }

    #[test]
    fn short_lists_violate_the_precondition() {
        let g = path(2);
        let cov = cover_from_lists(&g, &ListAssignment::uniform(2, 7));
        assert!(matches!(
            finish_lll(&g, &cov, &LllOptions::default(), 0),
            Err(NibbleError::Precondition(_))
        ));
        // Two suffices once the factor is lowered.
        let opts = LllOptions {
            factor: 2.0,
            ..LllOptions::default()
        };
        assert!(finish_lll(&g, &cov, &opts, 0).is_ok());
    }

    #[test]
    fn tiny_budget_is_reported() {
        let g = complete(4);
        let cov = cover_from_lists(&g, &ListAssignment::uniform(4, 4));
        let opts = LllOptions {
            factor: 0.0,
            max_resamples: 0,
        };
        let outcomes: Vec<_> = (0..20).map(|s| finish_lll(&g, &cov, &opts, s)).collect();
        assert!(outcomes.iter().any(|o| matches!(o, Err(NibbleError::BudgetExceeded { resamples: 0 }))));
    }

    #[test]
    fn cubic_graph_with_long_lists() {
        let g = crate::graph::gen_locally_sparse(300, 3, 3, 11).unwrap();
        let mut r = rng::stream(2, Purpose::RandomLists);
        let l = random_lists(300, 24, 40, &mut r);
        let cov = cover_from_lists(&g, &l);
        let out = finish_lll(&g, &cov, &LllOptions::default(), 9).unwrap();
        assert!(verify_coloring(&g, &Instance::Cover(cov), &out.coloring).passed());
    }
}
