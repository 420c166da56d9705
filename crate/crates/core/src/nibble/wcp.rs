//! One round of the wasteful coloring procedure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::WcpParams;
use super::NibbleError;
use crate::coloring::PartialColoring;
use crate::cover::{Color, CorrespondenceCover, CoverGraph};
use crate::graph::Graph;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub activated: usize,
    pub kept: usize,
    pub colored: usize,
}

#[derive(Debug, Clone)]
pub struct WcpOutcome {
    pub coloring: PartialColoring,
    /// `L'(v)`; empty for colored vertices.
    pub next_lists: Vec<Vec<Color>>,
    /// Membership in `A`, indexed by color id.
    pub activated: Vec<bool>,
    /// Membership in `K`, indexed by color id.
    pub kept: Vec<bool>,
    pub stats: RoundStats,
}

/// Run one round on `cov` with a generator seeded from `seed`.
pub fn wcp_round(g: &Graph, cov: &CorrespondenceCover, p: &WcpParams, seed: u64) -> Result<WcpOutcome, NibbleError> {
    if g.n() != cov.n() {
        return Err(NibbleError::Precondition(format!(
            "graph has {} vertices, cover has {}",
            g.n(),
            cov.n()
        )));
    }
    let h = cov.cover_graph();
    wcp_round_with(cov, &h, p, &mut rng::stream(seed, Purpose::Solver))
}

/// Draw order: activation coins for every color (vertices ascending, colors
/// ascending), then equalizer coins in the same order.
pub(crate) fn wcp_round_with<R: Rng>(
    cov: &CorrespondenceCover,
    h: &CoverGraph,
    p: &WcpParams,
    rng: &mut R,
) -> Result<WcpOutcome, NibbleError> {
    let activation = p.activation_probability();
    if !(0.0..=1.0).contains(&activation) {
        return Err(NibbleError::Precondition(format!("activation probability {activation} outside [0, 1]")));
    }
    let bound = h.color_bound();
    let mut activated = vec![false; bound];
    let mut eq = vec![false; bound];
    let mut equalizer = Vec::with_capacity(cov.color_count());
    for list in cov.lists() {
        for &c in list {
            let prob = p.equalizer_probability(h.degree(c)).ok_or_else(|| {
                NibbleError::Precondition(format!("deg_H({c}) = {} exceeds 2d = {}", h.degree(c), 2.0 * p.d))
            })?;
            equalizer.push(prob);
        }
    }
    for list in cov.lists() {
        for &c in list {
            activated[c as usize] = rng.gen_bool(activation);
        }
    }
    for (&prob, &c) in equalizer.iter().zip(cov.lists().iter().flatten()) {
        eq[c as usize] = rng.gen_bool(prob.min(1.0));
    }

    let mut kept = vec![false; bound];
    let mut stats = RoundStats::default();
    for &c in cov.lists().iter().flatten() {
        stats.activated += usize::from(activated[c as usize]);
        if eq[c as usize] && h.neighbors(c).iter().all(|&x| !activated[x as usize]) {
            kept[c as usize] = true;
            stats.kept += 1;
        }
    }

    let n = cov.n();
    let mut coloring = PartialColoring::blank(n);
    for (v, list) in cov.lists().iter().enumerate() {
        let choice = list.iter().copied().find(|&c| activated[c as usize] && kept[c as usize]);
        if choice.is_some() {
            stats.colored += 1;
        }
        coloring.set(v, choice);
    }

    // U ∩ K: kept colors whose owner stayed blank.
    let in_ku: Vec<bool> = (0..bound)
        .map(|c| kept[c] && h.owner(c as Color).is_some_and(|v| coloring.get(v).is_none()))
        .collect();
    let limit = 2.0 * p.d_next;
    let next_lists = cov
        .lists()
        .iter()
        .enumerate()
        .map(|(v, list)| {
            if coloring.get(v).is_some() {
                return Vec::new();
            }
            list.iter()
                .copied()
                .filter(|&c| {
                    kept[c as usize]
                        && h.neighbors(c).iter().filter(|&&x| in_ku[x as usize]).count() as f64 <= limit
                })
                .collect()
        })
        .collect();

    Ok(WcpOutcome {
        coloring,
        next_lists,
        activated,
        kept,
        stats,
    })
}

/// Cover left for the uncolored vertices after a round.
pub fn residual_cover(cov: &CorrespondenceCover, outcome: &WcpOutcome) -> CorrespondenceCover {
    let next = &outcome.next_lists;
    cov.restrict(|v, c| next[v].binary_search(&c).is_ok())
}

/// Conclusions (i)–(iv) of one round for the uncolored vertices, judged
/// against the residual cover and the round's next-step parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundConclusions {
    pub list_upper: bool,
    pub list_lower: bool,
    pub max_degree: bool,
    pub average_degree: bool,
}

impl RoundConclusions {
    pub fn all(&self) -> bool {
        self.list_upper && self.list_lower && self.max_degree && self.average_degree
    }
}

pub fn check_conclusions(
    residual: &CorrespondenceCover,
    coloring: &PartialColoring,
    ell: f64,
    d: f64,
    beta: f64,
) -> RoundConclusions {
    let h = residual.cover_graph();
    let mut out = RoundConclusions {
        list_upper: true,
        list_lower: true,
        max_degree: true,
        average_degree: true,
    };
    for (v, list) in residual.lists().iter().enumerate() {
        if coloring.get(v).is_some() {
            continue;
        }
        let len = list.len() as f64;
        out.list_upper &= len <= (1.0 + beta) * ell;
        out.list_lower &= len >= (1.0 - beta) * ell / 2.0;
        if list.is_empty() {
            continue;
        }
        let mut total = 0usize;
        for &c in list {
            let deg = h.degree(c);
            out.max_degree &= deg as f64 <= 2.0 * d;
            total += deg;
        }
        out.average_degree &= total as f64 / len <= (2.0 - (1.0 - beta) * ell / len) * d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{cover_from_lists, random_cover, ListAssignment};
    use crate::graph::gen_locally_sparse;
    use crate::graph::named::*;
    use std::collections::BTreeMap;

    #[test]
    fn zero_eta_colors_nothing_and_keeps_all() {
        let g = cycle(5);
        let cov = cover_from_lists(&g, &ListAssignment::uniform(5, 3));
        let p = WcpParams::new(0.0, 3.0, 2.0, 0.1);
        let out = wcp_round(&g, &cov, &p, 1).unwrap();
        assert_eq!(out.stats.activated, 0);
        assert_eq!(out.stats.colored, 0);
        assert_eq!(out.stats.kept, 15);
        assert_eq!(out.next_lists, cov.lists().to_vec());
    }

    #[test]
    fn empty_matchings_color_every_vertex_holding_an_active_kept_color() {
        let g = path(4);
        let cov = CorrespondenceCover::new(8, (0..4).map(|v| vec![2 * v, 2 * v + 1]).collect(), BTreeMap::new());
        let p = WcpParams::new(1.0, 1.0, 1.0, 0.1);
        let out = wcp_round(&g, &cov, &p, 3).unwrap();
        // Activation probability 1 and degree 0 make every color active; the
        // equalizer probability (1 − 1)^2 is 0 though, so nothing is kept.
        assert_eq!(out.stats.activated, 8);
        assert_eq!(out.stats.kept, 0);
        let p = WcpParams::new(0.5, 1.0, 0.0, 0.1);
        for seed in 0..20 {
            let out = wcp_round(&g, &cov, &p, seed).unwrap();
            for v in 0..4 {
                let any = cov.list(v).iter().any(|&c| out.activated[c as usize]);
                assert_eq!(out.coloring.get(v).is_some(), any);
            }
        }
    }

    #[test]
    fn high_degree_color_is_a_precondition_violation() {
        let g = star(3);
        let cov = cover_from_lists(&g, &ListAssignment::uniform(4, 1));
        let p = WcpParams::new(0.1, 1.0, 1.0, 0.1);
        assert!(matches!(wcp_round(&g, &cov, &p, 0), Err(NibbleError::Precondition(_))));
    }

    #[test]
    fn round_structure_holds() {
        let mut r = rng::stream(8, Purpose::Experiment);
        for seed in 0..60 {
            let g = gen_locally_sparse(40, 6, 2, seed).unwrap();
            let cov = random_cover(&g, 10, 0.6, &mut r);
            let h = cov.cover_graph();
            let d = h.max_degree().max(1) as f64 / 2.0;
            let p = WcpParams::new(0.8, 10.0, d, 0.1);
            let out = wcp_round(&g, &cov, &p, seed).unwrap();
            let residual = residual_cover(&cov, &out);
            for v in 0..g.n() {
                let kv: Vec<Color> = cov.list(v).iter().copied().filter(|&c| out.kept[c as usize]).collect();
                assert!(out.next_lists[v].iter().all(|c| kv.contains(c)));
                if let Some(c) = out.coloring.get(v) {
                    assert!(out.activated[c as usize] && out.kept[c as usize]);
                    assert!(out.next_lists[v].is_empty());
                }
            }
            // Two kept colors never correspond when one of them is active.
            for &c in cov.lists().iter().flatten() {
                if out.kept[c as usize] {
                    assert!(h.neighbors(c).iter().all(|&x| !out.activated[x as usize]));
                }
            }
            let inst = crate::cover::Instance::Cover(cov.clone());
            assert!(crate::coloring::verify_coloring(&g, &inst, &out.coloring).passed());
            // Step-6 bound against K ∩ U recomputed from scratch.
            for v in 0..g.n() {
                for &c in &out.next_lists[v] {
                    let count = h
                        .neighbors(c)
                        .iter()
                        .filter(|&&x| {
                            out.kept[x as usize] && out.coloring.get(h.owner(x).unwrap()).is_none()
                        })
                        .count();
                    assert!(count as f64 <= 2.0 * p.d_next);
                }
            }
            assert_eq!(residual.lists(), out.next_lists.as_slice());
        }
    }
}
