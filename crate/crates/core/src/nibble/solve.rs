//! Solver orchestration. Every instance is solved as a cover: list
//! assignments go through the canonical embedding and the result is pulled
//! back to color names. Nothing is returned before the independent verifier
//! accepts it against the caller's instance.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lll::{finish_lll_with, lll_precondition, LllOptions};
use super::params::{build_schedule, ScheduleError};
use super::wcp::{check_conclusions, residual_cover, wcp_round_with, RoundConclusions, RoundStats};
use crate::coloring::{verify_coloring, PartialColoring};
use crate::cover::{cover_from_lists, cover_sparsity, pull_back, Color, CorrespondenceCover, CoverGraph, Instance};
use crate::graph::{Graph, Vertex};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Greedy,
    Nibble,
    Lll,
    Auto,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Policy::Greedy),
            "nibble" => Ok(Policy::Nibble),
            "lll" => Ok(Policy::Lll),
            "auto" => Ok(Policy::Auto),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub policy: Policy,
    /// Schedule constants for the nibble stage.
    pub gamma: f64,
    pub epsilon: f64,
    /// Attempts per nibble round before giving up on the stage.
    pub retries: usize,
    pub lll: LllOptions,
    /// Skip the nibble stage when `i* · (colors + pairs)` exceeds this.
    pub nibble_work_budget: u64,
    /// Local-search steps for the repair stage; `None` means `200n + 10⁴`.
    pub repair_steps: Option<u64>,
    pub backtrack_max_n: usize,
    pub backtrack_nodes: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            policy: Policy::Auto,
            gamma: 0.5,
            epsilon: 0.25,
            retries: 20,
            lll: LllOptions::default(),
            nibble_work_budget: 200_000_000,
            repair_steps: None,
            backtrack_max_n: 30,
            backtrack_nodes: 2_000_000,
        }
    }
}

impl SolveOptions {
    pub fn with_policy(policy: Policy) -> Self {
        SolveOptions {
            policy,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Greedy,
    Nibble,
    Lll,
    Repair,
    Backtrack,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Greedy => "greedy",
            Stage::Nibble => "nibble",
            Stage::Lll => "lll",
            Stage::Repair => "repair",
            Stage::Backtrack => "backtrack",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Succeeded,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageAttempt {
    pub stage: Stage,
    pub status: StageStatus,
    pub detail: String,
}

/// Hypotheses on the cover entering a nibble round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundHypotheses {
    /// `Δ(H) ≤ 2d`.
    pub max_degree: bool,
    /// `(1−β)ℓ/2 ≤ |L(v)| ≤ (1+β)ℓ`.
    pub list_sizes: bool,
    /// `avg deg(v) ≤ (2 − (1−β)ℓ/|L(v)|)d`.
    pub average_degree: bool,
}

impl RoundHypotheses {
    pub fn all(&self) -> bool {
        self.max_degree && self.list_sizes && self.average_degree
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleRound {
    pub round: usize,
    pub attempts: usize,
    pub stats: RoundStats,
    pub hypotheses: RoundHypotheses,
    pub conclusions: RoundConclusions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Total proper coloring in the caller's color names.
    pub coloring: PartialColoring,
    pub stage: Stage,
    pub path: Vec<StageAttempt>,
    pub nibble_rounds: Vec<NibbleRound>,
    pub resamples: Option<u64>,
    pub repair_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("no stage produced a proper coloring ({})", summarize(.path))]
pub struct SolveFailure {
    pub path: Vec<StageAttempt>,
}

fn summarize(path: &[StageAttempt]) -> String {
    path.iter()
        .map(|a| format!("{}: {:?} ({})", a.stage, a.status, a.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

enum StageResult {
    Colored(PartialColoring),
    Skipped(String),
    Failed(String),
}

/// Find a total proper coloring of `g` from `instance`.
pub fn solve(g: &Graph, instance: &Instance, opts: &SolveOptions, seed: u64) -> Result<SolveReport, SolveFailure> {
    if instance.n() != g.n() {
        return Err(SolveFailure {
            path: vec![StageAttempt {
                stage: Stage::Greedy,
                status: StageStatus::Skipped,
                detail: format!("instance has {} vertices, graph has {}", instance.n(), g.n()),
            }],
        });
    }
    let cov: Cow<'_, CorrespondenceCover> = match instance {
        Instance::Lists(l) => Cow::Owned(cover_from_lists(g, l)),
        Instance::Cover(c) => Cow::Borrowed(c),
    };
    let h = cov.cover_graph();
    let stages: &[Stage] = match opts.policy {
        Policy::Greedy => &[Stage::Greedy],
        Policy::Nibble => &[Stage::Nibble],
        Policy::Lll => &[Stage::Lll],
        Policy::Auto => &[Stage::Greedy, Stage::Lll, Stage::Nibble, Stage::Repair, Stage::Backtrack],
    };
    let mut report = SolveReport {
        coloring: PartialColoring::blank(g.n()),
        stage: Stage::Greedy,
        path: Vec::new(),
        nibble_rounds: Vec::new(),
        resamples: None,
        repair_steps: None,
    };
    let mut greedy_partial: Option<PartialColoring> = None;

    for (index, &stage) in stages.iter().enumerate() {
        let mut rng = rng::stream(rng::child_seed(seed, index as u64), Purpose::Solver);
        let result = match stage {
            Stage::Greedy => {
                let (phi, blank) = greedy(&cov, &h);
                if blank == 0 {
                    StageResult::Colored(phi)
                } else {
                    greedy_partial = Some(phi);
                    StageResult::Failed(format!("{blank} vertices left without an available color"))
                }
            }
            Stage::Lll => {
                let active = vec![true; g.n()];
                match lll_precondition(&cov, &h, &active, opts.lll.factor) {
                    Err(e) => StageResult::Skipped(e.to_string()),
                    Ok(()) => match finish_lll_with(&cov, &h, &active, &opts.lll, &mut rng) {
                        Ok(out) => {
                            report.resamples = Some(out.resamples);
                            StageResult::Colored(out.coloring)
                        }
                        Err(e) => StageResult::Failed(e.to_string()),
                    },
                }
            }
            Stage::Nibble => nibble_stage(&cov, &h, opts, &mut rng, &mut report),
            Stage::Repair => {
                let start = greedy_partial.clone().unwrap_or_else(|| PartialColoring::blank(g.n()));
                let steps = opts.repair_steps.unwrap_or(200 * g.n() as u64 + 10_000);
                match repair(&cov, &h, &start, steps, &mut rng) {
                    Ok((phi, used)) => {
                        report.repair_steps = Some(used);
                        StageResult::Colored(phi)
                    }
                    Err(e) => StageResult::Failed(e),
                }
            }
            Stage::Backtrack => {
                if g.n() > opts.backtrack_max_n {
                    StageResult::Skipped(format!("n = {} exceeds {}", g.n(), opts.backtrack_max_n))
                } else {
                    match backtrack(&cov, &h, opts.backtrack_nodes) {
                        Ok(Some(phi)) => StageResult::Colored(phi),
                        Ok(None) => StageResult::Failed("exhaustive search found no coloring".into()),
                        Err(nodes) => StageResult::Failed(format!("node budget {nodes} exhausted")),
                    }
                }
            }
        };
        let (status, detail, colored) = match result {
            StageResult::Colored(phi) => (StageStatus::Succeeded, String::new(), Some(phi)),
            StageResult::Skipped(why) => (StageStatus::Skipped, why, None),
            StageResult::Failed(why) => (StageStatus::Failed, why, None),
        };
        let mut attempt = StageAttempt { stage, status, detail };
        if let Some(phi) = colored {
            let named = match instance {
                Instance::Lists(l) => pull_back(l, &cov, &phi),
                Instance::Cover(_) => phi,
            };
            let check = verify_coloring(g, instance, &named);
            if named.is_total() && check.passed() {
                report.path.push(attempt);
                report.coloring = named;
                report.stage = stage;
                return Ok(report);
            }
            attempt.status = StageStatus::Failed;
            attempt.detail = format!("output rejected by verifier: {:?}", check.witness);
        }
        report.path.push(attempt);
    }
    Err(SolveFailure { path: report.path })
}

fn max_list_degree(h: &CoverGraph, list: &[Color]) -> usize {
    list.iter().map(|&c| h.degree(c)).max().unwrap_or(0)
}

/// Vertices in descending order of their largest cover degree; each takes
/// the available color with the fewest correspondents at uncolored
/// vertices, smallest id on ties. Returns the coloring and the number of
/// vertices left blank.
fn greedy(cov: &CorrespondenceCover, h: &CoverGraph) -> (PartialColoring, usize) {
    let n = cov.n();
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(max_list_degree(h, cov.list(v))), v));
    let mut phi = PartialColoring::blank(n);
    let mut blocked = vec![false; h.color_bound()];
    let mut blank = 0;
    for v in order {
        let pick = cov
            .list(v)
            .iter()
            .copied()
            .filter(|&c| !blocked[c as usize])
            .min_by_key(|&c| {
                let pending = h
                    .neighbors(c)
                    .iter()
                    .filter(|&&x| h.owner(x).is_some_and(|u| phi.get(u).is_none()))
                    .count();
                (pending, c)
            });
        match pick {
            Some(c) => {
                phi.set(v, Some(c));
                for &x in h.neighbors(c) {
                    blocked[x as usize] = true;
                }
            }
            None => blank += 1,
        }
    }
    (phi, blank)
}

fn check_hypotheses(cov: &CorrespondenceCover, h: &CoverGraph, active: &[bool], ell: f64, d: f64, beta: f64) -> RoundHypotheses {
    let mut out = RoundHypotheses {
        max_degree: true,
        list_sizes: true,
        average_degree: true,
    };
    for (v, list) in cov.lists().iter().enumerate() {
        if !active[v] {
            continue;
        }
        let len = list.len() as f64;
        out.list_sizes &= (1.0 - beta) * ell / 2.0 <= len && len <= (1.0 + beta) * ell;
        if list.is_empty() {
            continue;
        }
        let total: usize = list.iter().map(|&c| h.degree(c)).sum();
        out.max_degree &= list.iter().all(|&c| h.degree(c) as f64 <= 2.0 * d);
        out.average_degree &= total as f64 / len <= (2.0 - (1.0 - beta) * ell / len) * d;
    }
    out
}

/// Follow the parameter schedule for `i*` rounds, then finish with
/// resampling. `k` is measured on the cover; every later cover is a
/// subgraph, so local sparsity is inherited and not re-measured.
fn nibble_stage(
    cov: &CorrespondenceCover,
    h: &CoverGraph,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
    report: &mut SolveReport,
) -> StageResult {
    let d = h.max_degree();
    if d < 2 {
        return StageResult::Skipped(format!("max cover degree {d} is below 2"));
    }
    let k = cover_sparsity(cov).max(1);
    let schedule = match build_schedule(d, k, opts.gamma, opts.epsilon) {
        Ok(s) => s,
        Err(ScheduleError::NoTermination(s)) => {
            return StageResult::Skipped(format!("schedule exceeds {} rounds", s.i_star_bound))
        }
        Err(e) => return StageResult::Skipped(e.to_string()),
    };
    if !schedule.admissible() {
        return StageResult::Skipped(format!("schedule relations fail: {:?}", schedule.relations));
    }
    let i_star = schedule.i_star.expect("admissible schedules terminate");
    let ell0 = schedule.ell0();
    let beta0 = schedule.steps[0].beta;
    let min_list = cov.min_list_size() as f64;
    if min_list < (1.0 - beta0) * ell0 / 2.0 {
        return StageResult::Skipped(format!("shortest list {min_list} is below (1−β₀)ℓ₀/2 for ℓ₀ = {ell0:.2}"));
    }
    let pairs: usize = cov.matchings().values().map(Vec::len).sum();
    let work = i_star as u64 * (cov.color_count() + 2 * pairs) as u64;
    if work > opts.nibble_work_budget {
        return StageResult::Skipped(format!("{i_star} rounds exceed the work budget"));
    }
    // Lists longer than ℓ₀ are cut to their first ⌈ℓ₀⌉ colors.
    let cap = ell0.ceil() as usize;
    let mut current = cov.restrict(|v, c| cov.list(v).iter().position(|&x| x == c).is_some_and(|i| i < cap));
    let mut h_cur = current.cover_graph();
    let n = cov.n();
    let mut active = vec![true; n];
    let mut phi = PartialColoring::blank(n);

    for i in 0..i_star {
        let p = schedule.round(i);
        let hypotheses = check_hypotheses(&current, &h_cur, &active, p.ell, p.d, p.beta);
        if !hypotheses.all() {
            return StageResult::Failed(format!("round {i}: hypotheses fail: {hypotheses:?}"));
        }
        let beta_next = schedule.steps[i + 1].beta;
        let mut accepted = None;
        for attempt in 1..=opts.retries.max(1) {
            let out = match wcp_round_with(&current, &h_cur, &p, rng) {
                Ok(out) => out,
                Err(e) => return StageResult::Failed(format!("round {i}: {e}")),
            };
            let residual = residual_cover(&current, &out);
            let conclusions = check_conclusions(&residual, &out.coloring, p.ell_next, p.d_next, beta_next);
            if conclusions.all() {
                report.nibble_rounds.push(NibbleRound {
                    round: i,
                    attempts: attempt,
                    stats: out.stats,
                    hypotheses,
                    conclusions,
                });
                accepted = Some((out, residual));
                break;
            }
        }
        let Some((out, residual)) = accepted else {
            return StageResult::Failed(format!("round {i}: conclusions fail after {} attempts", opts.retries));
        };
        for v in out.coloring.domain().collect::<Vec<_>>() {
            active[v] = false;
        }
        phi.absorb(&out.coloring);
        current = residual;
        h_cur = current.cover_graph();
    }
    match finish_lll_with(&current, &h_cur, &active, &opts.lll, rng) {
        Ok(out) => {
            report.resamples = Some(out.resamples);
            phi.absorb(&out.coloring);
            StageResult::Colored(phi)
        }
        Err(e) => StageResult::Failed(format!("after {i_star} rounds: {e}")),
    }
}

/// Min-conflicts local search seeded with `start`: blanks take their least
/// conflicting color, then a random conflicted vertex moves to its least
/// conflicting other color (random tie-break, 2% random moves) until no
/// conflict remains or the step budget runs out.
fn repair(
    cov: &CorrespondenceCover,
    h: &CoverGraph,
    start: &PartialColoring,
    steps: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(PartialColoring, u64), String> {
    let n = cov.n();
    if let Some(v) = (0..n).find(|&v| cov.list(v).is_empty()) {
        return Err(format!("vertex {v} has an empty list"));
    }
    let mut used = vec![false; h.color_bound()];
    let conflicts_of = |c: Color, used: &[bool]| h.neighbors(c).iter().filter(|&&x| used[x as usize]).count();
    let mut assign: Vec<Color> = vec![0; n];
    for v in start.domain() {
        let c = start.get(v).unwrap();
        assign[v] = c;
        used[c as usize] = true;
    }
    for v in 0..n {
        if start.get(v).is_none() {
            let c = *cov.list(v).iter().min_by_key(|&&c| (conflicts_of(c, &used), c)).unwrap();
            assign[v] = c;
            used[c as usize] = true;
        }
    }
    let mut conf: Vec<usize> = (0..n).map(|v| conflicts_of(assign[v], &used)).collect();
    let mut set: Vec<Vertex> = Vec::new();
    let mut pos = vec![usize::MAX; n];
    let sync = |v: Vertex, conf: &[usize], set: &mut Vec<Vertex>, pos: &mut [usize]| {
        if conf[v] > 0 && pos[v] == usize::MAX {
            pos[v] = set.len();
            set.push(v);
        } else if conf[v] == 0 && pos[v] != usize::MAX {
            let i = pos[v];
            let last = *set.last().unwrap();
            set.swap_remove(i);
            if last != v {
                pos[last] = i;
            }
            pos[v] = usize::MAX;
        }
    };
    for v in 0..n {
        sync(v, &conf, &mut set, &mut pos);
    }
    let mut taken = 0u64;
    while !set.is_empty() {
        if taken >= steps {
            return Err(format!("{} vertices still conflicted after {steps} steps", set.len()));
        }
        taken += 1;
        let v = set[rng.gen_range(0..set.len())];
        let list = cov.list(v);
        if list.len() == 1 {
            // Nothing to change here; move a conflicting neighbor instead.
            let x = *h
                .neighbors(assign[v])
                .iter()
                .find(|&&x| used[x as usize])
                .expect("conflicted vertex has a used correspondent");
            let u = h.owner(x).unwrap();
            if cov.list(u).len() == 1 {
                return Err(format!("vertices {u} and {v} have single clashing colors"));
            }
            recolor(u, pick_color(cov, h, &assign, u, &used, rng), &mut assign, &mut used, &mut conf, h);
            sync(u, &conf, &mut set, &mut pos);
            for &y in h.neighbors(x).iter().chain(h.neighbors(assign[u])) {
                if let Some(w) = h.owner(y) {
                    sync(w, &conf, &mut set, &mut pos);
                }
            }
            sync(v, &conf, &mut set, &mut pos);
            continue;
        }
        let old = assign[v];
        let new = pick_color(cov, h, &assign, v, &used, rng);
        recolor(v, new, &mut assign, &mut used, &mut conf, h);
        for &y in h.neighbors(old).iter().chain(h.neighbors(new)) {
            if let Some(w) = h.owner(y) {
                sync(w, &conf, &mut set, &mut pos);
            }
        }
        sync(v, &conf, &mut set, &mut pos);
    }
    Ok((PartialColoring::from_assignment(assign.into_iter().map(Some).collect()), taken))
}

fn pick_color(
    cov: &CorrespondenceCover,
    h: &CoverGraph,
    assign: &[Color],
    v: Vertex,
    used: &[bool],
    rng: &mut ChaCha8Rng,
) -> Color {
    let others: Vec<Color> = cov.list(v).iter().copied().filter(|&c| c != assign[v]).collect();
    if rng.gen_bool(0.02) {
        return others[rng.gen_range(0..others.len())];
    }
    let score = |c: Color| h.neighbors(c).iter().filter(|&&x| used[x as usize]).count();
    let best = others.iter().map(|&c| score(c)).min().unwrap();
    let ties: Vec<Color> = others.into_iter().filter(|&c| score(c) == best).collect();
    ties[rng.gen_range(0..ties.len())]
}

fn recolor(v: Vertex, new: Color, assign: &mut [Color], used: &mut [bool], conf: &mut [usize], h: &CoverGraph) {
    let old = assign[v];
    used[old as usize] = false;
    for &x in h.neighbors(old) {
        if used[x as usize] {
            conf[h.owner(x).unwrap()] -= 1;
            conf[v] -= 1;
        }
    }
    assign[v] = new;
    used[new as usize] = true;
    for &x in h.neighbors(new) {
        if used[x as usize] {
            conf[h.owner(x).unwrap()] += 1;
            conf[v] += 1;
        }
    }
}

/// Depth-first search choosing the vertex with the fewest available colors.
/// `Err(budget)` when the node budget runs out.
fn backtrack(cov: &CorrespondenceCover, h: &CoverGraph, budget: u64) -> Result<Option<PartialColoring>, u64> {
    struct Search<'a> {
        cov: &'a CorrespondenceCover,
        h: &'a CoverGraph,
        blocked: Vec<u32>,
        assign: Vec<Option<Color>>,
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn available(&self, v: Vertex) -> impl Iterator<Item = Color> + '_ {
            self.cov.list(v).iter().copied().filter(|&c| self.blocked[c as usize] == 0)
        }

        fn run(&mut self) -> Result<bool, u64> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(self.budget);
            }
            let next = (0..self.assign.len())
                .filter(|&v| self.assign[v].is_none())
                .min_by_key(|&v| (self.available(v).count(), v));
            let Some(v) = next else { return Ok(true) };
            let choices: Vec<Color> = self.available(v).collect();
            for c in choices {
                self.assign[v] = Some(c);
                for &x in self.h.neighbors(c) {
                    self.blocked[x as usize] += 1;
                }
                if self.run()? {
                    return Ok(true);
                }
                for &x in self.h.neighbors(c) {
                    self.blocked[x as usize] -= 1;
                }
                self.assign[v] = None;
            }
            Ok(false)
        }
    }

    let mut search = Search {
        cov,
        h,
        blocked: vec![0; h.color_bound()],
        assign: vec![None; cov.n()],
        nodes: 0,
        budget,
    };
    Ok(search.run()?.then(|| PartialColoring::from_assignment(search.assign)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{random_cover, random_lists, ListAssignment};
    use crate::graph::gen_locally_sparse;
    use crate::graph::named::*;
    use crate::nibble::brute_force;

    fn uniform(n: usize, q: usize) -> Instance {
        Instance::Lists(ListAssignment::uniform(n, q))
    }

    #[test]
    fn triangle_with_three_colors_via_greedy() {
        let g = complete(3);
        let report = solve(&g, &uniform(3, 3), &SolveOptions::default(), 0).unwrap();
        assert_eq!(report.stage, Stage::Greedy);
        assert!(verify_coloring(&g, &uniform(3, 3), &report.coloring).passed());
    }

    #[test]
    fn odd_cycle_with_two_colors_fails_everywhere() {
        let g = cycle(5);
        let failure = solve(&g, &uniform(5, 2), &SolveOptions::default(), 0).unwrap_err();
        let stages: Vec<Stage> = failure.path.iter().map(|a| a.stage).collect();
        assert_eq!(stages, [Stage::Greedy, Stage::Lll, Stage::Nibble, Stage::Repair, Stage::Backtrack]);
        assert_eq!(failure.path.last().unwrap().status, StageStatus::Failed);
    }

    #[test]
    fn single_policies_run_one_stage() {
        let g = cycle(5);
        for policy in [Policy::Greedy, Policy::Lll, Policy::Nibble] {
            let result = solve(&g, &uniform(5, 2), &SolveOptions::with_policy(policy), 0);
            assert_eq!(result.unwrap_err().path.len(), 1);
        }
    }

    #[test]
    fn lll_policy_on_long_lists() {
        let g = gen_locally_sparse(200, 3, 3, 4).unwrap();
        let inst = uniform(200, 24);
        let report = solve(&g, &inst, &SolveOptions::with_policy(Policy::Lll), 1).unwrap();
        assert_eq!(report.stage, Stage::Lll);
        assert!(report.resamples.is_some());
    }

    #[test]
    fn repair_rescues_a_greedy_failure() {
        // An even cycle with two colors defeats greedy for some orders; the
        // local search or backtracking must finish it.
        let g = cycle(40);
        let inst = uniform(40, 2);
        let opts = SolveOptions {
            backtrack_max_n: 0,
            ..SolveOptions::default()
        };
        let report = solve(&g, &inst, &opts, 3).unwrap();
        assert!(verify_coloring(&g, &inst, &report.coloring).passed());
    }

    #[test]
    fn nibble_stage_runs_on_long_sparse_lists() {
        // Δ(H) = 8 with k = 1 gives ℓ₀ ≈ 23.1 under the default constants.
        let g = gen_locally_sparse(40, 8, 0, 2).unwrap();
        let mut r = rng::stream(6, Purpose::RandomCover);
        let cov = random_cover(&g, 24, 1.0, &mut r);
        assert_eq!(cov.cover_graph().max_degree(), 8);
        let inst = Instance::Cover(cov);
        let report = solve(&g, &inst, &SolveOptions::with_policy(Policy::Nibble), 5).unwrap();
        assert_eq!(report.stage, Stage::Nibble);
        assert!(!report.nibble_rounds.is_empty());
        assert!(verify_coloring(&g, &inst, &report.coloring).passed());
    }

    #[test]
    fn agrees_with_brute_force_on_small_instances() {
        let mut r = rng::stream(77, Purpose::Experiment);
        for trial in 0..300u64 {
            let n = r.gen_range(1..=7);
            let delta = r.gen_range(0..n);
            let g = gen_locally_sparse(n, delta, n * n, trial).unwrap();
            let size = r.gen_range(1..=3);
            let inst = if trial % 2 == 0 {
                Instance::Lists(random_lists(n, size, 4, &mut r))
            } else {
                Instance::Cover(random_cover(&g, size, 0.8, &mut r))
            };
            let oracle = brute_force(&g, &inst).unwrap();
            let result = solve(&g, &inst, &SolveOptions::default(), trial);
            assert_eq!(oracle.is_some(), result.is_ok(), "trial {trial}");
        }
    }
}
