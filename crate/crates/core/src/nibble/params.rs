//! Per-round quantities of the wasteful coloring procedure and the full
//! parameter recursion that drives repeated rounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("invalid schedule parameters: {0}")]
    InvalidParameters(String),
    /// The recursion did not reach `d_i ≤ ℓ_i/100` within the bound. The
    /// computed prefix is kept for reporting.
    #[error("no termination within {} rounds", .0.i_star_bound)]
    NoTermination(Box<ParamSchedule>),
}

/// `(1 − x)^m` evaluated as `exp(m·ln(1 − x))`.
pub(crate) fn pow1m(x: f64, m: f64) -> f64 {
    if m == 0.0 {
        1.0
    } else {
        (m * (-x).ln_1p()).exp()
    }
}

/// Quantities of one round with activation rate `η/ℓ` and color-degree scale `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WcpParams {
    pub eta: f64,
    pub ell: f64,
    pub d: f64,
    /// `(1 − η/ℓ)^(2d)`.
    pub keep: f64,
    /// `(1 − η/ℓ)^(keep·ℓ/2)`.
    pub uncolor: f64,
    pub ell_next: f64,
    pub d_next: f64,
    pub beta: f64,
    /// `(1 + 36η)·β`.
    pub beta_next: f64,
}

impl WcpParams {
    pub fn new(eta: f64, ell: f64, d: f64, beta: f64) -> Self {
        let x = eta / ell;
        let keep = pow1m(x, 2.0 * d);
        let uncolor = pow1m(x, keep * ell / 2.0);
        WcpParams {
            eta,
            ell,
            d,
            keep,
            uncolor,
            ell_next: keep * ell,
            d_next: keep * uncolor * d,
            beta,
            beta_next: (1.0 + 36.0 * eta) * beta,
        }
    }

    pub fn activation_probability(&self) -> f64 {
        self.eta / self.ell
    }

    /// Equalizer success probability `keep/(1 − η/ℓ)^deg = (1 − η/ℓ)^(2d − deg)`;
    /// `None` when `deg > 2d`.
    pub fn equalizer_probability(&self, deg: usize) -> Option<f64> {
        let exponent = 2.0 * self.d - deg as f64;
        (exponent >= 0.0).then(|| pow1m(self.activation_probability(), exponent))
    }
}

/// One index `i` of the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub ell: f64,
    pub d: f64,
    pub beta: f64,
    pub keep: f64,
    pub uncolor: f64,
}

/// Relations the recursion is expected to satisfy, checked numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRelations {
    /// `d_i/ℓ_i ≤ d_1/ℓ_1 ≤ ln(d/√k)/C` for every computed `i ≥ 1`.
    pub r1: bool,
    /// `ℓ_i ≥ d·(d/√k)^(−4/(C − 7ε/8))` for every computed `i`.
    pub r2: bool,
    /// `i*` exists and is at most the bound.
    pub r3: bool,
    /// `β_i ≤ 1/10` for every `i < i*`.
    pub beta_small: bool,
    /// `4ηd_i < ℓ_i < 100d_i` for every `i < i*`.
    pub ell_in_range: bool,
    /// `1/ln⁵(d_i) < η < 1/ln(d_i/√k)` for every `i < i*`.
    pub eta_in_range: bool,
    /// `k ≤ d_i^(2γ')` for every `i < i*`.
    pub k_in_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub d: f64,
    pub k: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// `γ(1 + γ − 7ε/32)/(2γ − ε/4)`.
    pub gamma_prime: f64,
    /// `4(1 + γ)`.
    pub big_c: f64,
    /// `((C − ε)/2)·ln(1 + ε/(8C))`.
    pub mu: f64,
    /// `μ/ln(d/√k)`.
    pub eta: f64,
    /// Steps `0..=i*` (or the computed prefix on failure).
    pub steps: Vec<ScheduleStep>,
    pub i_star: Option<usize>,
    /// `⌈(16/μ)·ln(d/√k)·ln ln(d/√k)⌉`.
    pub i_star_bound: usize,
    pub relations: ScheduleRelations,
}

impl ParamSchedule {
    /// Round parameters for step `i`, with `β` taken from the schedule.
    pub fn round(&self, i: usize) -> WcpParams {
        let s = &self.steps[i];
        WcpParams::new(self.eta, s.ell, s.d, s.beta)
    }

    /// Whether the solver may follow this schedule: it terminates within the
    /// bound and (R1)–(R3) hold. The remaining range checks are reported only.
    pub fn admissible(&self) -> bool {
        self.relations.r1 && self.relations.r2 && self.relations.r3
    }

    pub fn ell0(&self) -> f64 {
        self.steps[0].ell
    }
}

pub fn recursion_gamma_prime(gamma: f64, epsilon: f64) -> f64 {
    gamma * (1.0 + gamma - 7.0 * epsilon / 32.0) / (2.0 * gamma - epsilon / 4.0)
}

pub fn recursion_mu(gamma: f64, epsilon: f64) -> f64 {
    let c = 4.0 * (1.0 + gamma);
    (c - epsilon) / 2.0 * (epsilon / (8.0 * c)).ln_1p()
}

/// Compute `ℓ_i, d_i, β_i, keep_i, uncolor_i` until `d_i ≤ ℓ_i/100`.
pub fn build_schedule(d: usize, k: usize, gamma: f64, epsilon: f64) -> Result<ParamSchedule, ScheduleError> {
    let invalid = |msg: String| Err(ScheduleError::InvalidParameters(msg));
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("gamma = {gamma} must lie in (0, 1)"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return invalid(format!("epsilon = {epsilon} must be positive"));
    }
    if d < 2 || k < 1 {
        return invalid(format!("need d ≥ 2 and k ≥ 1, got d = {d}, k = {k}"));
    }
    let (df, kf) = (d as f64, k as f64);
    if df <= kf.sqrt() {
        return invalid(format!("d = {d} must exceed √k = {}", kf.sqrt()));
    }
    let gp = recursion_gamma_prime(gamma, epsilon);
    if !(gp > gamma && gp < 1.0) {
        return invalid(format!("γ' = {gp} must lie in (γ, 1); decrease epsilon"));
    }
    let big_c = 4.0 * (1.0 + gamma);
    let mu = recursion_mu(gamma, epsilon);
    let log_ratio = (df / kf.sqrt()).ln();
    let eta = mu / log_ratio;
    // ln ln(d/√k) is negative for d/√k < e; the bound is then at least 1.
    let i_star_bound = ((16.0 / mu) * log_ratio * log_ratio.ln()).ceil().max(1.0) as usize;
    let beta_exp = -gp * (1.0 - gp.sqrt()) / 200.0;

    let step = |ell: f64, d: f64, beta: f64| {
        let p = WcpParams::new(eta, ell, d, beta);
        ScheduleStep {
            ell,
            d,
            beta,
            keep: p.keep,
            uncolor: p.uncolor,
        }
    };
    let mut steps = vec![step(big_c * df / log_ratio, df, df.powf(beta_exp))];
    let mut i_star = None;
    loop {
        let cur = *steps.last().unwrap();
        if cur.d <= cur.ell / 100.0 {
            i_star = Some(steps.len() - 1);
            break;
        }
        if steps.len() > i_star_bound {
            break;
        }
        let ell = cur.keep * cur.ell;
        let d_next = cur.keep * cur.uncolor * cur.d;
        let beta = ((1.0 + 36.0 * eta) * cur.beta).max(d_next.powf(beta_exp));
        steps.push(step(ell, d_next, beta));
    }

    let relations = check_relations(&steps, i_star, i_star_bound, df, kf, big_c, epsilon, eta, gp, log_ratio);
    let schedule = ParamSchedule {
        d: df,
        k: kf,
        gamma,
        epsilon,
        gamma_prime: gp,
        big_c,
        mu,
        eta,
        steps,
        i_star,
        i_star_bound,
        relations,
    };
    if i_star.is_none() {
        return Err(ScheduleError::NoTermination(Box::new(schedule)));
    }
    Ok(schedule)
}

#[allow(clippy::too_many_arguments)]
fn check_relations(
    steps: &[ScheduleStep],
    i_star: Option<usize>,
    bound: usize,
    d: f64,
    k: f64,
    big_c: f64,
    epsilon: f64,
    eta: f64,
    gp: f64,
    log_ratio: f64,
) -> ScheduleRelations {
    let ratio = |s: &ScheduleStep| s.d / s.ell;
    let r1 = steps.len() < 2 || {
        let first = ratio(&steps[1]);
        first <= log_ratio / big_c * (1.0 + 1e-12)
            && steps[1..].iter().all(|s| ratio(s) <= first * (1.0 + 1e-12))
    };
    let floor = d * (d / k.sqrt()).powf(-4.0 / (big_c - 7.0 * epsilon / 8.0));
    let r2 = steps.iter().all(|s| s.ell >= floor);
    let r3 = i_star.is_some_and(|i| i <= bound);
    let before = &steps[..i_star.unwrap_or(steps.len())];
    ScheduleRelations {
        r1,
        r2,
        r3,
        beta_small: before.iter().all(|s| s.beta <= 0.1),
        ell_in_range: before.iter().all(|s| 4.0 * eta * s.d < s.ell && s.ell < 100.0 * s.d),
        eta_in_range: before
            .iter()
            .all(|s| 1.0 / s.d.ln().powi(5) < eta && eta < 1.0 / (s.d / k.sqrt()).ln()),
        k_in_range: before.iter().all(|s| k <= s.d.powf(2.0 * gp)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_activation_keeps_everything() {
        let p = WcpParams::new(0.0, 10.0, 5.0, 0.1);
        assert_eq!(p.keep, 1.0);
        assert_eq!(p.uncolor, 1.0);
        assert_eq!(p.d_next, 5.0);
        assert_eq!(p.ell_next, 10.0);
    }

    #[test]
    fn round_quantities_match_direct_powers() {
        let p = WcpParams::new(0.3, 12.0, 4.0, 0.05);
        let keep = (1.0f64 - 0.025).powi(8);
        assert!((p.keep - keep).abs() < 1e-14);
        assert!((p.uncolor - (1.0f64 - 0.025).powf(keep * 6.0)).abs() < 1e-14);
        assert!(p.ell_next <= p.ell && p.d_next <= p.d);
        assert!((p.beta_next - (1.0 + 36.0 * 0.3) * 0.05).abs() < 1e-15);
    }

    #[test]
    fn equalizer_defined_up_to_twice_d() {
        let p = WcpParams::new(0.5, 4.0, 3.0, 0.1);
        assert!((p.equalizer_probability(6).unwrap() - 1.0).abs() < 1e-15);
        assert!((p.equalizer_probability(0).unwrap() - p.keep).abs() < 1e-15);
        assert!(p.equalizer_probability(7).is_none());
    }

    #[test]
    fn recursion_gamma_prime_sits_between_gamma_and_one() {
        for &gamma in &[0.05, 0.1, 0.3, 0.5, 0.9] {
            for &epsilon in &[1e-4, 1e-3, 0.01] {
                let gp = recursion_gamma_prime(gamma, epsilon);
                assert!(gamma < gp && gp < 1.0, "γ={gamma} ε={epsilon} γ'={gp}");
            }
        }
    }

    #[test]
    fn d_not_above_root_k_is_rejected() {
        assert!(matches!(build_schedule(3, 9, 0.1, 0.01), Err(ScheduleError::InvalidParameters(_))));
        assert!(matches!(build_schedule(1, 1, 0.1, 0.01), Err(ScheduleError::InvalidParameters(_))));
    }

    #[test]
    fn moderate_schedule_terminates_with_monotone_ratio() {
        let s = build_schedule(10_000, 1, 0.1, 0.05).unwrap();
        let i_star = s.i_star.unwrap();
        assert!(s.steps[i_star].d <= s.steps[i_star].ell / 100.0);
        assert!(s.steps[..i_star].iter().all(|st| st.d > st.ell / 100.0));
        for w in s.steps.windows(2) {
            assert!(w[1].d / w[1].ell <= w[0].d / w[0].ell);
            assert!(w[1].beta >= w[0].beta);
        }
        assert!(s.relations.r1 && s.relations.r3);
    }
}
