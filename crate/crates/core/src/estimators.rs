//! Score estimators driven by subset-wise feedback.
//!
//! Two routes to comparing an item against a pivot:
//!
//! - [`PairwiseCounts`] rank-breaks every observed prefix into pairwise wins
//!   and estimates `p_ij = θ_i / (θ_i + θ_j)` as a win fraction.
//! - [`RenewalScoreState`] counts how often each item shows up between
//!   selections of the pivot; each per-cycle count is geometric with mean
//!   `θ_i / θ_b`, so the average over `t` cycles estimates the relative score.
//!
//! The concentration bounds both estimators are scheduled against are exposed
//! as plain functions so Monte Carlo tests can use them as thresholds.

use crate::error::{Error, Result};
use crate::pl::{Item, Subset, TopMRanking};

/// Rank-broken win counts over one played group.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseCounts {
    group: Subset,
    wins: Vec<u64>,
    ranked: Vec<bool>,
}

impl PairwiseCounts {
    pub fn new(group: Subset) -> Self {
        let k = group.len();
        Self {
            group,
            wins: vec![0; k * k],
            ranked: vec![false; k],
        }
    }

    pub fn group(&self) -> &Subset {
        &self.group
    }

    fn slot(&self, item: Item) -> Result<usize> {
        self.group
            .items()
            .iter()
            .position(|&x| x == item)
            .ok_or(Error::NotInSubset { item })
    }

    /// Number of rank-broken events "i beats j".
    pub fn wins(&self, i: Item, j: Item) -> Result<u64> {
        let (a, b) = (self.slot(i)?, self.slot(j)?);
        Ok(self.wins[a * self.group.len() + b])
    }

    /// `n_ij = w_ij + w_ji`.
    pub fn comparisons(&self, i: Item, j: Item) -> Result<u64> {
        Ok(self.wins(i, j)? + self.wins(j, i)?)
    }

    pub fn total(&self) -> u64 {
        self.wins.iter().sum()
    }

    /// Applies one feedback prefix: each ranked item beats every item of the
    /// group not ranked at or above it.
    pub fn rank_break(&mut self, fb: &TopMRanking) -> Result<()> {
        let source = fb.source();
        if source.len() != self.group.len()
            || !source.items().iter().all(|&i| self.group.contains(i))
        {
            return Err(Error::FeedbackMismatch);
        }
        self.rank_break_prefix(fb.ordered())
    }

    /// Same as [`rank_break`](Self::rank_break) for a bare prefix of group items.
    pub fn rank_break_prefix(&mut self, ordered: &[Item]) -> Result<()> {
        let k = self.group.len();
        let mut slots = Vec::with_capacity(ordered.len());
        for &item in ordered {
            slots.push(self.slot(item)?);
        }
        self.ranked.iter_mut().for_each(|r| *r = false);
        for &winner in &slots {
            self.ranked[winner] = true;
            let row = &mut self.wins[winner * k..(winner + 1) * k];
            for (loser, cell) in row.iter_mut().enumerate() {
                if !self.ranked[loser] {
                    *cell += 1;
                }
            }
        }
        Ok(())
    }
}

/// `p̂_ij = w_ij / (w_ij + w_ji)`.
///
/// Fails with [`Error::NoComparisons`] instead of guessing when the pair has
/// never been compared.
pub fn pairwise_estimate(counts: &PairwiseCounts, i: Item, j: Item) -> Result<f64> {
    let wij = counts.wins(i, j)?;
    let wji = counts.wins(j, i)?;
    let n = wij + wji;
    if n == 0 {
        return Err(Error::NoComparisons(i, j));
    }
    // Derive the larger share from the smaller so both orders sum to exactly 1.
    if wij <= wji {
        Ok(wij as f64 / n as f64)
    } else {
        Ok(1.0 - wji as f64 / n as f64)
    }
}

/// One-sided tail bound `exp(-2 v η²)` for the rank-broken estimate after at
/// least `v` comparisons.
pub fn pairwise_deviation_bound(eta: f64, v: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain { name: "eta", value: eta });
    }
    if v == 0 {
        return Err(Error::Domain { name: "v", value: 0.0 });
    }
    Ok((-2.0 * v as f64 * eta * eta).exp())
}

/// Relative-score estimate of every non-pivot group item via renewal cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalScoreState {
    group: Subset,
    pivot: Item,
    pivot_wins: u64,
    target: u64,
    appearances: Vec<u64>,
}

impl RenewalScoreState {
    pub fn new(group: Subset, pivot: Item, target: u64) -> Result<Self> {
        if !group.contains(pivot) {
            return Err(Error::NotInSubset { item: pivot });
        }
        if target == 0 {
            return Err(Error::Domain { name: "target_t", value: 0.0 });
        }
        let k = group.len();
        Ok(Self {
            group,
            pivot,
            pivot_wins: 0,
            target,
            appearances: vec![0; k],
        })
    }

    pub fn group(&self) -> &Subset {
        &self.group
    }

    pub fn pivot(&self) -> Item {
        self.pivot
    }

    pub fn pivot_wins(&self) -> u64 {
        self.pivot_wins
    }

    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn is_complete(&self) -> bool {
        self.pivot_wins >= self.target
    }

    /// Appearance count `w_i` of a non-pivot item.
    pub fn appearances(&self, item: Item) -> Result<u64> {
        if item == self.pivot {
            return Err(Error::NotInSubset { item });
        }
        let slot = self.slot(item)?;
        Ok(self.appearances[slot])
    }

    fn slot(&self, item: Item) -> Result<usize> {
        self.group
            .items()
            .iter()
            .position(|&x| x == item)
            .ok_or(Error::NotInSubset { item })
    }

    /// Records one feedback prefix and reports whether the pivot has now been
    /// selected `target` times.
    pub fn update(&mut self, fb: &TopMRanking) -> Result<bool> {
        let source = fb.source();
        if source.len() != self.group.len()
            || !source.items().iter().all(|&i| self.group.contains(i))
        {
            return Err(Error::FeedbackMismatch);
        }
        self.update_prefix(fb.ordered())
    }

    pub fn update_prefix(&mut self, ordered: &[Item]) -> Result<bool> {
        if self.is_complete() {
            return Err(Error::AlreadyComplete);
        }
        let mut slots = Vec::with_capacity(ordered.len());
        for &item in ordered {
            slots.push(self.slot(item)?);
        }
        for (&item, &slot) in ordered.iter().zip(&slots) {
            if item == self.pivot {
                self.pivot_wins += 1;
            } else {
                self.appearances[slot] += 1;
            }
        }
        Ok(self.is_complete())
    }

    /// `θ̂_i^b = w_i / t` for each non-pivot item, in group order.
    pub fn scores(&self) -> Result<Vec<(Item, f64)>> {
        if !self.is_complete() {
            return Err(Error::Incomplete);
        }
        Ok(self.scores_over(self.target))
    }

    /// Scores from the cycles seen so far, `w_i / pivot_wins`; `None` before
    /// the first pivot selection.
    pub fn partial_scores(&self) -> Option<Vec<(Item, f64)>> {
        (self.pivot_wins > 0).then(|| self.scores_over(self.pivot_wins))
    }

    fn scores_over(&self, cycles: u64) -> Vec<(Item, f64)> {
        self.group
            .items()
            .iter()
            .zip(&self.appearances)
            .filter(|(&item, _)| item != self.pivot)
            .map(|(&item, &w)| (item, w as f64 / cycles as f64))
            .collect()
    }
}

pub fn renewal_update(state: &mut RenewalScoreState, fb: &TopMRanking) -> Result<bool> {
    state.update(fb)
}

pub fn renewal_scores(state: &RenewalScoreState) -> Result<Vec<(Item, f64)>> {
    state.scores()
}

/// Two-sided bound on `Pr(|Z/d - r| ≥ η)` for a sum `Z` of `d` geometric
/// counts with mean `r = θ_i/θ_b`:
/// `2 exp(-2 d η² / ((1+r)² (η+1+r)))`.
pub fn geometric_deviation_bound(eta: f64, d: u64, ratio: f64) -> Result<f64> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain { name: "eta", value: eta });
    }
    if d == 0 {
        return Err(Error::Domain { name: "d", value: 0.0 });
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Domain { name: "ratio", value: ratio });
    }
    let s = 1.0 + ratio;
    Ok(2.0 * (-2.0 * d as f64 * eta * eta / (s * s * (eta + s))).exp())
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { name: "budget_scale", value: scale })
    }
}

fn scaled_ceil(raw: f64, scale: f64) -> u64 {
    ((raw * scale).ceil() as u64).max(1)
}

/// Per-group play count of the pairwise route, `⌈2k/(m ε'²) ln(1/δ')⌉`.
pub fn round_budget(k: usize, m: usize, eps_prime: f64, delta_prime: f64) -> Result<u64> {
    round_budget_scaled(k, m, eps_prime, delta_prime, 1.0)
}

/// [`round_budget`] with the unrounded count multiplied by `scale` first.
pub fn round_budget_scaled(
    k: usize,
    m: usize,
    eps_prime: f64,
    delta_prime: f64,
    scale: f64,
) -> Result<u64> {
    if k < 2 {
        return Err(Error::Domain { name: "k", value: k as f64 });
    }
    if m == 0 || m > k {
        return Err(Error::InvalidWidth { m, size: k });
    }
    check_unit("eps_prime", eps_prime)?;
    check_unit("delta_prime", delta_prime)?;
    check_scale(scale)?;
    let raw = 2.0 * k as f64 / (m as f64 * eps_prime * eps_prime) * (1.0 / delta_prime).ln();
    Ok(scaled_ceil(raw, scale))
}

/// Plays per arena of the pivot search, `⌈2k/ε² ln(2n/δ)⌉`.
pub fn pivot_round_budget(k: usize, n: usize, eps: f64, delta: f64) -> Result<u64> {
    pivot_round_budget_scaled(k, n, eps, delta, 1.0)
}

pub fn pivot_round_budget_scaled(
    k: usize,
    n: usize,
    eps: f64,
    delta: f64,
    scale: f64,
) -> Result<u64> {
    if k < 2 {
        return Err(Error::Domain { name: "k", value: k as f64 });
    }
    if n < k {
        return Err(Error::InvalidSubsetSize { k, n });
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain { name: "eps", value: eps });
    }
    check_unit("delta", delta)?;
    check_scale(scale)?;
    let raw = 2.0 * k as f64 / (eps * eps) * (2.0 * n as f64 / delta).ln();
    Ok(scaled_ceil(raw, scale))
}

/// Pivot selections required per group by the renewal route,
/// `⌈(1/ε'²) ln(1/δ')⌉`.
pub fn renewal_target(eps_prime: f64, delta_prime: f64, scale: f64) -> Result<u64> {
    check_unit("eps_prime", eps_prime)?;
    check_unit("delta_prime", delta_prime)?;
    check_scale(scale)?;
    let raw = (1.0 / delta_prime).ln() / (eps_prime * eps_prime);
    Ok(scaled_ceil(raw, scale))
}

/// Per-group schedule of the pairwise route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub eps_prime: f64,
    pub delta_prime: f64,
    pub t: u64,
    pub m: usize,
}

impl Schedule {
    /// `ε' = ε/16`, `δ' = δ/(8n)` and the matching round budget.
    pub fn pairwise(n: usize, k: usize, m: usize, eps: f64, delta: f64, scale: f64) -> Result<Self> {
        let eps_prime = eps / 16.0;
        let delta_prime = delta / (8.0 * n as f64);
        let t = round_budget_scaled(k, m, eps_prime, delta_prime, scale)?;
        Ok(Self { eps_prime, delta_prime, t, m })
    }

    /// `ε' = ε/24`, `δ' = δ/(8n)`; `t` counts pivot selections per group.
    pub fn renewal(n: usize, m: usize, eps: f64, delta: f64, scale: f64) -> Result<Self> {
        let eps_prime = eps / 24.0;
        let delta_prime = delta / (8.0 * n as f64);
        let t = renewal_target(eps_prime, delta_prime, scale)?;
        Ok(Self { eps_prime, delta_prime, t, m })
    }
}
