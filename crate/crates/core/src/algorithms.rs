//! Pivot-based PAC ranking learners.
//!
//! Every learner first searches for a near-best pivot item, splits the other
//! items into groups of `k - 1`, appends the pivot to each group and plays the
//! groups one after another. Items are then ranked by how they fare against
//! the pivot:
//!
//! - [`beat_the_pivot`] estimates `Pr(i beats b)` from rank-broken win counts
//!   over a fixed number of plays per group.
//! - [`score_and_rank`] estimates `θ_i / θ_b` by counting appearances of `i`
//!   between selections of the pivot.
//!
//! A learner never sees the scores; it only talks to a [`PreferenceOracle`].
//! When the oracle's budget runs out the learner stops and reports an
//! *anytime* ranking built from whatever it has estimated so far: the pivot
//! (or the running pivot candidate) first, then items with an estimate in
//! decreasing order, then items without one by ascending label. The same
//! rule produces the snapshots taken at oracle checkpoints.
//!
//! Internally a run works on *slots* `0..n` mapped to items through
//! [`AlgorithmOptions::item_order`]. Every random choice and every tie-break
//! happens in slot space, so presenting a relabeled instance together with
//! the correspondingly relabeled order reproduces the run exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::{
    pairwise_estimate, pivot_round_budget_scaled, PairwiseCounts, RenewalScoreState, Schedule,
};
use crate::oracle::{FeedbackMode, PreferenceOracle};
use crate::pl::{Item, Ranking, Subset};
use crate::rng::choose_distinct;

/// Accuracy `ε` and confidence `δ` of a PAC request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacParams {
    eps: f64,
    delta: f64,
}

impl PacParams {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain { name: "eps", value: eps });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain { name: "delta", value: delta });
        }
        Ok(Self { eps, delta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Pivot accuracy `min(ε/2, 1/2)` used by the ranking learners.
    pub fn pivot_eps(&self) -> f64 {
        (self.eps / 2.0).min(0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOptions {
    /// Multiplier on every scheduled play count (never on `ε'` or `δ'`).
    pub budget_scale: f64,
    /// Let the pivot search rank-break the whole top-m prefix instead of
    /// using only the winner.
    pub pivot_uses_full_feedback: bool,
    /// Slot-to-item map; `None` means slot `s` is item `s`.
    pub item_order: Option<Vec<Item>>,
}

impl Default for AlgorithmOptions {
    fn default() -> Self {
        Self {
            budget_scale: 1.0,
            pivot_uses_full_feedback: false,
            item_order: None,
        }
    }
}

/// Ranking captured when the oracle counter hit a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub queries: u64,
    pub ranking: Ranking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotOutcome {
    pub pivot: Item,
    /// The budget ran out and `pivot` is the running candidate.
    pub anytime: bool,
    pub queries: u64,
    /// Snapshot rankings put the running candidate first, the rest by label.
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOutcome {
    pub ranking: Ranking,
    pub pivot: Item,
    pub anytime: bool,
    /// Some group hit the renewal safety cap.
    pub cap_hit: bool,
    pub queries: u64,
    pub snapshots: Vec<Snapshot>,
}

/// Groups of `k` items sharing the pivot.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPartition {
    /// Each group lists its members followed by the pivot.
    pub groups: Vec<Vec<Item>>,
    /// Members of the final group before padding (empty if none was needed).
    pub leftover: Vec<Item>,
    /// Items re-sampled from earlier groups to fill the final group.
    pub padding: Vec<Item>,
    pub pivot: Item,
}

impl GroupPartition {
    /// Members of group `g` whose estimate comes from that group: everything
    /// except the pivot and padding duplicates.
    pub fn home_members(&self, g: usize) -> impl Iterator<Item = Item> + '_ {
        let last = g + 1 == self.groups.len();
        self.groups[g]
            .iter()
            .copied()
            .filter(move |&i| i != self.pivot && !(last && self.padding.contains(&i)))
    }
}

/// Splits `items` into `⌈|items|/(k-1)⌉` consecutive groups of `k - 1`,
/// pads a short final group with distinct items drawn from the earlier
/// groups, and appends `pivot` to every group.
pub fn partition_into_groups<R: Rng + ?Sized>(
    items: &Subset,
    pivot: Item,
    k: usize,
    rng: &mut R,
) -> Result<GroupPartition> {
    if k < 2 {
        return Err(Error::Domain { name: "k", value: k as f64 });
    }
    if items.contains(pivot) {
        return Err(Error::DuplicateItem(pivot));
    }
    let members = items.items();
    let width = k - 1;
    let mut groups: Vec<Vec<Item>> = members.chunks(width).map(<[Item]>::to_vec).collect();
    let mut leftover = Vec::new();
    let mut padding = Vec::new();
    let covered = members.len() - members.len() % width;
    if groups.len() > 1 && members.len() % width != 0 {
        let last = groups.last_mut().expect("non-empty");
        leftover = last.clone();
        padding = choose_distinct(rng, &members[..covered], width - last.len());
        last.extend_from_slice(&padding);
    }
    for g in &mut groups {
        g.push(pivot);
    }
    Ok(GroupPartition {
        groups,
        leftover,
        padding,
        pivot,
    })
}

/// Sorts items by decreasing key after placing `pivot` first. Equal keys go
/// to the lower item index.
pub fn assemble_ranking(pivot: Item, keys: &[(Item, f64)], n: usize) -> Result<Ranking> {
    let mut key_of: Vec<Option<f64>> = vec![None; n];
    for &(item, key) in keys {
        if item >= n {
            return Err(Error::ItemOutOfRange { item, n });
        }
        key_of[item] = Some(key);
    }
    if pivot >= n {
        return Err(Error::ItemOutOfRange { item: pivot, n });
    }
    if let Some(missing) = (0..n).find(|&i| i != pivot && key_of[i].is_none()) {
        return Err(Error::MissingKey(missing));
    }
    Ranking::from_order(order_by_keys(Some(pivot), &key_of))
}

/// `lead` first, keyed entries by decreasing key (ties to the lower index),
/// then unkeyed entries by ascending index.
fn order_by_keys(lead: Option<usize>, keys: &[Option<f64>]) -> Vec<usize> {
    let mut keyed: Vec<(usize, f64)> = Vec::with_capacity(keys.len());
    let mut unkeyed = Vec::new();
    for (slot, key) in keys.iter().enumerate() {
        if Some(slot) == lead {
            continue;
        }
        match key {
            Some(k) => keyed.push((slot, *k)),
            None => unkeyed.push(slot),
        }
    }
    keyed.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    lead.into_iter()
        .chain(keyed.into_iter().map(|(s, _)| s))
        .chain(unkeyed)
        .collect()
}

/// Number of arenas the pivot search plays on `n` items with subsets of `k`.
pub fn pivot_arenas(n: usize, k: usize) -> u64 {
    1 + (n - k).div_ceil(k - 1) as u64
}

/// Number of groups the ranking learners play.
pub fn group_count(n: usize, k: usize) -> u64 {
    (n - 1).div_ceil(k - 1) as u64
}

/// Exact query count of a complete [`beat_the_pivot`] run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairwiseSchedule {
    pub pivot_rounds: u64,
    pub arenas: u64,
    pub group_rounds: u64,
    pub groups: u64,
}

impl PairwiseSchedule {
    pub fn new(n: usize, k: usize, m: usize, params: PacParams, scale: f64) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::InvalidSubsetSize { k, n });
        }
        let pivot_rounds =
            pivot_round_budget_scaled(k, n, params.pivot_eps(), params.delta() / 2.0, scale)?;
        let group = Schedule::pairwise(n, k, m, params.eps(), params.delta(), scale)?;
        Ok(Self {
            pivot_rounds,
            arenas: pivot_arenas(n, k),
            group_rounds: group.t,
            groups: group_count(n, k),
        })
    }

    pub fn pivot_queries(&self) -> u64 {
        self.pivot_rounds * self.arenas
    }

    pub fn total(&self) -> u64 {
        self.pivot_queries() + self.group_rounds * self.groups
    }
}

/// Slot-space view of the oracle plus snapshot bookkeeping.
struct Session<'a, O: PreferenceOracle + ?Sized> {
    oracle: &'a mut O,
    order: Vec<Item>,
    slot_of: Vec<usize>,
    item_buf: Vec<Item>,
    out_buf: Vec<Item>,
    snapshots: Vec<Snapshot>,
}

/// Result of one play: feedback received, or the budget ran out.
enum Play {
    Done,
    Exhausted,
}

impl<'a, O: PreferenceOracle + ?Sized> Session<'a, O> {
    fn new(oracle: &'a mut O, opts: &AlgorithmOptions) -> Result<Self> {
        let n = oracle.n();
        let order = match &opts.item_order {
            Some(order) => {
                if order.len() != n {
                    return Err(Error::InvalidRanking(format!(
                        "item order has {} entries, expected {n}",
                        order.len()
                    )));
                }
                Ranking::from_order(order.clone())?;
                order.clone()
            }
            None => (0..n).collect(),
        };
        let mut slot_of = vec![0; n];
        for (slot, &item) in order.iter().enumerate() {
            slot_of[item] = slot;
        }
        Ok(Self {
            oracle,
            order,
            slot_of,
            item_buf: Vec::new(),
            out_buf: Vec::new(),
            snapshots: Vec::new(),
        })
    }

    fn n(&self) -> usize {
        self.order.len()
    }

    fn play(&mut self, slots: &[usize], out: &mut Vec<usize>) -> Result<Play> {
        self.item_buf.clear();
        self.item_buf.extend(slots.iter().map(|&s| self.order[s]));
        match self.oracle.query_into(&self.item_buf, &mut self.out_buf) {
            Ok(()) => {
                out.clear();
                out.extend(self.out_buf.iter().map(|&i| self.slot_of[i]));
                Ok(Play::Done)
            }
            Err(Error::BudgetExhausted(_)) => Ok(Play::Exhausted),
            Err(e) => Err(e),
        }
    }

    fn ranking(&self, lead: Option<usize>, keys: &[Option<f64>]) -> Ranking {
        let order = order_by_keys(lead, keys)
            .into_iter()
            .map(|s| self.order[s])
            .collect();
        Ranking::from_order(order).expect("slot order is a permutation")
    }

    fn snapshot_due(&self) -> bool {
        self.oracle.at_checkpoint()
    }

    fn snapshot(&mut self, lead: Option<usize>, keys: &[Option<f64>]) {
        let ranking = self.ranking(lead, keys);
        self.snapshots.push(Snapshot {
            queries: self.oracle.queries_used(),
            ranking,
        });
    }
}

/// Running state of the pivot search, in slot space.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSearchState {
    pub running_winner: usize,
    pub arena: Vec<usize>,
    pub pool: Vec<usize>,
    pub iteration: u64,
}

/// Tracks the empirical best item of successive arenas and returns an
/// `ε`-best item with probability at least `1 - δ`.
pub fn find_the_pivot<O, R>(
    oracle: &mut O,
    params: PacParams,
    opts: &AlgorithmOptions,
    rng: &mut R,
) -> Result<PivotOutcome>
where
    O: PreferenceOracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut session = Session::new(oracle, opts)?;
    let (pivot, exhausted) =
        pivot_search(&mut session, params.eps(), params.delta(), opts, rng)?;
    let pivot = session.order[pivot];
    Ok(PivotOutcome {
        pivot,
        anytime: exhausted,
        queries: session.oracle.queries_used(),
        snapshots: session.snapshots,
    })
}

fn pivot_search<O, R>(
    session: &mut Session<'_, O>,
    eps: f64,
    delta: f64,
    opts: &AlgorithmOptions,
    rng: &mut R,
) -> Result<(usize, bool)>
where
    O: PreferenceOracle + ?Sized,
    R: Rng + ?Sized,
{
    let n = session.n();
    let k = session.oracle.k();
    let rounds = pivot_round_budget_scaled(k, n, eps, delta, opts.budget_scale)?;
    let full_feedback = opts.pivot_uses_full_feedback && session.oracle.m() > 1;
    let unkeyed: Vec<Option<f64>> = vec![None; n];

    let first = crate::rng::index(rng, n);
    let others: Vec<usize> = (0..n).filter(|&s| s != first).collect();
    let mut arena = vec![first];
    arena.extend(choose_distinct(rng, &others, k - 1));
    let mut state = PivotSearchState {
        running_winner: first,
        pool: (0..n).filter(|s| !arena.contains(s)).collect(),
        arena,
        iteration: 1,
    };

    let mut out = Vec::with_capacity(k);
    loop {
        let mut wins = vec![0u64; k];
        let mut counts = full_feedback.then(|| {
            PairwiseCounts::new(Subset::new(state.arena.clone()).expect("distinct arena"))
        });
        for _ in 0..rounds {
            if let Play::Exhausted = session.play(&state.arena, &mut out)? {
                return Ok((state.running_winner, true));
            }
            match counts.as_mut() {
                Some(c) => c.rank_break_prefix(&out)?,
                None => {
                    let pos = state.arena.iter().position(|&s| s == out[0]).expect("member");
                    wins[pos] += 1;
                }
            }
            if session.snapshot_due() {
                session.snapshot(Some(state.running_winner), &unkeyed);
            }
        }

        let r = state.running_winner;
        let (challenger, p_cr) = match &counts {
            None => {
                let best = argmax_by_slot(&state.arena, |pos| wins[pos] as f64);
                let c = state.arena[best];
                let r_pos = state.arena.iter().position(|&s| s == r).expect("member");
                let denom = wins[best] + wins[r_pos];
                let p = (c != r && denom > 0).then(|| wins[best] as f64 / denom as f64);
                (c, p)
            }
            Some(c) => {
                let best = argmax_by_slot(&state.arena, |pos| {
                    let i = state.arena[pos];
                    state
                        .arena
                        .iter()
                        .map(|&j| c.wins(i, j).unwrap_or(0))
                        .sum::<u64>() as f64
                });
                let ch = state.arena[best];
                (ch, (ch != r).then(|| pairwise_estimate(c, ch, r).ok()).flatten())
            }
        };
        if p_cr.is_some_and(|p| p > 0.5 + eps / 2.0) {
            state.running_winner = challenger;
        }
        let r = state.running_winner;

        if state.pool.is_empty() {
            return Ok((r, false));
        }
        let others: Vec<usize> = state.arena.iter().copied().filter(|&s| s != r).collect();
        let mut next = vec![r];
        if state.pool.len() < k - 1 {
            next.extend(choose_distinct(rng, &others, k - 1 - state.pool.len()));
            next.append(&mut state.pool);
        } else {
            let picked = choose_distinct(rng, &state.pool, k - 1);
            state.pool.retain(|s| !picked.contains(s));
            next.extend(picked);
        }
        state.arena = next;
        state.iteration += 1;
    }
}

/// Position in `arena` maximizing `score`, ties to the lowest slot.
fn argmax_by_slot(arena: &[usize], score: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    for pos in 1..arena.len() {
        let (a, b) = (score(pos), score(best));
        if a > b || (a == b && arena[pos] < arena[best]) {
            best = pos;
        }
    }
    best
}

/// Pairwise-preference route: play each group a fixed number of times and
/// rank items by their estimated probability of beating the pivot.
pub fn beat_the_pivot<O, R>(
    oracle: &mut O,
    params: PacParams,
    opts: &AlgorithmOptions,
    rng: &mut R,
) -> Result<RankOutcome>
where
    O: PreferenceOracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut session = Session::new(oracle, opts)?;
    let n = session.n();
    let k = session.oracle.k();
    let mode = session.oracle.mode();
    let m = mode.width(k);
    let schedule = Schedule::pairwise(n, k, m, params.eps(), params.delta(), opts.budget_scale)?;

    let (pivot, exhausted) = pivot_search(
        &mut session,
        params.pivot_eps(),
        params.delta() / 2.0,
        opts,
        rng,
    )?;
    if exhausted {
        return Ok(finish(session, pivot, &vec![None; n], true, false));
    }

    let rest = Subset::new((0..n).filter(|&s| s != pivot).collect())?;
    let partition = partition_into_groups(&rest, pivot, k, rng)?;
    let mut keys: Vec<Option<f64>> = vec![None; n];
    let mut out = Vec::with_capacity(m);

    for (g, group) in partition.groups.iter().enumerate() {
        let home: Vec<usize> = partition.home_members(g).collect();
        let mut tally = PairTally::new(group, mode);
        for _ in 0..schedule.t {
            if let Play::Exhausted = session.play(group, &mut out)? {
                tally.estimate_into(&home, pivot, &mut keys);
                return Ok(finish(session, pivot, &keys, true, false));
            }
            tally.record(&out)?;
            if session.snapshot_due() {
                let mut current = keys.clone();
                tally.estimate_into(&home, pivot, &mut current);
                session.snapshot(Some(pivot), &current);
            }
        }
        tally.estimate_into(&home, pivot, &mut keys);
    }
    Ok(finish(session, pivot, &keys, false, false))
}

/// Win counts of one group: direct winner counts under winner-only feedback,
/// rank-broken pairwise counts otherwise.
enum PairTally {
    Winners { members: Vec<usize>, wins: Vec<u64> },
    RankBroken(PairwiseCounts),
}

impl PairTally {
    fn new(group: &[usize], mode: FeedbackMode) -> Self {
        match mode {
            FeedbackMode::WinnerOnly => PairTally::Winners {
                members: group.to_vec(),
                wins: vec![0; group.len()],
            },
            _ => PairTally::RankBroken(PairwiseCounts::new(
                Subset::new(group.to_vec()).expect("distinct group"),
            )),
        }
    }

    fn record(&mut self, ordered: &[usize]) -> Result<()> {
        match self {
            PairTally::Winners { members, wins } => {
                let pos = members
                    .iter()
                    .position(|&s| s == ordered[0])
                    .ok_or(Error::FeedbackMismatch)?;
                wins[pos] += 1;
                Ok(())
            }
            PairTally::RankBroken(counts) => counts.rank_break_prefix(ordered),
        }
    }

    /// Writes `p̂_ib` for each compared home member into `keys`.
    fn estimate_into(&self, home: &[usize], pivot: usize, keys: &mut [Option<f64>]) {
        for &i in home {
            let p = match self {
                PairTally::Winners { members, wins } => {
                    let of = |s: usize| wins[members.iter().position(|&x| x == s).expect("member")];
                    let (wi, wb) = (of(i), of(pivot));
                    (wi + wb > 0).then(|| wi as f64 / (wi + wb) as f64)
                }
                PairTally::RankBroken(counts) => pairwise_estimate(counts, i, pivot).ok(),
            };
            if p.is_some() {
                keys[i] = p;
            }
        }
    }
}

/// Relative-score route: play each group until the pivot has been selected
/// `t` times and rank items by appearances per pivot selection.
pub fn score_and_rank<O, R>(
    oracle: &mut O,
    params: PacParams,
    opts: &AlgorithmOptions,
    rng: &mut R,
) -> Result<RankOutcome>
where
    O: PreferenceOracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut session = Session::new(oracle, opts)?;
    let n = session.n();
    let k = session.oracle.k();
    let m = session.oracle.m();
    let schedule = Schedule::renewal(n, m, params.eps(), params.delta(), opts.budget_scale)?;
    let cap = renewal_cap(schedule.t, k);

    let (pivot, exhausted) = pivot_search(
        &mut session,
        params.pivot_eps(),
        params.delta() / 4.0,
        opts,
        rng,
    )?;
    if exhausted {
        return Ok(finish(session, pivot, &vec![None; n], true, false));
    }

    let rest = Subset::new((0..n).filter(|&s| s != pivot).collect())?;
    let partition = partition_into_groups(&rest, pivot, k, rng)?;
    let mut keys: Vec<Option<f64>> = vec![None; n];
    let mut cap_hit = false;
    let mut out = Vec::with_capacity(m);

    for (g, group) in partition.groups.iter().enumerate() {
        let home: Vec<usize> = partition.home_members(g).collect();
        let mut state = RenewalScoreState::new(Subset::new(group.clone())?, pivot, schedule.t)?;
        let mut played = 0u64;
        while !state.is_complete() {
            if played == cap {
                cap_hit = true;
                break;
            }
            if let Play::Exhausted = session.play(group, &mut out)? {
                renewal_keys(&state, &home, &mut keys);
                return Ok(finish(session, pivot, &keys, true, cap_hit));
            }
            played += 1;
            state.update_prefix(&out)?;
            if session.snapshot_due() {
                let mut current = keys.clone();
                renewal_keys(&state, &home, &mut current);
                session.snapshot(Some(pivot), &current);
            }
        }
        renewal_keys(&state, &home, &mut keys);
    }
    Ok(finish(session, pivot, &keys, false, cap_hit))
}

/// Per-group query cap of the renewal route, `⌈(5/2) t k⌉`.
pub fn renewal_cap(t: u64, k: usize) -> u64 {
    (5 * t * k as u64).div_ceil(2)
}

fn renewal_keys(state: &RenewalScoreState, home: &[usize], keys: &mut [Option<f64>]) {
    let scores = if state.is_complete() {
        state.scores().ok()
    } else {
        state.partial_scores()
    };
    for (item, score) in scores.into_iter().flatten() {
        if home.contains(&item) {
            keys[item] = Some(score);
        }
    }
}

fn finish<O: PreferenceOracle + ?Sized>(
    session: Session<'_, O>,
    pivot: usize,
    keys: &[Option<f64>],
    anytime: bool,
    cap_hit: bool,
) -> RankOutcome {
    RankOutcome {
        ranking: session.ranking(Some(pivot), keys),
        pivot: session.order[pivot],
        anytime,
        cap_hit,
        queries: session.oracle.queries_used(),
        snapshots: session.snapshots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{is_eps_best_item, is_eps_best_ranking};
    use crate::harness::environment;
    use crate::oracle::QueryOracle;
    use crate::pl::PlInstance;
    use crate::rng::{learner_stream, oracle_stream};

    fn oracle(inst: &PlInstance, k: usize, mode: FeedbackMode, seed: u64) -> QueryOracle {
        QueryOracle::new(inst.clone(), k, mode, oracle_stream(seed)).unwrap()
    }

    #[test]
    fn params_domain() {
        assert!(PacParams::new(0.0, 0.1).is_err());
        assert!(PacParams::new(0.1, 1.0).is_err());
        let p = PacParams::new(0.3, 0.1).unwrap();
        assert_eq!(p.pivot_eps(), 0.15);
        assert_eq!(PacParams::new(0.99, 0.1).unwrap().pivot_eps(), 0.495);
    }

    #[test]
    fn partition_exact_division() {
        let items = Subset::new((0..8).collect()).unwrap();
        let p = partition_into_groups(&items, 8, 5, &mut learner_stream(0)).unwrap();
        assert_eq!(p.groups.len(), 2);
        assert!(p.padding.is_empty() && p.leftover.is_empty());
        assert!(p.groups.iter().all(|g| g.len() == 5 && g.contains(&8)));
    }

    #[test]
    fn partition_pads_final_group() {
        let items = Subset::new(vec![1, 2, 3, 4, 5, 6, 7]).unwrap();
        let p = partition_into_groups(&items, 0, 4, &mut learner_stream(1)).unwrap();
        assert_eq!(p.groups.len(), 3);
        assert_eq!(p.leftover, vec![7]);
        assert_eq!(p.padding.len(), 2);
        assert!(p.padding.iter().all(|i| !p.leftover.contains(i)));
        assert!(p.padding.iter().all(|i| [1, 2, 3, 4, 5, 6].contains(i)));
        assert!(p.groups.iter().all(|g| g.len() == 4 && g.contains(&0)));
        let homes: Vec<Vec<Item>> = (0..3).map(|g| p.home_members(g).collect()).collect();
        let mut all: Vec<Item> = homes.concat();
        all.sort_unstable();
        assert_eq!(all, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn partition_rejects_pivot_member() {
        let items = Subset::new(vec![0, 1, 2]).unwrap();
        assert!(partition_into_groups(&items, 1, 2, &mut learner_stream(0)).is_err());
    }

    #[test]
    fn assemble_examples() {
        let r = assemble_ranking(1, &[(0, 0.9), (2, 0.4)], 3).unwrap();
        assert_eq!(r.order(), &[1, 0, 2]);
        let r = assemble_ranking(0, &[(3, 0.5), (1, 0.5), (2, 0.7)], 4).unwrap();
        assert_eq!(r.order(), &[0, 2, 1, 3]);
        assert_eq!(assemble_ranking(0, &[(1, 0.5)], 3), Err(Error::MissingKey(2)));
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(pivot_arenas(8, 8), 1);
        assert_eq!(pivot_arenas(8, 4), 3);
        assert_eq!(pivot_arenas(20, 4), 7);
        assert_eq!(group_count(8, 4), 3);
        assert_eq!(group_count(9, 5), 2);
        assert_eq!(renewal_cap(10, 3), 75);
        assert_eq!(renewal_cap(3, 3), 23);
    }

    #[test]
    fn pivot_single_arena_when_n_equals_k() {
        let inst = PlInstance::new(vec![1.0, 0.3, 0.2, 0.1]).unwrap();
        let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, 1);
        let params = PacParams::new(0.5, 0.1).unwrap();
        let out = find_the_pivot(&mut o, params, &AlgorithmOptions::default(), &mut learner_stream(1))
            .unwrap();
        assert_eq!(out.queries, pivot_round_budget_scaled(4, 4, 0.5, 0.1, 1.0).unwrap());
        assert!(!out.anytime);
    }

    #[test]
    fn pivot_on_dominant_item() {
        let mut w = vec![0.01; 8];
        w[0] = 1.0;
        let inst = PlInstance::new(w).unwrap();
        let params = PacParams::new(0.5, 0.1).unwrap();
        let mut hits = 0;
        for seed in 0..100 {
            let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, seed);
            let out = find_the_pivot(&mut o, params, &AlgorithmOptions::default(), &mut learner_stream(seed))
                .unwrap();
            assert_eq!(out.queries, 3 * pivot_round_budget_scaled(4, 8, 0.5, 0.1, 1.0).unwrap());
            hits += usize::from(out.pivot == 0);
        }
        assert!(hits >= 90, "{hits}");
    }

    #[test]
    fn argmax_ties_go_to_lowest_slot() {
        assert_eq!(argmax_by_slot(&[5, 2, 9], |_| 1.0), 1);
        assert_eq!(argmax_by_slot(&[5, 2, 9], |p| [3.0, 1.0, 3.0][p]), 0);
        assert_eq!(argmax_by_slot(&[9, 2, 5], |p| [3.0, 1.0, 3.0][p]), 2);
    }

    #[test]
    fn pivot_full_feedback_flag_runs() {
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.5, 0.1).unwrap();
        let opts = AlgorithmOptions {
            pivot_uses_full_feedback: true,
            ..Default::default()
        };
        let mut o = oracle(&inst, 4, FeedbackMode::TopM(3), 4);
        let out = find_the_pivot(&mut o, params, &opts, &mut learner_stream(4)).unwrap();
        assert!(is_eps_best_item(&inst, out.pivot, 0.5).unwrap());
    }

    #[test]
    fn beat_the_pivot_query_accounting() {
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        for (mode, m) in [(FeedbackMode::WinnerOnly, 1), (FeedbackMode::TopM(2), 2)] {
            let opts = AlgorithmOptions {
                budget_scale: 0.05,
                ..Default::default()
            };
            let mut o = oracle(&inst, 4, mode, 9);
            let out = beat_the_pivot(&mut o, params, &opts, &mut learner_stream(9)).unwrap();
            let sched = PairwiseSchedule::new(8, 4, m, params, 0.05).unwrap();
            assert_eq!(out.queries, sched.total());
            assert!(!out.anytime);
            assert_eq!(out.ranking.item_at(0), out.pivot);
        }
    }

    #[test]
    fn tr_one_matches_winner_only() {
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let opts = AlgorithmOptions {
            budget_scale: 0.02,
            ..Default::default()
        };
        for seed in 0..5 {
            let mut a = oracle(&inst, 4, FeedbackMode::WinnerOnly, seed);
            let mut b = oracle(&inst, 4, FeedbackMode::TopM(1), seed);
            let ra = beat_the_pivot(&mut a, params, &opts, &mut learner_stream(seed)).unwrap();
            let rb = beat_the_pivot(&mut b, params, &opts, &mut learner_stream(seed)).unwrap();
            assert_eq!(ra, rb);
        }
    }

    #[test]
    fn budget_exhaustion_yields_anytime_ranking() {
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let opts = AlgorithmOptions::default();
        for budget in [1, 100, 10_000, 50_000] {
            let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, 3).with_budget(budget).unwrap();
            let out = beat_the_pivot(&mut o, params, &opts, &mut learner_stream(3)).unwrap();
            assert!(out.anytime);
            assert_eq!(out.queries, budget);
            assert_eq!(out.ranking.n(), 8);

            let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, 3).with_budget(budget).unwrap();
            let out = score_and_rank(&mut o, params, &opts, &mut learner_stream(3)).unwrap();
            assert!(out.anytime);
            assert_eq!(out.queries, budget);
        }
    }

    #[test]
    fn snapshots_at_checkpoints() {
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let checkpoints = vec![10, 5_000, 60_000];
        let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, 6)
            .with_checkpoints(checkpoints.clone())
            .with_budget(60_000)
            .unwrap();
        let out = beat_the_pivot(&mut o, params, &AlgorithmOptions::default(), &mut learner_stream(6))
            .unwrap();
        let seen: Vec<u64> = out.snapshots.iter().map(|s| s.queries).collect();
        assert_eq!(seen, checkpoints);
        assert_eq!(out.snapshots.last().unwrap().ranking, out.ranking);
    }

    #[test]
    fn score_and_rank_full_ranking_group_length() {
        // With full feedback the pivot shows up in every round.
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let opts = AlgorithmOptions {
            budget_scale: 0.01,
            ..Default::default()
        };
        let mut o = oracle(&inst, 4, FeedbackMode::FullRanking, 2);
        let out = score_and_rank(&mut o, params, &opts, &mut learner_stream(2)).unwrap();
        let pivot_q = 3 * pivot_round_budget_scaled(4, 8, 0.15, 0.025, 0.01).unwrap();
        let t = Schedule::renewal(8, 4, 0.3, 0.1, 0.01).unwrap().t;
        assert_eq!(out.queries, pivot_q + 3 * t);
        assert!(!out.cap_hit);
    }

    #[test]
    fn score_and_rank_equal_weights_group_length() {
        // All-equal weights: each round selects the pivot with chance 1/k.
        let inst = PlInstance::new(vec![1.0; 4]).unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let opts = AlgorithmOptions {
            budget_scale: 0.05,
            ..Default::default()
        };
        let t = Schedule::renewal(4, 1, 0.3, 0.1, 0.05).unwrap().t;
        let pivot_q = pivot_round_budget_scaled(4, 4, 0.15, 0.025, 0.05).unwrap();
        let mut total = 0.0;
        let runs = 40;
        for seed in 0..runs {
            let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, seed);
            let out = score_and_rank(&mut o, params, &opts, &mut learner_stream(seed)).unwrap();
            total += (out.queries - pivot_q) as f64;
        }
        let mean = total / runs as f64;
        let expect = 4.0 * t as f64;
        // negative binomial: sd of one group length is sqrt(t (1-p)) / p
        let sd = (t as f64 * 0.75).sqrt() / 0.25 / (runs as f64).sqrt();
        assert!((mean - expect).abs() < 4.0 * sd, "mean {mean} expect {expect}");
    }

    /// Always ranks the subset in the order it was listed.
    struct Listed {
        n: usize,
        k: usize,
        used: u64,
    }

    impl PreferenceOracle for Listed {
        fn n(&self) -> usize {
            self.n
        }
        fn k(&self) -> usize {
            self.k
        }
        fn mode(&self) -> FeedbackMode {
            FeedbackMode::WinnerOnly
        }
        fn query_into(&mut self, items: &[Item], out: &mut Vec<Item>) -> Result<()> {
            out.clear();
            out.push(items[0]);
            self.used += 1;
            Ok(())
        }
        fn queries_used(&self) -> u64 {
            self.used
        }
        fn at_checkpoint(&self) -> bool {
            false
        }
    }

    #[test]
    fn score_and_rank_cap_is_reported() {
        // Groups list the pivot last, so it is never selected.
        let params = PacParams::new(0.5, 0.1).unwrap();
        let opts = AlgorithmOptions {
            budget_scale: 0.01,
            ..Default::default()
        };
        let mut o = Listed { n: 7, k: 4, used: 0 };
        let out = score_and_rank(&mut o, params, &opts, &mut learner_stream(0)).unwrap();
        assert!(out.cap_hit);
        assert!(!out.anytime);
        let t = Schedule::renewal(7, 1, 0.5, 0.1, 0.01).unwrap().t;
        let pivot_q = 2 * pivot_round_budget_scaled(4, 7, 0.25, 0.025, 0.01).unwrap();
        assert_eq!(out.queries, pivot_q + 2 * renewal_cap(t, 4));
    }

    #[test]
    fn learners_rank_geo8_at_reduced_scale() {
        let inst = environment("geo8").unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let opts = AlgorithmOptions {
            budget_scale: 0.2,
            ..Default::default()
        };
        let mut o = oracle(&inst, 4, FeedbackMode::WinnerOnly, 12);
        let out = beat_the_pivot(&mut o, params, &opts, &mut learner_stream(12)).unwrap();
        assert!(is_eps_best_ranking(&inst, &out.ranking, 0.3).unwrap().0);
        let mut o = oracle(&inst, 4, FeedbackMode::TopM(2), 12);
        let out = score_and_rank(&mut o, params, &opts, &mut learner_stream(12)).unwrap();
        assert!(is_eps_best_ranking(&inst, &out.ranking, 0.3).unwrap().0);
    }

    #[test]
    fn relabeled_run_commutes() {
        let inst = environment("geo8").unwrap();
        let perm = vec![3, 7, 0, 5, 1, 6, 2, 4];
        let moved = inst.relabeled(&perm).unwrap();
        let params = PacParams::new(0.3, 0.1).unwrap();
        let base = AlgorithmOptions {
            budget_scale: 0.01,
            ..Default::default()
        };
        let moved_opts = AlgorithmOptions {
            item_order: Some(perm.clone()),
            ..base.clone()
        };
        let mut a = oracle(&inst, 4, FeedbackMode::TopM(2), 8);
        let mut b = oracle(&moved, 4, FeedbackMode::TopM(2), 8);
        let ra = beat_the_pivot(&mut a, params, &base, &mut learner_stream(8)).unwrap();
        let rb = beat_the_pivot(&mut b, params, &moved_opts, &mut learner_stream(8)).unwrap();
        assert_eq!(rb.ranking, ra.ranking.relabeled(&perm).unwrap());
        assert_eq!(rb.pivot, perm[ra.pivot]);
    }
}
