//! Plackett-Luce choice model.
//!
//! An instance holds one positive score per item. The winner of a subset `S`
//! is item `i` with probability `θ_i / Σ_{j∈S} θ_j`, and a top-m ranking is
//! drawn by taking `m` successive winners without replacement.
//!
//! Items are 0-based indices. Samplers walk a subset in the order its items
//! are listed, so relabeling the items of an instance and of every subset
//! reproduces the same draws under the same random stream.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Item identifier, `0..n`.
pub type Item = usize;

/// Largest subset accepted by [`enumerate_top_m_distribution`].
pub const ENUMERATION_LIMIT: usize = 7;

/// Ground-truth score vector. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PlInstance {
    weights: Vec<f64>,
}

impl PlInstance {
    /// Builds an instance whose largest weight is exactly 1.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_normalization(weights, false)
    }

    /// Builds an instance after dividing every weight by the maximum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        Self::with_normalization(weights, true)
    }

    pub fn with_normalization(mut weights: Vec<f64>, normalize: bool) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::TooFewItems(weights.len()));
        }
        for (item, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidWeight { item, value });
            }
        }
        let max = weights.iter().copied().fold(f64::MIN, f64::max);
        if normalize {
            for w in &mut weights {
                *w /= max;
            }
        } else {
            if (max - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized(max));
            }
            if let Some((item, &value)) = weights.iter().enumerate().find(|(_, w)| **w > 1.0) {
                return Err(Error::InvalidWeight { item, value });
            }
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, item: Item) -> f64 {
        self.weights[item]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Pairwise preference `Pr(i | {i, j}) = θ_i / (θ_i + θ_j)`.
    pub fn pairwise(&self, i: Item, j: Item) -> f64 {
        self.weights[i] / (self.weights[i] + self.weights[j])
    }

    /// Moves item `i` to label `perm[i]`.
    pub fn relabeled(&self, perm: &[Item]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        let mut weights = vec![0.0; self.n()];
        for (old, &new) in perm.iter().enumerate() {
            weights[new] = self.weights[old];
        }
        Ok(Self { weights })
    }

    pub(crate) fn check_item(&self, item: Item) -> Result<()> {
        if item < self.n() {
            Ok(())
        } else {
            Err(Error::ItemOutOfRange { item, n: self.n() })
        }
    }

    pub(crate) fn check_subset(&self, s: &Subset) -> Result<()> {
        s.items().iter().try_for_each(|&i| self.check_item(i))
    }
}

/// An ordered list of distinct items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    items: Vec<Item>,
}

impl Subset {
    pub fn new(items: Vec<Item>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut seen = items.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateItem(w[0]));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: Item) -> bool {
        self.items.contains(&item)
    }
}

/// Ordered prefix of a PL ranking over a played subset, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopMRanking {
    ordered: Vec<Item>,
    source: Subset,
}

impl TopMRanking {
    pub fn new(ordered: Vec<Item>, source: Subset) -> Result<Self> {
        if ordered.is_empty() || ordered.len() > source.len() {
            return Err(Error::InvalidWidth {
                m: ordered.len(),
                size: source.len(),
            });
        }
        for (pos, &item) in ordered.iter().enumerate() {
            if !source.contains(item) {
                return Err(Error::NotInSubset { item });
            }
            if ordered[..pos].contains(&item) {
                return Err(Error::DuplicateItem(item));
            }
        }
        Ok(Self { ordered, source })
    }

    pub fn ordered(&self) -> &[Item] {
        &self.ordered
    }

    pub fn source(&self) -> &Subset {
        &self.source
    }

    pub fn m(&self) -> usize {
        self.ordered.len()
    }

    pub fn winner(&self) -> Item {
        self.ordered[0]
    }
}

/// A full ranking of `0..n`; position 0 is the best.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    item_at: Vec<Item>,
    position: Vec<usize>,
}

impl Ranking {
    /// Builds a ranking from items listed best first.
    pub fn from_order(item_at: Vec<Item>) -> Result<Self> {
        let n = item_at.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &item) in item_at.iter().enumerate() {
            if item >= n {
                return Err(Error::InvalidRanking(format!("item {item} out of range")));
            }
            if position[item] != usize::MAX {
                return Err(Error::InvalidRanking(format!("item {item} repeated")));
            }
            position[item] = pos;
        }
        Ok(Self { item_at, position })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            item_at: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.item_at.len()
    }

    pub fn position(&self, item: Item) -> usize {
        self.position[item]
    }

    pub fn item_at(&self, pos: usize) -> Item {
        self.item_at[pos]
    }

    pub fn order(&self) -> &[Item] {
        &self.item_at
    }

    /// Ranking with every item `i` renamed to `perm[i]`, positions unchanged.
    pub fn relabeled(&self, perm: &[Item]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        Self::from_order(self.item_at.iter().map(|&i| perm[i]).collect())
    }
}

fn check_permutation(perm: &[Item], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidRanking(format!(
            "permutation has {} entries, expected {n}",
            perm.len()
        )));
    }
    Ranking::from_order(perm.to_vec()).map(|_| ())
}

/// Winner probabilities over `s`, in the order of `s.items()`.
pub fn winner_distribution(inst: &PlInstance, s: &Subset) -> Result<Vec<f64>> {
    inst.check_subset(s)?;
    let total: f64 = s.items().iter().map(|&i| inst.weight(i)).sum();
    Ok(s.items().iter().map(|&i| inst.weight(i) / total).collect())
}

pub fn sample_winner<R: Rng + ?Sized>(inst: &PlInstance, s: &Subset, rng: &mut R) -> Result<Item> {
    inst.check_subset(s)?;
    let mut scratch = Vec::with_capacity(s.len());
    let mut out = Vec::with_capacity(1);
    draw_prefix(inst.weights(), s.items(), 1, rng, &mut scratch, &mut out);
    Ok(out[0])
}

pub fn sample_top_m<R: Rng + ?Sized>(
    inst: &PlInstance,
    s: &Subset,
    m: usize,
    rng: &mut R,
) -> Result<TopMRanking> {
    inst.check_subset(s)?;
    if m == 0 || m > s.len() {
        return Err(Error::InvalidWidth { m, size: s.len() });
    }
    let mut scratch = Vec::with_capacity(s.len());
    let mut ordered = Vec::with_capacity(m);
    draw_prefix(inst.weights(), s.items(), m, rng, &mut scratch, &mut ordered);
    Ok(TopMRanking {
        ordered,
        source: s.clone(),
    })
}

/// Draws `m` successive winners without replacement from `items`.
///
/// `items` must be distinct and in range. One uniform is consumed per draw;
/// the remaining items keep their listed order between draws.
pub(crate) fn draw_prefix<R: Rng + ?Sized>(
    weights: &[f64],
    items: &[Item],
    m: usize,
    rng: &mut R,
    scratch: &mut Vec<Item>,
    out: &mut Vec<Item>,
) {
    scratch.clear();
    scratch.extend_from_slice(items);
    out.clear();
    for _ in 0..m {
        let total: f64 = scratch.iter().map(|&i| weights[i]).sum();
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        // Rounding can leave `target` just above the last partial sum.
        let mut chosen = scratch.len() - 1;
        for (pos, &i) in scratch.iter().enumerate() {
            acc += weights[i];
            if target < acc {
                chosen = pos;
                break;
            }
        }
        out.push(scratch.remove(chosen));
    }
}

/// Probability of observing `r` as the top-`m` prefix of its source subset.
pub fn ranking_probability(inst: &PlInstance, r: &TopMRanking) -> Result<f64> {
    inst.check_subset(r.source())?;
    let mut remaining: f64 = r.source().items().iter().map(|&i| inst.weight(i)).sum();
    let mut prob = 1.0;
    for &item in r.ordered() {
        let w = inst.weight(item);
        prob *= w / remaining;
        remaining -= w;
    }
    Ok(prob)
}

/// Exact law of the top-`m` prefix, keyed by the ordered prefix.
pub fn enumerate_top_m_distribution(
    inst: &PlInstance,
    s: &Subset,
    m: usize,
) -> Result<BTreeMap<Vec<Item>, f64>> {
    inst.check_subset(s)?;
    if s.len() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            size: s.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    if m == 0 || m > s.len() {
        return Err(Error::InvalidWidth { m, size: s.len() });
    }
    let mut out = BTreeMap::new();
    let mut prefix = Vec::with_capacity(m);
    enumerate_rec(inst, s, m, &mut prefix, &mut out)?;
    Ok(out)
}

fn enumerate_rec(
    inst: &PlInstance,
    s: &Subset,
    m: usize,
    prefix: &mut Vec<Item>,
    out: &mut BTreeMap<Vec<Item>, f64>,
) -> Result<()> {
    if prefix.len() == m {
        let r = TopMRanking::new(prefix.clone(), s.clone())?;
        out.insert(prefix.clone(), ranking_probability(inst, &r)?);
        return Ok(());
    }
    for &item in s.items() {
        if !prefix.contains(&item) {
            prefix.push(item);
            enumerate_rec(inst, s, m, prefix, out)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// Winner-probability ratios `Pr(i1|s1)/Pr(i2|s1)` and `Pr(i1|s2)/Pr(i2|s2)`.
pub fn check_iia(
    inst: &PlInstance,
    i1: Item,
    i2: Item,
    s1: &Subset,
    s2: &Subset,
) -> Result<(f64, f64)> {
    let ratio = |s: &Subset| -> Result<f64> {
        let dist = winner_distribution(inst, s)?;
        let p = |item: Item| {
            s.items()
                .iter()
                .position(|&x| x == item)
                .map(|pos| dist[pos])
                .ok_or(Error::NotInSubset { item })
        };
        Ok(p(i1)? / p(i2)?)
    };
    Ok((ratio(s1)?, ratio(s2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inst(w: &[f64]) -> PlInstance {
        PlInstance::new(w.to_vec()).unwrap()
    }

    fn subset(items: &[Item]) -> Subset {
        Subset::new(items.to_vec()).unwrap()
    }

    #[test]
    fn constructor_enforces_normalization() {
        assert_eq!(
            PlInstance::new(vec![0.5, 0.25]),
            Err(Error::NotNormalized(0.5))
        );
        let normalized = PlInstance::normalized(vec![0.5, 0.25]).unwrap();
        assert_eq!(normalized.weights(), &[1.0, 0.5]);
        assert!(matches!(
            PlInstance::new(vec![1.0, 0.0]),
            Err(Error::InvalidWeight { item: 1, .. })
        ));
        assert_eq!(PlInstance::new(vec![1.0]), Err(Error::TooFewItems(1)));
        // ties are allowed
        assert!(PlInstance::new(vec![1.0, 1.0, 0.5]).is_ok());
    }

    #[test]
    fn subset_validation() {
        assert_eq!(Subset::new(vec![]), Err(Error::EmptySubset));
        assert_eq!(Subset::new(vec![0, 2, 0]), Err(Error::DuplicateItem(0)));
        let i = inst(&[1.0, 0.5]);
        assert_eq!(
            winner_distribution(&i, &subset(&[0, 5])),
            Err(Error::ItemOutOfRange { item: 5, n: 2 })
        );
    }

    #[test]
    fn winner_distribution_examples() {
        let d = winner_distribution(&inst(&[1.0, 0.5]), &subset(&[0, 1])).unwrap();
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d[1] - 1.0 / 3.0).abs() < 1e-15);

        let d = winner_distribution(&inst(&[1.0, 0.3, 0.2]), &subset(&[2])).unwrap();
        assert_eq!(d, vec![1.0]);

        let d = winner_distribution(&inst(&[1.0, 1.0]), &subset(&[0, 1])).unwrap();
        assert_eq!(d, vec![0.5, 0.5]);
    }

    #[test]
    fn sample_winner_frequency_matches_closed_form() {
        let i = inst(&[1.0, 0.5]);
        let s = subset(&[0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 300_000;
        let wins = (0..draws)
            .filter(|_| sample_winner(&i, &s, &mut rng).unwrap() == 0)
            .count();
        let freq = wins as f64 / draws as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.005, "freq {freq}");
    }

    #[test]
    fn sample_winner_singleton_and_determinism() {
        let i = inst(&[1.0, 0.5, 0.25]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_winner(&i, &subset(&[2]), &mut rng).unwrap(), 2);
        }
        let s = subset(&[0, 1, 2]);
        let a = sample_winner(&i, &s, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = sample_winner(&i, &s, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn product_formula_value() {
        let i = inst(&[1.0, 0.5, 0.25]);
        let s = subset(&[0, 1, 2]);
        let r = TopMRanking::new(vec![0, 1, 2], s.clone()).unwrap();
        let p = ranking_probability(&i, &r).unwrap();
        // (1/1.75) * (0.5/0.75) * 1
        assert!((p - 8.0 / 21.0).abs() < 1e-15);

        let dist = enumerate_top_m_distribution(&i, &s, 3).unwrap();
        assert!((dist[&vec![0, 1, 2]] - 8.0 / 21.0).abs() < 1e-15);
        assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-10);
        assert_eq!(dist.len(), 6);
    }

    #[test]
    fn symmetric_pair_ranking_probability() {
        let i = inst(&[1.0, 1.0]);
        let r = TopMRanking::new(vec![0, 1], subset(&[0, 1])).unwrap();
        assert_eq!(ranking_probability(&i, &r).unwrap(), 0.5);
    }

    #[test]
    fn enumeration_shapes() {
        let i = inst(&[1.0, 0.5, 0.25]);
        let two = enumerate_top_m_distribution(&i, &subset(&[0, 1]), 1).unwrap();
        let wd = winner_distribution(&i, &subset(&[0, 1])).unwrap();
        assert_eq!(two.len(), 2);
        assert!((two[&vec![0]] - wd[0]).abs() < 1e-15);
        assert!((two[&vec![1]] - wd[1]).abs() < 1e-15);

        let pairs = enumerate_top_m_distribution(&i, &subset(&[0, 1, 2]), 2).unwrap();
        assert_eq!(pairs.len(), 6);
        assert!((pairs.values().sum::<f64>() - 1.0).abs() < 1e-10);

        let big = PlInstance::new(vec![1.0; 8]).unwrap();
        assert!(matches!(
            enumerate_top_m_distribution(&big, &subset(&[0, 1, 2, 3, 4, 5, 6, 7]), 1),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn top_one_matches_winner_distribution() {
        let i = inst(&[1.0, 0.7, 0.2, 0.45]);
        let s = subset(&[3, 0, 2]);
        let top1 = enumerate_top_m_distribution(&i, &s, 1).unwrap();
        let wd = winner_distribution(&i, &s).unwrap();
        for (pos, &item) in s.items().iter().enumerate() {
            assert!((top1[&vec![item]] - wd[pos]).abs() < 1e-15);
        }
    }

    #[test]
    fn top_m_sampler_tv_distance() {
        let i = inst(&[1.0, 0.5, 0.25]);
        let s = subset(&[0, 1, 2]);
        let exact = enumerate_top_m_distribution(&i, &s, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 200_000;
        let mut counts: BTreeMap<Vec<Item>, usize> = BTreeMap::new();
        for _ in 0..draws {
            let r = sample_top_m(&i, &s, 2, &mut rng).unwrap();
            *counts.entry(r.ordered().to_vec()).or_default() += 1;
        }
        let tv: f64 = exact
            .iter()
            .map(|(k, p)| (counts.get(k).copied().unwrap_or(0) as f64 / draws as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "tv {tv}");
    }

    #[test]
    fn top_m_equals_successive_winners() {
        let i = inst(&[1.0, 0.8, 0.3, 0.55, 0.1]);
        let s = subset(&[4, 1, 0, 3, 2]);
        for seed in 0..50 {
            let top = sample_top_m(&i, &s, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = s.items().to_vec();
            let mut seq = Vec::new();
            for _ in 0..4 {
                let w = sample_winner(&i, &Subset::new(pool.clone()).unwrap(), &mut rng).unwrap();
                pool.retain(|&x| x != w);
                seq.push(w);
            }
            assert_eq!(top.ordered(), seq.as_slice());
        }
    }

    #[test]
    fn top_m_width_errors() {
        let i = inst(&[1.0, 0.5, 0.25]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_top_m(&i, &subset(&[0, 1]), 3, &mut rng),
            Err(Error::InvalidWidth { m: 3, size: 2 })
        ));
        assert!(sample_top_m(&i, &subset(&[0, 1]), 0, &mut rng).is_err());
        assert!(TopMRanking::new(vec![2], subset(&[0, 1])).is_err());
    }

    #[test]
    fn iia_examples() {
        let i = inst(&[1.0, 0.5, 0.25]);
        let (a, b) = check_iia(&i, 0, 1, &subset(&[0, 1]), &subset(&[0, 1, 2])).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let (a, b) = check_iia(&i, 2, 2, &subset(&[0, 2]), &subset(&[1, 2])).unwrap();
        assert_eq!((a, b), (1.0, 1.0));
        let s = subset(&[0, 1, 2]);
        let (a, b) = check_iia(&i, 1, 2, &s, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            check_iia(&i, 0, 2, &subset(&[0, 1]), &s),
            Err(Error::NotInSubset { item: 2 })
        );
    }

    #[test]
    fn ranking_round_trip_and_relabel() {
        let r = Ranking::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(r.position(2), 0);
        assert_eq!(r.item_at(r.position(1)), 1);
        let perm = [1, 2, 0];
        let moved = r.relabeled(&perm).unwrap();
        assert_eq!(moved.order(), &[0, 1, 2]);
        assert!(Ranking::from_order(vec![0, 0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance_and_subsets() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, Vec<usize>)> {
            (3usize..8)
                .prop_flat_map(|n| {
                    (
                        proptest::collection::vec(0.01f64..1.0, n - 1),
                        Just(n),
                        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=n),
                        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=n),
                    )
                })
                .prop_map(|(mut rest, _n, a, b)| {
                    rest.insert(0, 1.0);
                    (rest, a, b)
                })
        }

        proptest! {
            #[test]
            fn winner_distribution_is_a_distribution((w, a, _b) in instance_and_subsets()) {
                let i = PlInstance::new(w).unwrap();
                let d = winner_distribution(&i, &Subset::new(a).unwrap()).unwrap();
                prop_assert!(d.iter().all(|&p| p > 0.0));
                prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn iia_ratios_agree((w, a, b) in instance_and_subsets()) {
                let i = PlInstance::new(w).unwrap();
                let shared: Vec<usize> = a.iter().copied().filter(|x| b.contains(x)).collect();
                prop_assume!(shared.len() >= 2);
                let (r1, r2) = check_iia(
                    &i, shared[0], shared[1],
                    &Subset::new(a).unwrap(), &Subset::new(b).unwrap(),
                ).unwrap();
                prop_assert!((r1 - r2).abs() <= 1e-12 * r1.abs().max(r2.abs()));
            }

            #[test]
            fn full_orderings_sum_to_one((w, a, _b) in instance_and_subsets()) {
                prop_assume!(a.len() <= 6);
                let i = PlInstance::new(w).unwrap();
                let s = Subset::new(a).unwrap();
                for m in 1..=s.len() {
                    let dist = enumerate_top_m_distribution(&i, &s, m).unwrap();
                    prop_assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-10);
                }
            }
        }
    }
}
