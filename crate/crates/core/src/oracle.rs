//! The stochastic environment a learner queries.
//!
//! Learners only see the [`PreferenceOracle`] trait, which exposes the
//! protocol (item count, subset size, feedback width) but never the scores.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pl::{draw_prefix, Item, PlInstance, Subset, TopMRanking};
use crate::rng::RunRng;

/// Shape of the feedback returned for each played subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackMode {
    WinnerOnly,
    TopM(usize),
    FullRanking,
}

impl FeedbackMode {
    /// Number of ranked items returned per query on subsets of size `k`.
    pub fn width(self, k: usize) -> usize {
        match self {
            FeedbackMode::WinnerOnly => 1,
            FeedbackMode::TopM(m) => m,
            FeedbackMode::FullRanking => k,
        }
    }

    pub fn validate(self, k: usize) -> Result<()> {
        match self {
            FeedbackMode::TopM(m) if m == 0 || m > k => Err(Error::InvalidWidth { m, size: k }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FeedbackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeedbackMode::WinnerOnly => write!(f, "wi"),
            FeedbackMode::TopM(m) => write!(f, "tr:{m}"),
            FeedbackMode::FullRanking => write!(f, "fr"),
        }
    }
}

impl FromStr for FeedbackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "wi" => Ok(FeedbackMode::WinnerOnly),
            "fr" => Ok(FeedbackMode::FullRanking),
            _ => s
                .strip_prefix("tr:")
                .and_then(|m| m.trim().parse::<usize>().ok())
                .filter(|&m| m >= 1)
                .map(FeedbackMode::TopM)
                .ok_or_else(|| {
                    Error::Config(format!("feedback mode {s:?} is not one of wi, tr:<m>, fr"))
                }),
        }
    }
}

/// What a learner may see of the environment.
pub trait PreferenceOracle {
    fn n(&self) -> usize;

    fn k(&self) -> usize;

    fn mode(&self) -> FeedbackMode;

    /// Plays `items` and writes the returned ordered prefix into `out`.
    fn query_into(&mut self, items: &[Item], out: &mut Vec<Item>) -> Result<()>;

    fn queries_used(&self) -> u64;

    /// True right after the query that brought the counter onto a checkpoint.
    fn at_checkpoint(&self) -> bool;

    fn m(&self) -> usize {
        self.mode().width(self.k())
    }

    fn query(&mut self, s: &Subset) -> Result<TopMRanking> {
        let mut out = Vec::with_capacity(self.m());
        self.query_into(s.items(), &mut out)?;
        TopMRanking::new(out, s.clone())
    }
}

/// Plackett-Luce feedback oracle with a query counter and optional budget.
#[derive(Debug, Clone)]
pub struct QueryOracle {
    instance: PlInstance,
    k: usize,
    mode: FeedbackMode,
    queries_used: u64,
    rng: RunRng,
    budget: Option<u64>,
    checkpoints: Vec<u64>,
    marks: Vec<u64>,
    scratch: Vec<Item>,
}

impl QueryOracle {
    pub fn new(instance: PlInstance, k: usize, mode: FeedbackMode, rng: RunRng) -> Result<Self> {
        let n = instance.n();
        if k < 2 || k > n {
            return Err(Error::InvalidSubsetSize { k, n });
        }
        mode.validate(k)?;
        Ok(Self {
            instance,
            k,
            mode,
            queries_used: 0,
            rng,
            budget: None,
            checkpoints: Vec::new(),
            marks: vec![u64::MAX; n],
            scratch: Vec::with_capacity(k),
        })
    }

    /// Caps the number of queries; the query after the last allowed one
    /// fails with [`Error::BudgetExhausted`].
    pub fn with_budget(mut self, max_queries: u64) -> Result<Self> {
        if max_queries == 0 {
            return Err(Error::ZeroBudget);
        }
        self.budget = Some(max_queries);
        Ok(self)
    }

    pub fn with_checkpoints(mut self, mut checkpoints: Vec<u64>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        self.checkpoints = checkpoints;
        self
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    /// Ground truth, for evaluation code only.
    pub fn instance(&self) -> &PlInstance {
        &self.instance
    }

    fn validate(&mut self, items: &[Item]) -> Result<()> {
        if items.len() != self.k {
            return Err(Error::WrongSubsetSize {
                expected: self.k,
                got: items.len(),
            });
        }
        // Stamp each item with the current query number to spot repeats.
        let stamp = self.queries_used;
        let n = self.instance.n();
        let mut verdict = Ok(());
        for &item in items {
            if item >= n {
                verdict = Err(Error::ItemOutOfRange { item, n });
                break;
            }
            if self.marks[item] == stamp {
                verdict = Err(Error::DuplicateItem(item));
                break;
            }
            self.marks[item] = stamp;
        }
        if verdict.is_err() {
            // A rejected query does not advance the counter, so drop its stamps.
            self.clear_marks();
        }
        verdict
    }

    fn clear_marks(&mut self) {
        self.marks.iter_mut().for_each(|m| *m = u64::MAX);
    }
}

impl PreferenceOracle for QueryOracle {
    fn n(&self) -> usize {
        self.instance.n()
    }

    fn k(&self) -> usize {
        self.k
    }

    fn mode(&self) -> FeedbackMode {
        self.mode
    }

    fn query_into(&mut self, items: &[Item], out: &mut Vec<Item>) -> Result<()> {
        self.validate(items)?;
        if let Some(budget) = self.budget {
            if self.queries_used >= budget {
                self.clear_marks();
                return Err(Error::BudgetExhausted(budget));
            }
        }
        let m = self.mode.width(self.k);
        draw_prefix(
            self.instance.weights(),
            items,
            m,
            &mut self.rng,
            &mut self.scratch,
            out,
        );
        self.queries_used += 1;
        Ok(())
    }

    fn queries_used(&self) -> u64 {
        self.queries_used
    }

    fn at_checkpoint(&self) -> bool {
        self.checkpoints.binary_search(&self.queries_used).is_ok()
    }
}
