//! Experiment descriptions in flat `key = value` form.
//!
//! ```text
//! # Ranking accuracy against the query budget
//! env = har20
//! algorithm = beat-the-pivot
//! k = 20
//! mode = tr:5
//! eps = 0.01
//! delta = 0.1
//! runs = 50
//! seed = 7
//! budget_scale = 0.001
//! checkpoints = 1000, 10000, 100000
//! sweep = m
//! sweep_values = 2, 5, 10
//! ```
//!
//! Lists are comma separated and `#` starts a comment. Inline instances use
//! `weights = 1, 0.5, ...` in place of `env`; their largest weight must be 1
//! unless `normalize_weights = true`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::env::environment;
use crate::oracle::FeedbackMode;
use crate::pl::PlInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    BeatThePivot,
    ScoreAndRank,
    FindThePivot,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::BeatThePivot => "beat-the-pivot",
            Algorithm::ScoreAndRank => "score-and-rank",
            Algorithm::FindThePivot => "find-the-pivot",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beat-the-pivot" => Ok(Algorithm::BeatThePivot),
            "score-and-rank" => Ok(Algorithm::ScoreAndRank),
            "find-the-pivot" => Ok(Algorithm::FindThePivot),
            _ => Err(Error::Config(format!(
                "algorithm {s:?} is not one of beat-the-pivot, score-and-rank, find-the-pivot"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Named(String),
    /// Listed weights; `normalize` divides them by their maximum.
    Inline { weights: Vec<f64>, normalize: bool },
}

impl EnvSpec {
    pub fn name(&self) -> &str {
        match self {
            EnvSpec::Named(name) => name,
            EnvSpec::Inline { .. } => "inline",
        }
    }

    pub fn instance(&self) -> Result<PlInstance> {
        match self {
            EnvSpec::Named(name) => environment(name),
            EnvSpec::Inline { weights, normalize } => {
                PlInstance::with_normalization(weights.clone(), *normalize)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Budget,
    K,
    M,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "budget" => Ok(SweepAxis::Budget),
            "k" => Ok(SweepAxis::K),
            "m" => Ok(SweepAxis::M),
            _ => Err(Error::Config(format!("sweep axis {s:?} is not one of budget, k, m"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub algorithm: Algorithm,
    pub k: usize,
    pub mode: FeedbackMode,
    pub eps: f64,
    pub delta: f64,
    pub runs: u64,
    pub master_seed: u64,
    pub checkpoints: Vec<u64>,
    pub budget_scale: f64,
    pub sweep: Option<Sweep>,
    /// Relabel the instance with a fresh random permutation in every run, so
    /// label order carries no hint about the true ranking.
    pub shuffle_labels: bool,
    pub pivot_full_feedback: bool,
    /// Fill the `wall_time_ms` column; off keeps output byte-reproducible.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvSpec::Named("geo8".into()),
            algorithm: Algorithm::BeatThePivot,
            k: 2,
            mode: FeedbackMode::WinnerOnly,
            eps: 0.01,
            delta: 0.1,
            runs: 50,
            master_seed: 0,
            checkpoints: Vec::new(),
            budget_scale: 1.0,
            sweep: None,
            shuffle_labels: true,
            pivot_full_feedback: false,
            record_wall_time: false,
        }
    }
}

/// One concrete configuration after expanding the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub k: usize,
    pub mode: FeedbackMode,
    pub checkpoints: Vec<u64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut sweep_axis: Option<SweepAxis> = None;
        let mut sweep_values: Option<Vec<u64>> = None;
        let mut env_seen = false;
        let mut normalize = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {line:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", lineno + 1)),
                other => Error::Config(format!("line {}: {other}", lineno + 1)),
            };
            match key {
                "env" | "weights" => {
                    if env_seen {
                        return Err(at(Error::Config("env and weights are exclusive".into())));
                    }
                    env_seen = true;
                    cfg.env = if key == "env" {
                        EnvSpec::Named(value.to_string())
                    } else {
                        EnvSpec::Inline {
                            weights: parse_list(key, value).map_err(at)?,
                            normalize: false,
                        }
                    };
                }
                "algorithm" => cfg.algorithm = value.parse().map_err(at)?,
                "k" => cfg.k = parse_value(key, value).map_err(at)?,
                "mode" => cfg.mode = value.parse().map_err(at)?,
                "eps" => cfg.eps = parse_value(key, value).map_err(at)?,
                "delta" => cfg.delta = parse_value(key, value).map_err(at)?,
                "runs" => cfg.runs = parse_value(key, value).map_err(at)?,
                "seed" => cfg.master_seed = parse_value(key, value).map_err(at)?,
                "checkpoints" => cfg.checkpoints = parse_list(key, value).map_err(at)?,
                "budget_scale" => cfg.budget_scale = parse_value(key, value).map_err(at)?,
                "sweep" => sweep_axis = Some(value.parse().map_err(at)?),
                "sweep_values" => sweep_values = Some(parse_list(key, value).map_err(at)?),
                "shuffle_labels" => cfg.shuffle_labels = parse_value(key, value).map_err(at)?,
                "pivot_full_feedback" => {
                    cfg.pivot_full_feedback = parse_value(key, value).map_err(at)?
                }
                "wall_time" => cfg.record_wall_time = parse_value(key, value).map_err(at)?,
                "normalize_weights" => normalize = parse_value(key, value).map_err(at)?,
                _ => return Err(at(Error::Config(format!("unknown key {key:?}")))),
            }
        }
        match &mut cfg.env {
            EnvSpec::Inline { normalize: flag, .. } => *flag = normalize,
            EnvSpec::Named(_) if normalize => {
                return Err(Error::Config(
                    "normalize_weights only applies to inline weights".into(),
                ))
            }
            EnvSpec::Named(_) => {}
        }
        cfg.sweep = match (sweep_axis, sweep_values) {
            (None, None) => None,
            (Some(axis), Some(values)) => Some(Sweep { axis, values }),
            _ => {
                return Err(Error::Config(
                    "sweep and sweep_values must be given together".into(),
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every sweep point against the instance.
    pub fn validate(&self) -> Result<()> {
        let n = self.env.instance().map_err(|e| Error::Config(e.to_string()))?.n();
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(self.budget_scale > 0.0 && self.budget_scale.is_finite()) {
            return Err(Error::Config(format!(
                "budget_scale = {} must be positive",
                self.budget_scale
            )));
        }
        if self.checkpoints.contains(&0) {
            return Err(Error::Config("checkpoints must be at least 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep_values is empty".into()));
            }
        }
        for point in self.points() {
            if point.k < 2 || point.k > n {
                return Err(Error::Config(format!(
                    "k = {} must lie in [2, {n}] for {}",
                    point.k,
                    self.env.name()
                )));
            }
            if point.mode.validate(point.k).is_err() {
                return Err(Error::Config(format!(
                    "feedback {} is wider than k = {}",
                    point.mode, point.k
                )));
            }
            if point.checkpoints.contains(&0) {
                return Err(Error::Config("budget sweep values must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let base = SweepPoint {
            k: self.k,
            mode: self.mode,
            checkpoints: sorted(self.checkpoints.clone()),
        };
        match &self.sweep {
            None => vec![base],
            Some(Sweep { axis: SweepAxis::Budget, values }) => {
                let mut checkpoints = base.checkpoints.clone();
                checkpoints.extend(values);
                vec![SweepPoint {
                    checkpoints: sorted(checkpoints),
                    ..base
                }]
            }
            Some(Sweep { axis: SweepAxis::K, values }) => values
                .iter()
                .map(|&k| SweepPoint {
                    k: k as usize,
                    ..base.clone()
                })
                .collect(),
            Some(Sweep { axis: SweepAxis::M, values }) => values
                .iter()
                .map(|&m| SweepPoint {
                    mode: FeedbackMode::TopM(m as usize),
                    ..base.clone()
                })
                .collect(),
        }
    }
}

fn sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v.dedup();
    v
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}
