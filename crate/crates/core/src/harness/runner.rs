//! Parallel execution of independent seeded runs.

use std::time::Instant;

use rayon::prelude::*;

use crate::algorithms::{
    beat_the_pivot, find_the_pivot, score_and_rank, AlgorithmOptions, PacParams, Snapshot,
};
use crate::error::{Error, Result};
use crate::evaluation::{is_eps_best_item, is_eps_best_ranking, kendall_eps_loss};
use crate::harness::config::{Algorithm, ExperimentConfig, SweepPoint};
use crate::oracle::QueryOracle;
use crate::pl::{PlInstance, Ranking};
use crate::rng::{derive_seed, label_stream, learner_stream, oracle_stream, permutation};

/// One row of the per-run output: a run evaluated at one checkpoint, or at
/// termination when no checkpoints are configured.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: u64,
    pub algorithm: Algorithm,
    pub env: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    /// Checkpoint this row describes; `None` for the terminal row.
    pub checkpoint: Option<u64>,
    pub queries: u64,
    /// Kendall ε-loss for rankers; `max θ - θ_pivot` for the pivot search.
    pub loss: f64,
    pub eps_best: bool,
    pub cap_hit: bool,
    pub wall_time_ms: u64,
}

/// Runs every (sweep point, run) pair on a pool of `jobs` threads (0 picks
/// the rayon default) and returns records sorted by run and checkpoint.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let points = cfg.points();
    let tasks: Vec<(u64, &SweepPoint)> = points
        .iter()
        .enumerate()
        .flat_map(|(p, point)| (0..cfg.runs).map(move |r| (p as u64 * cfg.runs + r, point)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_run: Vec<Result<Vec<RunRecord>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(run_id, point)| run_single(cfg, point, run_id))
            .collect()
    });
    let mut records = Vec::new();
    for r in per_run {
        records.extend(r?);
    }
    records.sort_by_key(|r| (r.run_id, r.checkpoint.unwrap_or(u64::MAX)));
    Ok(records)
}

/// Executes run `run_id` of one sweep point.
pub fn run_single(cfg: &ExperimentConfig, point: &SweepPoint, run_id: u64) -> Result<Vec<RunRecord>> {
    let seed = derive_seed(cfg.master_seed, run_id);
    let base = cfg.env.instance()?;
    let instance = if cfg.shuffle_labels {
        base.relabeled(&permutation(&mut label_stream(seed), base.n()))?
    } else {
        base
    };
    let n = instance.n();
    let params = PacParams::new(cfg.eps, cfg.delta)?;
    let opts = AlgorithmOptions {
        budget_scale: cfg.budget_scale,
        pivot_uses_full_feedback: cfg.pivot_full_feedback,
        item_order: None,
    };

    let mut oracle = QueryOracle::new(instance.clone(), point.k, point.mode, oracle_stream(seed))?
        .with_checkpoints(point.checkpoints.clone());
    if let Some(&last) = point.checkpoints.last() {
        oracle = oracle.with_budget(last)?;
    }
    let mut rng = learner_stream(seed);

    let started = Instant::now();
    let (final_ranking, lead, queries, cap_hit, snapshots) = match cfg.algorithm {
        Algorithm::FindThePivot => {
            let out = find_the_pivot(&mut oracle, params, &opts, &mut rng)?;
            let mut order = vec![out.pivot];
            order.extend((0..n).filter(|&i| i != out.pivot));
            (Ranking::from_order(order)?, out.pivot, out.queries, false, out.snapshots)
        }
        Algorithm::BeatThePivot | Algorithm::ScoreAndRank => {
            let out = if cfg.algorithm == Algorithm::BeatThePivot {
                beat_the_pivot(&mut oracle, params, &opts, &mut rng)?
            } else {
                score_and_rank(&mut oracle, params, &opts, &mut rng)?
            };
            (out.ranking, out.pivot, out.queries, out.cap_hit, out.snapshots)
        }
    };
    let wall_time_ms = if cfg.record_wall_time {
        started.elapsed().as_millis() as u64
    } else {
        0
    };

    let row = |checkpoint: Option<u64>, queries: u64, ranking: &Ranking| -> Result<RunRecord> {
        let (loss, eps_best) = score(cfg, &instance, ranking)?;
        Ok(RunRecord {
            run_id,
            algorithm: cfg.algorithm,
            env: cfg.env.name().to_string(),
            n,
            k: point.k,
            m: point.mode.width(point.k),
            eps: cfg.eps,
            delta: cfg.delta,
            seed,
            checkpoint,
            queries,
            loss,
            eps_best,
            cap_hit,
            wall_time_ms,
        })
    };

    if point.checkpoints.is_empty() {
        debug_assert_eq!(final_ranking.item_at(0), lead);
        return Ok(vec![row(None, queries, &final_ranking)?]);
    }
    point
        .checkpoints
        .iter()
        .map(|&c| match snapshot_at(&snapshots, c) {
            Some(s) => row(Some(c), s.queries, &s.ranking),
            // The run finished before reaching this checkpoint.
            None => row(Some(c), queries, &final_ranking),
        })
        .collect()
}

fn snapshot_at(snapshots: &[Snapshot], checkpoint: u64) -> Option<&Snapshot> {
    snapshots.iter().find(|s| s.queries == checkpoint)
}

fn score(cfg: &ExperimentConfig, inst: &PlInstance, ranking: &Ranking) -> Result<(f64, bool)> {
    match cfg.algorithm {
        Algorithm::FindThePivot => {
            let pivot = ranking.item_at(0);
            Ok((
                inst.max_weight() - inst.weight(pivot),
                is_eps_best_item(inst, pivot, cfg.eps)?,
            ))
        }
        _ => Ok((
            kendall_eps_loss(inst, ranking, cfg.eps)?,
            is_eps_best_ranking(inst, ranking, cfg.eps)?.0,
        )),
    }
}
