//! CSV output, aggregation and plain-text input files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::config::Algorithm;
use crate::harness::runner::RunRecord;
use crate::pl::{PlInstance, Ranking};

pub const RUN_HEADER: [&str; 14] = [
    "run_id",
    "algorithm",
    "env",
    "n",
    "k",
    "m",
    "eps",
    "delta",
    "seed",
    "queries",
    "loss",
    "eps_best",
    "cap_hit",
    "wall_time_ms",
];

pub const AGGREGATE_HEADER: [&str; 11] = [
    "env",
    "algorithm",
    "k",
    "m",
    "budget",
    "runs",
    "mean_loss",
    "stderr_loss",
    "success_rate",
    "mean_queries",
    "stderr_queries",
];

/// Shortest decimal form of `x` rounded to ten significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("valid float literal");
    format!("{rounded}")
}

pub fn write_runs<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_HEADER)?;
    for r in records {
        w.write_record([
            r.run_id.to_string(),
            r.algorithm.to_string(),
            r.env.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            format_float(r.eps),
            format_float(r.delta),
            r.seed.to_string(),
            r.queries.to_string(),
            format_float(r.loss),
            u8::from(r.eps_best).to_string(),
            u8::from(r.cap_hit).to_string(),
            r.wall_time_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and standard error of the mean (sample standard deviation over
/// `sqrt(count)`; zero for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub env: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub m: usize,
    pub budget: Option<u64>,
    pub runs: usize,
    pub mean_loss: f64,
    pub stderr_loss: f64,
    pub success_rate: f64,
    pub mean_queries: f64,
    pub stderr_queries: f64,
}

/// Groups records by environment, algorithm, `k`, `m` and checkpoint.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<Aggregate>> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut groups: BTreeMap<_, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.env.clone(), r.algorithm, r.k, r.m, r.checkpoint))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((env, algorithm, k, m, budget), rs)| {
            let losses: Vec<f64> = rs.iter().map(|r| r.loss).collect();
            let queries: Vec<f64> = rs.iter().map(|r| r.queries as f64).collect();
            let (mean_loss, stderr_loss) = mean_stderr(&losses);
            let (mean_queries, stderr_queries) = mean_stderr(&queries);
            Aggregate {
                env,
                algorithm,
                k,
                m,
                budget,
                runs: rs.len(),
                mean_loss,
                stderr_loss,
                success_rate: rs.iter().filter(|r| r.eps_best).count() as f64 / rs.len() as f64,
                mean_queries,
                stderr_queries,
            }
        })
        .collect())
}

pub fn write_aggregates<W: Write>(aggs: &[Aggregate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for a in aggs {
        w.write_record([
            a.env.clone(),
            a.algorithm.to_string(),
            a.k.to_string(),
            a.m.to_string(),
            a.budget.map(|b| b.to_string()).unwrap_or_default(),
            a.runs.to_string(),
            format_float(a.mean_loss),
            format_float(a.stderr_loss),
            format_float(a.success_rate),
            format_float(a.mean_queries),
            format_float(a.stderr_queries),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one weight per line. The largest must be 1 unless `normalize` is
/// set, in which case all weights are divided by it.
pub fn read_weights(path: &Path, normalize: bool) -> Result<PlInstance> {
    let text = std::fs::read_to_string(path)?;
    let weights = data_lines(&text)
        .map(|(no, line)| {
            line.parse::<f64>()
                .map_err(|_| Error::Config(format!("{}:{no}: not a number: {line:?}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    PlInstance::with_normalization(weights, normalize)
}

/// Reads a best-first ranking of 1-based item numbers, one per line.
pub fn read_ranking(path: &Path) -> Result<Ranking> {
    let text = std::fs::read_to_string(path)?;
    let order = data_lines(&text)
        .map(|(no, line)| match line.parse::<usize>() {
            Ok(item) if item >= 1 => Ok(item - 1),
            _ => Err(Error::Config(format!(
                "{}:{no}: expected a 1-based item number, got {line:?}",
                path.display()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ranking::from_order(order)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}
