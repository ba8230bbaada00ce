//! Ground-truth correctness checks and losses for output rankings.
//!
//! The ranking predicate flags a misranked pair when `θ_i ≥ θ_j + ε`, while
//! the relaxed Kendall-tau loss only counts pairs with `θ_i > θ_j + ε`. Both
//! are kept as written; they agree except on pairs whose gap is exactly `ε`.

use crate::error::{Error, Result};
use crate::pl::{Item, PlInstance, Ranking};

/// Summary of one ranking against the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub is_eps_best: bool,
    pub is_eps_best_mult: bool,
    pub kendall_eps_loss: f64,
    /// Ordered pairs `(i, j)` with `i` ranked below `j` although `θ_i ≥ θ_j + ε`.
    pub violating_pairs: Vec<(Item, Item)>,
}

pub fn evaluate(inst: &PlInstance, r: &Ranking, eps: f64) -> Result<EvalReport> {
    check_ranking(inst, r)?;
    let (is_eps_best, violating_pairs) = is_eps_best_ranking(inst, r, eps)?;
    Ok(EvalReport {
        is_eps_best,
        is_eps_best_mult: is_eps_best_ranking_multiplicative(inst, r, eps)?,
        kendall_eps_loss: kendall_eps_loss(inst, r, eps)?,
        violating_pairs,
    })
}

fn check_ranking(inst: &PlInstance, r: &Ranking) -> Result<()> {
    if r.n() != inst.n() {
        return Err(Error::InvalidRanking(format!(
            "ranking covers {} items, instance has {}",
            r.n(),
            inst.n()
        )));
    }
    Ok(())
}

/// `θ_i ≥ max θ - ε`.
pub fn is_eps_best_item(inst: &PlInstance, item: Item, eps: f64) -> Result<bool> {
    inst.check_item(item)?;
    Ok(inst.weight(item) >= inst.max_weight() - eps)
}

/// No pair is ranked worse-first with `θ_i ≥ θ_j + ε`; returns the offending
/// ordered pairs.
pub fn is_eps_best_ranking(
    inst: &PlInstance,
    r: &Ranking,
    eps: f64,
) -> Result<(bool, Vec<(Item, Item)>)> {
    check_ranking(inst, r)?;
    let w = inst.weights();
    let mut violations = Vec::new();
    for i in 0..inst.n() {
        for j in 0..inst.n() {
            if i != j && r.position(i) > r.position(j) && w[i] >= w[j] + eps {
                violations.push((i, j));
            }
        }
    }
    Ok((violations.is_empty(), violations))
}

/// No pair is ranked worse-first with `Pr(i | {i, j}) ≥ 1/2 + ε`.
pub fn is_eps_best_ranking_multiplicative(inst: &PlInstance, r: &Ranking, eps: f64) -> Result<bool> {
    check_ranking(inst, r)?;
    for i in 0..inst.n() {
        for j in 0..inst.n() {
            if i != j && r.position(i) > r.position(j) && inst.pairwise(i, j) >= 0.5 + eps {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Fraction of item pairs misranked by more than `ε` in score.
pub fn kendall_eps_loss(inst: &PlInstance, r: &Ranking, eps: f64) -> Result<f64> {
    check_ranking(inst, r)?;
    let n = inst.n();
    let w = inst.weights();
    let misranked = |a: Item, b: Item| (w[a] > w[b] + eps && r.position(a) > r.position(b)) as u64;
    let mut count = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            count += misranked(i, j) + misranked(j, i);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(count as f64 / pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    AdditiveToMultiplicative,
    MultiplicativeToAdditive,
}

/// Tolerance bound for switching between additive and multiplicative ranking
/// objectives on instances with scores in `[a, b]`: `ε/(4b)` one way,
/// `4aε(1+ε)` the other.
pub fn convert_objective(a: f64, b: f64, eps: f64, direction: Conversion) -> Result<f64> {
    if !(a > 0.0 && a <= b && b <= 1.0) {
        return Err(Error::Domain { name: "a", value: a });
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain { name: "eps", value: eps });
    }
    Ok(match direction {
        Conversion::AdditiveToMultiplicative => eps / (4.0 * b),
        Conversion::MultiplicativeToAdditive => 4.0 * a * eps * (1.0 + eps),
    })
}
