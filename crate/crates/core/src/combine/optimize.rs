//! F-beta maximization over per-cell keep probabilities.
//!
//! With keep probabilities `s_c ∈ [0, 1]`, expected counts are
//! `TP = Σ tp_c·s_c`, `FP = Σ fp_c·s_c` and `FN = G − TP` for `G` gold
//! edits, which turns F-beta into the linear-fractional objective
//!
//! ```text
//! F(s) = (1+β²)·TP / (TP + FP + β²·G)
//! ```
//!
//! A ratio of affine functions over a box attains its maximum at a vertex,
//! and Dinkelbach's iteration finds it exactly: for the current ratio `λ`,
//! keep every cell whose linearized gain `(1+β²)·tp_c − λ·(tp_c + fp_c)`
//! is positive, recompute `λ`, and stop once it no longer increases. `λ`
//! rises strictly until then and there are finitely many vertices.

use serde::{Deserialize, Serialize};

use super::policy::{PolicyEntry, SelectionPolicy};
use super::stats::StatsTable;

const MAX_ITERATIONS: usize = 100;

/// What to do with cells whose keep probability does not affect F.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Drop them: fewer edits at equal F.
    #[default]
    Round,
    /// Keep them with probability one half at application time.
    Sample,
}

impl std::str::FromStr for Rounding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "round" => Ok(Rounding::Round),
            "sample" => Ok(Rounding::Sample),
            other => Err(format!("unknown rounding mode {other:?} (round|sample)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellDecision {
    Keep,
    Drop,
    /// Zero linearized gain at the optimum: any keep probability is optimal.
    Indifferent,
    /// Too few samples to trust; forced to zero.
    Ineligible,
}

/// `F(s)` for arbitrary keep probabilities; 0 when the denominator vanishes.
pub fn objective(cells: &[(u64, u64)], gold_total: u64, beta: f64, keep: &[f64]) -> f64 {
    let (num, den) = ratio_terms(cells, gold_total, beta, keep.iter().copied());
    if den <= 0.0 {
        0.0
    } else {
        num / den
    }
}

fn ratio_terms(
    cells: &[(u64, u64)],
    gold_total: u64,
    beta: f64,
    keep: impl Iterator<Item = f64>,
) -> (f64, f64) {
    let b2 = beta * beta;
    let (mut tp, mut fp) = (0.0, 0.0);
    for (&(t, f), s) in cells.iter().zip(keep) {
        tp += t as f64 * s;
        fp += f as f64 * s;
    }
    ((1.0 + b2) * tp, tp + fp + b2 * gold_total as f64)
}

/// Sign of `(1+β²)·tp − (num/den)·(tp+fp)` with `den > 0`, computed without
/// dividing; near-zero values count as a tie.
fn gain_sign(tp: u64, fp: u64, w: f64, num: f64, den: f64) -> std::cmp::Ordering {
    let lhs = w * tp as f64 * den;
    let rhs = num * (tp + fp) as f64;
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    let diff = lhs - rhs;
    if diff.abs() <= 1e-12 * scale {
        std::cmp::Ordering::Equal
    } else if diff > 0.0 {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    }
}

/// Optimal vertex of the selection problem. Returns per-cell decisions and
/// the optimal F.
pub fn optimize_cells(
    cells: &[(u64, u64)],
    eligible: &[bool],
    gold_total: u64,
    beta: f64,
) -> (Vec<CellDecision>, f64) {
    assert!(beta > 0.0, "beta must be positive");
    assert_eq!(cells.len(), eligible.len());
    let w = 1.0 + beta * beta;
    let select = |num: f64, den: f64| -> Vec<bool> {
        cells
            .iter()
            .zip(eligible)
            .map(|(&(tp, fp), &ok)| ok && gain_sign(tp, fp, w, num, den).is_gt())
            .collect()
    };
    let terms = |sel: &[bool]| {
        ratio_terms(
            cells,
            gold_total,
            beta,
            sel.iter().map(|&k| if k { 1.0 } else { 0.0 }),
        )
    };

    // λ = num/den, starting from 0.
    let (mut num, mut den) = (0.0f64, 1.0f64);
    let mut keep = vec![false; cells.len()];
    for _ in 0..MAX_ITERATIONS {
        let next = select(num, den);
        let (n2, d2) = terms(&next);
        if d2 <= 0.0 {
            // Nothing selectable and no gold edits: F is 0 everywhere.
            keep = next;
            break;
        }
        // Stationary once the new ratio does not beat the current one.
        let improves = n2 * den > num * d2 * (1.0 + 1e-15) && n2 > 0.0;
        keep = next;
        if !improves {
            break;
        }
        num = n2;
        den = d2;
    }

    let (num, den) = terms(&keep);
    let f = if den > 0.0 { num / den } else { 0.0 };
    let decisions = cells
        .iter()
        .zip(eligible)
        .zip(&keep)
        .map(|((&(tp, fp), &ok), &k)| {
            if !ok {
                CellDecision::Ineligible
            } else if k {
                CellDecision::Keep
            } else if den > 0.0 && f > 0.0 && gain_sign(tp, fp, w, num, den).is_eq() {
                CellDecision::Indifferent
            } else {
                CellDecision::Drop
            }
        })
        .collect();
    (decisions, f)
}

/// Chooses keep probabilities for every cell of `stats`.
///
/// Cells with fewer than `min_samples` edits (tp + fp) are forced to 0;
/// `min_samples = 0` disables the rule. Under [`Rounding::Round`] every
/// value is 0 or 1; under [`Rounding::Sample`] cells that do not affect F
/// get 0.5.
pub fn optimize_selection(
    stats: &StatsTable,
    beta: f64,
    min_samples: u64,
    rounding: Rounding,
) -> SelectionPolicy {
    let cells: Vec<(u64, u64)> = stats.cells.iter().map(|c| (c.tp, c.fp)).collect();
    let eligible: Vec<bool> = stats
        .cells
        .iter()
        .map(|c| c.samples() >= min_samples)
        .collect();
    let (decisions, f) = optimize_cells(&cells, &eligible, stats.gold_total, beta);
    let entries = stats
        .cells
        .iter()
        .zip(&decisions)
        .map(|(c, d)| PolicyEntry {
            etype: c.etype.clone(),
            subset: c.subset,
            s: match (d, rounding) {
                (CellDecision::Keep, _) => 1.0,
                (CellDecision::Indifferent, Rounding::Sample) => 0.5,
                _ => 0.0,
            },
            tp: c.tp,
            fp: c.fp,
            precision: c.precision(),
        })
        .collect();
    let mut policy = SelectionPolicy::new(beta, min_samples, rounding, entries);
    policy.metadata.created.gold_total = stats.gold_total;
    policy.metadata.created.objective_f = f;
    policy
}
