//! Edit matching and precision / recall / F-beta.
//!
//! Matching is exact: a hypothesis edit is a true positive iff the gold
//! annotation has an edit with the same span and replacement. Type labels
//! are not compared. Each gold edit can be claimed by one hypothesis edit.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::edit::{Edit, M2Corpus};
use crate::error::Result;
use crate::par;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TypeStats {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl TypeStats {
    pub fn add(&mut self, other: &TypeStats) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// Number of gold edits these counts were computed against.
    pub fn gold(&self) -> u64 {
        self.tp + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
}

impl Score {
    pub fn from_counts(stats: &TypeStats, beta: f64) -> Score {
        Score {
            precision: ratio(stats.tp, stats.tp + stats.fp),
            recall: ratio(stats.tp, stats.tp + stats.fn_),
            f_beta: f_beta_from_counts(stats.tp, stats.fp, stats.fn_, beta),
            beta,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `(1+β²)·tp / ((1+β²)·tp + fp + β²·fn)`, and 0 when `tp == 0`.
pub fn f_beta_from_counts(tp: u64, fp: u64, fn_: u64, beta: f64) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    let b2 = beta * beta;
    let tp = tp as f64;
    (1.0 + b2) * tp / ((1.0 + b2) * tp + fp as f64 + b2 * fn_ as f64)
}

/// F-beta from precision and recall; 0 when both are 0.
pub fn f_beta_from_pr(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den <= 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / den
    }
}

/// Flags which hypothesis edits found an unclaimed gold edit with the same
/// span and replacement. Returns `(hyp_matched, gold_matched)`.
pub(crate) fn match_sentence(hyp: &[&Edit], gold: &[&Edit]) -> (Vec<bool>, Vec<bool>) {
    let mut open: HashMap<(usize, usize, &str), Vec<usize>> = HashMap::new();
    for (i, g) in gold.iter().enumerate().rev() {
        open.entry((g.start, g.end, g.replacement.as_str()))
            .or_default()
            .push(i);
    }
    let mut gold_matched = vec![false; gold.len()];
    let hyp_matched = hyp
        .iter()
        .map(|h| {
            match open
                .get_mut(&(h.start, h.end, h.replacement.as_str()))
                .and_then(Vec::pop)
            {
                Some(g) => {
                    gold_matched[g] = true;
                    true
                }
                None => false,
            }
        })
        .collect();
    (hyp_matched, gold_matched)
}

pub type TypeTable = BTreeMap<String, TypeStats>;

/// Per-type TP/FP/FN of `hyp` against one annotator of `gold`.
///
/// Every hypothesis edit takes part regardless of its annotator id. TP and FN
/// are booked under the gold edit's type, FP under the hypothesis edit's.
pub fn match_edits(hyp: &M2Corpus, gold: &M2Corpus, annotator: u32) -> Result<TypeTable> {
    hyp.check_aligned(gold)?;
    let per_sentence = par::map_indexed(&hyp.sentences, |i, h| {
        let hyp_edits: Vec<&Edit> = h.edits().iter().collect();
        let gold_edits: Vec<&Edit> = gold.sentences[i].edits_of(annotator).collect();
        let (hyp_hit, gold_hit) = match_sentence(&hyp_edits, &gold_edits);
        let mut table = TypeTable::new();
        for (e, hit) in hyp_edits.iter().zip(hyp_hit) {
            if !hit {
                table.entry(e.etype.clone()).or_default().fp += 1;
            }
        }
        for (e, hit) in gold_edits.iter().zip(gold_hit) {
            let cell = table.entry(e.etype.clone()).or_default();
            if hit {
                cell.tp += 1;
            } else {
                cell.fn_ += 1;
            }
        }
        table
    });
    let mut total = TypeTable::new();
    for table in per_sentence {
        for (etype, stats) in table {
            total.entry(etype).or_default().add(&stats);
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeScore {
    #[serde(flatten)]
    pub counts: TypeStats,
    #[serde(flatten)]
    pub score: Score,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusScore {
    pub overall: TypeScore,
    pub per_type: BTreeMap<String, TypeScore>,
}

pub fn score_corpus(
    hyp: &M2Corpus,
    gold: &M2Corpus,
    beta: f64,
    annotator: u32,
) -> Result<CorpusScore> {
    let table = match_edits(hyp, gold, annotator)?;
    Ok(CorpusScore::from_table(&table, beta))
}

impl CorpusScore {
    pub fn from_table(table: &TypeTable, beta: f64) -> CorpusScore {
        let mut sum = TypeStats::default();
        let per_type = table
            .iter()
            .map(|(etype, counts)| {
                sum.add(counts);
                let score = Score::from_counts(counts, beta);
                (etype.clone(), TypeScore { counts: *counts, score })
            })
            .collect();
        CorpusScore {
            overall: TypeScore {
                counts: sum,
                score: Score::from_counts(&sum, beta),
            },
            per_type,
        }
    }

    pub fn f_beta(&self) -> f64 {
        self.overall.score.f_beta
    }

    /// Types by descending gold frequency, ties by name.
    pub fn types_by_frequency(&self) -> Vec<(&str, &TypeScore)> {
        let mut rows: Vec<_> = self.per_type.iter().map(|(k, v)| (k.as_str(), v)).collect();
        rows.sort_by(|a, b| b.1.counts.gold().cmp(&a.1.counts.gold()).then(a.0.cmp(b.0)));
        rows
    }

    /// Fixed-width report: one row per type plus an overall row.
    pub fn render_table(&self) -> String {
        let beta = self.overall.score.beta;
        let width = self
            .per_type
            .keys()
            .map(|k| k.chars().count())
            .chain(std::iter::once("OVERALL".len()))
            .max()
            .unwrap_or(7);
        let fcol = format!("F{beta}");
        let mut out = format!(
            "{:<width$} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}\n",
            "TYPE", "TP", "FP", "FN", "P", "R", fcol
        );
        let row = |name: &str, s: &TypeScore| {
            format!(
                "{:<width$} {:>7} {:>7} {:>7} {:>7.4} {:>7.4} {:>7.4}\n",
                name,
                s.counts.tp,
                s.counts.fp,
                s.counts.fn_,
                s.score.precision,
                s.score.recall,
                s.score.f_beta
            )
        };
        for (name, s) in self.types_by_frequency() {
            out.push_str(&row(name, s));
        }
        out.push_str(&row("OVERALL", &self.overall));
        out
    }

    /// Same content as [`render_table`](Self::render_table), as JSON.
    pub fn to_json(&self) -> serde_json::Value {
        let types: Vec<serde_json::Value> = self
            .types_by_frequency()
            .into_iter()
            .map(|(name, s)| {
                let mut v = serde_json::to_value(s).expect("plain data");
                v["type"] = serde_json::Value::from(name);
                v
            })
            .collect();
        serde_json::json!({
            "beta": self.overall.score.beta,
            "overall": self.overall,
            "types": types,
        })
    }
}

/// Probability that the precision observed on fresh data deviates from the
/// development precision by at least `delta`.
///
/// With `X ~ Binomial(n_samples, prec_dev)` this is the exact tail
/// `P(|X/n - prec_dev| >= delta)`. Boundary outcomes (deviation equal to
/// `delta` up to 1e-12) count as deviating.
pub fn precision_stability(n_samples: u64, prec_dev: f64, delta: f64) -> f64 {
    assert!(n_samples >= 1, "need at least one sample");
    let n = n_samples as f64;
    let q = 1.0 - prec_dev;
    let mut total = 0.0;
    // C(n, k) built incrementally; exact in f64 far beyond realistic n.
    let mut binom = 1.0f64;
    for k in 0..=n_samples {
        if k > 0 {
            binom = binom * (n - (k - 1) as f64) / k as f64;
        }
        let deviation = (k as f64 / n - prec_dev).abs();
        if deviation >= delta - 1e-12 {
            let kk = k as i32;
            let rest = (n_samples - k) as i32;
            total += binom * prec_dev.powi(kk) * q.powi(rest);
        }
    }
    total.clamp(0.0, 1.0)
}
