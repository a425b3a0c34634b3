use std::collections::BTreeMap;

use serde::Serialize;

use super::partition::{Partition, Subset};
use crate::edit::{Edit, M2Corpus};
use crate::error::Result;
use crate::par;
use crate::score::match_sentence;

/// TP/FP of the edits of one error type within one agreement subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellStats {
    pub etype: String,
    pub subset: Subset,
    pub tp: u64,
    pub fp: u64,
}

impl CellStats {
    pub fn samples(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn precision(&self) -> f64 {
        if self.samples() == 0 {
            0.0
        } else {
            self.tp as f64 / self.samples() as f64
        }
    }
}

/// Development-set statistics driving the selection optimizer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StatsTable {
    /// Sorted by (type, subset); only cells with at least one edit.
    pub cells: Vec<CellStats>,
    pub gold_total_per_type: BTreeMap<String, u64>,
    pub gold_total: u64,
}

impl StatsTable {
    pub fn cell(&self, etype: &str, subset: Subset) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.etype == etype && c.subset == subset)
    }

    /// Multiplies every count by `k`.
    pub fn scaled(&self, k: u64) -> StatsTable {
        StatsTable {
            cells: self
                .cells
                .iter()
                .map(|c| CellStats {
                    tp: c.tp * k,
                    fp: c.fp * k,
                    ..c.clone()
                })
                .collect(),
            gold_total_per_type: self
                .gold_total_per_type
                .iter()
                .map(|(t, n)| (t.clone(), n * k))
                .collect(),
            gold_total: self.gold_total * k,
        }
    }
}

/// Scores every subset against one gold annotator.
///
/// Cells are keyed by the type label of the system edit, which is the label
/// [`apply_policy`](super::apply_policy) sees at inference time.
pub fn build_stats(parts: &Partition, gold: &M2Corpus, annotator: u32) -> Result<StatsTable> {
    for subset in Subset::ALL {
        parts.get(subset).check_aligned(gold)?;
    }
    let per_sentence = par::map_indexed(&gold.sentences, |i, g| {
        let gold_edits: Vec<&Edit> = g.edits_of(annotator).collect();
        let mut hits = Vec::new();
        for subset in Subset::ALL {
            let hyp: Vec<&Edit> = parts.get(subset).sentences[i].edits().iter().collect();
            let (matched, _) = match_sentence(&hyp, &gold_edits);
            for (e, tp) in hyp.into_iter().zip(matched) {
                hits.push((e.etype.clone(), subset, tp));
            }
        }
        let gold_types: Vec<String> = gold_edits.iter().map(|e| e.etype.clone()).collect();
        (hits, gold_types)
    });

    let mut cells: BTreeMap<(String, Subset), (u64, u64)> = BTreeMap::new();
    let mut gold_total_per_type: BTreeMap<String, u64> = BTreeMap::new();
    for (hits, gold_types) in per_sentence {
        for (etype, subset, tp) in hits {
            let cell = cells.entry((etype, subset)).or_default();
            if tp {
                cell.0 += 1;
            } else {
                cell.1 += 1;
            }
        }
        for t in gold_types {
            *gold_total_per_type.entry(t).or_default() += 1;
        }
    }
    Ok(StatsTable {
        cells: cells
            .into_iter()
            .map(|((etype, subset), (tp, fp))| CellStats {
                etype,
                subset,
                tp,
                fp,
            })
            .collect(),
        gold_total: gold_total_per_type.values().sum(),
        gold_total_per_type,
    })
}
