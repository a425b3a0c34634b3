use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::edit::{AnnotatedSentence, Edit, M2Corpus};
use crate::error::Result;
use crate::par;

/// Agreement subset of an edit in a two-system merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subset {
    OnlyA,
    Both,
    OnlyB,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::OnlyA, Subset::Both, Subset::OnlyB];

    /// Arbitration priority for overlapping kept edits; lower wins.
    pub(crate) fn priority(self) -> u8 {
        match self {
            Subset::Both => 0,
            Subset::OnlyA => 1,
            Subset::OnlyB => 2,
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::OnlyA => "OnlyA",
            Subset::Both => "Both",
            Subset::OnlyB => "OnlyB",
        })
    }
}

/// A named system's edits over a shared set of source sentences.
///
/// The corpus holds a single annotator (id 0).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemOutput {
    pub name: String,
    pub corpus: M2Corpus,
}

impl SystemOutput {
    /// Takes annotator 0 of `corpus` as the system's output.
    pub fn new(name: impl Into<String>, corpus: &M2Corpus) -> Self {
        SystemOutput {
            name: name.into(),
            corpus: corpus.project(0),
        }
    }

    /// A system that proposes nothing on the given sources.
    pub fn empty_like(name: impl Into<String>, corpus: &M2Corpus) -> Self {
        SystemOutput {
            name: name.into(),
            corpus: M2Corpus::from_sources(
                corpus.sentences.iter().map(|s| s.tokens().to_vec()).collect(),
            ),
        }
    }
}

/// The three disjoint edit subsets of a system pair, each over the shared
/// source sentences.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub only_a: M2Corpus,
    pub both: M2Corpus,
    pub only_b: M2Corpus,
}

impl Partition {
    pub fn get(&self, subset: Subset) -> &M2Corpus {
        match subset {
            Subset::OnlyA => &self.only_a,
            Subset::Both => &self.both,
            Subset::OnlyB => &self.only_b,
        }
    }
}

/// Tags each edit of one sentence with its subset. Shared edits appear once,
/// carrying A's type label. Output order: A's edits in order, then B-only.
pub fn split_sentence<'a>(a: &'a [Edit], b: &'a [Edit]) -> Vec<(&'a Edit, Subset)> {
    let key = |e: &'a Edit| (e.start, e.end, e.replacement.as_str());
    let mut b_keys: HashMap<_, usize> = HashMap::new();
    for e in b {
        *b_keys.entry(key(e)).or_default() += 1;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    for e in a {
        match b_keys.get_mut(&key(e)) {
            Some(n) if *n > 0 => {
                *n -= 1;
                out.push((e, Subset::Both));
            }
            _ => out.push((e, Subset::OnlyA)),
        }
    }
    let mut a_keys: HashMap<_, usize> = HashMap::new();
    for e in a {
        *a_keys.entry(key(e)).or_default() += 1;
    }
    for e in b {
        match a_keys.get_mut(&key(e)) {
            Some(n) if *n > 0 => *n -= 1,
            _ => out.push((e, Subset::OnlyB)),
        }
    }
    out
}

/// Splits the edits of two sentence-aligned systems into agreement subsets.
pub fn partition_pair(a: &SystemOutput, b: &SystemOutput) -> Result<Partition> {
    a.corpus.check_aligned(&b.corpus)?;
    let per_sentence = par::map_indexed(&a.corpus.sentences, |i, sa| {
        let sb = &b.corpus.sentences[i];
        let mut buckets: [Vec<Edit>; 3] = Default::default();
        for (e, subset) in split_sentence(sa.edits(), sb.edits()) {
            let slot = match subset {
                Subset::OnlyA => 0,
                Subset::Both => 1,
                Subset::OnlyB => 2,
            };
            buckets[slot].push(e.with_annotator(0));
        }
        buckets.map(|edits| {
            // Each bucket is a subset of one system's valid edit set.
            sa.with_edits(edits).expect("subset of a valid edit set")
        })
    });
    let mut parts: [Vec<AnnotatedSentence>; 3] = Default::default();
    for [x, y, z] in per_sentence {
        parts[0].push(x);
        parts[1].push(y);
        parts[2].push(z);
    }
    let [only_a, both, only_b] = parts.map(M2Corpus::new);
    Ok(Partition {
        only_a,
        both,
        only_b,
    })
}
