//! Synthetic error corpora by applying corrections backwards.
//!
//! [`measure_distribution`] records how many corrections a training
//! sentence carries and how often each specific correction occurs. To
//! generate a pair, [`generate_pair`] draws a correction count `k`, then `k`
//! corrections, finds every clean pool sentence on which all of them can be
//! undone at disjoint places, picks one uniformly and undoes them there:
//!
//! * a correction that inserted tokens is undone by deleting one occurrence;
//! * one that deleted tokens, by inserting them at a random gap;
//! * one that rewrote `x` into `y`, by rewriting an occurrence of `y` into `x`.
//!
//! The gold edits are the forward corrections placed on the corrupted
//! sentence, so applying them restores the clean sentence exactly.
//!
//! If no pool sentence accepts a draw, the `k` corrections are redrawn with
//! `k` kept, so the count histogram is reproduced in expectation; the
//! realized correction frequencies can still drift toward corrections that
//! are easy to place, which [`GenerationReport`] makes visible.
//!
//! All randomness comes from one [`Pcg32`] (PCG-XSH-RR, 64-bit state)
//! seeded with [`SeedableRng::seed_from_u64`], consumed sequentially.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::edit::{
    apply_edits, join_tokens, reverse_correction, AnnotatedSentence, Edit, M2Corpus,
    ReverseAction, Token,
};
use crate::error::{Error, Result};

/// Identity of a specific correction: span text, replacement, type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CorrectionId {
    pub source: String,
    pub replacement: String,
    pub etype: String,
}

impl CorrectionId {
    /// Normalizes whitespace; rejects empty types and corrections that are
    /// empty on both sides.
    pub fn new(source: &str, replacement: &str, etype: &str) -> Result<Self> {
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        let id = CorrectionId {
            source: norm(source),
            replacement: norm(replacement),
            etype: etype.trim().to_owned(),
        };
        if id.source.is_empty() && id.replacement.is_empty() {
            return Err(Error::InvalidInput("correction with empty source and replacement".into()));
        }
        if id.etype.is_empty() || id.etype.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("bad correction type {:?}", id.etype)));
        }
        Ok(id)
    }

    pub fn action(&self) -> ReverseAction {
        reverse_correction(&self.source, &self.replacement)
    }
}

impl fmt::Display for CorrectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:?} -> {:?}", self.etype, self.source, self.replacement)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedCorrection {
    #[serde(flatten)]
    pub id: CorrectionId,
    pub prob: f64,
}

/// Corrections-per-sentence histogram and per-correction frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDistribution {
    pub per_sentence_hist: BTreeMap<usize, f64>,
    pub corrections: Vec<WeightedCorrection>,
}

fn check_mass<'a>(what: &str, probs: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut total = 0.0;
    for &p in probs {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!("{what}: bad probability {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}

fn normalized<K: Ord>(counts: BTreeMap<K, u64>) -> impl Iterator<Item = (K, f64)> {
    let total: u64 = counts.values().sum();
    counts.into_iter().map(move |(k, n)| (k, n as f64 / total as f64))
}

impl ErrorDistribution {
    pub fn validate(&self) -> Result<()> {
        check_mass("per_sentence_hist", self.per_sentence_hist.values())?;
        let needs_corrections = self.per_sentence_hist.iter().any(|(&k, &p)| k > 0 && p > 0.0);
        if needs_corrections {
            check_mass("corrections", self.corrections.iter().map(|c| &c.prob))?;
        }
        for c in &self.corrections {
            let norm = CorrectionId::new(&c.id.source, &c.id.replacement, &c.id.etype)?;
            if norm != c.id {
                return Err(Error::InvalidInput(format!("correction {} is not normalized", c.id)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dist: ErrorDistribution = serde_json::from_str(text)?;
        dist.validate()?;
        Ok(dist)
    }

    /// Expected number of corrections per sentence.
    pub fn mean_count(&self) -> f64 {
        self.per_sentence_hist.iter().map(|(&k, &p)| k as f64 * p).sum()
    }
}

/// Counts corrections of one annotator. Sentences without edits count
/// towards the zero bin.
pub fn measure_distribution(train: &M2Corpus, annotator: u32) -> ErrorDistribution {
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    let mut freq: BTreeMap<CorrectionId, u64> = BTreeMap::new();
    for s in &train.sentences {
        let mut k = 0;
        for e in s.edits_of(annotator) {
            k += 1;
            let id = CorrectionId {
                source: s.span_text(e),
                replacement: e.replacement.clone(),
                etype: e.etype.clone(),
            };
            *freq.entry(id).or_default() += 1;
        }
        *hist.entry(k).or_default() += 1;
    }
    ErrorDistribution {
        per_sentence_hist: normalized(hist).collect(),
        corrections: normalized(freq)
            .map(|(id, prob)| WeightedCorrection { id, prob })
            .collect(),
    }
}

/// Clean sentences with a token → sentence-ids index.
#[derive(Clone, Debug)]
pub struct Pool {
    sentences: Vec<Vec<Token>>,
    index: HashMap<String, Vec<usize>>,
}

impl Pool {
    pub fn new(sentences: Vec<Vec<Token>>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::InvalidInput("empty sentence pool".into()));
        }
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, s) in sentences.iter().enumerate() {
            for t in s {
                let ids = index.entry(t.to_string()).or_default();
                if ids.last() != Some(&i) {
                    ids.push(i);
                }
            }
        }
        Ok(Pool { sentences, index })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentences(&self) -> &[Vec<Token>] {
        &self.sentences
    }

    /// Sentences containing every token in `required`; all when empty.
    fn containing(&self, required: &[&str]) -> Vec<usize> {
        let mut lists: Vec<&[usize]> = Vec::with_capacity(required.len());
        for t in required {
            match self.index.get(*t) {
                Some(ids) => lists.push(ids),
                None => return Vec::new(),
            }
        }
        let Some(shortest) = lists.iter().min_by_key(|l| l.len()) else {
            return (0..self.sentences.len()).collect();
        };
        shortest
            .iter()
            .copied()
            .filter(|id| lists.iter().all(|l| l.binary_search(id).is_ok()))
            .collect()
    }
}

/// Precomputed sampling tables for a validated distribution.
#[derive(Clone, Debug)]
pub struct Sampler {
    counts: Vec<usize>,
    count_index: WeightedIndex<f64>,
    corrections: Vec<CorrectionId>,
    correction_index: Option<WeightedIndex<f64>>,
}

impl Sampler {
    pub fn new(dist: &ErrorDistribution) -> Result<Self> {
        dist.validate()?;
        let bad = |e: rand::distributions::WeightedError| Error::InvalidInput(e.to_string());
        let counts: Vec<usize> = dist.per_sentence_hist.keys().copied().collect();
        let count_index = WeightedIndex::new(dist.per_sentence_hist.values().copied()).map_err(bad)?;
        let correction_index = if dist.corrections.iter().any(|c| c.prob > 0.0) {
            Some(WeightedIndex::new(dist.corrections.iter().map(|c| c.prob)).map_err(bad)?)
        } else {
            None
        };
        Ok(Sampler {
            counts,
            count_index,
            corrections: dist.corrections.iter().map(|c| c.id.clone()).collect(),
            correction_index,
        })
    }

    fn draw_count(&self, rng: &mut Pcg32) -> usize {
        self.counts[self.count_index.sample(rng)]
    }

    fn draw_corrections(&self, k: usize, rng: &mut Pcg32) -> Vec<CorrectionId> {
        match &self.correction_index {
            Some(idx) => (0..k).map(|_| self.corrections[idx.sample(rng)].clone()).collect(),
            None => Vec::new(),
        }
    }
}

/// One generated training pair.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedPair {
    pub corrupted: Vec<Token>,
    pub clean: Vec<Token>,
    /// Forward corrections over `corrupted`, annotator 0.
    pub gold: Vec<Edit>,
    /// The drawn corrections, in draw order.
    pub draw: Vec<CorrectionId>,
    pub pool_index: usize,
    /// Rejected draws before this one succeeded.
    pub retries: usize,
}

/// An undo action that needs a matching span of the clean sentence.
struct Placed<'a> {
    draw: usize,
    pattern: &'a [String],
    /// Undo by deleting the span (the correction inserted it).
    delete: bool,
}

/// Node budget for one assignment search; exceeding it counts as failure.
const SEARCH_BUDGET: usize = 20_000;

fn occurrences(tokens: &[Token], pattern: &[String]) -> Vec<usize> {
    if pattern.is_empty() || pattern.len() > tokens.len() {
        return Vec::new();
    }
    (0..=tokens.len() - pattern.len())
        .filter(|&p| tokens[p..p + pattern.len()].iter().zip(pattern).all(|(t, w)| **t == **w))
        .collect()
}

fn compatible(a: (usize, usize, bool), b: (usize, usize, bool)) -> bool {
    let (pa, ea, da) = a;
    let (pb, eb, db) = b;
    let disjoint = ea <= pb || eb <= pa;
    // Two deletions that touch would leave two insertions at one point.
    let touching_deletes = da && db && (ea == pb || eb == pa);
    disjoint && !touching_deletes
}

/// Depth-first search for disjoint positions. `options[i]` lists candidate
/// starts for `placed[i]`, tried in order.
fn assign(
    placed: &[Placed],
    options: &[Vec<usize>],
    chosen: &mut Vec<(usize, usize, bool)>,
    budget: &mut usize,
) -> bool {
    let i = chosen.len();
    if i == placed.len() {
        return true;
    }
    for &p in &options[i] {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let span = (p, p + placed[i].pattern.len(), placed[i].delete);
        if chosen.iter().all(|&c| compatible(c, span)) {
            chosen.push(span);
            if assign(placed, options, chosen, budget) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

fn split_actions(actions: &[ReverseAction]) -> (Vec<Placed<'_>>, Vec<(usize, &[String])>) {
    let mut placed = Vec::new();
    let mut inserts = Vec::new();
    for (draw, a) in actions.iter().enumerate() {
        match a {
            ReverseAction::DeleteOccurrence(p) => placed.push(Placed { draw, pattern: p, delete: true }),
            ReverseAction::ReplaceOccurrence { find, .. } => {
                placed.push(Placed { draw, pattern: find, delete: false })
            }
            ReverseAction::InsertAnywhere(s) => inserts.push((draw, s.as_slice())),
        }
    }
    // Most constrained first.
    placed.sort_by_key(|p| std::cmp::Reverse(p.pattern.len()));
    (placed, inserts)
}

/// Disjoint spans for every placed action, or `None`. With an rng each
/// action's candidate list is shuffled first, making the choice random.
fn find_assignment(
    tokens: &[Token],
    placed: &[Placed],
    rng: Option<&mut Pcg32>,
) -> Option<Vec<(usize, usize, bool)>> {
    let mut options: Vec<Vec<usize>> = placed.iter().map(|p| occurrences(tokens, p.pattern)).collect();
    if options.iter().any(Vec::is_empty) {
        return None;
    }
    if let Some(rng) = rng {
        for o in &mut options {
            o.shuffle(rng);
        }
    }
    let mut chosen = Vec::with_capacity(placed.len());
    let mut budget = SEARCH_BUDGET;
    assign(placed, &options, &mut chosen, &mut budget).then_some(chosen)
}

/// Undoes the drawn corrections on `clean` and returns the corrupted
/// sentence with the forward corrections as gold edits.
fn corrupt(
    clean: &[Token],
    draw: &[CorrectionId],
    actions: &[ReverseAction],
    rng: &mut Pcg32,
) -> Option<(Vec<Token>, Vec<Edit>)> {
    let (placed, inserts) = split_actions(actions);
    let spans = find_assignment(clean, &placed, Some(rng))?;

    // span start -> (end, draw index)
    let mut at: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (p, (start, end, _)) in placed.iter().zip(&spans) {
        at.insert(*start, (*end, p.draw));
    }
    // Insertion gaps may not fall strictly inside an occupied span.
    let gaps: Vec<usize> = (0..=clean.len())
        .filter(|&g| spans.iter().all(|&(s, e, _)| g <= s || g >= e))
        .collect();
    let mut gap_inserts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (draw_idx, _) in &inserts {
        let g = gaps[rng.gen_range(0..gaps.len())];
        gap_inserts.entry(g).or_default().push(*draw_idx);
    }

    let mut out: Vec<Token> = Vec::with_capacity(clean.len() + 4);
    let mut gold: Vec<Edit> = Vec::with_capacity(draw.len());
    let push_words = |out: &mut Vec<Token>, words: &[String]| {
        out.extend(words.iter().map(|w| Token::new(w.as_str()).expect("whitespace-split word")));
    };
    let mut pos = 0;
    loop {
        for &d in gap_inserts.get(&pos).into_iter().flatten() {
            let ReverseAction::InsertAnywhere(words) = &actions[d] else { unreachable!() };
            let q = out.len();
            push_words(&mut out, words);
            gold.push(Edit::new(q, out.len(), &draw[d].etype, "", 0).ok()?);
        }
        if pos == clean.len() {
            break;
        }
        if let Some(&(end, d)) = at.get(&pos) {
            let q = out.len();
            match &actions[d] {
                ReverseAction::DeleteOccurrence(words) => {
                    gold.push(Edit::new(q, q, &draw[d].etype, &join_tokens(words), 0).ok()?);
                }
                ReverseAction::ReplaceOccurrence { find, with } => {
                    push_words(&mut out, with);
                    gold.push(Edit::new(q, out.len(), &draw[d].etype, &join_tokens(find), 0).ok()?);
                }
                ReverseAction::InsertAnywhere(_) => unreachable!(),
            }
            pos = end;
        } else {
            out.push(clean[pos].clone());
            pos += 1;
        }
    }
    Some((out, gold))
}

fn is_applicable(tokens: &[Token], actions: &[ReverseAction]) -> bool {
    let (placed, _) = split_actions(actions);
    find_assignment(tokens, &placed, None).is_some()
}

fn required_tokens(actions: &[ReverseAction]) -> Vec<&str> {
    let mut req: Vec<&str> = actions
        .iter()
        .flat_map(|a| match a {
            ReverseAction::DeleteOccurrence(p) => p.as_slice(),
            ReverseAction::ReplaceOccurrence { find, .. } => find.as_slice(),
            ReverseAction::InsertAnywhere(_) => &[],
        })
        .map(String::as_str)
        .collect();
    req.sort_unstable();
    req.dedup();
    req
}

/// Draws one corrupted/clean pair. Tries up to `max_attempts` correction
/// draws for a single drawn count.
pub fn generate_pair(
    pool: &Pool,
    sampler: &Sampler,
    rng: &mut Pcg32,
    max_attempts: usize,
) -> Result<GeneratedPair> {
    let k = sampler.draw_count(rng);
    let mut last = Vec::new();
    for attempt in 0..max_attempts.max(1) {
        let draw = sampler.draw_corrections(k, rng);
        if draw.len() != k {
            break;
        }
        let actions: Vec<ReverseAction> = draw.iter().map(CorrectionId::action).collect();
        let applicable: Vec<usize> = pool
            .containing(&required_tokens(&actions))
            .into_iter()
            .filter(|&i| is_applicable(&pool.sentences[i], &actions))
            .collect();
        if applicable.is_empty() {
            last = draw;
            continue;
        }
        let pool_index = applicable[rng.gen_range(0..applicable.len())];
        let clean = pool.sentences[pool_index].clone();
        let (corrupted, gold) = corrupt(&clean, &draw, &actions, rng)
            .expect("an applicable sentence accepts its draw");
        debug_assert_eq!(apply_edits(&corrupted, &gold).ok().as_ref(), Some(&clean));
        return Ok(GeneratedPair {
            corrupted,
            clean,
            gold,
            draw,
            pool_index,
            retries: attempt,
        });
    }
    Err(Error::GenerationExhausted {
        attempts: max_attempts,
        produced: 0,
        draw: last,
    })
}

/// Requested versus realized statistics of a generated corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationReport {
    pub sentences: usize,
    pub rejected_draws: usize,
    pub realized_hist: BTreeMap<usize, f64>,
    /// Total-variation distance between realized and requested histograms.
    pub hist_total_variation: f64,
    pub realized_corrections: Vec<WeightedCorrection>,
    pub corrections_total_variation: f64,
}

fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

#[derive(Clone, Debug)]
pub struct GeneratedCorpus {
    pub pairs: Vec<GeneratedPair>,
    /// Gold edits over the corrupted side.
    pub gold: M2Corpus,
    pub report: GenerationReport,
}

impl GeneratedCorpus {
    /// Corrupted side, one sentence per line.
    pub fn source_text(&self) -> String {
        lines(self.pairs.iter().map(|p| &p.corrupted))
    }

    /// Clean side, one sentence per line.
    pub fn target_text(&self) -> String {
        lines(self.pairs.iter().map(|p| &p.clean))
    }
}

fn lines<'a>(sentences: impl Iterator<Item = &'a Vec<Token>>) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&join_tokens(s));
        out.push('\n');
    }
    out
}

/// `n` pairs from one seeded stream.
pub fn generate_corpus(
    pool: &Pool,
    dist: &ErrorDistribution,
    n: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<GeneratedCorpus> {
    if n == 0 {
        return Err(Error::InvalidInput("number of sentences must be at least 1".into()));
    }
    let sampler = Sampler::new(dist)?;
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for produced in 0..n {
        match generate_pair(pool, &sampler, &mut rng, max_attempts) {
            Ok(p) => pairs.push(p),
            Err(Error::GenerationExhausted { attempts, draw, .. }) => {
                return Err(Error::GenerationExhausted { attempts, produced, draw })
            }
            Err(e) => return Err(e),
        }
    }

    let sentences = pairs
        .iter()
        .map(|p| AnnotatedSentence::new(p.corrupted.clone(), p.gold.clone()))
        .collect::<Result<Vec<_>>>()?;
    let gold = M2Corpus::new(sentences);
    let realized = measure_distribution(&gold, 0);
    let requested: BTreeMap<CorrectionId, f64> =
        dist.corrections.iter().map(|c| (c.id.clone(), c.prob)).collect();
    let realized_freq: BTreeMap<CorrectionId, f64> =
        realized.corrections.iter().map(|c| (c.id.clone(), c.prob)).collect();
    let report = GenerationReport {
        sentences: n,
        rejected_draws: pairs.iter().map(|p| p.retries).sum(),
        hist_total_variation: total_variation(&realized.per_sentence_hist, &dist.per_sentence_hist),
        realized_hist: realized.per_sentence_hist,
        corrections_total_variation: if realized_freq.is_empty() {
            0.0
        } else {
            total_variation(&realized_freq, &requested)
        },
        realized_corrections: realized.corrections,
    };
    Ok(GeneratedCorpus { pairs, gold, report })
}
