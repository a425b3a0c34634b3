//! Frequency-dictionary spellchecker.
//!
//! A [`FrequencyModel`] counts surface forms in a monolingual corpus
//! (words of at least three letters only) and carries a word list. Words
//! that are rare in the counts and missing from the word list are suspect;
//! [`suggest`] looks for a replacement in three stages:
//!
//! 1. frequent words (count above `candidate_min_count`), most frequent
//!    first, accepting a one-pair character swap or Levenshtein distance 1;
//! 2. the same tests over the word list in lexicographic order;
//! 3. the leftmost split into two known words.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use crate::edit::Token;
use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_KNOWN_MIN_COUNT: u64 = 3;
pub const DEFAULT_CANDIDATE_MIN_COUNT: u64 = 20;

/// Word counts plus a dictionary, with the stage-1 and stage-2 candidate
/// lists precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyModel {
    counts: HashMap<String, u64>,
    dictionary: HashSet<String>,
    known_min_count: u64,
    candidate_min_count: u64,
    frequent: Vec<String>,
    dictionary_sorted: Vec<String>,
}

/// Whether a corpus word is counted: at least three characters, all letters.
pub fn is_countable(word: &str) -> bool {
    word.chars().count() >= 3 && word.chars().all(char::is_alphabetic)
}

/// Adds the countable words of one line to `counts`.
pub fn count_line(counts: &mut HashMap<String, u64>, line: &str) {
    for w in line.split_whitespace().filter(|w| is_countable(w)) {
        *counts.entry(w.to_owned()).or_default() += 1;
    }
}

/// Counts `lines` in `shards` contiguous chunks (in parallel when enabled)
/// and merges. The result does not depend on the shard count.
pub fn count_lines<S: AsRef<str> + Sync>(lines: &[S], shards: usize) -> HashMap<String, u64> {
    let size = lines.len().div_ceil(shards.max(1)).max(1);
    let chunks: Vec<&[S]> = lines.chunks(size).collect();
    let partial = par::map_indexed(&chunks, |_, chunk| {
        let mut counts = HashMap::new();
        for line in *chunk {
            count_line(&mut counts, line.as_ref());
        }
        counts
    });
    merge_counts(partial)
}

pub fn merge_counts(parts: impl IntoIterator<Item = HashMap<String, u64>>) -> HashMap<String, u64> {
    let mut total: HashMap<String, u64> = HashMap::new();
    for part in parts {
        for (w, n) in part {
            *total.entry(w).or_default() += n;
        }
    }
    total
}

/// Streams a corpus from a reader.
pub fn count_reader(reader: impl BufRead) -> Result<HashMap<String, u64>> {
    let mut counts = HashMap::new();
    for line in reader.lines() {
        count_line(&mut counts, &line?);
    }
    Ok(counts)
}

/// Reads a word list: one word per line, blank lines ignored.
pub fn parse_dictionary(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Builds a model from corpus lines and a word list with default thresholds.
pub fn build_model<S: AsRef<str> + Sync>(
    lines: &[S],
    dictionary: impl IntoIterator<Item = String>,
) -> FrequencyModel {
    FrequencyModel::new(count_lines(lines, rayon_shards()), dictionary.into_iter().collect())
}

fn rayon_shards() -> usize {
    #[cfg(feature = "parallel")]
    if par::is_parallel() {
        return rayon::current_num_threads();
    }
    1
}

impl FrequencyModel {
    /// Entries that break the counting rules are dropped.
    pub fn new(counts: HashMap<String, u64>, dictionary: HashSet<String>) -> Self {
        Self::with_thresholds(
            counts,
            dictionary,
            DEFAULT_KNOWN_MIN_COUNT,
            DEFAULT_CANDIDATE_MIN_COUNT,
        )
    }

    pub fn with_thresholds(
        mut counts: HashMap<String, u64>,
        dictionary: HashSet<String>,
        known_min_count: u64,
        candidate_min_count: u64,
    ) -> Self {
        counts.retain(|w, n| *n >= 1 && is_countable(w));
        let mut frequent: Vec<(&String, u64)> = counts
            .iter()
            .filter(|(_, &n)| n > candidate_min_count)
            .map(|(w, &n)| (w, n))
            .collect();
        frequent.sort_by(|(wa, na), (wb, nb)| nb.cmp(na).then_with(|| wa.cmp(wb)));
        let frequent = frequent.into_iter().map(|(w, _)| w.clone()).collect();
        let mut dictionary_sorted: Vec<String> = dictionary.iter().cloned().collect();
        dictionary_sorted.sort();
        FrequencyModel {
            counts,
            dictionary,
            known_min_count,
            candidate_min_count,
            frequent,
            dictionary_sorted,
        }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &HashMap<String, u64> {
        &self.counts
    }

    pub fn dictionary(&self) -> &HashSet<String> {
        &self.dictionary
    }

    pub fn known_min_count(&self) -> u64 {
        self.known_min_count
    }

    pub fn candidate_min_count(&self) -> u64 {
        self.candidate_min_count
    }

    /// Stage-1 candidates: descending count, ties lexicographic.
    pub fn frequent_words(&self) -> &[String] {
        &self.frequent
    }

    /// Exact match, then lowercase fallback.
    pub fn in_dictionary(&self, word: &str) -> bool {
        self.dictionary.contains(word) || {
            let lower = word.to_lowercase();
            lower != word && self.dictionary.contains(&lower)
        }
    }

    /// Count at least `known_min_count`, or in the dictionary.
    pub fn is_known(&self, word: &str) -> bool {
        self.count(word) >= self.known_min_count || self.in_dictionary(word)
    }

    /// `word<TAB>count` lines, descending count then lexicographic.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&String, u64)> = self.counts.iter().map(|(w, &n)| (w, n)).collect();
        rows.sort_by(|(wa, na), (wb, nb)| nb.cmp(na).then_with(|| wa.cmp(wb)));
        let mut out = String::new();
        for (w, n) in rows {
            out.push_str(w);
            out.push('\t');
            out.push_str(&n.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str, dictionary: HashSet<String>) -> Result<Self> {
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let (word, n) = line
                .split_once('\t')
                .ok_or_else(|| err("expected word<TAB>count".into()))?;
            let n: u64 = n
                .trim()
                .parse()
                .map_err(|_| err(format!("bad count {n:?}")))?;
            if n == 0 || !is_countable(word) {
                return Err(err(format!("invalid entry {word:?} with count {n}")));
            }
            if counts.insert(word.to_owned(), n).is_some() {
                return Err(err(format!("duplicate word {word:?}")));
            }
        }
        Ok(Self::new(counts, dictionary))
    }
}

/// Unknown-word test. Words shorter than three characters, with digits,
/// all in uppercase, or containing non-letters are never suspect.
pub fn is_suspect(word: &str, model: &FrequencyModel) -> bool {
    word.chars().count() >= 3
        && word.chars().all(char::is_alphabetic)
        && word.chars().any(char::is_lowercase)
        && model.count(word) < model.known_min_count
        && !model.in_dictionary(word)
}

/// True when `b` is `a` with exactly one pair of positions exchanged.
pub fn is_one_swap(a: &str, b: &str) -> bool {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    if a.len() != b.len() {
        return false;
    }
    let diff: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).take(3).collect();
    matches!(diff[..], [i, j] if a[i] == b[j] && a[j] == b[i])
}

fn is_near(word: &str, len: usize, candidate: &str) -> bool {
    let clen = candidate.chars().count();
    if clen.abs_diff(len) > 1 {
        return false;
    }
    (clen == len && is_one_swap(word, candidate)) || strsim::levenshtein(word, candidate) == 1
}

/// Replacement for a suspect word, or `None`.
pub fn suggest(word: &str, model: &FrequencyModel) -> Option<String> {
    let len = word.chars().count();
    if let Some(w) = model.frequent.iter().find(|c| is_near(word, len, c)) {
        return Some(w.clone());
    }
    if let Some(w) = model.dictionary_sorted.iter().find(|c| is_near(word, len, c)) {
        return Some(w.clone());
    }
    let bounds: Vec<usize> = word.char_indices().map(|(i, _)| i).skip(1).collect();
    bounds.into_iter().find_map(|i| {
        let (l, r) = word.split_at(i);
        (model.is_known(l) && model.is_known(r)).then(|| format!("{l} {r}"))
    })
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_initial_capital(word: &str) -> bool {
    let mut chars = word.chars();
    chars.next().is_some_and(char::is_uppercase) && chars.any(char::is_lowercase)
}

/// Correction for one token; `None` leaves it unchanged.
pub fn correct_word(word: &str, model: &FrequencyModel) -> Option<String> {
    if is_initial_capital(word) {
        // A capitalized word is known if either form is.
        let lower = word.to_lowercase();
        if !is_suspect(word, model) || !is_suspect(&lower, model) {
            return None;
        }
        return suggest(&lower, model).map(|s| capitalize(&s));
    }
    if !is_suspect(word, model) {
        return None;
    }
    suggest(word, model)
}

/// Replaces each suspect token by its suggestion. Split suggestions yield
/// two tokens.
pub fn correct_sentence(tokens: &[Token], model: &FrequencyModel) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        match correct_word(t, model) {
            Some(s) => out.extend(crate::edit::tokenize(&s)),
            None => out.push(t.clone()),
        }
    }
    out
}

pub fn correct_corpus(sentences: &[Vec<Token>], model: &FrequencyModel) -> Vec<Vec<Token>> {
    par::map_indexed(sentences, |_, s| correct_sentence(s, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::tokenize;

    fn model(counts: &[(&str, u64)], dict: &[&str]) -> FrequencyModel {
        FrequencyModel::new(
            counts.iter().map(|(w, n)| (w.to_string(), *n)).collect(),
            dict.iter().map(|w| w.to_string()).collect(),
        )
    }

    fn sorted(counts: HashMap<String, u64>) -> Vec<(String, u64)> {
        let mut v: Vec<_> = counts.into_iter().collect();
        v.sort();
        v
    }

    #[test]
    fn counting_rules() {
        assert_eq!(sorted(count_lines(&["the the the an"], 1)), vec![("the".into(), 3)]);
        assert_eq!(sorted(count_lines(&["don't cat cat"], 1)), vec![("cat".into(), 2)]);
    }

    #[test]
    fn sharding_is_invisible() {
        let lines: Vec<String> = (0..97)
            .map(|i| format!("alpha beta{} gamma delta {}", i % 3, ["one", "two", "six"][i % 3]))
            .collect();
        assert_eq!(count_lines(&lines, 1), count_lines(&lines, 4));
        assert_eq!(count_lines(&lines, 1), count_lines(&lines, 200));
    }

    #[test]
    fn suspect_rules() {
        let m = model(&[("the", 1000), ("rare", 2), ("okay", 3)], &["zebra"]);
        assert!(!is_suspect("NASA", &m));
        assert!(!is_suspect("x9yz", &m));
        assert!(!is_suspect("an", &m));
        assert!(is_suspect("thsi", &m));
        assert!(is_suspect("rare", &m));
        assert!(!is_suspect("okay", &m));
        assert!(!is_suspect("zebra", &m));
        assert!(!is_suspect("Zebra", &m));
    }

    #[test]
    fn swap_predicate() {
        assert!(is_one_swap("teh", "the"));
        assert!(is_one_swap("hte", "eth"));
        assert!(is_one_swap("abcd", "dbca"));
        assert!(!is_one_swap("abc", "abc"));
        assert!(!is_one_swap("abc", "bca"));
        assert!(!is_one_swap("abc", "abcd"));
    }

    #[test]
    fn stage_one_prefers_frequency() {
        let m = model(&[("the", 1000), ("tea", 500)], &[]);
        assert_eq!(suggest("teh", &m).as_deref(), Some("the"));
        // "tha" is at distance 1 from both; "the" is more frequent.
        assert_eq!(suggest("tha", &m).as_deref(), Some("the"));
        let m = model(&[("bat", 50), ("cat", 50)], &[]);
        assert_eq!(suggest("xat", &m).as_deref(), Some("bat"));
    }

    #[test]
    fn stage_two_dictionary() {
        let m = model(&[("the", 1000)], &["armadillo", "aardvark"]);
        assert_eq!(suggest("armadilo", &m).as_deref(), Some("armadillo"));
    }

    #[test]
    fn mid_frequency_words_are_known_but_never_suggested() {
        let m = model(&[("cart", 10)], &[]);
        assert!(!is_suspect("cart", &m));
        assert_eq!(suggest("crat", &m), None);
    }

    #[test]
    fn stage_three_split() {
        let m = model(&[("hello", 5), ("world", 5)], &[]);
        assert_eq!(suggest("helloworld", &m).as_deref(), Some("hello world"));
        let m = model(&[("abc", 5), ("def", 5), ("cdef", 5)], &[]);
        assert_eq!(suggest("abcdef", &m).as_deref(), Some("abc def"));
        let m = model(&[("abc", 5), ("def", 5), ("cdef", 5)], &["ab"]);
        assert_eq!(suggest("abcdef", &m).as_deref(), Some("ab cdef"));
    }

    #[test]
    fn sentence_correction() {
        let m = model(&[("the", 1000), ("cat", 300)], &["dog"]);
        assert_eq!(correct_sentence(&tokenize("Teh cat"), &m), tokenize("The cat"));
        assert_eq!(correct_sentence(&tokenize("teh NASA dgo"), &m), tokenize("the NASA dog"));
        assert_eq!(correct_sentence(&tokenize("the cat"), &m), tokenize("the cat"));
    }

    #[test]
    fn tsv_round_trip_and_order() {
        let m = model(&[("bbb", 5), ("aaa", 5), ("ccc", 9)], &[]);
        let tsv = m.to_tsv();
        assert_eq!(tsv, "ccc\t9\naaa\t5\nbbb\t5\n");
        assert_eq!(FrequencyModel::from_tsv(&tsv, HashSet::new()).unwrap(), m);
        assert!(FrequencyModel::from_tsv("ab\t3\n", HashSet::new()).is_err());
        assert!(FrequencyModel::from_tsv("abc 3\n", HashSet::new()).is_err());
    }
}
