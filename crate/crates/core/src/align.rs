//! Edit extraction from a (source, corrected) sentence pair.
//!
//! Tokens are aligned with a weighted Levenshtein alignment, contiguous runs
//! of non-matching operations become single edits, and each edit gets a
//! coarse error-type label from [`EditTyper`].

use std::collections::HashSet;
use std::ops::Range;

use crate::edit::{join_tokens, Edit, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Match,
    Substitute,
    Insert,
    Delete,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentOp {
    pub kind: OpKind,
    pub source: Range<usize>,
    pub target: Range<usize>,
}

// Costs are doubled so the half-cost case-only substitution stays integral.
const SUB: u32 = 2;
const SUB_CASE: u32 = 1;
const INDEL: u32 = 2;

fn sub_cost(a: &str, b: &str) -> u32 {
    if a.to_lowercase() == b.to_lowercase() {
        SUB_CASE
    } else {
        SUB
    }
}

/// Total cost of an alignment in the units of the public cost model
/// (match 0, substitution 1 or 0.5, insertion 1, deletion 1).
pub fn alignment_cost(source: &[Token], target: &[Token], ops: &[AlignmentOp]) -> f64 {
    let doubled: u32 = ops
        .iter()
        .map(|op| match op.kind {
            OpKind::Match => 0,
            OpKind::Substitute => sub_cost(&source[op.source.start], &target[op.target.start]),
            OpKind::Insert | OpKind::Delete => INDEL,
        })
        .sum();
    f64::from(doubled) / 2.0
}

/// Minimum-cost token alignment. Among optimal alignments the backtrace
/// prefers match, then substitution, then deletion, then insertion.
pub fn align_tokens(source: &[Token], target: &[Token]) -> Vec<AlignmentOp> {
    let (n, m) = (source.len(), target.len());
    let width = m + 1;
    let mut dp = vec![0u32; (n + 1) * width];
    for (j, cell) in dp[..width].iter_mut().enumerate() {
        *cell = j as u32 * INDEL;
    }
    for i in 1..=n {
        dp[i * width] = i as u32 * INDEL;
        for j in 1..=m {
            let diag = dp[(i - 1) * width + j - 1]
                + if source[i - 1] == target[j - 1] {
                    0
                } else {
                    sub_cost(&source[i - 1], &target[j - 1])
                };
            let up = dp[(i - 1) * width + j] + INDEL;
            let left = dp[i * width + j - 1] + INDEL;
            dp[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * width + j];
        if i > 0 && j > 0 {
            let diag = dp[(i - 1) * width + j - 1];
            if source[i - 1] == target[j - 1] && diag == here {
                ops.push(op(OpKind::Match, i - 1..i, j - 1..j));
                i -= 1;
                j -= 1;
                continue;
            }
            if source[i - 1] != target[j - 1]
                && diag + sub_cost(&source[i - 1], &target[j - 1]) == here
            {
                ops.push(op(OpKind::Substitute, i - 1..i, j - 1..j));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[(i - 1) * width + j] + INDEL == here {
            ops.push(op(OpKind::Delete, i - 1..i, j..j));
            i -= 1;
        } else {
            ops.push(op(OpKind::Insert, i..i, j - 1..j));
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

fn op(kind: OpKind, source: Range<usize>, target: Range<usize>) -> AlignmentOp {
    AlignmentOp {
        kind,
        source,
        target,
    }
}

/// Edits turning `source` into `target`, labelled by `typer`, annotator 0.
pub fn extract_edits(source: &[Token], target: &[Token], typer: &EditTyper) -> Vec<Edit> {
    let ops = align_tokens(source, target);
    let mut edits = Vec::new();
    let mut run: Option<(Range<usize>, Range<usize>)> = None;
    let flush = |run: &mut Option<(Range<usize>, Range<usize>)>, edits: &mut Vec<Edit>| {
        if let Some((s, t)) = run.take() {
            let etype = typer.classify(&source[s.clone()], &target[t.clone()]);
            let replacement = join_tokens(&target[t]);
            edits.push(Edit::new(s.start, s.end, etype, &replacement, 0).expect("non-empty run"));
        }
    };
    for o in ops {
        if o.kind == OpKind::Match {
            flush(&mut run, &mut edits);
            continue;
        }
        run = Some(match run.take() {
            Some((s, t)) => (s.start..o.source.end, t.start..o.target.end),
            None => (o.source.clone(), o.target.clone()),
        });
    }
    flush(&mut run, &mut edits);
    edits
}

const DETERMINERS: [&str; 3] = ["a", "an", "the"];

const PREPOSITIONS: [&str; 25] = [
    "about", "after", "against", "among", "around", "at", "before", "behind", "between", "by",
    "during", "for", "from", "in", "into", "of", "off", "on", "onto", "over", "since", "through",
    "to", "towards", "with",
];

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '…' | '–' | '—' | '«' | '»')
}

/// Rule-based error typer producing `M:`/`U:`/`R:` labels with the
/// categories PUNCT, ORTH, DET, PREP, SPELL and OTHER.
///
/// The SPELL rule needs to know whether the source word is a real word, so
/// it only fires when a dictionary was supplied.
#[derive(Clone, Debug, Default)]
pub struct EditTyper {
    dictionary: Option<HashSet<String>>,
}

impl EditTyper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dictionary<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        EditTyper {
            dictionary: Some(words.into_iter().map(Into::into).collect()),
        }
    }

    fn in_dictionary(&self, dict: &HashSet<String>, word: &str) -> bool {
        dict.contains(word) || dict.contains(&word.to_lowercase())
    }

    pub fn classify<S: AsRef<str>>(&self, source: &[S], target: &[S]) -> String {
        let prefix = match (source.is_empty(), target.is_empty()) {
            (true, _) => "M",
            (_, true) => "U",
            _ => "R",
        };
        format!("{prefix}:{}", self.category(source, target))
    }

    fn category<S: AsRef<str>>(&self, source: &[S], target: &[S]) -> &'static str {
        let both = || source.iter().chain(target).map(AsRef::as_ref);
        if both().all(|t| t.chars().all(is_punct)) {
            return "PUNCT";
        }
        let squash = |side: &[S]| -> String {
            side.iter()
                .flat_map(|t| t.as_ref().chars())
                .filter(|c| !c.is_whitespace())
                .flat_map(char::to_lowercase)
                .collect()
        };
        if !source.is_empty() && !target.is_empty() && squash(source) == squash(target) {
            return "ORTH";
        }
        let changed_in = |words: &[&str]| {
            both().all(|t| words.contains(&t.to_lowercase().as_str()))
        };
        if changed_in(&DETERMINERS) {
            return "DET";
        }
        if changed_in(&PREPOSITIONS) {
            return "PREP";
        }
        if let (Some(dict), [src], [trg]) = (&self.dictionary, source, target) {
            let (src, trg) = (src.as_ref(), trg.as_ref());
            if !self.in_dictionary(dict, src) && strsim::damerau_levenshtein(src, trg) <= 2 {
                return "SPELL";
            }
        }
        "OTHER"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::{apply_edits, tokenize};

    fn kinds(src: &str, trg: &str) -> Vec<OpKind> {
        align_tokens(&tokenize(src), &tokenize(trg))
            .into_iter()
            .map(|o| o.kind)
            .collect()
    }

    /// Exhaustive minimum over every alignment path, in doubled units.
    fn brute_min(src: &[Token], trg: &[Token]) -> u32 {
        if src.is_empty() {
            return trg.len() as u32 * INDEL;
        }
        if trg.is_empty() {
            return src.len() as u32 * INDEL;
        }
        let diag = if src[0] == trg[0] { 0 } else { sub_cost(&src[0], &trg[0]) };
        let a = diag + brute_min(&src[1..], &trg[1..]);
        let b = INDEL + brute_min(&src[1..], trg);
        let c = INDEL + brute_min(src, &trg[1..]);
        a.min(b).min(c)
    }

    #[test]
    fn substitution_in_middle() {
        use OpKind::*;
        assert_eq!(kinds("He go home", "He goes home"), vec![Match, Substitute, Match]);
    }

    #[test]
    fn identity_is_all_match() {
        assert!(kinds("a b c d", "a b c d").iter().all(|k| *k == OpKind::Match));
    }

    #[test]
    fn trailing_deletion() {
        assert_eq!(kinds("a b", "a"), vec![OpKind::Match, OpKind::Delete]);
    }

    #[test]
    fn cost_matches_brute_force_on_small_cases() {
        let cases = [
            ("a b c", "a c b"),
            ("The cat", "the cat sat"),
            ("x y z w", "y x"),
            ("A a A", "a A a"),
            ("", "p q"),
            ("p q r s t u", "u t s r q p"),
        ];
        for (s, t) in cases {
            let (s, t) = (tokenize(s), tokenize(t));
            let ops = align_tokens(&s, &t);
            assert_eq!(alignment_cost(&s, &t, &ops) * 2.0, f64::from(brute_min(&s, &t)));
        }
    }

    #[test]
    fn extracts_substitution() {
        let (s, t) = (tokenize("He go home"), tokenize("He goes home"));
        let edits = extract_edits(&s, &t, &EditTyper::new());
        assert_eq!(edits.len(), 1);
        assert_eq!((edits[0].start, edits[0].end), (1, 2));
        assert_eq!(edits[0].replacement, "goes");
        assert!(edits[0].etype.starts_with("R:"));
        assert_eq!(apply_edits(&s, &edits).unwrap(), t);
    }

    #[test]
    fn extracts_insertion() {
        let (s, t) = (tokenize("I saw dog"), tokenize("I saw a dog"));
        let edits = extract_edits(&s, &t, &EditTyper::new());
        assert_eq!(edits, vec![Edit::new(2, 2, "M:DET", "a", 0).unwrap()]);
    }

    #[test]
    fn identical_sentences_have_no_edits() {
        let s = tokenize("nothing to fix here .");
        assert!(extract_edits(&s, &s, &EditTyper::new()).is_empty());
    }

    #[test]
    fn adjacent_changes_merge() {
        let (s, t) = (tokenize("a b c d"), tokenize("a X Y d"));
        let edits = extract_edits(&s, &t, &EditTyper::new());
        assert_eq!(edits.len(), 1);
        assert_eq!((edits[0].start, edits[0].end), (1, 3));
        assert_eq!(edits[0].replacement, "X Y");
    }

    #[test]
    fn classifier_rules() {
        let typer = EditTyper::with_dictionary(["good", "the"]);
        let c = |s: &[&str], t: &[&str]| typer.classify(s, t);
        assert_eq!(c(&[], &["the"]), "M:DET");
        assert_eq!(c(&["god"], &["good"]), "R:SPELL");
        assert_eq!(c(&["."], &[","]), "R:PUNCT");
        assert_eq!(c(&[","], &[]), "U:PUNCT");
        assert_eq!(c(&["paris"], &["Paris"]), "R:ORTH");
        assert_eq!(c(&["ice", "cream"], &["icecream"]), "R:ORTH");
        assert_eq!(c(&["a"], &["the"]), "R:DET");
        assert_eq!(c(&["in"], &["on"]), "R:PREP");
        assert_eq!(c(&["to"], &[]), "U:PREP");
        assert_eq!(c(&["house"], &["building"]), "R:OTHER");
        // dictionary word: not a spelling error
        assert_eq!(c(&["good"], &["god"]), "R:OTHER");
        // no dictionary, no SPELL
        assert_eq!(EditTyper::new().classify(&["god"], &["good"]), "R:OTHER");
    }

    #[test]
    fn classifier_is_deterministic() {
        let typer = EditTyper::with_dictionary(["x"]);
        for _ in 0..3 {
            assert_eq!(typer.classify(&["speling"], &["spelling"]), "R:SPELL");
        }
    }
}
