//! The edit data model shared by every other module.

use std::borrow::Borrow;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marker used by the M² format for an empty replacement.
pub(crate) const NONE_MARKER: &str = "-NONE-";
pub(crate) const FIELD_SEP: &str = "|||";

/// One whitespace-free, non-empty unit of a tokenized sentence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken(text));
        }
        Ok(Token(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Token {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Token {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> String {
        token.0
    }
}

/// Splits a line on whitespace. Never fails: every piece is a valid token.
pub fn tokenize(line: &str) -> Vec<Token> {
    line.split_whitespace().map(|t| Token(t.to_owned())).collect()
}

pub(crate) fn join_tokens<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_ref());
    }
    out
}

/// A single correction: replace source tokens `[start, end)` with
/// `replacement` (whitespace-separated tokens, possibly none).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub etype: String,
    pub replacement: String,
    pub annotator: u32,
}

impl Edit {
    /// Builds an edit, normalizing whitespace inside `replacement`.
    ///
    /// Span bounds against a sentence are checked by [`AnnotatedSentence::new`].
    pub fn new(
        start: usize,
        end: usize,
        etype: impl Into<String>,
        replacement: &str,
        annotator: u32,
    ) -> Result<Self> {
        let etype = etype.into();
        let replacement = replacement.split_whitespace().collect::<Vec<_>>().join(" ");
        if start > end {
            return Err(Error::InvalidEdit(format!("start {start} > end {end}")));
        }
        if etype.trim().is_empty() || etype.contains(FIELD_SEP) || etype.contains('\n') {
            return Err(Error::InvalidEdit(format!("bad error type {etype:?}")));
        }
        if replacement == NONE_MARKER || replacement.contains(FIELD_SEP) {
            return Err(Error::InvalidEdit(format!("bad replacement {replacement:?}")));
        }
        if start == end && replacement.is_empty() {
            return Err(Error::InvalidEdit(format!(
                "empty insertion at {start}"
            )));
        }
        Ok(Edit {
            start,
            end,
            etype,
            replacement,
            annotator,
        })
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_deletion(&self) -> bool {
        self.replacement.is_empty()
    }

    pub fn replacement_tokens(&self) -> impl Iterator<Item = &str> {
        self.replacement.split_whitespace()
    }

    /// Two spans conflict when they share a source token, when an insertion
    /// falls strictly inside the other span, or when both insert at the same
    /// point.
    pub fn overlaps(&self, other: &Edit) -> bool {
        match (self.is_insertion(), other.is_insertion()) {
            (true, true) => self.start == other.start,
            (true, false) => other.start < self.start && self.start < other.end,
            (false, true) => self.start < other.start && other.start < self.end,
            (false, false) => self.start < other.end && other.start < self.end,
        }
    }

    pub fn key(&self, sentence: usize) -> EditKey {
        EditKey {
            sentence,
            start: self.start,
            end: self.end,
            replacement: self.replacement.clone(),
        }
    }

    /// Same edit with a different type label.
    pub fn with_etype(&self, etype: &str) -> Edit {
        Edit {
            etype: etype.to_owned(),
            ..self.clone()
        }
    }

    pub(crate) fn with_annotator(&self, annotator: u32) -> Edit {
        Edit {
            annotator,
            ..self.clone()
        }
    }

    fn sort_key(&self) -> (usize, usize, u32, &str, &str) {
        (
            self.start,
            self.end,
            self.annotator,
            &self.replacement,
            &self.etype,
        )
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{}) {} -> {:?} (annotator {})",
            self.start, self.end, self.etype, self.replacement, self.annotator
        )
    }
}

/// Identity of an edit for intersection and gold matching. The type label
/// is excluded.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EditKey {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

/// A tokenized source sentence with its edits, sorted by
/// `(start, end, annotator)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedSentence {
    tokens: Vec<Token>,
    edits: Vec<Edit>,
}

impl AnnotatedSentence {
    pub fn new(tokens: Vec<Token>, mut edits: Vec<Edit>) -> Result<Self> {
        for e in &edits {
            check_span(e, tokens.len())?;
        }
        edits.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
        for (i, x) in edits.iter().enumerate() {
            for y in &edits[i + 1..] {
                if x.annotator == y.annotator && x.overlaps(y) {
                    return Err(Error::Overlap {
                        first: Box::new(x.clone()),
                        second: Box::new(y.clone()),
                    });
                }
            }
        }
        Ok(AnnotatedSentence { tokens, edits })
    }

    pub fn unannotated(tokens: Vec<Token>) -> Self {
        AnnotatedSentence {
            tokens,
            edits: Vec::new(),
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }

    pub fn edits_of(&self, annotator: u32) -> impl Iterator<Item = &Edit> {
        self.edits.iter().filter(move |e| e.annotator == annotator)
    }

    /// Same source sentence with a new edit set.
    pub fn with_edits(&self, edits: Vec<Edit>) -> Result<Self> {
        AnnotatedSentence::new(self.tokens.clone(), edits)
    }

    /// Source text covered by `edit`.
    pub fn span_text(&self, edit: &Edit) -> String {
        join_tokens(&self.tokens[edit.start..edit.end])
    }

    /// The sentence after applying one annotator's edits.
    pub fn corrected(&self, annotator: u32) -> Vec<Token> {
        let edits: Vec<Edit> = self.edits_of(annotator).cloned().collect();
        // Same-annotator edits were checked for overlap on construction.
        apply_edits(&self.tokens, &edits).expect("validated edit set")
    }
}

fn check_span(edit: &Edit, len: usize) -> Result<()> {
    if edit.end > len {
        return Err(Error::InvalidEdit(format!(
            "span [{}, {}) exceeds sentence length {len}",
            edit.start, edit.end
        )));
    }
    Ok(())
}

/// A sequence of annotated sentences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct M2Corpus {
    pub sentences: Vec<AnnotatedSentence>,
}

impl M2Corpus {
    pub fn new(sentences: Vec<AnnotatedSentence>) -> Self {
        M2Corpus { sentences }
    }

    /// Source sentences with no edits.
    pub fn from_sources(sources: Vec<Vec<Token>>) -> Self {
        M2Corpus::new(sources.into_iter().map(AnnotatedSentence::unannotated).collect())
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn edit_count(&self) -> usize {
        self.sentences.iter().map(|s| s.edits.len()).sum()
    }

    /// Fails unless both corpora have the same source sentences, in order.
    pub fn check_aligned(&self, other: &M2Corpus) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        for (index, (x, y)) in self.sentences.iter().zip(&other.sentences).enumerate() {
            if x.tokens != y.tokens {
                return Err(Error::SourceMismatch { index });
            }
        }
        Ok(())
    }

    /// Keeps only one annotator's edits, relabelled as annotator 0.
    pub fn project(&self, annotator: u32) -> M2Corpus {
        let sentences = self
            .sentences
            .iter()
            .map(|s| AnnotatedSentence {
                tokens: s.tokens.clone(),
                edits: s.edits_of(annotator).map(|e| e.with_annotator(0)).collect(),
            })
            .collect();
        M2Corpus { sentences }
    }

    /// Sentences at the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> M2Corpus {
        M2Corpus::new(indices.iter().map(|&i| self.sentences[i].clone()).collect())
    }

    pub fn corrected(&self, annotator: u32) -> Vec<Vec<Token>> {
        self.sentences.iter().map(|s| s.corrected(annotator)).collect()
    }
}

/// Applies a non-overlapping edit set to a token sequence.
///
/// Edits are applied right to left (descending start, then descending end)
/// so earlier spans keep their offsets. An insertion and a span starting at
/// the same index therefore yield the inserted tokens first.
pub fn apply_edits(tokens: &[Token], edits: &[Edit]) -> Result<Vec<Token>> {
    for e in edits {
        check_span(e, tokens.len())?;
        if e.is_insertion() && e.is_deletion() {
            return Err(Error::InvalidEdit(format!("empty insertion at {}", e.start)));
        }
    }
    for (i, x) in edits.iter().enumerate() {
        for y in &edits[i + 1..] {
            if x.overlaps(y) {
                return Err(Error::Overlap {
                    first: Box::new(x.clone()),
                    second: Box::new(y.clone()),
                });
            }
        }
    }
    let mut order: Vec<&Edit> = edits.iter().collect();
    order.sort_by_key(|e| std::cmp::Reverse((e.start, e.end)));
    let mut out = tokens.to_vec();
    for e in order {
        out.splice(
            e.start..e.end,
            e.replacement_tokens().map(|t| Token(t.to_owned())),
        );
    }
    Ok(out)
}

/// How to inject the error that a correction fixes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReverseAction {
    /// The correction inserted these tokens: remove one occurrence.
    DeleteOccurrence(Vec<String>),
    /// The correction deleted these tokens: insert them somewhere.
    InsertAnywhere(Vec<String>),
    /// The correction rewrote `with` into `find`: rewrite one occurrence of
    /// `find` back into `with`.
    ReplaceOccurrence { find: Vec<String>, with: Vec<String> },
}

/// Inverse of a correction given as (erroneous text, corrected text).
pub fn reverse_correction(source_text: &str, replacement: &str) -> ReverseAction {
    let source: Vec<String> = source_text.split_whitespace().map(str::to_owned).collect();
    let target: Vec<String> = replacement.split_whitespace().map(str::to_owned).collect();
    if source.is_empty() {
        ReverseAction::DeleteOccurrence(target)
    } else if target.is_empty() {
        ReverseAction::InsertAnywhere(source)
    } else {
        ReverseAction::ReplaceOccurrence {
            find: target,
            with: source,
        }
    }
}

/// Inverse of `edit`, read against the sentence it annotates.
pub fn reverse_edit(edit: &Edit, tokens: &[Token]) -> ReverseAction {
    let end = edit.end.min(tokens.len());
    let start = edit.start.min(end);
    reverse_correction(&join_tokens(&tokens[start..end]), &edit.replacement)
}
