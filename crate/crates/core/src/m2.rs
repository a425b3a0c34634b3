//! Reader and writer for the M² annotation format.
//!
//! A file is a sequence of blocks separated by blank lines. Each block is a
//! source line `S tok tok ...` followed by edit lines
//!
//! ```text
//! A start end|||type|||replacement|||REQUIRED|||-NONE-|||annotator
//! ```
//!
//! `A -1 -1|||noop|||...` marks a sentence with no corrections.

use crate::edit::{tokenize, AnnotatedSentence, Edit, M2Corpus, Token, FIELD_SEP, NONE_MARKER};
use crate::error::{Error, Result};

const NOOP_LINE: &str = "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0";

struct Block {
    line: usize,
    tokens: Vec<Token>,
    edits: Vec<Edit>,
}

impl Block {
    fn finish(self) -> Result<AnnotatedSentence> {
        let line = self.line;
        AnnotatedSentence::new(self.tokens, self.edits).map_err(|e| parse_err(line, e.to_string()))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_m2(text: &str) -> Result<M2Corpus> {
    let mut sentences = Vec::new();
    let mut current: Option<Block> = None;

    for (idx, raw) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if let Some(block) = current.take() {
                sentences.push(block.finish()?);
            }
            continue;
        }
        if line == "S" || line.starts_with("S ") {
            if let Some(block) = current.take() {
                sentences.push(block.finish()?);
            }
            current = Some(Block {
                line: lineno,
                tokens: tokenize(&line[1..]),
                edits: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix("A ") {
            let block = current
                .as_mut()
                .ok_or_else(|| parse_err(lineno, "edit line before any source line"))?;
            if let Some(edit) = parse_edit_line(rest, block.tokens.len(), lineno)? {
                if let Some(other) = block
                    .edits
                    .iter()
                    .find(|o| o.annotator == edit.annotator && o.overlaps(&edit))
                {
                    return Err(parse_err(
                        lineno,
                        format!("edit {edit} overlaps {other} of the same annotator"),
                    ));
                }
                block.edits.push(edit);
            }
        } else {
            return Err(parse_err(lineno, format!("unrecognized line {line:?}")));
        }
    }
    if let Some(block) = current.take() {
        sentences.push(block.finish()?);
    }
    Ok(M2Corpus::new(sentences))
}

fn parse_edit_line(rest: &str, sentence_len: usize, lineno: usize) -> Result<Option<Edit>> {
    let fields: Vec<&str> = rest.split(FIELD_SEP).collect();
    if fields.len() != 6 {
        return Err(parse_err(
            lineno,
            format!("expected 6 '|||'-separated fields, found {}", fields.len()),
        ));
    }
    let offsets: Vec<&str> = fields[0].split_whitespace().collect();
    if offsets.len() != 2 {
        return Err(parse_err(lineno, format!("bad span {:?}", fields[0])));
    }
    let parse_offset = |s: &str| {
        s.parse::<i64>()
            .map_err(|_| parse_err(lineno, format!("non-integer offset {s:?}")))
    };
    let (start, end) = (parse_offset(offsets[0])?, parse_offset(offsets[1])?);
    if start == -1 && end == -1 {
        return Ok(None);
    }
    if start < 0 || end < 0 {
        return Err(parse_err(lineno, format!("negative offset in {:?}", fields[0])));
    }
    let (start, end) = (start as usize, end as usize);
    if start > end || end > sentence_len {
        return Err(parse_err(
            lineno,
            format!("span [{start}, {end}) outside sentence of {sentence_len} tokens"),
        ));
    }
    let annotator = fields[5]
        .trim()
        .parse::<u32>()
        .map_err(|_| parse_err(lineno, format!("bad annotator id {:?}", fields[5])))?;
    let replacement = match fields[2].trim() {
        NONE_MARKER => "",
        other => other,
    };
    Edit::new(start, end, fields[1], replacement, annotator)
        .map(Some)
        .map_err(|e| parse_err(lineno, e.to_string()))
}

pub fn write_m2(corpus: &M2Corpus) -> String {
    let mut out = String::new();
    for sentence in &corpus.sentences {
        write_sentence(&mut out, sentence);
    }
    out
}

fn write_sentence(out: &mut String, sentence: &AnnotatedSentence) {
    out.push('S');
    for t in sentence.tokens() {
        out.push(' ');
        out.push_str(t);
    }
    out.push('\n');
    if sentence.edits().is_empty() {
        out.push_str(NOOP_LINE);
        out.push('\n');
    }
    for e in sentence.edits() {
        let replacement = if e.replacement.is_empty() {
            NONE_MARKER
        } else {
            &e.replacement
        };
        out.push_str(&format!(
            "A {} {}|||{}|||{}|||REQUIRED|||-NONE-|||{}\n",
            e.start, e.end, e.etype, replacement, e.annotator
        ));
    }
    out.push('\n');
}
