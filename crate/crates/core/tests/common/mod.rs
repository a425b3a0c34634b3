//! Random corpora for property tests. Generators build edits directly from
//! spans and never go through the crate's own alignment code.
#![allow(dead_code)]

use gec_combine::{tokenize, AnnotatedSentence, Edit, M2Corpus, SystemOutput, Token};
use rand::seq::SliceRandom;
use rand::Rng;

pub const WORDS: [&str; 16] = [
    "the", "a", "cat", "dog", "is", "are", "on", "in", "mat", "went", "go", "goes", ".", ",",
    "The", "home",
];

pub const TYPES: [&str; 6] = ["R:DET", "M:DET", "U:PREP", "R:VERB", "R:NOUN", "R:OTHER"];

pub fn random_tokens(rng: &mut impl Rng, len: usize) -> Vec<Token> {
    let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
    tokenize(&words.join(" "))
}

fn random_replacement(rng: &mut impl Rng, allow_empty: bool) -> String {
    let n = if allow_empty { rng.gen_range(0..=2) } else { rng.gen_range(1..=2) };
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A non-overlapping edit set for one annotator over `n` tokens.
pub fn random_edits(rng: &mut impl Rng, n: usize, annotator: u32, density: f64) -> Vec<Edit> {
    let mut edits = Vec::new();
    let mut pos = 0;
    while pos <= n {
        if rng.gen_bool(density / 3.0) {
            let r = random_replacement(rng, false);
            edits.push(Edit::new(pos, pos, *TYPES.choose(rng).unwrap(), &r, annotator).unwrap());
        }
        if pos < n && rng.gen_bool(density) {
            let len = rng.gen_range(1..=2.min(n - pos));
            let r = random_replacement(rng, true);
            edits.push(Edit::new(pos, pos + len, *TYPES.choose(rng).unwrap(), &r, annotator).unwrap());
            pos += len;
        } else {
            pos += 1;
        }
    }
    edits
}

pub fn random_corpus(rng: &mut impl Rng, sentences: usize, annotators: u32) -> M2Corpus {
    M2Corpus::new(
        (0..sentences)
            .map(|_| {
                let len = rng.gen_range(0..8);
                let tokens = random_tokens(rng, len);
                let edits = (0..annotators)
                    .flat_map(|a| random_edits(rng, len, a, 0.3))
                    .collect();
                AnnotatedSentence::new(tokens, edits).unwrap()
            })
            .collect(),
    )
}

/// Greedily keeps the edits of `candidates` that do not overlap earlier ones.
pub fn non_overlapping(candidates: Vec<Edit>) -> Vec<Edit> {
    let mut kept: Vec<Edit> = Vec::new();
    for e in candidates {
        if !kept.iter().any(|k| k.overlaps(&e)) {
            kept.push(e);
        }
    }
    kept
}

/// Gold plus `k` systems that copy some gold edits and add noise of their own.
pub struct Fixture {
    pub gold: M2Corpus,
    pub systems: Vec<SystemOutput>,
}

pub fn random_fixture(rng: &mut impl Rng, sentences: usize, k: usize) -> Fixture {
    let mut gold = Vec::with_capacity(sentences);
    let mut outputs: Vec<Vec<AnnotatedSentence>> = vec![Vec::new(); k];
    for _ in 0..sentences {
        let len = rng.gen_range(3..10);
        let tokens = random_tokens(rng, len);
        let gold_edits = random_edits(rng, len, 0, 0.3);
        for out in outputs.iter_mut() {
            let recall = rng.gen_range(0.2..0.9);
            let mut cands: Vec<Edit> = gold_edits
                .iter()
                .filter(|_| rng.gen_bool(recall))
                .cloned()
                .collect();
            cands.extend(random_edits(rng, len, 0, 0.15));
            cands.shuffle(rng);
            out.push(AnnotatedSentence::new(tokens.clone(), non_overlapping(cands)).unwrap());
        }
        gold.push(AnnotatedSentence::new(tokens, gold_edits).unwrap());
    }
    Fixture {
        gold: M2Corpus::new(gold),
        systems: outputs
            .into_iter()
            .enumerate()
            .map(|(i, s)| SystemOutput::new(format!("s{i}"), &M2Corpus::new(s)))
            .collect(),
    }
}
