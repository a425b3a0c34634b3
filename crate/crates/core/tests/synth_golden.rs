use gec_combine::synth::{self, ErrorDistribution, Pool};
use gec_combine::{apply_edits, parse_m2, tokenize, write_m2};

const TRAIN: &str = include_str!("fixtures/synth/train.m2");
const DIST: &str = include_str!("fixtures/synth/distribution.json");

fn pool() -> Pool {
    Pool::new(
        [
            "He goes home .",
            "She goes to the school .",
            "They are in the garden .",
            "We are friends .",
            "It is late .",
        ]
        .iter()
        .map(|s| tokenize(s))
        .collect(),
    )
    .unwrap()
}

#[test]
fn measured_distribution_matches_hand_count() {
    let measured = synth::measure_distribution(&parse_m2(TRAIN).unwrap(), 0);
    assert_eq!(measured, ErrorDistribution::from_json(DIST).unwrap());
    assert_eq!(measured.to_json(), DIST);
    assert!((measured.mean_count() - 1.2).abs() < 1e-12);
}

#[test]
fn generated_pairs_restore_clean_side() {
    let dist = ErrorDistribution::from_json(DIST).unwrap();
    let out = synth::generate_corpus(&pool(), &dist, 200, 11, 500).unwrap();
    assert_eq!(out.pairs.len(), 200);
    for p in &out.pairs {
        assert_eq!(apply_edits(&p.corrupted, &p.gold).unwrap(), p.clean);
        assert_eq!(p.gold.len(), p.draw.len());
        assert_eq!(p.clean, pool().sentences()[p.pool_index]);
    }
    assert_eq!(out.gold.len(), 200);
    assert!(out.report.hist_total_variation < 0.15);
}

#[test]
fn seed_determines_output() {
    let dist = ErrorDistribution::from_json(DIST).unwrap();
    let run = |seed| {
        let c = synth::generate_corpus(&pool(), &dist, 50, seed, 500).unwrap();
        (c.source_text(), c.target_text(), write_m2(&c.gold))
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn impossible_draw_is_reported() {
    let dist = ErrorDistribution::from_json(
        r#"{"per_sentence_hist": {"1": 1.0},
            "corrections": [{"source": "x", "replacement": "zebra", "etype": "R:NOUN", "prob": 1.0}]}"#,
    )
    .unwrap();
    let err = synth::generate_corpus(&pool(), &dist, 3, 0, 5).unwrap_err();
    assert!(err.to_string().contains("0 pairs generated"), "{err}");
}
