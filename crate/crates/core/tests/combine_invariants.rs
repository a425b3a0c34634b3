mod common;

use gec_combine::combine::PolicyChoice;
use gec_combine::{
    apply_policy, combine_iterative, par, replay_iterative, score_corpus, train_pair,
    CombineConfig, Rounding, SelectionPolicy,
};
use rand::SeedableRng;
use rand_pcg::Pcg64;

#[test]
fn policy_json_round_trips_and_replays() {
    let mut rng = Pcg64::seed_from_u64(1);
    let fx = common::random_fixture(&mut rng, 40, 2);
    let (a, b) = (&fx.systems[0], &fx.systems[1]);
    let t = train_pair(a, b, &fx.gold, &CombineConfig::default()).unwrap();
    let reloaded = SelectionPolicy::from_json(&t.policy.to_json()).unwrap();
    assert_eq!(reloaded, t.policy);
    assert_eq!(apply_policy(a, b, &reloaded, 0).unwrap(), t.output.corpus);
}

#[test]
fn replay_matches_training() {
    let mut rng = Pcg64::seed_from_u64(2);
    let fx = common::random_fixture(&mut rng, 30, 3);
    let cfg = CombineConfig { rounding: Rounding::Sample, seed: 9, ..CombineConfig::default() };
    let trained = combine_iterative(&fx.systems, &fx.gold, &cfg).unwrap();
    let replayed = replay_iterative(&fx.systems, &trained.policies(), cfg.seed).unwrap();
    assert_eq!(replayed.corpus, trained.output.corpus);
}

#[test]
fn sequential_and_parallel_agree() {
    let mut rng = Pcg64::seed_from_u64(3);
    let fx = common::random_fixture(&mut rng, 60, 2);
    let cfg = CombineConfig { rounding: Rounding::Sample, ..CombineConfig::default() };
    let run = || train_pair(&fx.systems[0], &fx.systems[1], &fx.gold, &cfg).unwrap();
    par::set_sequential(true);
    let seq = run();
    par::set_sequential(false);
    let parallel = run();
    assert_eq!(seq.policy, parallel.policy);
    assert_eq!(seq.output.corpus, parallel.output.corpus);
}

#[test]
fn recorded_scores_match_rescoring() {
    let mut rng = Pcg64::seed_from_u64(4);
    for _ in 0..20 {
        let fx = common::random_fixture(&mut rng, 20, 2);
        let t = train_pair(&fx.systems[0], &fx.systems[1], &fx.gold, &CombineConfig::default())
            .unwrap();
        let rescored = score_corpus(&t.output.corpus, &fx.gold, 0.5, 0).unwrap();
        assert_eq!(rescored.f_beta(), t.score_combined.f_beta());
        assert_eq!(t.policy.metadata.created.dev_f, t.score_combined.f_beta());
        let label = t.policy.metadata.created.selection.as_str();
        let expected = match t.choice {
            PolicyChoice::Optimized => "optimized",
            PolicyChoice::KeepA => "keep_a",
            PolicyChoice::KeepB => "keep_b",
        };
        assert_eq!(label, expected);
    }
}
