use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg32;

use super::optimize::{optimize_selection, Rounding};
use super::partition::{partition_pair, split_sentence, Subset, SystemOutput};
use super::policy::{PolicyEntry, SelectionPolicy, UnseenDefaults};
use super::stats::{build_stats, StatsTable};
use crate::edit::{Edit, M2Corpus};
use crate::error::{Error, Result};
use crate::par;
use crate::score::{score_corpus, CorpusScore};

#[derive(Clone, Debug, PartialEq)]
pub struct CombineConfig {
    pub beta: f64,
    /// Gold annotator used for statistics and scoring.
    pub annotator: u32,
    pub min_samples: u64,
    pub rounding: Rounding,
    /// Seed for fractional keep probabilities.
    pub seed: u64,
    /// Recorded in policy metadata.
    pub dev_name: String,
}

impl Default for CombineConfig {
    fn default() -> Self {
        CombineConfig {
            beta: 0.5,
            annotator: 0,
            min_samples: 2,
            rounding: Rounding::Round,
            seed: 0,
            dev_name: String::new(),
        }
    }
}

/// Which candidate policy [`train_pair`] kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyChoice {
    Optimized,
    /// Reproduces system A: the optimized policy scored below A on dev.
    KeepA,
    /// Reproduces system B.
    KeepB,
}

impl PolicyChoice {
    fn label(self) -> &'static str {
        match self {
            PolicyChoice::Optimized => "optimized",
            PolicyChoice::KeepA => "keep_a",
            PolicyChoice::KeepB => "keep_b",
        }
    }
}

/// Result of training on one system pair.
#[derive(Clone, Debug)]
pub struct PairTraining {
    pub policy: SelectionPolicy,
    pub choice: PolicyChoice,
    pub stats: StatsTable,
    /// The policy applied to the training pair.
    pub output: SystemOutput,
    pub score_a: CorpusScore,
    pub score_b: CorpusScore,
    pub score_combined: CorpusScore,
}

/// Per-sentence generator for fractional keep decisions: PCG-XSH-RR with
/// 64-bit state, seeded from `seed`, one stream per sentence index.
fn sentence_rng(seed: u64, index: usize) -> Pcg32 {
    Pcg32::new(seed ^ 0x853c_49e6_748f_ea9b, index as u64)
}

/// Keeps the highest-priority edit of every overlapping group: subset
/// Both, then OnlyA, then OnlyB; then lower start, shorter span, smaller
/// replacement.
fn arbitrate(mut candidates: Vec<(&Edit, Subset)>) -> Vec<Edit> {
    candidates.sort_by(|(x, sx), (y, sy)| {
        (sx.priority(), x.start, x.end - x.start, &x.replacement)
            .cmp(&(sy.priority(), y.start, y.end - y.start, &y.replacement))
    });
    let mut kept: Vec<Edit> = Vec::with_capacity(candidates.len());
    for (e, _) in candidates {
        if !kept.iter().any(|k| k.overlaps(e)) {
            kept.push(Edit {
                annotator: 0,
                ..e.clone()
            });
        }
    }
    kept
}

/// Merges two systems under a learned policy.
///
/// Each edit is kept with the probability of its (type, subset) cell;
/// cells absent from the policy use its unseen defaults. Only fractional
/// probabilities consume randomness, so a 0/1 policy ignores `seed`.
pub fn apply_policy(
    a: &SystemOutput,
    b: &SystemOutput,
    policy: &SelectionPolicy,
    seed: u64,
) -> Result<M2Corpus> {
    a.corpus.check_aligned(&b.corpus)?;
    let lookup = policy.lookup();
    let sentences = par::map_indexed(&a.corpus.sentences, |i, sa| {
        let sb = &b.corpus.sentences[i];
        let mut rng: Option<Pcg32> = None;
        let candidates: Vec<(&Edit, Subset)> = split_sentence(sa.edits(), sb.edits())
            .into_iter()
            .filter(|(e, subset)| {
                let s = lookup.get(&e.etype, *subset);
                if s >= 1.0 {
                    true
                } else if s <= 0.0 {
                    false
                } else {
                    rng.get_or_insert_with(|| sentence_rng(seed, i)).gen::<f64>() < s
                }
            })
            .collect();
        sa.with_edits(arbitrate(candidates))
            .expect("arbitrated edits do not overlap")
    });
    Ok(M2Corpus::new(sentences))
}

/// Policy that reproduces one operand exactly: every shared edit plus every
/// edit proposed only by that operand.
fn operand_policy(stats: &StatsTable, choice: PolicyChoice, cfg: &CombineConfig) -> SelectionPolicy {
    let own = match choice {
        PolicyChoice::KeepB => Subset::OnlyB,
        _ => Subset::OnlyA,
    };
    let keep = |subset: Subset| if subset == Subset::Both || subset == own { 1.0 } else { 0.0 };
    let entries = stats
        .cells
        .iter()
        .map(|c| PolicyEntry {
            etype: c.etype.clone(),
            subset: c.subset,
            s: keep(c.subset),
            tp: c.tp,
            fp: c.fp,
            precision: c.precision(),
        })
        .collect();
    let mut policy = SelectionPolicy::new(cfg.beta, cfg.min_samples, cfg.rounding, entries);
    policy.unseen = UnseenDefaults {
        only_a: keep(Subset::OnlyA),
        both: keep(Subset::Both),
        only_b: keep(Subset::OnlyB),
    };
    policy
}

/// Learns a policy for the pair `(a, b)` on `gold` and applies it.
///
/// After optimizing, the applied policy is scored on the same data. Overlap
/// arbitration can cost true positives that the optimizer counted, so if
/// the merged output scores below either input, the policy reproducing the
/// better input is returned instead. The combined dev-set F is therefore
/// never below `max(F(a), F(b))`.
pub fn train_pair(
    a: &SystemOutput,
    b: &SystemOutput,
    gold: &M2Corpus,
    cfg: &CombineConfig,
) -> Result<PairTraining> {
    if cfg.beta.is_nan() || cfg.beta <= 0.0 {
        return Err(Error::InvalidInput(format!("beta {} must be > 0", cfg.beta)));
    }
    let parts = partition_pair(a, b)?;
    let stats = build_stats(&parts, gold, cfg.annotator)?;
    let optimized = optimize_selection(&stats, cfg.beta, cfg.min_samples, cfg.rounding);
    let objective_f = optimized.metadata.created.objective_f;

    let score_a = score_corpus(&a.corpus, gold, cfg.beta, cfg.annotator)?;
    let score_b = score_corpus(&b.corpus, gold, cfg.beta, cfg.annotator)?;
    let mut policy = optimized;
    let mut choice = PolicyChoice::Optimized;
    let mut merged = apply_policy(a, b, &policy, cfg.seed)?;
    let mut score_combined = score_corpus(&merged, gold, cfg.beta, cfg.annotator)?;

    let best_operand = score_a.f_beta().max(score_b.f_beta());
    if score_combined.f_beta() < best_operand {
        choice = if score_a.f_beta() >= score_b.f_beta() {
            PolicyChoice::KeepA
        } else {
            PolicyChoice::KeepB
        };
        policy = operand_policy(&stats, choice, cfg);
        merged = apply_policy(a, b, &policy, cfg.seed)?;
        score_combined = score_corpus(&merged, gold, cfg.beta, cfg.annotator)?;
    }

    let created = &mut policy.metadata.created;
    created.dev_sentences = gold.len();
    created.gold_total = stats.gold_total;
    created.objective_f = objective_f;
    created.dev_f = score_combined.f_beta();
    created.selection = choice.label().to_owned();
    policy.metadata.dev_name = cfg.dev_name.clone();
    policy.metadata.system_names = vec![a.name.clone(), b.name.clone()];

    Ok(PairTraining {
        policy,
        choice,
        stats,
        output: SystemOutput {
            name: format!("{}+{}", a.name, b.name),
            corpus: merged,
        },
        score_a,
        score_b,
        score_combined,
    })
}

#[derive(Clone, Debug)]
pub struct IterativeCombination {
    pub output: SystemOutput,
    pub steps: Vec<PairTraining>,
}

impl IterativeCombination {
    pub fn policies(&self) -> Vec<SelectionPolicy> {
        self.steps.iter().map(|s| s.policy.clone()).collect()
    }
}

fn step_seed(seed: u64, step: usize) -> u64 {
    seed.wrapping_add(step as u64)
}

/// Left fold over `systems`: combine the first two, then combine the result
/// with the third, and so on. Every step trains a fresh policy on `gold`.
pub fn combine_iterative(
    systems: &[SystemOutput],
    gold: &M2Corpus,
    cfg: &CombineConfig,
) -> Result<IterativeCombination> {
    if systems.len() < 2 {
        return Err(Error::TooFewSystems(systems.len()));
    }
    let mut current = systems[0].clone();
    let mut steps = Vec::with_capacity(systems.len() - 1);
    for (k, next) in systems[1..].iter().enumerate() {
        let step_cfg = CombineConfig {
            seed: step_seed(cfg.seed, k),
            ..cfg.clone()
        };
        let step = train_pair(&current, next, gold, &step_cfg)?;
        current = step.output.clone();
        steps.push(step);
    }
    Ok(IterativeCombination {
        output: current,
        steps,
    })
}

/// Replays the policies of [`combine_iterative`] on new outputs of the same
/// systems, in the same order.
pub fn replay_iterative(
    systems: &[SystemOutput],
    policies: &[SelectionPolicy],
    seed: u64,
) -> Result<SystemOutput> {
    if systems.len() < 2 {
        return Err(Error::TooFewSystems(systems.len()));
    }
    if policies.len() != systems.len() - 1 {
        return Err(Error::InvalidInput(format!(
            "{} systems need {} policies, got {}",
            systems.len(),
            systems.len() - 1,
            policies.len()
        )));
    }
    let mut current = systems[0].clone();
    for (k, (next, policy)) in systems[1..].iter().zip(policies).enumerate() {
        let corpus = apply_policy(&current, next, policy, step_seed(seed, k))?;
        current = SystemOutput {
            name: format!("{}+{}", current.name, next.name),
            corpus,
        };
    }
    Ok(current)
}

/// Drops the error types on which a single system hurts F: a pair
/// combination with a system that proposes nothing.
pub fn filter_system(
    a: &SystemOutput,
    gold: &M2Corpus,
    cfg: &CombineConfig,
) -> Result<PairTraining> {
    let none = SystemOutput::empty_like("none", &a.corpus);
    train_pair(a, &none, gold, cfg)
}

/// Seeded random split of `n` sentence indices. Returns `(train, held_out)`
/// with `round(n · fraction)` held out; both lists ascending.
pub fn holdout_split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "holdout fraction {fraction} must lie in (0, 1)"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut Pcg32::seed_from_u64(seed));
    let held = ((n as f64) * fraction).round() as usize;
    let mut test = idx[..held].to_vec();
    let mut train = idx[held..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}
