//! Black-box combination of grammatical error correction (GEC) systems.
//!
//! The crate learns, on an annotated development set, which groups of edits
//! to keep when merging the outputs of two systems. Edits are grouped by
//! error type and by agreement subset (proposed by system A only, by B only,
//! or by both), and the keep/drop decision for every group is chosen to
//! maximize corpus-level F-beta directly. The learned [`SelectionPolicy`]
//! is then replayed on unseen data.
//!
//! Around that core sit the pieces the pipeline needs:
//!
//! * [`edit`] and [`m2`]: the shared edit model and the M² annotation format.
//! * [`align`]: edit extraction from a source/corrected sentence pair.
//! * [`score`]: edit matching, precision/recall/F-beta, precision stability.
//! * [`combine`]: subset partition, statistics, the optimizer, policy replay.
//! * [`spellcheck`]: a frequency-dictionary spellchecker.
//! * [`synth`]: synthetic error generation by reversing corrections.
//!
//! Corpus-level loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`par`].

pub mod align;
pub mod combine;
pub mod edit;
mod error;
pub mod m2;
pub mod par;
pub mod score;
pub mod spellcheck;
pub mod synth;

pub use align::{align_tokens, extract_edits, AlignmentOp, EditTyper, OpKind};
pub use combine::{
    apply_policy, build_stats, combine_iterative, filter_system, optimize_selection,
    partition_pair, replay_iterative, train_pair, CellStats, CombineConfig, Partition, Rounding,
    SelectionPolicy, StatsTable, Subset, SystemOutput,
};
pub use edit::{
    apply_edits, reverse_edit, tokenize, AnnotatedSentence, Edit, EditKey, M2Corpus,
    ReverseAction, Token,
};
pub use error::{Error, Result};
pub use m2::{parse_m2, write_m2};
pub use score::{
    f_beta_from_counts, match_edits, precision_stability, score_corpus, CorpusScore, Score,
    TypeStats,
};
