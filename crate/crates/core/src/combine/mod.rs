//! Learning which edits to keep when merging two systems.
//!
//! Training on a development set:
//!
//! 1. [`partition_pair`] splits the edits of systems A and B into the
//!    agreement subsets [`Subset::OnlyA`], [`Subset::OnlyB`] and
//!    [`Subset::Both`].
//! 2. [`build_stats`] scores every subset against the gold annotation and
//!    tabulates TP/FP per (error type, subset) cell.
//! 3. [`optimize_selection`] chooses a keep probability per cell that
//!    maximizes corpus F-beta.
//!
//! [`apply_policy`] replays the learned [`SelectionPolicy`] on new system
//! outputs. [`combine_iterative`] folds any number of systems pairwise and
//! [`filter_system`] is the one-system special case.

mod optimize;
mod partition;
mod policy;
mod stats;
mod train;

pub use optimize::{objective, optimize_cells, optimize_selection, CellDecision, Rounding};
pub use partition::{partition_pair, split_sentence, Partition, Subset, SystemOutput};
pub use policy::{CreationStats, PolicyEntry, PolicyMetadata, SelectionPolicy, UnseenDefaults};
pub use stats::{build_stats, CellStats, StatsTable};
pub use train::{
    apply_policy, combine_iterative, filter_system, holdout_split, replay_iterative, train_pair,
    CombineConfig, IterativeCombination, PairTraining, PolicyChoice,
};
