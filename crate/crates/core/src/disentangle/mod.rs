//! Hitting sets, the Γ disentangling channel on ensemble inputs, and a
//! toy transcript amplifier.

mod amplifier;
mod ensemble;
mod gamma;
mod peaked;

pub use amplifier::{
    adversarial_messages, amplifier_base_game, binomial_upper_tail, honest_messages, swap_tests_needed,
    transcript_amplifier_toy, AmplifierParams, AmplifierReport, RoundMessage, SwapRecord, TableEntry, TranscriptState,
};
pub use ensemble::{EnsembleComponent, StateEnsemble, DENSE_DIM_CAP};
pub use gamma::{gamma_channel, DisentanglerParams, GammaReport, InnerDisentangler, ReferenceInner, PRUNE_WEIGHT};
pub use peaked::{hitting_set, hitting_set_exact, hitting_set_statistics, HittingSet, HittingStatistics, PeakedInstance};
