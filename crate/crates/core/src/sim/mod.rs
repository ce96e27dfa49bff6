//! Monte Carlo estimation of tag and code error probabilities.
//!
//! Every trial draws from its own ChaCha stream keyed by the master seed and
//! the trial index, so sequential and parallel runs give identical counts.

mod decay;
mod estimate;
pub mod experiment;
mod record;
mod sampler;
mod trial;

pub use decay::{decay_fit, DecayEstimate, MIN_DECAY_POINTS};
pub use estimate::{
    estimate_code_errors, estimate_tag_errors, sample_messages, wilson_interval, CodeEstimate,
    Decomposition, ErrorEstimate, MessageCounts, Quantity, TagEstimate, DEFAULT_MESSAGE_SAMPLE,
    MIN_TAG_TRIALS, Z95,
};
pub use experiment::{run_experiment, run_experiment_config, ExperimentConfig, ExperimentOutput, ResultRow};
pub use record::{sequence_digest, TrialRecord};
pub use sampler::{trial_rng, AvcSampler, Transmission};
pub use trial::{replay_code_record, replay_tag_record, run_code_trial, run_tag_trial, CodeTrial, TagTrial};
