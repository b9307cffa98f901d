//! Correct a recorded utterance against the text it was supposed to say.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. **Recognize** — ingest timed transcripts from a forced aligner, or decode
//!    them from CTC logit matrices ([`ctc`]).
//! 2. **Align & plan** — align the recognized units against the target text at
//!    word or phone granularity ([`align`]) and derive an edit plan ([`plan`]).
//! 3. **Edit** — carry the plan out on the waveform by splicing donor segments
//!    with raised-cosine crossfades ([`splice`]).
//!
//! Supporting modules cover pronunciation dictionaries ([`lexicon`]), timed
//! transcript I/O ([`timeline`]), WAV and mel-cepstra analysis ([`audio`]),
//! corpus perturbation for experiments ([`perturb`]), objective metrics
//! ([`metrics`]), and deterministic synthetic corpora ([`synth`]).
//!
//! Every stage is deterministic: wherever randomness exists it flows from an
//! explicit seed. See the `examples/` directory for one runnable walk-through
//! per capability; the `retake` binary exposes the same operations as
//! subcommands for shell pipelines.

pub mod align;
pub mod audio;
pub mod commands;
pub mod corpus;
pub mod ctc;
pub mod error;
pub mod lexicon;
pub mod metrics;
pub mod perturb;
pub mod plan;
pub mod splice;
pub mod synth;
pub mod timeline;

pub use error::{Error, ErrorKind, Result};
