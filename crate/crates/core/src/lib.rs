//! Core algorithms for finding "cyborg" accounts: agents whose daily
//! bot-likelihood classification keeps flipping between bot and human.
//!
//! Everything here is pure computation over in-memory data and builds with
//! `#![no_std]` plus `alloc`. Reading archives, writing reports and the
//! command-line driver live in the `cyborg` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

mod error;

pub mod flips;
pub mod ingest;
pub mod network;
pub mod rng;
pub mod scoring;
pub mod stance;
pub mod stats;
pub mod synth;
pub mod topics;

pub use error::{CoreError, CoreResult};
pub use flips::{AgentClass, BotLabel, CyborgThresholds, FlipEvent, FlipStats, ScoreSeries};
pub use ingest::{DailyWindow, Day, PostRecord, ProfileSnapshot, Timestamp};
pub use network::CommGraph;
pub use scoring::{FeatureVector, ReferenceScorer, ScorerContract};
