//! Bee-colony clustering (BeeCup) for dual-radio mobile ad-hoc networks,
//! LEACH and SEP baselines, and a seeded, replicated simulation harness.

pub mod abc;
pub mod baselines;
pub mod beecup;
pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod membership;
pub mod metrics;
pub mod mobility;
pub mod rng;
pub mod world;

pub use config::{Protocol, ScenarioConfig};
pub use error::{Error, Result};
