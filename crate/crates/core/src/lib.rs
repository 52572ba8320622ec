//! A deterministic harness for evaluating how agents cope with open-world
//! novelty in a simulated strike mission.
//!
//! The pieces fit together as follows. A [`campaign::CampaignConfig`] is
//! compiled into [`campaign::BattlePlan`]s, one per trial and battle, with
//! placement variations sampled and any novelties from [`novelty`] applied
//! from their onset battle on. [`scenario::run_battle`] flies an
//! [`agents::Agent`] through each plan, [`metrics`] scores the outcomes, and
//! [`runner`] ties it all together on disk.

pub mod agents;
pub mod campaign;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod novelty;
pub mod rng;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
