//! The agent contract and the two reference agents.
//!
//! An [`Agent`] is reset with the [`KnownWorld`] parameter book at the start
//! of every battle and then asked for one [`Action`] per observation. The
//! [`BaselineAgent`] trusts the book completely. The [`AwareAgent`] flies the
//! same policy until an observation contradicts the book, then reports the
//! novelty and adapts.

mod aware;
mod baseline;
pub mod planner;
mod striker;

use serde::{Deserialize, Serialize};

pub use aware::AwareAgent;
pub use baseline::BaselineAgent;

use crate::error::{Error, Result};
use crate::novelty::NoveltyLevel;
use crate::scenario::{Action, JetConfig, Observation, Rules, SamConfig, ScenarioConfig};

/// Kept clear of every assumed SAM envelope while planning, km.
pub const STANDOFF_MARGIN_KM: f64 = 2.0;
/// A launch seen this far outside every assumed envelope is a range surprise, km.
pub const ENVELOPE_SLACK_KM: f64 = 1.0;
/// Added to an observed launch distance when re-estimating a SAM's range, km.
pub const REESTIMATE_PAD_KM: f64 = 4.0;

/// Entity counts the agent was briefed to expect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Roster {
    pub sams: usize,
    pub red_fighters: usize,
    pub storage: usize,
}

/// The parameter book issued to the agent at battle start.
///
/// It is built from the battle's configuration before any novelty is
/// applied, so it describes the world the agent was trained for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownWorld {
    /// Assumed missile range of each SAM site, by index.
    pub sam_ranges: Vec<f64>,
    /// Assumed range for a SAM site the book does not list.
    pub default_sam_range: f64,
    pub roster: Roster,
    pub rules: Rules,
    /// Number of sensors feeding the jet, all nominal.
    pub sensors: usize,
    pub jet: JetConfig,
}

impl KnownWorld {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        KnownWorld {
            sam_ranges: config.sams.iter().map(|s| s.missile_range).collect(),
            default_sam_range: SamConfig::default().missile_range,
            roster: Roster {
                sams: config.sams.len(),
                red_fighters: 0,
                storage: 1,
            },
            rules: config.rules.clone(),
            sensors: config.sensors.len(),
            jet: config.jet.clone(),
        }
    }

    pub fn assumed_sam_range(&self, index: usize) -> f64 {
        self.sam_ranges.get(index).copied().unwrap_or(self.default_sam_range)
    }
}

impl Default for KnownWorld {
    fn default() -> Self {
        KnownWorld::from_config(&ScenarioConfig::default())
    }
}

/// An agent's claim that the world differs from its book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoveltyReport {
    pub detected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_guess: Option<NoveltyLevel>,
    pub description: String,
    pub tick: u64,
}

impl NoveltyReport {
    pub fn detected(tick: u64, level: NoveltyLevel, description: impl Into<String>) -> Self {
        NoveltyReport {
            detected: true,
            level_guess: Some(level),
            description: description.into(),
            tick,
        }
    }
}

/// Something that flies the blue jet.
///
/// `act` must be deterministic given the book passed to `reset` and the
/// sequence of observations since.
pub trait Agent: Send {
    fn name(&self) -> &str;
    fn reset(&mut self, known: &KnownWorld);
    fn act(&mut self, obs: &Observation) -> Action;
}

pub const AGENT_NAMES: [&str; 2] = ["baseline", "aware"];

/// A fresh reference agent by name.
pub fn make_agent(name: &str) -> Result<Box<dyn Agent>> {
    match name {
        "baseline" => Ok(Box::new(BaselineAgent::new())),
        "aware" => Ok(Box::new(AwareAgent::new())),
        other => Err(Error::UnknownAgent(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn book_from_default_config() {
        let k = KnownWorld::default();
        assert_eq!(k.sam_ranges, vec![50.0, 50.0]);
        assert_eq!(k.assumed_sam_range(7), 50.0);
        assert_eq!(k.roster.sams, 2);
        assert_eq!(k.sensors, 2);
    }

    #[test]
    fn agents_by_name() {
        assert_eq!(make_agent("baseline").unwrap().name(), "baseline");
        assert_eq!(make_agent("aware").unwrap().name(), "aware");
        assert!(matches!(make_agent("oracle"), Err(Error::UnknownAgent(_))));
    }

    #[test]
    fn report_json() {
        let r = NoveltyReport::detected(12, NoveltyLevel::Agents, "range");
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"detected":true,"level_guess":2,"description":"range","tick":12}"#);
        assert_eq!(serde_json::from_str::<NoveltyReport>(&s).unwrap(), r);
    }
}
