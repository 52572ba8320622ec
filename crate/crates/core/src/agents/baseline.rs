use super::striker::Striker;
use super::{Agent, KnownWorld};
use crate::scenario::{Action, Observation};

/// Flies the strike exactly as briefed. It plans around the assumed SAM
/// envelopes, fires once in weapon range and heads home when out of
/// weapons. It never reports novelty and never aborts.
#[derive(Debug, Clone, Default)]
pub struct BaselineAgent {
    striker: Striker,
}

impl BaselineAgent {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Agent for BaselineAgent {
    fn name(&self) -> &str {
        "baseline"
    }

    fn reset(&mut self, known: &KnownWorld) {
        self.striker = Striker::new(known);
    }

    fn act(&mut self, obs: &Observation) -> Action {
        self.striker.remember(obs);
        self.striker.decide(obs)
    }
}
