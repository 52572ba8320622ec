//! Scenario Zero: a blue strike jet tasked with destroying an ammo storage
//! site defended by SAM launchers.

mod battle;
pub mod config;
mod entity;
mod observe;
mod world;

use serde::{Deserialize, Serialize};

pub use battle::{run_battle, TraceRecord};
pub use config::*;
pub use entity::{EntityClass, EntityId};
pub(crate) use entity::split_indexed;
pub use observe::{observe, MissileWarning, Observation, Track, WARNING_RADIUS_KM};
pub use world::*;

use crate::agents::NoveltyReport;
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionStatus {
    Ongoing,
    Win,
    Abort,
    Fail,
}

impl MissionStatus {
    pub fn is_terminal(self) -> bool {
        self != MissionStatus::Ongoing
    }
}

/// The agent's control input for one tick.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Action {
    /// Fly toward this point; `None` holds position (or heads home once aborting).
    pub waypoint: Option<Vec2>,
    pub fire_at: Option<EntityId>,
    pub declare: Option<NoveltyReport>,
    /// Latches: once set the mission is being aborted for the rest of the battle.
    pub abort: bool,
}

impl Action {
    pub fn goto(p: Vec2) -> Self {
        Action {
            waypoint: Some(p),
            ..Action::default()
        }
    }
}
