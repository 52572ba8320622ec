use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::config::{Falsify, SensorStatus, TerrainKind};
use super::entity::{EntityClass, EntityId};
use super::world::{Sensor, WorldState};
use crate::agents::KnownWorld;
use crate::geometry::Vec2;

/// Inbound missiles farther than this from the jet are not reported, km.
pub const WARNING_RADIUS_KM: f64 = 150.0;

/// One sensed entity as reported by one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: EntityId,
    pub class: EntityClass,
    pub pos: Vec2,
    /// Assumed missile range from the known-world book, never the true value.
    pub missile_range: Option<f64>,
    pub sensor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissileWarning {
    pub missile: u64,
    /// Radians counter-clockwise from +x, as seen from the jet.
    pub bearing: f64,
}

/// What the agent flying the jet is allowed to know at one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub tick: u64,
    pub position: Vec2,
    pub weapons_remaining: u32,
    pub alive: bool,
    pub tracks: Vec<Track>,
    pub missile_warnings: Vec<MissileWarning>,
    pub known_world: Arc<KnownWorld>,
}

impl Observation {
    pub fn track(&self, id: EntityId) -> Option<&Track> {
        self.tracks.iter().find(|t| t.id == id)
    }

    pub fn tracks_of(&self, class: EntityClass) -> impl Iterator<Item = &Track> {
        self.tracks.iter().filter(move |t| t.class == class)
    }
}

/// Ground-truth entity reports before any sensor filtering.
fn truth(state: &WorldState) -> Vec<(EntityId, Vec2)> {
    let mut out = Vec::new();
    if !state.storage.destroyed {
        out.push((EntityId::Storage, state.storage.pos));
    }
    out.extend(state.sams.iter().filter(|s| s.alive).map(|s| (s.id, s.pos)));
    out.extend(
        state
            .red_fighters
            .iter()
            .filter(|f| f.alive)
            .map(|f| (f.id, f.pos)),
    );
    out
}

fn hidden_by_terrain(state: &WorldState, sensor: &Sensor, id: EntityId, pos: Vec2) -> bool {
    state
        .terrain
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind == TerrainKind::ViewLimiting && t.contains(pos))
        .any(|(k, t)| {
            let label = format!("view/{}/{}/{}/{}", state.tick, sensor.id, id, k);
            state.rng.derive(&label).chance(t.sensor_attenuation)
        })
}

/// Sensor picture for the jet. Pure: terrain attenuation rolls come from a
/// stream derived from the world seed, tick, sensor and entity.
pub fn observe(state: &WorldState) -> Observation {
    let known = &state.known_world;
    let reports = truth(state);
    let mut tracks: Vec<Track> = Vec::new();
    for sensor in &state.sensors {
        if sensor.status == SensorStatus::Dead {
            continue;
        }
        for &(id, true_pos) in &reports {
            if hidden_by_terrain(state, sensor, id, true_pos) {
                continue;
            }
            let mut pos = true_pos;
            if sensor.status == SensorStatus::Compromised {
                match sensor.falsify {
                    Falsify::Offset { dx, dy } => pos = pos + Vec2::new(dx, dy),
                    Falsify::OmitSams if id.class() == EntityClass::Sam => continue,
                    Falsify::OmitSams => {}
                }
            }
            if tracks.iter().any(|t| t.id == id && t.pos == pos) {
                continue;
            }
            let missile_range = match id {
                EntityId::Sam(i) => Some(known.assumed_sam_range(i)),
                _ => None,
            };
            tracks.push(Track {
                id,
                class: id.class(),
                pos,
                missile_range,
                sensor: sensor.id,
            });
        }
    }
    tracks.sort_by_key(|t| (t.id, t.sensor));

    let jet = state.jet.pos;
    let missile_warnings = state
        .missiles
        .iter()
        .filter(|m| m.target == EntityId::Jet && m.pos.dist(jet) <= WARNING_RADIUS_KM)
        .map(|m| MissileWarning {
            missile: m.id,
            bearing: jet.bearing_to(m.pos),
        })
        .collect();

    Observation {
        tick: state.tick,
        position: jet,
        weapons_remaining: state.jet.weapons_remaining,
        alive: state.jet.alive,
        tracks,
        missile_warnings,
        known_world: Arc::clone(known),
    }
}
