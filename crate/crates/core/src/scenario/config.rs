//! Resolved battle configuration and the Scenario Zero reference layout.
//!
//! Every field has a default, so a configuration document only needs to name
//! what differs from the reference layout. A resolved configuration carries
//! concrete numbers only; distributions are sampled by the campaign module
//! before a configuration reaches the simulator.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Half-width of the square play area centred on the origin, km.
pub const PLAY_AREA_HALF_WIDTH_KM: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamGoal {
    #[default]
    DefendTarget,
    DestroyJet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JetConfig {
    pub pos: Vec2,
    pub base_pos: Vec2,
    /// km per tick
    pub speed_max: f64,
    pub weapon_range: f64,
    pub weapons: u32,
    /// Probability that a missile intercept does not kill the jet.
    pub survivability_p: f64,
}

impl Default for JetConfig {
    fn default() -> Self {
        JetConfig {
            pos: Vec2::ZERO,
            base_pos: Vec2::ZERO,
            speed_max: 0.3,
            weapon_range: 20.0,
            weapons: 2,
            survivability_p: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamConfig {
    pub pos: Vec2,
    /// Launch envelope and maximum missile flight distance, km.
    pub missile_range: f64,
    pub missile_speed: f64,
    pub warheads: u32,
    pub reload_ticks: u64,
    pub kill_prob: f64,
    pub survivability_p: f64,
    pub mobile: bool,
    /// Manoeuvres toward the jet with a long leash.
    pub pursuit: bool,
    /// Ground speed used whenever the site relocates, km per tick.
    pub move_speed: f64,
    pub decoy: bool,
    pub fire_delay: u64,
    pub goal: SamGoal,
}

impl Default for SamConfig {
    fn default() -> Self {
        SamConfig {
            pos: Vec2::new(100.0, 30.0),
            missile_range: 50.0,
            missile_speed: 1.0,
            warheads: 4,
            reload_ticks: 20,
            kill_prob: 0.7,
            survivability_p: 0.0,
            mobile: false,
            pursuit: false,
            move_speed: 0.1,
            decoy: false,
            fire_delay: 0,
            goal: SamGoal::DefendTarget,
        }
    }
}

impl SamConfig {
    pub fn at(pos: Vec2) -> Self {
        SamConfig {
            pos,
            ..SamConfig::default()
        }
    }
}

/// Point-defence weapon co-located with the ammo storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefenderConfig {
    pub range: f64,
    pub kill_prob: f64,
    pub missile_speed: f64,
    pub warheads: u32,
    pub reload_ticks: u64,
}

impl Default for DefenderConfig {
    fn default() -> Self {
        DefenderConfig {
            range: 25.0,
            kill_prob: 0.7,
            missile_speed: 1.0,
            warheads: 4,
            reload_ticks: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageConfig {
    pub pos: Vec2,
    /// Probability that a hit does not destroy the storage.
    pub survivability_p: f64,
    pub defender: Option<DefenderConfig>,
}

impl Default for StorageConfig {
    fn default() -> Self {
        StorageConfig {
            pos: Vec2::new(150.0, 0.0),
            survivability_p: 0.0,
            defender: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneScope {
    #[default]
    BlueOnly,
    AllEntities,
}

/// Targets inside the zone may not be engaged by the entities it applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoFireZone {
    pub center: Vec2,
    pub radius: f64,
    pub applies_to: ZoneScope,
}

impl Default for NoFireZone {
    fn default() -> Self {
        NoFireZone {
            center: Vec2::ZERO,
            radius: 5.0,
            applies_to: ZoneScope::BlueOnly,
        }
    }
}

impl NoFireZone {
    pub fn contains(&self, p: Vec2) -> bool {
        self.center.dist(p) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    #[default]
    ViewLimiting,
    Arduous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerrainPatch {
    pub center: Vec2,
    pub radius: f64,
    pub kind: TerrainKind,
    /// Per-tick probability that an entity inside the patch is hidden from a sensor.
    pub sensor_attenuation: f64,
    /// Multiplier on jet speed inside the patch.
    pub speed_factor: f64,
}

impl Default for TerrainPatch {
    fn default() -> Self {
        TerrainPatch {
            center: Vec2::ZERO,
            radius: 10.0,
            kind: TerrainKind::ViewLimiting,
            sensor_attenuation: 0.5,
            speed_factor: 1.0,
        }
    }
}

impl TerrainPatch {
    pub fn contains(&self, p: Vec2) -> bool {
        self.center.dist(p) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorStatus {
    #[default]
    Nominal,
    Dead,
    Compromised,
}

/// How a compromised sensor corrupts the tracks it reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Falsify {
    Offset { dx: f64, dy: f64 },
    OmitSams,
}

impl Default for Falsify {
    fn default() -> Self {
        Falsify::Offset { dx: 10.0, dy: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub status: SensorStatus,
    pub falsify: Falsify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rules {
    /// Inclusive `[start, end]` tick window outside which nobody may fire.
    pub engagement_window: Option<[u64; 2]>,
    pub global_fire_delay: u64,
    pub time_limit: u64,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            engagement_window: None,
            global_fire_delay: 0,
            time_limit: 2000,
        }
    }
}

impl Rules {
    pub fn window_open(&self, tick: u64) -> bool {
        match self.engagement_window {
            None => true,
            Some([start, end]) => (start..=end).contains(&tick),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RedFighterConfig {
    pub pos: Vec2,
    pub speed: f64,
    pub missile_range: f64,
    pub missile_speed: f64,
    pub warheads: u32,
    pub reload_ticks: u64,
    pub kill_prob: f64,
}

impl Default for RedFighterConfig {
    fn default() -> Self {
        RedFighterConfig {
            pos: Vec2::new(150.0, 60.0),
            speed: 0.4,
            missile_range: 30.0,
            missile_speed: 1.2,
            warheads: 2,
            reload_ticks: 30,
            kill_prob: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    SpawnRedFighter { fighter: RedFighterConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledEvent {
    pub tick: u64,
    pub event: EventKind,
}

/// A fully resolved battle configuration. The default is the Scenario Zero
/// reference layout: jet and base at the origin, ammo storage at (150, 0),
/// SAM sites at (100, ±30) with a 50 km missile range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub jet: JetConfig,
    pub sams: Vec<SamConfig>,
    pub storage: StorageConfig,
    pub zones: Vec<NoFireZone>,
    pub terrain: Vec<TerrainPatch>,
    pub sensors: Vec<SensorConfig>,
    pub rules: Rules,
    pub events: Vec<ScheduledEvent>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            jet: JetConfig::default(),
            sams: vec![
                SamConfig::at(Vec2::new(100.0, 30.0)),
                SamConfig::at(Vec2::new(100.0, -30.0)),
            ],
            storage: StorageConfig::default(),
            zones: Vec::new(),
            terrain: Vec::new(),
            sensors: vec![SensorConfig::default(), SensorConfig::default()],
            rules: Rules::default(),
            events: Vec::new(),
        }
    }
}

fn check_prob(errs: &mut Vec<String>, name: &str, p: f64) {
    if !(0.0..=1.0).contains(&p) {
        errs.push(format!("{name} must be in [0,1] (got {p})"));
    }
}

fn check_positive(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errs.push(format!("{name} must be > 0 (got {v})"));
    }
}

fn check_nonneg(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v.is_finite() && v >= 0.0) {
        errs.push(format!("{name} must be ≥ 0 (got {v})"));
    }
}

fn check_pos(errs: &mut Vec<String>, name: &str, p: Vec2) {
    if !p.is_finite() {
        errs.push(format!("{name} must be finite"));
    } else if p.x.abs() > PLAY_AREA_HALF_WIDTH_KM || p.y.abs() > PLAY_AREA_HALF_WIDTH_KM {
        errs.push(format!(
            "{name} ({}, {}) lies outside the play area",
            p.x, p.y
        ));
    }
}

impl ScenarioConfig {
    /// Every violated constraint, named by field path. Empty when valid.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut e = Vec::new();
        let j = &self.jet;
        check_pos(&mut e, "jet.pos", j.pos);
        check_pos(&mut e, "jet.base_pos", j.base_pos);
        check_positive(&mut e, "jet.speed_max", j.speed_max);
        check_positive(&mut e, "jet.weapon_range", j.weapon_range);
        check_prob(&mut e, "jet.survivability_p", j.survivability_p);

        for (i, s) in self.sams.iter().enumerate() {
            let n = |f: &str| format!("sams[{i}].{f}");
            check_pos(&mut e, &n("pos"), s.pos);
            check_positive(&mut e, &n("missile_range"), s.missile_range);
            check_positive(&mut e, &n("missile_speed"), s.missile_speed);
            check_prob(&mut e, &n("kill_prob"), s.kill_prob);
            check_prob(&mut e, &n("survivability_p"), s.survivability_p);
            check_nonneg(&mut e, &n("move_speed"), s.move_speed);
        }

        let st = &self.storage;
        check_pos(&mut e, "storage.pos", st.pos);
        check_prob(&mut e, "storage.survivability_p", st.survivability_p);
        if let Some(d) = &st.defender {
            check_positive(&mut e, "storage.defender.range", d.range);
            check_prob(&mut e, "storage.defender.kill_prob", d.kill_prob);
            check_positive(&mut e, "storage.defender.missile_speed", d.missile_speed);
        }

        for (i, z) in self.zones.iter().enumerate() {
            check_pos(&mut e, &format!("zones[{i}].center"), z.center);
            check_positive(&mut e, &format!("zones[{i}].radius"), z.radius);
        }
        for (i, t) in self.terrain.iter().enumerate() {
            check_pos(&mut e, &format!("terrain[{i}].center"), t.center);
            check_positive(&mut e, &format!("terrain[{i}].radius"), t.radius);
            check_prob(&mut e, &format!("terrain[{i}].sensor_attenuation"), t.sensor_attenuation);
            if !(t.speed_factor > 0.0 && t.speed_factor <= 1.0) {
                e.push(format!(
                    "terrain[{i}].speed_factor must be in (0,1] (got {})",
                    t.speed_factor
                ));
            }
        }

        let r = &self.rules;
        if r.time_limit == 0 {
            e.push("rules.time_limit must be > 0".into());
        }
        if let Some([start, end]) = r.engagement_window {
            if start > end {
                e.push(format!(
                    "rules.engagement_window start {start} exceeds end {end}"
                ));
            }
        }

        for (i, ev) in self.events.iter().enumerate() {
            let EventKind::SpawnRedFighter { fighter: f } = &ev.event;
            let n = |fld: &str| format!("events[{i}].fighter.{fld}");
            check_pos(&mut e, &n("pos"), f.pos);
            check_positive(&mut e, &n("speed"), f.speed);
            check_positive(&mut e, &n("missile_range"), f.missile_range);
            check_positive(&mut e, &n("missile_speed"), f.missile_speed);
            check_prob(&mut e, &n("kill_prob"), f.kill_prob);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert!(ScenarioConfig::default().validation_errors().is_empty());
    }

    #[test]
    fn empty_document_is_reference_layout() {
        let c: ScenarioConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ScenarioConfig::default());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"jets": {}}"#).is_err());
        assert!(serde_json::from_str::<SamConfig>(r#"{"missile_rnage": 3}"#).is_err());
    }

    #[test]
    fn errors_name_fields() {
        let mut c = ScenarioConfig::default();
        c.sams[1].missile_range = -5.0;
        c.rules.time_limit = 0;
        c.jet.pos = Vec2::new(5000.0, 0.0);
        let errs = c.validation_errors();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("sams[1].missile_range")));
        assert!(errs.iter().any(|e| e.starts_with("rules.time_limit")));
        assert!(errs.iter().any(|e| e.starts_with("jet.pos")));
    }
}
