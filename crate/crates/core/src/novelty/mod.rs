//! Novelty ontology, specifications and the built-in Scenario Zero catalog.
//!
//! A novelty is a change to the world relative to what the agent was told to
//! expect. Every [`NoveltySpec`] belongs to exactly one of the eight
//! [`NoveltyLevel`]s and describes a single [`Mutation`] of a battle
//! configuration. [`apply_novelty`] resolves the mutation for one battle,
//! drawing any random values from the battle's own stream.

mod apply;
mod catalog;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use apply::{apply_novelty, AppliedNovelty, MAX_RESAMPLES};
pub use catalog::{catalog, lookup};

use crate::distributions::ValueSpec;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scenario::config::{EventKind, SamConfig, SamGoal, TerrainKind, ZoneScope};

/// The eight levels of the open-world novelty hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum NoveltyLevel {
    /// Non-volitional entities.
    Objects = 1,
    /// Volitional entities.
    Agents = 2,
    /// What an external agent can do.
    Actions = 3,
    /// Static relationships between entities.
    Relations = 4,
    /// Dynamic behaviour between entities.
    Interactions = 5,
    /// Global constraints on every entity.
    Rules = 6,
    /// External agent objectives.
    Goals = 7,
    /// State changes not caused by any volitional agent.
    Events = 8,
}

impl NoveltyLevel {
    pub const ALL: [NoveltyLevel; 8] = [
        NoveltyLevel::Objects,
        NoveltyLevel::Agents,
        NoveltyLevel::Actions,
        NoveltyLevel::Relations,
        NoveltyLevel::Interactions,
        NoveltyLevel::Rules,
        NoveltyLevel::Goals,
        NoveltyLevel::Events,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            NoveltyLevel::Objects => "Objects",
            NoveltyLevel::Agents => "Agents",
            NoveltyLevel::Actions => "Actions",
            NoveltyLevel::Relations => "Relations",
            NoveltyLevel::Interactions => "Interactions",
            NoveltyLevel::Rules => "Rules",
            NoveltyLevel::Goals => "Goals",
            NoveltyLevel::Events => "Events",
        }
    }
}

impl From<NoveltyLevel> for u8 {
    fn from(l: NoveltyLevel) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for NoveltyLevel {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        NoveltyLevel::ALL
            .get((n as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Config(format!("novelty level must be 1–8 (got {n})")))
    }
}

impl fmt::Display for NoveltyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{} {}", self.number(), self.name())
    }
}

/// Which part of a battle configuration a novelty touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TargetSelector {
    Jet,
    Storage,
    Sam(usize),
    AllSams,
    Sensor(usize),
    AllSensors,
    Rules,
    World,
}

impl fmt::Display for TargetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSelector::Jet => f.write_str("jet"),
            TargetSelector::Storage => f.write_str("storage"),
            TargetSelector::Sam(i) => write!(f, "sam[{i}]"),
            TargetSelector::AllSams => f.write_str("all-sams"),
            TargetSelector::Sensor(i) => write!(f, "sensor[{i}]"),
            TargetSelector::AllSensors => f.write_str("all-sensors"),
            TargetSelector::Rules => f.write_str("rules"),
            TargetSelector::World => f.write_str("world"),
        }
    }
}

impl FromStr for TargetSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jet" => TargetSelector::Jet,
            "storage" => TargetSelector::Storage,
            "all-sams" => TargetSelector::AllSams,
            "all-sensors" => TargetSelector::AllSensors,
            "rules" => TargetSelector::Rules,
            "world" => TargetSelector::World,
            _ => match crate::scenario::split_indexed(s) {
                Some(("sam", i)) => TargetSelector::Sam(i),
                Some(("sensor", i)) => TargetSelector::Sensor(i),
                _ => return Err(Error::Config(format!("unknown target selector `{s}`"))),
            },
        })
    }
}

impl From<TargetSelector> for String {
    fn from(t: TargetSelector) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TargetSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Reference point for placing a new entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Origin,
    Jet,
    Storage,
    Sam(usize),
}

/// Where an added entity goes: the anchor's position plus a sampled offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub anchor: Anchor,
    pub offset_x: ValueSpec,
    pub offset_y: ValueSpec,
}

impl Placement {
    pub fn fixed(anchor: Anchor, offset: Vec2) -> Self {
        Placement {
            anchor,
            offset_x: ValueSpec::constant(offset.x),
            offset_y: ValueSpec::constant(offset.y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntityTemplate {
    NoFireZone {
        radius: f64,
        applies_to: ZoneScope,
    },
    Terrain {
        kind: TerrainKind,
        radius: f64,
        sensor_attenuation: f64,
        speed_factor: f64,
    },
    Sam { config: SamConfig },
}

impl EntityTemplate {
    /// Whether the entity has goals and behaviour of its own.
    pub fn is_volitional(&self) -> bool {
        matches!(self, EntityTemplate::Sam { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    /// Overwrite a numeric parameter on every selected entity with a sampled value.
    SetParam { path: String, value: ValueSpec },
    AddEntity {
        entity: EntityTemplate,
        placement: Placement,
    },
    /// Set a boolean flag. With `count`, only that many of the selected
    /// entities (chosen at random, at least one) are affected.
    SetFlag {
        path: String,
        value: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<ValueSpec>,
    },
    ScheduleEvent { tick: ValueSpec, event: EventKind },
    SetGoal { goal: SamGoal },
}

impl Mutation {
    pub fn kind(&self) -> &'static str {
        match self {
            Mutation::SetParam { .. } => "set_param",
            Mutation::AddEntity { .. } => "add_entity",
            Mutation::SetFlag { .. } => "set_flag",
            Mutation::ScheduleEvent { .. } => "schedule_event",
            Mutation::SetGoal { .. } => "set_goal",
        }
    }
}

fn default_onset() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoveltySpec {
    pub id: String,
    pub level: NoveltyLevel,
    pub target: TargetSelector,
    pub mutation: Mutation,
    /// 1-based battle index from which the novelty is active.
    #[serde(default = "default_onset")]
    pub onset_battle: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

impl NoveltySpec {
    pub fn validate(&self) -> Result<()> {
        if self.onset_battle == 0 {
            return Err(Error::novelty(&self.id, "onset_battle must be ≥ 1"));
        }
        let check = |v: &ValueSpec| v.validate().map_err(|e| Error::novelty(&self.id, e.to_string()));
        match &self.mutation {
            Mutation::SetParam { value, .. } => check(value)?,
            Mutation::AddEntity { placement, .. } => {
                check(&placement.offset_x)?;
                check(&placement.offset_y)?;
            }
            Mutation::SetFlag { count: Some(c), .. } => check(c)?,
            Mutation::SetFlag { .. } | Mutation::SetGoal { .. } => {}
            Mutation::ScheduleEvent { tick, .. } => check(tick)?,
        }
        classify(self).map(|_| ())
    }
}

fn is_entity_target(t: TargetSelector) -> bool {
    matches!(
        t,
        TargetSelector::Jet
            | TargetSelector::Storage
            | TargetSelector::Sam(_)
            | TargetSelector::AllSams
            | TargetSelector::Sensor(_)
            | TargetSelector::AllSensors
    )
}

/// Check that a spec's declared level is consistent with what its mutation
/// does, returning the level when it is.
///
/// * a goal change is level 7 and only goal changes are level 7;
/// * a scheduled event is level 8 and only scheduled events are level 8;
/// * rule parameters and no-fire zones binding every entity are level 6;
/// * a new volitional entity is level 2;
/// * a new non-volitional entity scoped to blue is level 1 or 4;
/// * parameter and flag changes on entities are levels 2–5.
pub fn classify(spec: &NoveltySpec) -> Result<NoveltyLevel> {
    use NoveltyLevel::*;
    let level = spec.level;
    let fail = |rule: &str| Err(Error::novelty(&spec.id, format!("declared {level} violates: {rule}")));

    let allowed: &[NoveltyLevel] = match &spec.mutation {
        Mutation::SetGoal { .. } => {
            if !matches!(spec.target, TargetSelector::Sam(_) | TargetSelector::AllSams) {
                return fail("a goal change must target SAM sites");
            }
            &[Goals]
        }
        Mutation::ScheduleEvent { .. } => &[Events],
        Mutation::AddEntity { entity, .. } => match entity {
            EntityTemplate::Sam { .. } => &[Agents],
            EntityTemplate::NoFireZone {
                applies_to: ZoneScope::AllEntities,
                ..
            } => &[Rules],
            EntityTemplate::NoFireZone { .. } | EntityTemplate::Terrain { .. } => &[Objects, Relations],
        },
        Mutation::SetParam { .. } if spec.target == TargetSelector::Rules => &[Rules],
        Mutation::SetParam { .. } | Mutation::SetFlag { .. } if is_entity_target(spec.target) => {
            &[Agents, Actions, Relations, Interactions]
        }
        Mutation::SetParam { .. } | Mutation::SetFlag { .. } => {
            return fail("parameter and flag changes must target an entity or the rules");
        }
    };
    if allowed.contains(&level) {
        return Ok(level);
    }
    let rule = match &spec.mutation {
        Mutation::SetGoal { .. } => "a goal change must be level 7 (Goals)",
        Mutation::ScheduleEvent { .. } => "a scheduled event must be level 8 (Events)",
        Mutation::AddEntity { entity, .. } if entity.is_volitional() => {
            "a new volitional entity must be level 2 (Agents)"
        }
        Mutation::AddEntity {
            entity: EntityTemplate::NoFireZone {
                applies_to: ZoneScope::AllEntities,
                ..
            },
            ..
        } => "a constraint on all entities must be level 6 (Rules)",
        Mutation::AddEntity { .. } => "a new non-volitional entity must be level 1 (Objects) or 4 (Relations)",
        Mutation::SetParam { .. } if spec.target == TargetSelector::Rules => {
            "a rule parameter change must be level 6 (Rules)"
        }
        _ => "an entity parameter or flag change must be level 2–5",
    };
    fail(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    fn spec(level: u8, target: TargetSelector, mutation: Mutation) -> NoveltySpec {
        NoveltySpec {
            id: "t".into(),
            level: NoveltyLevel::try_from(level).unwrap(),
            target,
            mutation,
            onset_battle: 1,
            description: String::new(),
        }
    }

    fn zone(scope: ZoneScope) -> Mutation {
        Mutation::AddEntity {
            entity: EntityTemplate::NoFireZone {
                radius: 5.0,
                applies_to: scope,
            },
            placement: Placement::fixed(Anchor::Storage, Vec2::ZERO),
        }
    }

    #[test]
    fn level_numbers_and_names() {
        assert_eq!(NoveltyLevel::ALL.len(), 8);
        for (i, l) in NoveltyLevel::ALL.iter().enumerate() {
            assert_eq!(l.number() as usize, i + 1);
        }
        assert_eq!(NoveltyLevel::Actions.name(), "Actions");
        assert!(NoveltyLevel::try_from(0).is_err());
        assert!(NoveltyLevel::try_from(9).is_err());
        assert_eq!(serde_json::to_string(&NoveltyLevel::Goals).unwrap(), "7");
    }

    #[test]
    fn selectors_parse() {
        for s in ["jet", "storage", "sam[0]", "all-sams", "sensor[1]", "all-sensors", "rules", "world"] {
            assert_eq!(s.parse::<TargetSelector>().unwrap().to_string(), s);
        }
        assert!("sams".parse::<TargetSelector>().is_err());
    }

    #[test]
    fn classify_goal() {
        let goal = Mutation::SetGoal { goal: SamGoal::DestroyJet };
        assert_eq!(classify(&spec(7, TargetSelector::Sam(0), goal.clone())).unwrap(), NoveltyLevel::Goals);
        let err = classify(&spec(2, TargetSelector::Sam(0), goal)).unwrap_err();
        assert!(err.to_string().contains("level 7"), "{err}");
    }

    #[test]
    fn classify_zones() {
        assert_eq!(
            classify(&spec(1, TargetSelector::World, zone(ZoneScope::BlueOnly))).unwrap(),
            NoveltyLevel::Objects
        );
        assert!(classify(&spec(7, TargetSelector::World, zone(ZoneScope::BlueOnly))).is_err());
        assert!(classify(&spec(1, TargetSelector::World, zone(ZoneScope::AllEntities))).is_err());
        assert!(classify(&spec(6, TargetSelector::World, zone(ZoneScope::AllEntities))).is_ok());
    }

    #[test]
    fn classify_events_and_rules() {
        let ev = Mutation::ScheduleEvent {
            tick: ValueSpec::constant(10.0),
            event: EventKind::SpawnRedFighter {
                fighter: Default::default(),
            },
        };
        assert!(classify(&spec(8, TargetSelector::World, ev.clone())).is_ok());
        assert!(classify(&spec(1, TargetSelector::World, ev)).is_err());
        let rule = Mutation::SetParam {
            path: "global_fire_delay".into(),
            value: ValueSpec::Single(DistributionSpec::constant(3.0)),
        };
        assert!(classify(&spec(6, TargetSelector::Rules, rule.clone())).is_ok());
        assert!(classify(&spec(2, TargetSelector::Rules, rule)).is_err());
        let range = Mutation::SetParam {
            path: "missile_range".into(),
            value: ValueSpec::constant(60.0),
        };
        assert!(classify(&spec(2, TargetSelector::AllSams, range.clone())).is_ok());
        assert!(classify(&spec(6, TargetSelector::AllSams, range.clone())).is_err());
        assert!(classify(&spec(2, TargetSelector::World, range)).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = spec(7, TargetSelector::Sam(1), Mutation::SetGoal { goal: SamGoal::DestroyJet });
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"id":"t","level":7,"target":"sam[1]","mutation":{"op":"set_goal","goal":"destroy_jet"},"onset_battle":1}"#
        );
        assert_eq!(serde_json::from_str::<NoveltySpec>(&text).unwrap(), s);
    }
}
