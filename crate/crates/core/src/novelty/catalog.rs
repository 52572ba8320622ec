use std::sync::OnceLock;

use super::{Anchor, EntityTemplate, Mutation, NoveltyLevel, NoveltySpec, Placement, TargetSelector};
use crate::distributions::{DistributionSpec, TieredSpec, ValueSpec};
use crate::geometry::Vec2;
use crate::scenario::config::{EventKind, RedFighterConfig, SamConfig, SamGoal, TerrainKind, ZoneScope};

fn tiered(easy: DistributionSpec, medium: DistributionSpec, hard: DistributionSpec) -> ValueSpec {
    ValueSpec::Tiered(TieredSpec { easy, medium, hard })
}

fn normal(m: f64, s: f64) -> DistributionSpec {
    DistributionSpec::normal(m, s)
}

fn uniform(lo: f64, hi: f64) -> DistributionSpec {
    DistributionSpec::uniform(lo, hi)
}

fn konst(v: f64) -> DistributionSpec {
    DistributionSpec::constant(v)
}

fn entry(id: &str, level: NoveltyLevel, target: TargetSelector, mutation: Mutation, description: &str) -> NoveltySpec {
    NoveltySpec {
        id: id.into(),
        level,
        target,
        mutation,
        onset_battle: 1,
        description: description.into(),
    }
}

fn flag(path: &str) -> Mutation {
    Mutation::SetFlag {
        path: path.into(),
        value: true,
        count: None,
    }
}

fn build() -> Vec<NoveltySpec> {
    use NoveltyLevel::*;
    use TargetSelector as T;
    vec![
        // Objects
        entry(
            "no_fire_town",
            Objects,
            T::World,
            Mutation::AddEntity {
                entity: EntityTemplate::NoFireZone {
                    radius: 5.0,
                    applies_to: ZoneScope::BlueOnly,
                },
                placement: Placement {
                    anchor: Anchor::Storage,
                    offset_x: tiered(konst(15.0), konst(8.0), konst(0.0)),
                    offset_y: ValueSpec::constant(0.0),
                },
            },
            "civilian town protected from blue fire appears next to (hard: on top of) the storage site",
        ),
        entry(
            "view_terrain",
            Objects,
            T::World,
            Mutation::AddEntity {
                entity: EntityTemplate::Terrain {
                    kind: TerrainKind::ViewLimiting,
                    radius: 12.0,
                    sensor_attenuation: 0.8,
                    speed_factor: 1.0,
                },
                placement: Placement {
                    anchor: Anchor::Sam(0),
                    offset_x: tiered(uniform(-12.0, 12.0), uniform(-6.0, 6.0), konst(0.0)),
                    offset_y: tiered(uniform(-12.0, 12.0), uniform(-6.0, 6.0), konst(0.0)),
                },
            },
            "view-limiting terrain near a SAM site intermittently hides it from sensors",
        ),
        // Agents
        entry(
            "sam_range_up",
            Agents,
            T::AllSams,
            Mutation::SetParam {
                path: "missile_range".into(),
                value: ValueSpec::Tiered(TieredSpec::missile_range()),
            },
            "SAM missile range drawn from N(50,2) / N(55,2.5) / N(60,3) km",
        ),
        entry(
            "sam_speed_up",
            Agents,
            T::AllSams,
            Mutation::SetParam {
                path: "missile_speed".into(),
                value: tiered(normal(1.3, 0.05), normal(1.6, 0.1), normal(2.0, 0.1)),
            },
            "faster SAM warheads",
        ),
        entry(
            "sam_warheads_up",
            Agents,
            T::AllSams,
            Mutation::SetParam {
                path: "warheads".into(),
                value: tiered(
                    DistributionSpec::DiscreteUniform { values: vec![6.0, 7.0] },
                    DistributionSpec::DiscreteUniform { values: vec![8.0, 9.0, 10.0] },
                    DistributionSpec::DiscreteUniform { values: vec![12.0, 14.0, 16.0] },
                ),
            },
            "more warheads per SAM site",
        ),
        entry(
            "storage_defender",
            Agents,
            T::Storage,
            flag("defender"),
            "ammo storage gains a point-defence weapon",
        ),
        entry(
            "extra_sam",
            Agents,
            T::World,
            Mutation::AddEntity {
                entity: EntityTemplate::Sam {
                    config: SamConfig::default(),
                },
                placement: Placement {
                    anchor: Anchor::Storage,
                    offset_x: tiered(normal(40.0, 2.0), normal(0.0, 2.0), normal(-25.0, 2.0)),
                    offset_y: tiered(normal(0.0, 2.0), normal(40.0, 2.0), normal(0.0, 2.0)),
                },
            },
            "an additional SAM site around the storage",
        ),
        // Actions
        entry("sam_mobile", Actions, T::Sam(0), flag("mobile"), "a SAM site becomes mobile"),
        entry("sam_decoy", Actions, T::Sam(1), flag("decoy"), "a SAM site becomes a decoy that never fires"),
        // Relations
        entry(
            "sam_relocate",
            Relations,
            T::Sam(0),
            Mutation::SetParam {
                path: "pos.x".into(),
                value: tiered(normal(110.0, 2.0), normal(120.0, 2.0), normal(130.0, 2.0)),
            },
            "a SAM site moves in beside the protected storage site",
        ),
        entry(
            "sensor_dead",
            Relations,
            T::AllSensors,
            Mutation::SetFlag {
                path: "dead".into(),
                value: true,
                count: Some(tiered(
                    DistributionSpec::Poisson { lambda: 0.5 },
                    DistributionSpec::Poisson { lambda: 1.0 },
                    DistributionSpec::Poisson { lambda: 2.0 },
                )),
            },
            "a Poisson-distributed number of sensors (at least one) stop reporting",
        ),
        // Interactions
        entry(
            "survivability_up",
            Interactions,
            T::Storage,
            Mutation::SetParam {
                path: "survivability_p".into(),
                value: tiered(uniform(0.2, 0.4), uniform(0.4, 0.6), uniform(0.6, 0.8)),
            },
            "ammo storage survives a hit with the sampled probability",
        ),
        entry(
            "sam_pursuit",
            Interactions,
            T::Sam(0),
            flag("pursuit"),
            "a SAM site manoeuvres to close on the jet",
        ),
        entry(
            "sensor_false",
            Interactions,
            T::Sensor(0),
            Mutation::SetFlag {
                path: "compromised".into(),
                value: true,
                count: None,
            },
            "a sensor is compromised and reports falsified positions",
        ),
        // Rules
        entry(
            "global_no_fire",
            Rules,
            T::World,
            Mutation::AddEntity {
                entity: EntityTemplate::NoFireZone {
                    radius: 8.0,
                    applies_to: ZoneScope::AllEntities,
                },
                placement: Placement {
                    anchor: Anchor::Storage,
                    offset_x: tiered(konst(-30.0), konst(-12.0), konst(0.0)),
                    offset_y: ValueSpec::constant(0.0),
                },
            },
            "a no-fire zone binding every entity",
        ),
        entry(
            "engagement_window",
            Rules,
            T::Rules,
            Mutation::SetParam {
                path: "engagement_window.start".into(),
                value: tiered(uniform(100.0, 300.0), uniform(600.0, 900.0), uniform(1200.0, 1500.0)),
            },
            "weapons may only be released after the sampled tick",
        ),
        entry(
            "global_fire_delay",
            Rules,
            T::Rules,
            Mutation::SetParam {
                path: "global_fire_delay".into(),
                value: tiered(uniform(2.0, 5.0), uniform(5.0, 15.0), uniform(15.0, 40.0)),
            },
            "every fire order executes after the sampled delay",
        ),
        // Goals
        entry(
            "sam_goal_destroy_jet",
            Goals,
            T::Sam(0),
            Mutation::SetGoal {
                goal: SamGoal::DestroyJet,
            },
            "a SAM site abandons the storage to hunt the jet",
        ),
        // Events
        entry(
            "red_fighter_event",
            Events,
            T::World,
            Mutation::ScheduleEvent {
                tick: tiered(uniform(1200.0, 1500.0), uniform(800.0, 1100.0), uniform(400.0, 700.0)),
                event: EventKind::SpawnRedFighter {
                    fighter: RedFighterConfig {
                        pos: Vec2::new(150.0, 60.0),
                        ..RedFighterConfig::default()
                    },
                },
            },
            "a red fighter appears in the middle of the battle",
        ),
    ]
}

/// The built-in Scenario Zero novelties, at least one per hierarchy level.
pub fn catalog() -> &'static [NoveltySpec] {
    static CATALOG: OnceLock<Vec<NoveltySpec>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

pub fn lookup(id: &str) -> Option<NoveltySpec> {
    catalog().iter().find(|s| s.id == id).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DifficultyTier;
    use crate::novelty::{apply_novelty, classify};
    use crate::rng::RngState;
    use crate::scenario::config::ScenarioConfig;

    #[test]
    fn covers_every_level() {
        for level in NoveltyLevel::ALL {
            assert!(catalog().iter().any(|s| s.level == level), "no novelty at {level}");
        }
    }

    #[test]
    fn lookups() {
        assert_eq!(lookup("sam_range_up").unwrap().level, NoveltyLevel::Agents);
        assert!(lookup("nonexistent").is_none());
    }

    #[test]
    fn ids_unique() {
        let mut ids: Vec<&str> = catalog().iter().map(|s| s.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), catalog().len());
    }

    #[test]
    fn every_entry_classifies_and_applies() {
        let base = ScenarioConfig::default();
        let mut rng = RngState::from_seed(5);
        for spec in catalog() {
            spec.validate().unwrap();
            assert_eq!(classify(spec).unwrap(), spec.level);
            for tier in DifficultyTier::ALL {
                let (out, applied) = apply_novelty(&base, spec, tier, 1, &mut rng).unwrap();
                assert_ne!(out, base, "{} changed nothing at {tier}", spec.id);
                assert_eq!(applied.id, spec.id);
            }
        }
    }

    #[test]
    fn range_tiers_match_reference_values() {
        let spec = lookup("sam_range_up").unwrap();
        let Mutation::SetParam { value: ValueSpec::Tiered(t), .. } = spec.mutation else {
            panic!("unexpected mutation");
        };
        assert_eq!(t.easy, DistributionSpec::normal(50.0, 2.0));
        assert_eq!(t.medium, DistributionSpec::normal(55.0, 2.5));
        assert_eq!(t.hard, DistributionSpec::normal(60.0, 3.0));
    }
}
