use serde::{Deserialize, Serialize};

use super::{Anchor, EntityTemplate, Mutation, NoveltyLevel, NoveltySpec, TargetSelector};
use crate::distributions::{DifficultyTier, ValueSpec};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::rng::RngState;
use crate::scenario::config::*;

/// Extra draws allowed for a value that violates a physical constraint
/// before it is clamped to the nearest valid value.
pub const MAX_RESAMPLES: usize = 8;

/// Ground truth for one novelty in one battle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedNovelty {
    pub id: String,
    pub level: NoveltyLevel,
    pub tier: DifficultyTier,
    pub battle: u32,
    /// Every concrete value drawn, in draw order.
    pub values: Vec<f64>,
    pub affected: Vec<String>,
    /// At least one draw was clamped after exhausting resamples.
    pub clamped: bool,
}

/// Physical constraint on a resolved value.
#[derive(Debug, Clone, Copy)]
enum Bound {
    Positive,
    NonNeg,
    Prob,
    /// Rounded to the nearest integer, inclusive range.
    Int { lo: f64, hi: f64 },
    Coord,
}

/// Smallest value substituted for a strictly positive parameter.
const MIN_POSITIVE: f64 = 1e-3;

impl Bound {
    fn int_from(lo: u64) -> Self {
        Bound::Int {
            lo: lo as f64,
            hi: f64::INFINITY,
        }
    }

    fn normalize(self, v: f64) -> f64 {
        match self {
            Bound::Int { .. } => v.round(),
            _ => v,
        }
    }

    fn valid(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Bound::Positive => v > 0.0,
                Bound::NonNeg => v >= 0.0,
                Bound::Prob => (0.0..=1.0).contains(&v),
                Bound::Int { lo, hi } => v >= lo && v <= hi,
                Bound::Coord => v.abs() <= PLAY_AREA_HALF_WIDTH_KM,
            }
    }

    fn clamp(self, v: f64) -> f64 {
        match self {
            Bound::Positive => v.max(MIN_POSITIVE),
            Bound::NonNeg => v.max(0.0),
            Bound::Prob => v.clamp(0.0, 1.0),
            Bound::Int { lo, hi } => v.clamp(lo, hi),
            Bound::Coord => v.clamp(-PLAY_AREA_HALF_WIDTH_KM, PLAY_AREA_HALF_WIDTH_KM),
        }
    }
}

struct Resolver<'a> {
    tier: DifficultyTier,
    rng: &'a mut RngState,
    values: Vec<f64>,
    clamped: bool,
}

impl Resolver<'_> {
    fn draw(&mut self, value: &ValueSpec, bound: Bound) -> Result<f64> {
        for _ in 0..=MAX_RESAMPLES {
            let v = bound.normalize(value.sample(self.tier, self.rng)?);
            if bound.valid(v) {
                self.values.push(v);
                return Ok(v);
            }
        }
        let last = bound.normalize(value.sample(self.tier, self.rng)?);
        let v = bound.clamp(last);
        self.clamped = true;
        self.values.push(v);
        Ok(v)
    }

    /// `k` distinct indices out of `0..n`, by partial Fisher–Yates.
    fn choose(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + (self.rng.next_f64() * (n - i) as f64) as usize;
            idx.swap(i, j.min(n - 1));
        }
        let mut chosen = idx[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}

fn sam_indices(config: &ScenarioConfig, target: TargetSelector, id: &str) -> Result<Vec<usize>> {
    match target {
        TargetSelector::Sam(i) if i < config.sams.len() => Ok(vec![i]),
        TargetSelector::Sam(i) => Err(Error::novelty(id, format!("target sam[{i}] does not exist"))),
        TargetSelector::AllSams if !config.sams.is_empty() => Ok((0..config.sams.len()).collect()),
        TargetSelector::AllSams => Err(Error::novelty(id, "target all-sams matches no SAM site")),
        other => Err(Error::novelty(id, format!("target {other} is not a SAM selector"))),
    }
}

fn sensor_indices(config: &ScenarioConfig, target: TargetSelector, id: &str) -> Result<Vec<usize>> {
    match target {
        TargetSelector::Sensor(i) if i < config.sensors.len() => Ok(vec![i]),
        TargetSelector::Sensor(i) => Err(Error::novelty(id, format!("target sensor[{i}] does not exist"))),
        TargetSelector::AllSensors if !config.sensors.is_empty() => Ok((0..config.sensors.len()).collect()),
        TargetSelector::AllSensors => Err(Error::novelty(id, "target all-sensors matches no sensor")),
        other => Err(Error::novelty(id, format!("target {other} is not a sensor selector"))),
    }
}

fn sam_param(path: &str) -> Option<Bound> {
    Some(match path {
        "missile_range" | "missile_speed" => Bound::Positive,
        "warheads" | "reload_ticks" | "fire_delay" => Bound::int_from(0),
        "kill_prob" | "survivability_p" => Bound::Prob,
        "move_speed" => Bound::NonNeg,
        "pos.x" | "pos.y" => Bound::Coord,
        _ => return None,
    })
}

fn set_sam_param(sam: &mut SamConfig, path: &str, v: f64) {
    match path {
        "missile_range" => sam.missile_range = v,
        "missile_speed" => sam.missile_speed = v,
        "warheads" => sam.warheads = v as u32,
        "reload_ticks" => sam.reload_ticks = v as u64,
        "fire_delay" => sam.fire_delay = v as u64,
        "kill_prob" => sam.kill_prob = v,
        "survivability_p" => sam.survivability_p = v,
        "move_speed" => sam.move_speed = v,
        "pos.x" => sam.pos.x = v,
        "pos.y" => sam.pos.y = v,
        _ => unreachable!("path checked by sam_param"),
    }
}

fn storage_param(path: &str) -> Option<Bound> {
    Some(match path {
        "survivability_p" | "defender.kill_prob" => Bound::Prob,
        "pos.x" | "pos.y" => Bound::Coord,
        "defender.range" => Bound::Positive,
        _ => return None,
    })
}

fn set_storage_param(st: &mut StorageConfig, path: &str, v: f64) {
    match path {
        "survivability_p" => st.survivability_p = v,
        "pos.x" => st.pos.x = v,
        "pos.y" => st.pos.y = v,
        "defender.range" => st.defender.get_or_insert_with(DefenderConfig::default).range = v,
        "defender.kill_prob" => st.defender.get_or_insert_with(DefenderConfig::default).kill_prob = v,
        _ => unreachable!("path checked by storage_param"),
    }
}

fn jet_param(path: &str) -> Option<Bound> {
    Some(match path {
        "speed_max" | "weapon_range" => Bound::Positive,
        "weapons" => Bound::int_from(0),
        "survivability_p" => Bound::Prob,
        _ => return None,
    })
}

fn set_jet_param(jet: &mut JetConfig, path: &str, v: f64) {
    match path {
        "speed_max" => jet.speed_max = v,
        "weapon_range" => jet.weapon_range = v,
        "weapons" => jet.weapons = v as u32,
        "survivability_p" => jet.survivability_p = v,
        _ => unreachable!("path checked by jet_param"),
    }
}

fn rules_param(path: &str) -> Option<Bound> {
    Some(match path {
        "global_fire_delay" | "engagement_window.start" | "engagement_window.end" => Bound::int_from(0),
        "time_limit" => Bound::int_from(1),
        _ => return None,
    })
}

fn set_rules_param(rules: &mut Rules, path: &str, v: f64) {
    let t = v as u64;
    match path {
        "global_fire_delay" => rules.global_fire_delay = t,
        "time_limit" => rules.time_limit = t,
        "engagement_window.start" => {
            let end = rules.engagement_window.map_or(rules.time_limit, |[_, e]| e);
            rules.engagement_window = Some([t, end.max(t)]);
        }
        "engagement_window.end" => {
            let start = rules.engagement_window.map_or(0, |[s, _]| s);
            rules.engagement_window = Some([start.min(t), t]);
        }
        _ => unreachable!("path checked by rules_param"),
    }
}

fn anchor_pos(config: &ScenarioConfig, anchor: Anchor, id: &str) -> Result<Vec2> {
    Ok(match anchor {
        Anchor::Origin => Vec2::ZERO,
        Anchor::Jet => config.jet.pos,
        Anchor::Storage => config.storage.pos,
        Anchor::Sam(i) => config
            .sams
            .get(i)
            .map(|s| s.pos)
            .ok_or_else(|| Error::novelty(id, format!("anchor sam[{i}] does not exist")))?,
    })
}

/// Resolve `spec` at `tier` for one battle and return the mutated
/// configuration together with its ground-truth record.
///
/// Only the fields reachable from the spec's target and mutation path
/// change. Random values come from `rng`; a value that breaks a physical
/// constraint is redrawn up to [`MAX_RESAMPLES`] times and then clamped.
pub fn apply_novelty(
    config: &ScenarioConfig,
    spec: &NoveltySpec,
    tier: DifficultyTier,
    battle_index: u32,
    rng: &mut RngState,
) -> Result<(ScenarioConfig, AppliedNovelty)> {
    let id = spec.id.as_str();
    if battle_index < spec.onset_battle {
        return Err(Error::novelty(
            id,
            format!("battle {battle_index} precedes onset battle {}", spec.onset_battle),
        ));
    }
    let mut out = config.clone();
    let mut r = Resolver {
        tier,
        rng,
        values: Vec::new(),
        clamped: false,
    };
    let mut affected = Vec::new();

    match &spec.mutation {
        Mutation::SetParam { path, value } => match spec.target {
            TargetSelector::Sam(_) | TargetSelector::AllSams => {
                let bound = sam_param(path)
                    .ok_or_else(|| Error::novelty(id, format!("SAM sites have no parameter `{path}`")))?;
                for i in sam_indices(config, spec.target, id)? {
                    let v = r.draw(value, bound)?;
                    set_sam_param(&mut out.sams[i], path, v);
                    affected.push(format!("sam[{i}]"));
                }
            }
            TargetSelector::Storage => {
                let bound = storage_param(path)
                    .ok_or_else(|| Error::novelty(id, format!("storage has no parameter `{path}`")))?;
                let v = r.draw(value, bound)?;
                set_storage_param(&mut out.storage, path, v);
                affected.push("storage".into());
            }
            TargetSelector::Jet => {
                let bound =
                    jet_param(path).ok_or_else(|| Error::novelty(id, format!("jet has no parameter `{path}`")))?;
                let v = r.draw(value, bound)?;
                set_jet_param(&mut out.jet, path, v);
                affected.push("jet".into());
            }
            TargetSelector::Rules => {
                let bound =
                    rules_param(path).ok_or_else(|| Error::novelty(id, format!("rules have no parameter `{path}`")))?;
                let v = r.draw(value, bound)?;
                set_rules_param(&mut out.rules, path, v);
                affected.push("rules".into());
            }
            other => return Err(Error::novelty(id, format!("cannot set parameters on {other}"))),
        },

        Mutation::SetFlag { path, value, count } => {
            let mut targets: Vec<(String, usize)> = match spec.target {
                TargetSelector::Sam(_) | TargetSelector::AllSams => {
                    if !matches!(path.as_str(), "mobile" | "pursuit" | "decoy") {
                        return Err(Error::novelty(id, format!("SAM sites have no flag `{path}`")));
                    }
                    sam_indices(config, spec.target, id)?
                        .into_iter()
                        .map(|i| (format!("sam[{i}]"), i))
                        .collect()
                }
                TargetSelector::Sensor(_) | TargetSelector::AllSensors => {
                    if !matches!(path.as_str(), "dead" | "compromised") {
                        return Err(Error::novelty(id, format!("sensors have no flag `{path}`")));
                    }
                    sensor_indices(config, spec.target, id)?
                        .into_iter()
                        .map(|i| (format!("sensor[{i}]"), i))
                        .collect()
                }
                TargetSelector::Storage => {
                    if path != "defender" {
                        return Err(Error::novelty(id, format!("storage has no flag `{path}`")));
                    }
                    vec![("storage".into(), 0)]
                }
                other => return Err(Error::novelty(id, format!("cannot set flags on {other}"))),
            };
            if let Some(count) = count {
                let n = targets.len();
                let k = r.draw(
                    count,
                    Bound::Int {
                        lo: 1.0,
                        hi: n as f64,
                    },
                )? as usize;
                let keep = r.choose(n, k);
                targets = keep.into_iter().map(|i| targets[i].clone()).collect();
            }
            for (name, i) in targets {
                match spec.target {
                    TargetSelector::Sam(_) | TargetSelector::AllSams => {
                        let sam = &mut out.sams[i];
                        match path.as_str() {
                            "mobile" => sam.mobile = *value,
                            "pursuit" => sam.pursuit = *value,
                            _ => sam.decoy = *value,
                        }
                    }
                    TargetSelector::Sensor(_) | TargetSelector::AllSensors => {
                        let status = match (path.as_str(), value) {
                            (_, false) => SensorStatus::Nominal,
                            ("dead", true) => SensorStatus::Dead,
                            _ => SensorStatus::Compromised,
                        };
                        out.sensors[i].status = status;
                    }
                    _ => {
                        out.storage.defender = value.then(|| {
                            config
                                .storage
                                .defender
                                .clone()
                                .unwrap_or_default()
                        });
                    }
                }
                affected.push(name);
            }
        }

        Mutation::AddEntity { entity, placement } => {
            if spec.target != TargetSelector::World {
                return Err(Error::novelty(id, "new entities must target `world`"));
            }
            let anchor = anchor_pos(config, placement.anchor, id)?;
            let dx = r.draw(&placement.offset_x, Bound::Coord)?;
            let dy = r.draw(&placement.offset_y, Bound::Coord)?;
            let raw = anchor + Vec2::new(dx, dy);
            let pos = Vec2::new(Bound::Coord.clamp(raw.x), Bound::Coord.clamp(raw.y));
            if pos != raw {
                r.clamped = true;
            }
            match entity {
                EntityTemplate::NoFireZone { radius, applies_to } => {
                    affected.push(format!("zones[{}]", out.zones.len()));
                    out.zones.push(NoFireZone {
                        center: pos,
                        radius: *radius,
                        applies_to: *applies_to,
                    });
                }
                EntityTemplate::Terrain {
                    kind,
                    radius,
                    sensor_attenuation,
                    speed_factor,
                } => {
                    affected.push(format!("terrain[{}]", out.terrain.len()));
                    out.terrain.push(TerrainPatch {
                        center: pos,
                        radius: *radius,
                        kind: *kind,
                        sensor_attenuation: *sensor_attenuation,
                        speed_factor: *speed_factor,
                    });
                }
                EntityTemplate::Sam { config: sam } => {
                    affected.push(format!("sam[{}]", out.sams.len()));
                    out.sams.push(SamConfig { pos, ..sam.clone() });
                }
            }
        }

        Mutation::ScheduleEvent { tick, event } => {
            if spec.target != TargetSelector::World {
                return Err(Error::novelty(id, "scheduled events must target `world`"));
            }
            let limit = config.rules.time_limit.saturating_sub(1) as f64;
            let t = r.draw(tick, Bound::Int { lo: 0.0, hi: limit })?;
            affected.push(format!("events[{}]", out.events.len()));
            out.events.push(ScheduledEvent {
                tick: t as u64,
                event: event.clone(),
            });
        }

        Mutation::SetGoal { goal } => {
            for i in sam_indices(config, spec.target, id)? {
                out.sams[i].goal = *goal;
                affected.push(format!("sam[{i}]"));
            }
        }
    }

    let errs = out.validation_errors();
    if !errs.is_empty() {
        return Err(Error::novelty(id, format!("mutation produced an invalid scenario: {}", errs.join("; "))));
    }
    let applied = AppliedNovelty {
        id: spec.id.clone(),
        level: spec.level,
        tier,
        battle: battle_index,
        values: r.values,
        affected,
        clamped: r.clamped,
    };
    Ok((out, applied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{DistributionSpec, TieredSpec};
    use crate::novelty::lookup;

    fn rng() -> RngState {
        RngState::from_seed(11)
    }

    fn custom(target: TargetSelector, mutation: Mutation, level: NoveltyLevel) -> NoveltySpec {
        NoveltySpec {
            id: "custom".into(),
            level,
            target,
            mutation,
            onset_battle: 1,
            description: String::new(),
        }
    }

    #[test]
    fn constant_hard_range_on_one_sam() {
        let spec = custom(
            TargetSelector::Sam(0),
            Mutation::SetParam {
                path: "missile_range".into(),
                value: ValueSpec::Tiered(TieredSpec {
                    easy: DistributionSpec::constant(50.0),
                    medium: DistributionSpec::constant(55.0),
                    hard: DistributionSpec::constant(60.0),
                }),
            },
            NoveltyLevel::Agents,
        );
        let base = ScenarioConfig::default();
        let (out, applied) = apply_novelty(&base, &spec, DifficultyTier::Hard, 1, &mut rng()).unwrap();
        assert_eq!(out.sams[0].missile_range, 60.0);
        assert_eq!(out.sams[1].missile_range, 50.0);
        assert_eq!(applied.values, vec![60.0]);
        assert_eq!(applied.affected, vec!["sam[0]".to_string()]);
        assert!(!applied.clamped);
    }

    #[test]
    fn decoy_changes_only_that_flag() {
        let spec = lookup("sam_decoy").unwrap();
        let base = ScenarioConfig::default();
        let (out, _) = apply_novelty(&base, &spec, DifficultyTier::Easy, 1, &mut rng()).unwrap();
        let mut expected = base.clone();
        expected.sams[1].decoy = true;
        assert_eq!(out, expected);
    }

    #[test]
    fn set_flag_is_idempotent() {
        let spec = lookup("sam_mobile").unwrap();
        let base = ScenarioConfig::default();
        let (once, _) = apply_novelty(&base, &spec, DifficultyTier::Easy, 1, &mut rng()).unwrap();
        let (twice, _) = apply_novelty(&once, &spec, DifficultyTier::Easy, 1, &mut rng()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn pre_onset_application_rejected() {
        let mut spec = lookup("sam_decoy").unwrap();
        spec.onset_battle = 3;
        let err = apply_novelty(&ScenarioConfig::default(), &spec, DifficultyTier::Easy, 2, &mut rng()).unwrap_err();
        assert!(err.to_string().contains("precedes onset"), "{err}");
    }

    #[test]
    fn unknown_target_and_path() {
        let mut spec = lookup("sam_decoy").unwrap();
        spec.target = TargetSelector::Sam(5);
        assert!(apply_novelty(&ScenarioConfig::default(), &spec, DifficultyTier::Easy, 1, &mut rng()).is_err());
        let spec = custom(
            TargetSelector::AllSams,
            Mutation::SetParam {
                path: "colour".into(),
                value: ValueSpec::constant(1.0),
            },
            NoveltyLevel::Agents,
        );
        let err = apply_novelty(&ScenarioConfig::default(), &spec, DifficultyTier::Easy, 1, &mut rng()).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn invalid_draws_are_clamped_after_resampling() {
        let spec = custom(
            TargetSelector::Sam(0),
            Mutation::SetParam {
                path: "missile_range".into(),
                value: ValueSpec::Single(DistributionSpec::normal(-100.0, 1.0)),
            },
            NoveltyLevel::Agents,
        );
        let mut r = rng();
        let (out, applied) = apply_novelty(&ScenarioConfig::default(), &spec, DifficultyTier::Easy, 1, &mut r).unwrap();
        assert!(applied.clamped);
        assert_eq!(out.sams[0].missile_range, MIN_POSITIVE);
    }

    #[test]
    fn occasional_invalid_draw_is_resampled() {
        // half of all draws are invalid; nine draws all failing has probability 2^-9
        let spec = custom(
            TargetSelector::Sam(0),
            Mutation::SetParam {
                path: "kill_prob".into(),
                value: ValueSpec::Single(DistributionSpec::uniform(0.5, 1.5)),
            },
            NoveltyLevel::Agents,
        );
        let mut clamped = 0;
        let mut r = rng();
        for _ in 0..200 {
            let (out, applied) =
                apply_novelty(&ScenarioConfig::default(), &spec, DifficultyTier::Easy, 1, &mut r).unwrap();
            assert!((0.5..=1.0).contains(&out.sams[0].kill_prob));
            clamped += applied.clamped as usize;
        }
        assert!(clamped <= 3, "{clamped}");
    }

    #[test]
    fn sensor_count_is_at_least_one() {
        let spec = lookup("sensor_dead").unwrap();
        let mut r = rng();
        for _ in 0..100 {
            let (out, applied) =
                apply_novelty(&ScenarioConfig::default(), &spec, DifficultyTier::Easy, 1, &mut r).unwrap();
            let dead = out.sensors.iter().filter(|s| s.status == SensorStatus::Dead).count();
            assert!((1..=2).contains(&dead));
            assert_eq!(dead, applied.affected.len());
        }
    }

    #[test]
    fn event_is_scheduled_inside_the_battle() {
        let spec = lookup("red_fighter_event").unwrap();
        let mut r = rng();
        for tier in DifficultyTier::ALL {
            let (out, _) = apply_novelty(&ScenarioConfig::default(), &spec, tier, 1, &mut r).unwrap();
            assert_eq!(out.events.len(), 1);
            assert!(out.events[0].tick > 0 && out.events[0].tick < out.rules.time_limit);
        }
    }
}
