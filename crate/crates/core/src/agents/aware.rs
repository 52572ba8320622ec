use std::collections::{BTreeMap, BTreeSet};

use super::striker::Striker;
use super::{Agent, KnownWorld, NoveltyReport, ENVELOPE_SLACK_KM, REESTIMATE_PAD_KM};
use crate::geometry::Vec2;
use crate::novelty::NoveltyLevel;
use crate::scenario::{Action, EntityClass, EntityId, Observation};

/// A track moving farther than this between consecutive ticks is implausible, km.
const MAX_PLAUSIBLE_STEP_KM: f64 = 2.0;
/// Two sensors disagreeing by more than this about one entity, km.
const SENSOR_DISAGREEMENT_KM: f64 = 1.0;
/// How far to aim when running from a missile, km.
const FLEE_DISTANCE_KM: f64 = 50.0;
/// Once novelty is detected, head home while the straight-line distance
/// times this factor (plus [`HOME_RESERVE_KM`]) still fits in the time left.
const HOME_DETOUR_FACTOR: f64 = 1.3;
const HOME_RESERVE_KM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Trigger {
    RangeSurprise,
    Roster,
    Movement,
    SensorLoss,
    Kinematics,
    FireRejected,
    TargetSurvived,
    Closing,
}

impl Trigger {
    fn forces_abort(self) -> bool {
        matches!(self, Trigger::SensorLoss | Trigger::FireRejected)
    }
}

struct Finding {
    trigger: Trigger,
    level: NoveltyLevel,
    description: String,
}

fn angle_between(a: f64, b: f64) -> f64 {
    ((a - b + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI).abs()
}

/// Flies the baseline policy while watching for contradictions of its
/// book. On the first contradiction of each kind it reports a novelty with
/// a level guess, then adapts: it widens its standoff after a launch from
/// beyond the assumed range, runs from inbound missiles, and aborts when
/// its sensors or its own weapons stop behaving as briefed or when no safe
/// release point remains.
#[derive(Debug, Clone, Default)]
pub struct AwareAgent {
    known: KnownWorld,
    striker: Striker,
    prev: BTreeMap<(EntityId, usize), Vec2>,
    prev_tick: Option<u64>,
    missiles_seen: BTreeSet<u64>,
    reported: BTreeSet<Trigger>,
    detected: bool,
    aborting: bool,
    fire_check: Option<(u64, u32)>,
}

impl AwareAgent {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether any novelty has been reported so far this battle.
    pub fn detected(&self) -> bool {
        self.detected
    }

    fn assumed(&self, i: usize) -> f64 {
        self.known.assumed_sam_range(i).max(self.striker.sam_floor)
    }

    fn detect(&mut self, obs: &Observation) -> Vec<Finding> {
        let mut out = Vec::new();
        let pos = obs.position;

        // (a) launches from outside every assumed envelope
        for w in &obs.missile_warnings {
            if !self.missiles_seen.insert(w.missile) {
                continue;
            }
            let source = self
                .striker
                .seen
                .iter()
                .flat_map(|(id, ps)| ps.iter().map(move |p| (*id, *p)))
                .min_by(|a, b| {
                    angle_between(pos.bearing_to(a.1), w.bearing).total_cmp(&angle_between(pos.bearing_to(b.1), w.bearing))
                });
            match source {
                None => out.push(Finding {
                    trigger: Trigger::RangeSurprise,
                    level: NoveltyLevel::Agents,
                    description: "missile inbound from an untracked launcher".into(),
                }),
                Some((EntityId::Sam(_), src)) => {
                    let outside = self.striker.seen.iter().all(|(id, ps)| match id {
                        EntityId::Sam(i) => ps.iter().all(|p| p.dist(pos) > self.assumed(*i) + ENVELOPE_SLACK_KM),
                        _ => true,
                    });
                    if outside {
                        let d = src.dist(pos);
                        self.striker.sam_floor = self.striker.sam_floor.max(d + REESTIMATE_PAD_KM);
                        out.push(Finding {
                            trigger: Trigger::RangeSurprise,
                            level: NoveltyLevel::Agents,
                            description: format!("SAM launch at {d:.1} km, beyond the assumed envelope"),
                        });
                    }
                }
                Some((EntityId::Storage, src)) => {
                    let d = src.dist(pos);
                    self.striker.storage_envelope = Some(d + REESTIMATE_PAD_KM);
                    out.push(Finding {
                        trigger: Trigger::RangeSurprise,
                        level: NoveltyLevel::Agents,
                        description: format!("storage site launched at {d:.1} km"),
                    });
                }
                Some(_) => {}
            }
        }

        // (b) entities the book does not list
        for t in &obs.tracks {
            let unexpected = match t.id {
                EntityId::Sam(i) => i >= self.known.roster.sams,
                EntityId::RedFighter(i) => i >= self.known.roster.red_fighters,
                _ => false,
            };
            if unexpected {
                let (level, when) = if obs.tick == 0 {
                    (NoveltyLevel::Agents, "at start")
                } else {
                    (NoveltyLevel::Events, "mid-battle")
                };
                out.push(Finding {
                    trigger: Trigger::Roster,
                    level,
                    description: format!("unexpected {} {when}", t.id),
                });
                break;
            }
        }

        // (c) (e) (g) track kinematics
        let consecutive = self.prev_tick.is_some_and(|p| p + 1 == obs.tick);
        for t in &obs.tracks {
            if obs.tracks.iter().any(|o| o.id == t.id && o.pos.dist(t.pos) > SENSOR_DISAGREEMENT_KM) {
                out.push(Finding {
                    trigger: Trigger::Kinematics,
                    level: NoveltyLevel::Interactions,
                    description: format!("sensors disagree on the position of {}", t.id),
                });
            }
            if t.class != EntityClass::Sam || !consecutive {
                continue;
            }
            let Some(&before) = self.prev.get(&(t.id, t.sensor)) else { continue };
            let step = before.dist(t.pos);
            if step > MAX_PLAUSIBLE_STEP_KM {
                out.push(Finding {
                    trigger: Trigger::Kinematics,
                    level: NoveltyLevel::Interactions,
                    description: format!("{} jumped {step:.1} km in one tick", t.id),
                });
            } else if step > 0.0 {
                let EntityId::Sam(i) = t.id else { continue };
                let closing = t.pos.dist(pos) < before.dist(pos);
                let far = t.pos.dist(pos) > 2.0 * self.assumed(i);
                let (trigger, level, what) = if closing && far {
                    (Trigger::Closing, NoveltyLevel::Goals, "is hunting the jet")
                } else {
                    (Trigger::Movement, NoveltyLevel::Actions, "is moving")
                };
                out.push(Finding {
                    trigger,
                    level,
                    description: format!("{} {what}", t.id),
                });
            }
        }
        self.prev = obs.tracks.iter().map(|t| ((t.id, t.sensor), t.pos)).collect();
        self.prev_tick = Some(obs.tick);

        // (d) sensor picture gone
        if obs.tracks.is_empty() && self.known.sensors > 0 {
            out.push(Finding {
                trigger: Trigger::SensorLoss,
                level: NoveltyLevel::Relations,
                description: "all tracks lost".into(),
            });
        }

        // (f) own fire orders
        if let Some((tick, weapons)) = self.fire_check.take() {
            if obs.tick == tick + 1 {
                if obs.weapons_remaining == weapons {
                    out.push(Finding {
                        trigger: Trigger::FireRejected,
                        level: NoveltyLevel::Rules,
                        description: "legal fire order was not executed".into(),
                    });
                } else if obs.track(EntityId::Storage).is_some() {
                    out.push(Finding {
                        trigger: Trigger::TargetSurvived,
                        level: NoveltyLevel::Interactions,
                        description: "storage survived a hit".into(),
                    });
                }
            }
        }
        out
    }

    fn accommodate(&mut self, obs: &Observation) -> Action {
        let pos = obs.position;
        if !obs.missile_warnings.is_empty() {
            let mut away = obs
                .missile_warnings
                .iter()
                .fold(Vec2::ZERO, |acc, w| acc - Vec2::from_polar(1.0, w.bearing));
            if away.norm() < 1e-9 {
                away = Vec2::from_polar(1.0, obs.missile_warnings[0].bearing + std::f64::consts::FRAC_PI_2);
            }
            self.striker.invalidate();
            return Action {
                waypoint: Some(pos + away * (FLEE_DISTANCE_KM / away.norm())),
                abort: self.aborting,
                ..Action::default()
            };
        }
        let reach = self.known.rules.time_limit.saturating_sub(obs.tick + 1) as f64 * self.known.jet.speed_max;
        if obs.weapons_remaining == 0 || pos.dist(self.striker.base()) * HOME_DETOUR_FACTOR + HOME_RESERVE_KM >= reach {
            if !self.aborting {
                self.striker.invalidate();
            }
            self.aborting = true;
        }
        if !self.aborting {
            let action = self.striker.decide(obs);
            if action.fire_at.is_some() {
                return action;
            }
            match self.striker.remaining(pos) {
                Some(left) if left <= reach && self.striker.storage().is_some() => return action,
                _ => {
                    self.aborting = true;
                    self.striker.invalidate();
                }
            }
        }
        Action {
            waypoint: self.striker.home(obs),
            abort: true,
            ..Action::default()
        }
    }
}

impl Agent for AwareAgent {
    fn name(&self) -> &str {
        "aware"
    }

    fn reset(&mut self, known: &KnownWorld) {
        *self = AwareAgent {
            known: known.clone(),
            striker: Striker::new(known),
            ..AwareAgent::default()
        };
    }

    fn act(&mut self, obs: &Observation) -> Action {
        self.striker.remember(obs);
        let findings = self.detect(obs);
        let mut declare = None;
        for f in findings {
            if self.reported.insert(f.trigger) {
                if f.trigger.forces_abort() {
                    self.aborting = true;
                }
                if declare.is_none() {
                    declare = Some(NoveltyReport::detected(obs.tick, f.level, f.description));
                }
            }
        }
        if declare.is_some() {
            self.detected = true;
        }
        let mut action = if self.detected {
            self.accommodate(obs)
        } else {
            self.striker.decide(obs)
        };
        if action.fire_at.is_some() {
            self.fire_check = Some((obs.tick, obs.weapons_remaining));
        }
        action.declare = declare;
        action
    }
}
