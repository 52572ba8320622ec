//! Discrete-time battle engine.
//!
//! One call to [`WorldState::step`] advances the battle by one tick, applying
//! its phases in a fixed order: scheduled events, blue movement, blue fire,
//! red movement and fire decisions, missile flight, status update, clock.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::config::*;
use super::entity::EntityId;
use super::observe::{observe, Observation};
use super::{Action, MissionStatus};
use crate::agents::KnownWorld;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::rng::RngState;

/// Missiles within this distance of their target resolve an intercept, km.
pub const INTERCEPT_RADIUS_KM: f64 = 0.5;
/// An aborting jet counts as home within this distance of its base, km.
pub const ABORT_RADIUS_KM: f64 = 1.0;
/// A mobile SAM defending the storage stays within this distance of its emplacement.
pub const MOBILE_LEASH_KM: f64 = 15.0;
/// Leash for a SAM manoeuvring to close on the jet.
pub const PURSUIT_LEASH_KM: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlueJet {
    pub pos: Vec2,
    pub base_pos: Vec2,
    pub speed_max: f64,
    pub weapon_range: f64,
    pub weapons_remaining: u32,
    pub weapons_fired: u32,
    pub alive: bool,
    pub survivability_p: f64,
}

/// Launch bookkeeping shared by every red shooter.
#[derive(Debug, Clone, PartialEq)]
pub struct Magazine {
    pub warheads: u32,
    pub fired: u32,
    pub reload_ticks: u64,
    pub last_decision: Option<u64>,
}

impl Magazine {
    fn new(warheads: u32, reload_ticks: u64) -> Self {
        Magazine {
            warheads,
            fired: 0,
            reload_ticks,
            last_decision: None,
        }
    }

    fn ready(&self, tick: u64) -> bool {
        self.warheads > 0
            && self
                .last_decision
                .is_none_or(|last| tick.saturating_sub(last) >= self.reload_ticks)
    }

    fn commit(&mut self, tick: u64) {
        self.warheads -= 1;
        self.fired += 1;
        self.last_decision = Some(tick);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamSite {
    pub id: EntityId,
    pub home: Vec2,
    pub pos: Vec2,
    pub missile_range: f64,
    pub missile_speed: f64,
    pub magazine: Magazine,
    pub kill_prob: f64,
    pub survivability_p: f64,
    pub mobile: bool,
    pub pursuit: bool,
    pub move_speed: f64,
    pub decoy: bool,
    pub fire_delay: u64,
    pub goal: SamGoal,
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Defender {
    pub range: f64,
    pub kill_prob: f64,
    pub missile_speed: f64,
    pub magazine: Magazine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmmoStorage {
    pub pos: Vec2,
    pub survivability_p: f64,
    pub destroyed: bool,
    pub defender: Option<Defender>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedFighter {
    pub id: EntityId,
    pub pos: Vec2,
    pub speed: f64,
    pub missile_range: f64,
    pub missile_speed: f64,
    pub magazine: Magazine,
    pub kill_prob: f64,
    pub alive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    pub id: usize,
    pub status: SensorStatus,
    pub falsify: Falsify,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Missile {
    pub id: u64,
    pub owner: EntityId,
    pub target: EntityId,
    pub pos: Vec2,
    pub speed: f64,
    pub kill_prob: f64,
    pub traveled: f64,
    /// Flight distance after which the missile is expended: the launcher's missile range.
    pub max_travel: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct PendingLaunch {
    at_tick: u64,
    owner: EntityId,
    speed: f64,
    kill_prob: f64,
    max_travel: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct PendingStrike {
    at_tick: u64,
    target: EntityId,
}

/// Notable things that happened during a battle, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    /// A red shooter committed a warhead against the jet.
    FireDecision {
        tick: u64,
        owner: EntityId,
        distance: f64,
        range: f64,
    },
    MissileLaunched { tick: u64, missile: u64, owner: EntityId },
    JetFire { tick: u64, target: EntityId, legal: bool },
    Intercept { tick: u64, missile: u64, killed: bool },
    MissileExpended { tick: u64, missile: u64 },
    Destroyed { tick: u64, entity: EntityId },
    Spawned { tick: u64, entity: EntityId },
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub tick: u64,
    pub jet: BlueJet,
    pub sams: Vec<SamSite>,
    pub storage: AmmoStorage,
    pub red_fighters: Vec<RedFighter>,
    pub zones: Vec<NoFireZone>,
    pub terrain: Vec<TerrainPatch>,
    pub sensors: Vec<Sensor>,
    pub missiles: Vec<Missile>,
    pub rules: Rules,
    pub scheduled_events: Vec<ScheduledEvent>,
    pub rng: RngState,
    pub status: MissionStatus,
    pub known_world: Arc<KnownWorld>,
    pub log: Vec<SimEvent>,
    abort_latched: bool,
    time_exceeded: bool,
    next_missile_id: u64,
    pending_launches: Vec<PendingLaunch>,
    pending_strikes: Vec<PendingStrike>,
}

/// Build the tick-0 world for a resolved configuration.
pub fn init_world(config: &ScenarioConfig, known: KnownWorld, rng: RngState) -> Result<WorldState> {
    let errs = config.validation_errors();
    if !errs.is_empty() {
        return Err(Error::InvalidScenario(errs));
    }
    let j = &config.jet;
    let jet = BlueJet {
        pos: j.pos,
        base_pos: j.base_pos,
        speed_max: j.speed_max,
        weapon_range: j.weapon_range,
        weapons_remaining: j.weapons,
        weapons_fired: 0,
        alive: true,
        survivability_p: j.survivability_p,
    };
    let sams = config
        .sams
        .iter()
        .enumerate()
        .map(|(i, s)| SamSite {
            id: EntityId::Sam(i),
            home: s.pos,
            pos: s.pos,
            missile_range: s.missile_range,
            missile_speed: s.missile_speed,
            magazine: Magazine::new(s.warheads, s.reload_ticks),
            kill_prob: s.kill_prob,
            survivability_p: s.survivability_p,
            mobile: s.mobile,
            pursuit: s.pursuit,
            move_speed: s.move_speed,
            decoy: s.decoy,
            fire_delay: s.fire_delay,
            goal: s.goal,
            alive: true,
        })
        .collect();
    let storage = AmmoStorage {
        pos: config.storage.pos,
        survivability_p: config.storage.survivability_p,
        destroyed: false,
        defender: config.storage.defender.as_ref().map(|d| Defender {
            range: d.range,
            kill_prob: d.kill_prob,
            missile_speed: d.missile_speed,
            magazine: Magazine::new(d.warheads, d.reload_ticks),
        }),
    };
    let sensors = config
        .sensors
        .iter()
        .enumerate()
        .map(|(id, s)| Sensor {
            id,
            status: s.status,
            falsify: s.falsify.clone(),
        })
        .collect();
    Ok(WorldState {
        tick: 0,
        jet,
        sams,
        storage,
        red_fighters: Vec::new(),
        zones: config.zones.clone(),
        terrain: config.terrain.clone(),
        sensors,
        missiles: Vec::new(),
        rules: config.rules.clone(),
        scheduled_events: config.events.clone(),
        rng,
        status: MissionStatus::Ongoing,
        known_world: Arc::new(known),
        log: Vec::new(),
        abort_latched: false,
        time_exceeded: false,
        next_missile_id: 0,
        pending_launches: Vec::new(),
        pending_strikes: Vec::new(),
    })
}

pub fn mission_status(state: &WorldState) -> MissionStatus {
    state.status
}

fn protected(zones: &[NoFireZone], p: Vec2, all_entities_only: bool) -> bool {
    zones
        .iter()
        .any(|z| (!all_entities_only || z.applies_to == ZoneScope::AllEntities) && z.contains(p))
}

impl WorldState {
    pub fn observe(&self) -> Observation {
        observe(self)
    }

    pub fn abort_latched(&self) -> bool {
        self.abort_latched
    }

    /// True when the battle ended because the clock ran out.
    pub fn time_exceeded(&self) -> bool {
        self.time_exceeded
    }

    pub fn entity_pos(&self, id: EntityId) -> Option<Vec2> {
        match id {
            EntityId::Jet => Some(self.jet.pos),
            EntityId::Storage => Some(self.storage.pos),
            EntityId::Sam(i) => self.sams.get(i).map(|s| s.pos),
            EntityId::RedFighter(i) => self.red_fighters.get(i).map(|f| f.pos),
        }
    }

    pub fn entity_alive(&self, id: EntityId) -> bool {
        match id {
            EntityId::Jet => self.jet.alive,
            EntityId::Storage => !self.storage.destroyed,
            EntityId::Sam(i) => self.sams.get(i).is_some_and(|s| s.alive),
            EntityId::RedFighter(i) => self.red_fighters.get(i).is_some_and(|f| f.alive),
        }
    }

    fn entity_survivability(&self, id: EntityId) -> f64 {
        match id {
            EntityId::Jet => self.jet.survivability_p,
            EntityId::Storage => self.storage.survivability_p,
            EntityId::Sam(i) => self.sams[i].survivability_p,
            EntityId::RedFighter(_) => 0.0,
        }
    }

    fn kill(&mut self, id: EntityId) {
        match id {
            EntityId::Jet => self.jet.alive = false,
            EntityId::Storage => self.storage.destroyed = true,
            EntityId::Sam(i) => self.sams[i].alive = false,
            EntityId::RedFighter(i) => self.red_fighters[i].alive = false,
        }
        self.log.push(SimEvent::Destroyed {
            tick: self.tick,
            entity: id,
        });
    }

    /// Advance one tick. Stepping a finished battle is an error.
    pub fn step(&mut self, action: &Action) -> Result<()> {
        if self.status.is_terminal() {
            return Err(Error::Terminal);
        }
        let tracked: Vec<EntityId> = self.observe().tracks.iter().map(|t| t.id).collect();

        self.apply_events();
        self.move_jet(action);
        self.jet_fire(action, &tracked);
        self.red_phase();
        self.advance_missiles();
        self.update_status();
        self.tick += 1;
        Ok(())
    }

    fn apply_events(&mut self) {
        let tick = self.tick;
        let due: Vec<EventKind> = self
            .scheduled_events
            .iter()
            .filter(|e| e.tick == tick)
            .map(|e| e.event.clone())
            .collect();
        for ev in due {
            match ev {
                EventKind::SpawnRedFighter { fighter: f } => {
                    let id = EntityId::RedFighter(self.red_fighters.len());
                    self.red_fighters.push(RedFighter {
                        id,
                        pos: f.pos,
                        speed: f.speed,
                        missile_range: f.missile_range,
                        missile_speed: f.missile_speed,
                        magazine: Magazine::new(f.warheads, f.reload_ticks),
                        kill_prob: f.kill_prob,
                        alive: true,
                    });
                    self.log.push(SimEvent::Spawned { tick, entity: id });
                }
            }
        }
    }

    fn move_jet(&mut self, action: &Action) {
        if !self.jet.alive {
            return;
        }
        if action.abort {
            self.abort_latched = true;
        }
        let target = if self.abort_latched {
            Some(action.waypoint.unwrap_or(self.jet.base_pos))
        } else {
            action.waypoint
        };
        let Some(target) = target else { return };
        let factor = self
            .terrain
            .iter()
            .filter(|t| t.kind == TerrainKind::Arduous && t.contains(self.jet.pos))
            .map(|t| t.speed_factor)
            .fold(1.0, f64::min);
        self.jet.pos = self.jet.pos.step_toward(target, self.jet.speed_max * factor);
    }

    fn jet_fire(&mut self, action: &Action, tracked: &[EntityId]) {
        let tick = self.tick;
        let due: Vec<EntityId> = self
            .pending_strikes
            .iter()
            .filter(|s| s.at_tick == tick)
            .map(|s| s.target)
            .collect();
        self.pending_strikes.retain(|s| s.at_tick != tick);
        for target in due {
            self.resolve_strike(target);
        }

        let Some(target) = action.fire_at else { return };
        let legal = self.jet.alive
            && target != EntityId::Jet
            && tracked.contains(&target)
            && self.entity_alive(target)
            && self
                .entity_pos(target)
                .is_some_and(|p| p.dist(self.jet.pos) <= self.jet.weapon_range && !protected(&self.zones, p, false))
            && self.rules.window_open(tick)
            && self.jet.weapons_remaining > 0;
        self.log.push(SimEvent::JetFire { tick, target, legal });
        if !legal {
            return;
        }
        self.jet.weapons_remaining -= 1;
        self.jet.weapons_fired += 1;
        if self.rules.global_fire_delay == 0 {
            self.resolve_strike(target);
        } else {
            self.pending_strikes.push(PendingStrike {
                at_tick: tick + self.rules.global_fire_delay,
                target,
            });
        }
    }

    fn resolve_strike(&mut self, target: EntityId) {
        if !self.entity_alive(target) {
            return;
        }
        let survives = self.rng.chance(self.entity_survivability(target));
        if !survives {
            self.kill(target);
        }
    }

    fn red_phase(&mut self) {
        let tick = self.tick;

        let due: Vec<PendingLaunch> = self
            .pending_launches
            .iter()
            .filter(|p| p.at_tick == tick)
            .cloned()
            .collect();
        self.pending_launches.retain(|p| p.at_tick != tick);
        for p in due {
            if self.entity_alive(p.owner) && self.jet.alive {
                if let Some(pos) = self.entity_pos(p.owner) {
                    self.spawn_missile(p.owner, pos, p.speed, p.kill_prob, p.max_travel);
                }
            }
        }

        if !self.jet.alive {
            return;
        }
        let jet_pos = self.jet.pos;
        let jet_shielded = protected(&self.zones, jet_pos, true);
        let window_open = self.rules.window_open(tick);
        let global_delay = self.rules.global_fire_delay;
        let can_engage = window_open && !jet_shielded;

        let mut decisions = Vec::new();
        for sam in self.sams.iter_mut().filter(|s| s.alive) {
            move_sam(sam, jet_pos);
            let distance = sam.pos.dist(jet_pos);
            if !sam.decoy && can_engage && distance <= sam.missile_range && sam.magazine.ready(tick) {
                sam.magazine.commit(tick);
                decisions.push((
                    sam.id,
                    distance,
                    sam.missile_range,
                    sam.fire_delay + global_delay,
                    sam.missile_speed,
                    sam.kill_prob,
                ));
            }
        }
        for f in self.red_fighters.iter_mut().filter(|f| f.alive) {
            f.pos = f.pos.step_toward(jet_pos, f.speed);
            let distance = f.pos.dist(jet_pos);
            if can_engage && distance <= f.missile_range && f.magazine.ready(tick) {
                f.magazine.commit(tick);
                decisions.push((f.id, distance, f.missile_range, global_delay, f.missile_speed, f.kill_prob));
            }
        }
        if !self.storage.destroyed {
            let spos = self.storage.pos;
            if let Some(d) = self.storage.defender.as_mut() {
                let distance = spos.dist(jet_pos);
                if can_engage && distance <= d.range && d.magazine.ready(tick) {
                    d.magazine.commit(tick);
                    decisions.push((EntityId::Storage, distance, d.range, global_delay, d.missile_speed, d.kill_prob));
                }
            }
        }

        for (owner, distance, range, delay, speed, kill_prob) in decisions {
            self.log.push(SimEvent::FireDecision {
                tick,
                owner,
                distance,
                range,
            });
            if delay == 0 {
                let pos = self.entity_pos(owner).expect("shooter exists");
                self.spawn_missile(owner, pos, speed, kill_prob, range);
            } else {
                self.pending_launches.push(PendingLaunch {
                    at_tick: tick + delay,
                    owner,
                    speed,
                    kill_prob,
                    max_travel: range,
                });
            }
        }
    }

    fn spawn_missile(&mut self, owner: EntityId, pos: Vec2, speed: f64, kill_prob: f64, max_travel: f64) {
        let id = self.next_missile_id;
        self.next_missile_id += 1;
        self.missiles.push(Missile {
            id,
            owner,
            target: EntityId::Jet,
            pos,
            speed,
            kill_prob,
            traveled: 0.0,
            max_travel,
        });
        self.log.push(SimEvent::MissileLaunched {
            tick: self.tick,
            missile: id,
            owner,
        });
    }

    fn advance_missiles(&mut self) {
        let tick = self.tick;
        let mut missiles = std::mem::take(&mut self.missiles);
        missiles.retain_mut(|m| {
            if !self.entity_alive(m.target) {
                return false;
            }
            let target_pos = self.entity_pos(m.target).expect("target exists");
            let before = m.pos;
            m.pos = m.pos.step_toward(target_pos, m.speed);
            m.traveled += before.dist(m.pos);
            if m.pos.dist(target_pos) <= INTERCEPT_RADIUS_KM {
                let survives = self.rng.chance(self.entity_survivability(m.target));
                let killed = !survives && self.rng.chance(m.kill_prob);
                self.log.push(SimEvent::Intercept {
                    tick,
                    missile: m.id,
                    killed,
                });
                if killed {
                    self.kill(m.target);
                }
                return false;
            }
            if m.traveled >= m.max_travel {
                self.log.push(SimEvent::MissileExpended { tick, missile: m.id });
                return false;
            }
            true
        });
        missiles.retain(|m| self.entity_alive(m.target));
        self.missiles = missiles;
    }

    fn update_status(&mut self) {
        let tick = self.tick;
        self.status = if self.storage.destroyed && self.jet.alive {
            MissionStatus::Win
        } else if !self.jet.alive {
            MissionStatus::Fail
        } else if self.abort_latched
            && self.jet.pos.dist(self.jet.base_pos) <= ABORT_RADIUS_KM
            && tick < self.rules.time_limit
        {
            MissionStatus::Abort
        } else if tick >= self.rules.time_limit {
            self.time_exceeded = true;
            MissionStatus::Fail
        } else {
            MissionStatus::Ongoing
        };
    }
}

fn move_sam(sam: &mut SamSite, jet_pos: Vec2) {
    if sam.move_speed <= 0.0 {
        return;
    }
    let leash = match sam.goal {
        SamGoal::DestroyJet => f64::INFINITY,
        SamGoal::DefendTarget if sam.pursuit => PURSUIT_LEASH_KM,
        SamGoal::DefendTarget if sam.mobile => MOBILE_LEASH_KM,
        SamGoal::DefendTarget => return,
    };
    // defenders only react to a jet approaching the defended area
    if sam.goal == SamGoal::DefendTarget && sam.pos.dist(jet_pos) > 2.0 * sam.missile_range {
        return;
    }
    let next = sam.pos.step_toward(jet_pos, sam.move_speed);
    if next.dist(sam.home) <= leash {
        sam.pos = next;
    }
}
