//! The strike policy shared by both reference agents: remember where things
//! were seen, plan around the assumed SAM envelopes, fire from standoff.

use std::collections::BTreeMap;

use super::planner::{plan_route, Threat};
use super::{KnownWorld, STANDOFF_MARGIN_KM};
use crate::geometry::Vec2;
use crate::scenario::{Action, EntityClass, EntityId, Observation};

/// Release points are sampled on rings around the storage at these fractions
/// of (weapon range − 1 km).
const RELEASE_RINGS: [f64; 2] = [1.0, 0.5];
const RELEASE_POINTS_PER_RING: usize = 36;
/// A threat moving farther than this forces a replan, km.
const REPLAN_SHIFT_KM: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    Strike,
    Home,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Striker {
    known: KnownWorld,
    /// Every position reported for an entity the last time it was tracked.
    pub seen: BTreeMap<EntityId, Vec<Vec2>>,
    /// Lower bound on every SAM's range, raised by inference.
    pub sam_floor: f64,
    /// Inferred envelope of the storage's own defences.
    pub storage_envelope: Option<f64>,
    route: Vec<Vec2>,
    planned: Option<(Leg, Vec<Threat>, Vec2)>,
    /// Length of the current route when it was planned; `None` when no route exists.
    pub route_length: Option<f64>,
}

impl Striker {
    pub fn new(known: &KnownWorld) -> Self {
        Striker {
            known: known.clone(),
            ..Striker::default()
        }
    }

    pub fn remember(&mut self, obs: &Observation) {
        let mut fresh: BTreeMap<EntityId, Vec<Vec2>> = BTreeMap::new();
        for t in &obs.tracks {
            let v = fresh.entry(t.id).or_default();
            if !v.contains(&t.pos) {
                v.push(t.pos);
            }
        }
        self.seen.extend(fresh);
    }

    pub fn storage(&self) -> Option<Vec2> {
        self.seen.get(&EntityId::Storage).and_then(|v| v.first().copied())
    }

    pub fn threats(&self) -> Vec<Threat> {
        let mut out = Vec::new();
        for (id, positions) in &self.seen {
            let radius = match *id {
                EntityId::Sam(i) => self.known.assumed_sam_range(i).max(self.sam_floor),
                EntityId::Storage => match self.storage_envelope {
                    Some(r) => r,
                    None => continue,
                },
                _ => continue,
            };
            for &center in positions {
                out.push(Threat {
                    center,
                    radius: radius + STANDOFF_MARGIN_KM,
                });
            }
        }
        out
    }

    /// Drop the cached route so the next call plans from scratch.
    pub fn invalidate(&mut self) {
        self.planned = None;
        self.route.clear();
    }

    fn release_points(&self, storage: Vec2) -> Vec<Vec2> {
        let reach = self.known.jet.weapon_range - 1.0;
        let mut pts = Vec::new();
        for frac in RELEASE_RINGS {
            for k in 0..RELEASE_POINTS_PER_RING {
                let theta = std::f64::consts::TAU * k as f64 / RELEASE_POINTS_PER_RING as f64;
                pts.push(storage + Vec2::from_polar(reach * frac, theta));
            }
        }
        pts
    }

    fn stale(&self, leg: Leg, threats: &[Threat], anchor: Vec2) -> bool {
        let Some((l, old, a)) = &self.planned else { return true };
        *l != leg
            || *a != anchor
            || old.len() != threats.len()
            || old.iter().zip(threats).any(|(o, n)| {
                o.radius != n.radius || o.center.dist(n.center) > REPLAN_SHIFT_KM
            })
    }

    fn follow(&mut self, leg: Leg, pos: Vec2, goals: &[Vec2], anchor: Vec2) -> Option<Vec2> {
        let threats = self.threats();
        if self.stale(leg, &threats, anchor) {
            let route = plan_route(pos, goals, &threats);
            self.route_length = route.as_ref().map(|r| r.length);
            self.route = route.map(|r| r.waypoints).unwrap_or_default();
            self.planned = Some((leg, threats, anchor));
        }
        while self.route.first().is_some_and(|w| w.dist(pos) < 1e-9) {
            self.route.remove(0);
        }
        self.route.first().copied()
    }

    /// Distance still to fly along the current route, if there is one.
    pub fn remaining(&self, pos: Vec2) -> Option<f64> {
        self.route_length?;
        let mut total = 0.0;
        let mut at = pos;
        for &w in &self.route {
            total += at.dist(w);
            at = w;
        }
        Some(total)
    }

    pub fn base(&self) -> Vec2 {
        self.known.jet.base_pos
    }

    /// Fly home around the known threats.
    pub fn home(&mut self, obs: &Observation) -> Option<Vec2> {
        let base = self.known.jet.base_pos;
        self.follow(Leg::Home, obs.position, &[base], base)
    }

    /// One tick of the strike policy.
    pub fn decide(&mut self, obs: &Observation) -> Action {
        if obs.weapons_remaining == 0 {
            return Action {
                waypoint: self.home(obs),
                ..Action::default()
            };
        }
        let Some(storage) = self.storage() else {
            // nothing to strike: hold
            return Action::default();
        };
        let in_reach = obs
            .tracks_of(EntityClass::Storage)
            .any(|t| t.pos.dist(obs.position) <= self.known.jet.weapon_range);
        if in_reach {
            return Action {
                fire_at: Some(EntityId::Storage),
                ..Action::default()
            };
        }
        let goals = self.release_points(storage);
        Action {
            waypoint: self.follow(Leg::Strike, obs.position, &goals, storage),
            ..Action::default()
        }
    }
}
