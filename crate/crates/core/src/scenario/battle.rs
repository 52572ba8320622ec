use serde::Serialize;
use std::io::Write;

use super::world::{init_world, WorldState};
use super::MissionStatus;
use crate::agents::Agent;
use crate::campaign::BattlePlan;
use crate::error::Result;
use crate::geometry::Vec2;
use crate::metrics::BattleResult;
use crate::rng::RngState;

/// One line of the optional per-tick trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub jet: Vec2,
    pub jet_alive: bool,
    pub weapons: u32,
    pub sams: Vec<Vec2>,
    pub red_fighters: Vec<Vec2>,
    pub missiles: Vec<Vec2>,
    pub storage_destroyed: bool,
    pub status: MissionStatus,
}

impl TraceRecord {
    pub fn of(state: &WorldState) -> Self {
        TraceRecord {
            tick: state.tick,
            jet: state.jet.pos,
            jet_alive: state.jet.alive,
            weapons: state.jet.weapons_remaining,
            sams: state.sams.iter().map(|s| s.pos).collect(),
            red_fighters: state.red_fighters.iter().map(|f| f.pos).collect(),
            missiles: state.missiles.iter().map(|m| m.pos).collect(),
            storage_destroyed: state.storage.destroyed,
            status: state.status,
        }
    }
}

/// Run one battle to a terminal status.
///
/// The agent is reset with the plan's known-world book, then the loop
/// observe → act → step repeats until the world reports a terminal status.
/// Every novelty report the agent attaches to an action is collected into
/// the result. With `trace` set, one JSON line per tick is written to it.
pub fn run_battle(
    plan: &BattlePlan,
    agent: &mut dyn Agent,
    rng: RngState,
    mut trace: Option<&mut dyn Write>,
) -> Result<(BattleResult, WorldState)> {
    let mut world = init_world(&plan.scenario, plan.known_world.clone(), rng)?;
    agent.reset(&plan.known_world);
    let mut reports = Vec::new();
    if let Some(w) = trace.as_deref_mut() {
        serde_json::to_writer(&mut *w, &TraceRecord::of(&world))?;
        w.write_all(b"\n")?;
    }
    while !world.status.is_terminal() {
        let obs = world.observe();
        let action = agent.act(&obs);
        if let Some(report) = &action.declare {
            reports.push(report.clone());
        }
        world.step(&action)?;
        if let Some(w) = trace.as_deref_mut() {
            serde_json::to_writer(&mut *w, &TraceRecord::of(&world))?;
            w.write_all(b"\n")?;
        }
    }
    let result = BattleResult::from_battle(plan, &world, &reports);
    Ok((result, world))
}
