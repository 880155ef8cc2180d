//! In-process match loops.
//!
//! Turn-based: only the active faction is queried; its batches run in order
//! until a failure or `end_turn`. After `turn_query_cap` queries without an
//! `end_turn` the engine ends the turn on the agent's behalf.
//!
//! Real-time (simulated clock): every tick both agents are queried, red
//! first on even ticks and blue first on odd ones, then the clock advances
//! by one tick.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::record::{GameStats, MatchFooter, MatchHeader, MatchRecord};
use crate::action::{ActionKind, ActionRequest, Engine, ObservationDoc, ObservationLevel, Stamp};
use crate::scenario::Scenario;
use crate::world::{Faction, Mode, WorldError, WorldState};

/// A decision function from what a faction can see to a batch of requests.
///
/// Policies never see the world directly.
pub trait Policy: Send {
    fn label(&self) -> String;
    fn decide(&mut self, obs: &ObservationDoc) -> Vec<ActionRequest>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub mode: Mode,
    pub seed: u64,
    pub scenario: Scenario,
    /// Queries per turn before the engine ends the turn itself.
    pub turn_query_cap: u32,
    /// Wall-clock deliberation budget per turn; exceeding it forfeits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_budget_ms: Option<u64>,
}

impl MatchConfig {
    pub fn new(mode: Mode, seed: u64, scenario: Scenario) -> Self {
        Self { mode, seed, scenario, turn_query_cap: 10, turn_budget_ms: None }
    }

    /// The scenario with its seed pinned to the match seed.
    pub fn seeded_scenario(&self) -> Scenario {
        Scenario { seed: self.seed, ..self.scenario.clone() }
    }

    pub fn build_world(&self) -> Result<WorldState, WorldError> {
        WorldState::standard(Arc::new(self.seeded_scenario()), self.mode)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MatchError {
    #[error("cannot build the battlefield: {0}")]
    World(#[from] WorldError),
}

fn stamp(engine: &Engine) -> Stamp {
    Stamp { sent_at: None, received_at: engine.world.clock_ms }
}

/// Run one batch; stops after the first failure or a successful `end_turn`.
/// Returns whether the turn ended.
fn run_batch(engine: &mut Engine, faction: Faction, batch: &[ActionRequest]) -> bool {
    for req in batch {
        let r = engine.execute(faction, req, stamp(engine));
        if r.ok && req.action == ActionKind::EndTurn.as_str() {
            return true;
        }
        if !r.ok || engine.is_over() {
            return false;
        }
    }
    false
}

pub fn run_match(config: &MatchConfig, red: &mut dyn Policy, blue: &mut dyn Policy) -> Result<MatchRecord, MatchError> {
    let world = config.build_world()?;
    let [red_faction, blue_faction] = world.factions;
    let mut engine = Engine::new(world);
    let mut agents: BTreeMap<Faction, &mut dyn Policy> = BTreeMap::new();
    let labels = BTreeMap::from([(red_faction, red.label()), (blue_faction, blue.label())]);
    agents.insert(red_faction, red);
    agents.insert(blue_faction, blue);

    match config.mode {
        Mode::TurnBased => turn_based(config, &mut engine, &mut agents),
        Mode::RealTime => real_time(config, &mut engine, &mut agents, [red_faction, blue_faction]),
    }

    let header = MatchHeader::new(config, labels);
    Ok(finish(header, engine))
}

fn turn_based(config: &MatchConfig, engine: &mut Engine, agents: &mut BTreeMap<Faction, &mut dyn Policy>) {
    let budget = config.turn_budget_ms.map(Duration::from_millis);
    while !engine.is_over() {
        let Some(faction) = engine.world.active_faction else { break };
        let policy = agents.get_mut(&faction).expect("both factions have a policy");
        let mut thinking = Duration::ZERO;
        let mut ended = false;
        for _ in 0..config.turn_query_cap {
            let obs = engine.observation(faction, ObservationLevel::Tactical);
            let started = Instant::now();
            let batch = policy.decide(&obs);
            thinking += started.elapsed();
            if budget.is_some_and(|b| thinking > b) {
                engine.forfeit(faction);
                break;
            }
            if batch.is_empty() {
                break;
            }
            ended = run_batch(engine, faction, &batch);
            if ended || engine.is_over() {
                break;
            }
        }
        if !ended && !engine.is_over() {
            engine.force_end_turn(faction, stamp(engine));
        }
        engine.drain_events();
    }
}

fn real_time(
    config: &MatchConfig,
    engine: &mut Engine,
    agents: &mut BTreeMap<Faction, &mut dyn Policy>,
    [red, blue]: [Faction; 2],
) {
    let tick = config.scenario.real_time.tick_ms;
    let mut n: u64 = 0;
    while !engine.is_over() {
        let order = if n.is_multiple_of(2) { [red, blue] } else { [blue, red] };
        for faction in order {
            let obs = engine.observation(faction, ObservationLevel::Tactical);
            let batch = agents.get_mut(&faction).expect("both factions have a policy").decide(&obs);
            run_batch(engine, faction, &batch);
            if engine.is_over() {
                break;
            }
        }
        if engine.is_over() {
            break;
        }
        engine.advance_clock(tick).expect("the clock only advances while the match runs");
        engine.drain_events();
        n += 1;
    }
    engine.drain_events();
}

pub(crate) fn finish(header: MatchHeader, engine: Engine) -> MatchRecord {
    let outcome = *engine.outcome().expect("the match loop only returns once the match is decided");
    let factions = engine.world.factions;
    let stats = factions.iter().map(|f| (*f, GameStats::from_log(engine.log().records(), *f))).collect();
    let strategic_quality = factions.iter().filter_map(|f| engine.strategic_quality(*f).map(|q| (*f, q))).collect();
    let agent_info =
        factions.iter().filter_map(|f| engine.agent_info(*f).map(|a| (*f, a.clone()))).collect();
    let footer = MatchFooter {
        outcome,
        final_digest: engine.digest(),
        final_clock_ms: engine.world.clock_ms,
        turn_number: engine.world.turn_number,
        stats,
        strategic_quality,
        agent_info,
        telemetry: engine.telemetry().to_vec(),
    };
    MatchRecord { header, log: engine.log().clone(), footer }
}
