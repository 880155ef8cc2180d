//! Layered validation and execution of agent actions.
//!
//! Checks run in a fixed order and the first failure wins:
//!
//! 1. map bounds of every named coordinate;
//! 2. permissions: turn (or mode), then unit existence and ownership, then
//!    the real-time action lock;
//! 3. the components the action needs;
//! 4. the rule itself (path cost, range, resources, ...).
//!
//! Every call is counted and logged, whatever its result.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::log::{LogRecord, ReplayLog};
use super::observe::{build_observation, ObservationDoc, ObservationLevel};
use super::request::{parse_action, Action, ActionKind, ActionRequest, TargetRef, CATALOG};
use crate::engine::lock::action_lock_duration;
use crate::error::{ErrorCode, Rejection};
use crate::hex::HexCoord;
use crate::rules::{
    self, apply_move, apply_support_action, check_attack, check_support_action, check_victory, end_turn_refresh,
    plan_move, resolve_combat, standard_schedule, Outcome, SupportAction,
};
use crate::world::{EntityId, Faction, Mode, Schedule, SkillName, WorldState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub ok: bool,
    pub detail: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_code: Option<ErrorCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub spatial: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Real-time lock placed on the acting unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock_ms: Option<u64>,
}

impl ActionResult {
    pub fn success(detail: Value) -> Self {
        Self { ok: true, detail, error_code: None, message: None, spatial: false, warnings: Vec::new(), lock_ms: None }
    }

    pub fn failure(r: &Rejection) -> Self {
        Self {
            ok: false,
            detail: Value::Null,
            error_code: Some(r.code),
            message: Some(r.message.clone()),
            spatial: r.spatial(),
            warnings: Vec::new(),
            lock_ms: None,
        }
    }
}

/// Per-faction call bookkeeping.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounters {
    pub total: u64,
    pub ok: u64,
    pub failed: u64,
    pub spatial_failed: u64,
    /// Successful unit-control actions.
    pub gameplay_ok: u64,
}

impl CallCounters {
    pub fn record(&mut self, kind: Option<ActionKind>, result: &ActionResult) {
        self.total += 1;
        if result.ok {
            self.ok += 1;
            if kind.is_some_and(ActionKind::is_unit_control) {
                self.gameplay_ok += 1;
            }
        } else {
            self.failed += 1;
            if result.spatial {
                self.spatial_failed += 1;
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TurnStart,
    StateUpdate,
    GameEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventNotice {
    pub event: EventKind,
    pub detail: Value,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub agent_id: Option<String>,
    pub model_id: Option<String>,
    pub provider: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TelemetryKind {
    StrategyPing,
    LlmStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub faction: Faction,
    pub clock_ms: u64,
    pub received_at: u64,
    pub kind: TelemetryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Faction standing as reported by `get_faction_state`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactionStanding {
    Active,
    Victory,
    Defeat,
    Eliminated,
    Draw,
}

/// When and how a request arrived.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct Stamp {
    pub sent_at: Option<u64>,
    pub received_at: u64,
}

/// One match's authoritative state plus everything that happened to it.
#[derive(Debug)]
pub struct Engine {
    pub world: WorldState,
    schedule: Schedule,
    outcome: Option<Outcome>,
    counters: BTreeMap<Faction, CallCounters>,
    telemetry: Vec<TelemetryRecord>,
    agents: BTreeMap<Faction, AgentInfo>,
    log: ReplayLog,
    pending: Vec<EventNotice>,
}

fn reject<T>(code: ErrorCode, message: impl Into<String>) -> Result<T, Rejection> {
    Err(Rejection::new(code, message))
}

impl Engine {
    pub fn new(world: WorldState) -> Self {
        let counters = world.factions.iter().map(|f| (*f, CallCounters::default())).collect();
        Self {
            world,
            schedule: standard_schedule(),
            outcome: None,
            counters,
            telemetry: Vec::new(),
            agents: BTreeMap::new(),
            log: ReplayLog::new(),
            pending: Vec::new(),
        }
    }

    pub fn outcome(&self) -> Option<&Outcome> {
        self.outcome.as_ref()
    }

    pub fn is_over(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn counters(&self, f: Faction) -> CallCounters {
        self.counters.get(&f).copied().unwrap_or_default()
    }

    pub fn telemetry(&self) -> &[TelemetryRecord] {
        &self.telemetry
    }

    pub fn agent_info(&self, f: Faction) -> Option<&AgentInfo> {
        self.agents.get(&f)
    }

    pub fn log(&self) -> &ReplayLog {
        &self.log
    }

    pub fn digest(&self) -> String {
        self.world.digest()
    }

    /// Events emitted since the last drain, in emission order.
    pub fn drain_events(&mut self) -> Vec<EventNotice> {
        std::mem::take(&mut self.pending)
    }

    pub fn observation(&self, faction: Faction, level: ObservationLevel) -> ObservationDoc {
        build_observation(&self.world, faction, level, None)
    }

    /// Mean of the clamped strategy-ping scores of a faction.
    pub fn strategic_quality(&self, f: Faction) -> Option<f64> {
        let scores: Vec<f64> = self
            .telemetry
            .iter()
            .filter(|t| t.faction == f && t.kind == TelemetryKind::StrategyPing)
            .filter_map(|t| t.score)
            .collect();
        (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
    }

    fn checkpoint(&self) -> Option<String> {
        self.log.next_is_checkpoint().then(|| self.world.digest())
    }

    fn emit(&mut self, event: EventNotice) {
        let digest_before = self.checkpoint();
        let index = self.log.next_index();
        self.log.push(LogRecord::Event { index, clock_ms: self.world.clock_ms, event: event.clone(), digest_before });
        self.pending.push(event);
    }

    fn settle(&mut self) {
        if self.outcome.is_some() {
            return;
        }
        if let Some(o) = check_victory(&self.world) {
            self.finish(o);
        }
    }

    fn finish(&mut self, o: Outcome) {
        self.outcome = Some(o);
        self.emit(EventNotice { event: EventKind::GameEnd, detail: json!({ "outcome": o }) });
    }

    /// Execute one request on behalf of `faction`.
    pub fn execute(&mut self, faction: Faction, req: &ActionRequest, stamp: Stamp) -> ActionResult {
        self.run(faction, req, stamp, false)
    }

    /// End `faction`'s turn on its behalf. Not counted against the agent.
    pub fn force_end_turn(&mut self, faction: Faction, stamp: Stamp) -> ActionResult {
        let req = Action::EndTurn { faction: Some(faction) }.to_request();
        self.run(faction, &req, stamp, true)
    }

    /// Re-apply a logged request.
    pub(crate) fn replay_request(&mut self, faction: Faction, req: &ActionRequest, stamp: Stamp, forced: bool) -> ActionResult {
        self.run(faction, req, stamp, forced)
    }

    fn run(&mut self, faction: Faction, req: &ActionRequest, stamp: Stamp, forced: bool) -> ActionResult {
        let digest_before = self.checkpoint();
        let index = self.log.next_index();
        let (kind, result) = match parse_action(req) {
            Err(r) => (ActionKind::parse(&req.action), ActionResult::failure(&r)),
            Ok((action, warnings)) => {
                let mut result = match self.apply(faction, &action, stamp) {
                    Ok(r) => r,
                    Err(r) => ActionResult::failure(&r),
                };
                result.warnings.splice(0..0, warnings);
                (Some(action.kind()), result)
            }
        };
        if !forced {
            self.counters.entry(faction).or_default().record(kind, &result);
        }
        self.log.push(LogRecord::Action {
            index,
            clock_ms: self.world.clock_ms,
            faction,
            sent_at: stamp.sent_at,
            received_at: stamp.received_at,
            forced,
            request: req.clone(),
            result: result.clone(),
            digest_before,
        });
        if result.ok && kind.is_some_and(ActionKind::mutates_world) {
            if kind == Some(ActionKind::EndTurn) {
                self.announce_turn();
            }
            self.settle();
        }
        result
    }

    fn announce_turn(&mut self) {
        let w = &self.world;
        let (turn_number, active) = (w.turn_number, w.active_faction);
        let clock_ms = w.clock_ms;
        self.emit(EventNotice {
            event: EventKind::TurnStart,
            detail: json!({ "faction": active, "turn_number": turn_number }),
        });
        self.emit(EventNotice {
            event: EventKind::StateUpdate,
            detail: json!({ "active_faction": active, "turn_number": turn_number, "clock_ms": clock_ms }),
        });
    }

    /// Advance the simulated real-time clock.
    pub fn advance_clock(&mut self, dt_ms: u64) -> Result<u32, Rejection> {
        if self.outcome.is_some() {
            return reject(ErrorCode::GameOver, "the match is over");
        }
        let turns = rules::advance_clock(&mut self.world, &mut self.schedule, dt_ms)?;
        if turns > 0 {
            let w = &self.world;
            let detail = json!({ "active_faction": Value::Null, "turn_number": w.turn_number, "clock_ms": w.clock_ms });
            self.emit(EventNotice { event: EventKind::StateUpdate, detail });
        }
        self.settle();
        Ok(turns)
    }

    /// `faction` forfeits; the opponent wins.
    pub fn forfeit(&mut self, faction: Faction) -> Option<Outcome> {
        if self.outcome.is_some() || !self.world.is_participant(faction) {
            return None;
        }
        let digest_before = self.checkpoint();
        let index = self.log.next_index();
        self.log.push(LogRecord::Forfeit { index, clock_ms: self.world.clock_ms, faction, digest_before });
        let o = rules::forfeit(&self.world, faction);
        self.finish(o);
        Some(o)
    }

    /// Layers 1 to 3 for `action`, plus the rule check without mutation.
    pub fn validate(&self, faction: Faction, action: &Action) -> Result<(), Rejection> {
        self.check_access(faction, action)?;
        let w = &self.world;
        match action {
            Action::Move { unit_id, target } => plan_move(w, *unit_id, *target).map(drop),
            Action::Attack { unit_id, target_id } => check_attack(w, *unit_id, *target_id),
            Action::Rest { .. } | Action::Occupy { .. } | Action::Fortify { .. } | Action::Skill { .. } => {
                let (unit, support) = self.support_of(action)?;
                check_support_action(w, unit, &support)
            }
            _ => Ok(()),
        }
    }

    fn check_access(&self, faction: Faction, action: &Action) -> Result<(), Rejection> {
        let w = &self.world;
        let kind = action.kind();
        if !w.is_participant(faction) {
            return reject(ErrorCode::UnknownFaction, format!("{faction} is not in this match"));
        }
        if self.outcome.is_some() && kind.mutates_world() {
            return reject(ErrorCode::GameOver, "the match is over");
        }
        // Layer 1: bounds.
        for c in action.positions() {
            if !w.terrain.contains(c) {
                let s = w.terrain.size();
                return reject(ErrorCode::OutOfBounds, format!("{c} is outside the {}x{} map", s.width, s.height));
            }
        }
        // Layer 2: permissions.
        match action {
            Action::EndTurn { faction: named } => {
                if named.is_some_and(|n| n != faction) {
                    return reject(ErrorCode::WrongFaction, format!("cannot end the turn of {}", named.unwrap()));
                }
                if w.mode == Mode::RealTime {
                    return reject(ErrorCode::InvalidInMode, "end_turn is not available in real-time mode");
                }
                if w.active_faction != Some(faction) {
                    return reject(ErrorCode::NotYourTurn, format!("it is not {faction}'s turn"));
                }
            }
            Action::RegisterAgentInfo { faction: Some(named), .. } if *named != faction => {
                return reject(ErrorCode::WrongFaction, format!("this session controls {faction}, not {named}"));
            }
            Action::GetFactionState { faction: Some(named) } if !w.is_participant(*named) => {
                return reject(ErrorCode::UnknownFaction, format!("{named} is not in this match"));
            }
            _ => {}
        }
        if kind.is_unit_control() && w.mode == Mode::TurnBased && w.active_faction != Some(faction) {
            return reject(ErrorCode::NotYourTurn, format!("it is not {faction}'s turn"));
        }
        if let Some(unit) = action.unit() {
            if !w.registry.is_alive(unit) {
                return reject(ErrorCode::UnknownUnit, format!("no unit {}", unit.0));
            }
            if w.registry.faction_of(unit) != Some(faction) {
                return reject(ErrorCode::NotYourUnit, format!("unit {} does not belong to {faction}", unit.0));
            }
            if kind.is_unit_control() && w.mode == Mode::RealTime {
                let busy = w.registry.locks.get(unit).map_or(0, |l| l.busy_until_ms);
                if busy > w.clock_ms {
                    return reject(ErrorCode::UnitBusy, format!("unit {} is busy until {busy} ms", unit.0));
                }
            }
        }
        // Layer 3: components.
        if let Some(unit) = action.unit().filter(|_| kind.is_unit_control()) {
            let r = &w.registry;
            let needs: &[(&str, bool)] = &[
                ("Position", r.positions.contains(unit)),
                ("UnitStats", r.stats.contains(unit)),
                ("MovementPoints", kind != ActionKind::Move || r.movement.contains(unit)),
                ("ActionPoints", kind == ActionKind::Move || r.action_points.contains(unit)),
                ("TurnActivity", kind != ActionKind::Rest || r.activity.contains(unit)),
                ("SkillState", kind != ActionKind::Skill || r.skills.contains(unit)),
            ];
            if let Some((name, _)) = needs.iter().find(|(_, present)| !present) {
                return reject(ErrorCode::MissingComponent, format!("unit {} has no {name}", unit.0));
            }
        }
        Ok(())
    }

    fn support_of(&self, action: &Action) -> Result<(EntityId, SupportAction), Rejection> {
        let w = &self.world;
        let here = |u: EntityId| w.registry.position_of(u).unwrap_or(HexCoord::new(-1, -1));
        Ok(match action {
            Action::Rest { unit_id } => (*unit_id, SupportAction::Rest),
            Action::Occupy { unit_id, position } => {
                (*unit_id, SupportAction::Occupy { target: position.unwrap_or_else(|| here(*unit_id)) })
            }
            Action::Fortify { unit_id, position } => {
                (*unit_id, SupportAction::Fortify { target: position.unwrap_or_else(|| here(*unit_id)) })
            }
            Action::Skill { unit_id, skill_name, target } => {
                let skill = SkillName::parse(skill_name).ok_or_else(|| {
                    Rejection::new(ErrorCode::UnknownSkill, format!("unknown skill `{skill_name}` (fire_attack, ambush)"))
                })?;
                let target = match target {
                    None => return reject(ErrorCode::SchemaViolation, format!("skill {skill_name} requires a target")),
                    Some(TargetRef::Unit(id)) => *id,
                    Some(TargetRef::Position(c)) => w
                        .registry
                        .unit_at(*c)
                        .ok_or_else(|| Rejection::new(ErrorCode::UnknownUnit, format!("no unit at {c}")))?,
                };
                (*unit_id, SupportAction::Skill { skill, target })
            }
            _ => unreachable!("not a support action"),
        })
    }

    fn lock(&mut self, unit: EntityId, kind: ActionKind, path_cost: u32) -> Option<u64> {
        if self.world.mode != Mode::RealTime {
            return None;
        }
        let ms = action_lock_duration(kind, path_cost, &self.world.rules.real_time).as_millis() as u64;
        let until = self.world.clock_ms + ms;
        if let Some(l) = self.world.registry.locks.get_mut(unit) {
            l.busy_until_ms = until;
        }
        Some(ms)
    }

    fn apply(&mut self, faction: Faction, action: &Action, stamp: Stamp) -> Result<ActionResult, Rejection> {
        self.check_access(faction, action)?;
        let result = match action {
            Action::Move { unit_id, target } => {
                let from = self.world.registry.position_of(*unit_id);
                let path = plan_move(&self.world, *unit_id, *target)?;
                let left = apply_move(&mut self.world, *unit_id, &path)?;
                let mut r = ActionResult::success(json!({
                    "unit_id": unit_id,
                    "from": from,
                    "to": target,
                    "path": path.steps,
                    "cost": path.total_cost,
                    "movement_left": left,
                }));
                r.lock_ms = self.lock(*unit_id, ActionKind::Move, path.total_cost);
                r
            }
            Action::Attack { unit_id, target_id } => {
                let report = resolve_combat(&mut self.world, *unit_id, *target_id)?;
                let mut r = ActionResult::success(to_value(&report));
                r.lock_ms = self.lock(*unit_id, ActionKind::Attack, 0);
                r
            }
            Action::Rest { .. } | Action::Occupy { .. } | Action::Fortify { .. } | Action::Skill { .. } => {
                let (unit, support) = self.support_of(action)?;
                let out = apply_support_action(&mut self.world, unit, &support)?;
                let mut r = ActionResult::success(to_value(&out));
                r.lock_ms = self.lock(unit, action.kind(), 0);
                r
            }
            Action::Observation { unit_id, level } => {
                ActionResult::success(to_value(&build_observation(&self.world, faction, *level, *unit_id)))
            }
            Action::GetFactionState { faction: named } => {
                ActionResult::success(self.faction_state(faction, named.unwrap_or(faction)))
            }
            Action::EndTurn { .. } => {
                let t = end_turn_refresh(&mut self.world, &mut self.schedule, faction)?;
                ActionResult::success(to_value(&t))
            }
            Action::GetActionList => ActionResult::success(json!({ "actions": CATALOG })),
            Action::RegisterAgentInfo { agent_id, model_id, provider, .. } => {
                let info = self.agents.entry(faction).or_default();
                if agent_id.is_some() {
                    info.agent_id = agent_id.clone();
                }
                if model_id.is_some() {
                    info.model_id = model_id.clone();
                }
                if provider.is_some() {
                    info.provider = provider.clone();
                }
                ActionResult::success(json!({ "faction": faction, "agent": info }))
            }
            Action::StrategyPing { score, evidence } => {
                if !score.is_finite() {
                    return reject(ErrorCode::SchemaViolation, "strategy_ping: score must be finite");
                }
                let clamped = score.clamp(0.0, 1.0);
                let warning = (clamped != *score).then(|| format!("score {score} clamped to {clamped}"));
                self.telemetry.push(TelemetryRecord {
                    faction,
                    clock_ms: self.world.clock_ms,
                    received_at: stamp.received_at,
                    kind: TelemetryKind::StrategyPing,
                    score: Some(clamped),
                    evidence: Some(evidence.clone()),
                    stats: None,
                    warning: warning.clone(),
                });
                let mut r = ActionResult::success(json!({ "stored": true, "score": clamped }));
                r.warnings.extend(warning);
                r
            }
            Action::ReportLlmStats { stats } => {
                self.telemetry.push(TelemetryRecord {
                    faction,
                    clock_ms: self.world.clock_ms,
                    received_at: stamp.received_at,
                    kind: TelemetryKind::LlmStats,
                    score: None,
                    evidence: None,
                    stats: Some(stats.clone()),
                    warning: None,
                });
                ActionResult::success(json!({ "stored": true }))
            }
        };
        Ok(result)
    }

    fn standing(&self, f: Faction) -> FactionStanding {
        match &self.outcome {
            None => FactionStanding::Active,
            Some(o) if o.winner.is_none() => FactionStanding::Draw,
            Some(o) if o.winner == Some(f) => FactionStanding::Victory,
            Some(_) if self.world.registry.units_of(f).is_empty() => FactionStanding::Eliminated,
            Some(_) => FactionStanding::Defeat,
        }
    }

    /// Own factions see their roster; other factions only their standing and
    /// unit count.
    fn faction_state(&self, caller: Faction, f: Faction) -> Value {
        let w = &self.world;
        let units = w.registry.units_of(f);
        let mut doc = json!({
            "faction": f,
            "state": self.standing(f),
            "units_alive": units.len(),
            "turn_number": w.turn_number,
            "active_faction": w.active_faction,
        });
        if caller == f {
            let r = &w.registry;
            let roster: Vec<Value> = units
                .iter()
                .map(|id| {
                    json!({
                        "id": id,
                        "type": r.stats.get(*id).map(|s| s.unit_type),
                        "position": r.position_of(*id),
                        "unit_count": r.counts.get(*id).map(|c| c.0),
                    })
                })
                .collect();
            doc["soldiers_alive"] = json!(w.soldiers_alive(f));
            doc["surviving_units"] = Value::Array(roster);
            if let Some(s) = w.faction_state.get(&f) {
                doc["construction_points"] = json!(s.construction_points);
                doc["resources"] = json!(s.resources);
            }
        }
        if let Some(o) = &self.outcome {
            doc["outcome"] = json!(o);
        }
        doc
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("engine documents serialize")
}
