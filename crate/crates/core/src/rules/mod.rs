//! Game rules: combat, movement, support actions, the turn economy and
//! victory determination.

pub mod combat;
pub mod movement;
pub mod support;
pub mod turn;

use serde::{Deserialize, Serialize};

pub use combat::{
    casualties, check_attack, effective_attack, effectiveness, resolve_combat, BattleReport, CombatError,
    CombatInputs, EffectivenessCurve,
};
pub use movement::{apply_move, move_cost_for, plan_move};
pub use support::{apply_support_action, check_support_action, SupportAction, SupportOutcome};
pub use turn::{advance_clock, end_turn_refresh, standard_schedule, TurnTransition};

use crate::error::{ErrorCode, Rejection};
use crate::world::{EntityId, Faction, Mode, UnitStats, WorldState};

pub(crate) fn require<T>(v: Option<T>, id: EntityId, component: &str) -> Result<T, Rejection> {
    v.ok_or_else(|| Rejection::new(ErrorCode::MissingComponent, format!("unit {} has no {component}", id.0)))
}

pub(crate) fn unit_stats(world: &WorldState, id: EntityId) -> Result<&UnitStats, Rejection> {
    require(world.registry.stats.get(id), id, "UnitStats")
}

pub(crate) fn check_alive(world: &WorldState, id: EntityId, code: ErrorCode) -> Result<(), Rejection> {
    if world.registry.is_alive(id) {
        Ok(())
    } else {
        Err(Rejection::new(code, format!("unit {} does not exist", id.0)))
    }
}

/// Whether `unit` may spend `n` action points now. Real-time play has no AP
/// economy; locks take its place.
pub(crate) fn check_ap(world: &WorldState, unit: EntityId, n: u32) -> Result<(), Rejection> {
    if world.mode == Mode::RealTime || n == 0 {
        return Ok(());
    }
    let ap = require(world.registry.action_points.get(unit), unit, "ActionPoints")?.0;
    let spent = world.registry.activity.get(unit).map_or(0, |a| a.ap_spent);
    if ap.current < n || spent + n > ap.max {
        return Err(Rejection::new(
            ErrorCode::InsufficientAp,
            format!("unit {} has {} AP ({} spent this turn), needs {n}", unit.0, ap.current, spent),
        ));
    }
    Ok(())
}

pub(crate) fn spend_ap(world: &mut WorldState, unit: EntityId, n: u32) -> Result<(), Rejection> {
    check_ap(world, unit, n)?;
    if world.mode == Mode::RealTime || n == 0 {
        return Ok(());
    }
    let r = &mut world.registry;
    r.action_points.get_mut(unit).expect("checked").0.spend(n);
    if let Some(a) = r.activity.get_mut(unit) {
        a.ap_spent += n;
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    Elimination,
    Horizon,
    Forfeit,
}

/// Terminal result of a match.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// `None` is a draw.
    pub winner: Option<Faction>,
    pub loser: Option<Faction>,
    /// Winner's surviving soldier fraction; 0 on a draw.
    pub surviving_fraction: f64,
    /// Turns (turn-based) or simulated ms (real-time).
    pub duration: u64,
    /// H or T_max, in the same unit as `duration`.
    pub duration_limit: u64,
    pub terminal_reason: TerminalReason,
}

impl Outcome {
    pub fn is_draw(&self) -> bool {
        self.winner.is_none()
    }

    /// Score of `f` in {0, 0.5, 1}.
    pub fn score_of(&self, f: Faction) -> f64 {
        match self.winner {
            None => 0.5,
            Some(w) if w == f => 1.0,
            Some(_) => 0.0,
        }
    }
}

/// Elapsed match time and its limit in the mode's unit.
pub fn match_duration(world: &WorldState) -> (u64, u64) {
    match world.mode {
        Mode::TurnBased => {
            let h = u64::from(world.horizon.turns);
            (u64::from(world.turn_number).min(h), h)
        }
        Mode::RealTime => (world.clock_ms, world.horizon.real_time_ms),
    }
}

pub fn horizon_reached(world: &WorldState) -> bool {
    match world.mode {
        Mode::TurnBased => world.turn_number > world.horizon.turns,
        Mode::RealTime => world.clock_ms >= world.horizon.real_time_ms,
    }
}

/// Terminal check: elimination first, then the horizon with a surviving
/// soldier fraction tiebreak.
pub fn check_victory(world: &WorldState) -> Option<Outcome> {
    let [a, b] = world.factions;
    let (duration, duration_limit) = match_duration(world);
    let alive = |f| !world.registry.units_of(f).is_empty();
    let decided = |winner: Faction, loser: Faction, reason| Outcome {
        winner: Some(winner),
        loser: Some(loser),
        surviving_fraction: world.surviving_fraction(winner),
        duration,
        duration_limit,
        terminal_reason: reason,
    };
    match (alive(a), alive(b)) {
        (true, false) => return Some(decided(a, b, TerminalReason::Elimination)),
        (false, true) => return Some(decided(b, a, TerminalReason::Elimination)),
        (false, false) => {
            return Some(Outcome {
                winner: None,
                loser: None,
                surviving_fraction: 0.0,
                duration,
                duration_limit,
                terminal_reason: TerminalReason::Elimination,
            })
        }
        (true, true) => {}
    }
    if !horizon_reached(world) {
        return None;
    }
    let (fa, fb) = (world.surviving_fraction(a), world.surviving_fraction(b));
    if fa > fb {
        Some(decided(a, b, TerminalReason::Horizon))
    } else if fb > fa {
        Some(decided(b, a, TerminalReason::Horizon))
    } else {
        Some(Outcome {
            winner: None,
            loser: None,
            surviving_fraction: 0.0,
            duration,
            duration_limit,
            terminal_reason: TerminalReason::Horizon,
        })
    }
}

/// Outcome of a forfeit by `loser`.
pub fn forfeit(world: &WorldState, loser: Faction) -> Outcome {
    let winner = world.opponent(loser).unwrap_or(loser);
    let (duration, duration_limit) = match_duration(world);
    Outcome {
        winner: Some(winner),
        loser: Some(loser),
        surviving_fraction: world.surviving_fraction(winner),
        duration,
        duration_limit,
        terminal_reason: TerminalReason::Forfeit,
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use std::sync::Arc;

    use crate::hex::{GridSize, HexCoord};
    use crate::scenario::Scenario;
    use crate::world::{EntityId, Faction, Mode, Terrain, TerrainGrid, UnitType, WorldState};

    pub fn plain_world(mode: Mode) -> WorldState {
        WorldState::new(
            Arc::new(Scenario::default()),
            TerrainGrid::filled(GridSize::new(15, 15), Terrain::Plain),
            mode,
        )
    }

    pub fn put(w: &mut WorldState, f: Faction, t: UnitType, at: HexCoord) -> EntityId {
        w.spawn_unit(f, t, at).unwrap()
    }

    /// Wei attacker at (5,5), Shu defender at (5,6) standing on `terrain`.
    pub fn duel_world(attacker: UnitType, defender: UnitType, terrain: Terrain) -> (WorldState, EntityId, EntityId) {
        let mut w = plain_world(Mode::TurnBased);
        w.terrain.set(HexCoord::new(5, 6), terrain);
        let a = put(&mut w, Faction::Wei, attacker, HexCoord::new(5, 5));
        let d = put(&mut w, Faction::Shu, defender, HexCoord::new(5, 6));
        (w, a, d)
    }
}
