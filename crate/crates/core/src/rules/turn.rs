//! Turn economy: end-of-turn bookkeeping, refresh, income and the
//! real-time clock.
//!
//! Turn-based play alternates factions; `turn_number` advances when play
//! returns to the first faction. Real-time play runs a virtual turn (both
//! factions' end and start phases) every `virtual_turn_ms` of simulated time
//! and regenerates MP continuously.

use serde::{Deserialize, Serialize};

use crate::error::{ErrorCode, Rejection};
use crate::world::{Faction, Mode, Phase, Schedule, StatusKind, System, Terrain, TurnActivity, WorldState};

/// Ticks timed statuses of the faction that just ended its turn.
pub struct StatusTick;

impl System for StatusTick {
    fn name(&self) -> &'static str {
        "status_tick"
    }
    fn run(&mut self, world: &mut WorldState, phase: Phase) {
        let Phase::TurnEnd(f) = phase else { return };
        for id in world.registry.units_of(f) {
            if let Some(s) = world.registry.statuses.get_mut(id) {
                s.tick();
            }
        }
    }
}

/// Counts skill cooldowns down at the owner's turn end.
pub struct CooldownTick;

impl System for CooldownTick {
    fn name(&self) -> &'static str {
        "cooldown_tick"
    }
    fn run(&mut self, world: &mut WorldState, phase: Phase) {
        let Phase::TurnEnd(f) = phase else { return };
        for id in world.registry.units_of(f) {
            if let Some(s) = world.registry.skills.get_mut(id) {
                s.cooldowns.retain(|_, n| {
                    *n = n.saturating_sub(1);
                    *n > 0
                });
            }
        }
    }
}

/// Units that attacked at least twice in a turn become fatigued until rest.
pub struct FatigueOnExertion;

impl System for FatigueOnExertion {
    fn name(&self) -> &'static str {
        "fatigue"
    }
    fn run(&mut self, world: &mut WorldState, phase: Phase) {
        let Phase::TurnEnd(f) = phase else { return };
        let r = &mut world.registry;
        for id in r.units_of(f) {
            if r.activity.get(id).is_some_and(|a| a.attacks >= 2) {
                if let Some(s) = r.statuses.get_mut(id) {
                    s.apply(StatusKind::Fatigue, None);
                }
            }
        }
    }
}

/// Restores AP and MP and clears per-turn activity.
pub struct Refresh;

impl System for Refresh {
    fn name(&self) -> &'static str {
        "refresh"
    }
    fn run(&mut self, world: &mut WorldState, phase: Phase) {
        let Phase::TurnStart(f) = phase else { return };
        let real_time = world.mode == Mode::RealTime;
        let r = &mut world.registry;
        for id in r.units_of(f) {
            if let Some(ap) = r.action_points.get_mut(id) {
                ap.0.fill();
            }
            if !real_time {
                if let Some(mp) = r.movement.get_mut(id) {
                    mp.0.fill();
                }
            }
            if let Some(a) = r.activity.get_mut(id) {
                *a = TurnActivity::default();
            }
        }
    }
}

/// Adds per-city income to the owner's counters. Inert: nothing consumes it.
pub struct CityIncome;

impl System for CityIncome {
    fn name(&self) -> &'static str {
        "city_income"
    }
    fn run(&mut self, world: &mut WorldState, phase: Phase) {
        let Phase::TurnStart(f) = phase else { return };
        let size = world.terrain.size();
        let cities = size
            .cells()
            .filter(|c| world.terrain.terrain(*c) == Terrain::City && world.terrain.owner(*c) == Some(f))
            .count() as u32;
        let e = world.rules.economy;
        if let Some(s) = world.faction_state.get_mut(&f) {
            s.resources.manpower += cities * e.city_manpower;
            s.resources.supplies += cities * e.city_supplies;
        }
    }
}

/// Real-time MP regeneration: one point per elapsed regeneration period.
pub struct MovementRegen;

impl System for MovementRegen {
    fn name(&self) -> &'static str {
        "movement_regen"
    }
    fn run(&mut self, world: &mut WorldState, phase: Phase) {
        let Phase::Tick { now_ms, tick_ms } = phase else { return };
        let rate = world.rules.real_time.mp_regen_per_s;
        if rate <= 0.0 {
            return;
        }
        let period = ((1000.0 / rate).round() as u64).max(1);
        let gained = now_ms / period - now_ms.saturating_sub(tick_ms) / period;
        if gained == 0 {
            return;
        }
        for (_, mp) in world.registry.movement.iter_mut() {
            mp.0.add(gained as u32);
        }
    }
}

/// The standard system order.
pub fn standard_schedule() -> Schedule {
    Schedule::new()
        .with(StatusTick)
        .with(CooldownTick)
        .with(FatigueOnExertion)
        .with(Refresh)
        .with(CityIncome)
        .with(MovementRegen)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnTransition {
    pub ended: Faction,
    pub started: Faction,
    pub turn_number: u32,
}

/// End `faction`'s turn and start its opponent's.
pub fn end_turn_refresh(world: &mut WorldState, schedule: &mut Schedule, faction: Faction) -> Result<TurnTransition, Rejection> {
    if world.mode != Mode::TurnBased {
        return Err(Rejection::new(ErrorCode::InvalidInMode, "end_turn is a turn-based action"));
    }
    let next = world
        .opponent(faction)
        .ok_or_else(|| Rejection::new(ErrorCode::UnknownFaction, format!("{faction} is not in this match")))?;
    if world.active_faction != Some(faction) {
        return Err(Rejection::new(ErrorCode::NotYourTurn, format!("it is not {faction}'s turn")));
    }
    schedule.run(world, Phase::TurnEnd(faction));
    if next == world.factions[0] {
        world.turn_number += 1;
    }
    world.active_faction = Some(next);
    schedule.run(world, Phase::TurnStart(next));
    Ok(TurnTransition { ended: faction, started: next, turn_number: world.turn_number })
}

/// Advance the real-time clock by `dt_ms`. Returns how many virtual turns
/// completed.
pub fn advance_clock(world: &mut WorldState, schedule: &mut Schedule, dt_ms: u64) -> Result<u32, Rejection> {
    if world.mode != Mode::RealTime {
        return Err(Rejection::new(ErrorCode::InvalidInMode, "the clock only runs in real-time mode"));
    }
    let before = world.clock_ms;
    world.clock_ms += dt_ms;
    schedule.run(world, Phase::Tick { now_ms: world.clock_ms, tick_ms: dt_ms });
    let period = world.rules.real_time.virtual_turn_ms.max(1);
    let turns = (world.clock_ms / period - before / period) as u32;
    for _ in 0..turns {
        for f in world.factions {
            schedule.run(world, Phase::TurnEnd(f));
        }
        for f in world.factions {
            schedule.run(world, Phase::TurnStart(f));
        }
        world.turn_number += 1;
    }
    Ok(turns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hex::HexCoord;
    use crate::rules::testing::{plain_world, put};
    use crate::world::UnitType;

    #[test]
    fn refresh_restores_at_next_own_turn() {
        let mut w = plain_world(Mode::TurnBased);
        let mut s = standard_schedule();
        let u = put(&mut w, Faction::Wei, UnitType::Cavalry, HexCoord::new(2, 2));
        put(&mut w, Faction::Shu, UnitType::Cavalry, HexCoord::new(9, 9));
        w.registry.action_points.get_mut(u).unwrap().0.current = 0;
        w.registry.movement.get_mut(u).unwrap().0.current = 1;
        let t = end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap();
        assert_eq!((t.started, t.turn_number), (Faction::Shu, 1));
        assert_eq!(end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap_err().code, ErrorCode::NotYourTurn);
        let t = end_turn_refresh(&mut w, &mut s, Faction::Shu).unwrap();
        assert_eq!((t.started, t.turn_number), (Faction::Wei, 2));
        assert_eq!(w.registry.action_points.get(u).unwrap().0.current, 2);
        assert_eq!(w.registry.movement.get(u).unwrap().0.current, 5);
    }

    #[test]
    fn status_with_one_turn_expires() {
        let mut w = plain_world(Mode::TurnBased);
        let mut s = standard_schedule();
        let u = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(2, 2));
        w.registry.statuses.get_mut(u).unwrap().apply(StatusKind::Confusion, Some(1));
        end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap();
        assert!(!w.registry.statuses.get(u).unwrap().has(StatusKind::Confusion));
    }

    #[test]
    fn cooldown_three_turns() {
        let mut w = plain_world(Mode::TurnBased);
        let mut s = standard_schedule();
        let u = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(2, 2));
        let skill = crate::world::SkillName::FireAttack;
        w.registry.skills.get_mut(u).unwrap().cooldowns.insert(skill, 3);
        for left in [2, 1] {
            end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap();
            end_turn_refresh(&mut w, &mut s, Faction::Shu).unwrap();
            assert_eq!(w.registry.skills.get(u).unwrap().cooldowns.get(&skill), Some(&left));
        }
        end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap();
        assert!(w.registry.skills.get(u).unwrap().cooldowns.is_empty());
    }

    #[test]
    fn double_attack_fatigues() {
        let mut w = plain_world(Mode::TurnBased);
        let mut s = standard_schedule();
        let u = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(2, 2));
        w.registry.activity.get_mut(u).unwrap().attacks = 2;
        end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap();
        assert!(w.registry.statuses.get(u).unwrap().has(StatusKind::Fatigue));
    }

    #[test]
    fn city_income_per_owned_city() {
        let mut w = plain_world(Mode::TurnBased);
        let mut s = standard_schedule();
        let c = HexCoord::new(7, 7);
        w.terrain.set(c, Terrain::City);
        w.terrain.set_owner(c, Some(Faction::Shu));
        let before = w.faction_state[&Faction::Shu].resources;
        end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap();
        let after = w.faction_state[&Faction::Shu].resources;
        assert_eq!(after.manpower - before.manpower, 10);
        assert_eq!(after.supplies - before.supplies, 5);
    }

    #[test]
    fn real_time_clock_regen_and_virtual_turns() {
        let mut w = plain_world(Mode::RealTime);
        let mut s = standard_schedule();
        let u = put(&mut w, Faction::Wei, UnitType::Cavalry, HexCoord::new(2, 2));
        w.registry.movement.get_mut(u).unwrap().0.current = 0;
        assert_eq!(end_turn_refresh(&mut w, &mut s, Faction::Wei).unwrap_err().code, ErrorCode::InvalidInMode);
        let mut turns = 0;
        for _ in 0..25 {
            turns += advance_clock(&mut w, &mut s, 100).unwrap();
        }
        assert_eq!(w.clock_ms, 2500);
        assert_eq!(w.registry.movement.get(u).unwrap().0.current, 2);
        assert_eq!(turns, 0);
        for _ in 0..75 {
            turns += advance_clock(&mut w, &mut s, 100).unwrap();
        }
        assert_eq!(turns, 1);
        assert_eq!(w.turn_number, 2);
    }
}
