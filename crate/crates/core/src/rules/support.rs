//! Support actions: rest, occupy, fortify and skills.
//!
//! Rest is free, once per turn, and ends the unit's movement. The AP it
//! recovers still counts against the per-turn spend cap.

use serde::{Deserialize, Serialize};

use super::combat::{check_target, strike};
use super::{check_alive, check_ap, require, spend_ap, BattleReport};
use crate::error::{ErrorCode, Rejection};
use crate::hex::{hex_distance, HexCoord};
use crate::world::{EntityId, Faction, SkillName, StatusKind, Terrain, WorldState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportAction {
    Rest,
    Occupy { target: HexCoord },
    Fortify { target: HexCoord },
    Skill { skill: SkillName, target: EntityId },
}

impl SupportAction {
    pub fn name(&self) -> &'static str {
        match self {
            SupportAction::Rest => "rest",
            SupportAction::Occupy { .. } => "occupy",
            SupportAction::Fortify { .. } => "fortify",
            SupportAction::Skill { .. } => "skill",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportOutcome {
    Rested {
        action_points: u32,
        /// Negative status whose duration was reduced, if any.
        relieved: Option<StatusKind>,
    },
    Occupied {
        tile: HexCoord,
        previous_owner: Option<Faction>,
    },
    Fortified {
        tile: HexCoord,
        level: u8,
        construction_points_left: u32,
    },
    SkillUsed {
        skill: SkillName,
        target: EntityId,
        battle: Option<BattleReport>,
        status_applied: Option<StatusKind>,
        cooldown: u32,
    },
}

fn check_tile(world: &WorldState, unit: EntityId, target: HexCoord) -> Result<(HexCoord, Terrain), Rejection> {
    let t = world
        .terrain
        .get(target)
        .ok_or_else(|| Rejection::new(ErrorCode::OutOfBounds, format!("{target} is outside the map")))?;
    let at = require(world.registry.position_of(unit), unit, "Position")?;
    let dist = hex_distance(at, target);
    if dist > 1 {
        return Err(Rejection::new(
            ErrorCode::OutOfRange,
            format!("{target} is {dist} hexes away; only the current or an adjacent tile qualifies"),
        ));
    }
    if !t.supports_construction() {
        return Err(Rejection::new(ErrorCode::TerrainForbidsConstruction, format!("{target} is {t:?}")));
    }
    Ok((at, t))
}

/// Validates a support action without mutating the world.
pub fn check_support_action(world: &WorldState, unit: EntityId, action: &SupportAction) -> Result<(), Rejection> {
    check_alive(world, unit, ErrorCode::UnknownUnit)?;
    let faction = require(world.registry.faction_of(unit), unit, "Faction")?;
    match *action {
        SupportAction::Rest => {
            require(world.registry.action_points.get(unit), unit, "ActionPoints")?;
            let activity = require(world.registry.activity.get(unit), unit, "TurnActivity")?;
            if activity.rested {
                return Err(Rejection::new(ErrorCode::AlreadyRested, format!("unit {} already rested", unit.0)));
            }
            Ok(())
        }
        SupportAction::Occupy { target } => {
            check_tile(world, unit, target)?;
            if let Some(other) = world.registry.unit_at(target) {
                if world.registry.faction_of(other) != Some(faction) {
                    return Err(Rejection::new(ErrorCode::Blocked, format!("{target} is held by unit {}", other.0)));
                }
            }
            if world.terrain.owner(target) == Some(faction) {
                return Err(Rejection::new(ErrorCode::AlreadyOwned, format!("{target} already belongs to {faction}")));
            }
            check_ap(world, unit, 1)
        }
        SupportAction::Fortify { target } => {
            check_tile(world, unit, target)?;
            if world.terrain.owner(target) != Some(faction) {
                return Err(Rejection::new(ErrorCode::TileNotOwned, format!("{target} is not owned by {faction}")));
            }
            let max = world.rules.combat.max_fortification;
            if world.terrain.fortification(target) >= max {
                return Err(Rejection::new(ErrorCode::MaxFortification, format!("{target} is at level {max}")));
            }
            check_ap(world, unit, 1)?;
            let cp = world.faction_state.get(&faction).map_or(0, |s| s.construction_points);
            if cp < 1 {
                return Err(Rejection::new(ErrorCode::InsufficientCp, format!("{faction} has no construction points")));
            }
            Ok(())
        }
        SupportAction::Skill { skill, target } => {
            let spec = *world.rules.skills.get(skill);
            let state = require(world.registry.skills.get(unit), unit, "SkillState")?;
            if let Some(left) = state.cooldowns.get(&skill).filter(|n| **n > 0) {
                return Err(Rejection::new(
                    ErrorCode::SkillOnCooldown,
                    format!("{} is on cooldown for {left} more turn(s)", skill.as_str()),
                ));
            }
            check_target(world, unit, target, spec.range)?;
            check_ap(world, unit, spec.action_points)?;
            if state.skill_points.current < spec.skill_points {
                return Err(Rejection::new(
                    ErrorCode::InsufficientSp,
                    format!("unit {} has {} SP, needs {}", unit.0, state.skill_points.current, spec.skill_points),
                ));
            }
            Ok(())
        }
    }
}

/// Validate and apply a support action.
pub fn apply_support_action(world: &mut WorldState, unit: EntityId, action: &SupportAction) -> Result<SupportOutcome, Rejection> {
    check_support_action(world, unit, action)?;
    let faction = world.registry.faction_of(unit).expect("checked");
    match *action {
        SupportAction::Rest => {
            let r = &mut world.registry;
            let ap = &mut r.action_points.get_mut(unit).expect("checked").0;
            ap.add(1);
            let action_points = ap.current;
            r.activity.get_mut(unit).expect("checked").rested = true;
            if let Some(mp) = r.movement.get_mut(unit) {
                mp.0.current = 0;
            }
            let relieved = r.statuses.get_mut(unit).and_then(|s| {
                if s.0.remove(&StatusKind::Fatigue).is_some() {
                    return Some(StatusKind::Fatigue);
                }
                let left = s.0.get_mut(&StatusKind::Confusion)?;
                match left {
                    Some(n) if *n > 1 => *n -= 1,
                    _ => {
                        s.0.remove(&StatusKind::Confusion);
                    }
                }
                Some(StatusKind::Confusion)
            });
            Ok(SupportOutcome::Rested { action_points, relieved })
        }
        SupportAction::Occupy { target } => {
            spend_ap(world, unit, 1)?;
            let previous_owner = world.terrain.owner(target);
            world.terrain.set_owner(target, Some(faction));
            if previous_owner.is_some() {
                world.terrain.set_fortification(target, 0);
            }
            Ok(SupportOutcome::Occupied { tile: target, previous_owner })
        }
        SupportAction::Fortify { target } => {
            spend_ap(world, unit, 1)?;
            let fs = world.faction_state.get_mut(&faction).expect("checked");
            fs.construction_points -= 1;
            let construction_points_left = fs.construction_points;
            let level = world.terrain.fortification(target) + 1;
            world.terrain.set_fortification(target, level);
            Ok(SupportOutcome::Fortified { tile: target, level, construction_points_left })
        }
        SupportAction::Skill { skill, target } => {
            let spec = *world.rules.skills.get(skill);
            spend_ap(world, unit, spec.action_points)?;
            let state = world.registry.skills.get_mut(unit).expect("checked");
            state.skill_points.spend(spec.skill_points);
            state.cooldowns.insert(skill, spec.cooldown_turns);
            let (battle, status_applied) = match skill {
                SkillName::FireAttack => (Some(strike(world, unit, target, true)), None),
                SkillName::Ambush => {
                    let turns = world.rules.statuses.confusion_turns;
                    world
                        .registry
                        .statuses
                        .get_mut(target)
                        .expect("checked")
                        .apply(StatusKind::Confusion, Some(turns));
                    (None, Some(StatusKind::Confusion))
                }
            };
            Ok(SupportOutcome::SkillUsed { skill, target, battle, status_applied, cooldown: spec.cooldown_turns })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::testing::{duel_world, plain_world, put};
    use crate::world::{Mode, UnitType};

    #[test]
    fn occupy_adjacent_city() {
        let mut w = plain_world(Mode::TurnBased);
        let u = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(5, 5));
        let city = HexCoord::new(5, 6);
        w.terrain.set(city, Terrain::City);
        let out = apply_support_action(&mut w, u, &SupportAction::Occupy { target: city }).unwrap();
        assert_eq!(out, SupportOutcome::Occupied { tile: city, previous_owner: None });
        assert_eq!(w.terrain.owner(city), Some(Faction::Wei));
        assert_eq!(w.registry.action_points.get(u).unwrap().0.current, 1);
        let again = apply_support_action(&mut w, u, &SupportAction::Occupy { target: city });
        assert_eq!(again.unwrap_err().code, ErrorCode::AlreadyOwned);
        let far = apply_support_action(&mut w, u, &SupportAction::Occupy { target: HexCoord::new(5, 8) });
        assert_eq!(far.unwrap_err().code, ErrorCode::OutOfRange);
    }

    #[test]
    fn fortify_rules() {
        let mut w = plain_world(Mode::TurnBased);
        let u = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(5, 5));
        let water = HexCoord::new(5, 6);
        w.terrain.set(water, Terrain::Water);
        let err = apply_support_action(&mut w, u, &SupportAction::Fortify { target: water }).unwrap_err();
        assert_eq!(err.code, ErrorCode::TerrainForbidsConstruction);

        let here = HexCoord::new(5, 5);
        let fortify = SupportAction::Fortify { target: here };
        assert_eq!(apply_support_action(&mut w, u, &fortify).unwrap_err().code, ErrorCode::TileNotOwned);
        w.terrain.set_owner(here, Some(Faction::Wei));
        let out = apply_support_action(&mut w, u, &fortify).unwrap();
        assert!(matches!(out, SupportOutcome::Fortified { level: 1, construction_points_left: 4, .. }));
        assert_eq!(w.registry.action_points.get(u).unwrap().0.current, 1);

        w.terrain.set_fortification(here, 3);
        assert_eq!(apply_support_action(&mut w, u, &fortify).unwrap_err().code, ErrorCode::MaxFortification);
        w.terrain.set_fortification(here, 1);
        w.faction_state.get_mut(&Faction::Wei).unwrap().construction_points = 0;
        assert_eq!(apply_support_action(&mut w, u, &fortify).unwrap_err().code, ErrorCode::InsufficientCp);
    }

    #[test]
    fn rest_restores_ap_and_relieves_status() {
        let mut w = plain_world(Mode::TurnBased);
        let u = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(5, 5));
        w.registry.action_points.get_mut(u).unwrap().0.current = 1;
        w.registry.statuses.get_mut(u).unwrap().apply(StatusKind::Fatigue, None);
        let out = apply_support_action(&mut w, u, &SupportAction::Rest).unwrap();
        assert_eq!(out, SupportOutcome::Rested { action_points: 2, relieved: Some(StatusKind::Fatigue) });
        assert!(!w.registry.statuses.get(u).unwrap().has(StatusKind::Fatigue));
        assert_eq!(w.registry.movement.get(u).unwrap().0.current, 0);
        let again = apply_support_action(&mut w, u, &SupportAction::Rest).unwrap_err();
        assert_eq!(again.code, ErrorCode::AlreadyRested);
    }

    #[test]
    fn fire_attack_then_cooldown() {
        let (mut w, cav, inf) = duel_world(UnitType::Archer, UnitType::Infantry, Terrain::Plain);
        let fire = SupportAction::Skill { skill: SkillName::FireAttack, target: inf };
        w.registry.statuses.get_mut(cav).unwrap().apply(StatusKind::Fatigue, None);
        let out = apply_support_action(&mut w, cav, &fire).unwrap();
        let SupportOutcome::SkillUsed { battle: Some(b), cooldown: 3, .. } = out else { panic!("{out:?}") };
        // 70 * 100 / (100 + 70), fatigue ignored
        assert_eq!(b.casualties, 41);
        assert_eq!(apply_support_action(&mut w, cav, &fire).unwrap_err().code, ErrorCode::SkillOnCooldown);
        assert_eq!(w.registry.skills.get(cav).unwrap().skill_points.current, 1);
    }

    #[test]
    fn ambush_confuses_adjacent_enemy() {
        let (mut w, a, d) = duel_world(UnitType::Infantry, UnitType::Cavalry, Terrain::Plain);
        let friend = put(&mut w, Faction::Wei, UnitType::Archer, HexCoord::new(4, 5));
        let bad = SupportAction::Skill { skill: SkillName::Ambush, target: friend };
        assert_eq!(apply_support_action(&mut w, a, &bad).unwrap_err().code, ErrorCode::FriendlyFire);
        let ok = SupportAction::Skill { skill: SkillName::Ambush, target: d };
        apply_support_action(&mut w, a, &ok).unwrap();
        assert!(w.registry.statuses.get(d).unwrap().has(StatusKind::Confusion));
    }

    #[test]
    fn skill_points_run_out() {
        let (mut w, a, d) = duel_world(UnitType::Infantry, UnitType::Cavalry, Terrain::Plain);
        w.registry.skills.get_mut(a).unwrap().skill_points.current = 0;
        let ok = SupportAction::Skill { skill: SkillName::Ambush, target: d };
        assert_eq!(apply_support_action(&mut w, a, &ok).unwrap_err().code, ErrorCode::InsufficientSp);
    }
}
