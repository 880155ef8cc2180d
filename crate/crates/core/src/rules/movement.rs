//! Movement: path planning against terrain and occupancy, and MP spending.
//!
//! Entering a tile costs its terrain's move cost. Water is impassable and
//! enemy-held tiles block. Friendly units may be passed through but never
//! shared.

use super::{check_alive, require};
use crate::error::{ErrorCode, Rejection};
use crate::hex::{find_path, hex_distance, HexCoord, Path};
use crate::world::{EntityId, Faction, Position, StatusKind, WorldState};

/// Entry cost of each tile for units of `faction`.
pub fn move_cost_for(world: &WorldState, faction: Faction) -> impl Fn(HexCoord) -> Option<u32> + '_ {
    move |c| {
        let cost = world.terrain.get(c)?.move_cost()?;
        match world.registry.unit_at(c).and_then(|u| world.registry.faction_of(u)) {
            Some(f) if f != faction => None,
            _ => Some(cost),
        }
    }
}

fn check_mobile(world: &WorldState, unit: EntityId) -> Result<(HexCoord, Faction, u32), Rejection> {
    check_alive(world, unit, ErrorCode::UnknownUnit)?;
    let r = &world.registry;
    let at = require(r.position_of(unit), unit, "Position")?;
    let faction = require(r.faction_of(unit), unit, "Faction")?;
    let mp = require(r.movement.get(unit), unit, "MovementPoints")?.0.current;
    if r.statuses.get(unit).is_some_and(|s| s.has(StatusKind::Confusion)) {
        return Err(Rejection::new(ErrorCode::StatusForbids, format!("unit {} is confused", unit.0)));
    }
    Ok((at, faction, mp))
}

fn check_destination(world: &WorldState, dest: HexCoord) -> Result<(), Rejection> {
    let Some(t) = world.terrain.get(dest) else {
        return Err(Rejection::new(ErrorCode::OutOfBounds, format!("{dest} is outside the map")));
    };
    if t.move_cost().is_none() {
        return Err(Rejection::new(ErrorCode::Blocked, format!("{dest} is impassable {t:?}")));
    }
    if let Some(other) = world.registry.unit_at(dest) {
        return Err(Rejection::new(ErrorCode::Blocked, format!("{dest} is occupied by unit {}", other.0)));
    }
    Ok(())
}

/// Cheapest route for `unit` to `dest`, checked against its current MP.
pub fn plan_move(world: &WorldState, unit: EntityId, dest: HexCoord) -> Result<Path, Rejection> {
    let (at, faction, mp) = check_mobile(world, unit)?;
    if at == dest {
        return Err(Rejection::new(ErrorCode::Unreachable, format!("unit {} is already at {dest}", unit.0)));
    }
    check_destination(world, dest)?;
    let path = find_path(at, dest, world.terrain.size(), move_cost_for(world, faction), u32::MAX)
        .ok_or_else(|| Rejection::new(ErrorCode::Unreachable, format!("no route from {at} to {dest}")))?;
    if path.total_cost > mp {
        return Err(Rejection::new(
            ErrorCode::InsufficientMp,
            format!("route to {dest} costs {} MP, unit has {mp}", path.total_cost),
        ));
    }
    Ok(path)
}

/// Walk `path` and spend its cost. Returns the remaining MP.
pub fn apply_move(world: &mut WorldState, unit: EntityId, path: &Path) -> Result<u32, Rejection> {
    let (at, faction, mp) = check_mobile(world, unit)?;
    let dest = path
        .destination()
        .ok_or_else(|| Rejection::new(ErrorCode::Unreachable, "empty path"))?;
    check_destination(world, dest)?;
    let mut prev = at;
    let mut total = 0u32;
    for &step in &path.steps {
        let cost_of = move_cost_for(world, faction);
        if hex_distance(prev, step) != 1 {
            return Err(Rejection::new(ErrorCode::Unreachable, format!("{prev} and {step} are not adjacent")));
        }
        let c = cost_of(step).ok_or_else(|| Rejection::new(ErrorCode::Blocked, format!("{step} blocks movement")))?;
        total += c;
        prev = step;
    }
    if total > mp {
        return Err(Rejection::new(ErrorCode::InsufficientMp, format!("path costs {total} MP, unit has {mp}")));
    }
    let r = &mut world.registry;
    r.positions.insert(unit, Position(dest));
    let g = &mut r.movement.get_mut(unit).expect("checked").0;
    g.spend(total);
    Ok(g.current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::testing::{plain_world, put};
    use crate::world::{Mode, Terrain, UnitType};

    #[test]
    fn cavalry_spends_path_cost() {
        let mut w = plain_world(Mode::TurnBased);
        let cav = put(&mut w, Faction::Shu, UnitType::Cavalry, HexCoord::new(2, 2));
        w.terrain.set(HexCoord::new(3, 2), Terrain::Forest);
        let p = plan_move(&w, cav, HexCoord::new(4, 2)).unwrap();
        assert_eq!(p.total_cost, 2);
        let p = Path { steps: vec![HexCoord::new(3, 2), HexCoord::new(4, 2)], total_cost: 3 };
        assert_eq!(apply_move(&mut w, cav, &p).unwrap(), 2);
        assert_eq!(w.registry.position_of(cav), Some(HexCoord::new(4, 2)));
    }

    #[test]
    fn insufficient_mp_and_blockers() {
        let mut w = plain_world(Mode::TurnBased);
        let cav = put(&mut w, Faction::Wei, UnitType::Cavalry, HexCoord::new(0, 0));
        let err = plan_move(&w, cav, HexCoord::new(6, 0)).unwrap_err();
        assert_eq!(err.code, ErrorCode::InsufficientMp);
        assert!(err.spatial());
        w.terrain.set(HexCoord::new(1, 0), Terrain::Water);
        assert_eq!(plan_move(&w, cav, HexCoord::new(1, 0)).unwrap_err().code, ErrorCode::Blocked);
        put(&mut w, Faction::Shu, UnitType::Archer, HexCoord::new(0, 2));
        assert_eq!(plan_move(&w, cav, HexCoord::new(0, 2)).unwrap_err().code, ErrorCode::Blocked);
    }

    #[test]
    fn enemies_block_friends_do_not() {
        let mut w = plain_world(Mode::TurnBased);
        // Column 0 corridor walled by water on column 1.
        for row in 0..15 {
            w.terrain.set(HexCoord::new(1, row), Terrain::Water);
        }
        let inf = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(0, 0));
        put(&mut w, Faction::Wei, UnitType::Archer, HexCoord::new(0, 1));
        assert_eq!(plan_move(&w, inf, HexCoord::new(0, 2)).unwrap().total_cost, 2);
        put(&mut w, Faction::Shu, UnitType::Archer, HexCoord::new(0, 2));
        assert_eq!(plan_move(&w, inf, HexCoord::new(0, 3)).unwrap_err().code, ErrorCode::Unreachable);
    }

    #[test]
    fn confusion_forbids_movement() {
        let mut w = plain_world(Mode::TurnBased);
        let inf = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(3, 3));
        w.registry.statuses.get_mut(inf).unwrap().apply(StatusKind::Confusion, Some(1));
        assert_eq!(plan_move(&w, inf, HexCoord::new(3, 4)).unwrap_err().code, ErrorCode::StatusForbids);
    }

    #[test]
    fn stale_path_rejected() {
        let mut w = plain_world(Mode::TurnBased);
        let inf = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(3, 3));
        let jump = Path { steps: vec![HexCoord::new(3, 6)], total_cost: 1 };
        assert_eq!(apply_move(&mut w, inf, &jump).unwrap_err().code, ErrorCode::Unreachable);
        assert_eq!(w.registry.position_of(inf), Some(HexCoord::new(3, 3)));
    }
}
