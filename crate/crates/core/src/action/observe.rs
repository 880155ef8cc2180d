//! Fog-of-war observations.
//!
//! A faction sees every cell within an own unit's vision range that has line
//! of sight from it. Forest, Hill, Mountain and City block sight; units do
//! not. Enemy units are reported only on visible cells and only with a coarse
//! strength band. Higher levels add detail about own units, never enemies.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::hex::{cells_within, hex_distance, line_of_sight, reachable, HexCoord};
use crate::rules::move_cost_for;
use crate::world::{EntityId, Faction, Gauge, Mode, Resources, SkillName, StatusKind, UnitType, WorldState};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationLevel {
    #[default]
    Basic,
    Detailed,
    Tactical,
}

impl ObservationLevel {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "basic" => Some(Self::Basic),
            "detailed" => Some(Self::Detailed),
            "tactical" => Some(Self::Tactical),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountEstimate {
    Low,
    Medium,
    High,
}

impl CountEstimate {
    /// Band of `current / max`: below 34% low, up to 66% medium, above high.
    pub fn of(g: Gauge) -> Self {
        let (c, m) = (u64::from(g.current), u64::from(g.max));
        if 100 * c < 34 * m {
            CountEstimate::Low
        } else if 100 * c <= 66 * m {
            CountEstimate::Medium
        } else {
            CountEstimate::High
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombatInfo {
    pub attack: u32,
    pub defense: u32,
    pub attack_range: u32,
    pub vision_range: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillInfo {
    pub skill_points: Gauge,
    pub cooldowns: BTreeMap<SkillName, u32>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachableTile {
    pub col: i32,
    pub row: i32,
    pub cost: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnUnit {
    pub id: EntityId,
    #[serde(rename = "type")]
    pub unit_type: UnitType,
    pub position: HexCoord,
    pub unit_count: Gauge,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub movement: Option<Gauge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combat: Option<CombatInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_points: Option<Gauge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statuses: Option<BTreeMap<StatusKind, Option<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skills: Option<SkillInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable: Option<Vec<ReachableTile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enemies_in_range: Option<Vec<EntityId>>,
    /// Real-time lock expiry, when the unit is busy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub busy_until_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnemyUnit {
    pub id: EntityId,
    #[serde(rename = "type")]
    pub unit_type: UnitType,
    pub position: HexCoord,
    pub estimate_count: CountEstimate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategicInfo {
    pub turn_number: u32,
    pub resources: Resources,
    pub construction_points: u32,
    pub mode: Mode,
    pub active_faction: Option<Faction>,
    pub clock_ms: u64,
    pub horizon: u64,
}

/// Public map: terrain tags row by row, plus tile ownership and fortification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapInfo {
    pub width: i32,
    pub height: i32,
    /// One string per row, one tag per column (P F H M W C).
    pub rows: Vec<String>,
    pub owned: Vec<OwnedTile>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnedTile {
    pub col: i32,
    pub row: i32,
    pub owner: Faction,
    pub fortification: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationDoc {
    pub faction: Faction,
    pub level: ObservationLevel,
    pub own_units: Vec<OwnUnit>,
    pub known_enemy_units: Vec<EnemyUnit>,
    pub strategic_info: StrategicInfo,
    pub visible_tiles: Vec<HexCoord>,
    pub map: MapInfo,
}

impl ObservationDoc {
    pub fn own(&self, id: EntityId) -> Option<&OwnUnit> {
        self.own_units.iter().find(|u| u.id == id)
    }

    pub fn terrain_tag(&self, c: HexCoord) -> Option<char> {
        if c.col < 0 || c.row < 0 {
            return None;
        }
        self.map.rows.get(c.row as usize)?.chars().nth(c.col as usize)
    }
}

/// Cells visible to `faction`, ascending.
pub fn visible_cells(world: &WorldState, faction: Faction) -> BTreeSet<HexCoord> {
    let size = world.terrain.size();
    // Sight lines along the zig-zag board edge may leave the board; open
    // air off the board does not block.
    let blocks = |c: HexCoord| world.terrain.get(c).is_some_and(|t| t.blocks_vision());
    let mut seen = BTreeSet::new();
    for id in world.registry.units_of(faction) {
        let (Some(at), Some(stats)) = (world.registry.position_of(id), world.registry.stats.get(id)) else {
            continue;
        };
        for c in cells_within(at, stats.vision_range, size) {
            if !seen.contains(&c) && line_of_sight(at, c, blocks) {
                seen.insert(c);
            }
        }
    }
    seen
}

fn map_info(world: &WorldState) -> MapInfo {
    let size = world.terrain.size();
    let rows = (0..size.height)
        .map(|row| (0..size.width).map(|col| world.terrain.terrain(HexCoord::new(col, row)).tag()).collect())
        .collect();
    let owned = size
        .cells()
        .filter_map(|c| {
            world.terrain.owner(c).map(|owner| OwnedTile {
                col: c.col,
                row: c.row,
                owner,
                fortification: world.terrain.fortification(c),
            })
        })
        .collect();
    MapInfo { width: size.width, height: size.height, rows, owned }
}

/// Observation for `faction`; `focus` restricts own units to one.
pub fn build_observation(world: &WorldState, faction: Faction, level: ObservationLevel, focus: Option<EntityId>) -> ObservationDoc {
    let r = &world.registry;
    let visible = visible_cells(world, faction);
    let enemy = world.opponent(faction);
    let known_enemy_units: Vec<EnemyUnit> = enemy
        .map(|e| r.units_of(e))
        .unwrap_or_default()
        .into_iter()
        .filter_map(|id| {
            let position = r.position_of(id)?;
            if !visible.contains(&position) {
                return None;
            }
            Some(EnemyUnit {
                id,
                unit_type: r.stats.get(id)?.unit_type,
                position,
                estimate_count: CountEstimate::of(r.counts.get(id)?.0),
            })
        })
        .collect();

    let size = world.terrain.size();
    let own_units = r
        .units_of(faction)
        .into_iter()
        .filter(|id| focus.is_none_or(|f| f == *id))
        .filter_map(|id| {
            let position = r.position_of(id)?;
            let stats = r.stats.get(id)?;
            let mut u = OwnUnit {
                id,
                unit_type: stats.unit_type,
                position,
                unit_count: r.counts.get(id)?.0,
                movement: None,
                combat: None,
                action_points: None,
                statuses: None,
                skills: None,
                reachable: None,
                enemies_in_range: None,
                busy_until_ms: None,
            };
            if level == ObservationLevel::Basic {
                return Some(u);
            }
            let mp = r.movement.get(id).map(|m| m.0);
            u.movement = mp;
            u.combat = Some(CombatInfo {
                attack: stats.attack,
                defense: stats.defense,
                attack_range: stats.attack_range,
                vision_range: stats.vision_range,
            });
            u.action_points = r.action_points.get(id).map(|a| a.0);
            u.busy_until_ms = r.locks.get(id).map(|l| l.busy_until_ms).filter(|t| *t > world.clock_ms);
            u.statuses = r.statuses.get(id).map(|s| s.0.clone());
            u.skills = r.skills.get(id).map(|s| SkillInfo { skill_points: s.skill_points, cooldowns: s.cooldowns.clone() });
            if level == ObservationLevel::Tactical {
                let budget = mp.map_or(0, |g| g.current);
                let tiles = reachable(position, size, move_cost_for(world, faction), budget);
                u.reachable = Some(
                    tiles
                        .into_iter()
                        .filter(|(c, _)| r.unit_at(*c).is_none())
                        .map(|(c, cost)| ReachableTile { col: c.col, row: c.row, cost })
                        .collect(),
                );
                u.enemies_in_range = Some(
                    known_enemy_units
                        .iter()
                        .filter(|e| hex_distance(position, e.position) <= stats.attack_range)
                        .map(|e| e.id)
                        .collect(),
                );
            }
            Some(u)
        })
        .collect();

    let fs = world.faction_state.get(&faction);
    let horizon = match world.mode {
        Mode::TurnBased => u64::from(world.horizon.turns),
        Mode::RealTime => world.horizon.real_time_ms,
    };
    ObservationDoc {
        faction,
        level,
        own_units,
        known_enemy_units,
        strategic_info: StrategicInfo {
            turn_number: world.turn_number,
            resources: fs.map(|s| s.resources).unwrap_or_default(),
            construction_points: fs.map_or(0, |s| s.construction_points),
            mode: world.mode,
            active_faction: world.active_faction,
            clock_ms: world.clock_ms,
            horizon,
        },
        visible_tiles: visible.into_iter().collect(),
        map: map_info(world),
    }
}
