//! The authoritative world: ECS registry, terrain, clocks and faction pools.

mod digest;
pub mod ecs;
pub mod mapgen;
pub mod terrain;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use digest::snapshot_digest;
pub use ecs::{
    ActionLock, ActionPoints, ComponentStore, EntityId, FactionTag, Gauge, MovementPoints, Phase, Position,
    Registry, Schedule, SkillName, SkillState, StatusEffects, StatusKind, System, TurnActivity, UnitCount,
    UnitStats,
};
pub use mapgen::{generate_map, mirror_symmetrize, start_zone};
pub use terrain::{Terrain, TerrainGrid};

use crate::hex::HexCoord;
use crate::scenario::{Horizon, Scenario};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("tile {0} is occupied")]
    OccupiedTile(HexCoord),
    #[error("tile {0} is impassable")]
    ImpassableTile(HexCoord),
    #[error("tile {0} is outside the map")]
    OutOfBounds(HexCoord),
    #[error("faction {0} is not part of this match")]
    UnknownFaction(Faction),
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("bad map dump: {0}")]
    MapFormat(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Faction {
    Wei,
    Shu,
    Wu,
}

impl Faction {
    pub const ALL: [Faction; 3] = [Faction::Wei, Faction::Shu, Faction::Wu];

    pub fn as_str(self) -> &'static str {
        match self {
            Faction::Wei => "wei",
            Faction::Shu => "shu",
            Faction::Wu => "wu",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Faction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Faction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Faction::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown faction `{s}`"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitType {
    Infantry,
    Cavalry,
    Archer,
}

impl UnitType {
    pub const ALL: [UnitType; 3] = [UnitType::Infantry, UnitType::Cavalry, UnitType::Archer];

    pub fn as_str(self) -> &'static str {
        match self {
            UnitType::Infantry => "infantry",
            UnitType::Cavalry => "cavalry",
            UnitType::Archer => "archer",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }
}

/// Scheduling regime of a match.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TurnBased,
    RealTime,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TurnBased => "turn_based",
            Mode::RealTime => "real_time",
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resources {
    pub manpower: u32,
    pub supplies: u32,
}

/// Faction-level counters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactionState {
    pub construction_points: u32,
    pub resources: Resources,
    /// Soldiers fielded over the match (denominator of preservation).
    pub soldiers_fielded: u32,
}

#[derive(Clone, Debug)]
pub struct WorldState {
    pub registry: Registry,
    pub terrain: TerrainGrid,
    pub mode: Mode,
    pub turn_number: u32,
    /// Whose turn it is; `None` in real-time mode.
    pub active_faction: Option<Faction>,
    pub clock_ms: u64,
    pub factions: [Faction; 2],
    pub faction_state: BTreeMap<Faction, FactionState>,
    pub horizon: Horizon,
    pub seed: u64,
    pub rules: Arc<Scenario>,
}

impl WorldState {
    /// Empty world over the given terrain.
    pub fn new(rules: Arc<Scenario>, terrain: TerrainGrid, mode: Mode) -> Self {
        let factions = rules.factions;
        let faction_state = factions
            .iter()
            .map(|f| {
                (
                    *f,
                    FactionState {
                        construction_points: rules.economy.construction_points,
                        resources: Resources {
                            manpower: rules.economy.starting_manpower,
                            supplies: rules.economy.starting_supplies,
                        },
                        soldiers_fielded: 0,
                    },
                )
            })
            .collect();
        Self {
            registry: Registry::default(),
            terrain,
            mode,
            turn_number: 1,
            active_faction: match mode {
                Mode::TurnBased => Some(factions[0]),
                Mode::RealTime => None,
            },
            clock_ms: 0,
            factions,
            faction_state,
            horizon: rules.horizon,
            seed: rules.seed,
            rules,
        }
    }

    /// Standard battlefield: generated, symmetrized, with both armies placed
    /// in mirrored start zones.
    pub fn standard(rules: Arc<Scenario>, mode: Mode) -> Result<Self, WorldError> {
        let terrain = build_battlefield(&rules)?;
        let mut world = Self::new(rules.clone(), terrain, mode);
        let size = world.terrain.size();
        for (side, faction) in rules.factions.into_iter().enumerate() {
            let zone = start_zone(size, rules.map.start_zone_radius, side);
            for (unit_type, cell) in rules.army.iter().zip(zone.iter()) {
                world.spawn_unit(faction, *unit_type, *cell)?;
            }
        }
        Ok(world)
    }

    pub fn opponent(&self, f: Faction) -> Option<Faction> {
        match self.factions {
            [a, b] if a == f => Some(b),
            [a, b] if b == f => Some(a),
            _ => None,
        }
    }

    pub fn is_participant(&self, f: Faction) -> bool {
        self.factions.contains(&f)
    }

    /// Create a unit with its full component signature, gauges at max.
    pub fn spawn_unit(&mut self, faction: Faction, unit_type: UnitType, at: HexCoord) -> Result<EntityId, WorldError> {
        if !self.is_participant(faction) {
            return Err(WorldError::UnknownFaction(faction));
        }
        let terrain = self.terrain.get(at).ok_or(WorldError::OutOfBounds(at))?;
        if terrain.move_cost().is_none() {
            return Err(WorldError::ImpassableTile(at));
        }
        if self.registry.unit_at(at).is_some() {
            return Err(WorldError::OccupiedTile(at));
        }
        let t = *self.rules.units.get(unit_type);
        let sp = self.rules.economy.skill_points;
        let r = &mut self.registry;
        let id = r.create();
        r.positions.insert(id, Position(at));
        r.stats.insert(
            id,
            UnitStats {
                unit_type,
                attack: t.attack,
                defense: t.defense,
                attack_range: t.attack_range,
                vision_range: t.vision_range,
            },
        );
        r.counts.insert(id, UnitCount(Gauge::full(t.count)));
        r.movement.insert(id, MovementPoints(Gauge::full(t.movement)));
        r.action_points.insert(id, ActionPoints(Gauge::full(t.action_points)));
        r.factions.insert(id, FactionTag(faction));
        r.statuses.insert(id, StatusEffects::default());
        r.skills.insert(id, SkillState { skill_points: Gauge::full(sp), cooldowns: BTreeMap::new() });
        r.activity.insert(id, TurnActivity::default());
        r.locks.insert(id, ActionLock::default());
        if let Some(fs) = self.faction_state.get_mut(&faction) {
            fs.soldiers_fielded += t.count;
        }
        Ok(id)
    }

    /// Soldiers alive for a faction.
    pub fn soldiers_alive(&self, f: Faction) -> u32 {
        self.registry
            .units_of(f)
            .into_iter()
            .filter_map(|id| self.registry.counts.get(id))
            .map(|c| c.0.current)
            .sum()
    }

    /// Surviving soldier fraction of everything the faction fielded.
    pub fn surviving_fraction(&self, f: Faction) -> f64 {
        let fielded = self.faction_state.get(&f).map_or(0, |s| s.soldiers_fielded);
        if fielded == 0 {
            0.0
        } else {
            f64::from(self.soldiers_alive(f)) / f64::from(fielded)
        }
    }

    pub fn digest(&self) -> String {
        snapshot_digest(self)
    }
}

/// Generate, symmetrize and clear the start zones of the standard map.
pub fn build_battlefield(rules: &Scenario) -> Result<TerrainGrid, WorldError> {
    let raw = generate_map(rules.seed, &rules.map)?;
    let mut grid = mirror_symmetrize(&raw, rules.seed);
    let size = grid.size();
    for side in 0..2 {
        for c in start_zone(size, rules.map.start_zone_radius, side).into_iter().take(rules.army.len()) {
            if matches!(grid.terrain(c), Terrain::Water | Terrain::Mountain) {
                grid.set(c, Terrain::Plain);
            }
        }
    }
    mapgen::connect_land(&mut grid, true);
    let reserved: Vec<HexCoord> = (0..2).flat_map(|side| start_zone(size, rules.map.start_zone_radius, side)).collect();
    mapgen::place_cities_mirrored(&mut grid, &rules.map, &reserved, rules.seed);
    Ok(grid)
}
