//! What a scripted agent derives from one observation.

use std::collections::{BTreeMap, BTreeSet};

use crate::action::{Action, ActionRequest, ObservationDoc};
use crate::action::observe::{EnemyUnit, OwnUnit};
use crate::hex::{hex_distance, reachable, GridSize, HexCoord};
use crate::world::{Mode, Terrain, UnitType};

/// Attack range assumed for enemy units, which observations do not detail.
pub fn threat_range(t: UnitType) -> u32 {
    match t {
        UnitType::Archer => 2,
        UnitType::Infantry | UnitType::Cavalry => 1,
    }
}

/// Move-then-strike distance assumed for enemy units.
pub fn strike_reach(t: UnitType) -> u32 {
    threat_range(t)
        + match t {
            UnitType::Cavalry => 5,
            UnitType::Infantry | UnitType::Archer => 3,
        }
}

pub struct View<'a> {
    pub obs: &'a ObservationDoc,
    size: GridSize,
    /// Tiles already promised to a unit in the batch being built.
    claimed: BTreeSet<HexCoord>,
}

impl<'a> View<'a> {
    pub fn new(obs: &'a ObservationDoc) -> Self {
        Self { obs, size: GridSize::new(obs.map.width, obs.map.height), claimed: BTreeSet::new() }
    }

    pub fn mode(&self) -> Mode {
        self.obs.strategic_info.mode
    }

    /// Whether this faction may act now.
    pub fn may_act(&self) -> bool {
        match self.mode() {
            Mode::TurnBased => self.obs.strategic_info.active_faction == Some(self.obs.faction),
            Mode::RealTime => true,
        }
    }

    /// Own units free to act, in id order.
    pub fn ready_units(&self) -> Vec<&'a OwnUnit> {
        self.obs.own_units.iter().filter(|u| u.busy_until_ms.is_none()).collect()
    }

    pub fn enemies(&self) -> &'a [EnemyUnit] {
        &self.obs.known_enemy_units
    }

    pub fn terrain(&self, c: HexCoord) -> Option<Terrain> {
        self.obs.terrain_tag(c).and_then(Terrain::from_tag)
    }

    pub fn move_cost(&self, c: HexCoord) -> Option<u32> {
        self.terrain(c).and_then(Terrain::move_cost)
    }

    pub fn center(&self) -> HexCoord {
        self.size.center()
    }

    pub fn nearest_enemy(&self, from: HexCoord) -> Option<&'a EnemyUnit> {
        self.enemies().iter().min_by_key(|e| (hex_distance(from, e.position), e.id))
    }

    /// Whether an enemy could strike `c` without moving.
    pub fn threatened(&self, c: HexCoord) -> bool {
        self.enemies().iter().any(|e| hex_distance(c, e.position) <= threat_range(e.unit_type))
    }

    /// Whether an enemy could move and strike `c` on its next turn.
    pub fn exposed(&self, c: HexCoord) -> bool {
        self.enemies().iter().any(|e| hex_distance(c, e.position) <= strike_reach(e.unit_type))
    }

    /// Reachable, unclaimed tiles of `u` with their path cost.
    pub fn moves(&self, u: &OwnUnit) -> Vec<(HexCoord, u32)> {
        u.reachable
            .iter()
            .flatten()
            .map(|t| (HexCoord::new(t.col, t.row), t.cost))
            .filter(|(c, _)| !self.claimed.contains(c))
            .collect()
    }

    pub fn claim(&mut self, c: HexCoord) {
        self.claimed.insert(c);
    }

    /// Terrain cost of travelling from each tile to `target`, ignoring units.
    pub fn cost_field(&self, target: HexCoord) -> BTreeMap<HexCoord, u32> {
        let target_cost = self.move_cost(target).unwrap_or(1);
        let mut field = reachable(target, self.size, |c| self.move_cost(c), u32::MAX / 4);
        for (c, d) in field.iter_mut() {
            // Entry costs were summed from the target outwards.
            *d = *d + target_cost - self.move_cost(*c).unwrap_or(0);
        }
        field.insert(target, 0);
        field
    }

    pub fn can_attack(&self, u: &OwnUnit) -> bool {
        u.action_points.is_none_or(|ap| ap.current > 0)
    }

    pub fn range(&self, u: &OwnUnit) -> u32 {
        u.combat.map_or(1, |c| c.attack_range)
    }

    /// Count ratio of an own unit.
    pub fn strength(&self, u: &OwnUnit) -> f64 {
        u.unit_count.ratio()
    }

    pub fn move_to(&mut self, u: &OwnUnit, to: HexCoord) -> ActionRequest {
        self.claim(to);
        Action::Move { unit_id: u.id, target: to }.to_request()
    }

    pub fn attack(&self, u: &OwnUnit, e: &EnemyUnit) -> ActionRequest {
        Action::Attack { unit_id: u.id, target_id: e.id }.to_request()
    }

    /// Close the batch: `end_turn` in turn-based mode.
    pub fn finish(&self, mut batch: Vec<ActionRequest>) -> Vec<ActionRequest> {
        if self.mode() == Mode::TurnBased {
            batch.push(Action::EndTurn { faction: Some(self.obs.faction) }.to_request());
        }
        batch
    }
}

/// Cheapest reachable step towards `target`: the tile minimising remaining
/// travel cost, then path cost, then position.
pub fn step_towards(moves: &[(HexCoord, u32)], field: &BTreeMap<HexCoord, u32>, here: HexCoord) -> Option<HexCoord> {
    let remaining = |c: &HexCoord| field.get(c).copied().unwrap_or(u32::MAX);
    let best = moves.iter().min_by_key(|(c, cost)| (remaining(c), *cost, *c))?;
    (remaining(&best.0) < remaining(&here)).then_some(best.0)
}
