//! Closes on the nearest visible enemy and strikes it.

use super::view::{step_towards, View};
use crate::action::{ActionRequest, ObservationDoc};
use crate::engine::Policy;
use crate::hex::hex_distance;

pub struct GreedyPolicy {
    seed: u64,
}

impl GreedyPolicy {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Policy for GreedyPolicy {
    fn label(&self) -> String {
        format!("greedy:{}", self.seed)
    }

    /// Per unit: attack the nearest enemy when in range; otherwise take the
    /// cheapest step towards it (or the map centre when none is visible),
    /// attacking from the new tile if that brings it into range.
    fn decide(&mut self, obs: &ObservationDoc) -> Vec<ActionRequest> {
        let mut v = View::new(obs);
        if !v.may_act() {
            return Vec::new();
        }
        let mut batch = Vec::new();
        for u in v.ready_units() {
            let range = v.range(u);
            let target = v.nearest_enemy(u.position);
            if let Some(e) = target {
                if hex_distance(u.position, e.position) <= range && v.can_attack(u) {
                    batch.push(v.attack(u, e));
                    continue;
                }
            }
            let goal = target.map_or(v.center(), |e| e.position);
            let moves = v.moves(u);
            let firing = moves
                .iter()
                .filter(|(c, _)| target.is_some() && hex_distance(*c, goal) <= range)
                .min_by_key(|(c, cost)| (*cost, *c))
                .map(|(c, _)| *c);
            let dest = firing.or_else(|| step_towards(&moves, &v.cost_field(goal), u.position));
            if let Some(to) = dest {
                batch.push(v.move_to(u, to));
                if let Some(e) = target.filter(|e| hex_distance(to, e.position) <= range && v.can_attack(u)) {
                    batch.push(v.attack(u, e));
                }
            }
        }
        v.finish(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{build_observation, ObservationLevel};
    use crate::hex::HexCoord;
    use crate::rules::testing::{plain_world, put};
    use crate::world::{Faction, Mode, UnitType};

    #[test]
    fn adjacent_enemy_is_attacked_before_moving() {
        let mut w = plain_world(Mode::TurnBased);
        let a = put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(5, 5));
        put(&mut w, Faction::Wei, UnitType::Cavalry, HexCoord::new(1, 1));
        let e = put(&mut w, Faction::Shu, UnitType::Archer, HexCoord::new(5, 6));
        let obs = build_observation(&w, Faction::Wei, ObservationLevel::Tactical, None);
        let batch = GreedyPolicy::new(0).decide(&obs);
        assert_eq!(batch[0].action, "attack");
        assert_eq!(batch[0].params["unit_id"], a.0);
        assert_eq!(batch[0].params["target_id"], e.0);
        assert_eq!(batch.last().unwrap().action, "end_turn");
    }

    #[test]
    fn without_enemies_advances_to_centre() {
        let mut w = plain_world(Mode::TurnBased);
        put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(1, 1));
        put(&mut w, Faction::Shu, UnitType::Infantry, HexCoord::new(14, 14));
        let obs = build_observation(&w, Faction::Wei, ObservationLevel::Tactical, None);
        assert!(obs.known_enemy_units.is_empty());
        let batch = GreedyPolicy::new(0).decide(&obs);
        assert_eq!(batch[0].action, "move");
        let to = &batch[0].params["target_position"];
        let to = HexCoord::new(to["col"].as_i64().unwrap() as i32, to["row"].as_i64().unwrap() as i32);
        let centre = HexCoord::new(7, 7);
        assert!(hex_distance(to, centre) < hex_distance(HexCoord::new(1, 1), centre));
    }
}
