//! Protective rotation: ranged units strike and step back, melee units
//! screen the archers, depleted units withdraw towards their start zone.

use super::view::{step_towards, threat_range, View};
use crate::action::observe::{EnemyUnit, OwnUnit};
use crate::action::{ActionRequest, CountEstimate, ObservationDoc};
use crate::engine::Policy;
use crate::hex::{hex_distance, hex_line, HexCoord};
use std::cmp::Reverse;

use crate::world::UnitType;

/// Count ratio below which a unit stops fighting and withdraws.
pub const RETREAT_THRESHOLD: f64 = 0.3;

/// An archer with an enemy this close is screened.
const SCREEN_DISTANCE: u32 = 3;

pub struct KitingPolicy {
    seed: u64,
    home: Option<HexCoord>,
    /// Common objective of this decision: the enemy nearest the army, or the
    /// map centre.
    goal: HexCoord,
    /// Distance to `goal` of the rearmost healthy unit.
    rear: u32,
}

/// How far an advancing unit may get ahead of the army's rearmost unit,
/// measured as hex distance to the common goal.
const PACE: u32 = 2;

/// Mean position, rounded towards the origin.
fn centroid(units: &[&OwnUnit]) -> Option<HexCoord> {
    let n = i32::try_from(units.len()).ok().filter(|n| *n > 0)?;
    let col = units.iter().map(|u| u.position.col).sum::<i32>() / n;
    let row = units.iter().map(|u| u.position.row).sum::<i32>() / n;
    Some(HexCoord::new(col, row))
}

/// Advance towards `goal` without outrunning the army.
fn advance(v: &mut View, u: &OwnUnit, goal: HexCoord, rear: u32, moves: Vec<(HexCoord, u32)>, batch: &mut Vec<ActionRequest>) {
    let paced: Vec<_> = moves.into_iter().filter(|(c, _)| hex_distance(*c, goal) + PACE >= rear).collect();
    if let Some(to) = step_towards(&paced, &v.cost_field(goal), u.position) {
        batch.push(v.move_to(u, to));
    }
}

impl KitingPolicy {
    pub fn new(seed: u64) -> Self {
        Self { seed, home: None, goal: HexCoord::new(0, 0), rear: 0 }
    }
}

/// Targets in attack order: weakest estimate first, then the softest type.
fn priority(e: &EnemyUnit) -> (u8, u8, u64) {
    let band = match e.estimate_count {
        CountEstimate::Low => 0,
        CountEstimate::Medium => 1,
        CountEstimate::High => 2,
    };
    let softness = match e.unit_type {
        UnitType::Archer => 0,
        UnitType::Cavalry => 1,
        UnitType::Infantry => 2,
    };
    (band, softness, e.id.0)
}

/// Defender bonus of a tile in thousandths, for ranking.
fn footing(v: &View, c: HexCoord) -> u32 {
    v.terrain(c).map_or(0, |t| (t.defense_bonus() * 1000.0).round() as u32)
}

/// Best-footed, then cheapest, tile satisfying `keep`.
fn best_tile(v: &View, moves: &[(HexCoord, u32)], keep: impl Fn(HexCoord) -> bool) -> Option<HexCoord> {
    moves
        .iter()
        .filter(|(c, _)| keep(*c))
        .min_by_key(|(c, cost)| (Reverse(footing(v, *c)), *cost, *c))
        .map(|(c, _)| *c)
}

/// Distance from `c` to the closest enemy, capped so that far enough is
/// simply safe.
fn clearance(v: &View, c: HexCoord) -> u32 {
    v.enemies().iter().map(|e| hex_distance(c, e.position)).min().unwrap_or(u32::MAX).min(4)
}

/// One strike, or two while the target is not yet depleted and AP allows.
fn strike(v: &View, u: &OwnUnit, e: &EnemyUnit, batch: &mut Vec<ActionRequest>) {
    batch.push(v.attack(u, e));
    if e.estimate_count != CountEstimate::Low && u.action_points.is_some_and(|ap| ap.current >= 2) {
        batch.push(v.attack(u, e));
    }
}

/// Best target within `range` of `at`.
fn target_from<'a>(v: &View<'a>, at: HexCoord, range: u32) -> Option<&'a EnemyUnit> {
    v.enemies().iter().filter(|e| hex_distance(at, e.position) <= range).min_by_key(|e| priority(e))
}

impl KitingPolicy {
    fn withdraw(&self, v: &mut View, u: &OwnUnit, batch: &mut Vec<ActionRequest>) {
        let home = self.home.unwrap_or(u.position);
        let mut options = v.moves(u);
        options.push((u.position, 0));
        let best = options
            .iter()
            .max_by_key(|(c, cost)| (clearance(v, *c), Reverse(hex_distance(*c, home)), Reverse(*cost), *c))
            .map(|(c, _)| *c);
        if let Some(to) = best.filter(|c| *c != u.position) {
            batch.push(v.move_to(u, to));
        }
    }

    fn ranged(&self, v: &mut View, u: &OwnUnit, batch: &mut Vec<ActionRequest>) {
        let range = v.range(u);
        let moves = v.moves(u);
        if let Some(e) = target_from(v, u.position, range).filter(|_| v.can_attack(u)) {
            strike(v, u, e, batch);
            if v.threatened(u.position) {
                if let Some(to) = best_tile(v, &moves, |c| !v.threatened(c)) {
                    batch.push(v.move_to(u, to));
                }
            }
            return;
        }
        // Take up a firing position no enemy can strike.
        if let Some(to) = best_tile(v, &moves, |c| !v.threatened(c) && target_from(v, c, range).is_some()) {
            batch.push(v.move_to(u, to));
            if let Some(e) = target_from(v, to, range).filter(|_| v.can_attack(u)) {
                strike(v, u, e, batch);
            }
            return;
        }
        let safe: Vec<_> = moves.into_iter().filter(|(c, _)| !v.threatened(*c)).collect();
        advance(v, u, self.goal, self.rear, safe, batch);
    }

    fn melee(&self, v: &mut View, u: &OwnUnit, archers: &[&OwnUnit], batch: &mut Vec<ActionRequest>) {
        let range = v.range(u);
        if let Some(e) = target_from(v, u.position, range).filter(|_| v.can_attack(u)) {
            strike(v, u, e, batch);
            return;
        }
        let moves = v.moves(u);
        let threat = archers
            .iter()
            .filter_map(|a| v.nearest_enemy(a.position).map(|e| (*a, e)))
            .filter(|(a, e)| hex_distance(a.position, e.position) <= SCREEN_DISTANCE)
            .min_by_key(|(a, e)| (hex_distance(a.position, e.position), a.id));
        if let Some((archer, enemy)) = threat {
            let line = hex_line(archer.position, enemy.position);
            let interior = &line[1..line.len().saturating_sub(1).max(1)];
            let screen = moves
                .iter()
                .filter(|(c, _)| interior.contains(c))
                .min_by_key(|(c, cost)| (*cost, hex_distance(*c, archer.position), *c))
                .map(|(c, _)| *c);
            if let Some(to) = screen {
                batch.push(v.move_to(u, to));
                if hex_distance(to, enemy.position) <= range && v.can_attack(u) {
                    strike(v, u, enemy, batch);
                }
                return;
            }
        }
        if let Some(to) = best_tile(v, &moves, |c| target_from(v, c, range).is_some()) {
            batch.push(v.move_to(u, to));
            if let Some(e) = target_from(v, to, range).filter(|_| v.can_attack(u)) {
                strike(v, u, e, batch);
            }
            return;
        }
        advance(v, u, self.goal, self.rear, moves, batch);
    }
}

impl Policy for KitingPolicy {
    fn label(&self) -> String {
        format!("kiting:{}", self.seed)
    }

    fn decide(&mut self, obs: &ObservationDoc) -> Vec<ActionRequest> {
        if self.home.is_none() {
            self.home = centroid(&obs.own_units.iter().collect::<Vec<_>>());
        }
        let mut v = View::new(obs);
        if !v.may_act() {
            return Vec::new();
        }
        let archers: Vec<&OwnUnit> = obs
            .own_units
            .iter()
            .filter(|u| u.unit_type == UnitType::Archer && u.unit_count.ratio() >= RETREAT_THRESHOLD)
            .collect();
        let healthy: Vec<&OwnUnit> = obs.own_units.iter().filter(|u| u.unit_count.ratio() >= RETREAT_THRESHOLD).collect();
        let centre = centroid(&healthy).unwrap_or(v.center());
        self.goal = v.nearest_enemy(centre).map_or(v.center(), |e| e.position);
        self.rear = healthy.iter().map(|u| hex_distance(u.position, self.goal)).max().unwrap_or(0);
        let mut batch = Vec::new();
        for u in v.ready_units() {
            if v.strength(u) < RETREAT_THRESHOLD {
                self.withdraw(&mut v, u, &mut batch);
            } else if v.range(u) > threat_range(UnitType::Infantry) {
                self.ranged(&mut v, u, &mut batch);
            } else {
                self.melee(&mut v, u, &archers, &mut batch);
            }
        }
        v.finish(batch)
    }
}
