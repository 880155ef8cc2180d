//! Entity registry and component storage.
//!
//! Entities are bare ids. Each component family lives in its own
//! [`ComponentStore`], keyed by id and iterated in id order so every query is
//! deterministic. Systems hold no entity lists of their own; they re-query the
//! registry every time they run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Faction, UnitType, WorldState};
use crate::hex::HexCoord;

/// Globally unique entity id. Zero is reserved.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u64);

impl EntityId {
    pub const INVALID: EntityId = EntityId(0);
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position(pub HexCoord);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitStats {
    pub unit_type: UnitType,
    pub attack: u32,
    pub defense: u32,
    pub attack_range: u32,
    pub vision_range: u32,
}

/// A bounded gauge; `current` never exceeds `max`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge {
    pub current: u32,
    pub max: u32,
}

impl Gauge {
    pub fn full(max: u32) -> Self {
        Self { current: max, max }
    }

    pub fn fill(&mut self) {
        self.current = self.max;
    }

    pub fn add(&mut self, n: u32) {
        self.current = self.current.saturating_add(n).min(self.max);
    }

    /// Spend `n` if available.
    pub fn spend(&mut self, n: u32) -> bool {
        if self.current >= n {
            self.current -= n;
            true
        } else {
            false
        }
    }

    pub fn ratio(&self) -> f64 {
        if self.max == 0 {
            0.0
        } else {
            f64::from(self.current) / f64::from(self.max)
        }
    }
}

/// Soldier count.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCount(pub Gauge);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementPoints(pub Gauge);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPoints(pub Gauge);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactionTag(pub Faction);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatusKind {
    MoraleBoost,
    Confusion,
    Fatigue,
}

impl StatusKind {
    pub fn is_negative(self) -> bool {
        matches!(self, StatusKind::Confusion | StatusKind::Fatigue)
    }
}

/// Active statuses with remaining turns; `None` lasts until cleared by rest.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusEffects(pub BTreeMap<StatusKind, Option<u32>>);

impl StatusEffects {
    pub fn has(&self, k: StatusKind) -> bool {
        self.0.contains_key(&k)
    }

    pub fn apply(&mut self, k: StatusKind, turns: Option<u32>) {
        self.0.insert(k, turns);
    }

    /// Count every timed status down by one turn, dropping expired ones.
    pub fn tick(&mut self) {
        self.0.retain(|_, left| match left {
            Some(n) => {
                *n = n.saturating_sub(1);
                *n > 0
            }
            None => true,
        });
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillName {
    FireAttack,
    Ambush,
}

impl SkillName {
    pub const ALL: [SkillName; 2] = [SkillName::FireAttack, SkillName::Ambush];

    pub fn as_str(self) -> &'static str {
        match self {
            SkillName::FireAttack => "fire_attack",
            SkillName::Ambush => "ambush",
        }
    }

    pub fn parse(s: &str) -> Option<SkillName> {
        SkillName::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillState {
    pub skill_points: Gauge,
    /// Turns until each skill may be used again.
    pub cooldowns: BTreeMap<SkillName, u32>,
}

/// Per-turn bookkeeping, cleared when the owner's turn starts.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnActivity {
    pub ap_spent: u32,
    pub attacks: u32,
    pub rested: bool,
}

/// Real-time action lock.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionLock {
    pub busy_until_ms: u64,
}

/// Storage for one component family.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStore<T>(BTreeMap<EntityId, T>);

impl<T> Default for ComponentStore<T> {
    fn default() -> Self {
        Self(BTreeMap::new())
    }
}

impl<T> ComponentStore<T> {
    pub fn get(&self, id: EntityId) -> Option<&T> {
        self.0.get(&id)
    }

    pub fn get_mut(&mut self, id: EntityId) -> Option<&mut T> {
        self.0.get_mut(&id)
    }

    pub fn insert(&mut self, id: EntityId, value: T) -> Option<T> {
        self.0.insert(id, value)
    }

    pub fn remove(&mut self, id: EntityId) -> Option<T> {
        self.0.remove(&id)
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.0.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntityId, &T)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (EntityId, &mut T)> {
        self.0.iter_mut().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Entities plus one store per component family.
#[derive(Clone, Debug, PartialEq)]
pub struct Registry {
    next_id: u64,
    alive: BTreeSet<EntityId>,
    pub positions: ComponentStore<Position>,
    pub stats: ComponentStore<UnitStats>,
    pub counts: ComponentStore<UnitCount>,
    pub movement: ComponentStore<MovementPoints>,
    pub action_points: ComponentStore<ActionPoints>,
    pub factions: ComponentStore<FactionTag>,
    pub statuses: ComponentStore<StatusEffects>,
    pub skills: ComponentStore<SkillState>,
    pub activity: ComponentStore<TurnActivity>,
    pub locks: ComponentStore<ActionLock>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_first_id(1)
    }
}

impl Registry {
    /// Registry whose first allocated id is `first` (clamped to at least 1).
    pub fn with_first_id(first: u64) -> Self {
        Self {
            next_id: first.max(1),
            alive: BTreeSet::new(),
            positions: ComponentStore::default(),
            stats: ComponentStore::default(),
            counts: ComponentStore::default(),
            movement: ComponentStore::default(),
            action_points: ComponentStore::default(),
            factions: ComponentStore::default(),
            statuses: ComponentStore::default(),
            skills: ComponentStore::default(),
            activity: ComponentStore::default(),
            locks: ComponentStore::default(),
        }
    }

    /// Allocate a fresh id. Ids strictly increase and are never reused.
    pub fn create(&mut self) -> EntityId {
        let id = EntityId(self.next_id);
        self.next_id += 1;
        self.alive.insert(id);
        id
    }

    /// Remove an entity and every component attached to it.
    pub fn despawn(&mut self, id: EntityId) -> bool {
        if !self.alive.remove(&id) {
            return false;
        }
        self.positions.remove(id);
        self.stats.remove(id);
        self.counts.remove(id);
        self.movement.remove(id);
        self.action_points.remove(id);
        self.factions.remove(id);
        self.statuses.remove(id);
        self.skills.remove(id);
        self.activity.remove(id);
        self.locks.remove(id);
        true
    }

    pub fn is_alive(&self, id: EntityId) -> bool {
        self.alive.contains(&id)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.alive.iter().copied()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn faction_of(&self, id: EntityId) -> Option<Faction> {
        self.factions.get(id).map(|f| f.0)
    }

    pub fn position_of(&self, id: EntityId) -> Option<HexCoord> {
        self.positions.get(id).map(|p| p.0)
    }

    /// Live units of a faction, ascending id.
    pub fn units_of(&self, faction: Faction) -> Vec<EntityId> {
        self.factions
            .iter()
            .filter(|(id, f)| f.0 == faction && self.alive.contains(id))
            .map(|(id, _)| id)
            .collect()
    }

    pub fn unit_at(&self, c: HexCoord) -> Option<EntityId> {
        self.positions.iter().find(|(_, p)| p.0 == c).map(|(id, _)| id)
    }
}

/// When a scheduled system runs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Phase {
    /// The given faction just ended its turn.
    TurnEnd(Faction),
    /// The given faction's turn begins.
    TurnStart(Faction),
    /// One simulated tick of the real-time clock elapsed.
    Tick { now_ms: u64, tick_ms: u64 },
}

pub trait System {
    fn name(&self) -> &'static str;
    fn run(&mut self, world: &mut WorldState, phase: Phase);
}

/// Ordered list of systems run on every phase.
#[derive(Default)]
pub struct Schedule {
    systems: Vec<Box<dyn System + Send>>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, system: impl System + Send + 'static) -> Self {
        self.systems.push(Box::new(system));
        self
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.systems.iter().map(|s| s.name()).collect()
    }

    pub fn run(&mut self, world: &mut WorldState, phase: Phase) {
        for s in &mut self.systems {
            s.run(world, phase);
        }
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_increase_and_are_not_reused() {
        let mut r = Registry::default();
        let a = r.create();
        let b = r.create();
        assert!(a < b && a != EntityId::INVALID);
        r.despawn(a);
        let c = r.create();
        assert!(c > b);
        assert!(!r.is_alive(a));
    }

    #[test]
    fn despawn_clears_components() {
        let mut r = Registry::default();
        let a = r.create();
        r.positions.insert(a, Position(HexCoord::new(1, 1)));
        r.factions.insert(a, FactionTag(Faction::Wei));
        assert_eq!(r.units_of(Faction::Wei), vec![a]);
        assert!(r.despawn(a));
        assert!(r.positions.get(a).is_none());
        assert!(r.units_of(Faction::Wei).is_empty());
        assert!(r.unit_at(HexCoord::new(1, 1)).is_none());
        assert!(!r.despawn(a));
    }

    #[test]
    fn gauge_bounds() {
        let mut g = Gauge::full(2);
        assert!(g.spend(2));
        assert!(!g.spend(1));
        g.add(5);
        assert_eq!(g.current, 2);
    }

    #[test]
    fn status_tick_removes_expired() {
        let mut s = StatusEffects::default();
        s.apply(StatusKind::Confusion, Some(1));
        s.apply(StatusKind::MoraleBoost, Some(2));
        s.apply(StatusKind::Fatigue, None);
        s.tick();
        assert!(!s.has(StatusKind::Confusion));
        assert_eq!(s.0[&StatusKind::MoraleBoost], Some(1));
        assert!(s.has(StatusKind::Fatigue));
    }
}
