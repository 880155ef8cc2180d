//! Platform-independent SHA-256 digest of a world snapshot.
//!
//! Fields are written in a fixed order with fixed-width big-endian integers;
//! entities are visited by ascending id and each component is prefixed by a
//! presence byte. Rules are configuration and are not part of the digest.

use sha2::{Digest, Sha256};

use super::{Faction, WorldState};
use crate::world::Gauge;

struct Encoder(Sha256);

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.0.update([v]);
    }
    fn u32(&mut self, v: u32) {
        self.0.update(v.to_be_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.0.update(v.to_be_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.update(v.to_be_bytes());
    }
    fn gauge(&mut self, g: &Gauge) {
        self.u32(g.current);
        self.u32(g.max);
    }
    fn faction(&mut self, f: Option<Faction>) {
        self.u8(f.map_or(0, Faction::code));
    }
    fn present<T>(&mut self, v: Option<&T>, body: impl FnOnce(&mut Self, &T)) {
        match v {
            Some(x) => {
                self.u8(1);
                body(self, x);
            }
            None => self.u8(0),
        }
    }
}

pub fn snapshot_digest(world: &WorldState) -> String {
    let mut e = Encoder(Sha256::new());
    e.0.update(b"star-world/1");

    let size = world.terrain.size();
    e.i32(size.width);
    e.i32(size.height);
    for t in world.terrain.tiles() {
        e.u8(t.code());
    }
    for o in world.terrain.owners() {
        e.faction(*o);
    }
    for f in world.terrain.fortifications() {
        e.u8(*f);
    }

    e.u8(match world.mode {
        super::Mode::TurnBased => 0,
        super::Mode::RealTime => 1,
    });
    e.u32(world.turn_number);
    e.faction(world.active_faction);
    e.u64(world.clock_ms);
    for f in world.factions {
        e.faction(Some(f));
        let s = &world.faction_state[&f];
        e.u32(s.construction_points);
        e.u32(s.resources.manpower);
        e.u32(s.resources.supplies);
        e.u32(s.soldiers_fielded);
    }

    let r = &world.registry;
    e.u64(r.next_id());
    for id in r.entities() {
        e.u64(id.0);
        e.present(r.positions.get(id), |e, p| {
            e.i32(p.0.col);
            e.i32(p.0.row);
        });
        e.present(r.stats.get(id), |e, s| {
            e.u8(s.unit_type.code());
            e.u32(s.attack);
            e.u32(s.defense);
            e.u32(s.attack_range);
            e.u32(s.vision_range);
        });
        e.present(r.counts.get(id), |e, c| e.gauge(&c.0));
        e.present(r.movement.get(id), |e, m| e.gauge(&m.0));
        e.present(r.action_points.get(id), |e, a| e.gauge(&a.0));
        e.present(r.factions.get(id), |e, f| e.faction(Some(f.0)));
        e.present(r.statuses.get(id), |e, s| {
            e.u32(s.0.len() as u32);
            for (k, left) in &s.0 {
                e.u8(*k as u8);
                e.present(left.as_ref(), |e, n| e.u32(*n));
            }
        });
        e.present(r.skills.get(id), |e, s| {
            e.gauge(&s.skill_points);
            e.u32(s.cooldowns.len() as u32);
            for (k, n) in &s.cooldowns {
                e.u8(*k as u8);
                e.u32(*n);
            }
        });
        e.present(r.activity.get(id), |e, a| {
            e.u32(a.ap_spent);
            e.u32(a.attacks);
            e.u8(u8::from(a.rested));
        });
        e.present(r.locks.get(id), |e, l| e.u64(l.busy_until_ms));
    }

    e.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use crate::hex::HexCoord;
    use crate::scenario::Scenario;
    use crate::world::{Mode, Position, WorldState};

    fn world() -> WorldState {
        WorldState::standard(Arc::new(Scenario { seed: 3, ..Scenario::default() }), Mode::TurnBased).unwrap()
    }

    #[test]
    fn deep_copy_has_equal_digest() {
        let w = world();
        assert_eq!(w.digest(), w.clone().digest());
        assert_eq!(w.digest().len(), 64);
    }

    #[test]
    fn moving_a_unit_changes_digest() {
        let w = world();
        let mut moved = w.clone();
        let id = moved.registry.entities().next().unwrap();
        let p = moved.registry.position_of(id).unwrap();
        moved.registry.positions.insert(id, Position(HexCoord::new(p.col + 1, p.row)));
        assert_ne!(w.digest(), moved.digest());
    }

    #[test]
    fn turn_and_terrain_changes_digest() {
        let w = world();
        let mut t = w.clone();
        t.turn_number += 1;
        assert_ne!(w.digest(), t.digest());
        let mut g = w.clone();
        g.terrain.set_fortification(HexCoord::new(7, 7), 1);
        assert_ne!(w.digest(), g.digest());
    }
}
