//! Baseline: uniformly sampled attacks and moves.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::view::View;
use crate::action::{ActionRequest, ObservationDoc};
use crate::engine::Policy;
use crate::rng;

pub struct RandomPolicy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: rng::stream(seed, "agent/random") }
    }
}

impl Policy for RandomPolicy {
    fn label(&self) -> String {
        format!("random:{}", self.seed)
    }

    /// Per unit: attack a sampled in-range enemy half the time when one
    /// exists, otherwise move to a sampled reachable tile half the time.
    fn decide(&mut self, obs: &ObservationDoc) -> Vec<ActionRequest> {
        let mut v = View::new(obs);
        if !v.may_act() {
            return Vec::new();
        }
        let mut batch = Vec::new();
        for u in v.ready_units() {
            let targets: Vec<_> = v
                .enemies()
                .iter()
                .filter(|e| u.enemies_in_range.as_ref().is_some_and(|r| r.contains(&e.id)))
                .collect();
            if !targets.is_empty() && v.can_attack(u) && self.rng.gen_bool(0.5) {
                let e = targets.choose(&mut self.rng).expect("non-empty");
                batch.push(v.attack(u, e));
                continue;
            }
            let moves = v.moves(u);
            if !moves.is_empty() && self.rng.gen_bool(0.5) {
                let (to, _) = *moves.choose(&mut self.rng).expect("non-empty");
                batch.push(v.move_to(u, to));
            }
        }
        v.finish(batch)
    }
}
