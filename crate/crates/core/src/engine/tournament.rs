//! Round-robin tournaments between scripted agents.
//!
//! Every unordered pair plays `games_per_pair` matches with sides alternating.
//! Game seeds are derived from the tournament seed and the pair, so results
//! do not depend on `jobs` or on scheduling.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::runner::{run_match, MatchConfig, MatchError};
use crate::agents::AgentProfile;
use crate::rating::MatchOutcomeRecord;
use crate::rng;
use crate::scenario::Scenario;
use crate::world::Mode;

#[derive(Clone, Debug)]
pub struct TournamentConfig {
    pub players: Vec<AgentProfile>,
    pub games_per_pair: u32,
    pub seed: u64,
    pub mode: Mode,
    pub scenario: Scenario,
    /// Worker threads; at least one is used.
    pub jobs: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum TournamentError {
    #[error("a tournament needs at least two distinct players, got {0}")]
    InsufficientPlayers(usize),
    #[error("player `{0}` is listed twice")]
    DuplicatePlayer(String),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// One scheduled game: indices into `players`, red first.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub red: usize,
    pub blue: usize,
    pub seed: u64,
}

impl TournamentConfig {
    pub fn fixtures(&self) -> Vec<Fixture> {
        let n = self.players.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for g in 0..self.games_per_pair {
                    let seed = rng::derive_seed(self.seed, &format!("pair/{i}/{j}/game/{g}"));
                    let (red, blue) = if g % 2 == 0 { (i, j) } else { (j, i) };
                    out.push(Fixture { red, blue, seed });
                }
            }
        }
        out
    }

    fn check(&self) -> Result<(), TournamentError> {
        let mut seen = BTreeSet::new();
        for p in &self.players {
            if !seen.insert(p) {
                return Err(TournamentError::DuplicatePlayer(p.to_string()));
            }
        }
        if seen.len() < 2 {
            return Err(TournamentError::InsufficientPlayers(seen.len()));
        }
        Ok(())
    }

    pub fn play(&self, f: Fixture) -> Result<MatchOutcomeRecord, MatchError> {
        let (a, b) = (self.players[f.red], self.players[f.blue]);
        // Each game gets fresh agent seeds so a random agent does not replay
        // the same choices on every map.
        let reseed = |p: AgentProfile| AgentProfile::new(p.policy, rng::derive_seed(f.seed, &p.to_string()));
        let (mut red, mut blue) = (reseed(a).build(), reseed(b).build());
        let config = MatchConfig::new(self.mode, f.seed, self.scenario.clone());
        let record = run_match(&config, red.as_mut(), blue.as_mut())?;
        let o = &record.footer.outcome;
        let red_faction = record.header.scenario.factions[0];
        let s_a = match o.winner {
            None => 0.5,
            Some(w) if w == red_faction => 1.0,
            Some(_) => 0.0,
        };
        Ok(MatchOutcomeRecord {
            player_a: a.to_string(),
            player_b: b.to_string(),
            s_a,
            u: o.surviving_fraction,
            t_game: o.duration as f64,
            t_max: o.duration_limit as f64,
            mode: self.mode,
            seed: Some(f.seed),
            final_digest: Some(record.footer.final_digest.clone()),
        })
    }
}

/// Play every fixture and return outcomes in fixture order.
pub fn run_tournament(config: &TournamentConfig) -> Result<Vec<MatchOutcomeRecord>, TournamentError> {
    config.check()?;
    let fixtures = config.fixtures();
    let slots: Vec<Mutex<Option<Result<MatchOutcomeRecord, MatchError>>>> =
        fixtures.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..config.jobs.clamp(1, fixtures.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(f) = fixtures.get(i) else { break };
                *slots[i].lock().expect("slot") = Some(config.play(*f));
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot").expect("every fixture played").map_err(TournamentError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::PolicyTag;

    fn config(jobs: usize) -> TournamentConfig {
        TournamentConfig {
            players: vec![AgentProfile::new(PolicyTag::Greedy, 0), AgentProfile::new(PolicyTag::Random, 0)],
            games_per_pair: 2,
            seed: 5,
            mode: Mode::TurnBased,
            scenario: Scenario::default(),
            jobs,
        }
    }

    #[test]
    fn fixtures_alternate_sides() {
        let f = config(1).fixtures();
        assert_eq!((f[0].red, f[0].blue, f[1].red, f[1].blue), (0, 1, 1, 0));
        assert_ne!(f[0].seed, f[1].seed);
    }

    #[test]
    fn results_do_not_depend_on_jobs() {
        assert_eq!(run_tournament(&config(1)).unwrap(), run_tournament(&config(3)).unwrap());
    }

    #[test]
    fn needs_two_distinct_players() {
        let mut c = config(1);
        c.players.pop();
        assert!(matches!(run_tournament(&c), Err(TournamentError::InsufficientPlayers(1))));
        c.players.push(c.players[0]);
        assert!(matches!(run_tournament(&c), Err(TournamentError::DuplicatePlayer(_))));
    }
}
