//! Round-robin between the scripted agents, rated with plain and
//! performance-weighted Elo over shuffled orderings.
//!
//! `cargo run --release --example tournament_ratings`

use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{run_tournament, TournamentConfig};
use star_core::rating::{self, RatingParams};
use star_core::scenario::Scenario;
use star_core::world::Mode;

fn main() {
    let config = TournamentConfig {
        players: [PolicyTag::Random, PolicyTag::Greedy, PolicyTag::Kiting].map(|t| AgentProfile::new(t, 0)).to_vec(),
        games_per_pair: 6,
        seed: 2024,
        mode: Mode::TurnBased,
        scenario: Scenario::default(),
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let outcomes = run_tournament(&config).expect("three distinct players");
    for o in outcomes.iter().take(4) {
        println!(
            "{} vs {}: s_a {} u {:.3} multiplier {:.3}",
            o.player_a,
            o.player_b,
            o.s_a,
            o.u,
            o.multiplier(&RatingParams::default())
        );
    }
    println!("... {} games", outcomes.len());

    let board = rating::run_tournament(&outcomes, &RatingParams::default(), 100, 0).expect("valid outcomes");
    print!("{}", board.render());

    // A quick win with most of the army intact moves ratings further than a
    // narrow win at the horizon.
    let p = RatingParams::default();
    println!("decisive win multiplier: {:.3}", rating::performance_multiplier(0.9, 10.0, 100.0, p.alpha, p.beta));
    println!("narrow win multiplier:   {:.3}", rating::performance_multiplier(0.1, 100.0, 100.0, p.alpha, p.beta));
}
