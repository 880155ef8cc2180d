//! One turn-based match between two scripted agents, with per-side stats.
//!
//! `cargo run --example scripted_match -- 3`

use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{run_match, MatchConfig};
use star_core::scenario::Scenario;
use star_core::world::Mode;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = MatchConfig::new(Mode::TurnBased, seed, Scenario::default());
    let mut red = AgentProfile::new(PolicyTag::Kiting, seed).build();
    let mut blue = AgentProfile::new(PolicyTag::Greedy, seed).build();
    let record = run_match(&config, red.as_mut(), blue.as_mut()).expect("the standard scenario builds");

    let o = &record.footer.outcome;
    println!("agents: {:?}", record.header.agents);
    println!(
        "winner {:?} by {:?} after {} turns, surviving fraction {:.3}",
        o.winner, o.terminal_reason, record.footer.turn_number, o.surviving_fraction
    );
    for (faction, s) in &record.footer.stats {
        println!(
            "{}: {} calls, {} failed, {} unit actions, tce {:.3}",
            faction.as_str(),
            s.total_calls,
            s.failed_calls,
            s.actions_per_game,
            s.tce
        );
    }
    println!("{} log records, final digest {}", record.log.len(), record.footer.final_digest);
}
