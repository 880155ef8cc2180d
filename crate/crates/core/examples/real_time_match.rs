//! A real-time match: both sides act whenever their units are free, and
//! every action locks its unit for a duration on the game clock.
//!
//! `cargo run --example real_time_match -- 5`

use star_core::action::{ActionKind, LogRecord};
use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{action_lock_duration, run_match, MatchConfig};
use star_core::scenario::Scenario;
use star_core::world::Mode;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let scenario = Scenario::default();
    println!("tick {} ms, horizon {} ms", scenario.real_time.tick_ms, scenario.horizon.real_time_ms);
    for (kind, cost) in [(ActionKind::Move, 1), (ActionKind::Move, 3), (ActionKind::Attack, 0), (ActionKind::Fortify, 0)] {
        let lock = action_lock_duration(kind, cost, &scenario.real_time);
        println!("lock after {} (path cost {cost}): {lock:?}", kind.as_str());
    }
    let config = MatchConfig::new(Mode::RealTime, seed, scenario);
    let mut red = AgentProfile::new(PolicyTag::Greedy, seed).build();
    let mut blue = AgentProfile::new(PolicyTag::Kiting, seed).build();
    let record = run_match(&config, red.as_mut(), blue.as_mut()).expect("the standard scenario builds");

    let timeline: Vec<String> = record
        .log
        .records()
        .iter()
        .filter_map(|r| match r {
            LogRecord::Action { clock_ms, faction, request, result, .. } if result.ok => {
                Some(format!("{clock_ms:>7} ms {:<4} {}", faction.as_str(), request.action))
            }
            _ => None,
        })
        .take(12)
        .collect();
    println!("first successful actions:\n{}", timeline.join("\n"));
    let o = &record.footer.outcome;
    println!("winner {:?} by {:?} at {} ms", o.winner, o.terminal_reason, o.duration);
}
