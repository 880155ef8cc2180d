//! What each side sees at the start of a match and after twelve turns.
//!
//! `cargo run --example fog_of_war -- 9`

use serde_json::json;
use star_core::action::{visible_cells, ActionRequest, Engine, ObservationLevel, Stamp};
use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::MatchConfig;
use star_core::scenario::Scenario;
use star_core::world::{Faction, Mode};

fn report(engine: &Engine, when: &str) {
    for f in engine.world.factions {
        let visible = visible_cells(&engine.world, f);
        let obs = engine.observation(f, ObservationLevel::Basic);
        println!(
            "{when}: {} sees {} tiles and {} enemy units",
            f.as_str(),
            visible.len(),
            obs.known_enemy_units.len()
        );
    }
}

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(9);
    let config = MatchConfig::new(Mode::TurnBased, seed, Scenario::default());
    let engine = Engine::new(config.build_world().expect("the standard scenario builds"));
    report(&engine, "start");

    // Observation size grows with the level; enemy entries never carry an
    // exact count at any level.
    for level in [ObservationLevel::Basic, ObservationLevel::Detailed, ObservationLevel::Tactical] {
        let doc = serde_json::to_string(&engine.observation(Faction::Wei, level)).expect("observations serialize");
        println!("{level:?} observation: {} bytes", doc.len());
    }

    // Let two greedy agents play six turns each, then look again.
    let mut engine = engine;
    let mut policies = [AgentProfile::new(PolicyTag::Greedy, seed).build(), AgentProfile::new(PolicyTag::Greedy, seed).build()];
    while engine.world.turn_number <= 12 && !engine.is_over() {
        let f = engine.world.active_faction.expect("turn-based play has an active side");
        let side = usize::from(f != engine.world.factions[0]);
        let obs = engine.observation(f, ObservationLevel::Tactical);
        for req in policies[side].decide(&obs) {
            engine.execute(f, &req, Stamp::default());
        }
        if engine.world.active_faction == Some(f) {
            engine.execute(f, &ActionRequest::new("end_turn", json!({ "faction": f })), Stamp::default());
        }
    }
    report(&engine, &format!("turn {}", engine.world.turn_number));
    if let Some(o) = engine.outcome() {
        println!("match over: winner {:?} by {:?}; the eliminated side sees nothing", o.winner, o.terminal_reason);
    }
    let obs = engine.observation(Faction::Wei, ObservationLevel::Basic);
    for e in &obs.known_enemy_units {
        println!("  wei spots {:?} {} at ({},{}) ~{:?}", e.unit_type, e.id.0, e.position.col, e.position.row, e.estimate_count);
    }
}
