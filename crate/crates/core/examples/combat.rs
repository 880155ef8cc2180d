//! The critical-mass curve and one resolved attack on a fortified city.
//!
//! `cargo run --example combat`

use std::sync::Arc;

use serde_json::json;
use star_core::action::{ActionRequest, Engine, Stamp};
use star_core::hex::{GridSize, HexCoord};
use star_core::rules::combat::{casualties, effectiveness, EffectivenessCurve};
use star_core::scenario::Scenario;
use star_core::world::{Faction, Mode, Terrain, TerrainGrid, UnitType, WorldState};

fn main() {
    let curve = EffectivenessCurve::default();
    println!("strength  effectiveness");
    for tenth in (0..=10).rev() {
        let x = f64::from(tenth) / 10.0;
        println!("{x:>8.1}  {:.3}", effectiveness(x, &curve).expect("x lies in [0, 1]"));
    }
    // Half an army hits for well under half: 0.5 * 0.5 + 0.5 * 0.25.
    println!("100 attack vs 70 defense on a city: {} casualties", casualties(100.0, 70.0, 0.4));

    let mut world = WorldState::new(
        Arc::new(Scenario::default()),
        TerrainGrid::filled(GridSize::new(15, 15), Terrain::Plain),
        Mode::TurnBased,
    );
    let city = HexCoord::new(6, 6);
    world.terrain.set(city, Terrain::City);
    let cav = world.spawn_unit(Faction::Wei, UnitType::Cavalry, HexCoord::new(6, 5)).expect("free plain tile");
    let inf = world.spawn_unit(Faction::Shu, UnitType::Infantry, city).expect("free city tile");
    let mut engine = Engine::new(world);
    let stamp = Stamp::default();
    let attack = ActionRequest::new("attack", json!({ "unit_id": cav.0, "target_id": inf.0 }));
    let report = engine.execute(Faction::Wei, &attack, stamp);
    println!("{}", serde_json::to_string_pretty(&report).expect("results serialize"));
}
