//! Generate the standard battlefield for a seed and print it with its
//! start zones and terrain census.
//!
//! `cargo run --example map_generation -- 7`

use std::sync::Arc;

use star_core::scenario::Scenario;
use star_core::world::{Mode, Terrain, WorldState};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let scenario = Scenario { seed, ..Scenario::default() };
    let world = WorldState::standard(Arc::new(scenario), Mode::TurnBased).expect("the standard scenario builds");
    println!("seed {seed}, digest {}", world.digest());
    println!("{}", world.terrain.dump());
    for t in [Terrain::Plain, Terrain::Forest, Terrain::Hill, Terrain::Mountain, Terrain::Water, Terrain::City] {
        println!("{t:?}: {}", world.terrain.count(t));
    }
    for f in world.factions {
        let at: Vec<String> = world
            .registry
            .units_of(f)
            .into_iter()
            .map(|u| {
                let p = world.registry.position_of(u).unwrap();
                format!("({},{})", p.col, p.row)
            })
            .collect();
        println!("{} starts at {}", f.as_str(), at.join(" "));
    }
}
