//! Distances, lines, line of sight and terrain-costed paths on the standard
//! battlefield.
//!
//! `cargo run --example hex_geometry`

use star_core::hex::{find_path, hex_distance, hex_line, line_of_sight, neighbors, reachable, HexCoord};
use star_core::scenario::Scenario;
use star_core::world::build_battlefield;

fn show(cells: &[HexCoord]) -> String {
    cells.iter().map(|c| format!("({},{})", c.col, c.row)).collect::<Vec<_>>().join(" ")
}

fn main() {
    let grid = build_battlefield(&Scenario::default()).expect("the standard scenario builds");
    let size = grid.size();
    let (a, b) = (HexCoord::new(1, 1), HexCoord::new(13, 13));

    // Even-q columns: odd columns sit half a hex lower, so neighbour offsets
    // depend on column parity.
    println!("neighbours of (4,4): {}", show(&neighbors(HexCoord::new(4, 4), size)));
    println!("neighbours of (5,4): {}", show(&neighbors(HexCoord::new(5, 4), size)));

    println!("distance {} -> {}: {}", show(&[a]), show(&[b]), hex_distance(a, b));
    let line = hex_line(a, b);
    println!("line ({} cells): {}", line.len(), show(&line));
    let clear = line_of_sight(a, b, |c| grid.terrain(c).blocks_vision());
    println!("line of sight: {clear}");

    let cost = |c: HexCoord| grid.terrain(c).move_cost();
    match find_path(a, b, size, cost, u32::MAX) {
        Some(p) => println!("cheapest path costs {} over {} steps: {}", p.total_cost, p.steps.len(), show(&p.steps)),
        None => println!("no path"),
    }
    let within = reachable(a, size, cost, 3);
    println!("{} cells reachable from {} with 3 movement points", within.len(), show(&[a]));
}
