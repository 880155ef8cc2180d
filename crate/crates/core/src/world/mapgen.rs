//! Procedural battlefield generation: gradient noise elevation bands,
//! cellular-automata smoothing, city placement and land connectivity repair.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::terrain::{Terrain, TerrainGrid};
use super::WorldError;
use crate::hex::{hex_distance, neighbors, GridSize, HexCoord};
use crate::rng::stream;
use crate::scenario::MapParams;

/// Classic 2D gradient noise over a seeded permutation table.
struct GradientNoise {
    perm: [u8; 512],
}

impl GradientNoise {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut p: Vec<u8> = (0..=255).collect();
        p.shuffle(rng);
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = p[i & 255];
        }
        Self { perm }
    }

    fn grad(hash: u8, x: f64, y: f64) -> f64 {
        match hash & 7 {
            0 => x + y,
            1 => x - y,
            2 => -x + y,
            3 => -x - y,
            4 => x,
            5 => -x,
            6 => y,
            _ => -y,
        }
    }

    fn fade(t: f64) -> f64 {
        t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
    }

    fn lerp(a: f64, b: f64, t: f64) -> f64 {
        a + t * (b - a)
    }

    fn sample(&self, x: f64, y: f64) -> f64 {
        let (xf, yf) = (x.floor(), y.floor());
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let (dx, dy) = (x - xf, y - yf);
        let (u, v) = (Self::fade(dx), Self::fade(dy));
        let p = &self.perm;
        let aa = p[p[xi] as usize + yi];
        let ab = p[p[xi] as usize + yi + 1];
        let ba = p[p[xi + 1] as usize + yi];
        let bb = p[p[xi + 1] as usize + yi + 1];
        let x1 = Self::lerp(Self::grad(aa, dx, dy), Self::grad(ba, dx - 1.0, dy), u);
        let x2 = Self::lerp(Self::grad(ab, dx, dy - 1.0), Self::grad(bb, dx - 1.0, dy - 1.0), u);
        Self::lerp(x1, x2, v)
    }

    /// Two-octave fractal sum.
    fn fractal(&self, x: f64, y: f64) -> f64 {
        self.sample(x, y) + 0.5 * self.sample(2.0 * x + 17.3, 2.0 * y + 5.1)
    }
}

/// Planar centre of a flat-topped even-q cell.
fn cell_center(c: HexCoord) -> (f64, f64) {
    let shift = if c.col & 1 == 0 { 0.5 } else { 0.0 };
    (1.5 * f64::from(c.col), 3f64.sqrt() * (f64::from(c.row) + shift))
}

fn check_params(size: GridSize, p: &MapParams) -> Result<(), WorldError> {
    let degenerate = |m: String| Err(WorldError::DegenerateMap(m));
    if size.width < 5 || size.height < 5 {
        return degenerate(format!("map {}x{} is smaller than 5x5", size.width, size.height));
    }
    let fractions = [p.water_fraction, p.rough_fraction, p.mountain_fraction];
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return degenerate("terrain fractions must lie in [0,1]".into());
    }
    if fractions.iter().sum::<f64>() > 1.0 {
        return degenerate("terrain fractions sum above 1".into());
    }
    let land = size.cell_count() as f64 * (1.0 - p.water_fraction);
    if land < 7.0 {
        return degenerate(format!("water_fraction {} leaves no room for land", p.water_fraction));
    }
    if p.noise_scale.is_nan() || p.noise_scale <= 0.0 {
        return degenerate("noise_scale must be positive".into());
    }
    Ok(())
}

/// Elevation bands by quantile, split rough band by a moisture field.
fn banded(size: GridSize, p: &MapParams, rng: &mut ChaCha8Rng) -> TerrainGrid {
    let elevation = GradientNoise::new(rng);
    let moisture = GradientNoise::new(rng);
    let n = size.cell_count();
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let (x, y) = cell_center(size.coord(i));
            (elevation.fractal(x / p.noise_scale, y / p.noise_scale), i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let count = |f: f64| (f * n as f64).round() as usize;
    let water = count(p.water_fraction);
    let mountains = count(p.mountain_fraction).min(n - water);
    let rough = count(p.rough_fraction).min(n - water - mountains);
    let mut tiles = vec![Terrain::Plain; n];
    for (rank, &(_, i)) in order.iter().enumerate() {
        tiles[i] = if rank < water {
            Terrain::Water
        } else if rank >= n - mountains {
            Terrain::Mountain
        } else if rank >= n - mountains - rough {
            let (x, y) = cell_center(size.coord(i));
            if moisture.sample(x / p.noise_scale + 31.7, y / p.noise_scale + 7.9) >= 0.0 {
                Terrain::Forest
            } else {
                Terrain::Hill
            }
        } else {
            Terrain::Plain
        };
    }
    TerrainGrid::from_tiles(size, tiles).expect("tile count matches size")
}

/// One synchronous majority-rule pass over hex neighbourhoods.
fn smooth(grid: &TerrainGrid) -> TerrainGrid {
    let size = grid.size();
    let mut out = grid.clone();
    for c in size.cells() {
        let ns = neighbors(c, size);
        let mut tally = [0usize; 6];
        for n in &ns {
            tally[grid.terrain(*n).code() as usize] += 1;
        }
        let (best, votes) = tally
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, v)| (Terrain::ALL[i], *v))
            .expect("six tallies");
        if votes >= 2 && 2 * votes > ns.len() {
            out.set(c, best);
        }
    }
    out
}

fn land_degree(grid: &TerrainGrid, c: HexCoord) -> usize {
    neighbors(c, grid.size()).iter().filter(|n| grid.terrain(**n).is_land()).count()
}

/// Cities on the best-connected land cells, spaced apart.
fn place_cities(grid: &mut TerrainGrid, p: &MapParams, rng: &mut ChaCha8Rng) {
    let mut candidates: Vec<(usize, u64, HexCoord)> = grid
        .size()
        .cells()
        .filter(|c| grid.terrain(*c).is_land())
        .map(|c| (land_degree(grid, c), rng.gen::<u64>(), c))
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut placed: Vec<HexCoord> = Vec::new();
    for (_, _, c) in candidates {
        if placed.len() >= p.city_count {
            break;
        }
        if placed.iter().all(|q| hex_distance(*q, c) >= p.city_spacing) {
            placed.push(c);
        }
    }
    for c in placed {
        grid.set(c, Terrain::City);
    }
}

/// Cities in half-turn pairs on the best-connected land cells outside
/// `reserved`, plus the centre when `city_count` is odd. Any existing
/// cities are cleared first, so the result stays symmetric.
pub(crate) fn place_cities_mirrored(grid: &mut TerrainGrid, p: &MapParams, reserved: &[HexCoord], seed: u64) {
    let size = grid.size();
    for c in size.cells() {
        if grid.terrain(c) == Terrain::City {
            grid.set(c, Terrain::Plain);
        }
    }
    let mut rng = stream(seed, "mapgen/cities");
    let usable = |g: &TerrainGrid, c: HexCoord| g.terrain(c).is_land() && !reserved.contains(&c);
    let mut placed: Vec<HexCoord> = Vec::new();
    let centre = size.center();
    if p.city_count % 2 == 1 && size.rotate_half_turn(centre) == centre && usable(grid, centre) {
        placed.push(centre);
    }
    let mut candidates: Vec<(usize, u64, HexCoord)> = size
        .cells()
        .filter(|c| usable(grid, *c) && usable(grid, size.rotate_half_turn(*c)))
        .map(|c| (land_degree(grid, c), rng.gen::<u64>(), c))
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, _, c) in candidates {
        let image = size.rotate_half_turn(c);
        if placed.len() + 2 > p.city_count || c == image {
            continue;
        }
        let spaced = |q: &HexCoord| hex_distance(*q, c) >= p.city_spacing && hex_distance(*q, image) >= p.city_spacing;
        if hex_distance(c, image) >= p.city_spacing && placed.iter().all(spaced) {
            placed.push(c);
            placed.push(image);
        }
    }
    for c in placed {
        grid.set(c, Terrain::City);
    }
}

/// Connected land regions, each sorted, largest first.
pub fn land_components(grid: &TerrainGrid) -> Vec<Vec<HexCoord>> {
    let size = grid.size();
    let mut seen = vec![false; size.cell_count()];
    let mut comps = Vec::new();
    for start in size.cells() {
        if seen[size.index(start)] || !grid.terrain(start).is_land() {
            continue;
        }
        seen[size.index(start)] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in neighbors(c, size) {
                let i = size.index(n);
                if !seen[i] && grid.terrain(n).is_land() {
                    seen[i] = true;
                    comp.push(n);
                    queue.push_back(n);
                }
            }
        }
        comp.sort();
        comps.push(comp);
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

pub fn is_land_connected(grid: &TerrainGrid) -> bool {
    land_components(grid).len() <= 1
}

/// Shortest cell chain from `from` to any cell of `to`, crossing anything.
fn bridge(size: GridSize, from: &[HexCoord], to: &[HexCoord]) -> Vec<HexCoord> {
    let mut prev: Vec<Option<HexCoord>> = vec![None; size.cell_count()];
    let mut seen = vec![false; size.cell_count()];
    let mut target = vec![false; size.cell_count()];
    for c in to {
        target[size.index(*c)] = true;
    }
    let mut queue = VecDeque::new();
    for c in from {
        seen[size.index(*c)] = true;
        queue.push_back(*c);
    }
    while let Some(c) = queue.pop_front() {
        if target[size.index(c)] {
            let mut path = vec![c];
            let mut at = c;
            while let Some(p) = prev[size.index(at)] {
                path.push(p);
                at = p;
            }
            return path;
        }
        for n in neighbors(c, size) {
            let i = size.index(n);
            if !seen[i] {
                seen[i] = true;
                prev[i] = Some(c);
                queue.push_back(n);
            }
        }
    }
    Vec::new()
}

/// Turn water into plain along bridges until land is one region. With
/// `symmetric`, each converted cell's half-turn image is converted too.
pub(crate) fn connect_land(grid: &mut TerrainGrid, symmetric: bool) {
    loop {
        let comps = land_components(grid);
        if comps.len() <= 1 {
            return;
        }
        let size = grid.size();
        let smallest = comps.last().expect("at least two components");
        for c in bridge(size, smallest, &comps[0]) {
            if grid.terrain(c) == Terrain::Water {
                grid.set(c, Terrain::Plain);
                if symmetric {
                    grid.set(size.rotate_half_turn(c), Terrain::Plain);
                }
            }
        }
    }
}

/// Generate a terrain grid. Deterministic for fixed `(seed, params)`; the
/// land of the result is always one connected region.
pub fn generate_map(seed: u64, params: &MapParams) -> Result<TerrainGrid, WorldError> {
    let size = GridSize::new(params.width, params.height);
    check_params(size, params)?;
    let mut last = None;
    for attempt in 0..params.max_attempts.max(1) {
        let mut rng = stream(seed, &format!("mapgen/{attempt}"));
        let mut grid = banded(size, params, &mut rng);
        for _ in 0..params.smoothing_passes {
            grid = smooth(&grid);
        }
        place_cities(&mut grid, params, &mut rng);
        if is_land_connected(&grid) {
            return Ok(grid);
        }
        last = Some(grid);
    }
    let mut grid = last.expect("at least one attempt");
    connect_land(&mut grid, false);
    if grid.tiles().iter().all(|t| !t.is_land()) {
        return Err(WorldError::DegenerateMap("no land tiles".into()));
    }
    Ok(grid)
}

/// Make the grid invariant under the half-turn `(c, r) -> (w-1-c, h-1-r)`.
///
/// The seed picks which half is kept. Land connectivity is restored with
/// mirrored bridges, so the result stays symmetric.
pub fn mirror_symmetrize(grid: &TerrainGrid, seed: u64) -> TerrainGrid {
    let size = grid.size();
    let n = size.cell_count();
    let keep_low = seed.is_multiple_of(2);
    let mut out = grid.clone();
    for i in 0..n {
        let j = n - 1 - i;
        let source_is_i = if keep_low { i <= j } else { i >= j };
        if source_is_i {
            let (from, to) = (size.coord(i), size.coord(j));
            out.set(to, grid.terrain(from));
            out.set_owner(to, grid.owner(from));
            out.set_fortification(to, grid.fortification(from));
        }
    }
    connect_land(&mut out, true);
    out
}

/// Start zone of side `side` (0 or 1). Side 1 is the half-turn image of side 0.
pub fn start_zone(size: GridSize, radius: u32, side: usize) -> Vec<HexCoord> {
    let r = radius as i32;
    let anchor = HexCoord::new(r.min(size.width - 1), r.min(size.height - 1));
    let mut zone = crate::hex::cells_within(anchor, radius, size);
    zone.sort_by_key(|c| (hex_distance(anchor, *c), c.row, c.col));
    if side == 1 {
        zone = zone.into_iter().map(|c| size.rotate_half_turn(c)).collect();
    }
    zone
}

/// Terrain histogram of a set of cells, indexed like [`Terrain::ALL`].
pub fn histogram(grid: &TerrainGrid, cells: &[HexCoord]) -> [usize; 6] {
    let mut h = [0; 6];
    for c in cells {
        h[grid.terrain(*c).code() as usize] += 1;
    }
    h
}
