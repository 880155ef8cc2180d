//! Hexagonal grid mathematics.
//!
//! Boards use flat-topped hexes addressed by even-q offset coordinates
//! `(col, row)`: even columns are the shifted ones. All metric work happens
//! in axial/cube space, where
//!
//! ```text
//! q = col
//! r = row - (col + (col & 1)) / 2
//! ```
//!
//! Everything in this module is a pure function of its inputs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Board position in even-q offset form.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexCoord {
    pub col: i32,
    pub row: i32,
}

impl HexCoord {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    pub fn to_axial(self) -> AxialCoord {
        offset_to_axial(self)
    }

    pub fn distance(self, other: HexCoord) -> u32 {
        hex_distance(self, other)
    }
}

impl fmt::Display for HexCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

/// Axial coordinate; the implicit third cube axis is `s = -q - r`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AxialCoord {
    pub q: i32,
    pub r: i32,
}

impl AxialCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    pub fn s(self) -> i32 {
        -self.q - self.r
    }

    pub fn to_offset(self) -> HexCoord {
        axial_to_offset(self)
    }
}

/// The six axial unit steps.
pub const AXIAL_DIRECTIONS: [AxialCoord; 6] = [
    AxialCoord::new(1, 0),
    AxialCoord::new(1, -1),
    AxialCoord::new(0, -1),
    AxialCoord::new(-1, 0),
    AxialCoord::new(-1, 1),
    AxialCoord::new(0, 1),
];

/// Board dimensions in cells.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSize {
    pub width: i32,
    pub height: i32,
}

impl GridSize {
    pub const fn new(width: i32, height: i32) -> Self {
        Self { width, height }
    }

    pub fn contains(self, c: HexCoord) -> bool {
        c.col >= 0 && c.row >= 0 && c.col < self.width && c.row < self.height
    }

    pub fn cell_count(self) -> usize {
        (self.width.max(0) as usize) * (self.height.max(0) as usize)
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(self, c: HexCoord) -> usize {
        debug_assert!(self.contains(c));
        (c.row * self.width + c.col) as usize
    }

    pub fn coord(self, index: usize) -> HexCoord {
        let index = index as i32;
        HexCoord::new(index % self.width, index / self.width)
    }

    /// All cells in row-major order.
    pub fn cells(self) -> impl Iterator<Item = HexCoord> {
        (0..self.height).flat_map(move |row| (0..self.width).map(move |col| HexCoord::new(col, row)))
    }

    /// 180° index rotation about the board centre.
    pub fn rotate_half_turn(self, c: HexCoord) -> HexCoord {
        HexCoord::new(self.width - 1 - c.col, self.height - 1 - c.row)
    }

    pub fn center(self) -> HexCoord {
        HexCoord::new(self.width / 2, self.height / 2)
    }
}

pub fn offset_to_axial(c: HexCoord) -> AxialCoord {
    AxialCoord::new(c.col, c.row - (c.col + (c.col & 1)) / 2)
}

pub fn axial_to_offset(a: AxialCoord) -> HexCoord {
    HexCoord::new(a.q, a.r + (a.q + (a.q & 1)) / 2)
}

pub fn axial_distance(a: AxialCoord, b: AxialCoord) -> u32 {
    let dq = a.q - b.q;
    let dr = a.r - b.r;
    let ds = a.s() - b.s();
    ((dq.abs() + dr.abs() + ds.abs()) / 2) as u32
}

pub fn hex_distance(a: HexCoord, b: HexCoord) -> u32 {
    axial_distance(offset_to_axial(a), offset_to_axial(b))
}

/// In-bounds neighbours of `c`, in axial direction order.
pub fn neighbors(c: HexCoord, size: GridSize) -> Vec<HexCoord> {
    let a = offset_to_axial(c);
    AXIAL_DIRECTIONS
        .iter()
        .map(|d| axial_to_offset(AxialCoord::new(a.q + d.q, a.r + d.r)))
        .filter(|n| size.contains(*n))
        .collect()
}

/// Cells within `radius` of `center` (inclusive), clipped to the board, row-major.
pub fn cells_within(center: HexCoord, radius: u32, size: GridSize) -> Vec<HexCoord> {
    let r = radius as i32;
    let mut out: Vec<HexCoord> = Vec::new();
    for row in (center.row - 2 * r).max(0)..=(center.row + 2 * r).min(size.height - 1) {
        for col in (center.col - r).max(0)..=(center.col + r).min(size.width - 1) {
            let c = HexCoord::new(col, row);
            if hex_distance(center, c) <= radius {
                out.push(c);
            }
        }
    }
    out
}

/// Round a cube point `p / n` (integer numerators) to its containing hex.
///
/// Exact integer arithmetic; a point on a cell boundary goes to the
/// candidate with the lower cube-x, then lower cube-y.
fn round_cube(p: [i64; 3], n: i64) -> AxialCoord {
    let lo = |v: i64| v.div_euclid(n);
    let mut best: Option<((i64, i64, i64), [i64; 3])> = None;
    for mask in 0..8u8 {
        let h = [
            lo(p[0]) + i64::from(mask & 1),
            lo(p[1]) + i64::from((mask >> 1) & 1),
            lo(p[2]) + i64::from((mask >> 2) & 1),
        ];
        if h[0] + h[1] + h[2] != 0 {
            continue;
        }
        let d2: i64 = (0..3).map(|i| (h[i] * n - p[i]).pow(2)).sum();
        let key = (d2, h[0], h[1]);
        if best.is_none_or(|(k, _)| key < k) {
            best = Some((key, h));
        }
    }
    let h = best.expect("cube point always has an integer neighbour").1;
    // cube (x, y, z) = (q, s, r)
    AxialCoord::new(h[0] as i32, h[2] as i32)
}

/// Cells on the hex line from `a` to `b`, both endpoints included.
pub fn hex_line(a: HexCoord, b: HexCoord) -> Vec<HexCoord> {
    let n = hex_distance(a, b) as i64;
    if n == 0 {
        return vec![a];
    }
    let (aa, ba) = (offset_to_axial(a), offset_to_axial(b));
    let ca = [aa.q as i64, aa.s() as i64, aa.r as i64];
    let cb = [ba.q as i64, ba.s() as i64, ba.r as i64];
    (0..=n)
        .map(|i| {
            let p = [0, 1, 2].map(|k| ca[k] * (n - i) + cb[k] * i);
            axial_to_offset(round_cube(p, n))
        })
        .collect()
}

/// True iff no interior cell of the line between `a` and `b` blocks.
pub fn line_of_sight<F>(a: HexCoord, b: HexCoord, blocks: F) -> bool
where
    F: Fn(HexCoord) -> bool,
{
    let line = hex_line(a, b);
    if line.len() <= 2 {
        return true;
    }
    !line[1..line.len() - 1].iter().any(|c| blocks(*c))
}

/// A route found by [`find_path`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    /// From start (exclusive) to goal (inclusive).
    pub steps: Vec<HexCoord>,
    pub total_cost: u32,
}

impl Path {
    pub fn destination(&self) -> Option<HexCoord> {
        self.steps.last().copied()
    }
}

struct Search {
    cost: BTreeMap<HexCoord, u32>,
    prev: BTreeMap<HexCoord, HexCoord>,
}

/// Dijkstra bounded by `budget`. Heap order is `(cost, col, row)`.
fn dijkstra<F>(
    start: HexCoord,
    goal: Option<HexCoord>,
    size: GridSize,
    entry_cost: &F,
    budget: u32,
) -> Search
where
    F: Fn(HexCoord) -> Option<u32>,
{
    let mut cost = BTreeMap::from([(start, 0u32)]);
    let mut prev = BTreeMap::new();
    let mut heap = BinaryHeap::from([Reverse((0u32, start.col, start.row))]);
    while let Some(Reverse((d, col, row))) = heap.pop() {
        let here = HexCoord::new(col, row);
        if cost.get(&here).is_some_and(|&best| d > best) {
            continue;
        }
        if Some(here) == goal {
            break;
        }
        for next in neighbors(here, size) {
            let Some(step) = entry_cost(next) else { continue };
            let nd = d.saturating_add(step);
            if nd > budget {
                continue;
            }
            if cost.get(&next).is_none_or(|&old| nd < old) {
                cost.insert(next, nd);
                prev.insert(next, here);
                heap.push(Reverse((nd, next.col, next.row)));
            }
        }
    }
    Search { cost, prev }
}

/// Minimum-cost route from `start` to `goal` whose total cost fits `budget`.
///
/// Cost is charged on tile entry and the start tile is free. `entry_cost`
/// returns `None` for impassable cells.
pub fn find_path<F>(
    start: HexCoord,
    goal: HexCoord,
    size: GridSize,
    entry_cost: F,
    budget: u32,
) -> Option<Path>
where
    F: Fn(HexCoord) -> Option<u32>,
{
    if start == goal || !size.contains(start) || !size.contains(goal) {
        return None;
    }
    let search = dijkstra(start, Some(goal), size, &entry_cost, budget);
    let total_cost = *search.cost.get(&goal)?;
    let mut steps = vec![goal];
    let mut at = goal;
    while let Some(&p) = search.prev.get(&at) {
        if p == start {
            break;
        }
        steps.push(p);
        at = p;
    }
    steps.reverse();
    Some(Path { steps, total_cost })
}

/// Every cell reachable from `start` within `budget`, with its cheapest cost.
/// The start itself is excluded.
pub fn reachable<F>(start: HexCoord, size: GridSize, entry_cost: F, budget: u32) -> BTreeMap<HexCoord, u32>
where
    F: Fn(HexCoord) -> Option<u32>,
{
    let mut cost = dijkstra(start, None, size, &entry_cost, budget).cost;
    cost.remove(&start);
    cost
}
