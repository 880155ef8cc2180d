use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Faction;
use crate::hex::{GridSize, HexCoord};
use crate::world::WorldError;

/// Terrain tag of one tile.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terrain {
    Plain,
    Forest,
    Hill,
    Mountain,
    Water,
    City,
}

impl Terrain {
    pub const ALL: [Terrain; 6] = [
        Terrain::Plain,
        Terrain::Forest,
        Terrain::Hill,
        Terrain::Mountain,
        Terrain::Water,
        Terrain::City,
    ];

    /// Movement points charged on entry; `None` means impassable.
    pub fn move_cost(self) -> Option<u32> {
        match self {
            Terrain::Plain | Terrain::City => Some(1),
            Terrain::Forest | Terrain::Hill => Some(2),
            Terrain::Mountain => Some(3),
            Terrain::Water => None,
        }
    }

    /// Defender bonus as a fraction. Water never hosts a unit.
    pub fn defense_bonus(self) -> f64 {
        match self {
            Terrain::Plain | Terrain::Water => 0.0,
            Terrain::Forest => 0.2,
            Terrain::Hill => 0.3,
            Terrain::Mountain => 0.5,
            Terrain::City => 0.4,
        }
    }

    pub fn blocks_vision(self) -> bool {
        matches!(self, Terrain::Forest | Terrain::Hill | Terrain::Mountain | Terrain::City)
    }

    pub fn is_land(self) -> bool {
        self != Terrain::Water
    }

    pub fn supports_construction(self) -> bool {
        self != Terrain::Water
    }

    /// One-letter tag used by the map dump format.
    pub fn tag(self) -> char {
        match self {
            Terrain::Plain => 'P',
            Terrain::Forest => 'F',
            Terrain::Hill => 'H',
            Terrain::Mountain => 'M',
            Terrain::Water => 'W',
            Terrain::City => 'C',
        }
    }

    pub fn from_tag(tag: char) -> Option<Terrain> {
        Terrain::ALL.into_iter().find(|t| t.tag() == tag)
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }
}

/// Dense terrain grid plus per-tile ownership and fortification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerrainGrid {
    size: GridSize,
    tiles: Vec<Terrain>,
    owners: Vec<Option<Faction>>,
    fortification: Vec<u8>,
}

impl TerrainGrid {
    pub fn filled(size: GridSize, terrain: Terrain) -> Self {
        let n = size.cell_count();
        Self {
            size,
            tiles: vec![terrain; n],
            owners: vec![None; n],
            fortification: vec![0; n],
        }
    }

    pub fn from_tiles(size: GridSize, tiles: Vec<Terrain>) -> Result<Self, WorldError> {
        if tiles.len() != size.cell_count() {
            return Err(WorldError::MapFormat(format!(
                "expected {} tiles, got {}",
                size.cell_count(),
                tiles.len()
            )));
        }
        let mut grid = Self::filled(size, Terrain::Plain);
        grid.tiles = tiles;
        Ok(grid)
    }

    pub fn size(&self) -> GridSize {
        self.size
    }

    pub fn width(&self) -> i32 {
        self.size.width
    }

    pub fn height(&self) -> i32 {
        self.size.height
    }

    pub fn contains(&self, c: HexCoord) -> bool {
        self.size.contains(c)
    }

    pub fn terrain(&self, c: HexCoord) -> Terrain {
        self.tiles[self.size.index(c)]
    }

    pub fn get(&self, c: HexCoord) -> Option<Terrain> {
        self.contains(c).then(|| self.terrain(c))
    }

    pub fn set(&mut self, c: HexCoord, t: Terrain) {
        let i = self.size.index(c);
        self.tiles[i] = t;
    }

    pub fn tiles(&self) -> &[Terrain] {
        &self.tiles
    }

    pub fn owner(&self, c: HexCoord) -> Option<Faction> {
        self.owners[self.size.index(c)]
    }

    pub fn set_owner(&mut self, c: HexCoord, f: Option<Faction>) {
        let i = self.size.index(c);
        self.owners[i] = f;
    }

    pub fn fortification(&self, c: HexCoord) -> u8 {
        self.fortification[self.size.index(c)]
    }

    pub fn set_fortification(&mut self, c: HexCoord, level: u8) {
        let i = self.size.index(c);
        self.fortification[i] = level;
    }

    pub fn count(&self, t: Terrain) -> usize {
        self.tiles.iter().filter(|x| **x == t).count()
    }

    pub(crate) fn owners(&self) -> &[Option<Faction>] {
        &self.owners
    }

    pub(crate) fn fortifications(&self) -> &[u8] {
        &self.fortification
    }

    /// Map dump: `width height` header, then one line per row of
    /// space-separated terrain tags.
    pub fn dump(&self) -> String {
        self.to_string()
    }

    pub fn parse_dump(text: &str) -> Result<Self, WorldError> {
        text.parse()
    }
}

impl fmt::Display for TerrainGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.size.width, self.size.height)?;
        for row in 0..self.size.height {
            let line: Vec<String> = (0..self.size.width)
                .map(|col| self.terrain(HexCoord::new(col, row)).tag().to_string())
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for TerrainGrid {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| WorldError::MapFormat(m.to_string());
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let dims: Vec<i32> = header
            .split_whitespace()
            .map(|x| x.parse::<i32>().map_err(|_| bad("header must be `width height`")))
            .collect::<Result<_, _>>()?;
        let [width, height] = dims[..] else {
            return Err(bad("header must be `width height`"));
        };
        if width <= 0 || height <= 0 {
            return Err(bad("dimensions must be positive"));
        }
        let mut tiles = Vec::with_capacity((width * height) as usize);
        for (row, line) in lines.enumerate() {
            let tags: Vec<&str> = line.split_whitespace().collect();
            if tags.len() != width as usize {
                return Err(WorldError::MapFormat(format!("row {row} has {} tags", tags.len())));
            }
            for tag in tags {
                let mut chars = tag.chars();
                let t = match (chars.next(), chars.next()) {
                    (Some(c), None) => Terrain::from_tag(c),
                    _ => None,
                };
                tiles.push(t.ok_or_else(|| WorldError::MapFormat(format!("unknown tag `{tag}`")))?);
            }
        }
        TerrainGrid::from_tiles(GridSize::new(width, height), tiles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terrain_table() {
        let rows = [
            (Terrain::Plain, Some(1), 0.0, false),
            (Terrain::Forest, Some(2), 0.2, true),
            (Terrain::Hill, Some(2), 0.3, true),
            (Terrain::Mountain, Some(3), 0.5, true),
            (Terrain::Water, None, 0.0, false),
            (Terrain::City, Some(1), 0.4, true),
        ];
        for (t, cost, bonus, blocks) in rows {
            assert_eq!(t.move_cost(), cost);
            assert_eq!(t.defense_bonus(), bonus);
            assert_eq!(t.blocks_vision(), blocks);
        }
    }

    #[test]
    fn dump_round_trip() {
        let size = GridSize::new(3, 2);
        let grid = TerrainGrid::from_tiles(
            size,
            vec![Terrain::Plain, Terrain::Water, Terrain::City, Terrain::Hill, Terrain::Forest, Terrain::Mountain],
        )
        .unwrap();
        let text = grid.dump();
        assert_eq!(text, "3 2\nP W C\nH F M\n");
        assert_eq!(TerrainGrid::parse_dump(&text).unwrap(), grid);
    }

    #[test]
    fn dump_rejects_garbage() {
        assert!(TerrainGrid::parse_dump("2 1\nP X\n").is_err());
        assert!(TerrainGrid::parse_dump("2 2\nP P\n").is_err());
        assert!(TerrainGrid::parse_dump("two 1\nP\n").is_err());
    }
}
