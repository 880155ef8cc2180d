//! Scenario configuration.
//!
//! A scenario is a TOML document. Every table and key is optional; missing
//! values fall back to the built-in defaults. Unknown keys are rejected.
//!
//! ```toml
//! seed = 42
//!
//! [map]
//! width = 15
//! height = 15
//! water_fraction = 0.10
//!
//! [horizon]
//! turns = 100
//! real_time_ms = 300000
//!
//! [units.cavalry]
//! attack = 85
//! defense = 40
//! ```
//!
//! See `scenarios/standard.toml` for the full key set.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Faction, SkillName, UnitType};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub factions: [Faction; 2],
    pub map: MapParams,
    pub horizon: Horizon,
    pub units: UnitTable,
    pub army: Vec<UnitType>,
    pub combat: CombatRules,
    pub economy: Economy,
    pub statuses: StatusCatalog,
    pub skills: SkillCatalog,
    pub real_time: RealTimeRules,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 0,
            factions: [Faction::Wei, Faction::Shu],
            map: MapParams::default(),
            horizon: Horizon::default(),
            units: UnitTable::default(),
            army: vec![UnitType::Infantry, UnitType::Cavalry, UnitType::Archer],
            combat: CombatRules::default(),
            economy: Economy::default(),
            statuses: StatusCatalog::default(),
            skills: SkillCatalog::default(),
            real_time: RealTimeRules::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if self.factions[0] == self.factions[1] {
            return bad("the two factions must differ".into());
        }
        if self.map.width < 5 || self.map.height < 5 {
            return bad(format!("map must be at least 5x5, got {}x{}", self.map.width, self.map.height));
        }
        if self.army.is_empty() {
            return bad("army must contain at least one unit".into());
        }
        if !(0.0..=1.0).contains(&self.combat.curve_weight) || self.combat.curve_exponent < 1.0 {
            return bad("curve_weight must lie in [0,1] and curve_exponent must be >= 1".into());
        }
        if self.horizon.turns == 0 || self.horizon.real_time_ms == 0 {
            return bad("horizons must be positive".into());
        }
        if self.real_time.tick_ms == 0 || self.real_time.virtual_turn_ms == 0 {
            return bad("tick_ms and virtual_turn_ms must be positive".into());
        }
        for t in UnitType::ALL {
            let u = self.units.get(t);
            if u.count == 0 || u.attack_range == 0 {
                return bad(format!("{t:?}: count and attack_range must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapParams {
    pub width: i32,
    pub height: i32,
    /// Share of tiles below the water line.
    pub water_fraction: f64,
    /// Share of tiles in the rough band (forest or hill).
    pub rough_fraction: f64,
    /// Share of tiles above the mountain line.
    pub mountain_fraction: f64,
    /// Noise feature size in cells.
    pub noise_scale: f64,
    pub smoothing_passes: u32,
    pub city_count: usize,
    /// Minimum hex distance between two cities.
    pub city_spacing: u32,
    /// Radius of each faction's start zone around its anchor.
    pub start_zone_radius: u32,
    /// Reseeded attempts before falling back to bridging.
    pub max_attempts: u32,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            width: 15,
            height: 15,
            water_fraction: 0.10,
            rough_fraction: 0.30,
            mountain_fraction: 0.07,
            noise_scale: 5.0,
            smoothing_passes: 2,
            city_count: 3,
            city_spacing: 3,
            start_zone_radius: 2,
            max_attempts: 8,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Horizon {
    /// H, in turns (turn-based mode).
    pub turns: u32,
    /// T_max, in simulated milliseconds (real-time mode).
    pub real_time_ms: u64,
}

impl Default for Horizon {
    fn default() -> Self {
        Self { turns: 100, real_time_ms: 300_000 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitTemplate {
    pub attack: u32,
    pub defense: u32,
    pub attack_range: u32,
    pub vision_range: u32,
    pub count: u32,
    pub movement: u32,
    pub action_points: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitTable {
    pub infantry: UnitTemplate,
    pub cavalry: UnitTemplate,
    pub archer: UnitTemplate,
}

impl Default for UnitTable {
    fn default() -> Self {
        let base = UnitTemplate {
            attack: 0,
            defense: 0,
            attack_range: 1,
            vision_range: 3,
            count: 100,
            movement: 3,
            action_points: 2,
        };
        Self {
            infantry: UnitTemplate { attack: 60, defense: 70, ..base },
            cavalry: UnitTemplate { attack: 85, defense: 40, vision_range: 4, movement: 5, ..base },
            archer: UnitTemplate { attack: 70, defense: 30, attack_range: 2, ..base },
        }
    }
}

impl UnitTable {
    pub fn get(&self, t: UnitType) -> &UnitTemplate {
        match t {
            UnitType::Infantry => &self.infantry,
            UnitType::Cavalry => &self.cavalry,
            UnitType::Archer => &self.archer,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombatRules {
    /// Blend weight of the linear part of the effectiveness curve.
    pub curve_weight: f64,
    /// Exponent of the polynomial part.
    pub curve_exponent: f64,
    /// Cap on terrain + fortification defender bonus.
    pub defense_cap: f64,
    /// Defender bonus per fortification level.
    pub fortification_step: f64,
    pub max_fortification: u8,
}

impl Default for CombatRules {
    fn default() -> Self {
        Self {
            curve_weight: 0.5,
            curve_exponent: 2.0,
            defense_cap: 0.8,
            fortification_step: 0.2,
            max_fortification: 3,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Economy {
    /// Faction-wide construction points per match.
    pub construction_points: u32,
    /// Skill points per unit per match.
    pub skill_points: u32,
    pub starting_manpower: u32,
    pub starting_supplies: u32,
    /// Credited per owned city at the start of the owner's turn.
    pub city_manpower: u32,
    pub city_supplies: u32,
}

impl Default for Economy {
    fn default() -> Self {
        Self {
            construction_points: 5,
            skill_points: 2,
            starting_manpower: 1000,
            starting_supplies: 500,
            city_manpower: 10,
            city_supplies: 5,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatusCatalog {
    pub morale_boost_multiplier: f64,
    pub morale_boost_turns: u32,
    pub confusion_turns: u32,
    pub fatigue_multiplier: f64,
}

impl Default for StatusCatalog {
    fn default() -> Self {
        Self {
            morale_boost_multiplier: 1.2,
            morale_boost_turns: 2,
            confusion_turns: 1,
            fatigue_multiplier: 0.8,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkillSpec {
    pub skill_points: u32,
    pub action_points: u32,
    pub cooldown_turns: u32,
    pub range: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkillCatalog {
    pub fire_attack: SkillSpec,
    pub ambush: SkillSpec,
}

impl Default for SkillCatalog {
    fn default() -> Self {
        Self {
            fire_attack: SkillSpec { skill_points: 1, action_points: 1, cooldown_turns: 3, range: 2 },
            ambush: SkillSpec { skill_points: 1, action_points: 1, cooldown_turns: 3, range: 1 },
        }
    }
}

impl SkillCatalog {
    pub fn get(&self, k: SkillName) -> &SkillSpec {
        match k {
            SkillName::FireAttack => &self.fire_attack,
            SkillName::Ambush => &self.ambush,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RealTimeRules {
    /// Lock seconds per movement point of path cost.
    pub c_move: f64,
    pub c_attack: f64,
    pub c_support: f64,
    pub tick_ms: u64,
    pub mp_regen_per_s: f64,
    /// Simulated time after which statuses, cooldowns and income tick.
    pub virtual_turn_ms: u64,
}

impl Default for RealTimeRules {
    fn default() -> Self {
        Self {
            c_move: 0.5,
            c_attack: 1.0,
            c_support: 0.5,
            tick_ms: 100,
            mp_regen_per_s: 1.0,
            virtual_turn_ms: 10_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_standard_file_is_the_default() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/standard.toml");
        assert_eq!(Scenario::load(path).unwrap(), Scenario::default());
    }

    #[test]
    fn defaults_carry_documented_stats() {
        let s = Scenario::default();
        assert_eq!((s.units.cavalry.attack, s.units.cavalry.defense), (85, 40));
        assert_eq!(s.units.cavalry.movement, 5);
        assert_eq!(s.units.infantry.action_points, 2);
        assert_eq!(s.units.archer.attack_range, 2);
        assert_eq!(s.horizon, Horizon { turns: 100, real_time_ms: 300_000 });
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let s = Scenario::from_toml("seed = 9\n[units.archer]\nattack = 50\ndefense = 30\nattack_range = 3\nvision_range = 3\ncount = 80\nmovement = 3\naction_points = 2\n").unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.units.archer.attack_range, 3);
        assert_eq!(s.units.cavalry.attack, 85);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Scenario::from_toml("sed = 9\n").is_err());
        assert!(Scenario::from_toml("[map]\nwidht = 9\n").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let s = Scenario::default();
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn validation_rejects_bad_params() {
        assert!(Scenario::from_toml("factions = [\"wei\", \"wei\"]\n").is_err());
        assert!(Scenario::from_toml("[map]\nwidth = 3\n").is_err());
    }
}
