//! Combat resolution.
//!
//! ```text
//! A_eff      = A_base * sigma(N_curr / N_max) * S_status * T_terrain
//! sigma(x)   = w * x + (1 - w) * x^p
//! D_eff      = defense * (1 + min(terrain_bonus + fortification_bonus, cap))
//! casualties = round(A_eff * 100 / (100 + D_eff))
//! ```
//!
//! Resolution is deterministic. The defender's terrain enters through
//! `D_eff`; `T_terrain` is kept as an explicit factor for callers that model
//! attacker-side terrain and is 1 during standard resolution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{check_alive, require, spend_ap, unit_stats};
use crate::error::{ErrorCode, Rejection};
use crate::hex::hex_distance;
use crate::scenario::{CombatRules, StatusCatalog};
use crate::world::{EntityId, StatusEffects, StatusKind, WorldState};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum CombatError {
    #[error("ratio {0} lies outside [0, 1]")]
    Domain(f64),
}

/// Critical-mass effectiveness curve.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessCurve {
    /// Weight of the linear part.
    pub weight: f64,
    /// Exponent of the polynomial part.
    pub exponent: f64,
}

impl Default for EffectivenessCurve {
    fn default() -> Self {
        Self { weight: 0.5, exponent: 2.0 }
    }
}

impl From<&CombatRules> for EffectivenessCurve {
    fn from(r: &CombatRules) -> Self {
        Self { weight: r.curve_weight, exponent: r.curve_exponent }
    }
}

impl EffectivenessCurve {
    pub fn eval(&self, x: f64) -> Result<f64, CombatError> {
        effectiveness(x, self)
    }
}

pub fn effectiveness(x: f64, curve: &EffectivenessCurve) -> Result<f64, CombatError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(CombatError::Domain(x));
    }
    let w = curve.weight;
    Ok(w * x + (1.0 - w) * x.powf(curve.exponent))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombatInputs {
    pub a_base: f64,
    /// Current over max soldier count.
    pub r_count: f64,
    pub s_status: f64,
    pub t_terrain: f64,
    pub fort_bonus: f64,
}

pub fn effective_attack(inputs: &CombatInputs, curve: &EffectivenessCurve) -> Result<f64, CombatError> {
    Ok(inputs.a_base * effectiveness(inputs.r_count, curve)? * inputs.s_status * inputs.t_terrain)
}

/// Defender bonus after stacking terrain and fortification under the cap.
pub fn defender_bonus(terrain_bonus: f64, fort_bonus: f64, cap: f64) -> f64 {
    (terrain_bonus + fort_bonus).min(cap)
}

pub fn casualties(a_eff: f64, defense: f64, bonus: f64) -> u32 {
    let d_eff = defense * (1.0 + bonus);
    (a_eff * 100.0 / (100.0 + d_eff)).round().max(0.0) as u32
}

/// Product of the status multipliers on an attacker.
pub fn status_multiplier(statuses: &StatusEffects, catalog: &StatusCatalog) -> f64 {
    statuses.0.keys().fold(1.0, |m, k| match k {
        StatusKind::MoraleBoost => m * catalog.morale_boost_multiplier,
        StatusKind::Fatigue => m * catalog.fatigue_multiplier,
        StatusKind::Confusion => m,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BattleReport {
    pub attacker_id: EntityId,
    pub defender_id: EntityId,
    /// Effective attack power delivered.
    pub damage_dealt: f64,
    /// Soldiers lost by the defender.
    pub casualties: u32,
    pub defender_count_before: u32,
    pub defender_count_after: u32,
    /// Defender terrain bonus fraction.
    pub terrain_modifier_applied: f64,
    pub fortification_bonus: f64,
    pub defender_destroyed: bool,
}

pub(crate) fn check_target(world: &WorldState, attacker: EntityId, defender: EntityId, range: u32) -> Result<(), Rejection> {
    let r = &world.registry;
    check_alive(world, defender, ErrorCode::DeadTarget)?;
    let mine = require(r.faction_of(attacker), attacker, "Faction")?;
    let theirs = require(r.faction_of(defender), defender, "Faction")?;
    if mine == theirs {
        return Err(Rejection::new(ErrorCode::FriendlyFire, format!("unit {} is friendly", defender.0)));
    }
    let a = require(r.position_of(attacker), attacker, "Position")?;
    let d = require(r.position_of(defender), defender, "Position")?;
    let dist = hex_distance(a, d);
    if dist > range {
        return Err(Rejection::new(
            ErrorCode::OutOfRange,
            format!("target at hex distance {dist}, range is {range}"),
        ));
    }
    Ok(())
}

/// Checks an attack without mutating anything.
pub fn check_attack(world: &WorldState, attacker: EntityId, defender: EntityId) -> Result<(), Rejection> {
    let range = unit_stats(world, attacker)?.attack_range;
    check_target(world, attacker, defender, range)?;
    super::check_ap(world, attacker, 1)
}

/// Strike `defender` and apply casualties. `ignore_status` drops the
/// attacker's status multipliers.
pub(crate) fn strike(world: &mut WorldState, attacker: EntityId, defender: EntityId, ignore_status: bool) -> BattleReport {
    let rules = world.rules.clone();
    let r = &world.registry;
    let stats = *r.stats.get(attacker).expect("checked");
    let ratio = r.counts.get(attacker).map_or(0.0, |c| c.0.ratio());
    let s_status = if ignore_status {
        1.0
    } else {
        r.statuses.get(attacker).map_or(1.0, |s| status_multiplier(s, &rules.statuses))
    };
    let inputs = CombatInputs {
        a_base: f64::from(stats.attack),
        r_count: ratio.clamp(0.0, 1.0),
        s_status,
        t_terrain: 1.0,
        fort_bonus: 0.0,
    };
    let curve = EffectivenessCurve::from(&rules.combat);
    let a_eff = effective_attack(&inputs, &curve).expect("ratio is clamped");

    let at = r.position_of(defender).expect("checked");
    let terrain_bonus = world.terrain.terrain(at).defense_bonus();
    let fort_bonus = f64::from(world.terrain.fortification(at)) * rules.combat.fortification_step;
    let bonus = defender_bonus(terrain_bonus, fort_bonus, rules.combat.defense_cap);
    let defense = f64::from(r.stats.get(defender).expect("checked").defense);
    let lost = casualties(a_eff, defense, bonus);

    let count = world.registry.counts.get_mut(defender).expect("checked");
    let before = count.0.current;
    count.0.current = before.saturating_sub(lost);
    let after = count.0.current;
    let destroyed = after == 0;
    if destroyed {
        world.registry.despawn(defender);
        if let Some(s) = world.registry.statuses.get_mut(attacker) {
            s.apply(StatusKind::MoraleBoost, Some(rules.statuses.morale_boost_turns));
        }
    }
    BattleReport {
        attacker_id: attacker,
        defender_id: defender,
        damage_dealt: a_eff,
        casualties: lost,
        defender_count_before: before,
        defender_count_after: after,
        terrain_modifier_applied: terrain_bonus,
        fortification_bonus: fort_bonus,
        defender_destroyed: destroyed,
    }
}

/// Resolve a standard attack. Costs one action point in turn-based play.
pub fn resolve_combat(world: &mut WorldState, attacker: EntityId, defender: EntityId) -> Result<BattleReport, Rejection> {
    check_attack(world, attacker, defender)?;
    spend_ap(world, attacker, 1)?;
    if let Some(a) = world.registry.activity.get_mut(attacker) {
        a.attacks += 1;
    }
    Ok(strike(world, attacker, defender, false))
}
