//! Real-time action locks.
//!
//! In real-time play a unit that acts is busy for a duration proportional
//! to the action's complexity: moves scale with path cost, attacks and
//! support actions take fixed times, information actions are free.

use std::time::Duration;

use crate::action::ActionKind;
use crate::scenario::RealTimeRules;

/// Lock applied after a successful `kind` whose path cost was `path_cost`
/// (0 for anything but a move).
pub fn action_lock_duration(kind: ActionKind, path_cost: u32, rules: &RealTimeRules) -> Duration {
    let secs = match kind {
        ActionKind::Move => rules.c_move * f64::from(path_cost),
        ActionKind::Attack => rules.c_attack,
        ActionKind::Rest | ActionKind::Occupy | ActionKind::Fortify | ActionKind::Skill => rules.c_support,
        _ => 0.0,
    };
    Duration::from_millis((secs * 1000.0).round().max(0.0) as u64)
}
