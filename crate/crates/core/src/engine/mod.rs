//! Match orchestration: loops, action locks, records and replay.

pub mod lock;
pub mod record;
pub mod runner;
pub mod tournament;

pub use lock::action_lock_duration;
pub use record::{verify, GameStats, MatchFooter, MatchHeader, MatchRecord, RecordError, VerifyError, VerifyReport};
pub use runner::{run_match, MatchConfig, MatchError, Policy};
pub use tournament::{run_tournament, Fixture, TournamentConfig, TournamentError};
