//! The action surface agents use: requests, observations, execution, logs.

pub mod executor;
pub mod log;
pub mod observe;
pub mod request;

pub use executor::{
    ActionResult, AgentInfo, CallCounters, Engine, EventKind, EventNotice, FactionStanding, Stamp, TelemetryKind,
    TelemetryRecord,
};
pub use log::{LogRecord, ReplayLog, CHECKPOINT_EVERY};
pub use observe::{build_observation, visible_cells, CountEstimate, ObservationDoc, ObservationLevel};
pub use request::{parse_action, Action, ActionKind, ActionRequest, ActionSpec, ParamSpec, TargetRef, CATALOG};
