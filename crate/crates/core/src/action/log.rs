//! Append-only replay log.
//!
//! Every request with its result, every event and every forfeit becomes one
//! record. Every `checkpoint_every`-th record carries the world digest taken
//! before it was applied.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::executor::{ActionResult, EventNotice};
use super::request::ActionRequest;
use crate::world::Faction;

pub const CHECKPOINT_EVERY: u64 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Action {
        index: u64,
        clock_ms: u64,
        faction: Faction,
        /// Sender timestamp, when the request came over the wire.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sent_at: Option<u64>,
        received_at: u64,
        /// Issued by the engine on the agent's behalf.
        #[serde(default)]
        forced: bool,
        request: ActionRequest,
        result: ActionResult,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digest_before: Option<String>,
    },
    Event {
        index: u64,
        clock_ms: u64,
        event: EventNotice,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digest_before: Option<String>,
    },
    Forfeit {
        index: u64,
        clock_ms: u64,
        faction: Faction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digest_before: Option<String>,
    },
}

impl LogRecord {
    pub fn index(&self) -> u64 {
        match self {
            LogRecord::Action { index, .. } | LogRecord::Event { index, .. } | LogRecord::Forfeit { index, .. } => *index,
        }
    }

    pub fn clock_ms(&self) -> u64 {
        match self {
            LogRecord::Action { clock_ms, .. } | LogRecord::Event { clock_ms, .. } | LogRecord::Forfeit { clock_ms, .. } => {
                *clock_ms
            }
        }
    }

    pub fn digest_before(&self) -> Option<&str> {
        match self {
            LogRecord::Action { digest_before, .. }
            | LogRecord::Event { digest_before, .. }
            | LogRecord::Forfeit { digest_before, .. } => digest_before.as_deref(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayLog {
    records: Vec<LogRecord>,
}

impl ReplayLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// A log from previously written records, in order.
    pub fn from_records(records: Vec<LogRecord>) -> Self {
        Self { records }
    }

    pub fn next_index(&self) -> u64 {
        self.records.len() as u64
    }

    /// Whether the next record is a checkpoint.
    pub fn next_is_checkpoint(&self) -> bool {
        self.next_index().is_multiple_of(CHECKPOINT_EVERY)
    }

    pub fn push(&mut self, record: LogRecord) {
        debug_assert_eq!(record.index(), self.next_index());
        self.records.push(record);
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Self> {
        let mut records = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(io::Error::other)?);
        }
        Ok(Self { records })
    }
}
