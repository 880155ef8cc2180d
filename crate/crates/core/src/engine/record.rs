//! Match records: a header line, the replay log, a footer line.
//!
//! Replaying re-executes every logged request against a freshly built
//! world, advancing the simulated clock in ticks to each record's time, and
//! requires the regenerated log, outcome and final digest to equal the
//! recorded ones.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::runner::{MatchConfig, MatchError};
use crate::action::{ActionKind, ActionResult, AgentInfo, Engine, LogRecord, ReplayLog, Stamp, TelemetryRecord};
use crate::rules::Outcome;
use crate::scenario::Scenario;
use crate::world::{Faction, Mode};

pub const RECORD_FORMAT: &str = "star-match/1";

/// Per-agent call quality over one match.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GameStats {
    pub total_calls: u64,
    pub ok_calls: u64,
    pub failed_calls: u64,
    pub spatial_failed: u64,
    /// Failed calls per call.
    pub tce: f64,
    /// Spatial failures per failure; 0 without failures.
    pub sae: f64,
    /// Successful unit-control actions.
    pub actions_per_game: u64,
    /// Mean of receipt minus send time, over requests that carried a send time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_latency_ms: Option<f64>,
}

impl GameStats {
    pub fn from_counts(total: u64, failed: u64, spatial_failed: u64, actions: u64) -> Self {
        let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        Self {
            total_calls: total,
            ok_calls: total - failed,
            failed_calls: failed,
            spatial_failed,
            tce: ratio(failed, total),
            sae: ratio(spatial_failed, failed),
            actions_per_game: actions,
            mean_latency_ms: None,
        }
    }

    /// Stats of `faction` from its logged, agent-issued requests.
    pub fn from_log(records: &[LogRecord], faction: Faction) -> Self {
        let (mut total, mut failed, mut spatial, mut actions) = (0, 0, 0, 0);
        let mut latencies = Vec::new();
        for r in records {
            let LogRecord::Action { faction: f, forced: false, request, result, sent_at, received_at, .. } = r else {
                continue;
            };
            if *f != faction {
                continue;
            }
            total += 1;
            if result.ok {
                if ActionKind::parse(&request.action).is_some_and(ActionKind::is_unit_control) {
                    actions += 1;
                }
            } else {
                failed += 1;
                spatial += u64::from(result.spatial);
            }
            if let Some(s) = sent_at {
                latencies.push(received_at.saturating_sub(*s) as f64);
            }
        }
        let mut stats = Self::from_counts(total, failed, spatial, actions);
        if !latencies.is_empty() {
            stats.mean_latency_ms = Some(latencies.iter().sum::<f64>() / latencies.len() as f64);
        }
        stats
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchHeader {
    pub format: String,
    pub mode: Mode,
    pub seed: u64,
    pub turn_query_cap: u32,
    pub scenario: Scenario,
    /// Agent label per faction.
    pub agents: BTreeMap<Faction, String>,
}

impl MatchHeader {
    pub fn new(config: &MatchConfig, agents: BTreeMap<Faction, String>) -> Self {
        Self {
            format: RECORD_FORMAT.to_string(),
            mode: config.mode,
            seed: config.seed,
            turn_query_cap: config.turn_query_cap,
            scenario: config.seeded_scenario(),
            agents,
        }
    }

    pub fn config(&self) -> MatchConfig {
        MatchConfig {
            mode: self.mode,
            seed: self.seed,
            scenario: self.scenario.clone(),
            turn_query_cap: self.turn_query_cap,
            turn_budget_ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchFooter {
    pub outcome: Outcome,
    pub final_digest: String,
    pub final_clock_ms: u64,
    pub turn_number: u32,
    pub stats: BTreeMap<Faction, GameStats>,
    #[serde(default)]
    pub strategic_quality: BTreeMap<Faction, f64>,
    #[serde(default)]
    pub agent_info: BTreeMap<Faction, AgentInfo>,
    #[serde(default)]
    pub telemetry: Vec<TelemetryRecord>,
}

// Lives only for one line of I/O, so the variant size gap is harmless.
#[allow(clippy::large_enum_variant)]
#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Bookend {
    Header(MatchHeader),
    Footer(MatchFooter),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchRecord {
    pub header: MatchHeader,
    pub log: ReplayLog,
    pub footer: MatchFooter,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record has no {0} line")]
    Missing(&'static str),
}

impl MatchRecord {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer(&mut out, &Bookend::Header(self.header.clone()))?;
        out.write_all(b"\n")?;
        self.log.write_jsonl(&mut out)?;
        serde_json::to_writer(&mut out, &Bookend::Footer(self.footer.clone()))?;
        out.write_all(b"\n")
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// SHA-256 of the JSONL serialization.
    pub fn sha256(&self) -> String {
        Sha256::digest(self.to_jsonl().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, RecordError> {
        let (mut header, mut footer, mut records) = (None, None, Vec::new());
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |e: serde_json::Error| RecordError::Parse { line: i + 1, message: e.to_string() };
            let v: Value = serde_json::from_str(&line).map_err(parse_err)?;
            match v.get("record").and_then(Value::as_str) {
                Some("header") | Some("footer") => match serde_json::from_value(v).map_err(parse_err)? {
                    Bookend::Header(h) => header = Some(h),
                    Bookend::Footer(f) => footer = Some(f),
                },
                _ => records.push(serde_json::from_value::<LogRecord>(v).map_err(parse_err)?),
            }
        }
        let log = ReplayLog::from_records(records);
        Ok(Self {
            header: header.ok_or(RecordError::Missing("header"))?,
            log,
            footer: footer.ok_or(RecordError::Missing("footer"))?,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, RecordError> {
        let f = std::fs::File::open(path)?;
        Self::read_jsonl(io::BufReader::new(f))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> io::Result<()> {
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(&mut f)?;
        f.flush()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Setup(#[from] MatchError),
    #[error("record format `{0}` is not supported")]
    Format(String),
    #[error("mismatch at {at}: {detail}")]
    Mismatch { at: String, detail: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub records: usize,
    pub checkpoints: usize,
    pub final_digest: String,
}

fn mismatch<T>(at: impl Into<String>, detail: impl Into<String>) -> Result<T, VerifyError> {
    Err(VerifyError::Mismatch { at: at.into(), detail: detail.into() })
}

fn advance_to(engine: &mut Engine, clock_ms: u64, tick_ms: u64) -> Result<(), VerifyError> {
    while engine.world.clock_ms < clock_ms {
        if engine.advance_clock(tick_ms).is_err() {
            return mismatch(format!("clock {}", engine.world.clock_ms), "match ended before the recorded time");
        }
    }
    Ok(())
}

/// Re-execute `record` and compare everything it claims.
pub fn verify(record: &MatchRecord) -> Result<VerifyReport, VerifyError> {
    let h = &record.header;
    if h.format != RECORD_FORMAT {
        return Err(VerifyError::Format(h.format.clone()));
    }
    let world = h.config().build_world().map_err(MatchError::from)?;
    let mut engine = Engine::new(world);
    let tick = h.scenario.real_time.tick_ms;
    for rec in record.log.records() {
        if h.mode == Mode::RealTime {
            advance_to(&mut engine, rec.clock_ms(), tick)?;
        }
        match rec {
            LogRecord::Action { faction, sent_at, received_at, forced, request, .. } => {
                let stamp = Stamp { sent_at: *sent_at, received_at: *received_at };
                engine.replay_request(*faction, request, stamp, *forced);
            }
            LogRecord::Forfeit { faction, .. } => {
                engine.forfeit(*faction);
            }
            LogRecord::Event { .. } => {}
        }
    }
    if h.mode == Mode::RealTime {
        advance_to(&mut engine, record.footer.final_clock_ms, tick)?;
    }

    let replayed = engine.log().records();
    let recorded = record.log.records();
    for (i, (a, b)) in replayed.iter().zip(recorded).enumerate() {
        if a != b {
            let show = |r: &LogRecord| serde_json::to_string(r).unwrap_or_default();
            return mismatch(format!("record {i}"), format!("replayed {} but recorded {}", show(a), show(b)));
        }
    }
    if replayed.len() != recorded.len() {
        return mismatch("log length", format!("replayed {} records, recorded {}", replayed.len(), recorded.len()));
    }
    let f = &record.footer;
    let Some(outcome) = engine.outcome() else {
        return mismatch("outcome", "replay did not finish the match");
    };
    if *outcome != f.outcome {
        return mismatch("outcome", format!("replayed {outcome:?}, recorded {:?}", f.outcome));
    }
    let digest = engine.digest();
    if digest != f.final_digest {
        return mismatch("final digest", format!("replayed {digest}, recorded {}", f.final_digest));
    }
    for (faction, stats) in &f.stats {
        let again = GameStats::from_log(replayed, *faction);
        if again != *stats {
            return mismatch(format!("stats of {faction}"), format!("replayed {again:?}, recorded {stats:?}"));
        }
    }
    Ok(VerifyReport {
        records: replayed.len(),
        checkpoints: replayed.iter().filter(|r| r.digest_before().is_some()).count(),
        final_digest: digest,
    })
}

/// The result of a logged action, for tamper fixtures and audits.
pub fn result_of(record: &LogRecord) -> Option<&ActionResult> {
    match record {
        LogRecord::Action { result, .. } => Some(result),
        _ => None,
    }
}
