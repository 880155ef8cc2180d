//! Minimal synchronous agent that plays a [`Policy`] over the wire.
//!
//! Each decision is one round trip for a tactical observation and one for
//! the resulting batch. In turn-based play the agent acts only between its
//! own `turn_start` and a successful `end_turn`, and ends the turn itself
//! after `turn_query_cap` decisions.

use std::collections::BTreeMap;
use std::net::TcpStream;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

use super::envelope::{decode_envelope, encode_envelope, Envelope, MsgType, ProtocolError};
use super::session::{ActionRequestPayload, ActionResultPayload, ErrorPayload, RegisterAck, SERVER_ID};
use crate::action::{ActionKind, ActionRequest, ObservationDoc};
use crate::engine::Policy;
use crate::error::ErrorCode;
use crate::world::{Faction, Mode};

#[derive(Clone, Debug)]
pub struct ClientOptions {
    pub turn_query_cap: u32,
    /// Pause between decisions in real-time play.
    pub pace: Duration,
    /// Give up after this long.
    pub limit: Duration,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self { turn_query_cap: 10, pace: Duration::from_millis(100), limit: Duration::from_secs(600) }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClientReport {
    /// Error codes seen in ERROR envelopes and failed results.
    pub errors: BTreeMap<ErrorCode, u32>,
    pub decisions: u32,
    /// `game_end` detail.
    pub outcome: Option<Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(#[from] tungstenite::Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("registration refused: {0:?}")]
    Refused(ErrorPayload),
    #[error("connection closed before the match ended")]
    Closed,
    #[error("no result within {0:?}")]
    Timeout(Duration),
}

#[derive(PartialEq)]
enum Waiting {
    Nothing,
    Observation,
    Batch { ends_turn: bool },
}

struct Wire {
    ws: WebSocket<MaybeTlsStream<TcpStream>>,
    agent_id: String,
    seq: u64,
}

fn now_ms() -> u64 {
    super::server::now_ms()
}

impl Wire {
    fn send(&mut self, t: MsgType, payload: Value) -> Result<(), ClientError> {
        self.seq += 1;
        let env = Envelope::new(t, self.agent_id.clone(), SERVER_ID, now_ms(), self.seq, payload);
        self.ws.send(Message::text(encode_envelope(&env)?))?;
        Ok(())
    }

    fn actions(&mut self, actions: Vec<ActionRequest>) -> Result<(), ClientError> {
        self.send(MsgType::ActionRequest, json!(ActionRequestPayload { actions }))
    }

    fn recv(&mut self) -> Result<Option<Envelope>, ClientError> {
        match self.ws.read() {
            Ok(Message::Text(t)) => Ok(Some(decode_envelope(t.as_bytes())?)),
            Ok(Message::Close(_)) => Err(ClientError::Closed),
            Ok(_) => Ok(None),
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) =>
            {
                Ok(None)
            }
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => Err(ClientError::Closed),
            Err(e) => Err(e.into()),
        }
    }
}

fn end_turn(f: Faction) -> ActionRequest {
    ActionRequest::new(ActionKind::EndTurn.as_str(), json!({ "faction": f }))
}

/// Connect to `url` (`ws://host:port`), register as `faction` and play until
/// the match ends.
pub fn play(url: &str, faction: Faction, policy: &mut dyn Policy, opts: &ClientOptions) -> Result<ClientReport, ClientError> {
    let (ws, _) = tungstenite::connect(url)?;
    if let MaybeTlsStream::Plain(s) = ws.get_ref() {
        s.set_read_timeout(Some(Duration::from_millis(5))).map_err(tungstenite::Error::Io)?;
    }
    let mut wire = Wire { ws, agent_id: policy.label(), seq: 0 };
    wire.send(MsgType::Register, json!({ "faction": faction, "agent_id": wire.agent_id, "model_id": policy.label() }))?;

    let started = Instant::now();
    let mut report = ClientReport::default();
    let mut mode = None;
    let mut my_turn = false;
    let mut queries = 0;
    let mut waiting = Waiting::Nothing;
    let mut next_decision = Instant::now();
    loop {
        if started.elapsed() > opts.limit {
            return Err(ClientError::Timeout(opts.limit));
        }
        let ready = mode.is_some() && my_turn && waiting == Waiting::Nothing && Instant::now() >= next_decision;
        if ready {
            wire.actions(vec![ActionRequest::new(
                ActionKind::Observation.as_str(),
                json!({ "observation_level": "tactical" }),
            )])?;
            waiting = Waiting::Observation;
        }
        let Some(env) = wire.recv()? else { continue };
        match env.msg_type {
            MsgType::RegisterAck => {
                let ack: RegisterAck = env.payload_as()?;
                mode = Some(ack.mode);
                my_turn = ack.mode == Mode::RealTime || ack.active_faction == Some(faction);
            }
            MsgType::Ping => wire.send(MsgType::Ping, env.payload)?,
            MsgType::Error => {
                let e: ErrorPayload = env.payload_as()?;
                if mode.is_none() {
                    return Err(ClientError::Refused(e));
                }
                *report.errors.entry(e.code).or_default() += 1;
                waiting = Waiting::Nothing;
            }
            MsgType::Event => match env.payload["event"].as_str() {
                Some("turn_start") => {
                    my_turn = env.payload["detail"]["faction"] == json!(faction);
                    queries = 0;
                }
                Some("game_end") => {
                    report.outcome = Some(env.payload["detail"].clone());
                    let _ = wire.ws.close(None);
                    let _ = wire.ws.flush();
                    return Ok(report);
                }
                _ => {}
            },
            MsgType::ActionResult => {
                let r: ActionResultPayload = env.payload_as()?;
                for failed in r.results.iter().filter(|r| !r.ok) {
                    *report.errors.entry(failed.error_code.unwrap_or(ErrorCode::SchemaViolation)).or_default() += 1;
                }
                let turn_based = mode == Some(Mode::TurnBased);
                match std::mem::replace(&mut waiting, Waiting::Nothing) {
                    Waiting::Observation => {
                        let Some(obs) = r.results.first().filter(|r| r.ok) else { continue };
                        let obs: ObservationDoc = serde_json::from_value(obs.detail.clone())
                            .map_err(|e| ProtocolError::SchemaViolation(e.to_string()))?;
                        let mut batch = policy.decide(&obs);
                        report.decisions += 1;
                        queries += 1;
                        if turn_based && queries > opts.turn_query_cap {
                            batch = vec![end_turn(faction)];
                        } else if turn_based && (batch.is_empty() || queries == opts.turn_query_cap)
                            && !batch.iter().any(|a| a.action == ActionKind::EndTurn.as_str()) {
                                batch.push(end_turn(faction));
                            }
                        if batch.is_empty() {
                            next_decision = Instant::now() + opts.pace;
                            continue;
                        }
                        let ends_turn = batch.iter().any(|a| a.action == ActionKind::EndTurn.as_str());
                        wire.actions(batch)?;
                        waiting = Waiting::Batch { ends_turn };
                    }
                    Waiting::Batch { ends_turn } => {
                        if ends_turn && r.complete && turn_based {
                            my_turn = false;
                        }
                        if !turn_based {
                            next_decision = Instant::now() + opts.pace;
                        }
                    }
                    Waiting::Nothing => {}
                }
            }
            _ => {}
        }
    }
}
