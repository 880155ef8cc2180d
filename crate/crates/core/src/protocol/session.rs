//! Session layer: registration, sequencing, batching, event fan-out and
//! heartbeats, independent of the transport.
//!
//! The hub owns the engine and is the single writer. Every inbound frame is
//! handled to completion before the next, and every outbound envelope is
//! returned to the caller for delivery in order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::envelope::{decode_envelope, Envelope, MsgType, ProtocolError};
use crate::action::{
    ActionKind, ActionRequest, ActionResult, Engine, EventKind, EventNotice, ObservationLevel, Stamp,
};
use crate::error::ErrorCode;
use crate::world::{Faction, Mode};

pub type ConnId = u64;

pub const SERVER_ID: &str = "server";
/// Interval between heartbeat rounds.
pub const HEARTBEAT_MS: u64 = 10_000;
/// Unanswered heartbeats after which a session is dropped.
pub const MAX_MISSED_HEARTBEATS: u32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterPayload {
    pub faction: Faction,
    pub agent_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterAck {
    pub faction: Faction,
    pub agent_id: String,
    pub mode: Mode,
    pub turn_number: u32,
    pub active_faction: Option<Faction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRequestPayload {
    pub actions: Vec<ActionRequest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionResultPayload {
    pub results: Vec<ActionResult>,
    /// False when the batch stopped at a failure.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
    pub spatial: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PingPayload {
    pub nonce: u64,
}

/// A registered agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSession {
    pub agent_id: String,
    pub faction: Faction,
    pub model_id: Option<String>,
    pub connected_at: u64,
}

#[derive(Debug)]
struct Conn {
    connected_at: u64,
    session: Option<AgentSession>,
    last_seq: Option<u64>,
    out_seq: u64,
    missed: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outbound {
    Send(ConnId, Envelope),
    /// Drop the connection after flushing what precedes it.
    Close(ConnId),
}

pub struct Hub {
    engine: Engine,
    conns: BTreeMap<ConnId, Conn>,
    seats: BTreeMap<Faction, ConnId>,
    labels: BTreeMap<Faction, String>,
    next_heartbeat: Option<u64>,
    nonce: u64,
    /// Wall time at which the real-time clock started.
    started_at: Option<u64>,
    out: Vec<Outbound>,
}

fn rejection(code: ErrorCode, message: impl Into<String>) -> ErrorPayload {
    ErrorPayload { code, message: message.into(), spatial: false }
}

fn protocol_error(e: &ProtocolError) -> ErrorPayload {
    rejection(e.code(), e.to_string())
}

impl Hub {
    pub fn new(engine: Engine) -> Self {
        Self {
            engine,
            conns: BTreeMap::new(),
            seats: BTreeMap::new(),
            labels: BTreeMap::new(),
            next_heartbeat: None,
            nonce: 0,
            started_at: None,
            out: Vec::new(),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn into_engine(self) -> Engine {
        self.engine
    }

    pub fn is_over(&self) -> bool {
        self.engine.is_over()
    }

    /// Agent id last registered for each faction.
    pub fn labels(&self) -> &BTreeMap<Faction, String> {
        &self.labels
    }

    pub fn session(&self, conn: ConnId) -> Option<&AgentSession> {
        self.conns.get(&conn).and_then(|c| c.session.as_ref())
    }

    /// True while a started match waits for a seat to be filled again.
    pub fn paused(&self) -> bool {
        self.started_at.is_some() && self.seats.len() < 2 && !self.is_over()
    }

    fn send(&mut self, conn: ConnId, msg_type: MsgType, payload: Value, now: u64) {
        let Some(c) = self.conns.get_mut(&conn) else { return };
        c.out_seq += 1;
        let receiver = c.session.as_ref().map_or_else(|| format!("conn-{conn}"), |s| s.agent_id.clone());
        let env = Envelope::new(msg_type, SERVER_ID, receiver, now, c.out_seq, payload);
        self.out.push(Outbound::Send(conn, env));
    }

    fn send_error(&mut self, conn: ConnId, e: ErrorPayload, now: u64) {
        self.send(conn, MsgType::Error, json!(e), now);
    }

    fn take(&mut self) -> Vec<Outbound> {
        std::mem::take(&mut self.out)
    }

    pub fn connect(&mut self, conn: ConnId, now: u64) {
        self.conns.insert(conn, Conn { connected_at: now, session: None, last_seq: None, out_seq: 0, missed: 0 });
    }

    /// Drop a connection. A seated faction forfeits in real-time once the
    /// match has started; in turn-based play the seat is freed and the
    /// match waits.
    pub fn disconnect(&mut self, conn: ConnId, now: u64) -> Vec<Outbound> {
        if let Some(c) = self.conns.remove(&conn) {
            if let Some(s) = c.session {
                self.seats.remove(&s.faction);
                if self.engine.world.mode == Mode::RealTime && self.started_at.is_some() {
                    self.engine.forfeit(s.faction);
                }
            }
        }
        self.publish(now);
        self.take()
    }

    pub fn receive(&mut self, conn: ConnId, bytes: &[u8], now: u64) -> Vec<Outbound> {
        if !self.conns.contains_key(&conn) {
            self.connect(conn, now);
        }
        match decode_envelope(bytes) {
            Err(e) => self.send_error(conn, protocol_error(&e), now),
            Ok(env) => self.dispatch(conn, env, now),
        }
        self.publish(now);
        self.take()
    }

    fn dispatch(&mut self, conn: ConnId, env: Envelope, now: u64) {
        let c = self.conns.get_mut(&conn).expect("connected");
        if c.last_seq.is_some_and(|last| env.seq <= last) {
            let msg = format!("seq {} does not exceed the previous {}", env.seq, c.last_seq.unwrap_or(0));
            return self.send_error(conn, rejection(ErrorCode::SchemaViolation, msg), now);
        }
        c.last_seq = Some(env.seq);
        c.missed = 0;
        if let Some(s) = &c.session {
            if env.sender != s.agent_id {
                let msg = format!("sender `{}` is not the registered agent `{}`", env.sender, s.agent_id);
                return self.send_error(conn, rejection(ErrorCode::SchemaViolation, msg), now);
            }
        }
        let stamp = Stamp { sent_at: Some(env.timestamp), received_at: now };
        let result = match env.msg_type {
            MsgType::Ping => Ok(()),
            MsgType::Register => self.register(conn, &env, stamp, now),
            t if t.is_gameplay() => match self.conns[&conn].session.as_ref().map(|s| s.faction) {
                None => Err(rejection(ErrorCode::NotRegistered, "register before sending gameplay messages")),
                Some(f) if t == MsgType::ActionRequest => self.action_request(conn, f, &env, stamp, now),
                Some(f) => self.stats_report(conn, f, &env, stamp, now),
            },
            t => Err(rejection(ErrorCode::SchemaViolation, format!("{} is sent by the server only", t.as_str()))),
        };
        if let Err(e) = result {
            self.send_error(conn, e, now);
        }
    }

    fn register(&mut self, conn: ConnId, env: &Envelope, stamp: Stamp, now: u64) -> Result<(), ErrorPayload> {
        let p: RegisterPayload = env.payload_as().map_err(|e| protocol_error(&e))?;
        if let Some(s) = &self.conns[&conn].session {
            let msg = format!("this connection already holds {}", s.faction.as_str());
            return Err(rejection(ErrorCode::SchemaViolation, msg));
        }
        if !self.engine.world.is_participant(p.faction) {
            return Err(rejection(ErrorCode::UnknownFaction, format!("{} is not in this match", p.faction.as_str())));
        }
        if self.seats.contains_key(&p.faction) {
            return Err(rejection(ErrorCode::FactionTaken, format!("{} already has an agent", p.faction.as_str())));
        }
        let req = ActionRequest::new(
            ActionKind::RegisterAgentInfo.as_str(),
            json!({ "faction": p.faction, "agent_id": p.agent_id, "model_id": p.model_id, "provider": p.provider }),
        );
        let r = self.engine.execute(p.faction, &req, stamp);
        if !r.ok {
            let code = r.error_code.unwrap_or(ErrorCode::SchemaViolation);
            return Err(ErrorPayload { code, message: r.message.unwrap_or_default(), spatial: r.spatial });
        }
        let session = AgentSession {
            agent_id: p.agent_id.clone(),
            faction: p.faction,
            model_id: p.model_id.clone(),
            connected_at: self.conns[&conn].connected_at,
        };
        self.conns.get_mut(&conn).expect("connected").session = Some(session);
        self.seats.insert(p.faction, conn);
        self.labels.insert(p.faction, p.agent_id.clone());
        let w = &self.engine.world;
        let ack = RegisterAck {
            faction: p.faction,
            agent_id: p.agent_id,
            mode: w.mode,
            turn_number: w.turn_number,
            active_faction: w.active_faction,
        };
        self.send(conn, MsgType::RegisterAck, json!(ack), now);
        self.send_observation(conn, p.faction, now);
        if self.seats.len() == 2 && self.started_at.is_none() {
            self.started_at = Some(now);
            self.next_heartbeat = Some(now + HEARTBEAT_MS);
        }
        Ok(())
    }

    fn action_request(&mut self, conn: ConnId, f: Faction, env: &Envelope, stamp: Stamp, now: u64) -> Result<(), ErrorPayload> {
        let p: ActionRequestPayload = env.payload_as().map_err(|e| protocol_error(&e))?;
        if p.actions.is_empty() {
            return Err(rejection(ErrorCode::SchemaViolation, "ACTION_REQUEST needs at least one action"));
        }
        let mut results = Vec::with_capacity(p.actions.len());
        for req in &p.actions {
            let r = self.engine.execute(f, req, stamp);
            let stop = !r.ok;
            results.push(r);
            if stop {
                break;
            }
        }
        let complete = results.len() == p.actions.len();
        self.send(conn, MsgType::ActionResult, json!(ActionResultPayload { results, complete }), now);
        Ok(())
    }

    fn stats_report(&mut self, conn: ConnId, f: Faction, env: &Envelope, stamp: Stamp, now: u64) -> Result<(), ErrorPayload> {
        let req: ActionRequest = env.payload_as().map_err(|e| protocol_error(&e))?;
        let telemetry = [ActionKind::StrategyPing.as_str(), ActionKind::ReportLlmStats.as_str()];
        if !telemetry.contains(&req.action.as_str()) {
            let msg = format!("STATS_REPORT carries strategy_ping or report_llm_stats, not `{}`", req.action);
            return Err(rejection(ErrorCode::SchemaViolation, msg));
        }
        let r = self.engine.execute(f, &req, stamp);
        self.send(conn, MsgType::ActionResult, json!(ActionResultPayload { results: vec![r], complete: true }), now);
        Ok(())
    }

    fn send_observation(&mut self, conn: ConnId, f: Faction, now: u64) {
        let obs = self.engine.observation(f, ObservationLevel::Tactical);
        self.send(conn, MsgType::Observation, json!(obs), now);
    }

    /// Fan engine events out to every seated session, then hand the new
    /// active faction its observation.
    fn publish(&mut self, now: u64) {
        for notice in self.engine.drain_events() {
            let seated: Vec<ConnId> = self.seats.values().copied().collect();
            for conn in &seated {
                self.send(*conn, MsgType::Event, json!(notice), now);
            }
            if let EventNotice { event: EventKind::TurnStart, detail } = &notice {
                let f: Option<Faction> = serde_json::from_value(detail["faction"].clone()).ok();
                if let Some((f, conn)) = f.and_then(|f| self.seats.get(&f).map(|c| (f, *c))) {
                    self.send_observation(conn, f, now);
                }
            }
        }
    }

    /// Heartbeats and, in real-time, the match clock. Call at least once
    /// per tick.
    pub fn tick(&mut self, now: u64) -> Vec<Outbound> {
        if let (Mode::RealTime, Some(t0)) = (self.engine.world.mode, self.started_at) {
            let step = self.engine.world.rules.real_time.tick_ms;
            while !self.engine.is_over() && self.engine.world.clock_ms + step <= now.saturating_sub(t0) {
                if self.engine.advance_clock(step).is_err() {
                    break;
                }
            }
        }
        if self.next_heartbeat.is_some_and(|t| now >= t) {
            self.next_heartbeat = Some(now + HEARTBEAT_MS);
            self.heartbeat(now);
        }
        self.publish(now);
        self.take()
    }

    fn heartbeat(&mut self, now: u64) {
        let stale: Vec<ConnId> =
            self.conns.iter().filter(|(_, c)| c.missed >= MAX_MISSED_HEARTBEATS).map(|(id, _)| *id).collect();
        for conn in stale {
            let flushed = self.disconnect(conn, now);
            self.out.extend(flushed);
            self.out.push(Outbound::Close(conn));
        }
        self.nonce += 1;
        let conns: Vec<ConnId> = self.conns.keys().copied().collect();
        for conn in conns {
            self.conns.get_mut(&conn).expect("listed").missed += 1;
            self.send(conn, MsgType::Ping, json!(PingPayload { nonce: self.nonce }), now);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::encode_envelope;
    use crate::rules::testing::{plain_world, put};
    use crate::world::UnitType;
    use crate::hex::HexCoord;

    fn hub(mode: Mode) -> Hub {
        let mut w = plain_world(mode);
        put(&mut w, Faction::Wei, UnitType::Infantry, HexCoord::new(5, 5));
        put(&mut w, Faction::Shu, UnitType::Infantry, HexCoord::new(5, 6));
        Hub::new(Engine::new(w))
    }

    fn frame(t: MsgType, sender: &str, seq: u64, payload: Value) -> Vec<u8> {
        encode_envelope(&Envelope::new(t, sender, SERVER_ID, 1, seq, payload)).unwrap().into_bytes()
    }

    fn register(h: &mut Hub, conn: ConnId, f: &str) -> Vec<Outbound> {
        h.receive(conn, &frame(MsgType::Register, f, 1, json!({"faction": f, "agent_id": f})), 0)
    }

    fn sent(out: &[Outbound]) -> Vec<(ConnId, MsgType, Value)> {
        out.iter()
            .filter_map(|o| match o {
                Outbound::Send(c, e) => Some((*c, e.msg_type, e.payload.clone())),
                Outbound::Close(_) => None,
            })
            .collect()
    }

    fn error_code(out: &[Outbound]) -> Option<String> {
        sent(out).into_iter().find(|m| m.1 == MsgType::Error).map(|m| m.2["code"].as_str().unwrap().to_string())
    }

    #[test]
    fn registration_rules() {
        let mut h = hub(Mode::TurnBased);
        let out = h.receive(1, &frame(MsgType::ActionRequest, "x", 1, json!({"actions": []})), 0);
        assert_eq!(error_code(&out).as_deref(), Some("NotRegistered"));
        let out = register(&mut h, 2, "wei");
        assert_eq!(sent(&out)[0].1, MsgType::RegisterAck);
        assert_eq!(sent(&out)[1].1, MsgType::Observation);
        assert_eq!(error_code(&register(&mut h, 3, "wei")).as_deref(), Some("FactionTaken"));
        assert_eq!(error_code(&register(&mut h, 4, "wu")).as_deref(), Some("UnknownFaction"));
        assert_eq!(sent(&register(&mut h, 5, "shu"))[0].1, MsgType::RegisterAck);
        assert_eq!(h.session(5).unwrap().faction, Faction::Shu);
    }

    #[test]
    fn seq_must_increase() {
        let mut h = hub(Mode::TurnBased);
        register(&mut h, 1, "wei");
        let out = h.receive(1, &frame(MsgType::Ping, "wei", 1, json!({"nonce": 0})), 0);
        assert_eq!(error_code(&out).as_deref(), Some("SchemaViolation"));
        assert!(h.receive(1, &frame(MsgType::Ping, "wei", 2, json!({"nonce": 0})), 0).is_empty());
    }

    #[test]
    fn batch_stops_at_first_failure_and_events_fan_out() {
        let mut h = hub(Mode::TurnBased);
        register(&mut h, 1, "wei");
        register(&mut h, 2, "shu");
        let bad = json!({"action": "move", "params": {"unit_id": 999, "target_position": {"col": 1, "row": 1}}});
        let end = json!({"action": "end_turn", "params": {"faction": "wei"}});
        let out = h.receive(1, &frame(MsgType::ActionRequest, "wei", 2, json!({"actions": [bad, end]})), 0);
        let result = &sent(&out)[0].2;
        assert_eq!(result["complete"], false);
        assert_eq!(result["results"].as_array().unwrap().len(), 1);
        let out = h.receive(1, &frame(MsgType::ActionRequest, "wei", 3, json!({"actions": [end]})), 0);
        let msgs = sent(&out);
        assert_eq!(msgs[0].2["complete"], true);
        let turn_start: Vec<ConnId> =
            msgs.iter().filter(|m| m.1 == MsgType::Event && m.2["event"] == "turn_start").map(|m| m.0).collect();
        assert_eq!(turn_start, vec![1, 2]);
        assert!(msgs.iter().any(|m| m.0 == 2 && m.1 == MsgType::Observation));
    }

    #[test]
    fn silent_session_is_dropped_and_forfeits_in_real_time() {
        let mut h = hub(Mode::RealTime);
        register(&mut h, 1, "wei");
        register(&mut h, 2, "shu");
        let mut closed = Vec::new();
        for k in 1..=4 {
            let now = k * HEARTBEAT_MS;
            h.receive(2, &frame(MsgType::Ping, "shu", k + 2, json!({"nonce": k})), now - 1);
            closed.extend(h.tick(now).into_iter().filter_map(|o| match o {
                Outbound::Close(c) => Some(c),
                Outbound::Send(..) => None,
            }));
        }
        assert_eq!(closed, vec![1]);
        assert_eq!(h.engine().outcome().unwrap().winner, Some(Faction::Shu));
    }

    #[test]
    fn turn_based_disconnect_pauses() {
        let mut h = hub(Mode::TurnBased);
        register(&mut h, 1, "wei");
        register(&mut h, 2, "shu");
        h.disconnect(1, 5);
        assert!(h.paused() && !h.is_over());
        assert_eq!(sent(&register(&mut h, 3, "wei"))[0].1, MsgType::RegisterAck);
        assert!(!h.paused());
    }
}
