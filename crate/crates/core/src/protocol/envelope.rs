//! The envelope: typed wire unit and its canonical text encoding.
//!
//! Encoding is compact JSON with object keys sorted at every depth (the
//! `serde_json::Value` map is ordered). Decoding distinguishes syntax errors,
//! unknown message types and schema violations.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::finite;
use crate::error::ErrorCode;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MsgType {
    Observation,
    ActionRequest,
    ActionResult,
    Event,
    Register,
    RegisterAck,
    Error,
    StatsReport,
    Ping,
}

impl MsgType {
    pub const ALL: [MsgType; 9] = [
        MsgType::Observation,
        MsgType::ActionRequest,
        MsgType::ActionResult,
        MsgType::Event,
        MsgType::Register,
        MsgType::RegisterAck,
        MsgType::Error,
        MsgType::StatsReport,
        MsgType::Ping,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MsgType::Observation => "OBSERVATION",
            MsgType::ActionRequest => "ACTION_REQUEST",
            MsgType::ActionResult => "ACTION_RESULT",
            MsgType::Event => "EVENT",
            MsgType::Register => "REGISTER",
            MsgType::RegisterAck => "REGISTER_ACK",
            MsgType::Error => "ERROR",
            MsgType::StatsReport => "STATS_REPORT",
            MsgType::Ping => "PING",
        }
    }

    pub fn parse(s: &str) -> Option<MsgType> {
        MsgType::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Whether the message needs a registered session.
    pub fn is_gameplay(self) -> bool {
        matches!(self, MsgType::ActionRequest | MsgType::StatsReport)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub msg_type: MsgType,
    pub sender: String,
    pub receiver: String,
    /// Sender clock, ms since the Unix epoch.
    pub timestamp: u64,
    /// Per-sender counter, strictly increasing within a session.
    pub seq: u64,
    pub payload: Value,
    /// Receiver clock at arrival; set by the server.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub received_at: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("unserializable payload: {0}")]
    UnserializablePayload(String),
}

impl ProtocolError {
    pub fn code(&self) -> ErrorCode {
        match self {
            ProtocolError::MalformedMessage(_) => ErrorCode::MalformedMessage,
            ProtocolError::UnknownType(_) => ErrorCode::UnknownType,
            ProtocolError::SchemaViolation(_) | ProtocolError::UnserializablePayload(_) => ErrorCode::SchemaViolation,
        }
    }
}

/// Convert a typed payload, rejecting NaN and infinities.
pub fn to_payload<T: Serialize + ?Sized>(value: &T) -> Result<Value, ProtocolError> {
    finite::check(value).map_err(|e| ProtocolError::UnserializablePayload(e.0))?;
    serde_json::to_value(value).map_err(|e| ProtocolError::UnserializablePayload(e.to_string()))
}

impl Envelope {
    pub fn new(msg_type: MsgType, sender: impl Into<String>, receiver: impl Into<String>, timestamp: u64, seq: u64, payload: Value) -> Self {
        Self { msg_type, sender: sender.into(), receiver: receiver.into(), timestamp, seq, payload, received_at: None }
    }

    /// Envelope around a typed payload.
    pub fn typed<T: Serialize + ?Sized>(
        msg_type: MsgType,
        sender: impl Into<String>,
        receiver: impl Into<String>,
        timestamp: u64,
        seq: u64,
        payload: &T,
    ) -> Result<Self, ProtocolError> {
        Ok(Self::new(msg_type, sender, receiver, timestamp, seq, to_payload(payload)?))
    }

    /// Decode the payload into its typed form.
    pub fn payload_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T, ProtocolError> {
        serde_json::from_value(self.payload.clone())
            .map_err(|e| ProtocolError::SchemaViolation(format!("{} payload: {e}", self.msg_type.as_str())))
    }
}

pub fn encode_envelope(e: &Envelope) -> Result<String, ProtocolError> {
    let v = to_payload(e)?;
    serde_json::to_string(&v).map_err(|e| ProtocolError::UnserializablePayload(e.to_string()))
}

pub fn decode_envelope(bytes: &[u8]) -> Result<Envelope, ProtocolError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ProtocolError::MalformedMessage(e.to_string()))?;
    let v: Value = serde_json::from_str(text).map_err(|e| ProtocolError::MalformedMessage(e.to_string()))?;
    let Value::Object(map) = &v else {
        return Err(ProtocolError::SchemaViolation("envelope must be an object".into()));
    };
    match map.get("msg_type") {
        None => return Err(ProtocolError::SchemaViolation("missing field `msg_type`".into())),
        Some(Value::String(s)) if MsgType::parse(s).is_some() => {}
        Some(Value::String(s)) => return Err(ProtocolError::UnknownType(s.clone())),
        Some(other) => return Err(ProtocolError::UnknownType(other.to_string())),
    }
    serde_json::from_value(v).map_err(|e| ProtocolError::SchemaViolation(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ping() -> Envelope {
        Envelope::new(MsgType::Ping, "server", "agent-1", 1_700_000_000_000, 7, json!({"nonce": 3}))
    }

    #[test]
    fn canonical_and_stable() {
        let a = encode_envelope(&ping()).unwrap();
        assert_eq!(a, encode_envelope(&ping()).unwrap());
        assert_eq!(
            a,
            r#"{"msg_type":"PING","payload":{"nonce":3},"receiver":"agent-1","sender":"server","seq":7,"timestamp":1700000000000}"#
        );
        assert_eq!(decode_envelope(a.as_bytes()).unwrap(), ping());
    }

    #[test]
    fn nested_keys_sorted() {
        let e = Envelope::new(MsgType::Event, "s", "r", 0, 0, json!({"z": {"b": 1, "a": [{"y": 0, "x": 1}]}}));
        let s = encode_envelope(&e).unwrap();
        assert!(s.contains(r#"{"z":{"a":[{"x":1,"y":0}],"b":1}}"#), "{s}");
    }

    #[test]
    fn decode_errors_are_distinct() {
        let good = encode_envelope(&ping()).unwrap();
        let cut = &good.as_bytes()[..good.len() - 5];
        assert!(matches!(decode_envelope(cut), Err(ProtocolError::MalformedMessage(_))));
        assert!(matches!(decode_envelope(&[0xff, 0xfe]), Err(ProtocolError::MalformedMessage(_))));
        let foo = good.replace("PING", "FOO");
        assert_eq!(decode_envelope(foo.as_bytes()), Err(ProtocolError::UnknownType("FOO".into())));
        let missing = r#"{"msg_type":"PING","payload":{},"receiver":"a","sender":"b","timestamp":1}"#;
        assert!(matches!(decode_envelope(missing.as_bytes()), Err(ProtocolError::SchemaViolation(_))));
        assert!(matches!(decode_envelope(b"[1,2]"), Err(ProtocolError::SchemaViolation(_))));
        assert_eq!(ProtocolError::UnknownType("x".into()).code(), ErrorCode::UnknownType);
    }

    #[test]
    fn non_finite_payload_rejected() {
        #[derive(Serialize)]
        struct P {
            score: f64,
        }
        let r = Envelope::typed(MsgType::Event, "s", "r", 0, 0, &P { score: f64::NAN });
        assert!(matches!(r, Err(ProtocolError::UnserializablePayload(_))));
        assert!(Envelope::typed(MsgType::Event, "s", "r", 0, 0, &P { score: 0.25 }).is_ok());
    }

    #[test]
    fn received_at_round_trips() {
        let mut e = ping();
        e.received_at = Some(1_700_000_000_004);
        let s = encode_envelope(&e).unwrap();
        assert_eq!(decode_envelope(s.as_bytes()).unwrap(), e);
    }
}
