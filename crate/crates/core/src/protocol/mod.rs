//! Wire format shared by the server and remote agents, the session layer
//! and the WebSocket server.

pub mod client;
pub mod envelope;
mod finite;
pub mod server;
pub mod session;

pub use envelope::{decode_envelope, encode_envelope, Envelope, MsgType, ProtocolError};
pub use client::{play, ClientError, ClientOptions, ClientReport};
pub use finite::NonFinite;
pub use server::{default_addr, Server, ServeError, DEFAULT_PORT, PORT_ENV};
pub use session::{
    ActionRequestPayload, ActionResultPayload, AgentSession, ConnId, ErrorPayload, Hub, Outbound, PingPayload,
    RegisterAck, RegisterPayload, HEARTBEAT_MS, MAX_MISSED_HEARTBEATS, SERVER_ID,
};
