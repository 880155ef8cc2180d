//! WebSocket transport for one match.
//!
//! One thread per connection moves text frames between its socket and the
//! hub; the hub thread applies them in arrival order.

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use tungstenite::{Message, WebSocket};

use super::envelope::encode_envelope;
use super::session::{ConnId, Hub, Outbound};
use crate::action::Engine;
use crate::engine::record::MatchHeader;
use crate::engine::runner::finish;
use crate::engine::{MatchConfig, MatchRecord};
use crate::world::WorldError;

pub const DEFAULT_PORT: u16 = 8765;
/// Environment variable overriding the default port.
pub const PORT_ENV: &str = "STAR_PORT";

/// How long a connection thread blocks on a read before servicing writes.
const POLL: Duration = Duration::from_millis(5);

/// `127.0.0.1` with the port from the environment, else the default.
pub fn default_addr() -> String {
    let port = std::env::var(PORT_ENV).ok().and_then(|p| p.parse::<u16>().ok()).unwrap_or(DEFAULT_PORT);
    format!("127.0.0.1:{port}")
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("transport: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot build the battlefield: {0}")]
    World(#[from] WorldError),
    #[error("no result within {0:?}")]
    Timeout(Duration),
}

enum Inbound {
    Connected(ConnId, Sender<Option<String>>),
    Frame(ConnId, Vec<u8>),
    Closed(ConnId),
}

pub struct Server {
    listener: TcpListener,
}

impl Server {
    pub fn bind(addr: &str) -> std::io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        Ok(Self { listener })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Host one match until it is decided and return its record.
    pub fn run(self, config: &MatchConfig, limit: Option<Duration>) -> Result<MatchRecord, ServeError> {
        let engine = Engine::new(config.build_world()?);
        let poll = Duration::from_millis(config.scenario.real_time.tick_ms.clamp(1, 100));
        let (tx, rx) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));
        let acceptor = {
            let (stop, tx) = (stop.clone(), tx.clone());
            thread::spawn(move || accept_loop(self.listener, tx, stop))
        };
        drop(tx);
        let hub = hub_loop(Hub::new(engine), &rx, poll, limit);
        stop.store(true, Ordering::Relaxed);
        let workers = acceptor.join().unwrap_or_default();
        for w in workers {
            let _ = w.join();
        }
        let hub = hub?;
        let header = MatchHeader::new(config, hub.labels().clone());
        Ok(finish(header, hub.into_engine()))
    }
}

fn accept_loop(listener: TcpListener, tx: Sender<Inbound>, stop: Arc<AtomicBool>) -> Vec<JoinHandle<()>> {
    let ids = AtomicU64::new(1);
    let mut workers = Vec::new();
    while !stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, _)) => {
                let id = ids.fetch_add(1, Ordering::Relaxed);
                let (tx, stop) = (tx.clone(), stop.clone());
                workers.push(thread::spawn(move || connection(id, stream, tx, stop)));
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(_) => thread::sleep(POLL),
        }
    }
    workers
}

fn connection(id: ConnId, stream: TcpStream, tx: Sender<Inbound>, stop: Arc<AtomicBool>) {
    let setup = stream.set_nonblocking(false).and_then(|_| stream.set_read_timeout(Some(POLL)));
    if setup.is_err() {
        return;
    }
    let Ok(mut ws) = tungstenite::accept(stream) else { return };
    let (out_tx, out_rx) = mpsc::channel();
    if tx.send(Inbound::Connected(id, out_tx)).is_err() {
        return;
    }
    pump(id, &mut ws, &tx, &out_rx, &stop);
    let _ = tx.send(Inbound::Closed(id));
}

/// Shuttle frames until either side closes. `None` on the outbound channel
/// asks for a close after everything before it has been written.
fn pump(id: ConnId, ws: &mut WebSocket<TcpStream>, tx: &Sender<Inbound>, out: &Receiver<Option<String>>, stop: &AtomicBool) {
    loop {
        loop {
            match out.try_recv() {
                Ok(Some(text)) => {
                    if ws.send(Message::text(text)).is_err() {
                        return;
                    }
                }
                Ok(None) | Err(mpsc::TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    return;
                }
                Err(mpsc::TryRecvError::Empty) => break,
            }
        }
        if stop.load(Ordering::Relaxed) {
            let _ = ws.close(None);
            let _ = ws.flush();
            return;
        }
        match ws.read() {
            Ok(Message::Text(t)) => {
                let _ = tx.send(Inbound::Frame(id, t.as_bytes().to_vec()));
            }
            // Binary frames are not part of the protocol; the hub answers
            // them like any other undecodable message.
            Ok(Message::Binary(b)) => {
                let _ = tx.send(Inbound::Frame(id, b.to_vec()));
            }
            Ok(Message::Close(_)) => return,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
            Err(_) => return,
        }
    }
}

fn hub_loop(mut hub: Hub, rx: &Receiver<Inbound>, poll: Duration, limit: Option<Duration>) -> Result<Hub, ServeError> {
    let started = Instant::now();
    let mut senders: std::collections::BTreeMap<ConnId, Sender<Option<String>>> = Default::default();
    let route = |senders: &mut std::collections::BTreeMap<ConnId, Sender<Option<String>>>, out: Vec<Outbound>| {
        for o in out {
            match o {
                Outbound::Send(conn, env) => {
                    let text = encode_envelope(&env).expect("server envelopes carry finite payloads");
                    if let Some(s) = senders.get(&conn) {
                        let _ = s.send(Some(text));
                    }
                }
                Outbound::Close(conn) => {
                    if let Some(s) = senders.remove(&conn) {
                        let _ = s.send(None);
                    }
                }
            }
        }
    };
    while !hub.is_over() {
        if limit.is_some_and(|l| started.elapsed() > l) {
            return Err(ServeError::Timeout(limit.unwrap_or_default()));
        }
        let out = match rx.recv_timeout(poll) {
            Ok(Inbound::Connected(id, s)) => {
                senders.insert(id, s);
                hub.connect(id, now_ms());
                Vec::new()
            }
            Ok(Inbound::Frame(id, bytes)) => hub.receive(id, &bytes, now_ms()),
            Ok(Inbound::Closed(id)) => {
                senders.remove(&id);
                hub.disconnect(id, now_ms())
            }
            Err(RecvTimeoutError::Timeout) => Vec::new(),
            Err(RecvTimeoutError::Disconnected) => break,
        };
        route(&mut senders, out);
        let out = hub.tick(now_ms());
        route(&mut senders, out);
    }
    for (_, s) in std::mem::take(&mut senders) {
        let _ = s.send(None);
    }
    Ok(hub)
}
