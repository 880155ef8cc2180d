//! Host a turn-based match over WebSocket and let two scripted agents join
//! it as remote clients. The server picks a free port.
//!
//! `cargo run --example protocol_server`

use std::thread;
use std::time::Duration;

use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{verify, MatchConfig};
use star_core::protocol::{play, ClientOptions, Server};
use star_core::scenario::Scenario;
use star_core::world::{Faction, Mode};

fn main() {
    let config = MatchConfig::new(Mode::TurnBased, 11, Scenario::default());
    let server = Server::bind("127.0.0.1:0").expect("a free local port");
    let url = format!("ws://{}", server.local_addr().expect("bound socket"));
    println!("serving on {url}");
    let host = {
        let config = config.clone();
        thread::spawn(move || server.run(&config, Some(Duration::from_secs(120))))
    };

    let clients: Vec<_> = [(Faction::Wei, PolicyTag::Kiting), (Faction::Shu, PolicyTag::Greedy)]
        .into_iter()
        .map(|(faction, tag)| {
            let url = url.clone();
            thread::spawn(move || {
                let mut policy = AgentProfile::new(tag, 1).build();
                (faction, play(&url, faction, policy.as_mut(), &ClientOptions::default()))
            })
        })
        .collect();
    for c in clients {
        let (faction, report) = c.join().expect("client thread");
        match report {
            Ok(r) => println!("{}: {} decisions, errors {:?}", faction.as_str(), r.decisions, r.errors),
            Err(e) => println!("{}: {e}", faction.as_str()),
        }
    }

    let record = host.join().expect("server thread").expect("match finished");
    let o = &record.footer.outcome;
    println!("winner {:?} by {:?} after {} turns", o.winner, o.terminal_reason, record.footer.turn_number);
    let check = verify(&record).expect("the record replays");
    println!("replay verified: {} records, {} checkpoints", check.records, check.checkpoints);
}
