use std::thread;
use std::time::Duration;

use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{run_match, verify, MatchConfig};
use star_core::error::ErrorCode;
use star_core::protocol::{play, ClientOptions, Server};
use star_core::scenario::Scenario;
use star_core::world::{Faction, Mode};

#[test]
fn turn_based_match_over_websocket() {
    let config = MatchConfig::new(Mode::TurnBased, 11, Scenario::default());
    let server = Server::bind("127.0.0.1:0").unwrap();
    let url = format!("ws://{}", server.local_addr().unwrap());
    let host = {
        let config = config.clone();
        thread::spawn(move || server.run(&config, Some(Duration::from_secs(120))))
    };
    let agents: Vec<_> = [(Faction::Wei, PolicyTag::Greedy), (Faction::Shu, PolicyTag::Random)]
        .into_iter()
        .map(|(f, tag)| {
            let url = url.clone();
            thread::spawn(move || {
                let mut policy = AgentProfile::new(tag, 1).build();
                play(&url, f, policy.as_mut(), &ClientOptions::default())
            })
        })
        .collect();
    let reports: Vec<_> = agents.into_iter().map(|h| h.join().unwrap().unwrap()).collect();
    let record = host.join().unwrap().unwrap();
    for r in &reports {
        assert_eq!(r.errors.get(&ErrorCode::NotYourTurn), None, "{r:?}");
        assert_eq!(r.errors.get(&ErrorCode::SchemaViolation), None, "{r:?}");
        assert!(r.outcome.is_some());
    }
    assert_eq!(record.footer.outcome.winner, Some(Faction::Wei));
    verify(&record).unwrap();
    let _ = run_match;
}
