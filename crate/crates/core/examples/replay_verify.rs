//! Save a match record, verify it by re-execution, then tamper with one
//! battle result and watch verification fail at that record.
//!
//! `cargo run --example replay_verify`

use serde_json::json;
use star_core::action::{LogRecord, ReplayLog};
use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{run_match, verify, MatchConfig, MatchRecord};
use star_core::scenario::Scenario;
use star_core::world::Mode;

fn main() {
    let config = MatchConfig::new(Mode::TurnBased, 42, Scenario::default());
    let mut red = AgentProfile::new(PolicyTag::Greedy, 1).build();
    let mut blue = AgentProfile::new(PolicyTag::Kiting, 2).build();
    let record = run_match(&config, red.as_mut(), blue.as_mut()).expect("the standard scenario builds");

    let path = std::env::temp_dir().join("star-replay-example.jsonl");
    record.save(&path).expect("writable temp dir");
    let loaded = MatchRecord::load(&path).expect("the record reads back");
    println!("saved {} ({} records, sha256 {})", path.display(), loaded.log.len(), loaded.sha256());
    match verify(&loaded) {
        Ok(r) => println!("clean record: ok, {} checkpoints, digest {}", r.checkpoints, r.final_digest),
        Err(e) => println!("clean record: {e}"),
    }

    let mut records = loaded.log.records().to_vec();
    let battle = records.iter_mut().find_map(|r| match r {
        LogRecord::Action { result, .. } if result.detail.get("casualties").is_some() => Some(result),
        _ => None,
    });
    if let Some(result) = battle {
        let n = result.detail["casualties"].as_u64().unwrap_or(0);
        result.detail["casualties"] = json!(n + 1);
    }
    let tampered = MatchRecord { log: ReplayLog::from_records(records), ..loaded };
    match verify(&tampered) {
        Ok(_) => println!("tampered record: unexpectedly verified"),
        Err(e) => println!("tampered record: {e}"),
    }
    let _ = std::fs::remove_file(&path);
}
