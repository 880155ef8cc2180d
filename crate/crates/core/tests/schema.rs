//! The published protocol schema against real server traffic.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use star_core::action::{ActionRequest, Engine, ObservationDoc};
use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::MatchConfig;
use star_core::protocol::{encode_envelope, Envelope, Hub, MsgType, Outbound, HEARTBEAT_MS, SERVER_ID};
use star_core::scenario::Scenario;
use star_core::world::{Faction, Mode};

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/protocol.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Validates every frame in both directions and remembers which message
/// types it has seen.
struct Wire {
    hub: Hub,
    schema: jsonschema::Validator,
    seq: [u64; 2],
    seen: BTreeSet<MsgType>,
    frames: usize,
    now: u64,
    results: Vec<Value>,
}

impl Wire {
    fn check(&mut self, env: &Envelope) {
        let doc: Value = serde_json::from_str(&encode_envelope(env).unwrap()).unwrap();
        let errors: Vec<String> = self.schema.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        assert!(errors.is_empty(), "{} frame violates the schema: {errors:?}\n{doc}", env.msg_type.as_str());
        self.seen.insert(env.msg_type);
        self.frames += 1;
    }

    fn route(&mut self, out: Vec<Outbound>) {
        for o in out {
            if let Outbound::Send(_, env) = o {
                self.check(&env);
                if env.msg_type == MsgType::ActionResult {
                    self.results.push(env.payload);
                }
            }
        }
    }

    fn send(&mut self, side: usize, t: MsgType, payload: Value) {
        self.seq[side] += 1;
        self.now += 1;
        let env = Envelope::new(t, ["wei", "shu"][side], SERVER_ID, self.now, self.seq[side], payload);
        self.check(&env);
        let out = self.hub.receive(side as u64 + 1, encode_envelope(&env).unwrap().as_bytes(), self.now);
        self.route(out);
    }
}

#[test]
fn server_traffic_matches_schema() {
    let config = MatchConfig::new(Mode::TurnBased, 5, Scenario::default());
    let mut wire = Wire {
        hub: Hub::new(Engine::new(config.build_world().unwrap())),
        schema: validator(),
        seq: [0; 2],
        seen: BTreeSet::new(),
        frames: 0,
        now: 1_000,
        results: Vec::new(),
    };
    for side in 0..2 {
        wire.hub.connect(side as u64 + 1, wire.now);
    }
    // Gameplay before registration is refused with an ERROR envelope.
    wire.send(0, MsgType::ActionRequest, json!({ "actions": [] }));
    for (side, f) in ["wei", "shu"].into_iter().enumerate() {
        wire.send(side, MsgType::Register, json!({ "faction": f, "agent_id": f, "model_id": "greedy" }));
    }
    wire.send(0, MsgType::StatsReport, json!({ "action": "strategy_ping", "params": { "strategy": "hold the centre" } }));

    let mut policies = [AgentProfile::new(PolicyTag::Greedy, 1).build(), AgentProfile::new(PolicyTag::Random, 2).build()];
    let mut turns = 0;
    while !wire.hub.is_over() && turns < 60 {
        let f = wire.hub.engine().world.active_faction.unwrap();
        let side = usize::from(f != Faction::Wei);
        wire.results.clear();
        let observe = ActionRequest::new("observation", json!({ "observation_level": "tactical" }));
        wire.send(side, MsgType::ActionRequest, json!({ "actions": [observe] }));
        let obs: ObservationDoc = serde_json::from_value(wire.results[0]["results"][0]["detail"].clone()).unwrap();
        let mut actions = policies[side].as_mut().decide(&obs);
        actions.push(ActionRequest::new("end_turn", json!({ "faction": f })));
        wire.send(side, MsgType::ActionRequest, json!({ "actions": actions }));
        if wire.hub.engine().world.active_faction == Some(f) && !wire.hub.is_over() {
            wire.send(side, MsgType::ActionRequest, json!({ "actions": [{ "action": "end_turn", "params": { "faction": f } }] }));
        }
        turns += 1;
    }
    // A silent stretch draws heartbeats.
    let out = wire.hub.tick(wire.now + HEARTBEAT_MS + 1);
    wire.route(out);

    let missing: Vec<&str> = MsgType::ALL.iter().filter(|t| !wire.seen.contains(t)).map(|t| t.as_str()).collect();
    assert!(missing.is_empty(), "never exercised: {missing:?} over {} frames", wire.frames);
}

#[test]
fn schema_rejects_what_the_server_never_sends() {
    let schema = validator();
    let base = json!({
        "msg_type": "ERROR", "sender": "server", "receiver": "wei", "timestamp": 1, "seq": 1,
        "payload": { "code": "NotYourTurn", "message": "wait", "spatial": false }
    });
    assert!(schema.is_valid(&base));
    let mut unknown_type = base.clone();
    unknown_type["msg_type"] = json!("HELLO");
    let mut unknown_code = base.clone();
    unknown_code["payload"]["code"] = json!("Oops");
    let mut extra_field = base.clone();
    extra_field["extra"] = json!(1);
    let exact_count = json!({
        "msg_type": "OBSERVATION", "sender": "server", "receiver": "wei", "timestamp": 1, "seq": 2,
        "payload": {
            "faction": "wei", "level": "basic", "own_units": [], "visible_tiles": [],
            "known_enemy_units": [{ "id": 4, "type": "archer", "position": { "col": 1, "row": 2 }, "estimate_count": "high", "unit_count": 77 }],
            "strategic_info": { "turn_number": 1, "resources": {}, "construction_points": 0, "mode": "turn_based", "active_faction": "wei", "clock_ms": 0, "horizon": 100 },
            "map": { "width": 1, "height": 1, "rows": ["P"], "owned": [] }
        }
    });
    for bad in [unknown_type, unknown_code, extra_field, exact_count] {
        assert!(!schema.is_valid(&bad), "{bad}");
    }
}
