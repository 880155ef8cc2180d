//! Acceptance gate. Each test prints one `acceptance NN <name>: PASS|FAIL`
//! line and then asserts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use star_core::action::{
    visible_cells, Action, ActionKind, ActionRequest, ActionResult, Engine, LogRecord, ObservationLevel, ReplayLog, Stamp,
};
use star_core::agents::{AgentProfile, PolicyTag};
use star_core::engine::{
    action_lock_duration, run_match, run_tournament, GameStats, MatchConfig, MatchRecord, TournamentConfig,
};
use star_core::error::ErrorCode;
use star_core::hex::{hex_distance, neighbors, GridSize, HexCoord};
use star_core::protocol::{decode_envelope, encode_envelope, Envelope, Hub, MsgType};
use star_core::rating::{self, expected_score, update_pwer, update_ser, MatchOutcomeRecord, RatingParams};
use star_core::rules::combat::{effectiveness, EffectivenessCurve};
use star_core::scenario::Scenario;
use star_core::world::{build_battlefield, EntityId, Faction, Mode, Terrain, TerrainGrid, UnitType, WorldState};

fn verdict(n: u32, name: &str, ok: bool, detail: impl std::fmt::Display) {
    // Written past the test harness capture so the verdict shows in every run.
    let line = format!("acceptance {n:02} {name}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), line.as_bytes());
    assert!(ok, "acceptance {n:02} {name} failed: {detail}");
}

fn stamp(e: &Engine) -> Stamp {
    Stamp { sent_at: None, received_at: e.world.clock_ms }
}

fn plain(mode: Mode) -> WorldState {
    WorldState::new(Arc::new(Scenario::default()), TerrainGrid::filled(GridSize::new(15, 15), Terrain::Plain), mode)
}

fn req(action: &str, params: Value) -> ActionRequest {
    ActionRequest::new(action, params)
}

#[test]
fn a01_hex_metric_matches_bfs() {
    let started = Instant::now();
    let size = GridSize::new(15, 15);
    let mut mismatches = 0;
    let mut pairs = 0;
    for src in size.cells() {
        let mut dist = BTreeMap::from([(src, 0u32)]);
        let mut queue = VecDeque::from([src]);
        while let Some(c) = queue.pop_front() {
            for n in neighbors(c, size) {
                if !dist.contains_key(&n) {
                    dist.insert(n, dist[&c] + 1);
                    queue.push_back(n);
                }
            }
        }
        for dst in size.cells() {
            pairs += 1;
            if dist.get(&dst) != Some(&hex_distance(src, dst)) {
                mismatches += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    let ok = pairs == 225 * 225 && mismatches == 0 && elapsed < Duration::from_secs(5);
    verdict(1, "hex-metric", ok, format!("{pairs} pairs, {mismatches} mismatches, {elapsed:?}"));
}

/// Move cost and defender bonus per terrain, from the published table.
const TERRAIN_TABLE: [(Terrain, Option<u32>, f64); 6] = [
    (Terrain::Plain, Some(1), 0.0),
    (Terrain::Forest, Some(2), 0.2),
    (Terrain::Hill, Some(2), 0.3),
    (Terrain::Mountain, Some(3), 0.5),
    (Terrain::Water, None, 0.0),
    (Terrain::City, Some(1), 0.4),
];

#[test]
fn a02_terrain_fidelity() {
    let mut failures = Vec::new();
    let mut fixtures = 0;
    for (terrain, cost, bonus) in TERRAIN_TABLE {
        // Movement: one step from a plain tile onto `terrain`.
        fixtures += 1;
        let mut w = plain(Mode::TurnBased);
        let dest = HexCoord::new(5, 6);
        w.terrain.set(dest, terrain);
        let inf = w.spawn_unit(Faction::Wei, UnitType::Infantry, HexCoord::new(5, 5)).unwrap();
        w.spawn_unit(Faction::Shu, UnitType::Infantry, HexCoord::new(12, 12)).unwrap();
        let mut e = Engine::new(w);
        let params = json!({"unit_id": inf.0, "target_position": {"col": 5, "row": 6}});
        let r = e.execute(Faction::Wei, &req("move", params), stamp(&e));
        let got = r.ok.then(|| r.detail["cost"].as_u64().unwrap() as u32);
        if got != cost {
            failures.push(format!("{terrain:?} move cost {got:?} != {cost:?}"));
        }

        // Combat: full-strength cavalry hits infantry standing on `terrain`.
        fixtures += 1;
        let mut w = plain(Mode::TurnBased);
        w.terrain.set(dest, terrain);
        let cav = w.spawn_unit(Faction::Wei, UnitType::Cavalry, HexCoord::new(5, 5)).unwrap();
        let defender = w.spawn_unit(Faction::Shu, UnitType::Infantry, dest);
        match (terrain, defender) {
            (Terrain::Water, Err(_)) => {}
            (Terrain::Water, Ok(_)) => failures.push("a unit stands on water".into()),
            (_, Err(err)) => failures.push(format!("{terrain:?}: cannot place defender: {err}")),
            (_, Ok(d)) => {
                let mut e = Engine::new(w);
                let r = e.execute(Faction::Wei, &req("attack", json!({"unit_id": cav.0, "target_id": d.0})), stamp(&e));
                // 85 attack against 70 defense raised by the terrain bonus.
                let oracle = (85.0 * 100.0 / (100.0 + 70.0 * (1.0 + bonus))).round() as u64;
                let got = r.detail["casualties"].as_u64();
                if got != Some(oracle) || r.detail["terrain_modifier_applied"].as_f64() != Some(bonus) {
                    failures.push(format!("{terrain:?} casualties {got:?} != {oracle}"));
                }
            }
        }
    }
    verdict(2, "terrain-fidelity", fixtures == 12 && failures.is_empty(), format!("{fixtures} fixtures, failures {failures:?}"));
}

#[test]
fn a03_effectiveness_curve() {
    let c = EffectivenessCurve::default();
    let s = |x: f64| effectiveness(x, &c).unwrap();
    let endpoints = s(0.0) == 0.0 && s(1.0) == 1.0;
    let grid: Vec<f64> = (0..=1000).map(|i| s(f64::from(i) / 1000.0)).collect();
    let monotone = grid.windows(2).all(|w| w[1] >= w[0]);
    let tail = s(0.3);
    let ok = endpoints && monotone && tail <= 0.2;
    verdict(3, "effectiveness-curve", ok, format!("endpoints {endpoints}, monotone {monotone}, s(0.3) = {tail}"));
}

fn random_stream(rng: &mut ChaCha8Rng, players: usize, games: usize) -> Vec<MatchOutcomeRecord> {
    (0..games)
        .map(|_| {
            let a = rng.gen_range(0..players);
            let b = (a + rng.gen_range(1..players)) % players;
            let s_a = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
            MatchOutcomeRecord {
                player_a: format!("p{a}"),
                player_b: format!("p{b}"),
                s_a,
                u: if s_a == 0.5 { 0.0 } else { rng.gen() },
                t_game: rng.gen_range(1.0..150.0),
                t_max: 100.0,
                mode: Mode::TurnBased,
                seed: None,
                final_digest: None,
            }
        })
        .collect()
}

#[test]
fn a04_rating_formulas() {
    let mut notes = Vec::new();
    let equal = expected_score(1000.0, 1000.0, 400.0) == 0.5;
    let gap = (expected_score(1400.0, 1000.0, 400.0) - 10.0 / 11.0).abs() < 1e-12;
    let step = update_ser(1000.0, 1000.0, 1.0, 32.0, 400.0) == Ok((1016.0, 984.0));
    notes.push(format!("E(equal) {equal}, E(400) {gap}, +-16 {step}"));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let flat = RatingParams { alpha: 0.0, beta: 0.0, ..RatingParams::default() };
    let mut degenerate = true;
    for _ in 0..1000 {
        let players = rng.gen_range(2..6);
        let games = rng.gen_range(1..30);
        let stream = random_stream(&mut rng, players, games);
        let names: BTreeSet<String> = stream.iter().flat_map(|r| [r.player_a.clone(), r.player_b.clone()]).collect();
        let r = rating::rate_stream(&stream, &names, &flat).unwrap();
        degenerate &= names.iter().all(|n| (r.ser[n] - r.pwer[n]).abs() <= 1e-9);
        // The update itself, one match at a time.
        let o = &stream[0];
        degenerate &= update_pwer(1000.0, 1100.0, o, &flat).unwrap() == update_ser(1000.0, 1100.0, o.s_a, 32.0, 400.0).unwrap();
    }
    notes.push(format!("M=1 degeneracy {degenerate}"));

    let (mut a, mut b) = (1000.0f64, 1000.0f64);
    let mut drift = 0.0f64;
    for _ in 0..10_000 {
        let s = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
        (a, b) = update_ser(a, b, s, 32.0, 400.0).unwrap();
        drift = drift.max((a + b - 2000.0).abs());
    }
    let conserved = drift <= 1e-9;
    notes.push(format!("sum drift {drift:e}"));
    verdict(4, "rating-formulas", equal && gap && step && degenerate && conserved, notes.join(", "));
}

#[test]
fn a05_pwer_rewards_decisive_play() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let game = |a: &str, b: &str, s_a: f64, u: f64, t: f64| MatchOutcomeRecord {
        player_a: a.into(),
        player_b: b.into(),
        s_a,
        u,
        t_game: t,
        t_max: 100.0,
        mode: Mode::TurnBased,
        seed: None,
        final_digest: None,
    };
    let mut stream = Vec::new();
    for _ in 0..10 {
        for rival in ["a", "b", "c"] {
            stream.push(game("s", rival, 1.0, 1.0, 10.0));
        }
        for (x, y) in [("a", "b"), ("b", "c"), ("c", "a")] {
            let s = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
            stream.push(game(x, y, s, if s == 0.5 { 0.0 } else { 0.4 }, 90.0));
        }
    }
    let board = rating::run_tournament(&stream, &RatingParams::default(), 100, 5).unwrap();
    let again = rating::run_tournament(&stream, &RatingParams::default(), 100, 5).unwrap();
    let s = board.row("s").unwrap();
    let ok = s.pwer > s.ser && s.win_rate == 1.0 && board.rows[0].player == "s" && board == again;
    verdict(5, "pwer-over-ser", ok, format!("PWER {:.1} SER {:.1} win rate {}", s.pwer, s.ser, s.win_rate));
}

#[test]
fn a06_skill_separability() {
    let started = Instant::now();
    let config = TournamentConfig {
        players: vec![AgentProfile::new(PolicyTag::Greedy, 0), AgentProfile::new(PolicyTag::Random, 0)],
        games_per_pair: 50,
        seed: 2024,
        mode: Mode::TurnBased,
        scenario: Scenario::default(),
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let outcomes = run_tournament(&config).unwrap();
    let elapsed = started.elapsed();
    let board = rating::run_tournament(&outcomes, &RatingParams::default(), 100, 6).unwrap();
    let greedy = board.row("greedy:0").unwrap();
    let ordered = board.per_ordering.iter().all(|o| {
        o.ser["greedy:0"] > o.ser["random:0"] && o.pwer["greedy:0"] > o.pwer["random:0"]
    });
    let ok = outcomes.len() == 50 && greedy.win_rate >= 0.9 && ordered && board.orderings == 100 && elapsed < Duration::from_secs(60);
    verdict(
        6,
        "skill-separability",
        ok,
        format!("greedy win rate {:.2} over {} games in {elapsed:?}, ordered in all {} shuffles: {ordered}", greedy.win_rate, outcomes.len(), board.orderings),
    );
}

fn scripted(mode: Mode, seed: u64, scenario: Scenario) -> MatchRecord {
    let config = MatchConfig::new(mode, seed, scenario);
    let mut red = AgentProfile::new(PolicyTag::Greedy, 1).build();
    let mut blue = AgentProfile::new(PolicyTag::Random, 1).build();
    run_match(&config, red.as_mut(), blue.as_mut()).unwrap()
}

#[test]
fn a07_deterministic_replay() {
    let mut notes = Vec::new();
    let mut ok = true;
    let dir = tempfile::tempdir().unwrap();
    for mode in [Mode::TurnBased, Mode::RealTime] {
        let digests: BTreeSet<(String, String)> = (0..10)
            .map(|_| {
                let r = scripted(mode, 42, Scenario::default());
                (r.footer.final_digest.clone(), r.sha256())
            })
            .collect();
        ok &= digests.len() == 1;
        notes.push(format!("{}: {} distinct of 10", mode.as_str(), digests.len()));

        let record = scripted(mode, 42, Scenario::default());
        let path = dir.path().join(format!("{}.jsonl", mode.as_str()));
        record.save(&path).unwrap();
        let clean = star_core::cli::main(["star", "replay", "verify", path.to_str().unwrap()]);

        let mut records = record.log.records().to_vec();
        let flip = records.iter_mut().find_map(|r| match r {
            LogRecord::Action { result, .. } if result.detail.get("casualties").is_some() => Some(result),
            _ => None,
        });
        let flip: &mut ActionResult = flip.expect("the match has a battle");
        let n = flip.detail["casualties"].as_u64().unwrap();
        flip.detail["casualties"] = json!(n + 1);
        let tampered = MatchRecord { log: ReplayLog::from_records(records), ..record.clone() };
        let bad = dir.path().join(format!("{}-tampered.jsonl", mode.as_str()));
        tampered.save(&bad).unwrap();
        let caught = star_core::cli::main(["star", "replay", "verify", bad.to_str().unwrap()]);
        ok &= clean == 0 && caught == 3;
        notes.push(format!("verify exit {clean}, tampered exit {caught}"));
    }
    verdict(7, "deterministic-replay", ok, notes.join(", "));
}

/// Every reported enemy stands on a visible tile, and enemy entries never
/// carry an exact count.
fn fog_violations(e: &Engine, f: Faction) -> usize {
    let visible = visible_cells(&e.world, f);
    let mut bad = 0;
    for level in [ObservationLevel::Basic, ObservationLevel::Detailed, ObservationLevel::Tactical] {
        let obs = e.observation(f, level);
        for enemy in &obs.known_enemy_units {
            let truth = e.world.registry.position_of(enemy.id);
            if truth != Some(enemy.position) || !visible.contains(&enemy.position) {
                bad += 1;
            }
        }
        let doc = serde_json::to_value(&obs).unwrap();
        for enemy in doc["known_enemy_units"].as_array().unwrap() {
            let keys: BTreeSet<&str> = enemy.as_object().unwrap().keys().map(String::as_str).collect();
            if keys != BTreeSet::from(["id", "type", "position", "estimate_count"]) {
                bad += 1;
            }
        }
    }
    bad
}

#[test]
fn a08_fog_of_war_soundness() {
    let mut violations = 0;
    let mut observations = 0;
    for seed in 0..100 {
        let config = MatchConfig::new(Mode::TurnBased, seed, Scenario::default());
        let mut engine = Engine::new(config.build_world().unwrap());
        let mut agents = BTreeMap::from([
            (engine.world.factions[0], AgentProfile::new(PolicyTag::Greedy, seed).build()),
            (engine.world.factions[1], AgentProfile::new(PolicyTag::Kiting, seed).build()),
        ]);
        while !engine.is_over() {
            let f = engine.world.active_faction.unwrap();
            let mut ended = false;
            for _ in 0..10 {
                violations += fog_violations(&engine, f) + fog_violations(&engine, engine.world.opponent(f).unwrap());
                observations += 6;
                let obs = engine.observation(f, ObservationLevel::Tactical);
                let batch = agents.get_mut(&f).unwrap().decide(&obs);
                for r in &batch {
                    let res = engine.execute(f, r, stamp(&engine));
                    ended = res.ok && r.action == "end_turn";
                    if !res.ok || ended || engine.is_over() {
                        break;
                    }
                }
                if batch.is_empty() || ended || engine.is_over() {
                    break;
                }
            }
            if !ended && !engine.is_over() {
                engine.force_end_turn(f, stamp(&engine));
            }
        }
    }
    verdict(8, "fog-of-war", violations == 0, format!("{violations} violations in {observations} observations over 100 matches"));
}

#[test]
fn a09_phase_enforcement() {
    let config = MatchConfig::new(Mode::TurnBased, 9, Scenario::default());
    let mut e = Engine::new(config.build_world().unwrap());
    let [active, idle] = e.world.factions;
    assert_eq!(e.world.active_faction, Some(active));
    let own = e.world.registry.units_of(idle);
    let theirs = e.world.registry.units_of(active);
    let size = e.world.terrain.size();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let before = e.digest();
    let mut rejected = 0;
    for _ in 0..1000 {
        let unit = own.choose(&mut rng).unwrap().0;
        let cell = size.coord(rng.gen_range(0..size.cell_count()));
        let pos = json!({"col": cell.col, "row": cell.row});
        let r = match rng.gen_range(0..7) {
            0 => req("move", json!({"unit_id": unit, "target_position": pos})),
            1 => req("attack", json!({"unit_id": unit, "target_id": theirs.choose(&mut rng).unwrap().0})),
            2 => req("rest", json!({"unit_id": unit})),
            3 => req("occupy", json!({"unit_id": unit, "position": pos})),
            4 => req("fortify", json!({"unit_id": unit, "position": pos})),
            5 => req("skill", json!({"unit_id": unit, "skill_name": "ambush", "target": theirs[0].0})),
            _ => req("end_turn", json!({"faction": idle})),
        };
        let res = e.execute(idle, &r, stamp(&e));
        if !res.ok && res.error_code == Some(ErrorCode::NotYourTurn) {
            rejected += 1;
        }
    }
    let unchanged = e.digest() == before;
    verdict(9, "phase-enforcement", rejected == 1000 && unchanged, format!("{rejected}/1000 NotYourTurn, digest unchanged {unchanged}"));
}

/// Lock length in ms from the published constants: 0.5 s per move-cost
/// point, 1 s per attack, 0.5 s per support action.
fn lock_oracle(kind: ActionKind, cost: u64) -> u64 {
    match kind {
        ActionKind::Move => 500 * cost,
        ActionKind::Attack => 1000,
        _ => 500,
    }
}

fn busy_world(rng: &mut ChaCha8Rng) -> (Engine, Vec<EntityId>) {
    let mut scenario = Scenario { seed: rng.gen(), ..Scenario::default() };
    scenario.horizon.real_time_ms = u64::MAX / 4;
    let terrain = build_battlefield(&scenario).unwrap();
    let mut w = WorldState::new(Arc::new(scenario), terrain, Mode::RealTime);
    let mut land: Vec<HexCoord> = w
        .terrain
        .size()
        .cells()
        .filter(|c| hex_distance(*c, HexCoord::new(7, 7)) <= 4 && w.terrain.terrain(*c).is_land())
        .collect();
    land.shuffle(rng);
    let mut units = Vec::new();
    for (i, c) in land.iter().take(12).enumerate() {
        let f = if i % 2 == 0 { Faction::Wei } else { Faction::Shu };
        let t = [UnitType::Infantry, UnitType::Cavalry, UnitType::Archer][i % 3];
        units.push(w.spawn_unit(f, t, *c).unwrap());
    }
    (Engine::new(w), units)
}

#[test]
fn a10_throttle_timing() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut e, mut units) = busy_world(&mut rng);
    let tick = e.world.rules.real_time.tick_ms;
    let (mut checked, mut off) = (0, Vec::new());
    let mut kinds = BTreeSet::new();
    for _ in 0..1000 {
        if e.is_over() {
            (e, units) = busy_world(&mut rng);
        }
        units.retain(|u| e.world.registry.is_alive(*u));
        let unit = *units.choose(&mut rng).unwrap();
        let f = e.world.registry.faction_of(unit).unwrap();
        let at = e.world.registry.position_of(unit).unwrap();
        let cell = HexCoord::new(at.col + rng.gen_range(-3..=3), at.row + rng.gen_range(-3..=3));
        let pos = json!({"col": cell.col, "row": cell.row});
        let foe = units.iter().copied().filter(|u| e.world.registry.faction_of(*u) != Some(f)).collect::<Vec<_>>();
        let (kind, r) = match rng.gen_range(0..5) {
            0 | 1 => (ActionKind::Move, req("move", json!({"unit_id": unit.0, "target_position": pos}))),
            2 => match foe.choose(&mut rng) {
                Some(t) => (ActionKind::Attack, req("attack", json!({"unit_id": unit.0, "target_id": t.0}))),
                None => (ActionKind::Rest, req("rest", json!({"unit_id": unit.0}))),
            },
            3 => (ActionKind::Rest, req("rest", json!({"unit_id": unit.0}))),
            4 if rng.gen_bool(0.5) => (ActionKind::Occupy, req("occupy", json!({"unit_id": unit.0}))),
            _ => (ActionKind::Fortify, req("fortify", json!({"unit_id": unit.0}))),
        };
        let res = e.execute(f, &r, stamp(&e));
        if res.ok && !e.is_over() {
            let cost = res.detail["cost"].as_u64().unwrap_or(0);
            let expected = lock_oracle(kind, cost);
            let formula = action_lock_duration(kind, cost as u32, &e.world.rules.real_time).as_millis() as u64;
            let mut waited = 0;
            while e.validate(f, &Action::Rest { unit_id: unit }).is_err_and(|r| r.code == ErrorCode::UnitBusy) {
                e.advance_clock(tick).unwrap();
                waited += tick;
            }
            checked += 1;
            kinds.insert(kind);
            if waited.abs_diff(expected) > tick || formula != expected || res.lock_ms != Some(expected) {
                off.push((kind, cost, expected, waited));
            }
        }
        for _ in 0..rng.gen_range(0..5) {
            if !e.is_over() {
                e.advance_clock(tick).unwrap();
            }
        }
    }
    let ok = off.is_empty() && kinds.len() >= 4 && checked >= 100;
    verdict(10, "throttle-timing", ok, format!("{checked} locks over {} kinds, {} outside one tick {off:?}", kinds.len(), off.len()));
}

#[test]
fn a11_stats_fidelity() {
    let mut log = Vec::new();
    let mut push = |faction: Faction, action: &str, result: ActionResult, forced: bool, sent_at: Option<u64>| {
        log.push(LogRecord::Action {
            index: log.len() as u64,
            clock_ms: 0,
            faction,
            sent_at,
            received_at: 1_000,
            forced,
            request: req(action, json!({})),
            result,
            digest_before: None,
        });
    };
    let ok = || ActionResult::success(json!({}));
    let fail = |code: ErrorCode, spatial: bool| {
        let mut r = ActionResult::failure(&star_core::error::Rejection::new(code, "x"));
        r.spatial = spatial;
        r
    };
    // Wei: 8 calls, 2 failed of which 1 spatial, 3 successful unit actions.
    push(Faction::Wei, "move", ok(), false, Some(900));
    push(Faction::Wei, "attack", ok(), false, Some(980));
    push(Faction::Wei, "move", fail(ErrorCode::Blocked, true), false, Some(1_000));
    push(Faction::Wei, "observation", ok(), false, None);
    push(Faction::Wei, "get_faction_state", ok(), false, None);
    push(Faction::Wei, "fortify", ok(), false, None);
    push(Faction::Wei, "attack", fail(ErrorCode::InsufficientAp, false), false, None);
    push(Faction::Wei, "end_turn", ok(), false, None);
    // Ignored: engine-issued calls and the other faction.
    push(Faction::Wei, "end_turn", ok(), true, None);
    push(Faction::Shu, "move", fail(ErrorCode::OutOfBounds, true), false, None);
    let s = GameStats::from_log(&log, Faction::Wei);
    // 2/8 failed, 1/2 of failures spatial, 3 successful unit-control
    // actions, latency (100 + 20 + 0) / 3.
    let ok = s.total_calls == 8
        && s.failed_calls == 2
        && s.spatial_failed == 1
        && s.tce == 0.25
        && s.sae == 0.5
        && s.actions_per_game == 3
        && s.mean_latency_ms == Some(40.0);
    verdict(11, "stats-fidelity", ok, format!("{s:?}"));
}

fn random_envelope(rng: &mut ChaCha8Rng) -> Envelope {
    fn value(rng: &mut ChaCha8Rng, depth: u32) -> Value {
        match rng.gen_range(0..if depth > 2 { 5 } else { 7 }) {
            0 => Value::Null,
            1 => json!(rng.gen::<bool>()),
            2 => json!(rng.gen::<i64>()),
            3 => json!(rng.gen::<f64>() * 1e6 - 5e5),
            4 => json!((0..rng.gen_range(0..12)).map(|_| rng.gen_range(' '..='\u{2FF}')).collect::<String>()),
            5 => Value::Array((0..rng.gen_range(0..4)).map(|_| value(rng, depth + 1)).collect()),
            _ => Value::Object((0..rng.gen_range(0..4)).map(|i| (format!("k{}{i}", rng.gen::<u8>()), value(rng, depth + 1))).collect()),
        }
    }
    let t = *MsgType::ALL.choose(rng).unwrap();
    let mut e = Envelope::new(t, format!("agent-{}", rng.gen::<u16>()), "server", rng.gen(), rng.gen(), value(rng, 0));
    if rng.gen_bool(0.3) {
        e.received_at = Some(rng.gen());
    }
    e
}

#[test]
fn a12_protocol_robustness() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let round_trips = (0..1000)
        .filter(|_| {
            let e = random_envelope(&mut rng);
            let bytes = encode_envelope(&e).unwrap();
            decode_envelope(bytes.as_bytes()).as_ref() == Ok(&e) && encode_envelope(&e).unwrap() == bytes
        })
        .count();

    let config = MatchConfig::new(Mode::TurnBased, 12, Scenario::default());
    let mut hub = Hub::new(Engine::new(config.build_world().unwrap()));
    let register = json!({"msg_type": "REGISTER", "sender": "wei", "receiver": "server", "timestamp": 0, "seq": 1,
        "payload": {"faction": "wei", "agent_id": "wei"}});
    hub.receive(1, register.to_string().as_bytes(), 0);
    let before = hub.engine().digest();
    let valid = json!({"msg_type": "ACTION_REQUEST", "sender": "wei", "receiver": "server", "timestamp": 0, "seq": 2,
        "payload": {"actions": [{"action": "end_turn", "params": {"faction": "wei"}}]}})
    .to_string();
    let mut errors = 0;
    for i in 0..10_000u64 {
        let bytes: Vec<u8> = match i % 4 {
            0 => (0..rng.gen_range(0..200)).map(|_| rng.gen()).collect(),
            1 => valid.as_bytes()[..rng.gen_range(0..valid.len())].to_vec(),
            2 => valid.replace("ACTION_REQUEST", &format!("T{}", rng.gen::<u32>())).into_bytes(),
            _ => valid.replacen(["\"seq\":2,", "\"sender\":\"wei\","][rng.gen_range(0..2)], "", 1).into_bytes(),
        };
        let conn = 1 + rng.gen_range(0..3);
        let out = hub.receive(conn, &bytes, 0);
        errors += out.iter().filter(|o| matches!(o, star_core::protocol::Outbound::Send(_, e) if e.msg_type == MsgType::Error)).count();
    }
    let unchanged = hub.engine().digest() == before && hub.engine().log().records().len() == 1;
    let ok = round_trips == 1000 && unchanged && errors == 10_000;
    verdict(12, "protocol-robustness", ok, format!("{round_trips}/1000 round trips, {errors}/10000 fuzz errors, state unchanged {unchanged}"));
}
