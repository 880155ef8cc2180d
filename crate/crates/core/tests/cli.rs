//! The `star` commands end to end, through the library entry point.

use star_core::cli::{main, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use star_core::engine::MatchRecord;
use star_core::rating::read_outcomes;

fn run(args: &[&str]) -> i32 {
    main(std::iter::once("star").chain(args.iter().copied()))
}

#[test]
fn match_is_reproducible_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2).map(|i| dir.path().join(format!("m{i}.jsonl")).display().to_string()).collect();
    for p in &paths {
        let code = run(&["match", "--red", "greedy:1", "--blue", "random:1", "--mode", "turn", "--seed", "42", "--out", p]);
        assert_eq!(code, EXIT_OK);
    }
    let records: Vec<MatchRecord> = paths.iter().map(|p| MatchRecord::load(p).unwrap()).collect();
    assert_eq!(records[0].sha256(), records[1].sha256());
    assert_eq!(run(&["replay", "verify", &paths[0]]), EXIT_OK);

    let mut text = std::fs::read_to_string(&paths[0]).unwrap();
    text = text.replacen("\"ok\":true", "\"ok\":false", 1);
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(run(&["replay", "verify", bad.to_str().unwrap()]), EXIT_MISMATCH);
}

#[test]
fn tournament_then_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("outcomes.jsonl");
    let out_s = out.to_str().unwrap();
    let args = ["tournament", "--players", "random,greedy,kiting", "--games-per-pair", "2", "--seed", "1", "--out", out_s];
    assert_eq!(run(&args), EXIT_OK);
    let outcomes = read_outcomes(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(outcomes.len(), 6);
    let board = dir.path().join("board.json");
    let code = run(&["rate", "--in", out_s, "--alpha", "0.5", "--beta", "0.5", "--orderings", "20", "--out", board.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let board: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(board).unwrap()).unwrap();
    assert_eq!(board["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["match", "--red", "nobody", "--blue", "random"]), EXIT_USAGE);
    assert_eq!(run(&["rate", "--in", "x", "--bogus"]), EXIT_USAGE);
    assert_eq!(run(&["tournament", "--players", "greedy", "--out", "/dev/null"]), EXIT_USAGE);
    assert_eq!(run(&["rate", "--in", "x", "--k=-1"]), EXIT_USAGE);
}
