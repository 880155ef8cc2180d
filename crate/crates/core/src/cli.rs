//! Operator commands behind the `star` binary.
//!
//! Every command writes its artefacts to files and ends with one
//! `summary:` line of space-separated `key=value` pairs on stdout. Exit codes:
//! 0 success, 1 usage error, 2 runtime failure, 3 replay mismatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::agents::AgentProfile;
use crate::engine::{run_match, run_tournament, verify, MatchConfig, MatchRecord, TournamentConfig, VerifyError};
use crate::protocol::{default_addr, Server};
use crate::rating::{self, RatingParams};
use crate::rules::Outcome;
use crate::scenario::Scenario;
use crate::world::Mode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "star", version, about = "Hex wargame benchmark engine: matches, tournaments, replays and ratings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Host one match over WebSocket and wait for two agents.
    Serve(ServeArgs),
    /// Run one match between scripted agents.
    Match(MatchArgs),
    /// Round-robin between scripted agents; writes one outcome per line.
    Tournament(TournamentArgs),
    /// Replay tools.
    Replay {
        #[command(subcommand)]
        command: ReplayCommand,
    },
    /// Compute the leaderboard from an outcomes file.
    Rate(RateArgs),
}

#[derive(Subcommand, Debug)]
pub enum ReplayCommand {
    /// Re-execute a match record and compare every result and digest.
    Verify { file: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(alias = "turn-based", alias = "turn_based")]
    Turn,
    #[value(alias = "real-time", alias = "real_time")]
    Real,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Turn => Mode::TurnBased,
            ModeArg::Real => Mode::RealTime,
        }
    }
}

#[derive(Args, Debug)]
pub struct ScenarioArg {
    /// Scenario TOML; the built-in standard scenario when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<Scenario, String> {
        match &self.scenario {
            None => Ok(Scenario::default()),
            Some(p) => Scenario::load(p).map_err(|e| format!("{}: {e}", p.display())),
        }
    }
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, value_enum, default_value = "turn")]
    pub mode: ModeArg,
    /// Listening port; `STAR_PORT` or 8765 when absent.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[command(flatten)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the match record.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Give up after this many seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    /// `random|greedy|kiting[:SEED]`
    #[arg(long)]
    pub red: AgentProfile,
    #[arg(long)]
    pub blue: AgentProfile,
    #[arg(long, value_enum, default_value = "turn")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub scenario: ScenarioArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TournamentArgs {
    /// Comma-separated agents, e.g. `random,greedy:1,kiting`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub players: Vec<AgentProfile>,
    #[arg(long, default_value_t = 10)]
    pub games_per_pair: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "turn")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub scenario: ScenarioArg,
    /// Parallel matches.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// Outcomes file, one JSON record per line.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 32.0)]
    pub k: f64,
    #[arg(long, default_value_t = 400.0)]
    pub xi: f64,
    #[arg(long, default_value_t = 100)]
    pub orderings: usize,
    /// Seeds the rating-order shuffles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the leaderboard as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_RUNTIME, message: e.to_string() }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, message: e.to_string() }
}

fn outcome_fields(o: &Outcome) -> String {
    let winner = o.winner.map_or("draw", |f| f.as_str());
    let reason = serde_json::to_value(o.terminal_reason).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    format!("winner={winner} reason={reason} duration={} u={:.4}", o.duration, o.surviving_fraction)
}

fn save_record(record: &MatchRecord, out: Option<&PathBuf>) -> Result<String, Failure> {
    match out {
        Some(p) => {
            record.save(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            Ok(format!(" out={}", p.display()))
        }
        None => Ok(String::new()),
    }
}

/// Run one command and return its summary line.
pub fn execute(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Serve(a) => {
            let scenario = a.scenario.load().map_err(usage)?;
            let config = MatchConfig::new(a.mode.into(), a.seed, scenario);
            let addr = match a.port {
                Some(p) => format!("{}:{p}", a.host),
                None => default_addr().replacen("127.0.0.1", &a.host, 1),
            };
            let server = Server::bind(&addr).map_err(|e| runtime(format!("{addr}: {e}")))?;
            let local = server.local_addr().map_err(runtime)?;
            eprintln!("listening on ws://{local}");
            let record = server.run(&config, a.timeout.map(Duration::from_secs)).map_err(runtime)?;
            let out = save_record(&record, a.out.as_ref())?;
            Ok(format!("summary: command=serve {} digest={}{out}", outcome_fields(&record.footer.outcome), record.footer.final_digest))
        }
        Command::Match(a) => {
            let scenario = a.scenario.load().map_err(usage)?;
            let config = MatchConfig::new(a.mode.into(), a.seed, scenario);
            let (mut red, mut blue) = (a.red.build(), a.blue.build());
            let record = run_match(&config, red.as_mut(), blue.as_mut()).map_err(runtime)?;
            let out = save_record(&record, a.out.as_ref())?;
            Ok(format!(
                "summary: command=match red={} blue={} {} digest={} record_sha256={}{out}",
                a.red,
                a.blue,
                outcome_fields(&record.footer.outcome),
                record.footer.final_digest,
                record.sha256()
            ))
        }
        Command::Tournament(a) => {
            let config = TournamentConfig {
                players: a.players,
                games_per_pair: a.games_per_pair,
                seed: a.seed,
                mode: a.mode.into(),
                scenario: a.scenario.load().map_err(usage)?,
                jobs: a.jobs,
            };
            let outcomes = run_tournament(&config).map_err(|e| match e {
                crate::engine::TournamentError::Match(_) => runtime(e),
                _ => usage(e),
            })?;
            let file = File::create(&a.out).map_err(|e| runtime(format!("{}: {e}", a.out.display())))?;
            rating::write_outcomes(&outcomes, BufWriter::new(file)).map_err(runtime)?;
            let draws = outcomes.iter().filter(|o| o.s_a == 0.5).count();
            Ok(format!("summary: command=tournament games={} draws={draws} out={}", outcomes.len(), a.out.display()))
        }
        Command::Replay { command: ReplayCommand::Verify { file } } => {
            let record = MatchRecord::load(&file).map_err(|e| runtime(format!("{}: {e}", file.display())))?;
            match verify(&record) {
                Ok(r) => Ok(format!(
                    "summary: command=replay-verify status=ok records={} checkpoints={} digest={}",
                    r.records, r.checkpoints, r.final_digest
                )),
                Err(e @ VerifyError::Mismatch { .. }) => Err(Failure { code: EXIT_MISMATCH, message: e.to_string() }),
                Err(e) => Err(runtime(e)),
            }
        }
        Command::Rate(a) => {
            let params = RatingParams { k: a.k, xi: a.xi, alpha: a.alpha, beta: a.beta, ..RatingParams::default() };
            params.validate().map_err(usage)?;
            let file = File::open(&a.input).map_err(|e| runtime(format!("{}: {e}", a.input.display())))?;
            let outcomes = rating::read_outcomes(BufReader::new(file)).map_err(runtime)?;
            let board = rating::run_tournament(&outcomes, &params, a.orderings, a.seed).map_err(runtime)?;
            print!("{}", board.render());
            if let Some(p) = &a.out {
                let text = serde_json::to_string_pretty(&board).map_err(runtime)?;
                std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            }
            let leader = &board.rows[0];
            Ok(format!(
                "summary: command=rate players={} games={} orderings={} leader={} pwer={:.2} ser={:.2}",
                board.rows.len(),
                outcomes.len(),
                board.orderings,
                leader.player,
                leader.pwer,
                leader.ser
            ))
        }
    }
}

/// Parse `args`, run, print the summary or the diagnostic, and return the
/// exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(f) => {
            eprintln!("star: {}", f.message);
            f.code
        }
    }
}
