//! Win rate, standard ELO (SER) and performance-weighted ELO (PWER).
//!
//! PWER scales the pairwise ELO step by `M = 1 + α·U + β·T`, where `U` is
//! the winner's surviving fraction and `T = 1 − min(t_game / t_max, 1)`
//! rewards fast wins. Both players move by the same scaled step, so PWER
//! conserves the rating sum like SER does.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::world::Mode;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatingParams {
    /// Update coefficient.
    pub k: f64,
    /// Logistic scale.
    pub xi: f64,
    /// Weight of unit preservation in M.
    pub alpha: f64,
    /// Weight of time efficiency in M.
    pub beta: f64,
    pub initial: f64,
}

impl Default for RatingParams {
    fn default() -> Self {
        Self { k: 32.0, xi: 400.0, alpha: 0.5, beta: 0.5, initial: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatingError {
    #[error("score must be 0, 0.5 or 1, got {0}")]
    InvalidScore(f64),
    #[error("a tournament needs at least two players, got {0}")]
    InsufficientPlayers(usize),
    #[error("invalid rating parameters: {0}")]
    InvalidParams(String),
}

impl RatingParams {
    pub fn validate(&self) -> Result<(), RatingError> {
        let ok = self.k > 0.0 && self.xi > 0.0 && self.alpha >= 0.0 && self.beta >= 0.0 && self.initial.is_finite();
        if ok {
            Ok(())
        } else {
            Err(RatingError::InvalidParams(format!("{self:?}: need k > 0, xi > 0, alpha >= 0, beta >= 0")))
        }
    }
}

/// Probability that A beats B.
pub fn expected_score(r_a: f64, r_b: f64, xi: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((r_b - r_a) / xi))
}

fn check_score(s: f64) -> Result<(), RatingError> {
    if s == 0.0 || s == 0.5 || s == 1.0 {
        Ok(())
    } else {
        Err(RatingError::InvalidScore(s))
    }
}

/// ELO step for A; B moves by the negation.
fn step(r_a: f64, r_b: f64, s_a: f64, k: f64, xi: f64) -> f64 {
    k * (s_a - expected_score(r_a, r_b, xi))
}

pub fn update_ser(r_a: f64, r_b: f64, s_a: f64, k: f64, xi: f64) -> Result<(f64, f64), RatingError> {
    check_score(s_a)?;
    let d = step(r_a, r_b, s_a, k, xi);
    Ok((r_a + d, r_b - d))
}

/// `1 + α·U + β·(1 − min(t_game / t_max, 1))`, with U clamped to [0, 1].
pub fn performance_multiplier(u: f64, t_game: f64, t_max: f64, alpha: f64, beta: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let t = if t_max > 0.0 { 1.0 - (t_game.max(0.0) / t_max).min(1.0) } else { 0.0 };
    1.0 + alpha * u + beta * t
}

/// One finished match between two named players.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcomeRecord {
    pub player_a: String,
    pub player_b: String,
    /// A's score: 1 win, 0.5 draw, 0 loss.
    pub s_a: f64,
    /// Winner's surviving fraction; 0 on a draw.
    pub u: f64,
    pub t_game: f64,
    pub t_max: f64,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_digest: Option<String>,
}

impl MatchOutcomeRecord {
    /// M for this match; 1 for a draw.
    pub fn multiplier(&self, p: &RatingParams) -> f64 {
        if self.s_a == 0.5 {
            1.0
        } else {
            performance_multiplier(self.u, self.t_game, self.t_max, p.alpha, p.beta)
        }
    }
}

pub fn update_pwer(r_a: f64, r_b: f64, o: &MatchOutcomeRecord, p: &RatingParams) -> Result<(f64, f64), RatingError> {
    check_score(o.s_a)?;
    let d = o.multiplier(p) * step(r_a, r_b, o.s_a, p.k, p.xi);
    Ok((r_a + d, r_b - d))
}

pub fn read_outcomes<R: BufRead>(input: R) -> io::Result<Vec<MatchOutcomeRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_outcomes<W: Write>(records: &[MatchOutcomeRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Final ratings after one pass over the stream in the given order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingResult {
    pub ser: BTreeMap<String, f64>,
    pub pwer: BTreeMap<String, f64>,
}

pub fn rate_stream<'a>(
    stream: impl IntoIterator<Item = &'a MatchOutcomeRecord>,
    players: &BTreeSet<String>,
    p: &RatingParams,
) -> Result<OrderingResult, RatingError> {
    let mut ser: BTreeMap<String, f64> = players.iter().map(|n| (n.clone(), p.initial)).collect();
    let mut pwer = ser.clone();
    for o in stream {
        let (a, b) = (ser[&o.player_a], ser[&o.player_b]);
        let (a, b) = update_ser(a, b, o.s_a, p.k, p.xi)?;
        ser.insert(o.player_a.clone(), a);
        ser.insert(o.player_b.clone(), b);
        let (a, b) = update_pwer(pwer[&o.player_a], pwer[&o.player_b], o, p)?;
        pwer.insert(o.player_a.clone(), a);
        pwer.insert(o.player_b.clone(), b);
    }
    Ok(OrderingResult { ser, pwer })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub player: String,
    pub pwer: f64,
    pub pwer_std: f64,
    pub ser: f64,
    pub ser_std: f64,
    pub win_rate: f64,
    pub games: u32,
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub params: RatingParams,
    pub orderings: usize,
    /// Sorted by PWER, then SER, then name.
    pub rows: Vec<LeaderboardRow>,
    #[serde(skip)]
    pub per_ordering: Vec<OrderingResult>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Rate a match stream. Ratings are the mean over `n_orderings` orderings of
/// the stream and the reported ± is their standard deviation. Orderings come
/// in pairs, a seeded shuffle and its reverse.
pub fn run_tournament(
    records: &[MatchOutcomeRecord],
    p: &RatingParams,
    n_orderings: usize,
    seed: u64,
) -> Result<Leaderboard, RatingError> {
    p.validate()?;
    for r in records {
        check_score(r.s_a)?;
    }
    let players: BTreeSet<String> = records.iter().flat_map(|r| [r.player_a.clone(), r.player_b.clone()]).collect();
    if players.len() < 2 {
        return Err(RatingError::InsufficientPlayers(players.len()));
    }
    let n_orderings = n_orderings.max(1);
    let mut rng = rng::stream(seed, "rating/orderings");
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut per_ordering = Vec::with_capacity(n_orderings);
    while per_ordering.len() < n_orderings {
        order.shuffle(&mut rng);
        per_ordering.push(rate_stream(order.iter().map(|i| &records[*i]), &players, p)?);
        if per_ordering.len() < n_orderings {
            per_ordering.push(rate_stream(order.iter().rev().map(|i| &records[*i]), &players, p)?);
        }
    }

    let mut rows: Vec<LeaderboardRow> = players
        .iter()
        .map(|name| {
            let sers: Vec<f64> = per_ordering.iter().map(|o| o.ser[name]).collect();
            let pwers: Vec<f64> = per_ordering.iter().map(|o| o.pwer[name]).collect();
            let (ser, ser_std) = mean_std(&sers);
            let (pwer, pwer_std) = mean_std(&pwers);
            let (mut wins, mut draws, mut losses) = (0, 0, 0);
            for r in records {
                let s = if r.player_a == *name {
                    r.s_a
                } else if r.player_b == *name {
                    1.0 - r.s_a
                } else {
                    continue;
                };
                match s {
                    1.0 => wins += 1,
                    0.0 => losses += 1,
                    _ => draws += 1,
                }
            }
            let games = wins + draws + losses;
            let win_rate = (f64::from(wins) + 0.5 * f64::from(draws)) / f64::from(games);
            LeaderboardRow { player: name.clone(), pwer, pwer_std, ser, ser_std, win_rate, games, wins, draws, losses }
        })
        .collect();
    rows.sort_by(|a, b| b.pwer.total_cmp(&a.pwer).then(b.ser.total_cmp(&a.ser)).then(a.player.cmp(&b.player)));
    Ok(Leaderboard { params: *p, orderings: per_ordering.len(), rows, per_ordering })
}

impl Leaderboard {
    pub fn row(&self, player: &str) -> Option<&LeaderboardRow> {
        self.rows.iter().find(|r| r.player == player)
    }

    /// Plain-text table in leaderboard order.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.player.len()).max().unwrap_or(6).max(6);
        let mut s = format!("{:<width$}  {:>16}  {:>16}  {:>8}  {:>5}\n", "player", "PWER", "SER", "win", "games");
        for r in &self.rows {
            s += &format!(
                "{:<width$}  {:>16}  {:>16}  {:>8.3}  {:>5}\n",
                r.player,
                format!("{:.1} ± {:.1}", r.pwer, r.pwer_std),
                format!("{:.1} ± {:.1}", r.ser, r.ser_std),
                r.win_rate,
                r.games
            );
        }
        s
    }
}
