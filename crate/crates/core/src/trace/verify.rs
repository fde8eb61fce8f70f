//! Independent replay of traces through the rule modules only.

use std::path::Path;

use thiserror::Error;

use super::{
    arena_footer, board_footer, weights_footer, Actor, GameKind, MatchTrace, TraceAction, TraceFooter,
    TraceParseError, TraceRecord,
};
use crate::arena::{new_arena, ArenaParams, ArenaVariant};
use crate::board::{BoardParams, BoardState, Verdict};
use crate::weights::{WeightMove, WeightParams, WeightPlayer, WeightState, WeightVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("cannot read trace: {0}")]
    Io(String),
    #[error(transparent)]
    Parse(#[from] TraceParseError),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: rule violation {code}: {reason}")]
    Violation { line: usize, code: String, reason: String },
    #[error("footer does not match the replay: {0}")]
    Footer(String),
    #[error("body hash does not match the recorded sha256")]
    Hash,
}

impl VerifyError {
    pub fn is_rule_violation(&self) -> bool {
        matches!(self, VerifyError::Violation { .. })
    }
}

/// What a successful replay established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verified {
    pub kind: GameKind,
    pub records: usize,
    pub footer: TraceFooter,
    /// Set when the trace legitimately ends on an illegal move, as a match
    /// stopped by a rule violation does; holds that line and its reason.
    pub final_violation: Option<(usize, String)>,
}

struct Stop {
    index: usize,
    code: String,
    reason: String,
    footer: TraceFooter,
}

pub fn verify_trace(path: &Path) -> Result<Verified, VerifyError> {
    let bytes = std::fs::read(path).map_err(|e| VerifyError::Io(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|_| TraceParseError::Encoding)?;
    verify_text(&text)
}

pub fn verify_text(text: &str) -> Result<Verified, VerifyError> {
    let (trace, hash) = MatchTrace::parse(text)?;
    let first_record_line = 3 + trace.header.params.len();
    let line_of = |i: usize| first_record_line + i;
    let result = match trace.header.kind {
        GameKind::Board => replay_board(&trace, &line_of),
        GameKind::Arena => replay_arena(&trace, &line_of),
        GameKind::Weights => replay_weights(&trace, &line_of),
    }?;
    let (footer, final_violation) = match result {
        Ok(footer) => (footer, None),
        Err(stop) => {
            let line = line_of(stop.index);
            if stop.index + 1 != trace.records.len() || stop.footer != trace.footer {
                return Err(VerifyError::Violation { line, code: stop.code, reason: stop.reason });
            }
            (stop.footer, Some((line, format!("{}: {}", stop.code, stop.reason))))
        }
    };
    if footer != trace.footer {
        return Err(VerifyError::Footer(describe_mismatch(&footer, &trace.footer)));
    }
    if trace.body_hash() != hash {
        return Err(VerifyError::Hash);
    }
    Ok(Verified { kind: trace.header.kind, records: trace.records.len(), footer, final_violation })
}

fn describe_mismatch(replayed: &TraceFooter, recorded: &TraceFooter) -> String {
    if replayed.verdicts != recorded.verdicts {
        return format!("replayed verdict `{}`, recorded `{}`", replayed.verdicts.join("; "), recorded.verdicts.join("; "));
    }
    for (a, b) in replayed.digest.iter().zip(&recorded.digest) {
        if a != b {
            return format!("digest {} replayed as {}, recorded {} {}", a.0, a.1, b.0, b.1);
        }
    }
    "digest entries differ in number".into()
}

fn param<'a>(trace: &'a MatchTrace, key: &str) -> Result<&'a str, VerifyError> {
    trace.header.get(key).ok_or_else(|| VerifyError::Malformed { line: 3, msg: format!("missing param {key}") })
}

fn parse_param<T: std::str::FromStr>(trace: &MatchTrace, key: &str) -> Result<T, VerifyError> {
    let v = param(trace, key)?;
    v.parse().map_err(|_| VerifyError::Malformed { line: 3, msg: format!("bad value `{v}` for param {key}") })
}

type Replay = Result<Result<TraceFooter, Stop>, VerifyError>;

fn replay_board(trace: &MatchTrace, line_of: &dyn Fn(usize) -> usize) -> Replay {
    let n: u32 = parse_param(trace, "n")?;
    let params = BoardParams::new(n).map_err(|e| VerifyError::Malformed { line: 3, msg: e.to_string() })?;
    let mut state = BoardState::new(params);
    for (i, r) in trace.records.iter().enumerate() {
        let malformed = |msg: &str| VerifyError::Malformed { line: line_of(i), msg: msg.into() };
        if r.k != i as u64 || r.board.is_some() {
            return Err(malformed("move index out of sequence or unexpected board tag"));
        }
        let player = r.actor.board_player().ok_or_else(|| malformed("not a board player"))?;
        if (i % 2 == 0) != (player == crate::board::Player::White) {
            return Err(malformed("players must alternate, White first"));
        }
        let mv = r.action.to_board(player).ok_or_else(|| malformed("not a board action"))?;
        if let Err(v) = state.apply_move(player, &mv) {
            let verdict = Verdict::RuleViolation { player, code: v.code, reason: v.reason.clone() };
            return Ok(Err(Stop {
                index: i,
                code: v.code.to_string(),
                reason: v.reason,
                footer: board_footer(&state, &verdict),
            }));
        }
    }
    Ok(Ok(board_footer(&state, &state.verdict())))
}

fn replay_arena(trace: &MatchTrace, line_of: &dyn Fn(usize) -> usize) -> Replay {
    let n_min: u32 = parse_param(trace, "n_min")?;
    let n_max: u32 = parse_param(trace, "n_max")?;
    let variant = ArenaVariant::parse(param(trace, "variant")?)
        .ok_or_else(|| VerifyError::Malformed { line: 3, msg: "unknown arena variant".into() })?;
    let params = ArenaParams::new(n_min, n_max, variant)
        .map_err(|e| VerifyError::Malformed { line: 3, msg: e.to_string() })?;
    let mut state = new_arena(params);
    let mut last_k = 0;
    for (i, r) in trace.records.iter().enumerate() {
        let malformed = |msg: &str| VerifyError::Malformed { line: line_of(i), msg: msg.into() };
        if r.k < last_k {
            return Err(malformed("round index decreases"));
        }
        last_k = r.k;
        let n = r.board.ok_or_else(|| malformed("arena records need a board tag"))?;
        let player = r.actor.board_player().ok_or_else(|| malformed("not a board player"))?;
        let mv = r.action.to_board(player).ok_or_else(|| malformed("not a board action"))?;
        if let Err(v) = state.arena_apply(n, player, &mv) {
            return Ok(Err(Stop {
                index: i,
                code: v.code.to_string(),
                reason: v.reason.clone(),
                footer: arena_footer(&state, Some(&v)),
            }));
        }
    }
    Ok(Ok(arena_footer(&state, None)))
}

fn weight_move(r: &TraceRecord) -> Option<WeightMove> {
    Some(match &r.action {
        TraceAction::Pass => WeightMove::Pass,
        TraceAction::RaiseA(e, v) => WeightMove::RaiseA { element: *e, value: v.clone() },
        TraceAction::RaiseB(j, v) => WeightMove::RaiseB { set: *j, value: v.clone() },
        TraceAction::Disable(e) => WeightMove::Disable(*e),
        _ => return None,
    })
}

fn replay_weights(trace: &MatchTrace, line_of: &dyn Fn(usize) -> usize) -> Replay {
    let c: u32 = parse_param(trace, "c")?;
    let sizes = param(trace, "sizes")?
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<u64>, _>>()
        .map_err(|_| VerifyError::Malformed { line: 3, msg: "bad set sizes".into() })?;
    let params = WeightParams::new(c, sizes).map_err(|e| VerifyError::Malformed { line: 3, msg: e.to_string() })?;
    let mut state = WeightState::new(params);
    let records = &trace.records;
    let mut i = 0;
    let mut batch_index = 0u64;
    while i < records.len() {
        let (k, actor) = (records[i].k, records[i].actor);
        let head = i;
        let malformed = |msg: &str| VerifyError::Malformed { line: line_of(head), msg: msg.into() };
        let player = match actor {
            Actor::Alice => WeightPlayer::Alice,
            Actor::Bob => WeightPlayer::Bob,
            _ => return Err(malformed("not a weight-game player")),
        };
        if k != batch_index || (k % 2 == 0) != (player == WeightPlayer::Alice) || records[i].board.is_some() {
            return Err(malformed("batch out of sequence; Alice plays even batches, Bob odd"));
        }
        let start = i;
        let mut batch = Vec::new();
        while i < records.len() && records[i].k == k && records[i].actor == actor {
            let mv = weight_move(&records[i])
                .ok_or_else(|| VerifyError::Malformed { line: line_of(i), msg: "not a weight-game action".into() })?;
            if mv == WeightMove::Pass && i > start {
                return Err(VerifyError::Malformed { line: line_of(i), msg: "pass inside a batch".into() });
            }
            batch.push(mv);
            i += 1;
        }
        if batch.len() > 1 && batch[0] == WeightMove::Pass {
            return Err(malformed("pass inside a batch"));
        }
        if let Err(v) = state.apply_weight_moves(player, &batch) {
            let verdict = WeightVerdict::RuleViolation { player, code: v.code, reason: v.reason.clone() };
            return Ok(Err(Stop {
                index: i - 1,
                code: v.code.to_string(),
                reason: v.reason,
                footer: weights_footer(&state, &verdict, batch_index),
            }));
        }
        batch_index += 1;
    }
    Ok(Ok(weights_footer(&state, &state.verdict(), batch_index)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{Cell, MoveAction, Player};
    use crate::strategy::{play_match, Adversary, AdversaryKind, MatchLimits, WhiteStrategy};

    fn greedy_trace(n: u32) -> MatchTrace {
        let mut w = WhiteStrategy::default();
        let mut b = Adversary::new(AdversaryKind::GreedyKiller);
        play_match(BoardParams::new(n).unwrap(), &mut w, &mut b, MatchLimits::default()).trace
    }

    #[test]
    fn round_trip_verifies() {
        let t = greedy_trace(4);
        let v = verify_text(&t.to_text()).unwrap();
        assert_eq!(v.footer, t.footer);
        assert!(v.final_violation.is_none());
    }

    #[test]
    fn forged_black_pawn_is_caught_at_its_line() {
        let mut w = WhiteStrategy::default();
        let mut b = Adversary::new(AdversaryKind::Scripted(vec![MoveAction::PlaceBlack(Cell::new(3, 0))]));
        let mut t = play_match(BoardParams::new(2).unwrap(), &mut w, &mut b, MatchLimits::default()).trace;
        // replace Black's second move (a pass) by another row-0 pawn
        let idx = t.records.iter().position(|r| r.k == 3).unwrap();
        t.records[idx] = TraceRecord::board(3, Player::Black, None, MoveAction::PlaceBlack(Cell::new(2, 0)));
        let err = verify_text(&t.to_text()).unwrap_err();
        match err {
            VerifyError::Violation { line, code, .. } => {
                assert_eq!(code, "RowBudgetBlack");
                assert_eq!(line, 3 + t.header.params.len() + idx);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn edited_footer_fails() {
        let text = greedy_trace(3).to_text().replace("verdict WhiteWins", "verdict BlackWins");
        assert!(matches!(verify_text(&text), Err(VerifyError::Footer(_))));
    }
}
