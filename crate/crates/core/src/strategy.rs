//! White's column-scanning strategy, the Black adversary suite, and the
//! match runner that turns the formally infinite game into a finite one.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::board::{row_budget, BoardParams, BoardState, Cell, MoveAction, Player, Verdict, ViolationCode};
use crate::lab::{ApproxTable, Discipline, LabConfig, ProgramRecord};
use crate::trace::{GameKind, MatchTrace, TraceAction, TraceHeader, TraceRecord};

/// White's bookkeeping: the column she is working on and the pawn she is
/// defending there.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WhiteMemory {
    pub current_column: Option<u64>,
    pub current_pawn: Option<Cell>,
    pub next_column: u64,
    pub columns_visited: BTreeSet<u64>,
}

/// Topmost cell of `column` that is not blackened.
fn topmost_free(state: &BoardState, column: u64, below: u32) -> Option<u32> {
    (0..below).rev().find(|&r| !state.is_blackened(Cell::new(column, r)))
}

/// One move of White's strategy.
///
/// White waits while her newest pawn lives. If its cell is blackened she
/// steps down to the highest free cell below; once a black pawn lands below
/// it she moves right to the next column without a black pawn and starts at
/// its topmost free cell. Out of columns, she passes.
pub fn white_next_move(state: &BoardState, memory: &mut WhiteMemory) -> MoveAction {
    if let Some(p) = memory.current_pawn {
        if !state.black_below(p.column, p.row) {
            if !state.is_blackened(p) {
                return MoveAction::Pass;
            }
            if let Some(r) = topmost_free(state, p.column, p.row) {
                let cell = Cell::new(p.column, r);
                memory.current_pawn = Some(cell);
                return MoveAction::PlaceWhite(cell);
            }
        }
    }
    let n = state.n();
    for column in memory.next_column..state.params().columns() {
        if state.lowest_black(column).is_some() {
            continue;
        }
        let Some(row) = topmost_free(state, column, n) else { continue };
        let cell = Cell::new(column, row);
        memory.current_column = Some(column);
        memory.current_pawn = Some(cell);
        memory.next_column = column + 1;
        memory.columns_visited.insert(column);
        return MoveAction::PlaceWhite(cell);
    }
    memory.next_column = state.params().columns();
    memory.current_pawn = None;
    MoveAction::Pass
}

pub trait WhitePlayer {
    fn name(&self) -> String;
    fn next_move(&mut self, state: &BoardState) -> MoveAction;
}

#[derive(Debug, Clone, Default)]
pub struct WhiteStrategy {
    pub memory: WhiteMemory,
}

impl WhitePlayer for WhiteStrategy {
    fn name(&self) -> String {
        "scan".into()
    }

    fn next_move(&mut self, state: &BoardState) -> MoveAction {
        white_next_move(state, &mut self.memory)
    }
}

/// Plays a fixed list of moves, then passes.
#[derive(Debug, Clone)]
pub struct ScriptedWhite {
    moves: VecDeque<MoveAction>,
}

impl ScriptedWhite {
    pub fn new(moves: Vec<MoveAction>) -> Self {
        Self { moves: moves.into() }
    }
}

impl WhitePlayer for ScriptedWhite {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn next_move(&mut self, _state: &BoardState) -> MoveAction {
        self.moves.pop_front().unwrap_or(MoveAction::Pass)
    }
}

pub trait BlackPlayer {
    fn name(&self) -> String;
    fn next_move(&mut self, state: &BoardState) -> MoveAction;
    /// True while a pass does not mean the player has finished, e.g. a
    /// semicomputable player still has search stages to run.
    fn may_act_later(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub enum AdversaryKind {
    RandomBlack { seed: u64 },
    GreedyKiller,
    BudgetExhauster,
    /// Drives Black from a complexity lab: blackens `(x, i)` once a short
    /// program for `i` given `x` shows up and places a pawn on `(x, i)` for a
    /// program of length `i` printing `x` given the board height.
    Semicomputable(LabConfig),
    Scripted(Vec<MoveAction>),
}

impl AdversaryKind {
    pub fn label(&self) -> String {
        match self {
            AdversaryKind::RandomBlack { seed } => format!("random:{seed}"),
            AdversaryKind::GreedyKiller => "greedy".into(),
            AdversaryKind::BudgetExhauster => "exhauster".into(),
            AdversaryKind::Semicomputable(_) => "semi".into(),
            AdversaryKind::Scripted(_) => "scripted".into(),
        }
    }
}

/// Probability of a pass in the random adversary's menu.
pub const RANDOM_PASS_PROBABILITY: f64 = 0.0625;

pub struct Adversary {
    kind: AdversaryKind,
    rng: ChaCha8Rng,
    script: VecDeque<MoveAction>,
    lab: Option<ApproxTable>,
    queue: VecDeque<MoveAction>,
    pub rejected: Vec<(MoveAction, ViolationCode)>,
}

impl Adversary {
    pub fn new(kind: AdversaryKind) -> Self {
        let seed = match kind {
            AdversaryKind::RandomBlack { seed } => seed,
            _ => 0,
        };
        let script = match &kind {
            AdversaryKind::Scripted(m) => m.clone().into(),
            _ => VecDeque::new(),
        };
        let lab = match &kind {
            AdversaryKind::Semicomputable(cfg) => Some(ApproxTable::new(cfg.clone())),
            _ => None,
        };
        Self { kind, rng: ChaCha8Rng::seed_from_u64(seed), script, lab, queue: VecDeque::new(), rejected: Vec::new() }
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    pub fn lab(&self) -> Option<&ApproxTable> {
        self.lab.as_ref()
    }
}

/// Lab configuration the single-board semicomputable Black needs on `G_n`:
/// every column string as a condition, plus the height itself.
pub fn semicomputable_lab_config(n: u32) -> LabConfig {
    let mut pool: Vec<BitString> = BitString::all_of_len(n as usize).collect();
    pool.push(BitString::from_natural(n as u64));
    LabConfig {
        max_len: n as usize,
        step_cap: n as u64,
        cond_pool: pool,
        cond_max_len: (n as usize).saturating_sub(1).max(blacken_threshold(n).max(0) as usize),
        prefix: false,
        ..LabConfig::default()
    }
}

/// Blackening threshold on `G_n`: `(x, i)` is blackened once the bound on
/// `C(i|x)` drops below `log2(n) - 1`. For integer bounds this is exactly
/// `bound < ceil(log2 n) - 1`.
pub fn blacken_threshold(n: u32) -> i64 {
    let ceil_log = 64 - (n as u64).saturating_sub(1).leading_zeros() as i64;
    ceil_log - 1
}

/// Where pawn-placing discoveries come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PawnSource {
    /// Plain programs run on the board height (single board `G_n`).
    PlainGivenHeight,
    /// Unconditional plain programs (all boards at once).
    Plain,
    /// Unconditional prefix-free programs.
    Prefix,
}

/// Converts fresh lab discoveries into Black actions on the boards with
/// heights in `heights`. Callers still validate each action.
pub fn semicomputable_black_actions(
    records: &[ProgramRecord],
    heights: std::ops::RangeInclusive<u32>,
    source: &PawnSource,
) -> Vec<(u32, MoveAction)> {
    let mut out = Vec::new();
    for r in records {
        let len = r.program.len();
        if r.discipline == Discipline::Plain && !r.condition.is_empty() {
            // Conditional bound C(i | x) with n = |x|.
            let n = r.condition.len() as u32;
            if heights.contains(&n) && (len as i64) < blacken_threshold(n) {
                if let Some(i) = r.output.to_natural() {
                    if i < n as u64 {
                        out.push((n, MoveAction::Blacken(Cell::new(r.condition.to_column(), i as u32))));
                    }
                }
            }
        }
        let pawn = match source {
            PawnSource::PlainGivenHeight => {
                r.discipline == Discipline::Plain
                    && r.condition.to_natural() == Some(r.output.len() as u64)
            }
            PawnSource::Plain => r.discipline == Discipline::Plain && r.condition.is_empty(),
            PawnSource::Prefix => r.discipline == Discipline::PrefixFree,
        };
        let n = r.output.len() as u32;
        if pawn && heights.contains(&n) && len < n as usize {
            out.push((n, MoveAction::PlaceBlack(Cell::new(r.output.to_column(), len as u32))));
        }
    }
    out
}

/// The greedy reply to White's newest live pawn: blacken it while the
/// column allows, otherwise drop a pawn on the highest row below it that
/// `can_place` accepts.
pub fn greedy_reply(state: &BoardState, can_place: impl Fn(u32) -> bool) -> MoveAction {
    let Some(target) = state.newest_alive_white() else {
        return MoveAction::Pass;
    };
    if state.blackened_count(target.column) < state.params().blacken_budget() {
        return MoveAction::Blacken(target);
    }
    (0..target.row)
        .rev()
        .map(|r| Cell::new(target.column, r))
        .find(|&c| !state.has_black(c) && can_place(c.row))
        .map_or(MoveAction::Pass, MoveAction::PlaceBlack)
}

fn row_has_room(state: &BoardState, row: u32) -> bool {
    !state.rules().black_row_budget || state.black_per_row()[row as usize] < row_budget(row)
}

impl Adversary {
    /// One move for this adversary. Never returns an illegal move.
    pub fn adversary_next_move(&mut self, state: &BoardState) -> MoveAction {
        let mv = match &self.kind {
            AdversaryKind::GreedyKiller => greedy_reply(state, |r| row_has_room(state, r)),
            AdversaryKind::BudgetExhauster => self.exhaust(state),
            AdversaryKind::RandomBlack { .. } => self.random(state),
            AdversaryKind::Scripted(_) => return self.script.pop_front().unwrap_or(MoveAction::Pass),
            AdversaryKind::Semicomputable(_) => return self.semicomputable(state),
        };
        debug_assert!(state.validate_move(Player::Black, &mv).is_ok());
        mv
    }

    fn exhaust(&self, state: &BoardState) -> MoveAction {
        let frontier = state.newest_alive_white().map_or(0, |c| c.column);
        for row in 0..state.n() {
            if !row_has_room(state, row) {
                continue;
            }
            if let Some(c) = (0..frontier).map(|c| Cell::new(c, row)).find(|&c| !state.has_black(c)) {
                return MoveAction::PlaceBlack(c);
            }
        }
        greedy_reply(state, |r| row_has_room(state, r))
    }

    fn random(&mut self, state: &BoardState) -> MoveAction {
        if self.rng.gen_bool(RANDOM_PASS_PROBABILITY) {
            return MoveAction::Pass;
        }
        let mut columns: BTreeSet<u64> = state.white().iter().map(|c| c.column).collect();
        let fresh = columns.last().map_or(0, |&c| c + 1);
        if fresh < state.params().columns() {
            columns.insert(fresh);
        }
        let mut menu = Vec::new();
        for &col in &columns {
            for row in 0..state.n() {
                let cell = Cell::new(col, row);
                for mv in [MoveAction::Blacken(cell), MoveAction::PlaceBlack(cell)] {
                    if state.is_legal(Player::Black, &mv) {
                        menu.push(mv);
                    }
                }
            }
        }
        menu.choose(&mut self.rng).copied().unwrap_or(MoveAction::Pass)
    }

    fn semicomputable(&mut self, state: &BoardState) -> MoveAction {
        loop {
            while let Some(mv) = self.queue.pop_front() {
                match state.validate_move(Player::Black, &mv) {
                    Ok(()) => return mv,
                    Err(v) => self.rejected.push((mv, v.code)),
                }
            }
            let lab = self.lab.as_mut().expect("semicomputable adversary owns a lab");
            if lab.is_exhausted() {
                return MoveAction::Pass;
            }
            let Ok(found) = lab.dovetail_stage() else {
                return MoveAction::Pass;
            };
            let n = state.n();
            self.queue.extend(
                semicomputable_black_actions(&found, n..=n, &PawnSource::PlainGivenHeight)
                    .into_iter()
                    .map(|(_, mv)| mv),
            );
            if self.queue.is_empty() {
                // A stage without news is still a turn.
                return MoveAction::Pass;
            }
        }
    }
}

impl BlackPlayer for Adversary {
    fn name(&self) -> String {
        self.kind.label()
    }

    fn next_move(&mut self, state: &BoardState) -> MoveAction {
        self.adversary_next_move(state)
    }

    fn may_act_later(&self) -> bool {
        !self.queue.is_empty() || self.lab.as_ref().is_some_and(|l| !l.is_exhausted())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchLimits {
    pub max_moves: u64,
    pub quiescence_rounds: u32,
}

impl MatchLimits {
    pub fn new(max_moves: u64, quiescence_rounds: u32) -> Self {
        assert!(max_moves >= 1 && quiescence_rounds >= 1, "limits must be positive");
        Self { max_moves, quiescence_rounds }
    }
}

impl Default for MatchLimits {
    fn default() -> Self {
        Self { max_moves: 10_000_000, quiescence_rounds: 2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchStats {
    pub moves: u64,
    /// Rows of every White placement, in order.
    pub white_rows: Vec<u32>,
    /// Ended by the move cap rather than quiescence.
    pub truncated: bool,
}

impl MatchStats {
    pub fn upper_half_violations(&self, params: BoardParams) -> usize {
        self.white_rows.iter().filter(|&&r| r < params.upper_half_floor()).count()
    }
}

#[derive(Debug, Clone)]
pub struct MatchOutcome {
    pub state: BoardState,
    pub verdict: Verdict,
    pub trace: MatchTrace,
    pub stats: MatchStats,
}

/// Alternates White and Black (White first) until both have passed for
/// `quiescence_rounds` consecutive rounds or the move cap is reached.
pub fn play_match(
    params: BoardParams,
    white: &mut dyn WhitePlayer,
    black: &mut dyn BlackPlayer,
    limits: MatchLimits,
) -> MatchOutcome {
    let header = TraceHeader::new(GameKind::Board)
        .with("n", params.n())
        .with("white", white.name())
        .with("black", black.name());
    let mut trace = MatchTrace::new(header);
    let mut state = BoardState::new(params);
    let mut stats = MatchStats::default();
    let mut quiet = 0u32;
    let mut violation = None;

    'game: while stats.moves < limits.max_moves {
        let mut round_passed = true;
        for player in [Player::White, Player::Black] {
            if stats.moves >= limits.max_moves {
                stats.truncated = true;
                break 'game;
            }
            let mv = match player {
                Player::White => white.next_move(&state),
                Player::Black => black.next_move(&state),
            };
            if let Err(v) = state.apply_move(player, &mv) {
                violation = Some(Verdict::RuleViolation { player, code: v.code, reason: v.reason });
                trace.push(TraceRecord::board(stats.moves, player, None, mv));
                break 'game;
            }
            if let MoveAction::PlaceWhite(c) = mv {
                stats.white_rows.push(c.row);
            }
            round_passed &= mv.is_pass();
            trace.push(TraceRecord::board(stats.moves, player, None, mv));
            stats.moves += 1;
        }
        if round_passed && !black.may_act_later() {
            quiet += 1;
            if quiet >= limits.quiescence_rounds {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if stats.moves >= limits.max_moves && violation.is_none() && quiet < limits.quiescence_rounds {
        stats.truncated = true;
    }
    let verdict = violation.unwrap_or_else(|| state.verdict());
    trace.seal_board(&state, &verdict);
    MatchOutcome { state, verdict, trace, stats }
}

/// Count of white pawns in each row with a black pawn strictly below them.
pub fn pawn_killed_per_row(state: &BoardState) -> Vec<u64> {
    let mut v = vec![0u64; state.n() as usize];
    for c in state.white() {
        if state.black_below(c.column, c.row) {
            v[c.row as usize] += 1;
        }
    }
    v
}

/// Verdict ordering from White's point of view; lower is worse.
pub fn verdict_rank(v: &Verdict) -> u8 {
    match v {
        Verdict::RuleViolation { player: Player::White, .. } => 0,
        Verdict::BlackWins => 1,
        Verdict::RuleViolation { player: Player::Black, .. } => 2,
        Verdict::WhiteWins(_) => 3,
    }
}

impl TraceAction {
    pub(crate) fn from_board(mv: MoveAction) -> Self {
        match mv {
            MoveAction::Pass => TraceAction::Pass,
            MoveAction::PlaceWhite(c) | MoveAction::PlaceBlack(c) => TraceAction::Place(c),
            MoveAction::Blacken(c) => TraceAction::Blacken(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32) -> BoardParams {
        BoardParams::new(n).unwrap()
    }

    #[test]
    fn white_opens_at_top_of_first_column() {
        let s = BoardState::new(params(4));
        let mut m = WhiteMemory::default();
        assert_eq!(white_next_move(&s, &mut m), MoveAction::PlaceWhite(Cell::new(0, 3)));
    }

    #[test]
    fn white_steps_down_after_blackening() {
        let mut s = BoardState::new(params(4));
        let mut m = WhiteMemory::default();
        let mv = white_next_move(&s, &mut m);
        s.apply_move(Player::White, &mv).unwrap();
        assert_eq!(white_next_move(&s, &mut m), MoveAction::Pass);
        s.apply_move(Player::Black, &MoveAction::Blacken(Cell::new(0, 3))).unwrap();
        assert_eq!(white_next_move(&s, &mut m), MoveAction::PlaceWhite(Cell::new(0, 2)));
    }

    #[test]
    fn white_skips_columns_with_black_pawns() {
        let mut s = BoardState::new(params(4));
        let mut m = WhiteMemory::default();
        let mv = white_next_move(&s, &mut m);
        s.apply_move(Player::White, &mv).unwrap();
        s.apply_move(Player::Black, &MoveAction::PlaceBlack(Cell::new(1, 3))).unwrap();
        s.apply_move(Player::Black, &MoveAction::PlaceBlack(Cell::new(0, 2))).unwrap();
        assert_eq!(white_next_move(&s, &mut m), MoveAction::PlaceWhite(Cell::new(2, 3)));
        assert_eq!(m.current_column, Some(2));
    }

    #[test]
    fn white_starts_below_preblackened_cells() {
        let mut s = BoardState::new(params(4));
        s.apply_move(Player::Black, &MoveAction::Blacken(Cell::new(0, 3))).unwrap();
        let mut m = WhiteMemory::default();
        assert_eq!(white_next_move(&s, &mut m), MoveAction::PlaceWhite(Cell::new(0, 2)));
    }

    #[test]
    fn greedy_blackens_then_places_below() {
        let mut s = BoardState::new(params(4));
        s.apply_move(Player::White, &MoveAction::PlaceWhite(Cell::new(0, 3))).unwrap();
        let mut g = Adversary::new(AdversaryKind::GreedyKiller);
        assert_eq!(g.adversary_next_move(&s), MoveAction::Blacken(Cell::new(0, 3)));
        s.apply_move(Player::Black, &MoveAction::Blacken(Cell::new(0, 3))).unwrap();
        s.apply_move(Player::White, &MoveAction::PlaceWhite(Cell::new(0, 2))).unwrap();
        s.apply_move(Player::Black, &MoveAction::Blacken(Cell::new(0, 2))).unwrap();
        s.apply_move(Player::White, &MoveAction::PlaceWhite(Cell::new(0, 1))).unwrap();
        assert_eq!(g.adversary_next_move(&s), MoveAction::PlaceBlack(Cell::new(0, 0)));
    }

    #[test]
    fn exhausted_budgets_mean_pass() {
        let mut s = BoardState::new(params(1));
        s.apply_move(Player::White, &MoveAction::PlaceWhite(Cell::new(0, 0))).unwrap();
        for kind in [AdversaryKind::GreedyKiller, AdversaryKind::BudgetExhauster] {
            assert_eq!(Adversary::new(kind).adversary_next_move(&s), MoveAction::Pass);
        }
    }

    #[test]
    fn threshold_matches_real_logarithm() {
        for n in 1u32..=64 {
            for bound in 0i64..8 {
                let exact = (bound as f64) < (n as f64).log2() - 1.0;
                assert_eq!(bound < blacken_threshold(n), exact, "n={n} bound={bound}");
            }
        }
    }

    #[test]
    fn passive_black_loses_to_first_pawn() {
        let mut w = WhiteStrategy::default();
        let mut b = Adversary::new(AdversaryKind::Scripted(vec![]));
        let out = play_match(params(4), &mut w, &mut b, MatchLimits::default());
        assert_eq!(out.verdict, Verdict::WhiteWins(vec![Cell::new(0, 3)]));
        assert!(!out.stats.truncated);
    }

    #[test]
    fn illegal_script_is_a_rule_violation() {
        let mut w = WhiteStrategy::default();
        let mut b = Adversary::new(AdversaryKind::Scripted(vec![
            MoveAction::PlaceBlack(Cell::new(5, 0)),
            MoveAction::PlaceBlack(Cell::new(6, 0)),
        ]));
        let out = play_match(params(4), &mut w, &mut b, MatchLimits::default());
        match out.verdict {
            Verdict::RuleViolation { player, code, .. } => {
                assert_eq!(player, Player::Black);
                assert_eq!(code, ViolationCode::RowBudgetBlack);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn greedy_match_on_four_rows() {
        let mut w = WhiteStrategy::default();
        let mut b = Adversary::new(AdversaryKind::GreedyKiller);
        let out = play_match(params(4), &mut w, &mut b, MatchLimits::default());
        assert!(out.verdict.is_white_win());
        assert_eq!(out.stats.upper_half_violations(params(4)), 0);
        assert!(out.state.budgets_hold() && out.state.counters_coherent());
    }
}
