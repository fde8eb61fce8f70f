//! All boards `G_n` for `n` in a finite range played at once, with Black's
//! budgets shared across boards: `2^i` pawns per row in the plain variant,
//! a Kraft budget `Σ 2^-row < 1` in the prefix variant.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::board::{
    row_budget, BoardError, BoardParams, BoardState, Cell, MoveAction, Player, Rules, Verdict, ViolationCode,
};
use crate::dyadic::Dyadic;
use crate::lab::{ApproxTable, LabConfig};
use crate::strategy::{
    blacken_threshold, greedy_reply, semicomputable_black_actions, white_next_move, MatchLimits, PawnSource,
    WhiteMemory,
};
use crate::bits::BitString;
use crate::trace::{GameKind, MatchTrace, TraceHeader, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArenaVariant {
    Plain,
    Prefix,
}

impl ArenaVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ArenaVariant::Plain => "plain",
            ArenaVariant::Prefix => "prefix",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plain" => Some(ArenaVariant::Plain),
            "prefix" => Some(ArenaVariant::Prefix),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArenaError {
    #[error("invalid board range {0}..={1}")]
    InvalidRange(u32, u32),
    #[error(transparent)]
    Board(#[from] BoardError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArenaParams {
    pub n_min: u32,
    pub n_max: u32,
    pub variant: ArenaVariant,
}

impl ArenaParams {
    pub fn new(n_min: u32, n_max: u32, variant: ArenaVariant) -> Result<Self, ArenaError> {
        if n_min < 1 || n_min > n_max {
            return Err(ArenaError::InvalidRange(n_min, n_max));
        }
        BoardParams::new(n_max)?;
        Ok(Self { n_min, n_max, variant })
    }

    pub fn heights(&self) -> std::ops::RangeInclusive<u32> {
        self.n_min..=self.n_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArenaViolationCode {
    Board(ViolationCode),
    GlobalRowBudget,
    KraftBudget,
    UnknownBoard,
}

impl ArenaViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ArenaViolationCode::Board(c) => c.as_str(),
            ArenaViolationCode::GlobalRowBudget => "GlobalRowBudget",
            ArenaViolationCode::KraftBudget => "KraftBudget",
            ArenaViolationCode::UnknownBoard => "UnknownBoard",
        }
    }

    /// Rejections a counting-sound Black should never cause.
    pub fn is_row_budget(&self) -> bool {
        matches!(
            self,
            ArenaViolationCode::Board(ViolationCode::RowBudgetBlack)
                | ArenaViolationCode::GlobalRowBudget
                | ArenaViolationCode::KraftBudget
        )
    }
}

impl fmt::Display for ArenaViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("board {board}: {player} {code} {reason}")]
pub struct ArenaViolation {
    pub board: u32,
    pub player: Player,
    pub code: ArenaViolationCode,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArenaState {
    params: ArenaParams,
    boards: BTreeMap<u32, BoardState>,
    global_black_per_row: Vec<u64>,
    black_weight: Dyadic,
}

pub fn new_arena(params: ArenaParams) -> ArenaState {
    let rules = Rules { black_row_budget: params.variant == ArenaVariant::Plain };
    let boards = params
        .heights()
        .map(|n| (n, BoardState::with_rules(BoardParams::new(n).expect("range checked"), rules)))
        .collect();
    ArenaState {
        params,
        boards,
        global_black_per_row: vec![0; params.n_max as usize],
        black_weight: Dyadic::zero(),
    }
}

impl ArenaState {
    pub fn params(&self) -> ArenaParams {
        self.params
    }

    pub fn boards(&self) -> &BTreeMap<u32, BoardState> {
        &self.boards
    }

    pub fn board(&self, n: u32) -> Option<&BoardState> {
        self.boards.get(&n)
    }

    pub fn global_black_per_row(&self) -> &[u64] {
        &self.global_black_per_row
    }

    pub fn black_weight(&self) -> &Dyadic {
        &self.black_weight
    }

    /// Whether one more black pawn in `row` fits the global budget.
    pub fn global_room(&self, row: u32) -> bool {
        match self.params.variant {
            ArenaVariant::Plain => self.global_black_per_row[row as usize] < row_budget(row),
            ArenaVariant::Prefix => &self.black_weight + &Dyadic::pow2_neg(row) < Dyadic::one(),
        }
    }

    pub fn validate(&self, n: u32, player: Player, action: &MoveAction) -> Result<(), ArenaViolation> {
        let fail = |code, reason: String| ArenaViolation { board: n, player, code, reason };
        let board = self
            .boards
            .get(&n)
            .ok_or_else(|| fail(ArenaViolationCode::UnknownBoard, format!("no board G_{n} in the arena")))?;
        board.validate_move(player, action).map_err(|v| fail(ArenaViolationCode::Board(v.code), v.reason))?;
        if let (Player::Black, MoveAction::PlaceBlack(c)) = (player, action) {
            if !self.global_room(c.row) {
                return Err(match self.params.variant {
                    ArenaVariant::Plain => fail(
                        ArenaViolationCode::GlobalRowBudget,
                        format!("at most {} black pawns in row {} on all boards", row_budget(c.row), c.row),
                    ),
                    ArenaVariant::Prefix => fail(
                        ArenaViolationCode::KraftBudget,
                        format!("black weight {} + 2^-{} is not below 1", self.black_weight, c.row),
                    ),
                });
            }
        }
        Ok(())
    }

    /// Validates against the board and the global budgets, then applies.
    pub fn arena_apply(&mut self, n: u32, player: Player, action: &MoveAction) -> Result<(), ArenaViolation> {
        self.validate(n, player, action)?;
        self.boards.get_mut(&n).unwrap().apply_move(player, action).expect("validated");
        if let MoveAction::PlaceBlack(c) = action {
            self.global_black_per_row[c.row as usize] += 1;
            self.black_weight += &Dyadic::pow2_neg(c.row);
        }
        Ok(())
    }

    pub fn verdicts(&self) -> BTreeMap<u32, Verdict> {
        self.boards.iter().map(|(&n, b)| (n, b.verdict())).collect()
    }

    /// White pawns per row summed over boards.
    pub fn white_rows_total(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.params.n_max as usize];
        for b in self.boards.values() {
            for (i, &k) in b.white_per_row().iter().enumerate() {
                v[i] += k;
            }
        }
        v
    }

    /// Per-row totals over boards of white pawns with a black pawn below,
    /// white pawns alive, and the weights `Σ 2^-row` of: pawn-killed white,
    /// white dead only by blackening, alive white.
    pub fn white_census(&self) -> WhiteCensus {
        let rows = self.params.n_max as usize;
        let mut census = WhiteCensus {
            pawn_killed_rows: vec![0; rows],
            alive_rows: vec![0; rows],
            ..WhiteCensus::default()
        };
        for b in self.boards.values() {
            for c in b.white() {
                let w = Dyadic::pow2_neg(c.row);
                if b.black_below(c.column, c.row) {
                    census.pawn_killed_rows[c.row as usize] += 1;
                    census.pawn_killed_weight += &w;
                } else if b.is_blackened(*c) {
                    census.blackened_weight += &w;
                } else {
                    census.alive_rows[c.row as usize] += 1;
                    census.alive_weight += &w;
                }
            }
        }
        census
    }

    /// Recount of the global black counters from the boards.
    pub fn globals_coherent(&self) -> bool {
        let mut rows = vec![0u64; self.params.n_max as usize];
        let mut weight = Dyadic::zero();
        for b in self.boards.values() {
            for c in b.black() {
                rows[c.row as usize] += 1;
                weight += &Dyadic::pow2_neg(c.row);
            }
        }
        rows == self.global_black_per_row && weight == self.black_weight
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WhiteCensus {
    pub pawn_killed_rows: Vec<u64>,
    pub alive_rows: Vec<u64>,
    pub pawn_killed_weight: Dyadic,
    pub blackened_weight: Dyadic,
    pub alive_weight: Dyadic,
}

/// `Σ_n 2^-(ceil(n/2)-1)` over the arena's heights.
pub fn alive_weight_bound(params: ArenaParams) -> Dyadic {
    let mut sum = Dyadic::zero();
    for n in params.heights() {
        sum += &Dyadic::pow2_neg(n.div_ceil(2) - 1);
    }
    sum
}

/// `(2^i - 1) + (2i + 2)`.
pub fn white_row_bound(i: u32) -> u64 {
    row_budget(i) - 1 + 2 * i as u64 + 2
}

/// `(2^i - 1)` plus the number of boards whose upper half contains row `i`.
pub fn white_row_bound_exact(params: ArenaParams, i: u32) -> u64 {
    let boards = params.heights().filter(|&n| n > i && n.div_ceil(2) - 1 <= i).count() as u64;
    row_budget(i) - 1 + boards
}

/// Black's side of an arena: a batch of `(board, action)` per round.
pub trait ArenaBlack {
    fn name(&self) -> String;
    fn next_batch(&mut self, state: &ArenaState) -> Vec<(u32, MoveAction)>;
    fn may_act_later(&self) -> bool {
        false
    }
}

/// Greedy reply on every board, spending the shared budget in board order.
#[derive(Debug, Clone, Default)]
pub struct ArenaGreedy;

impl ArenaBlack for ArenaGreedy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn next_batch(&mut self, state: &ArenaState) -> Vec<(u32, MoveAction)> {
        let mut rows = state.global_black_per_row.clone();
        let mut weight = state.black_weight.clone();
        let variant = state.params.variant;
        let mut out = Vec::new();
        for (&n, board) in &state.boards {
            let mv = greedy_reply(board, |r| {
                let board_ok = !board.rules().black_row_budget || board.black_per_row()[r as usize] < row_budget(r);
                let global_ok = match variant {
                    ArenaVariant::Plain => rows[r as usize] < row_budget(r),
                    ArenaVariant::Prefix => &weight + &Dyadic::pow2_neg(r) < Dyadic::one(),
                };
                board_ok && global_ok
            });
            if let MoveAction::PlaceBlack(c) = mv {
                rows[c.row as usize] += 1;
                weight += &Dyadic::pow2_neg(c.row);
            }
            if !mv.is_pass() {
                out.push((n, mv));
            }
        }
        out
    }
}

/// Lab configuration for the arena's semicomputable Black: unconditional
/// programs shorter than the tallest board, plus conditional runs on every
/// column string whose board has a positive blackening threshold.
pub fn arena_lab_config(params: ArenaParams) -> LabConfig {
    let mut pool = Vec::new();
    let mut cond_len = 0usize;
    for n in params.heights() {
        let t = blacken_threshold(n);
        if t > 0 {
            pool.extend(BitString::all_of_len(n as usize));
            cond_len = cond_len.max(t as usize - 1);
        }
    }
    LabConfig {
        max_len: params.n_max as usize - 1,
        step_cap: 2 * params.n_max as u64,
        cond_pool: pool,
        cond_max_len: cond_len,
        prefix: params.variant == ArenaVariant::Prefix,
        ..LabConfig::default()
    }
}

/// One lab stage per round; discoveries become actions on every board.
pub struct ArenaSemicomputable {
    lab: ApproxTable,
    source: PawnSource,
    pub rejected: Vec<(u32, MoveAction, ArenaViolationCode)>,
}

impl ArenaSemicomputable {
    pub fn new(params: ArenaParams) -> Self {
        Self::with_config(params, arena_lab_config(params))
    }

    pub fn with_config(params: ArenaParams, config: LabConfig) -> Self {
        let source = match params.variant {
            ArenaVariant::Plain => PawnSource::Plain,
            ArenaVariant::Prefix => PawnSource::Prefix,
        };
        Self { lab: ApproxTable::new(config), source, rejected: Vec::new() }
    }

    pub fn lab(&self) -> &ApproxTable {
        &self.lab
    }

    pub fn row_budget_rejections(&self) -> usize {
        self.rejected.iter().filter(|(_, _, c)| c.is_row_budget()).count()
    }
}

impl ArenaBlack for ArenaSemicomputable {
    fn name(&self) -> String {
        "semi".into()
    }

    fn next_batch(&mut self, state: &ArenaState) -> Vec<(u32, MoveAction)> {
        if self.lab.is_exhausted() {
            return Vec::new();
        }
        let Ok(found) = self.lab.dovetail_stage() else {
            return Vec::new();
        };
        let mut scratch = state.clone();
        let mut out = Vec::new();
        for (n, mv) in semicomputable_black_actions(&found, state.params.heights(), &self.source) {
            match scratch.arena_apply(n, Player::Black, &mv) {
                Ok(()) => out.push((n, mv)),
                Err(v) => self.rejected.push((n, mv, v.code)),
            }
        }
        out
    }

    fn may_act_later(&self) -> bool {
        !self.lab.is_exhausted()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArenaStats {
    pub rounds: u64,
    pub white_rows_total: Vec<u64>,
    pub census: WhiteCensus,
    /// Largest pawn-killed white weight seen after any action.
    pub max_pawn_killed_weight: Dyadic,
    pub upper_half_violations: usize,
    pub truncated: bool,
}

impl ArenaStats {
    /// `max_i (alive_i - 2i)`, the measured additive constant.
    pub fn live_constant(&self) -> i64 {
        self.census.alive_rows.iter().enumerate().map(|(i, &a)| a as i64 - 2 * i as i64).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct ArenaOutcome {
    pub state: ArenaState,
    pub verdicts: BTreeMap<u32, Verdict>,
    pub stats: ArenaStats,
    pub trace: MatchTrace,
    pub violation: Option<ArenaViolation>,
}

fn pawn_kill_gain(board: &BoardState, cell: Cell) -> Dyadic {
    let mut gain = Dyadic::zero();
    for w in board.white_in_column(cell.column) {
        if w.row > cell.row && !board.black_below(w.column, w.row) {
            gain += &Dyadic::pow2_neg(w.row);
        }
    }
    gain
}

/// Round-robin arena: White moves on every board, then Black plays a batch.
/// Ends at quiescence, at the round cap (`max_moves`), or on the first
/// illegal action.
pub fn run_arena(params: ArenaParams, black: &mut dyn ArenaBlack, limits: MatchLimits) -> ArenaOutcome {
    let header = TraceHeader::new(GameKind::Arena)
        .with("n_min", params.n_min)
        .with("n_max", params.n_max)
        .with("variant", params.variant.as_str())
        .with("black", black.name());
    let mut trace = MatchTrace::new(header);
    let mut state = new_arena(params);
    let mut memories: BTreeMap<u32, WhiteMemory> = params.heights().map(|n| (n, WhiteMemory::default())).collect();
    let mut stats = ArenaStats::default();
    let mut pawn_killed = Dyadic::zero();
    let mut quiet = 0;
    let mut violation = None;

    'game: loop {
        if stats.rounds >= limits.max_moves {
            stats.truncated = true;
            break;
        }
        let k = stats.rounds;
        let mut idle = true;
        for n in params.heights() {
            let board = &state.boards[&n];
            let mv = white_next_move(board, memories.get_mut(&n).unwrap());
            if mv.is_pass() {
                continue;
            }
            idle = false;
            trace.push(TraceRecord::board(k, Player::White, Some(n), mv));
            if let Err(v) = state.arena_apply(n, Player::White, &mv) {
                violation = Some(v);
                break 'game;
            }
            if let MoveAction::PlaceWhite(c) = mv {
                if c.row < board_floor(n) {
                    stats.upper_half_violations += 1;
                }
            }
        }
        for (n, mv) in black.next_batch(&state) {
            if mv.is_pass() {
                continue;
            }
            idle = false;
            trace.push(TraceRecord::board(k, Player::Black, Some(n), mv));
            let gain = match (mv, state.board(n)) {
                (MoveAction::PlaceBlack(c), Some(b)) => pawn_kill_gain(b, c),
                _ => Dyadic::zero(),
            };
            if let Err(v) = state.arena_apply(n, Player::Black, &mv) {
                violation = Some(v);
                break 'game;
            }
            pawn_killed += &gain;
            if pawn_killed > stats.max_pawn_killed_weight {
                stats.max_pawn_killed_weight = pawn_killed.clone();
            }
        }
        stats.rounds += 1;
        if idle && !black.may_act_later() {
            quiet += 1;
            if quiet >= limits.quiescence_rounds {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    stats.white_rows_total = state.white_rows_total();
    stats.census = state.white_census();
    let verdicts = state.verdicts();
    trace.seal_arena(&state, violation.as_ref());
    ArenaOutcome { state, verdicts, stats, trace, violation }
}

fn board_floor(n: u32) -> u32 {
    n.div_ceil(2) - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arena(lo: u32, hi: u32, v: ArenaVariant) -> ArenaState {
        new_arena(ArenaParams::new(lo, hi, v).unwrap())
    }

    #[test]
    fn construction() {
        assert_eq!(arena(1, 3, ArenaVariant::Plain).boards().len(), 3);
        assert_eq!(arena(2, 2, ArenaVariant::Plain).boards().len(), 1);
        assert_eq!(ArenaParams::new(3, 1, ArenaVariant::Plain), Err(ArenaError::InvalidRange(3, 1)));
    }

    #[test]
    fn global_row_budget_spans_boards() {
        let mut a = arena(2, 3, ArenaVariant::Plain);
        a.arena_apply(2, Player::Black, &MoveAction::PlaceBlack(Cell::new(0, 1))).unwrap();
        a.arena_apply(3, Player::Black, &MoveAction::PlaceBlack(Cell::new(0, 1))).unwrap();
        let err = a.arena_apply(3, Player::Black, &MoveAction::PlaceBlack(Cell::new(5, 1))).unwrap_err();
        assert_eq!(err.code, ArenaViolationCode::GlobalRowBudget);
        a.arena_apply(3, Player::White, &MoveAction::PlaceWhite(Cell::new(5, 1))).unwrap();
        assert!(a.globals_coherent());
    }

    #[test]
    fn kraft_budget_is_strict() {
        let mut a = arena(7, 7, ArenaVariant::Prefix);
        // 1/2 + 1/4 + 1/8 + 1/16 + 1/32 + 1/64 = 63/64
        for row in 1..=5 {
            a.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(row as u64, row))).unwrap();
        }
        a.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(9, 6))).unwrap();
        assert_eq!(a.black_weight(), &Dyadic::parse("63/64").unwrap());
        let err = a.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(10, 5))).unwrap_err();
        assert_eq!(err.code, ArenaViolationCode::KraftBudget);
        // without the per-board row budget, a second pawn in row 6 only meets the weight budget
        a.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(11, 6))).unwrap_err();
        let mut b = arena(7, 7, ArenaVariant::Prefix);
        b.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(0, 0))).unwrap_err();
        b.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(1, 2))).unwrap();
        b.arena_apply(7, Player::Black, &MoveAction::PlaceBlack(Cell::new(2, 2))).unwrap();
        assert_eq!(b.board(7).unwrap().black_per_row()[2], 2);
    }

    #[test]
    fn bounds() {
        assert_eq!(white_row_bound(0), 2);
        assert_eq!(white_row_bound(3), 7 + 8);
        let p = ArenaParams::new(1, 4, ArenaVariant::Prefix).unwrap();
        // floors 0,0,1,1
        assert_eq!(alive_weight_bound(p), Dyadic::parse("3/1").unwrap());
        assert_eq!(white_row_bound_exact(p, 0), 2);
        assert_eq!(white_row_bound_exact(p, 1), 1 + 3);
    }

    #[test]
    fn greedy_arena_small() {
        let p = ArenaParams::new(1, 6, ArenaVariant::Plain).unwrap();
        let out = run_arena(p, &mut ArenaGreedy, MatchLimits::default());
        assert!(out.violation.is_none());
        assert!(out.verdicts.values().all(Verdict::is_white_win), "{:?}", out.verdicts);
        assert!(out.state.globals_coherent());
    }
}
