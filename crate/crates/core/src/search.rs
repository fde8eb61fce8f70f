//! Exhaustive Black search against White's scanning strategy.
//!
//! Black's menu at each node is "stop for good" plus every legal move that
//! can still change the outcome: in White's current column, blackening her
//! pawn's cell or a cell below it, or a pawn below her pawn; in any column
//! ahead of her that holds no black pawn, any blackening or any pawn. Moves
//! in columns she has left or will skip, and moves above her pawn, only burn
//! budget and are dominated by stopping.
//!
//! Positions are memoized on an abstract key: both players' row counts,
//! White's pawn row, the current column's blackened rows, and each column
//! ahead reduced to "has a black pawn" or its blackened rows. Columns behind
//! White are dropped (every pawn there is already dead), so positions that
//! differ only in untouched or abandoned columns collapse.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::board::{row_budget, BoardParams, BoardState, Cell, MoveAction, Player, Verdict};
use crate::strategy::{pawn_killed_per_row, verdict_rank, white_next_move, WhiteMemory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search exceeded its node budget of {budget}")]
    NodeBudget { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self { node_budget: 50_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub worst_case: Verdict,
    pub nodes: u64,
    pub distinct_positions: usize,
    pub white_placements: u64,
    pub upper_half_violations: u64,
    pub dead_count_violations: u64,
}

/// Black and white row counts, pawn row (`u64::MAX` for none), current
/// column mask, then one entry per column ahead.
type Key = Box<[u64]>;

const HAS_PAWN: u64 = u64::MAX;

struct Search {
    params: BoardParams,
    budget: u64,
    nodes: u64,
    memo: FxHashMap<Key, Verdict>,
    white_placements: u64,
    upper_half_violations: u64,
    dead_count_violations: u64,
}

fn column_mask(state: &BoardState, column: u64) -> u64 {
    if state.blackened_count(column) == 0 {
        return 0;
    }
    let cells = Cell::new(column, 0)..Cell::new(column + 1, 0);
    state.blackened().range(cells).fold(0, |m, c| m | 1 << c.row)
}

impl Search {
    fn key(&self, state: &BoardState, memory: &WhiteMemory) -> Key {
        let pawn = memory.current_pawn.filter(|p| !state.black_below(p.column, p.row));
        let mut key = Vec::with_capacity(2 * state.n() as usize + 2 + (self.params.columns() - memory.next_column) as usize);
        key.extend_from_slice(state.black_per_row());
        key.extend_from_slice(state.white_per_row());
        key.push(pawn.map_or(u64::MAX, |p| p.row as u64));
        key.push(pawn.map_or(0, |p| column_mask(state, p.column)));
        let start = key.len();
        let next = memory.next_column;
        key.resize(start + (self.params.columns() - next) as usize, 0);
        for c in state.blackened().range(Cell::new(next, 0)..) {
            key[start + (c.column - next) as usize] |= 1 << c.row;
        }
        for (&c, _) in state.black_columns().range(next..) {
            key[start + (c - next) as usize] = HAS_PAWN;
        }
        key.into_boxed_slice()
    }

    fn menu(&self, state: &BoardState, memory: &WhiteMemory) -> Vec<MoveAction> {
        let n = state.n();
        let mut moves = Vec::new();
        let room = |r: u32| state.black_per_row()[r as usize] < row_budget(r);
        if let Some(p) = memory.current_pawn.filter(|p| !state.black_below(p.column, p.row)) {
            for r in 0..=p.row {
                moves.push(MoveAction::Blacken(Cell::new(p.column, r)));
                if r < p.row && room(r) {
                    moves.push(MoveAction::PlaceBlack(Cell::new(p.column, r)));
                }
            }
        }
        for c in memory.next_column..self.params.columns() {
            if state.lowest_black(c).is_some() {
                continue;
            }
            for r in 0..n {
                moves.push(MoveAction::Blacken(Cell::new(c, r)));
                if room(r) {
                    moves.push(MoveAction::PlaceBlack(Cell::new(c, r)));
                }
            }
        }
        moves.retain(|m| state.is_legal(Player::Black, m));
        moves
    }

    /// White's reply; `Err` carries White's rule violation.
    fn white_turn(&mut self, state: &mut BoardState, memory: &mut WhiteMemory) -> Result<MoveAction, Verdict> {
        let mv = white_next_move(state, memory);
        if let Err(v) = state.apply_move(Player::White, &mv) {
            return Err(Verdict::RuleViolation { player: Player::White, code: v.code, reason: v.reason });
        }
        if let MoveAction::PlaceWhite(c) = mv {
            self.white_placements += 1;
            if c.row < self.params.upper_half_floor() {
                self.upper_half_violations += 1;
            }
        }
        Ok(mv)
    }

    fn black_node(&mut self, state: &mut BoardState, memory: &WhiteMemory) -> Result<Verdict, SearchError> {
        let key = self.key(state, memory);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(SearchError::NodeBudget { budget: self.budget });
        }
        if pawn_killed_per_row(state).iter().enumerate().any(|(i, &k)| k > row_budget(i as u32) - 1) {
            self.dead_count_violations += 1;
        }
        let mut worst = state.verdict();
        for mv in self.menu(state, memory) {
            if verdict_rank(&worst) == 0 {
                break;
            }
            state.apply_move(Player::Black, &mv).expect("menu is legal");
            let mut mem = memory.clone();
            let v = match self.white_turn(state, &mut mem) {
                Ok(reply) => {
                    let v = self.black_node(state, &mem);
                    state.undo_move(&reply);
                    v?
                }
                Err(v) => v,
            };
            state.undo_move(&mv);
            if verdict_rank(&v) < verdict_rank(&worst) {
                worst = v;
            }
        }
        self.memo.insert(key, worst.clone());
        Ok(worst)
    }
}

/// Worst verdict for White's strategy over every Black line, White first.
pub fn exhaustive_black_search(params: BoardParams, limits: SearchLimits) -> Result<SearchReport, SearchError> {
    let mut search = Search {
        params,
        budget: limits.node_budget,
        nodes: 0,
        memo: FxHashMap::default(),
        white_placements: 0,
        upper_half_violations: 0,
        dead_count_violations: 0,
    };
    let mut state = BoardState::new(params);
    let mut memory = WhiteMemory::default();
    let worst_case = match search.white_turn(&mut state, &mut memory) {
        Ok(_) => search.black_node(&mut state, &memory)?,
        Err(v) => v,
    };
    Ok(SearchReport {
        worst_case,
        nodes: search.nodes,
        distinct_positions: search.memo.len(),
        white_placements: search.white_placements,
        upper_half_violations: search.upper_half_violations,
        dead_count_violations: search.dead_count_violations,
    })
}
