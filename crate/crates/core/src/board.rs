//! State, rules and verdict of a single board game `G_n`.
//!
//! The board has `2^n` columns (one per binary string of length `n`) and `n`
//! rows, row 0 at the bottom. Columns are addressed by index and never
//! materialized; all sets are sparse.
//!
//! Rules enforced on every move:
//! * each player puts at most `2^i` pawns in row `i`;
//! * Black blackens at most `floor(n/2)` cells of any column;
//! * pawns and blackened cells are permanent.
//!
//! A white pawn is dead when its cell is blackened or a black pawn sits in
//! the same column strictly below it. Black wins iff every white pawn is dead
//! in the final position.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Largest supported board height; row budgets `2^i` must fit in a `u64`.
pub const MAX_N: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("board height must be in 1..={MAX_N}, got {0}")]
    InvalidHeight(u32),
    #[error("no white pawn at {0}")]
    NoWhitePawn(Cell),
    #[error(transparent)]
    Violation(#[from] Violation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardParams {
    n: u32,
}

impl BoardParams {
    pub fn new(n: u32) -> Result<Self, BoardError> {
        if n == 0 || n > MAX_N {
            return Err(BoardError::InvalidHeight(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn columns(&self) -> u64 {
        1u64 << self.n
    }

    /// Per-column blackening allowance, `floor(n/2)`.
    pub fn blacken_budget(&self) -> u32 {
        self.n / 2
    }

    /// Lowest row White's strategy can ever use: `ceil(n/2) - 1`.
    pub fn upper_half_floor(&self) -> u32 {
        self.n.div_ceil(2) - 1
    }
}

/// Per-row pawn allowance `2^row`.
pub fn row_budget(row: u32) -> u64 {
    1u64 << row
}

/// Ordered by column, then row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub column: u64,
    pub row: u32,
}

impl Cell {
    pub fn new(column: u64, row: u32) -> Self {
        Self { column, row }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.column, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    White,
    Black,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::White => "White",
            Player::Black => "Black",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveAction {
    Pass,
    PlaceWhite(Cell),
    PlaceBlack(Cell),
    Blacken(Cell),
}

impl MoveAction {
    pub fn is_pass(&self) -> bool {
        matches!(self, MoveAction::Pass)
    }

    pub fn cell(&self) -> Option<Cell> {
        match *self {
            MoveAction::Pass => None,
            MoveAction::PlaceWhite(c) | MoveAction::PlaceBlack(c) | MoveAction::Blacken(c) => Some(c),
        }
    }
}

/// Machine-readable reason a move was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    RowBudgetWhite,
    RowBudgetBlack,
    BlackenBudget,
    WrongActor,
    CellOccupied,
    OffBoard,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::RowBudgetWhite => "RowBudgetWhite",
            ViolationCode::RowBudgetBlack => "RowBudgetBlack",
            ViolationCode::BlackenBudget => "BlackenBudget",
            ViolationCode::WrongActor => "WrongActor",
            ViolationCode::CellOccupied => "CellOccupied",
            ViolationCode::OffBoard => "OffBoard",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{code}: {reason}")]
pub struct Violation {
    pub code: ViolationCode,
    pub reason: String,
}

impl Violation {
    pub fn new(code: ViolationCode, reason: impl Into<String>) -> Self {
        Self { code, reason: reason.into() }
    }
}

/// Rule toggles. The prefix arena turns off Black's per-row pawn allowance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rules {
    pub black_row_budget: bool,
}

impl Default for Rules {
    fn default() -> Self {
        Self { black_row_budget: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    WhiteWins(Vec<Cell>),
    BlackWins,
    RuleViolation { player: Player, code: ViolationCode, reason: String },
}

impl Verdict {
    pub fn is_white_win(&self) -> bool {
        matches!(self, Verdict::WhiteWins(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::WhiteWins(_) => "WhiteWins",
            Verdict::BlackWins => "BlackWins",
            Verdict::RuleViolation { .. } => "RuleViolation",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::WhiteWins(w) => {
                write!(f, "WhiteWins")?;
                for c in w {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
            Verdict::BlackWins => write!(f, "BlackWins"),
            Verdict::RuleViolation { player, code, reason } => {
                write!(f, "RuleViolation {player} {code} {reason}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardState {
    params: BoardParams,
    rules: Rules,
    white: BTreeSet<Cell>,
    white_order: Vec<Cell>,
    black: BTreeSet<Cell>,
    blackened: BTreeSet<Cell>,
    white_per_row: Vec<u64>,
    black_per_row: Vec<u64>,
    blackened_per_column: BTreeMap<u64, u32>,
    lowest_black: BTreeMap<u64, u32>,
    move_index: u64,
}

impl BoardState {
    pub fn new(params: BoardParams) -> Self {
        Self::with_rules(params, Rules::default())
    }

    pub fn with_rules(params: BoardParams, rules: Rules) -> Self {
        let n = params.n() as usize;
        Self {
            params,
            rules,
            white: BTreeSet::new(),
            white_order: Vec::new(),
            black: BTreeSet::new(),
            blackened: BTreeSet::new(),
            white_per_row: vec![0; n],
            black_per_row: vec![0; n],
            blackened_per_column: BTreeMap::new(),
            lowest_black: BTreeMap::new(),
            move_index: 0,
        }
    }

    pub fn params(&self) -> BoardParams {
        self.params
    }

    pub fn rules(&self) -> Rules {
        self.rules
    }

    pub fn n(&self) -> u32 {
        self.params.n()
    }

    pub fn move_index(&self) -> u64 {
        self.move_index
    }

    pub fn white(&self) -> &BTreeSet<Cell> {
        &self.white
    }

    pub fn black(&self) -> &BTreeSet<Cell> {
        &self.black
    }

    pub fn blackened(&self) -> &BTreeSet<Cell> {
        &self.blackened
    }

    pub fn white_per_row(&self) -> &[u64] {
        &self.white_per_row
    }

    pub fn black_per_row(&self) -> &[u64] {
        &self.black_per_row
    }

    pub fn row_counts(&self) -> (&[u64], &[u64]) {
        (&self.white_per_row, &self.black_per_row)
    }

    pub fn blackened_count(&self, column: u64) -> u32 {
        self.blackened_per_column.get(&column).copied().unwrap_or(0)
    }

    /// Columns with at least one blackened cell, with their counts.
    pub fn blackened_columns(&self) -> &BTreeMap<u64, u32> {
        &self.blackened_per_column
    }

    pub fn has_white(&self, cell: Cell) -> bool {
        self.white.contains(&cell)
    }

    pub fn has_black(&self, cell: Cell) -> bool {
        self.black.contains(&cell)
    }

    pub fn is_blackened(&self, cell: Cell) -> bool {
        self.blackened.contains(&cell)
    }

    /// Row of the lowest black pawn in `column`, if any.
    pub fn lowest_black(&self, column: u64) -> Option<u32> {
        self.lowest_black.get(&column).copied()
    }

    /// Lowest black pawn row of every column holding one.
    pub fn black_columns(&self) -> &BTreeMap<u64, u32> {
        &self.lowest_black
    }

    /// True when some black pawn in the column is strictly below `row`.
    pub fn black_below(&self, column: u64, row: u32) -> bool {
        self.lowest_black(column).is_some_and(|r| r < row)
    }

    pub fn white_in_column(&self, column: u64) -> impl Iterator<Item = Cell> + '_ {
        self.white.range(Cell::new(column, 0)..=Cell::new(column, u32::MAX)).copied()
    }

    pub fn black_in_column(&self, column: u64) -> impl Iterator<Item = Cell> + '_ {
        self.black.range(Cell::new(column, 0)..=Cell::new(column, u32::MAX)).copied()
    }

    fn on_board(&self, cell: Cell) -> bool {
        cell.row < self.n() && cell.column < self.params.columns()
    }

    /// Checks a move against the rules without changing the state. Total: a
    /// rejected move is reported, never panics.
    pub fn validate_move(&self, player: Player, action: &MoveAction) -> Result<(), Violation> {
        let Some(code) = self.violation_code(player, action) else {
            return Ok(());
        };
        let cell = action.cell().expect("a pass is always legal");
        let reason = match code {
            ViolationCode::WrongActor => format!("{player} may not play {action:?}"),
            ViolationCode::OffBoard => format!("cell {cell} is outside a board with n={}", self.n()),
            ViolationCode::CellOccupied => match action {
                MoveAction::PlaceWhite(_) => format!("white pawn already at {cell}"),
                MoveAction::PlaceBlack(_) => format!("black pawn already at {cell}"),
                _ => format!("cell {cell} is already blackened"),
            },
            ViolationCode::RowBudgetWhite => {
                format!("row budget: at most {} white pawns in row {}", row_budget(cell.row), cell.row)
            }
            ViolationCode::RowBudgetBlack => {
                format!("row budget: at most {} black pawns in row {}", row_budget(cell.row), cell.row)
            }
            ViolationCode::BlackenBudget => format!(
                "blacken budget: at most {} blackened cells in column {}",
                self.params.blacken_budget(),
                cell.column
            ),
        };
        Err(Violation::new(code, reason))
    }

    pub fn is_legal(&self, player: Player, action: &MoveAction) -> bool {
        self.violation_code(player, action).is_none()
    }

    fn violation_code(&self, player: Player, action: &MoveAction) -> Option<ViolationCode> {
        let (expected, cell) = match *action {
            MoveAction::Pass => return None,
            MoveAction::PlaceWhite(c) => (Player::White, c),
            MoveAction::PlaceBlack(c) | MoveAction::Blacken(c) => (Player::Black, c),
        };
        if player != expected {
            return Some(ViolationCode::WrongActor);
        }
        if !self.on_board(cell) {
            return Some(ViolationCode::OffBoard);
        }
        let row = cell.row as usize;
        match *action {
            MoveAction::PlaceWhite(_) if self.white.contains(&cell) => Some(ViolationCode::CellOccupied),
            MoveAction::PlaceWhite(_) if self.white_per_row[row] >= row_budget(cell.row) => {
                Some(ViolationCode::RowBudgetWhite)
            }
            MoveAction::PlaceBlack(_) if self.black.contains(&cell) => Some(ViolationCode::CellOccupied),
            MoveAction::PlaceBlack(_)
                if self.rules.black_row_budget && self.black_per_row[row] >= row_budget(cell.row) =>
            {
                Some(ViolationCode::RowBudgetBlack)
            }
            MoveAction::Blacken(_) if self.blackened.contains(&cell) => Some(ViolationCode::CellOccupied),
            MoveAction::Blacken(_) if self.blackened_count(cell.column) >= self.params.blacken_budget() => {
                Some(ViolationCode::BlackenBudget)
            }
            _ => None,
        }
    }

    /// Validates and applies a move. A rejected move leaves the state intact.
    pub fn apply_move(&mut self, player: Player, action: &MoveAction) -> Result<(), Violation> {
        self.validate_move(player, action)?;
        match *action {
            MoveAction::Pass => {}
            MoveAction::PlaceWhite(c) => {
                self.white.insert(c);
                self.white_order.push(c);
                self.white_per_row[c.row as usize] += 1;
            }
            MoveAction::PlaceBlack(c) => {
                self.black.insert(c);
                self.black_per_row[c.row as usize] += 1;
                let low = self.lowest_black.entry(c.column).or_insert(c.row);
                *low = (*low).min(c.row);
            }
            MoveAction::Blacken(c) => {
                self.blackened.insert(c);
                *self.blackened_per_column.entry(c.column).or_insert(0) += 1;
            }
        }
        self.move_index += 1;
        Ok(())
    }

    /// Takes back the most recent applied move, which must be `action`.
    pub(crate) fn undo_move(&mut self, action: &MoveAction) {
        match *action {
            MoveAction::Pass => {}
            MoveAction::PlaceWhite(c) => {
                self.white.remove(&c);
                self.white_order.pop();
                self.white_per_row[c.row as usize] -= 1;
            }
            MoveAction::PlaceBlack(c) => {
                self.black.remove(&c);
                self.black_per_row[c.row as usize] -= 1;
                match self.black_in_column(c.column).map(|b| b.row).min() {
                    Some(r) => self.lowest_black.insert(c.column, r),
                    None => self.lowest_black.remove(&c.column),
                };
            }
            MoveAction::Blacken(c) => {
                self.blackened.remove(&c);
                let k = self.blackened_per_column.get_mut(&c.column).expect("blackened column");
                *k -= 1;
                if *k == 0 {
                    self.blackened_per_column.remove(&c.column);
                }
            }
        }
        self.move_index -= 1;
    }

    /// Value-style variant of [`BoardState::apply_move`].
    pub fn applied(&self, player: Player, action: &MoveAction) -> Result<Self, Violation> {
        let mut next = self.clone();
        next.apply_move(player, action)?;
        Ok(next)
    }

    pub fn is_dead(&self, cell: Cell) -> Result<bool, BoardError> {
        if !self.white.contains(&cell) {
            return Err(BoardError::NoWhitePawn(cell));
        }
        Ok(self.white_is_dead(cell))
    }

    fn white_is_dead(&self, cell: Cell) -> bool {
        self.blackened.contains(&cell) || self.black_below(cell.column, cell.row)
    }

    /// White pawns in placement order.
    pub fn white_order(&self) -> &[Cell] {
        &self.white_order
    }

    /// The most recently placed white pawn that is still alive.
    pub fn newest_alive_white(&self) -> Option<Cell> {
        self.white_order.iter().rev().copied().find(|&c| !self.white_is_dead(c))
    }

    pub fn alive_white(&self) -> impl Iterator<Item = Cell> + '_ {
        self.white.iter().copied().filter(|&c| !self.white_is_dead(c))
    }

    pub fn dead_white(&self) -> impl Iterator<Item = Cell> + '_ {
        self.white.iter().copied().filter(|&c| self.white_is_dead(c))
    }

    /// Outcome if this were the limit position.
    pub fn verdict(&self) -> Verdict {
        let alive: Vec<Cell> = self.alive_white().collect();
        if alive.is_empty() {
            Verdict::BlackWins
        } else {
            Verdict::WhiteWins(alive)
        }
    }

    /// Recounts every cached counter from the sets; true when they agree.
    pub fn counters_coherent(&self) -> bool {
        let n = self.n() as usize;
        let mut w = vec![0u64; n];
        let mut b = vec![0u64; n];
        let mut bl: BTreeMap<u64, u32> = BTreeMap::new();
        let mut low: BTreeMap<u64, u32> = BTreeMap::new();
        for c in &self.white {
            w[c.row as usize] += 1;
        }
        for c in &self.black {
            b[c.row as usize] += 1;
            let e = low.entry(c.column).or_insert(c.row);
            *e = (*e).min(c.row);
        }
        for c in &self.blackened {
            *bl.entry(c.column).or_insert(0) += 1;
        }
        w == self.white_per_row && b == self.black_per_row && bl == self.blackened_per_column && low == self.lowest_black
    }

    /// True when every rule-level budget holds for the current position.
    pub fn budgets_hold(&self) -> bool {
        let rows_ok = (0..self.n()).all(|i| {
            self.white_per_row[i as usize] <= row_budget(i)
                && (!self.rules.black_row_budget || self.black_per_row[i as usize] <= row_budget(i))
        });
        rows_ok && self.blackened_per_column.values().all(|&k| k <= self.params.blacken_budget())
    }
}
