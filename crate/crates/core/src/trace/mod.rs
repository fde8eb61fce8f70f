//! Replayable text traces.
//!
//! ```text
//! cgame-trace 1
//! kind board
//! param n 4
//! param black greedy
//! 0 W place 0 3
//! 1 B blacken 0 3
//! verdict WhiteWins 0:2
//! digest white_rows 0,0,1,1
//! sha256 3f1c…
//! ```
//!
//! Body records are `k <W|B|A|Bob> [g<n>] <action> <args…>`: `k` is the move
//! (or batch) index, the optional `g<n>` tag names the arena board. The
//! `sha256` line hashes the canonical header and body, so any edit to a move
//! that keeps the replay legal still fails verification.

pub mod verify;

use std::fmt::{self, Write as _};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arena::{ArenaState, ArenaViolation};
use crate::board::{BoardState, Cell, MoveAction, Player, Verdict};
use crate::weights::{WeightState, WeightVerdict};

pub const FORMAT_MAGIC: &str = "cgame-trace";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameKind {
    Board,
    Arena,
    Weights,
}

impl GameKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GameKind::Board => "board",
            GameKind::Arena => "arena",
            GameKind::Weights => "weights",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "board" => Some(GameKind::Board),
            "arena" => Some(GameKind::Arena),
            "weights" => Some(GameKind::Weights),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub kind: GameKind,
    pub params: Vec<(String, String)>,
}

impl TraceHeader {
    pub fn new(kind: GameKind) -> Self {
        Self { kind, params: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        let value = value.to_string();
        match self.params.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.params.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Actor {
    White,
    Black,
    Alice,
    Bob,
}

impl Actor {
    pub fn tag(&self) -> &'static str {
        match self {
            Actor::White => "W",
            Actor::Black => "B",
            Actor::Alice => "A",
            Actor::Bob => "Bob",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "W" => Some(Actor::White),
            "B" => Some(Actor::Black),
            "A" => Some(Actor::Alice),
            "Bob" => Some(Actor::Bob),
            _ => None,
        }
    }

    pub fn board_player(&self) -> Option<Player> {
        match self {
            Actor::White => Some(Player::White),
            Actor::Black => Some(Player::Black),
            _ => None,
        }
    }
}

impl From<Player> for Actor {
    fn from(p: Player) -> Self {
        match p {
            Player::White => Actor::White,
            Player::Black => Actor::Black,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceAction {
    Pass,
    Place(Cell),
    Blacken(Cell),
    RaiseA(u64, BigRational),
    RaiseB(usize, BigRational),
    Disable(u64),
}

impl TraceAction {
    /// Board move for a board actor; `None` for weight-game actions.
    pub fn to_board(&self, player: Player) -> Option<MoveAction> {
        Some(match (self, player) {
            (TraceAction::Pass, _) => MoveAction::Pass,
            (TraceAction::Place(c), Player::White) => MoveAction::PlaceWhite(*c),
            (TraceAction::Place(c), Player::Black) => MoveAction::PlaceBlack(*c),
            (TraceAction::Blacken(c), _) => MoveAction::Blacken(*c),
            _ => return None,
        })
    }
}

/// `num/den` in lowest terms.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = s.split_once('/')?;
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(n, d))
}

impl fmt::Display for TraceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceAction::Pass => write!(f, "pass"),
            TraceAction::Place(c) => write!(f, "place {} {}", c.column, c.row),
            TraceAction::Blacken(c) => write!(f, "blacken {} {}", c.column, c.row),
            TraceAction::RaiseA(e, w) => write!(f, "raise {e} {}", format_rational(w)),
            TraceAction::RaiseB(j, w) => write!(f, "raise-set {j} {}", format_rational(w)),
            TraceAction::Disable(e) => write!(f, "disable {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub k: u64,
    pub actor: Actor,
    pub board: Option<u32>,
    pub action: TraceAction,
}

impl TraceRecord {
    pub fn board(k: u64, player: Player, board: Option<u32>, mv: MoveAction) -> Self {
        Self { k, actor: player.into(), board, action: TraceAction::from_board(mv) }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.k, self.actor.tag())?;
        if let Some(n) = self.board {
            write!(f, " g{n}")?;
        }
        write!(f, " {}", self.action)
    }
}

/// Verdict lines and end-of-game digest, both recomputed by the verifier.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceFooter {
    pub verdicts: Vec<String>,
    pub digest: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchTrace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
    pub footer: TraceFooter,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported trace format version {0}")]
    Version(String),
    #[error("trace is not valid UTF-8")]
    Encoding,
}

fn syntax(line: usize, msg: impl Into<String>) -> TraceParseError {
    TraceParseError::Syntax { line, msg: msg.into() }
}

impl MatchTrace {
    pub fn new(header: TraceHeader) -> Self {
        Self { header, records: Vec::new(), footer: TraceFooter::default() }
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn seal_board(&mut self, state: &BoardState, verdict: &Verdict) {
        self.footer = board_footer(state, verdict);
    }

    pub fn seal_arena(&mut self, state: &ArenaState, violation: Option<&ArenaViolation>) {
        self.footer = arena_footer(state, violation);
    }

    pub fn seal_weights(&mut self, state: &WeightState, verdict: &WeightVerdict, batches: u64) {
        self.footer = weights_footer(state, verdict, batches);
    }

    /// Canonical header and body text; the hashed part of the trace.
    pub fn canonical_body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(s, "kind {}", self.header.kind.as_str());
        for (k, v) in &self.header.params {
            let _ = writeln!(s, "param {k} {v}");
        }
        for r in &self.records {
            let _ = writeln!(s, "{r}");
        }
        s
    }

    pub fn body_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_body().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = self.canonical_body();
        for v in &self.footer.verdicts {
            let _ = writeln!(s, "verdict {v}");
        }
        for (k, v) in &self.footer.digest {
            let _ = writeln!(s, "digest {k} {v}");
        }
        let _ = writeln!(s, "sha256 {}", self.body_hash());
        s
    }

    /// Parses trace text. Returns the trace and the recorded body hash.
    pub fn parse(text: &str) -> Result<(MatchTrace, String), TraceParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (ln, first) = lines.next().ok_or_else(|| syntax(1, "empty trace"))?;
        let mut it = first.split_whitespace();
        if it.next() != Some(FORMAT_MAGIC) {
            return Err(syntax(ln, "missing format magic"));
        }
        match it.next() {
            Some(v) if v == FORMAT_VERSION.to_string() => {}
            Some(v) => return Err(TraceParseError::Version(v.to_string())),
            None => return Err(syntax(ln, "missing format version")),
        }
        if it.next().is_some() {
            return Err(syntax(ln, "trailing tokens after version"));
        }
        let (ln, kind_line) = lines.next().ok_or_else(|| syntax(2, "missing kind"))?;
        let kind = match kind_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["kind", k] => GameKind::parse(k).ok_or_else(|| syntax(ln, format!("unknown kind {k}")))?,
            _ => return Err(syntax(ln, "expected `kind <board|arena|weights>`")),
        };
        let mut trace = MatchTrace::new(TraceHeader::new(kind));
        let mut hash = None;
        let mut section = 0; // 0 params, 1 body, 2 footer
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.is_empty() {
                return Err(syntax(ln, "blank line"));
            }
            if hash.is_some() {
                return Err(syntax(ln, "content after sha256 line"));
            }
            match tok[0] {
                "param" => {
                    if section > 0 || tok.len() != 3 {
                        return Err(syntax(ln, "misplaced or malformed param"));
                    }
                    if trace.header.get(tok[1]).is_some() {
                        return Err(syntax(ln, format!("duplicate param {}", tok[1])));
                    }
                    trace.header.set(tok[1], tok[2]);
                }
                "verdict" => {
                    if section > 1 && !trace.footer.digest.is_empty() {
                        return Err(syntax(ln, "verdict after digest"));
                    }
                    section = 2;
                    trace.footer.verdicts.push(tok[1..].join(" "));
                }
                "digest" => {
                    if tok.len() != 3 {
                        return Err(syntax(ln, "malformed digest"));
                    }
                    section = 2;
                    trace.footer.digest.push((tok[1].to_string(), tok[2].to_string()));
                }
                "sha256" => {
                    if tok.len() != 2 {
                        return Err(syntax(ln, "malformed sha256"));
                    }
                    hash = Some(tok[1].to_string());
                }
                _ => {
                    if section > 1 {
                        return Err(syntax(ln, "move record after footer"));
                    }
                    section = 1;
                    trace.records.push(parse_record(&tok).map_err(|m| syntax(ln, m))?);
                }
            }
        }
        let hash = hash.ok_or_else(|| syntax(text.lines().count(), "missing sha256 line"))?;
        Ok((trace, hash))
    }

    /// Writes atomically: a sibling temp file renamed over `path`.
    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn digest(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub(crate) fn board_footer(state: &BoardState, verdict: &Verdict) -> TraceFooter {
    TraceFooter {
        verdicts: vec![verdict.to_string()],
        digest: digest(&[
            ("white_rows", join(state.white_per_row())),
            ("black_rows", join(state.black_per_row())),
            ("blackened", state.blackened().len().to_string()),
            ("moves", state.move_index().to_string()),
        ]),
    }
}

pub(crate) fn arena_footer(state: &ArenaState, violation: Option<&ArenaViolation>) -> TraceFooter {
    let mut verdicts: Vec<String> = state.verdicts().iter().map(|(n, v)| format!("g{n} {v}")).collect();
    if let Some(v) = violation {
        verdicts.push(format!("abort g{} {} {} {}", v.board, v.player, v.code, v.reason));
    }
    let blackened: usize = state.boards().values().map(|b| b.blackened().len()).sum();
    TraceFooter {
        verdicts,
        digest: digest(&[
            ("white_rows", join(&state.white_rows_total())),
            ("global_black_rows", join(state.global_black_per_row())),
            ("black_weight", state.black_weight().to_string()),
            ("blackened", blackened.to_string()),
        ]),
    }
}

pub(crate) fn weights_footer(state: &WeightState, verdict: &WeightVerdict, batches: u64) -> TraceFooter {
    TraceFooter {
        verdicts: vec![verdict.to_string()],
        digest: digest(&[
            ("a_total", format_rational(state.a_total())),
            ("b_total", format_rational(state.b_total())),
            ("disabled", state.disabled().len().to_string()),
            ("batches", batches.to_string()),
        ]),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("bad {what} `{s}`"))
}

fn parse_record(tok: &[&str]) -> Result<TraceRecord, String> {
    if tok.len() < 3 {
        return Err("truncated move record".into());
    }
    let k = parse_num(tok[0], "move index")?;
    let actor = Actor::parse(tok[1]).ok_or_else(|| format!("unknown actor `{}`", tok[1]))?;
    let mut rest = &tok[2..];
    let mut board = None;
    if let Some(g) = rest[0].strip_prefix('g') {
        board = Some(parse_num(g, "board tag")?);
        rest = &rest[1..];
    }
    let cell = |a: &[&str]| -> Result<Cell, String> {
        match a {
            [c, r] => Ok(Cell::new(parse_num(c, "column")?, parse_num(r, "row")?)),
            _ => Err("expected `<column> <row>`".into()),
        }
    };
    let rational = |s: &str| parse_rational(s).ok_or_else(|| format!("bad rational `{s}`"));
    let action = match rest {
        ["pass"] => TraceAction::Pass,
        ["place", args @ ..] => TraceAction::Place(cell(args)?),
        ["blacken", args @ ..] => TraceAction::Blacken(cell(args)?),
        ["raise", e, w] => TraceAction::RaiseA(parse_num(e, "element")?, rational(w)?),
        ["raise-set", j, w] => TraceAction::RaiseB(parse_num(j, "set index")?, rational(w)?),
        ["disable", e] => TraceAction::Disable(parse_num(e, "element")?),
        _ => return Err(format!("unknown action `{}`", rest.join(" "))),
    };
    Ok(TraceRecord { k, actor, board, action })
}
