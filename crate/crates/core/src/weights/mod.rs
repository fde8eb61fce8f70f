//! The Alice/Bob weight game: rules, exact-rational state and verdict.
//!
//! Elements of all sets share one global index space: set `j` owns the
//! half-open range `offset(j)..offset(j) + size(j)`. Sets are 0-based here
//! and in traces.

mod alice;
mod bob;
mod play;

pub use alice::{AliceMemory, AliceStrategy, Grouping, ScriptedAlice, SetRecord};
pub use bob::{
    defeating_value, element_string, BobAdversary, BobKind, KolmogorovBob, KolmogorovConfig, ScriptedBob,
    MATCH_EPSILON_EXP,
};
pub use play::{play_weight_match, AlicePlayer, BobPlayer, WeightLimits, WeightOutcome, WeightStats};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("the family of sets is empty")]
    NoSets,
    #[error("set {0} is empty")]
    EmptySet(usize),
    #[error("threshold C must be positive")]
    ZeroThreshold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightParams {
    c: u32,
    sizes: Vec<u64>,
    offsets: Vec<u64>,
}

impl WeightParams {
    pub fn new(c: u32, sizes: Vec<u64>) -> Result<Self, WeightError> {
        if c == 0 {
            return Err(WeightError::ZeroThreshold);
        }
        if sizes.is_empty() {
            return Err(WeightError::NoSets);
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(WeightError::EmptySet(j));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(Self { c, sizes, offsets })
    }

    /// `count` sets of `size` elements each.
    pub fn equal(c: u32, size: u64, count: usize) -> Result<Self, WeightError> {
        Self::new(c, vec![size; count])
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn set_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_elements(&self) -> u64 {
        *self.offsets.last().unwrap()
    }

    pub fn set_range(&self, j: usize) -> Range<u64> {
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn set_of(&self, element: u64) -> Option<usize> {
        if element >= self.total_elements() {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= element) - 1)
    }

    /// Equal sets of `4C` elements and `2^(4C)` of them.
    pub fn is_equal_configuration(&self) -> bool {
        let m = 4 * self.c as u64;
        self.sizes.iter().all(|&s| s == m) && enough_sets(self.set_count(), m)
    }

    /// At least `2^(8C)` sets of at least `8C` elements each.
    pub fn is_general_configuration(&self) -> bool {
        let m = 8 * self.c as u64;
        self.sizes.iter().all(|&s| s >= m) && enough_sets(self.set_count(), m)
    }

    /// Either configuration under which Alice's strategy is known to win.
    pub fn guarantees_alice(&self) -> bool {
        self.is_equal_configuration() || self.is_general_configuration()
    }
}

fn enough_sets(count: usize, log: u64) -> bool {
    log < 63 && count as u64 >= 1u64 << log
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightPlayer {
    Alice,
    Bob,
}

impl fmt::Display for WeightPlayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightPlayer::Alice => "Alice",
            WeightPlayer::Bob => "Bob",
        })
    }
}

/// One element of a batch. Raise values are the new absolute weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightMove {
    Pass,
    RaiseA { element: u64, value: Rational },
    RaiseB { set: usize, value: Rational },
    Disable(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightViolationCode {
    TotalWeightExceeded,
    DisableWouldEmptySet,
    NonMonotoneWeight,
    WrongActor,
    UnknownTarget,
}

impl WeightViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightViolationCode::TotalWeightExceeded => "TotalWeightExceeded",
            WeightViolationCode::DisableWouldEmptySet => "DisableWouldEmptySet",
            WeightViolationCode::NonMonotoneWeight => "NonMonotoneWeight",
            WeightViolationCode::WrongActor => "WrongActor",
            WeightViolationCode::UnknownTarget => "UnknownTarget",
        }
    }
}

impl fmt::Display for WeightViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{code}: {reason}")]
pub struct WeightViolation {
    pub code: WeightViolationCode,
    pub reason: String,
}

fn violation(code: WeightViolationCode, reason: impl Into<String>) -> WeightViolation {
    WeightViolation { code, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightVerdict {
    AliceWins(u64),
    BobWins,
    RuleViolation { player: WeightPlayer, code: WeightViolationCode, reason: String },
}

impl WeightVerdict {
    pub fn is_alice_win(&self) -> bool {
        matches!(self, WeightVerdict::AliceWins(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightVerdict::AliceWins(_) => "AliceWins",
            WeightVerdict::BobWins => "BobWins",
            WeightVerdict::RuleViolation { .. } => "RuleViolation",
        }
    }
}

impl fmt::Display for WeightVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightVerdict::AliceWins(s) => write!(f, "AliceWins {s}"),
            WeightVerdict::BobWins => write!(f, "BobWins"),
            WeightVerdict::RuleViolation { player, code, reason } => {
                write!(f, "RuleViolation {player} {code} {reason}")
            }
        }
    }
}

/// Sparse game position: only touched elements are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightState {
    params: WeightParams,
    a: BTreeMap<u64, Rational>,
    b: Vec<Rational>,
    disabled: BTreeSet<u64>,
    disabled_per_set: Vec<u64>,
    a_total: Rational,
    b_total: Rational,
}

impl WeightState {
    pub fn new(params: WeightParams) -> Self {
        let n = params.set_count();
        Self {
            params,
            a: BTreeMap::new(),
            b: vec![Rational::zero(); n],
            disabled: BTreeSet::new(),
            disabled_per_set: vec![0; n],
            a_total: Rational::zero(),
            b_total: Rational::zero(),
        }
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn a(&self, element: u64) -> Rational {
        self.a.get(&element).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn a_weights(&self) -> &BTreeMap<u64, Rational> {
        &self.a
    }

    pub fn b_set(&self, j: usize) -> &Rational {
        &self.b[j]
    }

    /// Bob's weight on a single element, `B(j) / #S_j`.
    pub fn b_element(&self, element: u64) -> Option<Rational> {
        let j = self.params.set_of(element)?;
        Some(&self.b[j] / Rational::from_integer(BigInt::from(self.params.sizes()[j])))
    }

    pub fn a_total(&self) -> &Rational {
        &self.a_total
    }

    pub fn b_total(&self) -> &Rational {
        &self.b_total
    }

    pub fn is_disabled(&self, element: u64) -> bool {
        self.disabled.contains(&element)
    }

    pub fn disabled(&self) -> &BTreeSet<u64> {
        &self.disabled
    }

    pub fn enabled_in_set(&self, j: usize) -> u64 {
        self.params.sizes()[j] - self.disabled_per_set[j]
    }

    /// Alice's weight summed over one set.
    pub fn a_on_set(&self, j: usize) -> Rational {
        self.a.range(self.params.set_range(j)).map(|(_, w)| w).sum()
    }

    /// Applies a batch atomically: either every move is applied in order or
    /// the state is left untouched.
    pub fn apply_weight_moves(&mut self, player: WeightPlayer, moves: &[WeightMove]) -> Result<(), WeightViolation> {
        let mut next = self.clone();
        for mv in moves {
            next.apply_one(player, mv)?;
        }
        *self = next;
        Ok(())
    }

    fn apply_one(&mut self, player: WeightPlayer, mv: &WeightMove) -> Result<(), WeightViolation> {
        use WeightViolationCode::*;
        let expected = match mv {
            WeightMove::Pass => return Ok(()),
            WeightMove::RaiseA { .. } => WeightPlayer::Alice,
            WeightMove::RaiseB { .. } | WeightMove::Disable(_) => WeightPlayer::Bob,
        };
        if player != expected {
            return Err(violation(WrongActor, format!("{player} may not play {mv:?}")));
        }
        match mv {
            WeightMove::RaiseA { element, value } => {
                if self.params.set_of(*element).is_none() {
                    return Err(violation(UnknownTarget, format!("no element {element}")));
                }
                let old = self.a(*element);
                if *value <= old {
                    return Err(violation(
                        NonMonotoneWeight,
                        format!("A({element}) would go from {old} to {value}"),
                    ));
                }
                let total = &self.a_total + value - &old;
                if total > Rational::one() {
                    return Err(violation(TotalWeightExceeded, format!("Alice total would be {total}")));
                }
                self.a_total = total;
                self.a.insert(*element, value.clone());
            }
            WeightMove::RaiseB { set, value } => {
                if *set >= self.params.set_count() {
                    return Err(violation(UnknownTarget, format!("no set {set}")));
                }
                let old = &self.b[*set];
                if value <= old {
                    return Err(violation(NonMonotoneWeight, format!("B({set}) would go from {old} to {value}")));
                }
                let total = &self.b_total + value - old;
                if total > Rational::one() {
                    return Err(violation(TotalWeightExceeded, format!("Bob total would be {total}")));
                }
                self.b_total = total;
                self.b[*set] = value.clone();
            }
            WeightMove::Disable(element) => {
                let Some(j) = self.params.set_of(*element) else {
                    return Err(violation(UnknownTarget, format!("no element {element}")));
                };
                if self.disabled.contains(element) {
                    return Err(violation(NonMonotoneWeight, format!("element {element} is already disabled")));
                }
                if self.enabled_in_set(j) <= 1 {
                    return Err(violation(
                        DisableWouldEmptySet,
                        format!("disabling {element} would leave set {j} without an enabled element"),
                    ));
                }
                self.disabled.insert(*element);
                self.disabled_per_set[j] += 1;
            }
            WeightMove::Pass => {}
        }
        Ok(())
    }

    /// True when `element` is enabled and `A(s) >= C * B(s)` with `A(s) > 0`.
    pub fn is_witness(&self, element: u64, c: u32) -> bool {
        let Some(j) = self.params.set_of(element) else { return false };
        let Some(a) = self.a.get(&element) else { return false };
        !self.disabled.contains(&element) && self.beats(a, j, c)
    }

    fn beats(&self, a: &Rational, j: usize, c: u32) -> bool {
        if a.is_zero() {
            return false;
        }
        // A * #S_j >= C * B(j), cleared of denominators.
        let b = &self.b[j];
        let lhs = a.numer() * BigInt::from(self.params.sizes()[j]) * b.denom();
        let rhs = BigInt::from(c) * b.numer() * a.denom();
        lhs >= rhs
    }

    pub fn ratio_witnesses(&self, c: u32) -> Vec<u64> {
        self.a.keys().copied().filter(|&s| self.is_witness(s, c)).collect()
    }

    pub fn set_witnesses(&self, j: usize, c: u32) -> Vec<u64> {
        self.a.range(self.params.set_range(j)).map(|(&s, _)| s).filter(|&s| self.is_witness(s, c)).collect()
    }

    pub fn verdict(&self) -> WeightVerdict {
        match self.ratio_witnesses(self.params.c()).first() {
            Some(&s) => WeightVerdict::AliceWins(s),
            None => WeightVerdict::BobWins,
        }
    }

    /// Recomputes totals and disabled counts from scratch.
    pub fn caches_coherent(&self) -> bool {
        let a: Rational = self.a.values().sum();
        let b: Rational = self.b.iter().sum();
        let mut per_set = vec![0u64; self.params.set_count()];
        for &s in &self.disabled {
            per_set[self.params.set_of(s).unwrap()] += 1;
        }
        a == self.a_total && b == self.b_total && per_set == self.disabled_per_set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(c: u32, size: u64, count: usize) -> WeightState {
        WeightState::new(WeightParams::equal(c, size, count).unwrap())
    }

    #[test]
    fn params_reject_degenerate_input() {
        assert_eq!(WeightParams::new(1, vec![]), Err(WeightError::NoSets));
        assert_eq!(WeightParams::new(1, vec![3, 0]), Err(WeightError::EmptySet(1)));
        let p = WeightParams::equal(2, 8, 256).unwrap();
        assert_eq!(p.total_elements(), 2048);
        assert!(p.is_equal_configuration());
        assert_eq!(p.set_of(8), Some(1));
        assert_eq!(p.set_of(2047), Some(255));
        assert_eq!(p.set_of(2048), None);
    }

    #[test]
    fn last_enabled_element_cannot_be_disabled() {
        let mut g = game(1, 4, 16);
        let range = g.params().set_range(2);
        let moves: Vec<_> = range.clone().take(3).map(WeightMove::Disable).collect();
        g.apply_weight_moves(WeightPlayer::Bob, &moves).unwrap();
        let err = g.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::Disable(range.end - 1)]).unwrap_err();
        assert_eq!(err.code, WeightViolationCode::DisableWouldEmptySet);
    }

    #[test]
    fn totals_are_capped_at_one() {
        let mut g = game(1, 4, 16);
        let ok = [WeightMove::RaiseA { element: 0, value: rational(3, 4) }];
        g.apply_weight_moves(WeightPlayer::Alice, &ok).unwrap();
        let bad = [WeightMove::RaiseA { element: 1, value: rational(1, 3) }];
        let err = g.apply_weight_moves(WeightPlayer::Alice, &bad).unwrap_err();
        assert_eq!(err.code, WeightViolationCode::TotalWeightExceeded);
        assert_eq!(g.a_total(), &rational(3, 4));
    }

    #[test]
    fn batches_are_atomic() {
        let mut g = game(1, 4, 16);
        let before = g.clone();
        let batch = [WeightMove::Disable(0), WeightMove::RaiseA { element: 1, value: rational(1, 2) }];
        let err = g.apply_weight_moves(WeightPlayer::Bob, &batch).unwrap_err();
        assert_eq!(err.code, WeightViolationCode::WrongActor);
        assert_eq!(g, before);
        g.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::Pass]).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn weights_never_decrease() {
        let mut g = game(1, 4, 16);
        g.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::RaiseB { set: 0, value: rational(1, 4) }]).unwrap();
        let err = g
            .apply_weight_moves(WeightPlayer::Bob, &[WeightMove::RaiseB { set: 0, value: rational(1, 8) }])
            .unwrap_err();
        assert_eq!(err.code, WeightViolationCode::NonMonotoneWeight);
    }

    #[test]
    fn witness_rule() {
        let mut g = game(1, 4, 16);
        g.apply_weight_moves(WeightPlayer::Alice, &[WeightMove::RaiseA { element: 0, value: rational(1, 16) }])
            .unwrap();
        assert_eq!(g.ratio_witnesses(1), vec![0]);
        g.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::RaiseB { set: 0, value: rational(1, 4) }]).unwrap();
        // tie: 1/16 against 1/16 still counts
        assert_eq!(g.ratio_witnesses(1), vec![0]);
        g.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::RaiseB { set: 0, value: rational(1, 2) }]).unwrap();
        assert!(g.ratio_witnesses(1).is_empty());
        assert_eq!(g.verdict(), WeightVerdict::BobWins);

        let mut h = game(1, 4, 16);
        h.apply_weight_moves(WeightPlayer::Alice, &[WeightMove::RaiseA { element: 5, value: rational(1, 2) }])
            .unwrap();
        h.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::Disable(5)]).unwrap();
        assert!(h.ratio_witnesses(1).is_empty());
        assert!(h.caches_coherent());
    }
}
