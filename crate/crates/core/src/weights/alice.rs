use std::collections::VecDeque;
use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Rational, WeightMove, WeightState};

/// How Alice splits a set into targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// `4C` groups when the set size is a multiple of `4C`, else `8C`.
    Auto,
    /// Exactly this many groups in every set.
    Force(u32),
}

/// Bookkeeping for one finished set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetRecord {
    pub set: usize,
    /// Alice's spend on this set alone.
    pub spent: Rational,
    /// Cumulative spend over all finished sets.
    pub beta: Rational,
    pub alpha: Rational,
    /// Bob's cumulative weight on sets `0..=set`.
    pub bob_spent: Rational,
}

impl SetRecord {
    /// `2β < 1`, `α > 1/2` and Bob outspending Alice twice over.
    pub fn halving_holds(&self) -> bool {
        let two = Rational::from_integer(BigInt::from(2));
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        &two * &self.beta < Rational::one() && self.alpha > half && self.bob_spent > &two * &self.beta
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliceMemory {
    pub set: usize,
    pub group: u32,
    pub groups: u32,
    pub alpha: Rational,
    pub spent_here: Rational,
    pub entered: bool,
    pub placed: bool,
}

#[derive(Debug, Clone)]
pub struct AliceStrategy {
    grouping: Grouping,
    pub memory: AliceMemory,
    records: Vec<SetRecord>,
}

/// Local index ranges of `k` groups over `size` elements, sizes differing by
/// at most one (larger groups first). Groups may be empty when `size < k`.
pub fn split_groups(size: u64, k: u32) -> Vec<Range<u64>> {
    let k = k as u64;
    let (base, extra) = (size / k, size % k);
    let mut start = 0;
    (0..k)
        .map(|g| {
            let len = base + u64::from(g < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

impl AliceStrategy {
    pub fn new(grouping: Grouping) -> Self {
        Self { grouping, memory: AliceMemory::default(), records: Vec::new() }
    }

    pub fn records(&self) -> &[SetRecord] {
        &self.records
    }

    pub fn group_count(&self, c: u32, size: u64) -> u32 {
        match self.grouping {
            Grouping::Force(k) => k.max(1),
            Grouping::Auto if size.is_multiple_of(4 * c as u64) => 4 * c,
            Grouping::Auto => 8 * c,
        }
    }

    fn group(&self, state: &WeightState, j: usize, g: u32) -> Range<u64> {
        let range = state.params().set_range(j);
        let local = split_groups(range.end - range.start, self.memory.groups)[g as usize].clone();
        range.start + local.start..range.start + local.end
    }

    fn book(&mut self, state: &WeightState) {
        let j = self.memory.set;
        let bob_spent = (0..=j).map(|i| state.b_set(i)).sum();
        let beta = state.a_total().clone();
        self.records.push(SetRecord {
            set: j,
            spent: self.memory.spent_here.clone(),
            alpha: Rational::one() - &beta,
            beta,
            bob_spent,
        });
    }

    /// Alice's next batch; empty means pass.
    ///
    /// In set `j` she puts `α·2^g/2^K` on group `g`, split over its enabled
    /// members. A fully disabled group sends her to the next group; a set
    /// with no witness left is booked and she enters the next set with the
    /// weight still available.
    pub fn alice_next_moves(&mut self, state: &WeightState) -> Vec<WeightMove> {
        let params = state.params();
        let c = params.c();
        loop {
            let j = self.memory.set;
            if j >= params.set_count() {
                return Vec::new();
            }
            if !self.memory.entered {
                let size = params.sizes()[j];
                self.memory = AliceMemory {
                    set: j,
                    group: 0,
                    groups: self.group_count(c, size),
                    alpha: Rational::one() - state.a_total(),
                    spent_here: Rational::zero(),
                    entered: true,
                    placed: false,
                };
            }
            if self.memory.placed {
                let g = self.group(state, j, self.memory.group);
                if g.clone().all(|s| state.is_disabled(s)) {
                    self.memory.group += 1;
                    self.memory.placed = false;
                } else if state.set_witnesses(j, c).is_empty() {
                    self.book(state);
                    self.memory.set += 1;
                    self.memory.entered = false;
                    continue;
                } else {
                    return Vec::new();
                }
            }
            while self.memory.group < self.memory.groups {
                let g = self.memory.group;
                let enabled: Vec<u64> = self.group(state, j, g).filter(|&s| !state.is_disabled(s)).collect();
                if enabled.is_empty() {
                    self.memory.group += 1;
                    continue;
                }
                let w = &self.memory.alpha * Rational::new(BigInt::one() << g, BigInt::one() << self.memory.groups);
                let per = &w / Rational::from_integer(BigInt::from(enabled.len()));
                self.memory.spent_here += &w;
                self.memory.placed = true;
                return enabled
                    .into_iter()
                    .map(|element| WeightMove::RaiseA { element, value: state.a(element) + &per })
                    .collect();
            }
            return Vec::new();
        }
    }
}

/// Plays fixed batches, then passes.
#[derive(Debug, Clone)]
pub struct ScriptedAlice {
    batches: VecDeque<Vec<WeightMove>>,
}

impl ScriptedAlice {
    pub fn new(batches: Vec<Vec<WeightMove>>) -> Self {
        Self { batches: batches.into() }
    }

    pub fn pop_batch(&mut self) -> Vec<WeightMove> {
        self.batches.pop_front().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{rational, WeightParams, WeightPlayer};

    #[test]
    fn groups_are_balanced() {
        let g = split_groups(10, 8);
        let lens: Vec<u64> = g.iter().map(|r| r.end - r.start).collect();
        assert_eq!(lens, vec![2, 2, 1, 1, 1, 1, 1, 1]);
        assert_eq!(g.last().unwrap().end, 10);
        assert_eq!(split_groups(16, 4), vec![0..4, 4..8, 8..12, 12..16]);
    }

    #[test]
    fn grouping_rule() {
        let a = AliceStrategy::new(Grouping::Auto);
        assert_eq!(a.group_count(1, 4), 4);
        assert_eq!(a.group_count(1, 12), 4);
        assert_eq!(a.group_count(1, 9), 8);
        assert_eq!(a.group_count(2, 8), 8);
        assert_eq!(AliceStrategy::new(Grouping::Force(8)).group_count(1, 12), 8);
    }

    #[test]
    fn first_moves_double() {
        let mut s = WeightState::new(WeightParams::equal(1, 4, 16).unwrap());
        let mut a = AliceStrategy::new(Grouping::Auto);
        let m = a.alice_next_moves(&s);
        assert_eq!(m, vec![WeightMove::RaiseA { element: 0, value: rational(1, 16) }]);
        s.apply_weight_moves(WeightPlayer::Alice, &m).unwrap();
        assert!(a.alice_next_moves(&s).is_empty());
        s.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::Disable(0)]).unwrap();
        let m = a.alice_next_moves(&s);
        assert_eq!(m, vec![WeightMove::RaiseA { element: 1, value: rational(2, 16) }]);
    }

    #[test]
    fn beaten_set_is_booked() {
        let mut s = WeightState::new(WeightParams::equal(1, 4, 16).unwrap());
        let mut a = AliceStrategy::new(Grouping::Auto);
        let m = a.alice_next_moves(&s);
        s.apply_weight_moves(WeightPlayer::Alice, &m).unwrap();
        s.apply_weight_moves(WeightPlayer::Bob, &[WeightMove::RaiseB { set: 0, value: rational(1, 3) }]).unwrap();
        let m = a.alice_next_moves(&s);
        // alpha = 15/16, first weight alpha/16
        assert_eq!(m, vec![WeightMove::RaiseA { element: 4, value: rational(15, 256) }]);
        let r = &a.records()[0];
        assert_eq!(r.beta, rational(1, 16));
        assert!(r.halving_holds());
    }
}
