use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{pow2_neg, Rational, WeightMove, WeightParams, WeightPlayer, WeightState};
use crate::bits::BitString;
use crate::lab::{ApproxTable, Discipline, LabConfig, ProgramRecord};

/// Bob's matching raise overshoots the tie value by a factor `1 + 2^-32`.
pub const MATCH_EPSILON_EXP: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobKind {
    GreedyDisabler,
    WeightMatcher,
    Random { seed: u64 },
    /// Never moves.
    Passive,
}

impl BobKind {
    pub fn label(&self) -> String {
        match self {
            BobKind::GreedyDisabler => "disabler".into(),
            BobKind::WeightMatcher => "matcher".into(),
            BobKind::Random { seed } => format!("random:{seed}"),
            BobKind::Passive => "passive".into(),
        }
    }
}

/// Smallest `B(j)` of the form `tie · (1 + 2^-32)` that beats every witness
/// of set `j`, where `tie` is the largest `A(s)·#S_j / C`.
pub fn defeating_value(state: &WeightState, j: usize) -> Option<Rational> {
    let c = state.params().c();
    let size = Rational::from_integer(BigInt::from(state.params().sizes()[j]));
    let tie = state
        .set_witnesses(j, c)
        .into_iter()
        .map(|s| state.a(s) * &size / Rational::from_integer(BigInt::from(c)))
        .max()?;
    Some(tie * (Rational::one() + pow2_neg(MATCH_EPSILON_EXP)))
}

fn witness_sets(state: &WeightState) -> BTreeSet<usize> {
    let params = state.params();
    state.ratio_witnesses(params.c()).into_iter().filter_map(|s| params.set_of(s)).collect()
}

fn disable_all(state: &WeightState, j: usize) -> Option<Vec<WeightMove>> {
    let w = state.set_witnesses(j, state.params().c());
    (state.enabled_in_set(j) > w.len() as u64).then(|| w.into_iter().map(WeightMove::Disable).collect())
}

fn match_set(state: &WeightState, j: usize) -> Option<Vec<WeightMove>> {
    let value = defeating_value(state, j)?;
    let total = state.b_total() - state.b_set(j) + &value;
    (total <= Rational::one()).then(|| vec![WeightMove::RaiseB { set: j, value }])
}

/// Keeps the moves of `plan` that are legal in sequence.
fn legal_prefix(state: &WeightState, plan: Vec<WeightMove>) -> Vec<WeightMove> {
    let mut scratch = state.clone();
    plan.into_iter()
        .filter(|m| scratch.apply_weight_moves(WeightPlayer::Bob, std::slice::from_ref(m)).is_ok())
        .collect()
}

#[derive(Debug, Clone)]
pub struct BobAdversary {
    kind: BobKind,
    rng: ChaCha8Rng,
}

impl BobAdversary {
    pub fn new(kind: BobKind) -> Self {
        let seed = match kind {
            BobKind::Random { seed } => seed,
            _ => 0,
        };
        Self { kind, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn kind(&self) -> BobKind {
        self.kind
    }

    /// Bob's reply to every set that currently holds a witness.
    pub fn bob_adversary(&mut self, state: &WeightState) -> Vec<WeightMove> {
        let mut plan = Vec::new();
        for j in witness_sets(state) {
            let moves = match self.kind {
                BobKind::Passive => None,
                BobKind::GreedyDisabler => disable_all(state, j).or_else(|| match_set(state, j)),
                BobKind::WeightMatcher => match_set(state, j),
                BobKind::Random { .. } => {
                    if self.rng.gen_bool(0.5) {
                        disable_all(state, j).or_else(|| match_set(state, j))
                    } else {
                        match_set(state, j).or_else(|| disable_all(state, j))
                    }
                }
            };
            plan.extend(moves.unwrap_or_default());
        }
        legal_prefix(state, plan)
    }
}

/// Plays fixed batches, then passes.
#[derive(Debug, Clone)]
pub struct ScriptedBob {
    batches: VecDeque<Vec<WeightMove>>,
}

impl ScriptedBob {
    pub fn new(batches: Vec<Vec<WeightMove>>) -> Self {
        Self { batches: batches.into() }
    }

    pub fn pop_batch(&mut self) -> Vec<WeightMove> {
        self.batches.pop_front().unwrap_or_default()
    }
}

/// Bob driven by the complexity lab. Sets are the strings of lengths
/// `base+1 ..= base+N` with `base = ceil(log2 8C)`; `Q` is the set of
/// strings with no plain program shorter than `|x| - deficiency`.
#[derive(Debug, Clone)]
pub struct KolmogorovConfig {
    pub c: u32,
    pub sets: usize,
    pub deficiency: usize,
    pub lab: LabConfig,
}

impl KolmogorovConfig {
    pub fn new(c: u32, sets: usize) -> Self {
        Self {
            c,
            sets,
            deficiency: 1,
            lab: LabConfig { max_len: 10, step_cap: 32, cond_pool: Vec::new(), prefix: true, ..LabConfig::default() },
        }
    }

    pub fn base_len(&self) -> u32 {
        let m = 8 * self.c as u64;
        64 - (m - 1).leading_zeros()
    }

    pub fn params(&self) -> WeightParams {
        let base = self.base_len();
        let sizes = (1..=self.sets as u32).map(|j| 1u64 << (base + j)).collect();
        WeightParams::new(self.c, sizes).expect("nonempty family")
    }
}

#[derive(Debug, Clone)]
pub struct KolmogorovBob {
    config: KolmogorovConfig,
    lab: ApproxTable,
    pending: Vec<WeightMove>,
}

impl KolmogorovBob {
    pub fn new(config: KolmogorovConfig) -> Self {
        let lab = ApproxTable::new(config.lab.clone());
        Self { config, lab, pending: Vec::new() }
    }

    pub fn config(&self) -> &KolmogorovConfig {
        &self.config
    }

    pub fn lab(&self) -> &ApproxTable {
        &self.lab
    }

    pub fn is_exhausted(&self) -> bool {
        self.lab.is_exhausted()
    }

    /// Set index holding strings of length `len`, if any.
    fn set_for_len(&self, len: u64) -> Option<usize> {
        let base = self.config.base_len() as u64;
        (len > base && len <= base + self.config.sets as u64).then(|| (len - base - 1) as usize)
    }

    /// Moves induced by fresh discoveries, before legality filtering.
    pub fn moves_for(&self, records: &[ProgramRecord], state: &WeightState) -> Vec<WeightMove> {
        let mut out = Vec::new();
        for r in records {
            if !r.condition.is_empty() {
                continue;
            }
            if r.discipline == Discipline::Plain && r.program.len() + self.config.deficiency < r.output.len() {
                if let Some(j) = self.set_for_len(r.output.len() as u64) {
                    out.push(WeightMove::Disable(state.params().set_range(j).start + r.output.to_column()));
                }
            }
            if r.discipline == Discipline::PrefixFree {
                let Some(j) = r.output.to_natural().and_then(|n| self.set_for_len(n)) else { continue };
                // per-element 2^(-l-n) over 2^n elements
                let target = pow2_neg(r.program.len() as u32);
                let room = Rational::one() - state.b_total() + state.b_set(j);
                let value = target.min(room);
                if value > *state.b_set(j) && !value.is_zero() {
                    out.push(WeightMove::RaiseB { set: j, value });
                }
            }
        }
        out
    }

    /// Runs one lab stage and returns Bob's batch.
    pub fn kolmogorov_bob(&mut self, state: &WeightState) -> Vec<WeightMove> {
        let mut plan = std::mem::take(&mut self.pending);
        if !self.lab.is_exhausted() {
            if let Ok(found) = self.lab.dovetail_stage() {
                plan.extend(self.moves_for(&found, state));
            }
        }
        // keep only the last raise per set so the batch stays monotone
        let mut seen = BTreeSet::new();
        let mut kept: Vec<WeightMove> = plan
            .into_iter()
            .rev()
            .filter(|m| match m {
                WeightMove::RaiseB { set, .. } => seen.insert(*set),
                _ => true,
            })
            .collect();
        kept.reverse();
        legal_prefix(state, kept)
    }
}

/// Strings of `len` bits for every element of set `j` in a Kolmogorov game.
pub fn element_string(params: &WeightParams, element: u64) -> Option<BitString> {
    let j = params.set_of(element)?;
    let range = params.set_range(j);
    let len = (range.end - range.start).trailing_zeros() as usize;
    Some(BitString::from_column(element - range.start, len))
}
