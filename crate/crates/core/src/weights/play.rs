use super::{
    AliceStrategy, BobAdversary, KolmogorovBob, ScriptedAlice, ScriptedBob, WeightMove, WeightParams, WeightPlayer,
    WeightState, WeightVerdict,
};
use crate::trace::{Actor, GameKind, MatchTrace, TraceAction, TraceHeader, TraceRecord};

pub trait AlicePlayer {
    fn name(&self) -> String;
    fn next_batch(&mut self, state: &WeightState) -> Vec<WeightMove>;
}

pub trait BobPlayer {
    fn name(&self) -> String;
    fn next_batch(&mut self, state: &WeightState) -> Vec<WeightMove>;
    fn may_act_later(&self) -> bool {
        false
    }
}

impl AlicePlayer for AliceStrategy {
    fn name(&self) -> String {
        "groups".into()
    }

    fn next_batch(&mut self, state: &WeightState) -> Vec<WeightMove> {
        self.alice_next_moves(state)
    }
}

impl AlicePlayer for ScriptedAlice {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn next_batch(&mut self, _state: &WeightState) -> Vec<WeightMove> {
        self.pop_batch()
    }
}

impl BobPlayer for BobAdversary {
    fn name(&self) -> String {
        self.kind().label()
    }

    fn next_batch(&mut self, state: &WeightState) -> Vec<WeightMove> {
        self.bob_adversary(state)
    }
}

impl BobPlayer for ScriptedBob {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn next_batch(&mut self, _state: &WeightState) -> Vec<WeightMove> {
        self.pop_batch()
    }
}

impl BobPlayer for KolmogorovBob {
    fn name(&self) -> String {
        "kolmogorov".into()
    }

    fn next_batch(&mut self, state: &WeightState) -> Vec<WeightMove> {
        self.kolmogorov_bob(state)
    }

    fn may_act_later(&self) -> bool {
        !self.is_exhausted()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightLimits {
    pub max_batches: u64,
    pub quiescence_rounds: u32,
}

impl WeightLimits {
    /// 64 batches per element, two quiet rounds.
    pub fn for_params(params: &WeightParams) -> Self {
        Self { max_batches: 64 * params.total_elements(), quiescence_rounds: 2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightStats {
    pub batches: u64,
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct WeightOutcome {
    pub state: WeightState,
    pub verdict: WeightVerdict,
    pub trace: MatchTrace,
    pub stats: WeightStats,
}

pub(crate) fn weight_header(params: &WeightParams) -> TraceHeader {
    let sizes: Vec<String> = params.sizes().iter().map(u64::to_string).collect();
    TraceHeader::new(GameKind::Weights).with("c", params.c()).with("sizes", sizes.join(","))
}

pub(crate) fn push_batch(trace: &mut MatchTrace, k: u64, player: WeightPlayer, batch: &[WeightMove]) {
    let actor = match player {
        WeightPlayer::Alice => Actor::Alice,
        WeightPlayer::Bob => Actor::Bob,
    };
    let moves: Vec<&WeightMove> = batch.iter().filter(|m| **m != WeightMove::Pass).collect();
    if moves.is_empty() {
        trace.push(TraceRecord { k, actor, board: None, action: TraceAction::Pass });
    }
    for m in moves {
        let action = match m {
            WeightMove::RaiseA { element, value } => TraceAction::RaiseA(*element, value.clone()),
            WeightMove::RaiseB { set, value } => TraceAction::RaiseB(*set, value.clone()),
            WeightMove::Disable(e) => TraceAction::Disable(*e),
            WeightMove::Pass => unreachable!(),
        };
        trace.push(TraceRecord { k, actor, board: None, action });
    }
}

/// Alternating batches, Alice first, until both pass for the quiescence
/// window or the batch budget runs out.
pub fn play_weight_match(
    params: WeightParams,
    alice: &mut dyn AlicePlayer,
    bob: &mut dyn BobPlayer,
    limits: WeightLimits,
) -> WeightOutcome {
    let header = weight_header(&params).with("alice", alice.name()).with("bob", bob.name());
    let mut trace = MatchTrace::new(header);
    let mut state = WeightState::new(params);
    let mut stats = WeightStats::default();
    let mut quiet = 0;
    let mut violation = None;

    'game: loop {
        let mut idle = true;
        for player in [WeightPlayer::Alice, WeightPlayer::Bob] {
            if stats.batches >= limits.max_batches {
                stats.truncated = true;
                break 'game;
            }
            let batch = match player {
                WeightPlayer::Alice => alice.next_batch(&state),
                WeightPlayer::Bob => bob.next_batch(&state),
            };
            push_batch(&mut trace, stats.batches, player, &batch);
            if let Err(v) = state.apply_weight_moves(player, &batch) {
                violation = Some(WeightVerdict::RuleViolation { player, code: v.code, reason: v.reason });
                break 'game;
            }
            idle &= batch.iter().all(|m| *m == WeightMove::Pass);
            stats.batches += 1;
        }
        if idle && !bob.may_act_later() {
            quiet += 1;
            if quiet >= limits.quiescence_rounds {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let verdict = violation.unwrap_or_else(|| state.verdict());
    trace.seal_weights(&state, &verdict, stats.batches);
    WeightOutcome { state, verdict, trace, stats }
}
