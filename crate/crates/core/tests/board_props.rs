use std::collections::BTreeSet;

use complexity_games::board::{BoardParams, BoardState, Cell, MoveAction, Player};
use complexity_games::strategy::{play_match, Adversary, AdversaryKind, MatchLimits, WhiteStrategy};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Step {
    White(u64, u32),
    Black(u64, u32),
    Blacken(u64, u32),
    Pass(bool),
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        (0u64..40, 0u32..7).prop_map(|(c, r)| Step::White(c, r)),
        (0u64..40, 0u32..7).prop_map(|(c, r)| Step::Black(c, r)),
        (0u64..40, 0u32..7).prop_map(|(c, r)| Step::Blacken(c, r)),
        any::<bool>().prop_map(Step::Pass),
    ]
}

fn as_move(s: &Step) -> (Player, MoveAction) {
    match *s {
        Step::White(c, r) => (Player::White, MoveAction::PlaceWhite(Cell::new(c, r))),
        Step::Black(c, r) => (Player::Black, MoveAction::PlaceBlack(Cell::new(c, r))),
        Step::Blacken(c, r) => (Player::Black, MoveAction::Blacken(Cell::new(c, r))),
        Step::Pass(w) => (if w { Player::White } else { Player::Black }, MoveAction::Pass),
    }
}

fn dead_set(s: &BoardState) -> BTreeSet<Cell> {
    s.dead_white().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn budgets_monotonicity_and_counters(n in 1u32..=5, steps in prop::collection::vec(step(), 0..120)) {
        let mut state = BoardState::new(BoardParams::new(n).unwrap());
        for s in &steps {
            let before = state.clone();
            let (player, mv) = as_move(s);
            match state.apply_move(player, &mv) {
                Err(_) => prop_assert_eq!(&state, &before),
                Ok(()) => {
                    prop_assert!(before.white().is_subset(state.white()));
                    prop_assert!(before.black().is_subset(state.black()));
                    prop_assert!(before.blackened().is_subset(state.blackened()));
                    prop_assert!(dead_set(&before).is_subset(&dead_set(&state)));
                }
            }
            prop_assert!(state.budgets_hold());
            prop_assert!(state.counters_coherent());
        }
    }

    #[test]
    fn white_stays_legal_against_random_black(n in 1u32..=9, seed in any::<u64>()) {
        let params = BoardParams::new(n).unwrap();
        let mut w = WhiteStrategy::default();
        let mut b = Adversary::new(AdversaryKind::RandomBlack { seed });
        let out = play_match(params, &mut w, &mut b, MatchLimits::default());
        prop_assert!(out.verdict.is_white_win(), "{}", out.verdict);
        prop_assert_eq!(out.stats.upper_half_violations(params), 0);
        prop_assert!(out.state.budgets_hold() && out.state.counters_coherent());
    }
}
