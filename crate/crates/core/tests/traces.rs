use complexity_games::arena::{run_arena, ArenaGreedy, ArenaParams, ArenaSemicomputable, ArenaVariant};
use complexity_games::board::{BoardParams, Cell, MoveAction, Player};
use complexity_games::strategy::{play_match, Adversary, AdversaryKind, MatchLimits, WhiteStrategy};
use complexity_games::trace::verify::{verify_text, verify_trace, VerifyError};
use complexity_games::trace::{MatchTrace, TraceAction, TraceRecord};
use complexity_games::weights::{
    play_weight_match, rational, AliceStrategy, BobAdversary, BobKind, Grouping, ScriptedAlice, WeightLimits,
    WeightMove, WeightParams,
};

fn board_trace(n: u32, kind: AdversaryKind) -> MatchTrace {
    let mut w = WhiteStrategy::default();
    let mut b = Adversary::new(kind);
    play_match(BoardParams::new(n).unwrap(), &mut w, &mut b, MatchLimits::default()).trace
}

fn weights_trace(bob: BobKind) -> MatchTrace {
    let p = WeightParams::equal(1, 4, 16).unwrap();
    let mut a = AliceStrategy::new(Grouping::Auto);
    play_weight_match(p.clone(), &mut a, &mut BobAdversary::new(bob), WeightLimits::for_params(&p)).trace
}

#[test]
fn written_traces_verify_with_identical_footers() {
    let dir = tempfile::tempdir().unwrap();
    let traces = [
        board_trace(5, AdversaryKind::GreedyKiller),
        board_trace(6, AdversaryKind::RandomBlack { seed: 3 }),
        weights_trace(BobKind::WeightMatcher),
        weights_trace(BobKind::Random { seed: 9 }),
    ];
    for (i, t) in traces.iter().enumerate() {
        let path = dir.path().join(format!("t{i}.trace"));
        t.write_to(&path).unwrap();
        let v = verify_trace(&path).unwrap();
        assert_eq!(v.footer, t.footer);
        let (back, _) = MatchTrace::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back.to_text(), t.to_text());
    }
}

#[test]
fn arena_traces_recheck_global_budgets() {
    for variant in [ArenaVariant::Plain, ArenaVariant::Prefix] {
        let p = ArenaParams::new(1, 8, variant).unwrap();
        let out = run_arena(p, &mut ArenaSemicomputable::new(p), MatchLimits::default());
        assert_eq!(verify_text(&out.trace.to_text()).unwrap().footer, out.trace.footer);
        let out = run_arena(p, &mut ArenaGreedy, MatchLimits::default());
        let mut t = out.trace.clone();
        assert_eq!(verify_text(&t.to_text()).unwrap().footer, t.footer);

        // a second row-0 black pawn on another board breaks a shared budget
        let first = t.records.iter().position(|r| r.board == Some(8)).unwrap();
        let k = t.records[first].k;
        t.records.insert(first, TraceRecord::board(k, Player::Black, Some(7), MoveAction::PlaceBlack(Cell::new(100, 0))));
        t.records.insert(first, TraceRecord::board(k, Player::Black, Some(6), MoveAction::PlaceBlack(Cell::new(60, 0))));
        let err = verify_text(&t.to_text()).unwrap_err();
        assert!(err.is_rule_violation(), "{err}");
    }
}

#[test]
fn forged_row_zero_pawn_is_reported_at_its_line() {
    let mut t = board_trace(4, AdversaryKind::GreedyKiller);
    let idx = t.records.iter().position(|r| r.action == TraceAction::Pass && r.k % 2 == 1).unwrap_or(t.records.len());
    let k = idx as u64;
    let first_black_row0 = t
        .records
        .iter()
        .find_map(|r| match r.action {
            TraceAction::Place(c) if r.actor.board_player() == Some(Player::Black) && c.row == 0 => Some(c),
            _ => None,
        })
        .expect("greedy Black spends its row-0 pawn");
    let forged = TraceRecord::board(k, Player::Black, None, MoveAction::PlaceBlack(Cell::new(first_black_row0.column + 1, 0)));
    if idx < t.records.len() {
        t.records[idx] = forged;
    } else {
        t.records.push(TraceRecord::board(k - 1, Player::White, None, MoveAction::Pass));
        t.records.push(forged);
    }
    match verify_text(&t.to_text()).unwrap_err() {
        VerifyError::Violation { line, code, .. } => {
            let at = t.records.iter().position(|r| r.k == k && r.actor.board_player() == Some(Player::Black)).unwrap();
            assert_eq!(line, 3 + t.header.params.len() + at);
            assert_eq!(code, "RowBudgetBlack");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn recorded_violations_replay_as_final_violations() {
    let p = WeightParams::equal(1, 4, 4).unwrap();
    let mut a = ScriptedAlice::new(vec![vec![WeightMove::RaiseA { element: 0, value: rational(3, 2) }]]);
    let out = play_weight_match(p.clone(), &mut a, &mut BobAdversary::new(BobKind::Passive), WeightLimits::for_params(&p));
    let v = verify_text(&out.trace.to_text()).unwrap();
    assert!(v.final_violation.unwrap().1.starts_with("TotalWeightExceeded"));
}

#[test]
fn unknown_versions_are_rejected() {
    let text = board_trace(3, AdversaryKind::GreedyKiller).to_text().replacen("cgame-trace 1", "cgame-trace 2", 1);
    assert!(matches!(verify_text(&text), Err(VerifyError::Parse(_))));
}
