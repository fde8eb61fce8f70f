//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p complexity-games --test acceptance`.

use std::time::{Duration, Instant};

use complexity_games::arena::{
    alive_weight_bound, run_arena, white_row_bound, ArenaBlack, ArenaGreedy, ArenaOutcome, ArenaParams,
    ArenaSemicomputable, ArenaVariant,
};
use complexity_games::bits::BitString;
use complexity_games::board::{row_budget, BoardParams};
use complexity_games::dyadic::Dyadic;
use complexity_games::lab::machine::MachineSpec;
use complexity_games::lab::{brute_force_c, ApproxTable, LabConfig};
use complexity_games::search::{exhaustive_black_search, SearchLimits};
use complexity_games::strategy::{play_match, Adversary, AdversaryKind, MatchLimits, WhiteStrategy};
use complexity_games::trace::verify::verify_trace;
use complexity_games::trace::MatchTrace;
use complexity_games::weights::{
    play_weight_match, AliceStrategy, BobAdversary, BobKind, Grouping, WeightLimits, WeightParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RANDOM_BOARD_SEEDS: u64 = 200;
const RANDOM_BOB_SEEDS: u64 = 100;
const GENERAL_SIZES_SEED: u64 = 0x5eed;
const GENERAL_RANDOM_BOB_SEEDS: u64 = 20;
const FUZZ_SEED: u64 = 0xf022;
const FUZZ_CASES: usize = 1000;

type Check = Result<String, String>;

#[derive(Default)]
struct UpperHalf {
    placements: u64,
    violations: u64,
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {}s budget", budget.as_secs())),
        Err(d) => (false, d),
    };
    println!("{} {id:>2} {name}: {detail} [{:.1}s]", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    ok
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exhaustive(upper: &mut UpperHalf) -> Check {
    let mut nodes = 0;
    for n in 1..=3 {
        let r = exhaustive_black_search(BoardParams::new(n).unwrap(), SearchLimits::default())
            .map_err(|e| format!("n={n}: {e}"))?;
        ensure(r.worst_case.is_white_win(), || format!("n={n}: worst case {}", r.worst_case))?;
        ensure(r.dead_count_violations == 0, || format!("n={n}: {} dead-count violations", r.dead_count_violations))?;
        upper.placements += r.white_placements;
        upper.violations += r.upper_half_violations;
        nodes += r.nodes;
    }
    Ok(format!("WhiteWins for n=1..3, {nodes} positions"))
}

fn randomized(upper: &mut UpperHalf) -> Check {
    let mut matches = 0;
    for n in 4..=16 {
        let params = BoardParams::new(n).unwrap();
        let kinds = (0..RANDOM_BOARD_SEEDS)
            .map(|seed| AdversaryKind::RandomBlack { seed })
            .chain([AdversaryKind::GreedyKiller, AdversaryKind::BudgetExhauster]);
        for kind in kinds {
            let label = kind.label();
            let out = play_match(params, &mut WhiteStrategy::default(), &mut Adversary::new(kind), MatchLimits::default());
            ensure(out.verdict.is_white_win(), || format!("n={n} vs {label}: {}", out.verdict))?;
            ensure(!out.stats.truncated, || format!("n={n} vs {label}: hit the move cap"))?;
            ensure(out.state.budgets_hold() && out.state.counters_coherent(), || {
                format!("n={n} vs {label}: invariant broken")
            })?;
            upper.placements += out.stats.white_rows.len() as u64;
            upper.violations += out.stats.upper_half_violations(params) as u64;
            matches += 1;
        }
    }
    Ok(format!("{matches} matches, all WhiteWins, no invariant violations"))
}

fn upper_half(upper: &UpperHalf) -> Check {
    ensure(upper.violations == 0, || format!("{} of {} placements below the floor", upper.violations, upper.placements))?;
    ensure(upper.placements > 0, || "no placements recorded".into())?;
    Ok(format!("{} placements, none below row ceil(n/2)-1", upper.placements))
}

fn arena_run(variant: ArenaVariant, black: &mut dyn ArenaBlack) -> Result<ArenaOutcome, String> {
    let params = ArenaParams::new(1, 12, variant).unwrap();
    let out = run_arena(params, black, MatchLimits::default());
    let who = format!("{} vs {}", variant.as_str(), black.name());
    if let Some(v) = &out.violation {
        return Err(format!("{who}: board {} {} {}", v.board, v.code, v.reason));
    }
    ensure(!out.stats.truncated, || format!("{who}: hit the round cap"))?;
    ensure(out.verdicts.values().all(|v| v.is_white_win()), || format!("{who}: a board was lost"))?;
    ensure(out.state.globals_coherent(), || format!("{who}: global counters incoherent"))?;
    Ok(out)
}

fn plain_arena() -> Check {
    let mut report = Vec::new();
    let mut semi = ArenaSemicomputable::new(ArenaParams::new(1, 12, ArenaVariant::Plain).unwrap());
    for black in [&mut semi as &mut dyn ArenaBlack, &mut ArenaGreedy] {
        let name = black.name();
        let out = arena_run(ArenaVariant::Plain, black)?;
        for (i, &w) in out.stats.white_rows_total.iter().enumerate() {
            ensure(w <= white_row_bound(i as u32), || format!("{name}: row {i} holds {w} white pawns"))?;
        }
        for (i, &b) in out.state.global_black_per_row().iter().enumerate() {
            ensure(b <= row_budget(i as u32), || format!("{name}: row {i} holds {b} black pawns"))?;
        }
        report.push(format!("{name}: live constant {}", out.stats.live_constant()));
    }
    Ok(format!("12 boards WhiteWins; {}", report.join(", ")))
}

fn prefix_arena() -> Check {
    let params = ArenaParams::new(1, 12, ArenaVariant::Prefix).unwrap();
    let bound = alive_weight_bound(params);
    let one = Dyadic::one();
    let mut report = Vec::new();
    let mut semi = ArenaSemicomputable::new(params);
    for black in [&mut semi as &mut dyn ArenaBlack, &mut ArenaGreedy] {
        let name = black.name();
        let out = arena_run(ArenaVariant::Prefix, black)?;
        let dead = &out.stats.max_pawn_killed_weight;
        let alive = &out.stats.census.alive_weight;
        ensure(*dead < one, || format!("{name}: dead-white weight reached {dead}"))?;
        ensure(*out.state.black_weight() < one, || format!("{name}: black weight {}", out.state.black_weight()))?;
        ensure(*alive <= bound, || format!("{name}: alive weight {alive} above {bound}"))?;
        report.push(format!("{name}: black {} dead<={dead} alive {alive}", out.state.black_weight()));
    }
    Ok(format!("{}; alive bound {bound}", report.join(", ")))
}

fn bob_suite(random_seeds: u64) -> Vec<BobKind> {
    let mut v = vec![BobKind::GreedyDisabler, BobKind::WeightMatcher];
    v.extend((0..random_seeds).map(|seed| BobKind::Random { seed }));
    v
}

fn weight_matches(params: &WeightParams, grouping: Grouping, bobs: &[BobKind]) -> Result<usize, String> {
    let mut sets_checked = 0;
    for &bob in bobs {
        let mut alice = AliceStrategy::new(grouping);
        let out = play_weight_match(params.clone(), &mut alice, &mut BobAdversary::new(bob), WeightLimits::for_params(params));
        let who = format!("C={} vs {}", params.c(), bob.label());
        ensure(out.verdict.is_alice_win(), || format!("{who}: {}", out.verdict))?;
        ensure(out.state.caches_coherent(), || format!("{who}: weight caches incoherent"))?;
        for r in alice.records() {
            ensure(r.halving_holds(), || format!("{who}: set {} has beta {} alpha {}", r.set, r.beta, r.alpha))?;
        }
        sets_checked += alice.records().len();
    }
    Ok(sets_checked)
}

fn equal_weights() -> Check {
    let bobs = bob_suite(RANDOM_BOB_SEEDS);
    let mut sets = 0;
    for (c, m, n) in [(1, 4, 16), (2, 8, 256)] {
        let params = WeightParams::equal(c, m, n).unwrap();
        sets += weight_matches(&params, Grouping::Auto, &bobs)?;
    }
    Ok(format!("{} matches AliceWins, {sets} completed sets with 2b<1 and a>1/2", 2 * bobs.len()))
}

fn general_weights() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(GENERAL_SIZES_SEED);
    let sizes: Vec<u64> = (0..256).map(|_| rng.gen_range(8..=24)).collect();
    let params = WeightParams::new(1, sizes).unwrap();
    let bobs = bob_suite(GENERAL_RANDOM_BOB_SEEDS);
    let sets = weight_matches(&params, Grouping::Force(8), &bobs)?;
    Ok(format!("{} matches AliceWins with 8 groups per set, {sets} completed sets", bobs.len()))
}

fn lab_soundness() -> Check {
    let pool: Vec<BitString> = ["0", "1", "01", "110"].iter().map(|s| s.parse().unwrap()).collect();
    let config = LabConfig {
        max_len: 14,
        step_cap: 20,
        cond_pool: pool.clone(),
        cond_max_len: 8,
        prefix: true,
        ..LabConfig::default()
    };
    let mut table = ApproxTable::new(config.clone());
    let one = Dyadic::one();
    let mut prev = (table.plain_bounds().clone(), table.prefix_bounds().clone());
    while !table.is_exhausted() {
        table.dovetail_stage().map_err(|e| e.to_string())?;
        ensure(*table.kraft_accum() <= one, || format!("stage {}: Kraft sum {}", table.stage(), table.kraft_accum()))?;
        for (k, &old) in &prev.0 {
            ensure(table.plain_bounds().get(k).is_some_and(|&b| b <= old), || format!("plain bound {k:?} rose"))?;
        }
        for (k, &old) in &prev.1 {
            ensure(table.prefix_bounds().get(k).is_some_and(|&b| b <= old), || format!("prefix bound {k:?} rose"))?;
        }
        prev = (table.plain_bounds().clone(), table.prefix_bounds().clone());
    }
    let plain = MachineSpec { max_output: config.max_output, ..MachineSpec::plain() };
    let prefix = MachineSpec { max_output: config.max_output, ..MachineSpec::prefix_free() };
    let empty = BitString::new();
    let mut pairs = 0;
    for x in BitString::all_up_to(6) {
        for y in std::iter::once(&empty).chain(&pool) {
            let cap = if y.is_empty() { config.max_len } else { config.cond_max_len };
            let brute = brute_force_c(&plain, &x, y, cap, config.step_cap, u64::MAX).map_err(|e| e.to_string())?;
            let lab = table.approx_plain(&x, y);
            ensure(lab == brute, || format!("C({x}|{y}): lab {lab:?}, brute force {brute:?}"))?;
            pairs += 1;
        }
        let brute = brute_force_c(&prefix, &x, &empty, config.max_len, config.step_cap, u64::MAX).map_err(|e| e.to_string())?;
        let lab = table.approx_prefix(&x);
        ensure(lab == brute, || format!("K({x}): lab {lab:?}, brute force {brute:?}"))?;
        pairs += 1;
    }
    Ok(format!("{pairs} bounds equal brute force after {} stages; Kraft sum {}", table.stage(), table.kraft_accum()))
}

fn semicomputable_legality() -> Check {
    let mut report = Vec::new();
    for variant in [ArenaVariant::Plain, ArenaVariant::Prefix] {
        let params = ArenaParams::new(1, 12, variant).unwrap();
        let mut semi = ArenaSemicomputable::new(params);
        let out = run_arena(params, &mut semi, MatchLimits::default());
        ensure(out.violation.is_none(), || format!("{}: {:?}", variant.as_str(), out.violation))?;
        ensure(semi.lab().is_exhausted(), || format!("{}: lab not run to its limit", variant.as_str()))?;
        let r = semi.row_budget_rejections();
        ensure(r == 0, || format!("{}: {r} row-budget rejections", variant.as_str()))?;
        report.push(format!("{} {} actions", variant.as_str(), out.trace.records.iter().filter(|r| r.actor.tag() == "B").count()));
    }
    Ok(format!("zero rejections ({})", report.join(", ")))
}

fn fuzz_traces() -> Check {
    let boards = |n, kind| {
        let out = play_match(BoardParams::new(n).unwrap(), &mut WhiteStrategy::default(), &mut Adversary::new(kind), MatchLimits::default());
        out.trace
    };
    let arena = |variant, semi: bool| {
        let p = ArenaParams::new(1, 6, variant).unwrap();
        if semi {
            run_arena(p, &mut ArenaSemicomputable::new(p), MatchLimits::default()).trace
        } else {
            run_arena(p, &mut ArenaGreedy, MatchLimits::default()).trace
        }
    };
    let weights = |bob| {
        let p = WeightParams::equal(1, 4, 16).unwrap();
        let mut a = AliceStrategy::new(Grouping::Auto);
        play_weight_match(p.clone(), &mut a, &mut BobAdversary::new(bob), WeightLimits::for_params(&p)).trace
    };
    let traces: Vec<MatchTrace> = vec![
        boards(6, AdversaryKind::GreedyKiller),
        boards(5, AdversaryKind::RandomBlack { seed: 11 }),
        arena(ArenaVariant::Plain, true),
        arena(ArenaVariant::Prefix, false),
        weights(BobKind::WeightMatcher),
        weights(BobKind::Random { seed: 4 }),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("fuzz.trace");
    for (i, t) in traces.iter().enumerate() {
        t.write_to(&path).map_err(|e| e.to_string())?;
        let v = verify_trace(&path).map_err(|e| format!("trace {i} fails to verify: {e}"))?;
        ensure(v.footer == t.footer, || format!("trace {i}: footer differs after round trip"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    let (mut semantic, mut rejected, mut benign_passed) = (0, 0, 0);
    for case in 0..FUZZ_CASES {
        let t = &traces[case % traces.len()];
        let original = t.to_text();
        let mut bytes = original.clone().into_bytes();
        let at = rng.gen_range(0..bytes.len());
        let old = bytes[at];
        let new = loop {
            let b: u8 = rng.gen();
            if b != old {
                break b;
            }
        };
        bytes[at] = new;
        std::fs::write(&path, &bytes).map_err(|e| e.to_string())?;
        let changes_meaning = match String::from_utf8(bytes.clone()).ok().map(|s| MatchTrace::parse(&s)) {
            Some(Ok((parsed, _))) => parsed.to_text() != original,
            _ => true,
        };
        let accepted = verify_trace(&path).is_ok();
        if changes_meaning {
            semantic += 1;
            ensure(!accepted, || format!("case {case}: byte {at} {old:#04x}->{new:#04x} changed the trace but verified"))?;
        }
        if accepted {
            benign_passed += 1;
        } else {
            rejected += 1;
        }
    }
    Ok(format!("{FUZZ_CASES} corruptions: {semantic} semantic all rejected, {rejected} rejected, {benign_passed} benign accepted"))
}

fn main() {
    let mut upper = UpperHalf::default();
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "exhaustive win", secs(60), || exhaustive(&mut upper)),
        criterion(2, "randomized win", secs(120), || randomized(&mut upper)),
        criterion(3, "upper-half property", secs(1), || upper_half(&upper)),
        criterion(4, "plain arena", secs(120), plain_arena),
        criterion(5, "prefix arena", secs(120), prefix_arena),
        criterion(6, "weight game, equal sizes", secs(60), equal_weights),
        criterion(7, "weight game, general sizes", secs(120), general_weights),
        criterion(8, "lab soundness", secs(300), lab_soundness),
        criterion(9, "semicomputable legality", secs(120), semicomputable_legality),
        criterion(10, "trace integrity", secs(120), fuzz_traces),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
