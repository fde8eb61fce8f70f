//! Browser parameter explorer. Each export runs a full game or lab pass
//! and returns a JSON summary for the static page in `www/`.

use complexity_games::bits::BitString;
use complexity_games::board::BoardParams;
use complexity_games::lab::{ApproxTable, LabConfig};
use complexity_games::strategy::{play_match, Adversary, AdversaryKind, MatchLimits, WhiteStrategy};
use complexity_games::weights::{
    play_weight_match, AliceStrategy, BobAdversary, BobKind, Grouping, WeightLimits, WeightParams,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest board the page draws cell by cell.
pub const MAX_DRAWN_N: u32 = 6;

fn error(msg: impl ToString) -> Value {
    json!({ "error": msg.to_string() })
}

pub fn board_summary(n: u32, black: &str, seed: u64) -> Value {
    let params = match BoardParams::new(n) {
        Ok(p) if n <= 16 => p,
        Ok(_) => return error("n must be at most 16"),
        Err(e) => return error(e),
    };
    let kind = match black {
        "greedy" => AdversaryKind::GreedyKiller,
        "random" => AdversaryKind::RandomBlack { seed },
        "exhauster" => AdversaryKind::BudgetExhauster,
        "passive" => AdversaryKind::Scripted(Vec::new()),
        other => return error(format!("unknown adversary {other}")),
    };
    let out = play_match(params, &mut WhiteStrategy::default(), &mut Adversary::new(kind), MatchLimits::default());
    let s = &out.state;
    let cells = |set: &std::collections::BTreeSet<_>| -> Vec<[u64; 2]> {
        set.iter().map(|c: &complexity_games::board::Cell| [c.column, c.row as u64]).collect()
    };
    let drawn = n <= MAX_DRAWN_N;
    json!({
        "n": n,
        "columns": params.columns(),
        "verdict": out.verdict.to_string(),
        "white_wins": out.verdict.is_white_win(),
        "moves": out.stats.moves,
        "upper_half_floor": params.upper_half_floor(),
        "low_white": out.stats.upper_half_violations(params),
        "white_per_row": s.white_per_row(),
        "black_per_row": s.black_per_row(),
        "drawn": drawn,
        "white": if drawn { cells(s.white()) } else { Vec::new() },
        "dead": if drawn { s.dead_white().map(|c| [c.column, c.row as u64]).collect() } else { Vec::new() },
        "black": if drawn { cells(s.black()) } else { Vec::new() },
        "blackened": if drawn { cells(s.blackened()) } else { Vec::new() },
    })
}

pub fn weights_summary(c: u32, size: u64, sets: usize, bob: &str, seed: u64) -> Value {
    if sets > 4096 || size > 4096 {
        return error("at most 4096 sets of at most 4096 elements");
    }
    let params = match WeightParams::equal(c, size, sets) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let kind = match bob {
        "disabler" => BobKind::GreedyDisabler,
        "matcher" => BobKind::WeightMatcher,
        "random" => BobKind::Random { seed },
        "passive" => BobKind::Passive,
        other => return error(format!("unknown Bob {other}")),
    };
    let mut alice = AliceStrategy::new(Grouping::Auto);
    let limits = WeightLimits::for_params(&params);
    let out = play_weight_match(params.clone(), &mut alice, &mut BobAdversary::new(kind), limits);
    let records: Vec<Value> = alice
        .records()
        .iter()
        .map(|r| {
            json!({
                "set": r.set,
                "beta": r.beta.to_string(),
                "alpha": r.alpha.to_string(),
                "halving": r.halving_holds(),
            })
        })
        .collect();
    json!({
        "verdict": out.verdict.to_string(),
        "alice_wins": out.verdict.is_alice_win(),
        "groups": alice.group_count(c, size),
        "batches": out.stats.batches,
        "disabled": out.state.disabled().len(),
        "a_total": out.state.a_total().to_string(),
        "b_total": out.state.b_total().to_string(),
        "records": records,
    })
}

pub fn lab_summary(max_len: usize, step_cap: u64, show_len: usize) -> Value {
    if max_len > 12 || step_cap > 64 || show_len > 8 {
        return error("max_len <= 12, step_cap <= 64, show_len <= 8");
    }
    let mut table = ApproxTable::new(LabConfig { max_len, step_cap, cond_max_len: 0, ..LabConfig::default() });
    let mut kraft = Vec::new();
    while !table.is_exhausted() {
        if let Err(e) = table.dovetail_stage() {
            return error(e);
        }
        kraft.push(table.kraft_accum().to_string());
    }
    let empty = BitString::new();
    let bounds: Vec<Value> = BitString::all_up_to(show_len)
        .map(|x| {
            json!({
                "x": x.to_string(),
                "plain": table.approx_plain(&x, &empty),
                "prefix": table.approx_prefix(&x),
            })
        })
        .collect();
    json!({
        "stages": table.stage(),
        "discovered": table.discovered().len(),
        "kraft": kraft,
        "bounds": bounds,
    })
}

#[wasm_bindgen]
pub fn play_board(n: u32, black: &str, seed: u64) -> String {
    board_summary(n, black, seed).to_string()
}

#[wasm_bindgen]
pub fn play_weights(c: u32, size: u64, sets: usize, bob: &str, seed: u64) -> String {
    weights_summary(c, size, sets, bob, seed).to_string()
}

#[wasm_bindgen]
pub fn lab_bounds(max_len: usize, step_cap: u64, show_len: usize) -> String {
    lab_summary(max_len, step_cap, show_len).to_string()
}
