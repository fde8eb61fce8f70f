//! The `cgame` command line: matches, arenas, weight games, lab runs and
//! trace verification, with plain-text reports.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arena::{
    alive_weight_bound, run_arena, white_row_bound, ArenaGreedy, ArenaParams, ArenaSemicomputable,
    ArenaVariant,
};
use crate::bits::BitString;
use crate::board::BoardParams;
use crate::dyadic::Dyadic;
use crate::lab::{ApproxTable, LabConfig};
use crate::strategy::{play_match, semicomputable_lab_config, Adversary, AdversaryKind, MatchLimits, MatchOutcome, WhiteStrategy};
use crate::trace::verify::{verify_trace, VerifyError};
use crate::trace::write_atomic;
use crate::weights::{
    play_weight_match, AliceStrategy, BobAdversary, BobKind, BobPlayer, Grouping, KolmogorovBob, KolmogorovConfig,
    WeightLimits, WeightParams, WeightVerdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RULE_VIOLATION: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "cgame", version, about = "Board and weight games with a complexity lab")]
struct Cli {
    /// key=value file whose entries act as flags of the chosen subcommand;
    /// flags on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for independent matches and lab stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One board G_n, White's strategy against a Black adversary.
    Gn(GnArgs),
    /// Every board in a height range under shared Black budgets.
    Arena(ArenaArgs),
    /// The Alice/Bob weight game.
    Weights(WeightsArgs),
    /// Dovetailed complexity bounds on the toy machine.
    Lab(LabArgs),
    /// Replay a trace file through the rules.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GnBlack {
    Greedy,
    Random,
    Exhauster,
    Semi,
    Passive,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct GnArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "greedy")]
    black: GnBlack,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Play this many consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = MatchLimits::default().max_moves)]
    max_moves: u64,
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ArenaBlackKind {
    Semi,
    Greedy,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct ArenaArgs {
    #[arg(long, default_value_t = 1)]
    n_min: u32,
    #[arg(long)]
    n_max: u32,
    #[arg(long, default_value = "plain", value_parser = parse_variant)]
    variant: ArenaVariant,
    #[arg(long, value_enum, default_value = "semi")]
    black: ArenaBlackKind,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: u64,
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BobChoice {
    Disabler,
    Matcher,
    Random,
    Passive,
    Kolmogorov,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct WeightsArgs {
    #[arg(long, default_value_t = 1)]
    c: u32,
    /// Comma-separated set sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "equal")]
    sizes: Vec<u64>,
    /// N sets of M elements each.
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    equal: Vec<u64>,
    #[arg(long, value_enum, default_value = "disabler")]
    bob: BobChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sets for the Kolmogorov Bob.
    #[arg(long, default_value_t = 2)]
    sets: usize,
    /// Force this many groups per set instead of the 4C/8C rule.
    #[arg(long)]
    groups: Option<u32>,
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct LabArgs {
    #[arg(long)]
    stages: Option<u64>,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long)]
    step_cap: Option<u64>,
    /// Comma-separated condition strings.
    #[arg(long, value_delimiter = ',')]
    cond_pool: Vec<String>,
    #[arg(long, default_value_t = 4)]
    cond_max_len: usize,
    #[arg(long)]
    no_prefix: bool,
    #[arg(long, value_name = "PATH")]
    export: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct VerifyArgs {
    #[arg(long, value_name = "PATH")]
    trace: PathBuf,
}

fn parse_variant(s: &str) -> Result<ArenaVariant, String> {
    ArenaVariant::parse(s).ok_or_else(|| format!("unknown variant `{s}` (plain|prefix)"))
}

/// Turns `key=value` lines into flags. Blank lines and `#` comments are
/// skipped; `true`/`false` values toggle switches.
pub fn config_flags(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = k.trim().replace('_', "-");
        match v.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.extend(v.split_whitespace().map(str::to_string));
            }
        }
    }
    Ok(out)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices config flags right after the subcommand name; later
/// command-line flags override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let flags = config_flags(&text)?;
    let names = ["gn", "arena", "weights", "lab", "verify"];
    let Some(pos) = args.iter().position(|a| names.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut out = args[..=pos].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Entry point shared by the binary and tests. Reports go to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let (code, report) = with_jobs(cli.jobs, || dispatch(cli.command));
    let _ = out.write_all(report.as_bytes());
    if code != EXIT_OK {
        let _ = writeln!(err, "cgame: exit {code}");
    }
    code
}

#[cfg(feature = "parallel")]
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs.and_then(|j| rayon::ThreadPoolBuilder::new().num_threads(j).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<R>(_jobs: Option<usize>, f: impl FnOnce() -> R) -> R {
    f()
}

type Report = (i32, String);

fn dispatch(cmd: Command) -> Report {
    match cmd {
        Command::Gn(a) => cmd_gn(a),
        Command::Arena(a) => cmd_arena(a),
        Command::Weights(a) => cmd_weights(a),
        Command::Lab(a) => cmd_lab(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn usage(msg: impl std::fmt::Display) -> Report {
    (EXIT_USAGE, format!("error: {msg}\n"))
}

fn save(path: &Path, text: &str, report: &mut String) -> Result<(), Report> {
    write_atomic(path, text.as_bytes()).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    let _ = writeln!(report, "trace={}", path.display());
    Ok(())
}

fn gn_adversary(black: GnBlack, n: u32, seed: u64) -> AdversaryKind {
    match black {
        GnBlack::Greedy => AdversaryKind::GreedyKiller,
        GnBlack::Random => AdversaryKind::RandomBlack { seed },
        GnBlack::Exhauster => AdversaryKind::BudgetExhauster,
        GnBlack::Semi => AdversaryKind::Semicomputable(semicomputable_lab_config(n)),
        GnBlack::Passive => AdversaryKind::Scripted(Vec::new()),
    }
}

fn play_seed(params: BoardParams, a: &GnArgs, seed: u64) -> MatchOutcome {
    let mut white = WhiteStrategy::default();
    let mut black = Adversary::new(gn_adversary(a.black, params.n(), seed));
    let limits = MatchLimits { max_moves: a.max_moves, ..MatchLimits::default() };
    play_match(params, &mut white, &mut black, limits)
}

fn cmd_gn(a: GnArgs) -> Report {
    let params = match BoardParams::new(a.n) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    if a.seeds == 0 {
        return usage("--seeds must be positive");
    }
    if a.trace.is_some() && a.seeds > 1 {
        return usage("--trace needs a single seed");
    }
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    #[cfg(feature = "parallel")]
    let outcomes: Vec<MatchOutcome> = {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| play_seed(params, &a, s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<MatchOutcome> = seeds.iter().map(|&s| play_seed(params, &a, s)).collect();

    let mut r = String::new();
    let _ = writeln!(r, "{:>8} {:<12} {:>8} {:>8} {:>10} verdict", "seed", "black", "moves", "white", "low_white");
    let mut code = EXIT_OK;
    for (seed, o) in seeds.iter().zip(&outcomes) {
        let low = o.stats.upper_half_violations(params);
        let label = gn_adversary(a.black, a.n, *seed).label();
        let _ = writeln!(r, "{seed:>8} {label:<12} {:>8} {:>8} {low:>10} {}", o.stats.moves, o.stats.white_rows.len(), o.verdict);
        code = code.max(match &o.verdict {
            v if v.is_white_win() && low == 0 && !o.stats.truncated => EXIT_OK,
            crate::board::Verdict::RuleViolation { .. } => EXIT_RULE_VIOLATION,
            _ => EXIT_INVARIANT,
        });
    }
    let wins = outcomes.iter().filter(|o| o.verdict.is_white_win()).count();
    let overall = if wins == outcomes.len() { "WhiteWins".to_string() } else { outcomes.iter().find(|o| !o.verdict.is_white_win()).unwrap().verdict.label().to_string() };
    let _ = writeln!(r, "n={} matches={} white_wins={wins} upper_half_floor={}", a.n, outcomes.len(), params.upper_half_floor());
    let _ = writeln!(r, "verdict={overall}");
    if let Some(path) = &a.trace {
        if let Err(e) = save(path, &outcomes[0].trace.to_text(), &mut r) {
            return e;
        }
    }
    (code, r)
}

fn cmd_arena(a: ArenaArgs) -> Report {
    let params = match ArenaParams::new(a.n_min, a.n_max, a.variant) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    if a.n_max > 24 {
        return usage("--n-max above 24 is not supported");
    }
    let limits = MatchLimits { max_moves: a.max_rounds, ..MatchLimits::default() };
    let (out, rejections) = match a.black {
        ArenaBlackKind::Semi => {
            let mut semi = ArenaSemicomputable::new(params);
            let out = run_arena(params, &mut semi, limits);
            (out, Some(semi.row_budget_rejections()))
        }
        ArenaBlackKind::Greedy => (run_arena(params, &mut ArenaGreedy, limits), None),
    };

    let mut r = String::new();
    let _ = writeln!(r, "{:>4} verdict", "n");
    for (n, v) in &out.verdicts {
        let _ = writeln!(r, "{n:>4} {}", v.label());
    }
    let _ = writeln!(r, "{:>4} {:>8} {:>8} {:>8} {:>8}", "row", "white", "bound", "killed", "black");
    let totals = &out.stats.white_rows_total;
    let mut bound_ok = true;
    for (i, &w) in totals.iter().enumerate() {
        let bound = white_row_bound(i as u32);
        bound_ok &= w <= bound;
        let killed = out.stats.census.pawn_killed_rows.get(i).copied().unwrap_or(0);
        let black = out.state.global_black_per_row().get(i).copied().unwrap_or(0);
        let _ = writeln!(r, "{i:>4} {w:>8} {bound:>8} {killed:>8} {black:>8}");
    }
    let census = &out.stats.census;
    let _ = writeln!(r, "rounds={} truncated={}", out.stats.rounds, out.stats.truncated);
    let _ = writeln!(r, "live_constant={} upper_half_violations={}", out.stats.live_constant(), out.stats.upper_half_violations);
    let _ = writeln!(r, "black_weight={} pawn_killed_weight={} max_pawn_killed_weight={}", out.state.black_weight(), census.pawn_killed_weight, out.stats.max_pawn_killed_weight);
    let alive_bound = alive_weight_bound(params);
    let _ = writeln!(r, "alive_weight={} alive_bound={} blackened_weight={}", census.alive_weight, alive_bound, census.blackened_weight);
    if let Some(n) = rejections {
        let _ = writeln!(r, "row_budget_rejections={n}");
    }
    let all_white = out.verdicts.values().all(|v| v.is_white_win());
    let _ = writeln!(r, "verdict={}", if out.violation.is_some() { "RuleViolation" } else if all_white { "WhiteWins" } else { "BlackWins" });
    if let Some(path) = &a.trace {
        if let Err(e) = save(path, &out.trace.to_text(), &mut r) {
            return e;
        }
    }
    let one = Dyadic::one();
    let prefix_ok = a.variant == ArenaVariant::Plain
        || (out.stats.max_pawn_killed_weight < one && *out.state.black_weight() < one && census.alive_weight <= alive_bound);
    let code = if let Some(v) = &out.violation {
        let _ = writeln!(r, "violation board={} player={} code={} reason={}", v.board, v.player, v.code, v.reason);
        EXIT_RULE_VIOLATION
    } else if !all_white || !bound_ok || !prefix_ok || out.stats.upper_half_violations > 0 || rejections.unwrap_or(0) > 0 || !out.state.globals_coherent() {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    };
    (code, r)
}

fn cmd_weights(a: WeightsArgs) -> Report {
    let grouping = a.groups.map_or(Grouping::Auto, Grouping::Force);
    let (params, mut bob): (WeightParams, Box<dyn BobPlayer>) = match a.bob {
        BobChoice::Kolmogorov => {
            let cfg = KolmogorovConfig::new(a.c, a.sets);
            (cfg.params(), Box::new(KolmogorovBob::new(cfg)))
        }
        other => {
            let kind = match other {
                BobChoice::Disabler => BobKind::GreedyDisabler,
                BobChoice::Matcher => BobKind::WeightMatcher,
                BobChoice::Random => BobKind::Random { seed: a.seed },
                _ => BobKind::Passive,
            };
            let params = if a.equal.len() == 2 {
                WeightParams::equal(a.c, a.equal[0], a.equal[1] as usize)
            } else if !a.sizes.is_empty() {
                WeightParams::new(a.c, a.sizes.clone())
            } else {
                return usage("give --sizes or --equal M N");
            };
            match params {
                Ok(p) => (p, Box::new(BobAdversary::new(kind))),
                Err(e) => return usage(e),
            }
        }
    };
    let mut alice = AliceStrategy::new(grouping);
    let limits = WeightLimits::for_params(&params);
    let out = play_weight_match(params.clone(), &mut alice, bob.as_mut(), limits);

    let mut r = String::new();
    let _ = writeln!(r, "c={} sets={} elements={} bob={}", params.c(), params.set_count(), params.total_elements(), bob.name());
    let _ = writeln!(r, "{:>4} {:>6} {:>8} {:>24} {:>24} halving", "set", "size", "groups", "beta", "alpha");
    let mut halving_ok = true;
    for rec in alice.records() {
        let size = params.sizes()[rec.set];
        let ok = rec.halving_holds();
        halving_ok &= ok;
        let _ = writeln!(r, "{:>4} {size:>6} {:>8} {:>24} {:>24} {ok}", rec.set, alice.group_count(params.c(), size), rec.beta.to_string(), rec.alpha.to_string());
    }
    let _ = writeln!(r, "a_total={} b_total={} disabled={}", out.state.a_total(), out.state.b_total(), out.state.disabled().len());
    let _ = writeln!(r, "batches={} truncated={}", out.stats.batches, out.stats.truncated);
    let _ = writeln!(r, "verdict={}", out.verdict);
    if let Some(path) = &a.trace {
        if let Err(e) = save(path, &out.trace.to_text(), &mut r) {
            return e;
        }
    }
    let code = match &out.verdict {
        WeightVerdict::RuleViolation { .. } => EXIT_RULE_VIOLATION,
        WeightVerdict::AliceWins(_) if halving_ok && out.state.caches_coherent() => EXIT_OK,
        _ => EXIT_INVARIANT,
    };
    (code, r)
}

fn cmd_lab(a: LabArgs) -> Report {
    let mut pool = Vec::new();
    for s in &a.cond_pool {
        match s.parse::<BitString>() {
            Ok(b) if !b.is_empty() => pool.push(b),
            Ok(_) => {}
            Err(e) => return usage(format!("bad condition `{}`", e.0)),
        }
    }
    let config = LabConfig {
        max_len: a.max_len,
        step_cap: a.step_cap.unwrap_or(a.max_len as u64),
        cond_pool: pool,
        cond_max_len: a.cond_max_len,
        prefix: !a.no_prefix,
        ..LabConfig::default()
    };
    let stages = a.stages.unwrap_or_else(|| config.final_stage());
    let mut table = ApproxTable::new(config);
    let mut r = String::new();
    let _ = writeln!(r, "{:>6} {:>10} {:>8} {:>8} kraft", "stage", "discovered", "plain", "prefix");
    let mut kraft_ok = true;
    while table.stage() < stages && !table.is_exhausted() {
        if let Err(e) = table.dovetail_stage() {
            let _ = writeln!(r, "error: {e}");
            return (EXIT_INVARIANT, r);
        }
        kraft_ok &= *table.kraft_accum() <= Dyadic::one();
        let _ = writeln!(
            r,
            "{:>6} {:>10} {:>8} {:>8} {}",
            table.stage(),
            table.discovered().len(),
            table.plain_bounds().len(),
            table.prefix_bounds().len(),
            table.kraft_accum()
        );
    }
    let _ = writeln!(r, "exhausted={} prefix_halting={}", table.is_exhausted(), table.prefix_halting());
    if let Some(path) = &a.export {
        if let Err(e) = write_atomic(path, table.export_log().as_bytes()) {
            return usage(format!("cannot write {}: {e}", path.display()));
        }
        let _ = writeln!(r, "export={}", path.display());
    }
    (if kraft_ok { EXIT_OK } else { EXIT_INVARIANT }, r)
}

fn cmd_verify(a: VerifyArgs) -> Report {
    match verify_trace(&a.trace) {
        Ok(v) => {
            let mut r = String::new();
            let _ = writeln!(r, "kind={} records={}", v.kind.as_str(), v.records);
            if let Some((line, reason)) = &v.final_violation {
                let _ = writeln!(r, "final_violation line={line} {reason}");
            }
            for verdict in &v.footer.verdicts {
                let _ = writeln!(r, "verdict={verdict}");
            }
            for (k, val) in &v.footer.digest {
                let _ = writeln!(r, "{k}={val}");
            }
            let _ = writeln!(r, "ok");
            (EXIT_OK, r)
        }
        Err(VerifyError::Io(e)) => usage(format!("cannot read {}: {e}", a.trace.display())),
        Err(e) => (EXIT_RULE_VIOLATION, format!("rejected: {e}\n")),
    }
}
