#![cfg(feature = "cli")]

use complexity_games::cli::{run, EXIT_OK, EXIT_RULE_VIOLATION, EXIT_USAGE};

fn cgame(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("cgame").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn gn_greedy_reports_white_win() {
    let (code, out) = cgame(&["gn", "--n", "4", "--black", "greedy", "--seed", "1"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("verdict=WhiteWins"));
}

#[test]
fn weights_disabler_reports_alice_win() {
    let (code, out) = cgame(&["weights", "--c", "1", "--equal", "4", "16", "--bob", "disabler"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("verdict=AliceWins"));
}

#[test]
fn verify_flags_a_corrupted_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.trace");
    let p = path.to_str().unwrap();
    assert_eq!(cgame(&["gn", "--n", "5", "--black", "exhauster", "--trace", p]).0, EXIT_OK);
    let (code, out) = cgame(&["verify", "--trace", p]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("verdict=WhiteWins"));

    let text = std::fs::read_to_string(&path).unwrap();
    let line = text.lines().find(|l| l.contains(" B place ")).unwrap();
    let mut parts: Vec<String> = line.split(' ').map(String::from).collect();
    *parts.last_mut().unwrap() = "0".into();
    let bad = text.replacen(line, &parts.join(" "), 1);
    std::fs::write(&path, bad).unwrap();
    let (code, out) = cgame(&["verify", "--trace", p]);
    assert_eq!(code, EXIT_RULE_VIOLATION);
    assert!(out.starts_with("rejected:"), "{out}");
}

#[test]
fn arena_lab_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    std::fs::write(&cfg, "# arena suite\nn_min = 1\nn_max = 6\nvariant = prefix\nblack = greedy\n").unwrap();
    let (code, out) = cgame(&["arena", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("verdict=WhiteWins"));
    let (code, out) = cgame(&["arena", "--config", cfg.to_str().unwrap(), "--variant", "plain", "--black", "semi"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("row_budget_rejections=0"));

    let log = dir.path().join("lab.log");
    let (code, out) = cgame(&["lab", "--max-len", "5", "--cond-pool", "0,11", "--export", log.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    let text = std::fs::read_to_string(&log).unwrap();
    assert!(text.lines().all(|l| l.starts_with("stage ")));
    assert!(!dir.path().join("lab.log.tmp").exists());
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(cgame(&["gn"]).0, EXIT_USAGE);
    assert_eq!(cgame(&["gn", "--n", "0"]).0, EXIT_USAGE);
    assert_eq!(cgame(&["weights", "--c", "1"]).0, EXIT_USAGE);
    assert_eq!(cgame(&["arena", "--n-max", "4", "--variant", "odd"]).0, EXIT_USAGE);
    assert_eq!(cgame(&["verify", "--trace", "/nonexistent/x"]).0, EXIT_USAGE);
    assert_eq!(cgame(&["--help"]).0, EXIT_OK);
}
