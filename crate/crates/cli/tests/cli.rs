use graphpot_cli::{run, Outcome, RunReport};
use serde_json::Value;

fn graphpot(args: &str) -> Outcome {
    run(std::iter::once("graphpot").chain(args.split_whitespace()))
}

fn json(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

#[test]
fn help_and_version_exit_zero() {
    let out = graphpot("--help");
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("classify"));
    assert!(graphpot("--version").stdout.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn bad_input_exits_two_with_json_error() {
    for args in ["classify", "classify --graph cube:3", "capacity --graph lattice:1 --measure pow:2", "frobnicate"] {
        let out = graphpot(args);
        assert_eq!(out.code, 2, "{args}");
        let v = json(&out);
        assert_eq!(v["error"]["exit_code"], 2);
        assert_eq!(v["schema_version"], 1);
        assert!(!out.stderr.is_empty());
    }
    let out = graphpot("green --graph lattice:2 --radii 2,4 --x 1,2,3");
    assert_eq!(out.code, 2);
    assert_ne!(json(&out)["error"]["code"], "usage");
}

#[test]
fn strict_turns_inconclusive_into_exit_one() {
    // too few windows for any rule to fire
    let args = "classify --graph lattice:2 --radii 2,3";
    let loose = graphpot(args);
    assert_eq!(loose.code, 0);
    assert_eq!(json(&loose)["verdicts"]["type"], "inconclusive");
    assert_eq!(graphpot(&format!("{args} --strict")).code, 1);
}

#[test]
fn report_round_trips_and_echoes_config() {
    let out = graphpot("capacity --graph lattice:1 --radii 1,3,7 --no-timings");
    assert_eq!(out.code, 0);
    let report: RunReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report.subcommand, "capacity");
    assert_eq!(report.config["graph"], "lattice:1");
    assert_eq!(report.config["radii"], serde_json::json!([1, 3, 7]));
    assert_eq!(report.config["window_sizes"], serde_json::json!([3, 7, 15]));
    assert!(report.timings.is_none());
    let caps = &report.sequences[0].values;
    for (c, r) in caps.iter().zip([1.0, 3.0, 7.0]) {
        assert!((c - 2.0 / (r + 1.0)).abs() < 1e-12);
    }
    assert!(graphpot("capacity --graph lattice:1 --radii 1,3").stdout.contains("total_seconds"));
}

#[test]
fn csv_sequences_layout() {
    let out = graphpot("classify --graph tree:2 --radii 2,4,6 --format csv-sequences");
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "window_radius,quantity,value");
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[1].starts_with("2,capacity,"));
}

#[test]
fn output_is_identical_across_thread_counts() {
    for cmd in ["classify --graph lattice:2 --radii 4,8,16", "walk --graph lattice:2 --radius 6 --trials 5000", "verify --form-instances 20 --solver-instances 8 --quadrature-instances 4 --max-window 40"] {
        let a = graphpot(&format!("{cmd} --no-timings --threads 1"));
        let b = graphpot(&format!("{cmd} --no-timings --threads 4"));
        assert_eq!(a.code, 0, "{}", a.stdout);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn flags_override_config_file_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graphpot.toml");
    std::fs::write(&path, "[walk]\nseed = 11\ntrials = 300\n[solver]\ntol = 1e-11\n").unwrap();
    let base = format!("walk --graph lattice:1 --radius 3 --config {} --no-timings", path.display());

    let from_file = json(&graphpot(&base));
    assert_eq!(from_file["result"]["seed"], 11);
    assert_eq!(from_file["result"]["trials"], 300);
    assert_eq!(from_file["config"]["settings"]["solver"]["tol"], 1e-11);

    let flagged = json(&graphpot(&format!("{base} --seed 5")));
    assert_eq!(flagged["result"]["seed"], 5);
    assert_eq!(flagged["result"]["trials"], 300);

    std::fs::write(&path, "[walk]\nsed = 11\n").unwrap();
    assert_eq!(graphpot(&base).code, 2);
}

#[test]
fn gen_round_trips_through_file_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.txt");
    let out = graphpot(&format!("gen --graph tree:2 --radius 3 --out {}", path.display()));
    assert_eq!(json(&out)["result"]["vertices"], 15);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(graphpot("gen --graph tree:2 --radius 3").stdout, text);

    // windows up to radius 2 see the same edges in the ball and the tree
    let file = json(&graphpot(&format!("capacity --graph file:{} --radii 1,2 --no-timings", path.display())));
    let tree = json(&graphpot("capacity --graph tree:2 --radii 1,2 --no-timings"));
    assert_eq!(file["sequences"][0]["values"], tree["sequences"][0]["values"]);
}

#[test]
fn monopole_energy_matches_green_times_measure() {
    let v = json(&graphpot("monopole --graph bd:1 --measure pow:1 --radii 4,8,16"));
    assert!(v["result"]["max_identity_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn non_unit_measure_is_refused_by_the_series() {
    let out = graphpot("bridge --graph lattice:1 --measure const:2 --radius 3");
    assert_eq!(out.code, 2);
    assert!(json(&out)["error"]["message"].as_str().unwrap().contains("measure"));
}
