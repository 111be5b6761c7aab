//! End-to-end behavior of the command-line tool: report shape, header
//! metadata, determinism, usage errors, and process exit codes. Library
//! dispatch is exercised through `run`; exit codes through the compiled
//! binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::Output;

use serde_json::Value;

use pauli_switch_cli::{
    canonical_command_line, run, write_output, Command, Family, Level, Mode, RegionArg, RunConfig,
    TOOL_VERSION,
};

fn cfg(command: Command) -> RunConfig {
    RunConfig {
        command,
        mode: Mode::Exact,
        out: None,
        seed: 0,
    }
}

fn run_json(config: &RunConfig) -> Value {
    let output = run(config).expect("command succeeds");
    serde_json::from_str(&output.text).expect("report is valid JSON")
}

fn bin() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_pauli-switch"))
}

fn run_bin(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn verify_quick_passes_all_suites_and_embeds_meta() {
    let config = cfg(Command::Verify { level: Level::Quick });
    let output = run(&config).expect("verify runs");
    assert!(output.all_passed);
    let doc: Value = serde_json::from_str(&output.text).unwrap();
    assert_eq!(doc["level"], "quick");
    assert_eq!(doc["all_passed"], true);
    let total = doc["suites_total"].as_u64().unwrap();
    let passed = doc["suites_passed"].as_u64().unwrap();
    assert_eq!(total, 10);
    assert_eq!(passed, total);
    assert!(passed >= 6, "fewer than six suites passed");
    assert!(doc.get("errata").is_none(), "quick level must not carry errata");
    assert_eq!(doc["meta"]["tool"], "pauli-switch");
    assert_eq!(doc["meta"]["version"], TOOL_VERSION);
    assert_eq!(doc["meta"]["seed"], 0);
    assert_eq!(
        doc["meta"]["command"],
        "pauli-switch verify --level quick --mode exact --seed 0"
    );
    let suites = doc["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    for suite in suites {
        assert_eq!(suite["passed"], true, "suite {} failed", suite["name"]);
        assert!(suite["cells"].as_u64().unwrap() > 0);
    }
}

#[test]
fn verify_full_reports_structured_errata_without_failing() {
    let config = cfg(Command::Verify { level: Level::Full });
    let output = run(&config).expect("verify runs");
    assert!(output.all_passed, "report items must never fail the run");
    let doc: Value = serde_json::from_str(&output.text).unwrap();
    assert_eq!(doc["level"], "full");
    assert_eq!(doc["all_passed"], true);
    let errata = doc["errata"].as_array().expect("full level carries errata");
    assert_eq!(errata.len(), 10);
    for entry in errata {
        for field in ["id", "quantity", "stated", "adopted", "verdict", "evidence"] {
            assert!(
                entry[field].is_string() && !entry[field].as_str().unwrap().is_empty(),
                "erratum {} lacks field {field}",
                entry["id"]
            );
        }
        let verdict = entry["verdict"].as_str().unwrap();
        assert!(
            ["mismatch-resolved", "benign-variant", "verified-exact"].contains(&verdict),
            "unknown verdict {verdict}"
        );
    }
    let ids: Vec<&str> = errata.iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"side-face-asymptotic-rate"));
    assert!(ids.contains(&"twirl-trace-convention"));
    assert!(ids.contains(&"order4-order5-rate-polynomials"));
}

#[test]
fn sweep_csv_has_meta_header_and_expected_cells() {
    let config = cfg(Command::Sweep {
        family: Family::Depolarising,
        orders: "1..8".into(),
        grid: "0:4/3:100".into(),
    });
    let output = run(&config).expect("sweep succeeds");
    let lines: Vec<&str> = output.text.lines().collect();
    assert!(lines[0].starts_with("# tool: pauli-switch "));
    assert_eq!(lines[1], "# mode: exact");
    assert_eq!(lines[2], "# seed: 0");
    assert_eq!(
        lines[3],
        "# command: pauli-switch sweep --family depolarising --orders 1..8 --grid 0:4/3:100 --mode exact --seed 0"
    );
    assert_eq!(lines[4], "p,order,rate_exact,rate_float");
    let rows = &lines[5..];
    assert_eq!(rows.len(), 101 * 8, "101 grid points x 8 orders");
    // The worked anchor: at p = 1 (grid point 75) and order 2 the exact
    // rate reads 3/64.
    assert!(rows.contains(&"1,2,3/64,0.046875"));
    // Rows arrive ordered by (p, order).
    let first_point: Vec<&str> = rows[..8].to_vec();
    for (i, row) in first_point.iter().enumerate() {
        assert!(row.starts_with(&format!("0,{},", i + 1)));
    }
}

#[test]
fn sweep_is_deterministic_and_independent_of_destination() {
    let dir = tempfile::tempdir().unwrap();
    let make = |out: Option<PathBuf>| RunConfig {
        command: Command::Sweep {
            family: Family::Depolarising,
            orders: "2,3".into(),
            grid: "1/4:1:3".into(),
        },
        mode: Mode::Exact,
        out,
        seed: 42,
    };
    let in_memory = run(&make(None)).expect("sweep succeeds").text;
    let path = dir.path().join("table.csv");
    let config = make(Some(path.clone()));
    let output = run(&config).expect("sweep succeeds");
    write_output(&config, &output).expect("written");
    let on_disk = std::fs::read_to_string(&path).unwrap();
    assert_eq!(in_memory, on_disk, "bytes must not depend on --out");
    assert!(in_memory.contains("# seed: 42"));
}

#[test]
fn float_mode_sweep_renders_decimal_columns() {
    let config = RunConfig {
        command: Command::Sweep {
            family: Family::Depolarising,
            orders: "2".into(),
            grid: "0:1:2".into(),
        },
        mode: Mode::Float,
        out: None,
        seed: 0,
    };
    let output = run(&config).expect("sweep succeeds");
    assert!(output.text.contains("# mode: float"));
    assert!(output.text.contains("1,2,0.046875,0.046875"));
}

#[test]
fn usage_errors_are_reported_not_panicked() {
    let bad_grid = cfg(Command::Sweep {
        family: Family::Depolarising,
        orders: "1..2".into(),
        grid: "0:1:0".into(),
    });
    assert!(run(&bad_grid).unwrap_err().to_string().contains("step"));
    let bad_orders = cfg(Command::Sweep {
        family: Family::Depolarising,
        orders: "8..1".into(),
        grid: "0:1:2".into(),
    });
    assert!(run(&bad_orders).is_err());
    let bad_channel = cfg(Command::Rate {
        channel: "1,0,0".into(),
        order: 2,
    });
    assert!(run(&bad_channel).is_err());
    let negative_weight = cfg(Command::Classify {
        channel: "2,-1,0,0".into(),
    });
    assert!(run(&negative_weight).is_err());
    let negative_order = cfg(Command::Rate {
        channel: "1,0,0,0".into(),
        order: -1,
    });
    assert!(run(&negative_order).is_err());
    let huge_order = cfg(Command::Rate {
        channel: "1/4,1/4,1/4,1/4".into(),
        order: 1000,
    });
    assert!(run(&huge_order).unwrap_err().to_string().contains("at most"));
}

#[test]
fn fixed_point_single_region_and_full_listing() {
    let one = run_json(&cfg(Command::FixedPoint {
        region: Some(RegionArg::SideFace),
    }));
    let fps = one["fixed_points"].as_array().unwrap();
    assert_eq!(fps.len(), 1);
    assert_eq!(fps[0]["region"], "side-face");
    let rate = fps[0]["asymptotic_rate"].as_f64().unwrap();
    assert!((rate - (3.0 - 2.0f64.sqrt()) / 4.0).abs() < 1e-15);
    assert!((fps[0]["heralded_unitary_mass"].as_f64().unwrap() - 0.25).abs() < 1e-15);

    let all = run_json(&cfg(Command::FixedPoint { region: None }));
    let regions: Vec<&str> = all["fixed_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|fp| fp["region"].as_str().unwrap())
        .collect();
    assert_eq!(
        regions,
        vec!["interior", "side-face", "base-face", "depolarising-endpoint"]
    );
}

#[test]
fn classify_and_choi_work_in_float_mode() {
    let mut config = cfg(Command::Classify {
        channel: "0.4, 0.3, 0.2, 0.1".into(),
    });
    config.mode = Mode::Float;
    let doc = run_json(&config);
    assert_eq!(doc["region"], "interior");
    assert_eq!(doc["meta"]["mode"], "float");

    let mut config = cfg(Command::Choi {
        channel: "0.4, 0.3, 0.2, 0.1".into(),
    });
    config.mode = Mode::Float;
    let doc = run_json(&config);
    assert_eq!(doc["state_vs_channel_level_match"], true);
    assert_eq!(doc["interference_vs_pairing_match"], true);
    assert_eq!(doc["eb_equals_separability"], true);
}

#[test]
fn choi_flags_an_entangled_choi_state() {
    let doc = run_json(&cfg(Command::Choi {
        channel: "9/10, 1/30, 1/30, 1/30".into(),
    }));
    assert_eq!(doc["separable"], false);
    assert_eq!(doc["entanglement_breaking"], false);
    assert_eq!(doc["eb_equals_separability"], true);
    assert_eq!(doc["max_weight"]["label"], "phi_plus");
    assert_eq!(doc["max_weight"]["exact"], "9/10");
}

#[test]
fn twirl_reads_kraus_json_and_reports_both_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kraus.json");
    // Pauli Kraus set of the depolarising channel with weights
    // (5/8, 1/8, 1/8, 1/8): sqrt(5/8) I, sqrt(1/8) X, sqrt(1/8) Y,
    // sqrt(1/8) Z. The Y entries exercise the imaginary slots.
    let a = (5.0f64 / 8.0).sqrt();
    let b = (1.0f64 / 8.0).sqrt();
    let ops = serde_json::json!([
        [[[a, 0.0], [0.0, 0.0]], [[0.0, 0.0], [a, 0.0]]],
        [[[0.0, 0.0], [b, 0.0]], [[b, 0.0], [0.0, 0.0]]],
        [[[0.0, 0.0], [0.0, -b]], [[0.0, b], [0.0, 0.0]]],
        [[[b, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-b, 0.0]]]
    ]);
    let mut file = std::fs::File::create(&path).unwrap();
    write!(file, "{ops}").unwrap();

    let config = cfg(Command::Twirl {
        kraus: path.clone(),
        order: 2,
        design_size: 24,
    });
    let doc = run_json(&config);
    assert_eq!(doc["kraus_ops"], 4);
    let eta = doc["eta"].as_f64().unwrap();
    assert!((eta - 0.5).abs() < 1e-12, "eta of this channel is 1/2");
    let composed = doc["order2_rate_variants"]["composed_3_eta4_over_64"]
        .as_f64()
        .unwrap();
    assert!((composed - 3.0 / 1024.0).abs() < 1e-15);
    let inflated = doc["order2_rate_variants"]["inflated_3_eta4_over_4"]
        .as_f64()
        .unwrap();
    assert!((inflated / composed - 16.0).abs() < 1e-9);
    assert_eq!(doc["resource_cost"]["state_copies"], "331776");
    assert_eq!(doc["resource_cost"]["channel_copies"], "1327104");

    let bad = cfg(Command::Twirl {
        kraus: path,
        order: 40,
        design_size: 24,
    });
    assert!(run(&bad).is_err(), "orders above 31 overflow the ledger");
}

#[test]
fn canonical_command_line_strips_whitespace_and_omits_out() {
    let config = RunConfig {
        command: Command::Classify {
            channel: "1/4, 1/4, 1/4, 1/4".into(),
        },
        mode: Mode::Float,
        out: Some(PathBuf::from("/tmp/anywhere.json")),
        seed: 9,
    };
    assert_eq!(
        canonical_command_line(&config),
        "pauli-switch classify --channel 1/4,1/4,1/4,1/4 --mode float --seed 9"
    );
}

#[test]
fn binary_rate_of_identity_prints_zero_and_exits_zero() {
    let out = run_bin(&["rate", "--channel", "1,0,0,0", "--order", "5"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rate"], "0");
    assert_eq!(doc["rate_float"], 0.0);
}

#[test]
fn binary_usage_error_exits_two() {
    let out = run_bin(&["sweep", "--orders", "1..2", "--grid", "0:1:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    let out = run_bin(&["rate", "--channel", "1,0,0,0"]);
    assert_eq!(out.status.code(), Some(2), "clap missing-argument error");
}

#[test]
fn binary_verify_quick_exits_zero_and_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run_bin(&[
        "verify",
        "--level",
        "quick",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "verify quick must exit 0");
    assert!(out.stdout.is_empty(), "report goes to the file, not stdout");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["all_passed"], true);
    assert!(doc["suites_passed"].as_u64().unwrap() >= 6);
}

#[test]
fn binary_nogo_smoke_run_exits_zero() {
    let out = run_bin(&["nogo", "--channels", "5", "--seed", "3"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["bracket_witness"]["matches_2_XX"], true);
    assert_eq!(doc["all_plus_identity_below_one"], true);
    assert_eq!(doc["meta"]["seed"], 3);
}
