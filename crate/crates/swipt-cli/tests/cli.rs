use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn swipt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn stats_reports_both_tiers() {
    let o = swipt(&["stats"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with(
        "tier,name,cell_load,nonvoid_prob,association_prob,lambda_sigma_per_km2,scheduled_user_intensity_per_km2\n"
    ));
    let loads = column(&out, "cell_load");
    assert_eq!(loads.len(), 2);
    assert!((loads[0] - 2.0).abs() < 1e-12 && (loads[1] - 1.0).abs() < 1e-12);
    let q = column(&out, "nonvoid_prob");
    assert!((q[0] - (1.0 - (1.0f64 + 4.0 / 7.0).powf(-3.5))).abs() < 1e-12);
    // The manifest goes to stderr when there is no output file.
    let manifest: serde_json::Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(manifest["config_source"], "bundled:table1");
    assert_eq!(manifest["config"]["network"]["pathloss_exponent"], 4.0);
}

#[test]
fn missing_field_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    let text = include_str!("../../../configs/table1.toml").replace("pathloss_exponent", "# pathloss_exponent");
    fs::write(&path, text).unwrap();
    let o = swipt(&["stats", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pathloss_exponent"), "{}", stderr(&o));
}

#[test]
fn bad_sweeps_and_usage_are_config_errors() {
    for args in [
        &["outage", "--sweep", "tier.3.antennas=1:4:4"][..],
        &["outage", "--sweep", "speed=1:2:3"],
        &["outage", "--sweep", "cell_load=8:2:3"],
        &["outage", "--sweep", "cell_load=1:8:0"],
        &["outage", "--sweep", "power_split=0.5:1.0:3"],
        &["stats", "--config", "no-such-file.toml"],
        &["frobnicate"],
    ] {
        let o = swipt(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn infeasible_optimization_is_a_numerical_failure() {
    let o = swipt(&["ee-optimize", "--sweep", "min_harvest_power_w=1:1:1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn csv_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("outage-{threads}.csv"));
        let o = swipt(&[
            "outage",
            "--sweep",
            "cell_load=0.5:8:3:log",
            "--trials",
            "300",
            "--seed",
            "5",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(&out).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    let csv = String::from_utf8(one).unwrap();
    assert!(csv.starts_with(
        "cell_load_tier1,eps_eh,eps_eh_full_load,eps_ps,eps_ps_full_load,eps_eh_mc,eps_eh_mc_ci95,eps_ps_mc,eps_ps_mc_ci95\n"
    ));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn manifest_replays_the_run_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("rates.csv");
    let o = swipt(&[
        "rates",
        "--sweep",
        "cell_load.2=0.5:4:2:log",
        "--trials",
        "200",
        "--seed",
        "9",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = Path::new(dir.path()).join("rates.csv.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["trials"], 200);
    assert_eq!(m["sweep"], "cell_load.2=0.5:4:2:log");
    assert!(m["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert!(m["wall_time_s"].as_f64().unwrap() > 0.0);
    assert_eq!(m["simulation"].as_array().unwrap().len(), 2);

    let second = dir.path().join("again.csv");
    let o = swipt(&["replay", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn figure_5a_has_three_efficiency_curves() {
    let o = swipt(&["reproduce-figure", "5a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with(
        "power_split,zeta_beta0.3,feasible_beta0.3,zeta_beta0.4,feasible_beta0.4,zeta_beta0.55,feasible_beta0.55\n"
    ));
    let rho = column(&out, "power_split");
    assert_eq!(rho.len(), 91);
    assert!((rho[0] - 0.05).abs() < 1e-12 && (rho[90] - 0.95).abs() < 1e-12);
    for beta in ["0.3", "0.4", "0.55"] {
        let z = column(&out, &format!("zeta_beta{beta}"));
        assert!(z.iter().all(|&v| v > 0.0 && v.is_finite()));
        let f = column(&out, &format!("feasible_beta{beta}"));
        assert!(f.iter().all(|&v| v == 0.0 || v == 1.0));
        // Feasibility only shrinks as the split sends more power to the decoder.
        assert!(f.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn ee_optimize_json_carries_the_optimum() {
    let o = swipt(&["ee-optimize", "--config", "table1-alpha2.5", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rho = v["rho_star"].as_f64().unwrap();
    let zeta = v["zeta_star"].as_f64().unwrap();
    assert!((0.05..=0.95).contains(&rho));
    assert!(zeta >= v["grid_max"].as_f64().unwrap() - 1e-12);
}

#[test]
fn harvest_cdf_is_monotone_with_simulation() {
    let o = swipt(&["harvest-cdf", "--sweep", "theta=1e-6:1e-3:4:log", "--trials", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for name in ["cdf_bound", "cdf_full_load", "cdf_lowest_limit", "cdf_mc"] {
        let c = column(&out, name);
        assert_eq!(c.len(), 4);
        assert!(c.windows(2).all(|w| w[1] >= w[0]), "{name}: {c:?}");
    }
}

#[test]
fn simulate_emits_one_row_per_trial() {
    let o = swipt(&["simulate", "--trials", "50", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 51);
    assert_eq!(column(&out, "trial"), (0..50).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn validate_passes_on_the_bundled_profiles() {
    for (profile, trials) in [("table1", "10000"), ("table1-alpha2.5", "300")] {
        let o = swipt(&["validate", "--config", profile, "--trials", trials]);
        assert_eq!(o.status.code(), Some(0), "{profile}: {}{}", stdout(&o), stderr(&o));
        assert!(!stdout(&o).contains(",false,"));
    }
}
