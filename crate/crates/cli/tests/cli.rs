use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn h2path(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_h2path"))
        .args(args)
        .env_remove("H2PATH_OUT")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn compare_all_writes_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = h2path(&[
        "compare",
        "--presets",
        "all",
        "--profile",
        "synth:0.4883,42",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let table = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 10);
    assert!(table.starts_with(
        "use_case,lcoh_gbp_per_mwh,lcoh_gbp_per_kg,lcoh_free_gbp_per_mwh,annual_h2_t,stack_life_years,load_factor_pct"
    ));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("comparison.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 9);
    for id in ["I", "II", "III-a", "III-b", "IV-a", "IV-b", "V-a", "V-b-i", "V-b-ii"] {
        assert!(dir.path().join(format!("{id}.csv")).exists(), "{id}");
    }
    // Free-electricity column only for rows that report it.
    let row_i = table.lines().nth(1).unwrap();
    assert_eq!(row_i.split(',').nth(3), Some(""));
    let row_ii = table.lines().nth(2).unwrap();
    assert!(!row_ii.split(',').nth(3).unwrap().is_empty());
}

#[test]
fn grid_only_run_ignores_the_profile() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, profile) in [(&a, "synth:0.5,1"), (&b, "synth:0.1,77")] {
        let out = h2path(&[
            "run",
            "--preset",
            "I",
            "--profile",
            profile,
            "--out",
            &out_arg(dir.path()),
        ]);
        assert!(out.status.success());
    }
    let ra = fs::read(a.path().join("I.csv")).unwrap();
    let rb = fs::read(b.path().join("I.csv")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(
        fs::read(a.path().join("I.json")).unwrap(),
        fs::read(b.path().join("I.json")).unwrap()
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = h2path(&["run", "--preset", "V-b-i", "--ledger", "--out", &out_arg(dir.path())]);
        assert!(out.status.success());
    }
    for name in ["V-b-i.csv", "V-b-i.json", "V-b-i_ledger.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let leftovers: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn capex_sweep_is_twelve_monotone_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = h2path(&[
        "sweep",
        "--preset",
        "III-a",
        "--param",
        "pem_capex",
        "--range",
        "-0.8:0.3:0.1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep_pem_capex_multiplier.csv")).unwrap();
    let lcoh = column(&csv, "lcoh_gbp_per_kg");
    assert_eq!(lcoh.len(), 12);
    assert!(lcoh.windows(2).all(|w| w[1] > w[0]));
    let x = column(&csv, "pem_capex_multiplier");
    assert!((x[0] - 0.2).abs() < 1e-9 && (x[11] - 1.3).abs() < 1e-9);
    assert!(dir.path().join("sweep_pem_capex_multiplier.json").exists());
}

#[test]
fn sweep_defaults_and_explicit_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = h2path(&[
        "sweep",
        "--preset",
        "III-a",
        "--param",
        "efficiency",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep_efficiency_uplift.csv")).unwrap();
    assert_eq!(column(&csv, "efficiency_uplift"), vec![0.03, 0.05, 0.07, 0.1]);

    let out = h2path(&[
        "sweep",
        "--preset",
        "III-a",
        "--param",
        "stack_life",
        "--values",
        "60000,120000",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep_stack_life_hours.csv")).unwrap();
    let lcoh = column(&csv, "lcoh_gbp_per_kg");
    assert!(lcoh[1] < lcoh[0]);
}

#[test]
fn overrides_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let base = h2path(&["run", "--preset", "III-a", "--out", &out_arg(dir.path())]);
    let free = h2path(&[
        "run",
        "--preset",
        "III-a",
        "--set",
        "econ.prices.p_ppa=0",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(base.status.success() && free.status.success());
    let lcoh = |o: &Output| column(&String::from_utf8_lossy(&o.stdout), "lcoh_gbp_per_kg")[0];
    assert!(lcoh(&free) < lcoh(&base));
}

#[test]
fn scenario_and_profile_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    let out = h2path(&["run", "--preset", "II", "--out", &out_arg(dir.path())]);
    assert!(out.status.success());

    let mut value: serde_json::Value = serde_json::json!({
        "id": "custom",
        "plant": {
            "wind": {"rated_mw": 10.0, "lifetime_years": 25.0, "capex_per_kw": 1230.0, "opex_per_kw_year": 25.4},
            "electrolyser": {
                "rated_mw": 10.0, "lifetime_years": 30.0, "capex_per_kw": 1500.0,
                "opex_frac_of_capex_per_year": 0.05, "stack_life_hours": 60000.0,
                "stack_replace_frac_of_capex": 0.48, "curve": [[0.0, 0.6746], [1.0, 0.6746]]
            },
            "compressor": {"capex_per_kg_annual": 2.49, "opex_frac_of_capex_per_year": 0.06, "energy_kwh_per_kg": 0.399, "lifetime_years": 30.0},
            "grid": {"line_capacity_mw": 0.0, "line_cost_per_kw": 100.0, "line_cost_share_h2": 0.0,
                     "wire_capacity_mw": 10.0, "wire_cost_per_kw": 15.0, "wire_cost_share_h2": 1.0, "ic_lifetime_years": 30.0}
        },
        "rule": {"kind": "off_grid_direct"},
        "econ": {"discount_rate": 0.03, "prices": {"p_ppa": 0.057, "p_import": 0.184, "p_export": 0.07}},
        "report_free_variant": true
    });
    let profile_path = dir.path().join("wind.csv");
    let mut csv = String::from("step_index,power_mw\n");
    for i in 0..17_520 {
        csv.push_str(&format!("{i},{}\n", if i % 2 == 0 { 0.0 } else { 10.0 }));
    }
    fs::write(&profile_path, csv).unwrap();
    value["profile"] = serde_json::Value::String(profile_path.to_str().unwrap().into());
    fs::write(&scenario, serde_json::to_string(&value).unwrap()).unwrap();

    let out = h2path(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("custom.csv")).unwrap();
    // Half the steps at full power: half the benchmark output.
    let t = column(&table, "annual_h2_t")[0];
    assert!((t - 1760.394 / 2.0).abs() < 0.01, "{t}");

    let out = h2path(&[
        "dump-ledger",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success());
    let ledger = fs::read_to_string(dir.path().join("custom_ledger.csv")).unwrap();
    assert_eq!(ledger.lines().count(), 17_521);
    assert!(ledger.starts_with("step,p_wind,p_h2_wind,p_import,p_export,p_curtail,p_pem,p_comp,mass_kg\n"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_h2path"))
        .args(["run", "--preset", "I"])
        .env("H2PATH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("I.csv").exists());
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_arg(dir.path());
    for args in [
        vec!["run", "--preset", "VII", "--out", &o],
        vec!["run", "--preset", "I", "--set", "econ.prices.bogus=1", "--out", &o],
        vec!["run", "--preset", "I", "--set", "econ.discount_rate=-0.1", "--out", &o],
        vec!["run", "--preset", "I", "--profile", "synth:1.5,3", "--out", &o],
        vec!["run", "--preset", "I", "--profile", "/no/such/file.csv", "--out", &o],
        vec![
            "sweep",
            "--preset",
            "III-a",
            "--param",
            "pem_capex",
            "--range",
            "-0.9:0.3:0.1",
            "--out",
            &o,
        ],
        vec!["sweep", "--preset", "III-a", "--param", "colour", "--out", &o],
        vec!["run", "--out", &o],
        vec!["frobnicate"],
    ] {
        let out = h2path(&args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    // Nothing is written when validation fails.
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn simulation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_arg(dir.path());
    let diverging = h2path(&[
        "run",
        "--preset",
        "I",
        "--set",
        "plant.compressor.energy_kwh_per_kg=200",
        "--out",
        &o,
    ]);
    assert_eq!(diverging.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&diverging.stderr).contains("step 0"));
    let no_output = h2path(&["run", "--preset", "II", "--profile", "synth:0,1", "--out", &o]);
    assert_eq!(no_output.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    assert!(h2path(&["--help"]).status.success());
}
