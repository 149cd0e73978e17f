use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bistab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bistab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(o: &Output) -> Value {
    let stdout = String::from_utf8_lossy(&o.stdout);
    let line = stdout.lines().last().expect("one summary line");
    serde_json::from_str(line).expect("summary is JSON")
}

#[test]
fn crossings_for_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = bistab(dir.path(), &["--preset", "paper", "crossings", "--level", "g", "--target", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    let n = s["n_star"].as_f64().unwrap();
    assert!((n - 66.0).abs() <= 16.2, "{n}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("crossings.json")).unwrap()).unwrap();
    assert_eq!(report[0]["target_level"], 7);
    let csv = std::fs::read_to_string(dir.path().join("crossings.csv")).unwrap();
    assert!(csv.starts_with("k,j,n_star,n_below,n_above,error_bound\n"));
}

#[test]
fn uncoupled_roots_are_single() {
    let dir = tempfile::tempdir().unwrap();
    let o = bistab(
        dir.path(),
        &["--set", "g_MHz=0", "--set", "n_max=300", "roots", "--level", "f", "--detuning-mhz=-12,-8.2,0,3", "--photons", "1,40,150"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let points = summary(&o)["points"].as_array().unwrap().clone();
    assert_eq!(points.len(), 12);
    for p in points {
        assert_eq!(p["root_count"], 1);
        assert_eq!(p["region"], "S0");
    }
}

#[test]
fn summary_table_carries_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = bistab(dir.path(), &["summary"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = summary(&o)["rows"].as_array().unwrap().clone();
    let refs: Vec<f64> = rows.iter().map(|r| r["n_c_experiment_reference"].as_f64().unwrap()).collect();
    assert_eq!(refs, vec![49.0, 61.0, 20.0]);
    let mech: Vec<&str> = rows.iter().map(|r| r["mechanism"].as_str().unwrap()).collect();
    assert_eq!(mech, vec!["MIST", "SCD", "SCD"]);
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn map_bytes_do_not_depend_on_threads() {
    let small = ["--set", "map_drives=8", "--set", "map_detunings=40", "--mode", "both", "map", "--level", "e"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = bistab(a.path(), &[&["--threads", "1"], &small[..]].concat());
    let ob = bistab(b.path(), &[&["--threads", "3"], &small[..]].concat());
    assert!(oa.status.success() && ob.status.success());
    let ca = std::fs::read(a.path().join("map.csv")).unwrap();
    let cb = std::fs::read(b.path().join("map.csv")).unwrap();
    assert_eq!(ca, cb);
    let header = String::from_utf8_lossy(&ca).lines().next().unwrap().to_string();
    assert_eq!(header, "E_rad_per_s,N,delta_Mr_rad_per_s,T,phi,root_count,region");
}

#[test]
fn provenance_is_written_in_rad_per_s() {
    let dir = tempfile::tempdir().unwrap();
    let o = bistab(dir.path(), &["effres", "--levels", "g,e,f"]);
    assert!(o.status.success());
    let prov = std::fs::read_to_string(dir.path().join("provenance")).unwrap();
    assert!(prov.contains("omega_r_rad_per_s = 3.19060149899e10"), "{prov}");
    let curves = summary(&o)["curves"].as_array().unwrap().clone();
    assert!(curves.iter().all(|c| c["chi_rad_per_s"].as_f64().unwrap() < 0.0));
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# two-level toy\nomega_r_GHz = 5\nomega_q_GHz = 6\neta_MHz = 200\ng_MHz = 50\nkappa_MHz = 1\ntransmon_levels = 2\nn_max = 50\n",
    )
    .unwrap();
    let o = bistab(dir.path(), &["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    assert_eq!(s["levels"], 2);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 51);
}

#[test]
fn error_categories_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "preset = paper\nomega_r_GHz = -1\n").unwrap();
    let o = bistab(dir.path(), &["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega_r_GHz"));

    let o = bistab(dir.path(), &["--set", "bogus=1", "spectrum"]);
    assert_eq!(o.status.code(), Some(2));

    let o = bistab(dir.path(), &["--set", "n_max=100", "trajectory", "--level", "f"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(summary(&o)["code"], 3);

    let o = bistab(dir.path(), &["--mode", "fixedpoint", "critical"]);
    assert_eq!(o.status.code(), Some(2));

    let o = bistab(dir.path(), &["roots", "--level", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trajectory_and_landscape_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = bistab(dir.path(), &["trajectory", "--level", "f", "--detuning-mhz=-8.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    assert!(s["T"].as_f64().unwrap() > 0.0);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,re_alpha,im_alpha,n\n"));

    let o = bistab(dir.path(), &["landscape", "--level", "f", "--detuning-mhz=-8.2", "--grid", "11"]);
    assert!(o.status.success());
    assert_eq!(summary(&o)["roots"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(dir.path().join("landscape.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 121);
}
