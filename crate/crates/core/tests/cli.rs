use std::fs;
use std::process::{Command, Output};

fn sternlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sternlab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn config_file_with_sweep_block_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    let csv = dir.path().join("curve.csv");
    fs::write(
        &config,
        format!(
            "experiment = decoherence-curve\n\
             lambda = 2.0   # field gradient\n\
             sigma0 = 0.5\n\
             sweep.k.start = 1\n\
             sweep.k.stop = 5\n\
             sweep.k.count = 5\n\
             out = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    let out = sternlab(&["decoherence-curve", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("k,T,log_overlap,norm_distance"));
    assert_eq!(lines.len(), 6);
    // T defaults to t_D = 3 sigma0 / lambda, so ln<x,y> = -(2k+1)·4.5
    let row: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row[0], "3");
    assert_eq!(row[1].parse::<f64>().unwrap(), 0.75);
    assert_eq!(row[2].parse::<f64>().unwrap(), -31.5);
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "k = 4\nalpha2 = 0.25\nsweep.alpha2 = 0:1:3\n").unwrap();
    let out = sternlab(&[
        "entropy",
        "--config",
        config.to_str().unwrap(),
        "--k",
        "2",
        "--sweep",
        "alpha2:0.5:0.5:1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("2,5.0000000000000000e-1,"));
}

#[test]
fn json_output_is_an_array_of_records() {
    let out = sternlab(&[
        "pointer",
        "--k",
        "3",
        "--T",
        "0",
        "--sweep",
        "rho:-1:1:3",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = value.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["rho"].as_f64(), Some(0.0));
    assert_eq!(rows[1]["k"].as_u64(), Some(3));
    // readout is undefined at T = 0
    assert!(rows[0]["s_z_readout_plus"].is_null());
}

#[test]
fn negative_values_and_help() {
    let out = sternlab(&["pointer", "--sweep", "rho:-2.5:-2.5:1", "--k", "0", "--T", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("-2.5000000000000000e0,0,"));
    assert_eq!(sternlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn scaling_study_accepts_c() {
    let out = sternlab(&["scaling-study", "--c", "2", "--sweep", "k:1:100:4:log"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let logs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(logs.len(), 4);
    assert!(logs.iter().all(|l| (l + 2.0).abs() < 1e-12));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "lambda = fast\n").unwrap();
    let out = sternlab(&["decoherence-curve", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a number"));

    let out = sternlab(&["decoherence-curve", "--sigma0", "-1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = sternlab(&["pointer", "--sweep", "rho:0:1"]);
    assert_eq!(out.status.code(), Some(1));

    fs::write(&config, "experiment = entropy\n").unwrap();
    let out = sternlab(&["pointer", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = sternlab(&["entropy", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));

    let out = sternlab(&["entropy", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn perturbed_validate_exits_with_two() {
    let out = sternlab(&["validate", "--perturb-sigma0", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text
        .lines()
        .any(|l| l.starts_with("per_site_overlap_quadrature,") && l.ends_with(",FAIL")));
}
