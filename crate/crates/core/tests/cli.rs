use std::process::{Command, Output};

fn ris_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"
M_y = 4
M_z = 4
n_grid = [[2, 2]]
k_list = [2]
kappa_br_list = ["inf", 1.0]
methods = ["Random", "MaxRSum", "MuiqSum"]
trials = 3
"#;

#[test]
fn run_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let o = ris_sim(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&out_a).unwrap();
    assert_eq!(a, std::fs::read(&out_b).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("N,K,kappa_br,method,metric,mean,stderr,trials,failures\n"));
    // 2 cells x 3 methods x 4 metrics
    assert_eq!(text.lines().count(), 1 + 24);
    assert!(text.contains(",1,MaxRSum,"));
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let p = cfg.to_str().unwrap();
    let o = ris_sim(&["run", "--config", p, "--methods", "Random", "--trials", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.contains(",Random,") && l.ends_with(",2,0")));

    let s1 = ris_sim(&["run", "--config", p, "--seed", "5"]).stdout;
    let s2 = ris_sim(&["run", "--config", p, "--seed", "6"]).stdout;
    assert_ne!(s1, s2);
}

#[test]
fn bad_input_exits_with_error() {
    let o = ris_sim(&["run", "--methods", "Random,Bogus", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Bogus"));
    let o = ris_sim(&["run", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_dumps_one_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let o = ris_sim(&["single", "--config", cfg.to_str().unwrap(), "--trial", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["N"], 4);
    assert_eq!(doc["K"], 2);
    assert_eq!(doc["kappa_br"], "inf");
    assert_eq!(doc["trial"], 1);
    assert_eq!(doc["Q_sum"].as_array().unwrap().len(), 2);
    let methods = doc["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 3);
    for m in methods {
        assert_eq!(m["phases"].as_array().unwrap().len(), 4);
        assert_eq!(m["w"].as_array().unwrap().len(), 2);
        for metric in ["SumRate", "ZfRate", "MmseRate", "MseTot"] {
            assert!(m["metrics"][metric].is_number());
        }
    }
}

#[test]
fn validate_passes() {
    let o = ris_sim(&["validate"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 7);
    assert!(!text.contains("FAIL"));
}
