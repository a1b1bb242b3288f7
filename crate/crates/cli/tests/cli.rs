use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wpcn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpcn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, seed: &str) -> std::path::PathBuf {
    let inst = dir.path().join("instance.txt");
    let out = wpcn(&["gen", "--seed", seed, "--out", s(&inst)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    inst
}

#[test]
fn generated_instance_schedules_and_validates() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "7");
    for algo in ["MPA", "MTPA", "FPA", "OTPA", "PCA"] {
        let sched = dir.path().join(format!("{algo}.txt"));
        let out = wpcn(&["schedule", s(&inst), "--algo", algo, "--out", s(&sched)]);
        assert!(out.status.success(), "{algo}");
        let out = wpcn(&["validate", s(&inst), s(&sched)]);
        assert_eq!(out.status.code(), Some(0), "{algo}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS 10 slots"));
    }
}

#[test]
fn same_seed_gives_same_instance() {
    let a = wpcn(&["gen", "--seed", "11"]);
    let b = wpcn(&["gen", "--seed", "11"]);
    let c = wpcn(&["gen", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn tampered_schedule_exits_one() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "7");
    let sched = dir.path().join("s.txt");
    assert!(
        wpcn(&["schedule", s(&inst), "--algo", "FPA", "--out", s(&sched)])
            .status
            .success()
    );

    // halve the first slot's duration and shift nothing else
    let text = std::fs::read_to_string(&sched).unwrap();
    let mut done = false;
    let tampered: Vec<String> = text
        .lines()
        .map(|l| {
            if !done && l.starts_with("slot ") {
                done = true;
                let mut f: Vec<String> = l.split_whitespace().map(String::from).collect();
                let d: f64 = f[3].parse().unwrap();
                f[3] = format!("{:e}", d / 2.0);
                f.join(" ")
            } else {
                l.to_string()
            }
        })
        .collect();
    std::fs::write(&sched, tampered.join("\n") + "\n").unwrap();

    let out = wpcn(&["validate", s(&inst), s(&sched)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn bad_config_exits_two_with_location() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        "{\n  \"sweep_variable\": \"p_max\",\n  \"values\": [0.1, 0.01]\n}\n",
    )
    .unwrap();
    let out = wpcn(&["sweep", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("values"), "{err}");

    std::fs::write(&cfg, "{\"p_hap\": 3}").unwrap();
    assert_eq!(wpcn(&["gen", "--config", s(&cfg)]).status.code(), Some(2));
    assert_eq!(wpcn(&["schedule", "--algo", "XYZ"]).status.code(), Some(2));
}

#[test]
fn infeasible_instance_exits_three() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "7");
    // a user that harvests nothing and holds no charge can never transmit
    let text = std::fs::read_to_string(&inst).unwrap();
    let edited: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("user 4 ") {
                let mut f: Vec<&str> = l.split_whitespace().collect();
                f[7] = "0";
                f[8] = "5e-324";
                f.join(" ")
            } else {
                l.to_string()
            }
        })
        .collect();
    std::fs::write(&inst, edited.join("\n") + "\n").unwrap();
    let out = wpcn(&["schedule", s(&inst), "--algo", "MPA"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sweep_writes_csv_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"sweep_variable": "n_users", "values": [2, 3], "realizations": 3, "seed": 5}"#,
    )
    .unwrap();
    let out = wpcn(&["sweep", "--config", s(&cfg), "--algo", "MPA,FPA"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), wpcn_cli::sweep::CSV_HEADER.join(","));
    assert_eq!(lines.count(), 2 * 2 * 3);
}
