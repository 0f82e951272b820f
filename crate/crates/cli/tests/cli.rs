use std::path::Path;
use std::process::{Command, Output};

fn tenfold(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tenfold"));
    cmd.args(args).env_remove("TENFOLD_JOBS");
    if let Some(text) = config {
        let p = dir.join("cfg.toml");
        std::fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.output().unwrap()
}

#[test]
fn verify_clifford_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = tenfold(&["verify-clifford", "--out", out.to_str().unwrap()], None, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("clifford.csv")).unwrap();
    // r + s in 1..=8
    assert_eq!(csv.lines().count(), 1 + (2..=9).sum::<usize>());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "1");
    assert_eq!(report["config"]["max_order"], 8);
}

#[test]
fn unknown_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = tenfold(&["bb-check"], Some("model = \"ssh\"\nsweep_size = 3\n"), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep_size"));
    let o = tenfold(&["bb-check", "--tolerance", "wobble=1"], Some("model = \"ssh\"\n"), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wobble"));
}

#[test]
fn bb_check_ssh_columns_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = "model = \"ssh\"\nsize = 40\n[params]\nw = 1.0\n[grid]\nv = [0.5, 2.0]\n";
    let o = tenfold(&["bb-check", "--out", out.to_str().unwrap()], Some(cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("bb.csv")).unwrap();
    let h = rdr.headers().unwrap().clone();
    let (ib, ie) = (h.iter().position(|x| x == "bulk").unwrap(), h.iter().position(|x| x == "edge_plus").unwrap());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let pairs: Vec<(String, String)> = rows.iter().map(|r| (r[ib].to_string(), r[ie].to_string())).collect();
    assert_eq!(pairs, [("1".into(), "1".into()), ("0".into(), "0".into())]);
}

#[test]
fn assertion_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // the plaquette sum is never an exact integer in floating point
    let o = tenfold(
        &["bulk-invariant", "--out", out.to_str().unwrap(), "--tolerance", "invariant=1e-300"],
        Some("model = \"qwz\"\n"),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "model = \"kitaev\"\nsize = 30\n[grid]\nmu = \"0:4:1\"\n[disorder]\nrelative = 0.3\nseeds = \"0..3\"\n";
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = tenfold(&["disorder-sweep", "--out", out.to_str().unwrap(), "--jobs", jobs], Some(cfg), dir.path());
        assert!(o.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out.join("invariants.csv")).unwrap(), std::fs::read(out.join("report.json")).unwrap())
    };
    let (a, ra) = run("a", "1");
    let (b, _) = run("b", "1");
    let (c, _) = run("c", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    // 5 grid points × (clean + 3 seeds)
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 5 * 4);
    assert!(!ra.is_empty());
}

#[test]
fn kitaev_sweep_locates_transition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/kitaev_disorder.toml")).unwrap();
    let o = tenfold(&["disorder-sweep", "--out", out.to_str().unwrap()], Some(&cfg), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("invariants.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    // 21 μ points × 10 seeds
    assert_eq!(rows.len(), 210);
    let mu = |r: &csv::StringRecord| -> f64 {
        r[2].split(';').find_map(|kv| kv.strip_prefix("mu=")).unwrap().parse().unwrap()
    };
    let last_top = rows.iter().filter(|r| &r[5] == "-1").map(mu).fold(f64::MIN, f64::max);
    let first_triv = rows.iter().filter(|r| &r[5] == "1").map(mu).fold(f64::MAX, f64::min);
    assert!(last_top < 2.0 && first_triv > 2.0 && first_triv - last_top <= 0.4 + 1e-9, "{last_top} {first_triv}");
}
