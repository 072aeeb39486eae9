use std::path::Path;
use std::process::{Command, Output};

fn ffquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffquad"))
        .args(args)
        .env_remove("CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn rejects_q_not_1_mod_4() {
    let o = ffquad(&["--q", "7", "--g", "1", "lfun"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn rejects_bad_values() {
    for args in [
        &["--g", "0", "lfun"][..],
        &["--mode", "partial", "lfun"],
        &["--format", "xml", "lfun"],
        &["--ell", "2x", "twisted"],
    ] {
        assert_eq!(ffquad(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn lfun_csv_shape() {
    let o = ffquad(&["--q", "5", "--g", "1", "lfun"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "schema_version");
    assert!(header.iter().any(|h| h == "central_value"));
    let coeffs = header.iter().position(|h| h == "coeffs").unwrap();
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    // |H_3| = q^3 - q^2 at q = 5
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert_eq!(&r[0], "1");
        let c: Vec<i64> = r[coeffs].split(' ').map(|s| s.parse().unwrap()).collect();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0], 1);
        assert_eq!(c[2], 5);
    }
}

#[test]
fn moments_json_shape() {
    let o = ffquad(&["--q", "5", "--g", "1", "--k", "1..2", "--x", "1,2", "--format", "json", "moments"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["metadata"]["command"], "moments");
    assert_eq!(v["metadata"]["q"], "5");
    assert!(v["metadata"]["generated_unix"].is_u64());
    // per k: one L moment and two per X
    assert_eq!(v["rows"].as_array().unwrap().len(), 2 * (1 + 2 * 2));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, format: &str| {
        let path = dir.path().join(name);
        let o = ffquad(&[
            "--g", "1..2", "--mode", "sample", "--n", "40", "--seed", "7", "--format", format, "--out",
            path.to_str().unwrap(), "moments",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(path).unwrap()
    };
    assert_eq!(run("a.csv", "csv"), run("b.csv", "csv"));
    let strip = |s: String| {
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        v["metadata"].as_object_mut().unwrap().remove("generated_unix");
        v
    };
    assert_eq!(strip(run("a.json", "json")), strip(run("b.json", "json")));
}

#[test]
fn config_file_round_trip_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nq = 13\ng = 2..3\nell = 1; x^2\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let first = stdout(&ffquad(&["--config", cfg, "--g", "1", "config"]));
    assert!(first.contains("q = 13\n"));
    assert!(first.contains("g = 1\n"));
    assert!(first.contains("ell = 1;x^2\n"));
    let again = dir.path().join("again.cfg");
    std::fs::write(&again, &first).unwrap();
    let second = stdout(&ffquad(&["--config", again.to_str().unwrap(), "config"]));
    assert_eq!(first, second);

    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    let o = ffquad(&["--config", dir.path().join("bad.cfg").to_str().unwrap(), "config"]);
    assert_eq!(o.status.code(), Some(2));
}

fn corrupt(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[1] = lines[1].replacen(',', ",9", 1);
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn corrupted_cache_is_recomputed_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let clean = ffquad(&["--g", "1", "--cache-dir", cache, "lfun"]);
    assert!(clean.status.success());
    assert!(!stderr(&clean).contains("warning"));

    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    corrupt(&files[0]);

    let again = ffquad(&["--g", "1", "--cache-dir", cache, "lfun"]);
    assert!(again.status.success());
    assert!(stderr(&again).contains("recomputed"), "{}", stderr(&again));
    assert_eq!(stdout(&clean), stdout(&again));

    // the rebuilt file is valid again
    let third = ffquad(&["--g", "1", "--cache-dir", cache, "lfun"]);
    assert!(!stderr(&third).contains("warning"));
}

#[test]
fn verify_warns_on_corrupted_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    assert!(ffquad(&["--g", "1", "--cache-dir", cache, "lfun"]).status.success());
    let file = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    corrupt(&file);
    let o = ffquad(&["--cache-dir", cache, "verify", "--criteria", "4"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("PASS") && line.contains(" 4 functional equation"), "{line}");
    assert!(stderr(&o).contains("recomputed"), "{}", stderr(&o));
}

#[test]
fn budget_warning_goes_to_stderr() {
    let o = ffquad(&["--g", "1", "--budget", "10", "lfun"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: full enumeration"), "{}", stderr(&o));
    assert!(!stdout(&o).contains("warning"));
    let quiet = ffquad(&["--g", "1", "lfun"]);
    assert!(stderr(&quiet).is_empty());
}

#[test]
fn constants_and_rmt_run() {
    let o = ffquad(&["--k", "1", "--ell", "1;x", "constants"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().count() > 4);
    let o = ffquad(&["--dim", "1", "--k", "1", "--n", "200", "--seed", "3", "rmt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}
