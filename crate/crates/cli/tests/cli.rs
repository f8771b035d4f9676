use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn board_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/lolboard.json")
}

fn webtable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_webtable"))
        .args(args)
        .env_remove("WEBTABLE_FETCH_TIMEOUT")
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn board_to_stdout() {
    let out = webtable(&["--pipeline", path_str(&board_config())]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 13);
    assert!(stdout.lines().nth(1).unwrap().starts_with("56\t2\t54\t"));
}

#[test]
fn board_to_files_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (table, report) = (dir.path().join("board.csv"), dir.path().join("report.json"));
    let out = webtable(&[
        "--pipeline",
        path_str(&board_config()),
        "--out",
        path_str(&table),
        "--report",
        path_str(&report),
        "--format",
        "csv",
        "--locale",
        "en-ground-truth",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&table).unwrap();
    assert!(csv.contains("\"Oh boy, time to open a Hextech chest\""));
    let report = std::fs::read_to_string(&report).unwrap();
    assert!(report.contains("\"profile\": \"en-ground-truth\""));
    assert!(report.contains("\"overall\": \"pass\""));
}

#[test]
fn verbose_lists_check_rows() {
    let out = webtable(&["--pipeline", path_str(&board_config()), "--verbose"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("row 6: \u{a0} Herald Comment"), "{stderr}");
    assert!(stderr.contains("no mismatches"));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("t.html"),
        "<table><tr><td>6.4k</td></tr></table>",
    )
    .unwrap();
    let config = dir.path().join("p.json");
    std::fs::write(
        &config,
        r#"{"input":"t.html","steps":[
            {"op":"regroup","k":1,"fields":[{"name":"v","offset":0,"column":0}]},
            {"op":"verify","check":"convert","field":"v"}]}"#,
    )
    .unwrap();
    let out = webtable(&["--pipeline", path_str(&config)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed at 2:verify v"));
}

#[test]
fn config_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"steps":[{"op":"parse_field","field":"x","parser":"integer"}]}"#,
    )
    .unwrap();
    let out = webtable(&["--pipeline", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("only allowed after regroup"));

    let out = webtable(&["--pipeline", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let missing_input = path_str(&dir.path().join("nope.html")).to_string();
    let out = webtable(&[
        "--pipeline",
        path_str(&board_config()),
        "--input",
        &missing_input,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aborted at load"));

    let out = webtable(&["--pipeline", path_str(&board_config()), "--locale", "xx"]);
    assert_eq!(out.status.code(), Some(2));
}
