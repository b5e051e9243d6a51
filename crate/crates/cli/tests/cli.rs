use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wallcross"));
    c.env_remove("WALLCROSS_CONFIG");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wallcross-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn quintic() -> String {
    data("quintic.conf").display().to_string()
}

#[test]
fn hyperplane_class_prints_five() {
    let o = run(&["--config", &quintic(), "rank0-direct", "--class", "0,5,-5/2,5/6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().next().unwrap() == "J = 5");
}

#[test]
fn vanishing_class() {
    let o = run(&["rank0-direct", "--class", "0,10,0,15/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("J = 0 (vanishing: Q(v) < 0)"));
}

#[test]
fn bound_violation_exits_2() {
    let o = run(&["rank0-direct", "--class", "0,5,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_window_exits_3_with_keys() {
    let tbl = scratch("pt_only.tbl");
    std::fs::write(&tbl, "#range P 0 0 0 0\nP 0 0 1\n").unwrap();
    let conf = scratch("pt_only.conf");
    std::fs::write(&conf, format!("tables.path = {}\n", tbl.display())).unwrap();
    let o = run(&["--config", conf.to_str().unwrap(), "rank0-direct", "--class", "0,5,-5/2,5/6"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("I m=0 deg=0"), "{}", stderr(&o));
}

#[test]
fn json_report_is_exact_and_hashed() {
    let out = scratch("a2.json");
    let o = run(&["--config", &quintic(), "--out", out.to_str().unwrap(), "rank0-direct", "--class", "0,10,-10,20/3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["value"], "15");
    assert_eq!(v["class"][3], "20/3");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let first = std::fs::read(&out).unwrap();
    run(&["--config", &quintic(), "--out", out.to_str().unwrap(), "rank0-direct", "--class", "0,10,-10,20/3"]);
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn env_var_supplies_config() {
    let conf = scratch("bad.conf");
    std::fs::write(&conf, "geometry.h4 = 5\n").unwrap();
    let o = bin().env("WALLCROSS_CONFIG", &conf).args(["rank0-direct", "--class", "0,5,-5/2,5/6"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"));
    let o = bin().env("WALLCROSS_CONFIG", data("quintic.conf")).args(["rank0-direct", "--class", "0,5,-5/2,5/6"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn inductive_head_only() {
    let tbl = scratch("head.tbl");
    std::fs::write(&tbl, "#range P 0 12 -20 20\nP -15 10 7\n").unwrap();
    let conf = scratch("head.conf");
    std::fs::write(&conf, format!("tables.path = {}\n", tbl.display())).unwrap();
    let o = run(&["--config", conf.to_str().unwrap(), "rank0-inductive", "--class", "0,5,-5/2,5/6", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // prefactor -1/10 times the head value 7
    assert!(stdout(&o).starts_with("J = -7/10"), "{}", stdout(&o));
}

#[test]
fn rank2_odd_missing_dt1_exits_3() {
    let o = run(&["rank2", "--class", "2,5,-15/2,41/6", "--n", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).contains("missing table keys"));
    let o = run(&["rank2", "--class", "2,5,-15/2,41/6", "--n", "2", "--strictness", "loose"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn osv_check_on_synthetic_tables() {
    let out = scratch("osv.json");
    let o = run(&["osv-check", "--k", "1", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("mismatches: 0"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["mismatches"], 0);
    assert!(!v["rows"].as_array().unwrap().is_empty());
}

#[test]
fn walls_svg() {
    let out = scratch("os.svg");
    let o = run(&["walls", "--class", "0,5,-5/2,5/6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(&out).unwrap();
    let lines = wallcross::walls::parse_svg(&svg).unwrap();
    let walls: Vec<_> = lines.iter().filter(|l| l.0 == wallcross::walls::LineKind::Wall).collect();
    assert_eq!(walls.len(), 1);
    assert_eq!(walls[0].1.to_string(), "-1/2");
    let again = run(&["walls", "--class", "0,5,-5/2,5/6"]);
    assert_eq!(stdout(&again), svg);
    // every wall of a class is parallel to its final wall, with gradient nu_H
    let o = run(&["walls", "--class", "0,10,-10,20/3"]);
    let lines = wallcross::walls::parse_svg(&stdout(&o)).unwrap();
    assert!(lines.iter().all(|l| l.1.to_string() == "-1"));
}

#[test]
fn table_validate() {
    let o = run(&["--config", &quintic(), "table-validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("P: 1 entries"));
    let bad = scratch("bad.tbl");
    std::fs::write(&bad, "#range P 0 0 0 0\nP 0 0\n").unwrap();
    let o = run(&["table-validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn selftest_passes_and_names_failures() {
    let o = run(&["--config", &quintic(), "--verbose", "selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains(" PASS ")).count(), 13);
    assert!(out.lines().next().unwrap().ends_with(" s)"), "timing missing: {out}");
    // a corrupted table: P_{0,0} = 2
    let tbl = scratch("corrupt.tbl");
    std::fs::write(&tbl, "#range P 0 0 0 0\n#range I 0 0 0 0\nP 0 0 2\nI 0 0 1\n").unwrap();
    let conf = scratch("corrupt.conf");
    std::fs::write(&conf, format!("tables.path = {}\n", tbl.display())).unwrap();
    let o = run(&["--config", conf.to_str().unwrap(), "selftest", "--only", "A1,A2,A13"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("A1"), "{}", stderr(&o));
}
