use std::process::{Command, Output};

fn rra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rra"))
        .args(args)
        .env_remove("RRA_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_seurat_reports_rounds() {
    let o = rra(&["solve-seurat", "point", "empty:2", "-c", "2", "--rounds", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("winner: Forall"));
    assert!(text.contains("rounds to win: 1"));
}

#[test]
fn json_output_parses() {
    let o = rra(&["--format", "json", "solve-seurat", "cycle:4", "cycle:4", "-c", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["winner"], "Exists");
}

#[test]
fn exit_codes() {
    // input error
    assert_eq!(rra(&["solve-seurat", "wheel", "point", "-c", "1"]).status.code(), Some(3));
    assert_eq!(rra(&["hom-ext", "arc", "point", "--map", "0:0,1:0"]).status.code(), Some(3));
    // cap exceeded
    assert_eq!(rra(&["solve-seurat", "cycle:5", "cycle:5", "-c", "9"]).status.code(), Some(2));
    // budget exhausted
    assert_eq!(
        rra(&["rep-game", "point", "point", "-r", "3", "--budget", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn rainbow_dump_round_trips_through_check_ra() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k1.json");
    let p = path.to_str().unwrap();
    assert!(rra(&["build-rainbow", "point", "point", "-o", p]).status.success());
    let o = rra(&["check-ra", p]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("all axioms hold"));
    let o = rra(&["check-ra", "arc+point"]);
    assert!(stdout(&o).contains("failures"));
}

#[test]
fn pebble_commands() {
    let o = rra(&["pebble", "solve", "arc+point", "edges:2:1-0+point", "-c", "2", "-n", "1"]);
    assert!(stdout(&o).contains("winner: Exists"));
    let o = rra(&["pebble", "transfer", "loop", "loop", "-c", "1", "-r", "2", "--lemma-depth", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("induced map failures: 0"));
    let o = rra(&["pebble", "formulas", "point+point", "point+point", "-c", "1", "-n", "1", "--samples", "20"]);
    assert!(stdout(&o).contains("agreed: 20/20"));
}

#[test]
fn hom_extension() {
    let o = rra(&["hom-ext", "cycle:4", "complete:2", "--map", "0:0"]);
    assert!(stdout(&o).contains("extension: [0, 1, 0, 1]"));
}

#[test]
fn check_conditions_on_the_arc() {
    let o = rra(&["check-conditions", "arc", "point"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("rainbow condition (G,H): false"));
    assert!(text.contains("Forall wins"));
}

#[test]
fn hunt_uses_the_cache_directory_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let first = rra(&["--cache", cache, "hunt", "--n-max", "2", "-c", "1"]);
    assert!(first.status.success());
    assert!(stdout(&first).contains("findings: 0"));
    let log = dir.path().join("hunt-n2-c1-modified.jsonl");
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 66);
    let second = rra(&["--cache", cache, "hunt", "--n-max", "2", "-c", "1"]);
    assert!(stdout(&second).contains("resumed from log: 66"));
}
