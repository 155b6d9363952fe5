use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qgame::cli::exit;

fn qgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgame")).args(args).output().expect("spawn qgame")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const REFERENCE: &str = include_str!("../tables/reference.txt");

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn validate_reference_table() {
    let out = qgame(&["validate-table"]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "t.txt", REFERENCE);
    let out = qgame(&["validate-table", "--table", &path]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
}

#[test]
fn missing_outcome_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let seven: String = REFERENCE.lines().filter(|l| !l.starts_with("101")).map(|l| format!("{l}\n")).collect();
    let path = write(dir.path(), "t.txt", &seven);
    let out = qgame(&["validate-table", "--table", &path]);
    assert_eq!(code(&out), exit::TABLE_FORMAT);
    assert!(stderr(&out).contains("101"), "{}", stderr(&out));
}

#[test]
fn garbage_line_reports_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "t.txt", "000 0 0 0\n001 3 three 7\n");
    let out = qgame(&["validate-table", "--table", &path]);
    assert_eq!(code(&out), exit::TABLE_FORMAT);
    assert!(stderr(&out).contains('2'), "{}", stderr(&out));
}

#[test]
fn constraint_violation_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let flat: String = ["000", "001", "010", "100", "011", "101", "110", "111"]
        .iter()
        .map(|o| format!("{o} 1 1 1\n"))
        .collect();
    let path = write(dir.path(), "flat.txt", &flat);
    let out = qgame(&["validate-table", "--table", &path]);
    assert_eq!(code(&out), exit::TABLE_CONSTRAINT);
    let run = ["run", "--variant", "classical", "--source", "0", "--m", "3", "--steps", "100", "--seed", "1", "--table"];
    let mut args = run.to_vec();
    args.push(&path);
    assert_eq!(code(&qgame(&args)), exit::TABLE_CONSTRAINT);
    args.push("--allow-invalid-table");
    let out = qgame(&args);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    assert!(stderr(&out).contains("warning"));
    assert!(stdout(&out).contains("mean total payout per round: 3"));
}

#[test]
fn config_errors_exit_with_config_code() {
    assert_eq!(code(&qgame(&["run", "--variant", "quantum", "--source", "0", "--m", "3"])), exit::CONFIG);
    assert_eq!(
        code(&qgame(&["run", "--variant", "sideways", "--source", "0", "--m", "3", "--seed", "1"])),
        exit::CONFIG
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "variant='quantum'\nsource='0'\nm=3\nseed=1\ncolour='red'\n");
    assert_eq!(code(&qgame(&["run", "--config", &cfg])), exit::CONFIG);
}

#[test]
fn sweep_from_config_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "table.txt", REFERENCE);
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "variant = ['classical', 'quantum']\nsource = '0,1'\nm_range = '2..=4'\nsteps = 2000\nseed = 7\ntable_path = 'table.txt'\n\
         [outputs]\nsummary = 'OUT'\n"
            .replace("OUT", dir.path().join("summary.csv").to_str().unwrap())
            .as_str(),
    );
    let out = qgame(&["sweep", "--config", &cfg, "--jobs", "2"]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("m,variant,source,seed,steps,mean_total_payout,mean_lifetime,mutation_count")
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("7")));
    assert!(!text.contains('\r'));

    // Worker count does not change the results.
    let again = dir.path().join("again.csv");
    let out = qgame(&["sweep", "--config", &cfg, "--jobs", "1", "--summary", again.to_str().unwrap()]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    assert_eq!(fs::read(&again).unwrap(), text.as_bytes());
}

#[test]
fn run_writes_trace_and_transitions() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let transitions = dir.path().join("transitions.csv");
    let out = qgame(&[
        "run", "--variant", "quantum", "--source", "0", "--m", "5", "--steps", "1000", "--seed", "3",
        "--trace", trace.to_str().unwrap(),
        "--transitions", transitions.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    let trace = fs::read_to_string(trace).unwrap();
    assert_eq!(trace.lines().next(), Some("t,profile,outcome,pay1,pay2,pay3,mut1,mut2,mut3"));
    assert_eq!(trace.lines().count(), 1001);
    let transitions = fs::read_to_string(transitions).unwrap();
    assert_eq!(transitions.lines().next(), Some("from,to,count,probability"));
}

#[test]
fn transitions_lists_attractors() {
    let out = qgame(&[
        "transitions", "--variant", "quantum", "--source", "0", "--m", "20", "--steps", "200000", "--seed", "2",
    ]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("attractors (edges with p >= 0.05):"), "{text}");
    assert!(text.contains("fixed"), "{text}");
}

#[test]
fn static_table_and_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("static.csv");
    let out = qgame(&["static-table", "--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    let text = fs::read_to_string(csv_path).unwrap();
    assert!(text.starts_with("variant,class,representative,multiplicity,"));
    assert_eq!(text.lines().count(), 1 + 20);

    let out = qgame(&["equilibria", "--variant", "quantum", "--source", "0"]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", stderr(&out));
    assert!(stdout(&out).contains("(0,1,1/2)"), "{}", stdout(&out));
}
