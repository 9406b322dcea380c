use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn delaymin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaymin"))
        .args(args)
        .arg("-q")
        .env_remove("DELAYMIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn ring_file(dir: &Path) -> String {
    let p = write(dir, "ring.edges", "x1 x2\nx2 x3\nx3 x4\nx4 x5\nx5 x6\nx6 x1\n");
    p.to_str().unwrap().to_owned()
}

#[test]
fn gr_on_ring_reaches_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let ring = ring_file(dir.path());
    let o = delaymin(&["solve", "--edges", &ring, "--algo", "gr", "--budget", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let last: serde_json::Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(last["total_rs"], 22.0);

    let brute = delaymin(&["solve", "--edges", &ring, "--algo", "brute", "--budget", "2", "--json"]);
    let best: serde_json::Value = serde_json::from_str(stdout(&brute).lines().last().unwrap()).unwrap();
    assert_eq!(best["total_rs"], last["total_rs"]);
}

#[test]
fn pcs_rejects_general_delays() {
    let o = delaymin(&["solve", "--ring", "6", "--delay-scheme", "int:2,9", "--algo", "pcs", "-k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("uniform"), "{}", stderr(&o));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("ba.edges");
    let gen = delaymin(&["gen", "-n", "300", "-m", "3", "--seed", "5", "--out-edges", edges.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));
    let args = [
        "solve",
        "--edges",
        edges.to_str().unwrap(),
        "--delay-scheme",
        "int:1,9",
        "--algo",
        "gs",
        "-k",
        "3",
        "--samples-c",
        "10",
        "--epsilon",
        "0.1",
        "--seed",
        "42",
    ];
    let a = delaymin(&args);
    let b = delaymin(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_and_text_report_the_same_numbers() {
    let base = ["solve", "--ring", "7", "--algo", "itpathcen", "-k", "2"];
    let text = stdout(&delaymin(&base));
    let json = stdout(&delaymin(&[&base[..], &["--json"]].concat()));
    let step: serde_json::Value = serde_json::from_str(json.lines().next().unwrap()).unwrap();
    let row: Vec<&str> = text.lines().nth(2).unwrap().split('\t').collect();
    assert_eq!(row[1], step["node"].to_string());
    assert_eq!(row[3].parse::<f64>().unwrap(), step["rs"].as_f64().unwrap());
    assert_eq!(row[5].parse::<f64>().unwrap(), step["rr"].as_f64().unwrap());
}

#[test]
fn sample_sizes() {
    let p = |args: &[&str]| -> serde_json::Value {
        let o = delaymin(&[&["samplesize", "--json"], args].concat());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        serde_json::from_str(&stdout(&o)).unwrap()
    };
    assert_eq!(p(&["--model", "uniform", "-n", "100", "--epsilon", "0.1"])["p"], 3041);
    let general = p(&["--model", "general", "-n", "6", "--epsilon", "0.5", "--diameter", "3", "--l-min", "1"]);
    assert_eq!(general["p"], 487);
    assert_eq!(p(&["--model", "uniform", "-n", "2000", "-c", "10"])["practical_p"], 77);

    let missing = delaymin(&["samplesize", "--model", "general", "-n", "6"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn bench_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "graph = { kind = \"ring\", n = 6 }\nbudgets = [1, 2]\n\
         [[algorithms]]\nname = \"gr\"\n\
         [[algorithms]]\nname = \"gs\"\nlabel = \"gs-exhaustive\"\nsampling = { exhaustive = true }\n",
    );
    let out = dir.path().join("rows.csv");
    let o = delaymin(&["bench", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = fs::read_to_string(&out).unwrap();
    let rr: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(rr.len(), 4);
    assert_eq!(rr[0], rr[2]);
    assert_eq!(rr[1], rr[3]);
    assert!(stdout(&o).starts_with("algorithm\tk\tmean_rr"));
}

#[test]
fn malformed_spec_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    for body in ["graph = 3\n", "graph = { kind = \"ring\", n = 6 }\nbudgets = [1]\n[[algorithms]]\nname = \"magic\"\n"]
    {
        let spec = write(dir.path(), "bad.toml", body);
        let o = delaymin(&["bench", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
        assert!(!out.exists());
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn validate_reports_invariant_violations() {
    let dir = tempfile::tempdir().unwrap();
    let ring = ring_file(dir.path());
    assert_eq!(delaymin(&["validate", "--edges", &ring]).status.code(), Some(0));
    let split = write(dir.path(), "split.edges", "a b\nc d\n");
    assert_eq!(delaymin(&["validate", "--edges", split.to_str().unwrap()]).status.code(), Some(2));
    let zero = write(dir.path(), "zero.delays", "x1 0\n");
    let o = delaymin(&["validate", "--edges", &ring, "--delays", zero.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let garbage = write(dir.path(), "garbage.edges", "a b c\n");
    let o = delaymin(&["validate", "--edges", garbage.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("garbage.edges:1:"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(delaymin(&["solve", "--algo", "gr", "-k", "1"]).status.code(), Some(1));
    assert_eq!(delaymin(&["solve", "--ring", "6", "--algo", "nope", "-k", "1"]).status.code(), Some(1));
    assert_eq!(delaymin(&["solve", "--ring", "6", "--algo", "gr", "-k", "6"]).status.code(), Some(1));
    assert_eq!(delaymin(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn thread_count_from_environment() {
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_delaymin"))
            .args(["solve", "--ring", "8", "--algo", "gs", "-k", "2", "--seed", "3", "-q"])
            .env("DELAYMIN_THREADS", value)
            .output()
            .unwrap()
    };
    let two = run("2");
    assert_eq!(two.status.code(), Some(0));
    assert_eq!(two.stdout, run("1").stdout);
    assert_eq!(run("zero").status.code(), Some(1));
}

#[test]
fn random_seed_is_accepted_and_logged() {
    let o = Command::new(env!("CARGO_BIN_EXE_delaymin"))
        .args(["solve", "--ring", "8", "--algo", "random", "-k", "2", "--seed", "random"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("\"seed\":"), "{}", stderr(&o));
}

#[test]
fn ledger_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ledger.json");
    let o = delaymin(&["solve", "--ring", "6", "--algo", "degree", "-k", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let ledger: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(ledger["steps"].as_array().unwrap().len(), 2);
    assert_eq!(ledger["initial_spd"], 54.0);
}
