use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::{env, fs};

use serde_json::Value;
use topobelief::evidence::car_frame;
use topobelief::fusion::{belief_report, justification_frame, Allocator, BeliefReport, JustificationKind};
use topobelief::verify::random_frame;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn golden(name: &str) -> String {
    golden_dir().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topobelief"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = env::temp_dir().join(format!("topobelief-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Compares stdout with a golden file; `BLESS=1` rewrites the file instead.
fn assert_golden(args: &[&str], file: &str) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let path = golden_dir().join(file);
    if env::var_os("BLESS").is_some() {
        fs::write(&path, &out.stdout).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "{file}");
}

#[test]
fn outputs_match_golden_files() {
    let frame = golden("car.json");
    let f = frame.as_str();
    let props = "dp,do,dm;sp,dp";
    let sd_only = format!("custom:{}", golden("sd_only.json"));
    let cautious = format!("i,d,custom:{}", golden("cautious.json"));
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["demo"], "demo.txt"),
        (vec!["topology", "--frame", f], "topology.txt"),
        (vec!["topology", "--frame", f, "--output", "json"], "topology.json"),
        (vec!["mass", "--frame", f], "mass.txt"),
        (vec!["mass", "--frame", f, "--exact"], "mass_exact.txt"),
        (vec!["mass", "--frame", f, "--output", "json"], "mass.json"),
        (vec!["allocate", "--frame", f, "--alloc", "i,u,d"], "allocate.txt"),
        (
            vec!["allocate", "--frame", f, "--alloc", "i,u,d,yager", "--output", "json"],
            "allocate.json",
        ),
        (
            vec!["believe", "--frame", f, "--justification", "ds", "--props", props],
            "car_a.txt",
        ),
        (
            vec!["believe", "--frame", f, "--justification", "sd", "--props", props],
            "car_b.txt",
        ),
        (
            vec![
                "believe",
                "--frame",
                f,
                "--justification",
                "sd",
                "--props",
                props,
                "--exact",
            ],
            "car_b_exact.txt",
        ),
        (
            vec![
                "believe",
                "--frame",
                f,
                "--props",
                props,
                "--output",
                "json",
                "--precision",
                "4",
            ],
            "car_a.json",
        ),
        (
            vec![
                "believe",
                "--frame",
                f,
                "--justification",
                &sd_only,
                "--alloc",
                &cautious,
                "--props",
                props,
            ],
            "custom.txt",
        ),
        (vec!["verify", "--frame", f], "verify.txt"),
    ];
    for (args, file) in cases {
        assert_golden(&args, file);
    }
}

#[test]
fn output_is_byte_stable() {
    let f = golden("car.json");
    let args = [
        "believe",
        "--frame",
        &f,
        "--alloc",
        "i,u,d,yager",
        "--props",
        "dp;dm;sp,dp",
        "--exact",
    ];
    let first = run(&args).stdout;
    for _ in 0..3 {
        assert_eq!(run(&args).stdout, first);
    }
}

#[test]
fn demo_writes_the_fixture_and_both_reports() {
    let dir = scratch("demo");
    let out = run(&["demo", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(dir.join("car.json")).unwrap(),
        fs::read_to_string(golden("car.json")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(dir.join("car-a.txt")).unwrap(),
        fs::read_to_string(golden("car_a.txt")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(dir.join("car-b.txt")).unwrap(),
        fs::read_to_string(golden("car_b.txt")).unwrap()
    );
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn json_report_round_trips_exactly() {
    let out = run(&[
        "believe",
        "--frame",
        &golden("car.json"),
        "--justification",
        "sd",
        "--props",
        "dp,do,dm;sp,dp",
        "--output",
        "json",
    ]);
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    let f = car_frame();
    let parsed = BeliefReport::from_json(&value, f.universe()).unwrap();
    let props = [
        f.universe().set(["dp", "do", "dm"]).unwrap(),
        f.universe().set(["sp", "dp"]).unwrap(),
    ];
    let j = justification_frame(&f, JustificationKind::StrongDenseness).unwrap();
    let expected = belief_report(
        &f,
        &[Allocator::Intersection, Allocator::Union, Allocator::MinDense],
        &j,
        &props,
    )
    .unwrap();
    assert_eq!(parsed, expected);
    assert_eq!(value["rows"][0]["beliefs"]["u"]["num"], "99");
    assert_eq!(value["rows"][0]["beliefs"]["u"]["den"], "758");
}

#[test]
fn exit_codes() {
    let f = golden("car.json");
    let code = |args: &[&str]| run(args).status.code().unwrap();

    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["believe"]), 1);
    assert_eq!(code(&["believe", "--frame", &f, "--precision", "13"]), 1);
    assert_eq!(code(&["believe", "--frame", &f, "--alloc", "q"]), 1);
    assert_eq!(code(&["believe", "--frame", &f, "--justification", "xx"]), 1);
    assert_eq!(code(&["believe", "--frame", "/nonexistent/frame.json"]), 1);
    assert_eq!(code(&["--help"]), 0);

    let unknown = run(&["believe", "--frame", &f, "--props", "dp,zz"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(unknown.stdout.is_empty());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown state `zz`"));
    assert_eq!(code(&["believe", "--frame", &f, "--alloc", "i,i"]), 2);

    let dir = scratch("codes");
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let bad_certainty = write(
        "bad.json",
        r#"{"states":["a","b"],"evidence":[{"name":"E","states":["a"],"certainty":"1.0"}]}"#,
    );
    assert_eq!(code(&["mass", "--frame", &bad_certainty]), 2);
    let malformed = write("malformed.json", "{");
    assert_eq!(code(&["mass", "--frame", &malformed]), 2);
    let partial = write("partial.json", r#"{"map":[{"evidence":[],"image":["dp"]}]}"#);
    assert_eq!(
        code(&["believe", "--frame", &f, "--alloc", &format!("custom:{partial}")]),
        2
    );
    let not_open = write("j.json", r#"{"opens":[["so"],["sp","dp","do","so","dm","sm"]]}"#);
    assert_eq!(
        code(&[
            "believe",
            "--frame",
            &f,
            "--justification",
            &format!("custom:{not_open}")
        ]),
        2
    );

    let big = write("big.json", &random_frame(7, 8, 1).to_json());
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&big).unwrap()).unwrap();
    let item = doc["evidence"][0].clone();
    doc["evidence"] = Value::Array(
        (0..25)
            .map(|k| {
                let mut it = item.clone();
                it["name"] = Value::String(format!("E{k}"));
                it
            })
            .collect(),
    );
    let big = write("big.json", &doc.to_string());
    let capacity = run(&["believe", "--frame", &big]);
    assert_eq!(capacity.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&capacity.stderr).contains("24"));

    let failing = run(&["verify", "--frame", &f, "--alloc", "i,u,d,yager"]);
    assert_eq!(failing.status.code(), Some(4));
    let text = String::from_utf8(failing.stdout).unwrap();
    let witness = text.lines().find_map(|l| l.strip_prefix("witness: ")).unwrap();
    let witness: Value = serde_json::from_str(witness).unwrap();
    assert_eq!(witness["check"], "sandwich");
    let replay = write("replay.json", &witness["frame"].to_string());
    assert_eq!(code(&["verify", "--frame", &replay]), 0);
    assert_eq!(code(&["verify", "--frame", &replay, "--alloc", "yager"]), 4);
    fs::remove_dir_all(dir).unwrap();
}
