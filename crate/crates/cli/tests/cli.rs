use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn cubespec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubespec"))
        .args(args)
        .env_remove("CUBESPEC_WORKERS")
        .output()
        .expect("spawn cubespec")
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cubespec"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn cubespec");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&cubespec(&all))).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<(String, String)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            header
                .iter()
                .cloned()
                .zip(rec.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

#[test]
fn census_json_payload() {
    let v = json(&["census", "--dim", "3"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "census");
    let r = &v["records"][0];
    assert_eq!(r["singular"], 338);
    assert_eq!(r["total"], 512);
    assert_eq!(r["probability_numerator"], 169);
    assert_eq!(r["probability_denominator"], 256);
    assert_eq!(r["class_R"], 174);
}

#[test]
fn lo_bound_value() {
    let out = stdout(&cubespec(&["lo-bound", "--n", "4", "--t", "2"]));
    assert_eq!(out, "n,t,bound\n4,2,8\n");
    let v = json(&["lo-bound", "--verify", "1,1,0,0"]);
    assert_eq!(v["records"][0]["multiplicity"], 8);
    assert_eq!(v["records"][0]["within_bound"], true);
}

#[test]
fn table_first_rows_match_printed_values() {
    let out = stdout(&cubespec(&[
        "table", "--from", "1", "--to", "5", "--format", "csv",
    ]));
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("d,matrices,singular,p,d2_over_2d,ratio,ci_low,ci_high,mode"));
    let rows = csv_rows(&out);
    let expected = [
        ("1", "2", "1", "0.5000000", "0.500000", "1.000"),
        ("2", "16", "10", "0.6250000", "1.000000", "0.625"),
        ("3", "512", "338", "0.6601562", "1.125000", "0.587"),
        ("4", "65536", "42976", "0.6557617", "1.000000", "0.656"),
        (
            "5",
            "33554432",
            "21040112",
            "0.6270442",
            "0.781250",
            "0.803",
        ),
    ];
    assert_eq!(rows.len(), 5);
    for (row, want) in rows.iter().zip(expected) {
        let got: Vec<&str> = row[..6].iter().map(|(_, v)| v.as_str()).collect();
        assert_eq!(got, [want.0, want.1, want.2, want.3, want.4, want.5]);
        assert_eq!(row[8].1, "exact");
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let cases: &[&[&str]] = &[
        &["census", "--dim", "3"],
        &["exact-e", "--dim", "4"],
        &[
            "sample-ps",
            "--dim",
            "7",
            "--samples",
            "20000",
            "--seed",
            "3",
        ],
        &["table", "--from", "1", "--to", "7", "--samples", "20000"],
        &["theorem1", "--dim", "3", "--exact"],
        &["lemma-sum", "--dim", "100"],
    ];
    for args in cases {
        let csv_text = stdout(&cubespec(args));
        let v = json(args);
        let records = v["records"].as_array().unwrap();
        let rows = csv_rows(&csv_text);
        assert_eq!(rows.len(), records.len(), "{args:?}");
        for (row, rec) in rows.iter().zip(records) {
            let obj = rec.as_object().unwrap();
            assert_eq!(row.len(), obj.len());
            for ((k, text), (jk, jv)) in row.iter().zip(obj) {
                assert_eq!(k, jk);
                match jv {
                    Value::Null => assert_eq!(text, ""),
                    Value::Bool(b) => assert_eq!(text, &b.to_string()),
                    Value::String(s) => assert_eq!(text, s),
                    Value::Number(n) => {
                        let a: f64 = text.parse().unwrap();
                        assert_eq!(a, n.as_f64().unwrap(), "{args:?} {k}");
                    }
                    other => panic!("unexpected {other}"),
                }
            }
        }
    }
}

#[test]
fn ledger_lines_reproduce_payloads() {
    let dir = std::env::temp_dir().join(format!("cubespec-ledger-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ledger = dir.join("runs.jsonl");
    let _ = std::fs::remove_file(&ledger);
    let path = ledger.to_str().unwrap();
    let runs: &[&[&str]] = &[
        &["census", "--dim", "3"],
        &[
            "sample-ps",
            "--dim",
            "9",
            "--samples",
            "30000",
            "--seed",
            "11",
        ],
        &["sample-e", "--dim", "5", "--samples", "5000", "--seed", "2"],
        &["lo-bound", "--n", "6", "--t", "3"],
    ];
    for args in runs {
        let mut all = vec!["--ledger", path, "--workers", "2"];
        all.extend_from_slice(args);
        stdout(&cubespec(&all));
    }
    let text = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), runs.len());
    for line in &lines {
        assert_eq!(line["schema_version"], 1);
        assert!(line["wall_time"].as_f64().unwrap() >= 0.0);
        assert!(line["timestamp"].as_str().unwrap().ends_with('Z'));
        // rerun from the recorded argv with a different worker count
        let mut argv: Vec<String> = line["parameters"]["argv"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a.as_str().unwrap().to_string())
            .filter(|a| a != "--ledger" && a != path)
            .collect();
        let w = argv.iter().position(|a| a == "--workers").unwrap();
        argv[w + 1] = "3".into();
        argv.splice(0..0, ["--format".to_string(), "json".to_string()]);
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        let again: Value = serde_json::from_str(&stdout(&cubespec(&refs))).unwrap();
        assert_eq!(again, line["result"], "{argv:?}");
        assert_eq!(line["command"], line["result"]["command"]);
    }
    assert_eq!(lines[1]["parameters"]["seed"], 11);
    assert_eq!(lines[1]["parameters"]["samples"], 30000);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let o = cubespec(&["census"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(cubespec(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cubespec(&["census", "--dim", "9"]).status.code(), Some(1));
    let o = cubespec(&["--format", "json", "census", "--dim", "9"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "DimensionTooLarge");
    assert!(v["error"]["message"].as_str().unwrap().contains('9'));
    assert_eq!(
        cubespec(&["table", "--from", "1", "--to", "31"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn classify_and_span_count_read_input() {
    let o = with_stdin(&["--format", "json", "classify"], "101\n011\n110\n");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"][0]["label"], "R");
    let o = with_stdin(&["--format", "json", "classify"], "100\n100\n011\n");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"][0]["rank"], 2);
    assert_ne!(v["records"][0]["label"], "R");

    let v = json(&["span-count", "--normal", "1,-1,0"]);
    assert_eq!(v["records"][0]["point_count"], 4);
    // generators e1, e2 in dimension 3 span the plane x3 = 0
    let o = with_stdin(&["--format", "json", "span-count"], "100\n010\n");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"][0]["point_count"], 4);
    assert_eq!(v["records"][0]["support"], 1);
}

#[test]
fn output_flag_and_worker_env() {
    let dir = std::env::temp_dir().join(format!("cubespec-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("e.csv");
    let o = cubespec(&["exact-e", "--dim", "3", "--output", file.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    assert_eq!(
        text,
        "d,g_count,point_sum,e,e_numerator,e_denominator\n3,21,81,3.8571429,27,7\n"
    );
    std::fs::remove_dir_all(&dir).unwrap();

    let run = |workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_cubespec"))
            .args([
                "sample-ps",
                "--dim",
                "10",
                "--samples",
                "50000",
                "--seed",
                "4",
            ])
            .env("CUBESPEC_WORKERS", workers)
            .output()
            .unwrap();
        stdout(&o)
    };
    assert_eq!(run("1"), run("4"));
}
