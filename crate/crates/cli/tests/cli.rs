//! End-to-end runs of the `pralab` binary.

use std::process::{Command, Output};

use pralab::subgroup::is_redundant;
use pralab::{GenTuple, GroupKind, GroupTable, NielsenMove};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn pralab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pralab"))
        .args(args)
        .env_remove("PRALAB_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Replays a JSON trace with the library and returns the endpoint.
fn replay(g: &GroupTable, trace: &Value) -> GenTuple {
    let mut t = GenTuple::parse(g, trace["input"].as_str().unwrap()).unwrap();
    for stage in trace["stages"].as_array().unwrap() {
        for m in stage["moves"].as_array().unwrap() {
            let m: NielsenMove = m.as_str().unwrap().parse().unwrap();
            t.apply(g, m).unwrap();
        }
    }
    t
}

#[test]
fn extended_components_of_a5_triples() {
    let out = pralab(&["components", "--group", "psl", "--q", "5", "--k", "3", "--extended"]);
    assert!(out.status.success());
    let v = &json_lines(&out)[0];
    assert_eq!(v["component-count"], 1);
    assert_eq!(v["extended"], true);
    assert_eq!(v["vertex-count"], 200160);
}

#[test]
fn census_of_pgl25_counts_every_element() {
    let out = pralab(&["classify", "--group", "pgl", "--q", "5", "--census"]);
    assert!(out.status.success());
    let v = &json_lines(&out)[0];
    let total: u64 = v["types"].as_object().unwrap().values().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, 120);
    let by_order: u64 = v["orders"].as_object().unwrap().values().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(by_order, 120);
}

#[test]
fn random_connect_ends_redundant() {
    let out = pralab(&["connect", "--group", "psl", "--q", "9", "--k", "4", "--random", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = &json_lines(&out)[0];
    let g = GroupTable::build(GroupKind::Psl, 3, 2).unwrap();
    let end = replay(&g, trace);
    assert_eq!(end.format(&g), trace["endpoint"].as_str().unwrap());
    assert!(is_redundant(&g, end.entries()));
}

#[test]
fn irredundant_tuples_are_connected() {
    let g = GroupTable::build(GroupKind::Psl, 3, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tried = 0;
    let mut nontrivial = 0;
    while nontrivial < 3 {
        tried += 1;
        assert!(tried < 100_000, "no irredundant tuples found");
        let t = GenTuple::random_generating(&g, 4, &mut rng).unwrap();
        if is_redundant(&g, t.entries()) {
            continue;
        }
        nontrivial += 1;
        let text = t.format(&g);
        let out = pralab(&["connect", "--q", "9", "--tuple", &text]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let trace = &json_lines(&out)[0];
        let end = replay(&g, trace);
        assert!(is_redundant(&g, end.entries()));
        let w = trace["redundant-witness-index"].as_u64().unwrap() as usize;
        let mut rest = end.entries().to_vec();
        rest.remove(w - 1);
        assert!(pralab::subgroup::generates(&g, &rest));
    }
}

#[test]
fn deterministic_output_is_reproducible() {
    let runs = [
        vec!["components", "--q", "5", "--k", "2", "--deterministic"],
        vec!["walk", "--q", "7", "--seed", "11", "--samples", "50", "--deterministic"],
        vec!["verify", "--only", "4", "--deterministic"],
    ];
    for args in runs {
        let a = pralab(&args);
        let b = pralab(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!String::from_utf8_lossy(&a.stdout).contains("timestamp"));
    }
}

#[test]
fn timestamps_without_deterministic() {
    let out = pralab(&["components", "--q", "5", "--k", "2"]);
    assert!(json_lines(&out)[0]["timestamp"].is_u64());
}

#[test]
fn exit_codes() {
    assert_eq!(pralab(&["subgroup", "--q", "5", "--tuple", "1,2,3"]).status.code(), Some(2));
    assert_eq!(pralab(&["connect", "--q", "5", "--tuple", "9,9,9,9"]).status.code(), Some(2));
    assert_eq!(pralab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pralab(&["components", "--k", "3"]).status.code(), Some(2));
    assert_eq!(pralab(&["connect", "--q", "5"]).status.code(), Some(2));
    assert_eq!(
        pralab(&["components", "--q", "7", "--k", "3", "--state-budget", "1000"]).status.code(),
        Some(2)
    );
    assert_eq!(pralab(&["verify", "--only", "8"]).status.code(), Some(0));
    assert_eq!(pralab(&["verify", "--only", "11"]).status.code(), Some(1));
}

#[test]
fn csv_outputs_parse() {
    let out = pralab(&["classify", "--group", "pgl", "--q", "7", "--format", "csv"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["code", "matrix", "order", "type", "fixed-points"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 336);
    for row in &rows {
        let fixed: usize = row[4].parse().unwrap();
        assert!(fixed <= 2 || row[3] == *"identity");
    }

    let out = pralab(&["components", "--q", "5", "--k", "2", "--format", "csv"]);
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    let total: u64 = r
        .records()
        .map(|row| {
            let row = row.unwrap();
            row[0].parse::<u64>().unwrap() * row[1].parse::<u64>().unwrap()
        })
        .sum();
    assert_eq!(total, 2280);

    let out = pralab(&["spread", "--q", "5", "--m", "2", "--mode", "exact", "--format", "csv"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    let row = r.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "PSL(2,5)");
    assert_eq!(&row[4], "holds");
}

#[test]
fn show_config_round_trips() {
    let out = pralab(&["--show-config", "walk", "--q", "7"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["k"], 4);
    assert_eq!(v["q"], 7);
}
