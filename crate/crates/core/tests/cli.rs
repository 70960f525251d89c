mod common;

use common::{cli, MATRIX};
use serde_json::Value;

#[test]
fn matrix_is_byte_identical_across_runs() {
    for args in MATRIX {
        let a = cli(args);
        let b = cli(args);
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        serde_json::from_str::<Value>(&a.stdout).unwrap();
    }
}

#[test]
fn euclidean_distance_example() {
    let o = cli(&[
        "distance",
        "--metric",
        "euclidean",
        "--dim",
        "2",
        "--from",
        "0,0",
        "--to",
        "3,4",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let d = v["results"][0]["value"].as_f64().unwrap();
    assert!((d - 5.0).abs() < 1e-3);
}

#[test]
fn indefinite_check_exits_zero() {
    let o = cli(&[
        "check",
        "--metric",
        "minkowski",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, 0);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["definiteness"]["classification"], "indefinite");
}

#[test]
fn asymmetric_metric_file_exits_one() {
    let dir = std::env::temp_dir().join(format!("metric-pair-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("asym.json");
    let field = serde_json::json!({
        "rank": [0, 2],
        "dim": 2,
        "components": [
            {"idx": [0, 0], "expr": "1"},
            {"idx": [1, 1], "expr": "1"},
            {"idx": [0, 1], "expr": "1"}
        ]
    });
    std::fs::write(&path, field.to_string()).unwrap();
    let o = cli(&[
        "check",
        "--metric-file",
        path.to_str().unwrap(),
        "--seed",
        "1",
        "--pairs",
        "0",
        "--triples",
        "0",
    ]);
    assert_eq!(o.code, 1, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("index symmetry: fail"));
}

#[test]
fn csv_and_json_share_numbers() {
    let base = [
        "distance", "--metric", "cubic2d", "--from", "0,0", "--to", "1,1", "--to", "0.5,0.2",
        "--seed", "4",
    ];
    let json = cli(&[&base[..], &["--format", "json"]].concat());
    let csv = cli(&[&base[..], &["--format", "csv"]].concat());
    let v: Value = serde_json::from_str(&json.stdout).unwrap();
    let rows: Vec<&str> = csv.stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for (row, res) in rows.iter().zip(v["results"].as_array().unwrap()) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[2], serde_json::to_string(&res["value"]).unwrap());
        assert_eq!(cells[3], res["converged"].to_string());
    }
}

#[test]
fn config_merges_under_flags() {
    let dir = std::env::temp_dir().join(format!("metric-pair-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"metric": "euclidean", "dim": 2, "seed": 9, "format": "json", "solver": {"restarts": 2}}"#).unwrap();
    let o = cli(&[
        "distance",
        "--from",
        "0,0",
        "--to",
        "1,0",
        "--config",
        cfg.to_str().unwrap(),
        "--restarts",
        "3",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["results"][0]["config"]["restarts"], 3);
    assert_eq!(v["results"][0]["config"]["seed"], 9);

    std::fs::write(&cfg, r#"{"metric": "euclidean", "colour": "red"}"#).unwrap();
    let o = cli(&[
        "eval",
        "--point",
        "0,0,0",
        "--disp",
        "1,0,0",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("colour"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_name_the_flag() {
    let o = cli(&[
        "eval", "--metric", "cubic2d", "--point", "0,zero", "--disp", "1,1",
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("--point"));
    let o = cli(&["eval", "--metric", "nosuch", "--point", "0", "--disp", "1"]);
    assert_eq!(o.code, 2);
    let o = cli(&["frobnicate"]);
    assert_eq!(o.code, 2);
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "catalog",
        "eval",
        "distance",
        "check",
        "hessian",
        "warp",
        "entropy",
        "projective",
    ] {
        let o = cli(&[sub, "--help"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("Usage"), "{sub}");
    }
}

#[test]
fn hessian_emits_tensor_json() {
    let o = cli(&[
        "hessian",
        "--potential",
        "(x^2+y^2)/2",
        "--axes",
        "x,y",
        "--format",
        "json",
    ]);
    let t: metric_pair::TensorField = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(t.rank(), (0, 2));
    let tab = t.table(&[0.3, 0.4]).unwrap();
    assert_eq!(tab.get(&[0, 0]).re(), 1.0);
    assert_eq!(tab.get(&[0, 1]).re(), 0.0);
}

#[test]
fn warp_builds_from_catalog_blocks() {
    let dir = std::env::temp_dir().join(format!("metric-pair-warp-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let base = dir.join("base.json");
    let o = cli(&[
        "hessian",
        "--potential",
        "-t^2/2",
        "--axes",
        "t:time",
        "--format",
        "json",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let o = cli(&[
        "warp",
        "--base",
        base.to_str().unwrap(),
        "--fiber",
        "euclidean",
        "--fiber-param",
        "dim=3",
        "--warp",
        "exp(t)",
        "--format",
        "json",
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let m: metric_pair::MetricSpec = serde_json::from_str(&o.stdout).unwrap();
    let flrw =
        metric_pair::catalog::build("flrw", &[("a".to_string(), "exp(t)".to_string())].into())
            .unwrap();
    let p = [0.4, 0.1, -0.3, 0.7];
    let (x, y) = (
        m.tensor().table(&p).unwrap(),
        flrw.tensor().table(&p).unwrap(),
    );
    for i in 0..4 {
        assert!((x.get(&[i, i]) - y.get(&[i, i])).norm() < 1e-14);
    }
}
