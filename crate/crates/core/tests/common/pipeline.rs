use std::path::Path;
use std::process::{Command, Output};

pub fn geoa3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoa3"))
        .args(args)
        .output()
        .unwrap()
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout {}\nstderr {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// gen-data, train, attack and eval under `root`; returns the bytes of every result file.
pub fn pipeline(root: &Path) -> Vec<Vec<u8>> {
    let data = root.join("data");
    let model = root.join("model.bin");
    let run = root.join("run");
    let report = root.join("report.json");
    ok(&geoa3(&[
        "gen-data",
        "--out",
        s(&data),
        "--classes",
        "sphere,box,cone",
        "--train-per-class",
        "8",
        "--test-per-class",
        "3",
        "--points",
        "64",
        "--seed",
        "5",
    ]));
    ok(&geoa3(&[
        "train",
        "--data",
        s(&data),
        "--out",
        s(&model),
        "--epochs",
        "6",
        "--lr",
        "0.003",
        "--report",
        s(&root.join("train.json")),
    ]));
    ok(&geoa3(&[
        "attack",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--count",
        "2",
        "--binary-steps",
        "2",
        "--iters",
        "15",
        "--k",
        "4",
        "--seed",
        "3",
        "--out",
        s(&run),
    ]));
    ok(&geoa3(&[
        "eval",
        "--model",
        s(&model),
        "--results",
        s(&run.join("results.json")),
        "--out",
        s(&report),
    ]));
    let results: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["schema_version"], 1);
    assert_eq!(results["config"]["k"], 4);
    assert_eq!(results["config"]["weights"]["lambda1"], 0.1);
    for entry in results["instances"].as_array().unwrap() {
        let file = entry["file"].as_str().unwrap();
        assert!(run.join(file).exists());
    }
    [
        data.join("manifest.json"),
        model,
        root.join("train.json"),
        run.join("results.json"),
        report,
    ]
    .iter()
    .map(|p| std::fs::read(p).unwrap())
    .collect()
}
