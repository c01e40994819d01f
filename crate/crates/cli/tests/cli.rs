use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn synthweaver(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthweaver"))
        .args(args)
        .env("SYNTHWEAVER_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn ok(cache: &Path, args: &[&str]) -> Output {
    let out = synthweaver(cache, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(str::to_string).collect()
}

#[test]
fn gen_dataset_is_deterministic_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b/b.csv");
    ok(&cache, &["gen-dataset", "--n", "12", "--seed", "4", "--workers", "1", "--out", s(&a)]);
    ok(&cache, &["gen-dataset", "--n", "12", "--seed", "4", "--workers", "2", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(data_lines(&a).len(), 12);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "gen-dataset");
    assert_eq!(manifest["seed"], 4);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    assert_eq!(outputs[0]["sha256"].as_str().unwrap().len(), 64);
    assert!(cache.exists());

    let c = dir.path().join("c.csv");
    ok(&cache, &["gen-dataset", "--n", "12", "--seed", "5", "--out", s(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn label_keeps_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let input = dir.path().join("in.smi");
    fs::write(&input, "# header\nCC(=O)Nc1ccc(O)cc1 paracetamol\n\nc1ccccc1\n").unwrap();
    let out = dir.path().join("labels.csv");
    ok(&cache, &["label", "--input", s(&input), "--out", s(&out)]);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 2);
    let paracetamol = synthweaver::molgraph::parse_smiles("CC(=O)Nc1ccc(O)cc1").unwrap();
    assert!(rows[0].starts_with(&format!("{},", paracetamol.canonical_smiles())), "{rows:?}");
    assert!(rows[1].starts_with("c1ccccc1,"), "{rows:?}");

    fs::write(&input, "C1CC\n").unwrap();
    let bad = dir.path().join("bad.csv");
    let res = synthweaver(&cache, &["label", "--input", s(&input), "--out", s(&bad)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 1"));
    assert!(!bad.exists());
}

#[test]
fn screen_skips_unparsable_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let lib = dir.path().join("lib.smi");
    fs::write(&lib, "CCO\nnot_a_smiles\nCC(=O)Nc1ccc(O)cc1\n").unwrap();
    let out = dir.path().join("screen");
    let res = ok(&cache, &["screen", "--library", s(&lib), "--out", s(&out), "--synth-backend", "sa"]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("1 library lines"));
    let top = data_lines(&out.join("topk.csv"));
    assert_eq!(top.len(), 2);
    assert!(top[0].starts_with("1,"));
    for f in ["best_curve.csv", "best_curve.svg", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

fn search_args<'a>(out: &'a Path, policy: &'a str, workers: &'a str) -> Vec<&'a str> {
    vec![
        "search",
        "--out",
        s(out),
        "--synth-backend",
        "sa",
        "--policy",
        policy,
        "--trajectories",
        "4",
        "--steps",
        "4",
        "--n-init",
        "3",
        "--max-actions",
        "40",
        "--top-k",
        "5",
        "--seed",
        "11",
        "--workers",
        workers,
    ]
}

#[test]
fn search_outputs_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let one = dir.path().join("w1");
    let three = dir.path().join("w3");
    ok(&cache, &search_args(&one, "softmax", "1"));
    ok(&cache, &search_args(&three, "softmax", "3"));
    for f in ["trajectories.csv", "topk.csv", "best_curve.csv"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(three.join(f)).unwrap(), "{f}");
    }
    // 4 trajectories of 5 recorded states each.
    assert_eq!(data_lines(&one.join("trajectories.csv")).len(), 20);
    assert_eq!(data_lines(&one.join("topk.csv")).len(), 5);
}

#[test]
fn report_compares_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let soft = dir.path().join("soft");
    let rand = dir.path().join("rand");
    let scr = dir.path().join("scr");
    ok(&cache, &search_args(&soft, "softmax", "1"));
    ok(&cache, &search_args(&rand, "random", "1"));
    let lib = dir.path().join("lib.smi");
    fs::write(&lib, "CCO\nCC(=O)Nc1ccc(O)cc1\nc1ccncc1\n").unwrap();
    ok(&cache, &["screen", "--library", s(&lib), "--out", s(&scr), "--synth-backend", "sa", "--relabel"]);

    let out = dir.path().join("report");
    ok(&cache, &["report", "--runs", s(&soft), s(&rand), s(&scr), "--out", s(&out)]);
    let rows = data_lines(&out.join("comparison.csv"));
    assert_eq!(rows.len(), 6, "{rows:?}");
    for (row, name) in rows.iter().step_by(2).zip(["softmax/sa", "random/sa", "screen/sa"]) {
        assert!(row.starts_with(&format!("{name},top-1,1,")), "{row}");
    }
    // The relabeled screen run carries oracle costs and an unsolved fraction.
    assert!(!rows[4].ends_with(",,"), "{}", rows[4]);
    assert!(fs::read_to_string(out.join("best_curves.svg")).unwrap().contains("<svg"));
}

#[test]
fn failed_report_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let good = dir.path().join("good");
    ok(&cache, &search_args(&good, "softmax", "1"));
    let broken: PathBuf = dir.path().join("broken");
    fs::create_dir_all(&broken).unwrap();
    fs::copy(good.join("manifest.json"), broken.join("manifest.json")).unwrap();

    let out = dir.path().join("report");
    let res = synthweaver(&cache, &["report", "--runs", s(&good), s(&broken), "--out", s(&out)]);
    assert!(!res.status.success());
    assert!(!out.join("comparison.csv").exists());
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn train_writes_checkpoint_and_fidelity_table() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let data = dir.path().join("data.csv");
    ok(&cache, &["gen-dataset", "--n", "30", "--out", s(&data)]);
    let out = dir.path().join("model");
    let args = ["train", "--dataset", s(&data), "--out", s(&out), "--k", "2", "--epochs", "2", "--hidden", "8", "--depth", "2"];
    ok(&cache, &args);
    for f in ["model.json", "fidelity.csv", "manifest.json", "scatter.csv", "scatter.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let first = fs::read(out.join("model.json")).unwrap();
    ok(&cache, &[&args[..], &["--workers", "2"]].concat());
    assert_eq!(fs::read(out.join("model.json")).unwrap(), first);

    let searched = dir.path().join("search");
    ok(
        &cache,
        &[
            "search",
            "--out",
            s(&searched),
            "--checkpoint",
            s(&out.join("model.json")),
            "--trajectories",
            "2",
            "--steps",
            "2",
            "--max-actions",
            "10",
        ],
    );
    assert_eq!(data_lines(&searched.join("trajectories.csv")).len(), 6);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.csv");
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 4\n[dataset]\nn = 12\n").unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&cache, &["--config", s(&cfg), "gen-dataset", "--out", s(&a)]);
    ok(&cache, &["gen-dataset", "--n", "12", "--seed", "4", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    fs::write(&cfg, "sede = 4\n").unwrap();
    assert!(!synthweaver(&cache, &["--config", s(&cfg), "gen-dataset", "--out", s(&a)]).status.success());
}
