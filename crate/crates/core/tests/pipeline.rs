use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lexeff::config::AnalysisConfig;
use lexeff::fixture::{toy_config, toy_dir};
use lexeff::pipeline::{run_pipeline, validate};
use lexeff::Error;

const ARTIFACTS: [&str; 12] = [
    "costs.tsv",
    "cost_items.tsv",
    "frontier.tsv",
    "loss.tsv",
    "item_loss.tsv",
    "baselines.tsv",
    "taxonomy.tsv",
    "taxonomy_heads.tsv",
    "item_loss_heads.tsv",
    "comparisons.tsv",
    "manifest.json",
    "frontier.svg",
];

fn toy(out: &Path) -> AnalysisConfig {
    let mut config = AnalysisConfig::load(&toy_config()).unwrap();
    config.output = out.to_path_buf();
    config
}

/// Copies the toy fixture so individual files can be edited.
fn toy_copy(dir: &Path) -> PathBuf {
    for entry in fs::read_dir(toy_dir()).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            fs::copy(entry.path(), dir.join(entry.file_name())).unwrap();
        }
    }
    dir.join("toy.conf")
}

fn read_bundle(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn toy_bundle_has_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = toy(&tmp.path().join("out"));
    config.plot = true;
    let start = std::time::Instant::now();
    let run = run_pipeline(&config).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    for a in ARTIFACTS {
        assert!(run.dir.join(a).is_file(), "{a} missing");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(run.dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["parameters"]["seed"], 7);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 6);
    assert!(manifest["outputs"]["loss.tsv"].is_string());
    assert!(!tmp.path().join(".out.staging").exists());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut bundles = Vec::new();
    for (i, threads) in [Some(1), Some(1), Some(4), Some(8), None].into_iter().enumerate() {
        let mut config = toy(&tmp.path().join(format!("run{i}")));
        config.threads = threads;
        config.dump_replicates = true;
        bundles.push(read_bundle(&run_pipeline(&config).unwrap().dir));
    }
    for b in &bundles[1..] {
        assert_eq!(b, &bundles[0]);
    }
}

#[test]
fn input_hash_tracks_input_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = toy_copy(tmp.path());
    let manifest = |name: &str| -> serde_json::Value {
        let mut config = AnalysisConfig::load(&conf).unwrap();
        config.output = tmp.path().join(name);
        config.replicates = 50;
        let dir = run_pipeline(&config).unwrap().dir;
        serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
    };
    let hash_of = |m: &serde_json::Value, role: &str| {
        m["inputs"]
            .as_array()
            .unwrap()
            .iter()
            .find(|i| i["role"] == role)
            .unwrap()["sha256"]
            .clone()
    };
    let before = manifest("a");
    let path = tmp.path().join("antonyms.tsv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("# trailing comment\n");
    fs::write(&path, text).unwrap();
    let after = manifest("b");
    assert_ne!(hash_of(&before, "antonyms"), hash_of(&after, "antonyms"));
    assert_eq!(hash_of(&before, "lexicon"), hash_of(&after, "lexicon"));
}

#[test]
fn unknown_key_is_named() {
    let err = AnalysisConfig::parse("gamma = 10\nbetta = 2\n", PathBuf::from(".")).unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("betta"), "{err}");
}

#[test]
fn well_formed_fixture_has_no_diagnostics() {
    assert!(validate(&AnalysisConfig::load(&toy_config()).unwrap()).is_empty());
}

#[test]
fn cyclic_taxonomy_is_diagnosed() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = toy_copy(tmp.path());
    let tax = tmp.path().join("taxonomy.tsv");
    let mut text = fs::read_to_string(&tax).unwrap();
    text.push_str("entity\ttea.n\n");
    fs::write(&tax, text).unwrap();
    let diags = validate(&AnalysisConfig::load(&conf).unwrap());
    assert!(diags.iter().any(|d| d.contains("cycle") && d.contains("entity")), "{diags:?}");
}

#[test]
fn unresolvable_constituent_names_the_item() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = toy_copy(tmp.path());
    let enc = tmp.path().join("encoding.tsv");
    let text = fs::read_to_string(&enc).unwrap().replace("web cast\tweb|cast", "wob cast\twob|cast");
    fs::write(&enc, text).unwrap();
    let diags = validate(&AnalysisConfig::load(&conf).unwrap());
    assert!(diags.iter().any(|d| d.contains("webcast")), "{diags:?}");
}

#[test]
fn failed_run_leaves_no_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = toy_copy(tmp.path());
    // Fails after the staging directory has been created.
    fs::write(tmp.path().join("taxonomy.tsv"), "child_id\tparent_id\nghost\tentity\n").unwrap();
    let mut config = AnalysisConfig::load(&conf).unwrap();
    config.output = tmp.path().join("out");
    let err = run_pipeline(&config).unwrap_err();
    assert!(matches!(err, Error::Stage { .. }), "{err:?}");
    assert!(err.to_string().contains("load"), "{err}");
    assert!(!tmp.path().join("out").exists());
    assert!(!tmp.path().join(".out.staging").exists());
}

#[test]
fn run_requires_a_taxonomy() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = toy(&tmp.path().join("out"));
    config.taxonomy = None;
    assert!(run_pipeline(&config).unwrap_err().is_validation());
}

#[test]
fn attested_toy_loss_is_below_both_baselines() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_pipeline(&toy(&tmp.path().join("out"))).unwrap().dir;
    let text = fs::read_to_string(dir.join("baselines.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    let mean = |scope: &str, kind: &str| -> f64 {
        rows.iter().find(|r| r[0] == scope && r[1] == kind).unwrap()[2].parse().unwrap()
    };
    assert!(mean("all", "attested") < mean("all", "near-synonym"));
    assert!(mean("all", "near-synonym") < mean("all", "random"));
}
