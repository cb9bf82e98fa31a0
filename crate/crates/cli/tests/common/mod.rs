#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{TimeZone, Utc};
use snqam_core::corpus::{parse_corpus, ParseMode};
use snqam_core::forest::{ForestConfig, Label};
use snqam_core::snqam::{calibrate, save_model, CalibrationOptions};
use snqam_core::{featurize_posts, load_lexicons};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn lexicon_dir() -> PathBuf {
    workspace_root().join("lexicons")
}

pub fn fixture(name: &str) -> PathBuf {
    workspace_root().join("fixtures").join(name)
}

pub const VERY_GOOD: [&str; 2] = ["people_daily", "xinhua"];

/// Calibrates a small model on the 50-post fixture and writes it to `dir`.
pub fn write_fixture_model(dir: &Path) -> PathBuf {
    let lex = load_lexicons(lexicon_dir()).unwrap();
    let posts = parse_corpus(fixture("posts50.jsonl"), ParseMode::Strict).unwrap().posts;
    let features: Vec<_> = featurize_posts(&posts, &lex).iter().map(|r| r.features).collect();
    let labels: Vec<Label> = posts
        .iter()
        .map(|p| {
            if VERY_GOOD.contains(&p.account_id.as_str()) {
                Label::VeryGood
            } else {
                Label::Typical
            }
        })
        .collect();
    let quality: Vec<f64> = posts.iter().map(|p| p.quality() as f64).collect();
    let opts = CalibrationOptions {
        forest: ForestConfig {
            n_trees: 50,
            ..ForestConfig::default()
        },
        created_at: Utc.with_ymd_and_hms(2014, 7, 1, 0, 0, 0).unwrap(),
    };
    let model = calibrate(&features, &labels, &quality, &opts).unwrap().model;
    let path = dir.join("model.json");
    save_model(&model, &path).unwrap();
    path
}

/// Runs the `snqam` binary with a clean SNQAM_* environment.
pub fn snqam(args: &[&str]) -> Output {
    snqam_env(args, &[])
}

pub fn snqam_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_snqam"));
    cmd.args(args)
        .env_remove("SNQAM_MODEL")
        .env_remove("SNQAM_LEXICONS")
        .env_remove("SNQAM_PORT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn snqam")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}
