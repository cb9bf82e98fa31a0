//! Synthetic inputs for the benchmarks.

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snqam_core::forest::Label;
use snqam_core::{FeatureVector, FEATURE_COUNT};

pub fn lexicon_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../lexicons")
}

const PHRASES: &[&str] = &[
    "今天", "北京", "记者", "发布", "消息", "非常", "我们", "你们", "为什么", "但是",
    "因为", "所以", "据悉", "官方", "表示", "很", "好", "新闻", "城市", "天气",
];
const MARKS: &[&str] = &["，", "。", "！", "？", "、", "：", " "];

/// Pseudo-posts of roughly `len` characters mixing lexicon words, punctuation
/// and the occasional tag, mention or link.
pub fn posts(n: usize, len: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut s = String::new();
            if rng.random_bool(0.3) {
                s.push_str("【快讯】");
            }
            while s.chars().count() < len {
                s.push_str(PHRASES.choose(&mut rng).unwrap());
                if rng.random_bool(0.3) {
                    s.push_str(MARKS.choose(&mut rng).unwrap());
                }
                if rng.random_bool(0.02) {
                    s.push_str("#话题# @某人 ");
                }
                if rng.random_bool(0.01) {
                    s.push_str("http://t.cn/abc123 ");
                }
            }
            s
        })
        .collect()
}

/// Feature rows whose label and quality depend on the first three columns.
pub fn corpus(n: usize, seed: u64) -> (Vec<FeatureVector>, Vec<Label>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut quality = Vec::with_capacity(n);
    for _ in 0..n {
        let v: Vec<f64> = (0..FEATURE_COUNT).map(|_| rng.random_range(0..10) as f64).collect();
        quality.push(3.0 * v[0] + 2.0 * v[1] + v[2] + rng.random_range(0.0..5.0));
        features.push(FeatureVector::from_slice(&v).expect("full width"));
    }
    let mut sorted = quality.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let labels = quality
        .iter()
        .map(|&q| if q > median { Label::VeryGood } else { Label::Typical })
        .collect();
    (features, labels, quality)
}
