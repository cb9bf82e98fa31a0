mod common;

use common::oracle::{self, OracleLexicons};
use snqam_core::{compute_facets, featurize, load_lexicons, Facet, PostMeta, FEATURE_NAMES};

#[test]
fn fixture_features_match_naive_oracle() {
    let lex = load_lexicons(common::lexicon_dir()).unwrap();
    let naive = OracleLexicons::load(&common::lexicon_dir());
    let posts = oracle::fixture_posts(&common::fixture("posts50.jsonl"));
    assert_eq!(posts.len(), 50);
    let mut mismatches = Vec::new();
    for (id, text, has_image, has_video) in &posts {
        let row = featurize(text, PostMeta { has_image: *has_image, has_video: *has_video }, &lex);
        let expected = oracle::features(text, *has_image, *has_video, &naive).to_vec();
        for (i, (got, want)) in row.features.to_vec().iter().zip(&expected).enumerate() {
            if got.to_bits() != want.to_bits() {
                mismatches.push(format!("{id} {}: {got} vs {want}", FEATURE_NAMES[i]));
            }
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn fixture_facets_match_formulas() {
    let lex = load_lexicons(common::lexicon_dir()).unwrap();
    for (id, text, has_image, has_video) in oracle::fixture_posts(&common::fixture("posts50.jsonl")) {
        let row = featurize(&text, PostMeta { has_image, has_video }, &lex);
        let direct = oracle::facets(&row.features);
        let facets = compute_facets(&row.features);
        for (k, facet) in Facet::ALL.iter().enumerate() {
            assert_eq!(facets.get(*facet), direct[k], "{id} {facet}");
        }
    }
}

#[test]
fn fixture_exercises_every_marker() {
    let naive = OracleLexicons::load(&common::lexicon_dir());
    let posts = oracle::fixture_posts(&common::fixture("posts50.jsonl"));
    let totals = posts.iter().fold(vec![0.0; FEATURE_NAMES.len()], |mut acc, (_, t, i, v)| {
        for (a, x) in acc.iter_mut().zip(oracle::features(t, *i, *v, &naive).to_vec()) {
            *a += x.abs();
        }
        acc
    });
    let unused: Vec<&str> = FEATURE_NAMES
        .iter()
        .zip(&totals)
        .filter(|(_, &t)| t == 0.0)
        .map(|(n, _)| *n)
        .collect();
    assert!(unused.is_empty(), "features never non-zero in the fixture: {unused:?}");
}
