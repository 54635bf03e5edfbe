//! Feature extraction against fixtures produced by numpy and PyWavelets
//! (`tests/data/gen_golden.py`).

use std::collections::HashMap;
use std::path::Path;

use mvbeta::msignal::{bandpass, dwt_samples, extract_features, FeatureConfig, Signal, Trial};
use mvbeta::Label;

fn load(name: &str) -> HashMap<String, Vec<f64>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut parts = l.split(',');
            let key = parts.next().unwrap().to_string();
            (key, parts.map(|v| v.parse().unwrap()).collect())
        })
        .collect()
}

fn assert_close(got: &[f64], want: &[f64], tol: f64, what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: length");
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= tol, "{what}[{i}]: {g} vs {w}");
    }
}

#[test]
fn db2_level4_matches_pywavelets_periodization() {
    let g = load("dwt_db2_level4.csv");
    let d = dwt_samples(&g["input"], 4).unwrap();
    for k in 1..=4 {
        assert_close(&d.details[k - 1], &g[&format!("detail{k}")], 1e-10, &format!("detail{k}"));
    }
    assert_close(&d.approx, &g["approx"], 1e-10, "approx");
}

#[test]
fn bandpass_matches_numpy_mask() {
    let g = load("features_fs256.csv");
    let rate = g["rate"][0];
    for c in 1..=3 {
        let s = Signal::new(g[&format!("signal{c}")].clone(), rate).unwrap();
        let y = bandpass(&s, 7.0, 30.0).unwrap();
        assert_close(y.samples(), &g[&format!("bandpassed{c}")], 1e-10, &format!("bandpassed{c}"));
    }
}

#[test]
fn trial_features_match_reference_pipeline() {
    let g = load("features_fs256.csv");
    let rate = g["rate"][0];
    let trial = Trial {
        id: "golden".into(),
        label: Label::Positive,
        channels: (1..=3)
            .map(|c| Signal::new(g[&format!("signal{c}")].clone(), rate).unwrap())
            .collect(),
    };
    let feats = extract_features(&trial, &FeatureConfig::default()).unwrap();
    assert_eq!(feats.len(), 3);
    for (c, f) in feats.iter().enumerate() {
        assert_close(f.coords(), &g[&format!("feature{}", c + 1)], 1e-8, &format!("feature{}", c + 1));
    }
}
