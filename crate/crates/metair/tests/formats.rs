mod common;

use std::fs;

use metair::ingest::{read_dataset, write_dataset, CsvOptions};
use metair::persist::{bundle_from_json, bundle_to_json, load_bundle, save_bundle};
use metair::tables::{read_meta_dataset, write_meta_dataset};
use metair::Error;
use metair_core::learners::{LearnerKind, LearnerSpec};
use metair_core::meta_ir::{build_meta_dataset, recommend, train_meta, Approach, GridSpec, Sequential};
use metair_core::metrics::Metric;
use metair_core::{ResamplingKind, TargetColumn};

use common::toy_corpus;

fn small_grid(metric: Metric) -> GridSpec {
    GridSpec::new(
        &[LearnerKind::DT],
        &[ResamplingKind::None, ResamplingKind::RandomOver, ResamplingKind::RandomUnder],
        metric,
    )
}

#[test]
fn dataset_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for d in toy_corpus(2) {
        let path = dir.path().join(format!("{}.csv", d.name()));
        write_dataset(&d, &path).unwrap();
        let back = read_dataset(&path, Some(&TargetColumn::Name("target".into())), &CsvOptions::default()).unwrap();
        assert_eq!(back, d);
        let again = dir.path().join("again");
        fs::create_dir_all(&again).unwrap();
        write_dataset(&back, &again.join(format!("{}.csv", d.name()))).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(again.join(format!("{}.csv", d.name()))).unwrap());
    }
}

#[test]
fn meta_dataset_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for metric in [Metric::F1R, Metric::Sera] {
        let m = build_meta_dataset(&toy_corpus(3), &small_grid(metric), 5, &Sequential).unwrap();
        let path = dir.path().join(format!("{}.csv", metric.name()));
        write_meta_dataset(&path, &m).unwrap();
        let back = read_meta_dataset(&path, metric).unwrap();
        assert_eq!(back, m);
    }
}

#[test]
fn bundle_round_trip_keeps_recommendations() {
    let corpus = toy_corpus(4);
    let m = build_meta_dataset(&corpus, &small_grid(Metric::F1R), 5, &Sequential).unwrap();
    let mut spec = LearnerSpec::new(LearnerKind::RfClf);
    spec.trees = 30;
    let dir = tempfile::tempdir().unwrap();
    for approach in Approach::ALL {
        let b = train_meta(&m, approach, &spec, 9).unwrap();
        let path = dir.path().join(format!("{approach}.json"));
        save_bundle(&b, &path).unwrap();
        let back = load_bundle(&path).unwrap();
        assert_eq!(back, b);
        for d in &corpus {
            assert_eq!(recommend(d, &back).unwrap(), recommend(d, &b).unwrap());
        }
    }
}

#[test]
fn bundle_version_is_checked() {
    let m = build_meta_dataset(&toy_corpus(3), &small_grid(Metric::F1R), 5, &Sequential).unwrap();
    let mut spec = LearnerSpec::new(LearnerKind::DtClf);
    spec.trees = 1;
    let b = train_meta(&m, Approach::Independent, &spec, 1).unwrap();
    let json = bundle_to_json(&b).unwrap();
    let path = std::path::Path::new("b.json");
    assert!(bundle_from_json(&json, path).is_ok());
    let newer = json.replacen("\"version\":1", "\"version\":2", 1);
    assert!(matches!(bundle_from_json(&newer, path), Err(Error::Format(_))));
    assert!(matches!(load_bundle(std::path::Path::new("/nonexistent/b.json")), Err(Error::MissingArtifact(_))));
}
