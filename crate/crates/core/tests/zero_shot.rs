//! Kept in its own test binary: the fit and resample counters are global.

use metair_core::learners::{regressor_fit_count, LearnerKind, LearnerSpec};
use metair_core::meta_ir::{build_meta_dataset, recommend, train_meta, Approach, GridSpec, Sequential};
use metair_core::metrics::Metric;
use metair_core::resampling::apply_call_count;
use metair_core::{Dataset, ResamplingKind};

fn data(k: usize) -> Dataset {
    let rows: Vec<[f64; 2]> = (0..60).map(|i| [i as f64, ((i * (k + 3)) % 13) as f64]).collect();
    let y: Vec<f64> = (0..60).map(|i| if i % (5 + k) == 0 { 40.0 + i as f64 } else { (i % 9) as f64 }).collect();
    Dataset::from_rows(&format!("z{k}"), &rows, &y).unwrap()
}

#[test]
fn recommendation_trains_and_resamples_nothing() {
    let corpus: Vec<Dataset> = (0..4).map(data).collect();
    let grid = GridSpec::new(&[LearnerKind::DT], &[ResamplingKind::None, ResamplingKind::RandomOver], Metric::F1R);
    let m = build_meta_dataset(&corpus, &grid, 1, &Sequential).unwrap();
    let mut spec = LearnerSpec::new(LearnerKind::RfClf);
    spec.trees = 20;
    let bundle = train_meta(&m, Approach::StrategyFirst, &spec, 1).unwrap();

    let (fits, applies) = (regressor_fit_count(), apply_call_count());
    let p = recommend(&data(7), &bundle).unwrap();
    assert_eq!(regressor_fit_count(), fits);
    assert_eq!(apply_call_count(), applies);
    assert!(bundle.learners.contains(&p.learner) && bundle.resamplers.contains(&p.resampler));
}
