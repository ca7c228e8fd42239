mod common;

use metair::exec::Pool;
use metair_core::learners::LearnerKind;
use metair_core::meta_ir::{build_meta_dataset, GridSpec, Sequential};
use metair_core::metrics::Metric;
use metair_core::ResamplingKind;

use common::toy_corpus;

#[test]
fn worker_count_does_not_change_the_meta_dataset() {
    let grid = GridSpec::new(
        &[LearnerKind::DT, LearnerKind::BG],
        &[ResamplingKind::None, ResamplingKind::SmoteR, ResamplingKind::GaussianNoise],
        Metric::Sera,
    );
    let corpus = toy_corpus(4);
    let seq = build_meta_dataset(&corpus, &grid, 21, &Sequential).unwrap();
    let par = build_meta_dataset(&corpus, &grid, 21, &Pool::new(3).unwrap()).unwrap();
    assert_eq!(seq, par);
}
