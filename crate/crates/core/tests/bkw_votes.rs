//! Vote statistics of the block-merge solver.

use lpn_core::bitlinalg::BlockLayout;
use lpn_core::instance::{ExampleSource, NoiseRate, TargetSpec};
use lpn_core::solvers::{predicted_bias, recover_first_bit, Repetitions, SolverConfig, Status};

#[test]
fn first_bit_votes_follow_four_label_bias() {
    // a = 3 folds 2^(a-1) = 4 labels per vote: ½ + ½(0.75)^4 ≈ 0.658.
    let eta = NoiseRate::new(0.125).unwrap();
    let reps = 4000;
    let mut src = ExampleSource::uniform(24, 0.125, 77, TargetSpec::Random).unwrap();
    let truth = src.planted().bits().get(0);
    let cfg = SolverConfig::new(BlockLayout::new(3, 8).unwrap(), eta, 0.1)
        .unwrap()
        .with_repetitions(Repetitions::Explicit(reps))
        .with_seed(3);
    let out = recover_first_bit(&mut src, &cfg).unwrap();
    assert_eq!(out.status, Status::Recovered);
    assert_eq!(out.ones + out.zeros, reps);
    assert_eq!(out.bit, truth);
    let correct = if truth { out.ones } else { out.zeros };
    let p = predicted_bias(eta, 4).unwrap();
    let rate = f64::from(correct) / f64::from(reps);
    let sigma = (p * (1.0 - p) / f64::from(reps)).sqrt();
    assert!((rate - p).abs() <= 3.0 * sigma, "{rate} vs {p}");
    // Votes use disjoint, increasing ranges of draws.
    for w in out.vote_draws.windows(2) {
        assert!(w[0].end <= w[1].start);
    }
}

#[test]
fn provenance_tracking_does_not_change_results() {
    let eta = NoiseRate::new(0.1).unwrap();
    let base = SolverConfig::new(BlockLayout::new(3, 4).unwrap(), eta, 0.1)
        .unwrap()
        .with_repetitions(Repetitions::Explicit(15))
        .with_seed(8);
    let run = |track: bool| {
        let mut src = ExampleSource::uniform(12, 0.1, 4, TargetSpec::Random).unwrap();
        recover_first_bit(&mut src, &base.with_provenance(track)).unwrap()
    };
    assert_eq!(run(true), run(false));
}
