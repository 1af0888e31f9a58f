use lio::optimize::{consensus_optimize, optimize, Method, OptimizerConfig};
use lio::LossSpec;

fn config(n: usize, ra: f64, seed: u64) -> OptimizerConfig {
    OptimizerConfig::new(n, LossSpec::new(ra, 0.0).unwrap()).with_seed(seed)
}

#[test]
fn optimum_does_not_depend_on_working_phase() {
    let at_zero = consensus_optimize(&config(3, 3.0, 5)).unwrap();
    let mut shifted = config(3, 3.0, 5);
    shifted.phi0 = 1.1;
    let at_shift = consensus_optimize(&shifted).unwrap();
    assert!((at_zero.fisher / at_shift.fisher - 1.0).abs() < 0.01, "{} vs {}", at_zero.fisher, at_shift.fisher);
}

#[test]
fn method_families_agree() {
    let r = consensus_optimize(&config(4, 5.0, 2)).unwrap();
    assert!(r.spread < 0.01, "spread {}", r.spread);
    assert!(!r.suspect);
    assert_eq!(r.methods.len(), 3);
}

#[test]
fn same_seed_same_result() {
    let cfg = config(3, 4.0, 9).with_method(Method::Ga);
    let (a, b) = (optimize(&cfg).unwrap(), optimize(&cfg).unwrap());
    assert_eq!(a.fisher, b.fisher);
    assert_eq!(a.state.amplitudes(), b.state.amplitudes());
}

#[test]
fn optimum_beats_noon_under_loss() {
    let r = consensus_optimize(&config(4, 6.0, 1)).unwrap();
    let noon = lio::metrology::fisher_information(
        &lio::benchmarks::noon_state(4, 0.0).unwrap(),
        0.3,
        &LossSpec::new(6.0, 0.0).unwrap(),
    )
    .unwrap()
    .fisher;
    assert!(r.fisher > noon, "{} <= {noon}", r.fisher);
}
