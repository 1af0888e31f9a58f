//! Photon-counting statistics, Fisher information and phase sensitivity.
//!
//! The detection stage is a 50-50 beam splitter followed by two
//! number-resolving detectors. Because the phase only rotates coherences,
//! `dρ_{L,i,j}/dφ = i(j-i) ρ_{L,i,j}`, and the outcome derivatives are exact.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{fifty_fifty, phase_shift, BlockUnitaryFamily, LossCoefficients};
use crate::error::{Error, Result};
use crate::fock::{LossSpec, PureState};

/// Outcomes with probability below this are candidates for the `0/0 → 0` rule.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// A vanishing outcome whose derivative exceeds this marks an ill-conditioned phase.
pub const DERIVATIVE_CEILING: f64 = 1e-7;

/// One detector outcome: `m1` photons at detector 1, `m2` at detector 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub m1: usize,
    pub m2: usize,
    pub probability: f64,
    pub derivative: f64,
}

/// Distribution over all `(m1, m2)` with `m1 + m2 ≤ N`, ordered by the
/// number of lost photons and then by `m2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub outcomes: Vec<Outcome>,
}

impl OutcomeDistribution {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn total_derivative(&self) -> f64 {
        self.outcomes.iter().map(|o| o.derivative).sum()
    }

    pub fn get(&self, m1: usize, m2: usize) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.m1 == m1 && o.m2 == m2)
    }

    /// `Σ_m (dP_m/dφ)² / P_m` with vanishing outcomes dropped.
    pub fn fisher(&self) -> Result<f64> {
        fisher_sum(self.outcomes.iter().map(|o| (o.m1, o.m2, o.probability, o.derivative)))
    }
}

fn fisher_sum(terms: impl Iterator<Item = (usize, usize, f64, f64)>) -> Result<f64> {
    let mut total = 0.0;
    for (m1, m2, p, dp) in terms {
        if p < PROBABILITY_FLOOR {
            if dp.abs() > DERIVATIVE_CEILING {
                return Err(Error::IllConditioned { m1, m2, probability: p, derivative: dp });
            }
            if dp * dp < PROBABILITY_FLOOR {
                continue;
            }
        }
        total += dp * dp / p;
    }
    Ok(total.max(0.0))
}

/// Fisher information of one measurement and the phase uncertainties it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub fisher: f64,
    /// `1/√F`.
    pub delta_phi: f64,
    /// `δφ·√N`, the uncertainty normalized to one photon.
    pub delta_phi_tilde: f64,
    pub phi_evaluated: f64,
}

impl SensitivityReport {
    pub fn new(fisher: f64, n: usize, phi: f64) -> Self {
        let delta_phi = fisher.powf(-0.5);
        Self { fisher, delta_phi, delta_phi_tilde: delta_phi * (n as f64).sqrt(), phi_evaluated: phi }
    }

    pub fn has_phase_sensitivity(&self) -> bool {
        self.fisher > 1e-12
    }
}

/// Forward model for one photon number and loss, with the loss amplitudes and
/// detector unitaries precomputed.
#[derive(Debug, Clone)]
pub struct Interferometer {
    loss: LossSpec,
    coefficients: LossCoefficients,
    detector: BlockUnitaryFamily,
}

impl Interferometer {
    pub fn new(n: usize, loss: LossSpec) -> Self {
        Self { loss, coefficients: LossCoefficients::new(n, &loss), detector: fifty_fifty(n) }
    }

    pub fn n(&self) -> usize {
        self.coefficients.n()
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    fn check(&self, state: &PureState) -> Result<()> {
        if state.n() != self.n() {
            return Err(Error::PhotonNumberMismatch(state.n(), self.n()));
        }
        Ok(())
    }

    pub fn outcomes(&self, state: &PureState, phi: f64) -> Result<OutcomeDistribution> {
        self.check(state)?;
        let n = self.n();
        let rho = self.coefficients.apply(&phase_shift(state, phi));
        let mut outcomes = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for (lost, block) in rho.blocks().iter().enumerate() {
            let u = self.detector.unitary(lost);
            let dim = block.nrows();
            let d_block = DMatrix::from_fn(dim, dim, |i, j| block[(i, j)] * Complex64::new(0.0, j as f64 - i as f64));
            let w = u * block;
            let dw = u * d_block;
            let sector = n - lost;
            for m in 0..dim {
                let (mut p, mut dp) = (0.0, 0.0);
                for j in 0..dim {
                    let uc = u[(m, j)].conj();
                    p += (w[(m, j)] * uc).re;
                    dp += (dw[(m, j)] * uc).re;
                }
                outcomes.push(Outcome { m1: sector - m, m2: m, probability: p.max(0.0), derivative: dp });
            }
        }
        Ok(OutcomeDistribution { outcomes })
    }

    pub fn sensitivity(&self, state: &PureState, phi: f64) -> Result<SensitivityReport> {
        let fisher = self.outcomes(state, phi)?.fisher()?;
        Ok(SensitivityReport::new(fisher, self.n(), phi))
    }

    /// Relative deviation between the analytic Fisher information and one
    /// built from central differences of the outcome probabilities.
    pub fn fd_deviation(&self, state: &PureState, phi: f64, h: f64) -> Result<f64> {
        if !(1e-6..=1e-3).contains(&h) {
            return Err(Error::InvalidStep(h));
        }
        let centre = self.outcomes(state, phi)?;
        let plus = self.outcomes(state, phi + h)?;
        let minus = self.outcomes(state, phi - h)?;
        let analytic = centre.fisher()?;
        let numeric = fisher_sum(centre.outcomes.iter().zip(&plus.outcomes).zip(&minus.outcomes).map(|((o, p), m)| {
            (o.m1, o.m2, o.probability, (p.probability - m.probability) / (2.0 * h))
        }))?;
        let diff = (numeric - analytic).abs();
        Ok(if analytic > 0.0 { diff / analytic } else { diff })
    }
}

/// Outcome probabilities and their phase derivatives.
pub fn detection_probabilities(state: &PureState, phi: f64, loss: &LossSpec) -> Result<OutcomeDistribution> {
    Interferometer::new(state.n(), *loss).outcomes(state, phi)
}

pub fn fisher_information(state: &PureState, phi: f64, loss: &LossSpec) -> Result<SensitivityReport> {
    Interferometer::new(state.n(), *loss).sensitivity(state, phi)
}

pub fn fisher_fd_check(state: &PureState, phi: f64, loss: &LossSpec, h: f64) -> Result<f64> {
    Interferometer::new(state.n(), *loss).fd_deviation(state, phi, h)
}

fn check_transmission(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTransmission(t))
    }
}

/// Fisher information per mean photon of coherent light in a Mach-Zehnder
/// interferometer whose first splitter rotates by `theta` and whose phase arm
/// has amplitude transmission `t`:
/// `4t² sin²θ / (1 + t² tan²θ)`.
///
/// Evaluated as `4t² sin²θ cos²θ / (cos²θ + t² sin²θ)`, which is finite up to
/// and including `θ = π/2`, where it vanishes.
pub fn classical_fisher(t: f64, theta: f64) -> Result<f64> {
    check_transmission(t)?;
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidAngle(theta));
    }
    let (s, c) = theta.sin_cos();
    let (s2, c2, t2) = (s * s, c * c, t * t);
    Ok(4.0 * t2 * s2 * c2 / (c2 + t2 * s2))
}

/// Splitter angle maximizing [`classical_fisher`]: `tan²θ = 1/t`.
pub fn optimal_splitter_angle(t: f64) -> Result<f64> {
    check_transmission(t)?;
    Ok(t.sqrt().recip().atan())
}

/// Coherent-light Fisher information per photon with the first splitter
/// tuned to the loss: `4t² / (1 + t)²`.
pub fn classical_fisher_optimized(t: f64) -> Result<f64> {
    check_transmission(t)?;
    Ok(4.0 * t * t / ((1.0 + t) * (1.0 + t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> PureState {
        let raw = (0..=n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        PureState::new(n, raw).unwrap()
    }

    fn noon(n: usize) -> PureState {
        let mut raw = vec![c(0.0, 0.0); n + 1];
        raw[0] = c(1.0, 0.0);
        raw[n] = c(1.0, 0.0);
        PureState::new(n, raw).unwrap()
    }

    /// Golden-section maximization of a unimodal function on `[lo, hi]`.
    fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while hi - lo > 1e-12 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            }
        }
        f(0.5 * (lo + hi))
    }

    #[test]
    fn single_photon_outcomes() {
        let s = PureState::basis(1, 0).unwrap();
        let d = detection_probabilities(&s, 0.0, &LossSpec::lossless()).unwrap();
        assert_abs_diff_eq!(d.get(1, 0).unwrap().probability, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.get(0, 1).unwrap().probability, 0.5, epsilon = 1e-15);
        assert_eq!(d.get(0, 0).unwrap().probability, 0.0);

        let s = PureState::new(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        for phi in [0.0, FRAC_PI_2, 0.37, -1.2] {
            let d = detection_probabilities(&s, phi, &LossSpec::lossless()).unwrap();
            assert_abs_diff_eq!(d.get(1, 0).unwrap().probability, (1.0 + phi.sin()) / 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.get(0, 1).unwrap().probability, (1.0 - phi.sin()) / 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(d.get(1, 0).unwrap().derivative, phi.cos() / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn heavy_loss_leaves_vacuum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let loss = LossSpec::new(20.0, 20.0).unwrap();
        for n in 1..=6 {
            let d = detection_probabilities(&random_state(&mut rng, n), 0.2, &loss).unwrap();
            // Each photon independently survives with probability 0.01.
            let bound = (1.0 - 1e-2f64).powi(n as i32);
            assert!(d.get(0, 0).unwrap().probability >= bound - 1e-6);
        }
    }

    #[test]
    fn single_photon_fisher_is_one() {
        let s = PureState::new(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        for phi in [0.0, 0.3, 1.0, 2.5, -0.7] {
            let r = fisher_information(&s, phi, &LossSpec::lossless()).unwrap();
            assert_abs_diff_eq!(r.fisher, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noon_reaches_heisenberg_limit() {
        let r = fisher_information(&noon(2), FRAC_PI_8, &LossSpec::lossless()).unwrap();
        assert_abs_diff_eq!(r.fisher, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta_phi, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta_phi_tilde, FRAC_1_SQRT_2, epsilon = 1e-12);
        for n in [3, 4, 6] {
            let r = fisher_information(&noon(n), 0.1, &LossSpec::lossless()).unwrap();
            assert_abs_diff_eq!(r.fisher, (n * n) as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn fock_inputs_carry_no_phase_information() {
        for n in 1..=6 {
            for k in 0..=n {
                let s = PureState::basis(n, k).unwrap();
                for loss in [LossSpec::lossless(), LossSpec::new(3.0, 1.0).unwrap()] {
                    let d = detection_probabilities(&s, 0.4, &loss).unwrap();
                    assert!(d.outcomes.iter().all(|o| o.derivative.abs() < 1e-15));
                    let r = fisher_information(&s, 0.4, &loss).unwrap();
                    assert_eq!(r.fisher, 0.0);
                    assert!(!r.has_phase_sensitivity());
                    assert!(r.delta_phi.is_infinite());
                }
            }
        }
    }

    #[test]
    fn vanishing_outcome_with_slope_is_flagged() {
        let d = OutcomeDistribution {
            outcomes: vec![
                Outcome { m1: 1, m2: 0, probability: 1.0, derivative: -1e-6 },
                Outcome { m1: 0, m2: 1, probability: 1e-16, derivative: 1e-6 },
            ],
        };
        assert!(matches!(d.fisher(), Err(Error::IllConditioned { m1: 0, m2: 1, .. })));
        let d = OutcomeDistribution {
            outcomes: vec![
                Outcome { m1: 1, m2: 0, probability: 1.0, derivative: 0.0 },
                Outcome { m1: 0, m2: 1, probability: 1e-16, derivative: 1e-9 },
            ],
        };
        assert_eq!(d.fisher().unwrap(), 0.0);
    }

    #[test]
    fn finite_difference_agreement() {
        let dev = fisher_fd_check(&noon(2), FRAC_PI_8, &LossSpec::lossless(), 1e-5).unwrap();
        assert!(dev < 1e-6, "{dev}");
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = random_state(&mut rng, 4);
        let dev = fisher_fd_check(&s, 0.3, &LossSpec::new(3.0, 0.0).unwrap(), 1e-5).unwrap();
        assert!(dev < 1e-6, "{dev}");
        assert!(matches!(fisher_fd_check(&s, 0.3, &LossSpec::lossless(), 1e-2), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn finite_difference_is_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = random_state(&mut rng, 3);
        let loss = LossSpec::new(2.0, 1.0).unwrap();
        let coarse = fisher_fd_check(&s, 0.5, &loss, 1e-3).unwrap();
        let fine = fisher_fd_check(&s, 0.5, &loss, 5e-4).unwrap();
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn classical_baselines() {
        assert_abs_diff_eq!(classical_fisher(1.0, FRAC_PI_4).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_fisher(0.5f64.sqrt(), FRAC_PI_4).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let t = 1e-4;
        assert_abs_diff_eq!(classical_fisher(t, FRAC_PI_4).unwrap() / (2.0 * t * t), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(classical_fisher(1.0, FRAC_PI_2).unwrap(), 0.0, epsilon = 1e-15);
        assert!(classical_fisher(0.0, 0.3).is_err());
        assert!(classical_fisher(0.5, 2.0).is_err());

        assert_eq!(classical_fisher_optimized(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(classical_fisher_optimized(t).unwrap() / (4.0 * t * t), 1.0, epsilon = 1e-3);
        let t = 0.5f64.sqrt();
        assert_abs_diff_eq!(classical_fisher_optimized(t).unwrap(), 0.686291501, epsilon = 1e-9);
    }

    #[test]
    fn tuned_splitter_is_the_maximum_over_angle() {
        for t in [1.0, 0.9, 0.5f64.sqrt(), 0.3, 0.05, 1e-3] {
            let numeric = golden_max(|th| classical_fisher(t, th).unwrap(), 0.0, FRAC_PI_2);
            let closed = classical_fisher_optimized(t).unwrap();
            assert_abs_diff_eq!(numeric, closed, epsilon = 1e-9);
            let at_angle = classical_fisher(t, optimal_splitter_angle(t).unwrap()).unwrap();
            assert_abs_diff_eq!(at_angle, closed, epsilon = 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn distribution_is_normalized(seed in any::<u64>(), n in 0usize..=10, phi in -PI..PI,
                                      ra in 0.0f64..20.0, rb in 0.0f64..20.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = detection_probabilities(&random_state(&mut rng, n), phi, &LossSpec::new(ra, rb).unwrap()).unwrap();
            prop_assert_eq!(d.outcomes.len(), (n + 1) * (n + 2) / 2);
            prop_assert!((d.total_probability() - 1.0).abs() < 1e-10);
            prop_assert!(d.total_derivative().abs() < 1e-10);
            prop_assert!(d.outcomes.iter().all(|o| o.probability >= 0.0));
        }

        #[test]
        fn fisher_absorbs_phase_into_amplitudes(seed in any::<u64>(), n in 1usize..=8, phi in -PI..PI,
                                                delta in -PI..PI, global in -PI..PI, ra in 0.0f64..12.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng, n);
            let loss = LossSpec::new(ra, 1.0).unwrap();
            let model = Interferometer::new(n, loss);
            let base = model.sensitivity(&s, phi).unwrap().fisher;
            let rotated = model.sensitivity(&s.with_global_phase(global), phi).unwrap().fisher;
            prop_assert!((base - rotated).abs() < 1e-10 * base.max(1.0));
            let absorbed = crate::channels::phase_shift(&s, delta);
            let shifted = model.sensitivity(&absorbed, phi - delta).unwrap().fisher;
            prop_assert!((base - shifted).abs() < 1e-10 * base.max(1.0));
        }

        #[test]
        fn classical_dominance(t in 1e-3f64..1.0, theta in 0.0f64..FRAC_PI_2) {
            prop_assert!(classical_fisher(t, theta).unwrap() <= classical_fisher_optimized(t).unwrap() + 1e-15);
        }
    }
}
