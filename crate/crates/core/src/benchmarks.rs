//! Reference state families and projection of arbitrary states onto them.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{binom_f64, PureState};
use crate::simplex::{self, SimplexSettings};

const ALPHA_GRID: usize = 181;
const BETA_GRID: usize = 360;

/// `(|N,0⟩ + e^{iχ}|0,N⟩)/√2`.
pub fn noon_state(n: usize, relative_phase: f64) -> Result<PureState> {
    if n == 0 {
        return Err(Error::NoPhotons("a N00N state"));
    }
    let mut raw = vec![Complex64::new(0.0, 0.0); n + 1];
    raw[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    raw[n] = Complex64::from_polar(FRAC_1_SQRT_2, relative_phase);
    PureState::new(n, raw)
}

/// `(|m, m′⟩ + e^{iχ}|m′, m⟩)/√2` with `m′ = N - m` and `N/2 < m ≤ N`.
pub fn mm_state(n: usize, m: usize, relative_phase: f64) -> Result<PureState> {
    if 2 * m <= n || m > n {
        return Err(Error::InvalidSplit { n, m });
    }
    let mut raw = vec![Complex64::new(0.0, 0.0); n + 1];
    raw[n - m] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    raw[m] = Complex64::from_polar(FRAC_1_SQRT_2, relative_phase);
    PureState::new(n, raw)
}

/// Amplitudes `√C(N,k) (e^{iβ} cos α)^{N-k} (-e^{-iβ} sin α)^k`.
fn gpcs_amplitudes(n: usize, alpha: f64, beta: f64) -> Vec<Complex64> {
    let a = Complex64::from_polar(alpha.cos(), beta);
    let b = -Complex64::from_polar(alpha.sin(), -beta);
    (0..=n)
        .map(|k| binom_f64(n, k).sqrt() * a.powu((n - k) as u32) * b.powu(k as u32))
        .collect()
}

/// Two-mode SU(2) coherent state
/// `(N!)^{-1/2} [a₁† e^{iβ} cos α - a₂† e^{-iβ} sin α]^N |0⟩`.
pub fn gpcs_state(n: usize, alpha: f64, beta: f64) -> PureState {
    PureState::new(n, gpcs_amplitudes(n, alpha, beta)).expect("coherent-state amplitudes are normalized")
}

/// Which `(m, m′)` split the M&M′ projection considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmSplit {
    /// Best over `N/2 < m < N`; the `m = N` case is the N00N state and is excluded.
    Best,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkFamily {
    Noon,
    Mm(MmSplit),
    Gpcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum FamilyParams {
    Noon { relative_phase: f64 },
    /// `m` is `None` when no admissible split exists (`N < 3` under [`MmSplit::Best`]).
    Mm { m: Option<usize>, relative_phase: f64 },
    Gpcs { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestOverlap {
    pub value: f64,
    pub params: FamilyParams,
}

impl BestOverlap {
    /// The family member achieving the overlap.
    pub fn member(&self, n: usize) -> Result<Option<PureState>> {
        Ok(match self.params {
            FamilyParams::Noon { relative_phase } => Some(noon_state(n, relative_phase)?),
            FamilyParams::Mm { m: Some(m), relative_phase } => Some(mm_state(n, m, relative_phase)?),
            FamilyParams::Mm { m: None, .. } => None,
            FamilyParams::Gpcs { alpha, beta } => Some(gpcs_state(n, alpha, beta)),
        })
    }
}

/// Best squared overlap of a two-component superposition of `|N-lo, lo⟩`
/// and `|N-hi, hi⟩` with equal weights, aligning the relative phase.
fn two_component(state: &PureState, lo: usize, hi: usize) -> (f64, f64) {
    let (a, b) = (state.amplitudes()[lo], state.amplitudes()[hi]);
    let value = 0.5 * (a.norm() + b.norm()).powi(2);
    let phase = if a.norm() > 0.0 && b.norm() > 0.0 { (b.arg() - a.arg()).rem_euclid(2.0 * PI) } else { 0.0 };
    (value.min(1.0), phase)
}

/// Maximizes the squared overlap of `state` with members of `family`.
///
/// Relative phases are aligned analytically, the M&M′ split is scanned, and
/// the GPCS angles come from a 0.5° grid over `α ∈ [0, π/2]`, `β ∈ [0, π)`
/// polished by a simplex search.
pub fn best_overlap(state: &PureState, family: BenchmarkFamily) -> Result<BestOverlap> {
    let n = state.n();
    match family {
        BenchmarkFamily::Noon => {
            if n == 0 {
                return Err(Error::NoPhotons("a N00N state"));
            }
            let (value, relative_phase) = two_component(state, 0, n);
            Ok(BestOverlap { value, params: FamilyParams::Noon { relative_phase } })
        }
        BenchmarkFamily::Mm(split) => {
            let candidates: Vec<usize> = match split {
                MmSplit::Best => (n / 2 + 1..n).collect(),
                MmSplit::Fixed(m) => {
                    mm_state(n, m, 0.0)?;
                    vec![m]
                }
            };
            let mut best: Option<BestOverlap> = None;
            for m in candidates {
                let (value, relative_phase) = two_component(state, n - m, m);
                if best.is_none_or(|b| value > b.value) {
                    best = Some(BestOverlap { value, params: FamilyParams::Mm { m: Some(m), relative_phase } });
                }
            }
            Ok(best.unwrap_or(BestOverlap { value: 0.0, params: FamilyParams::Mm { m: None, relative_phase: 0.0 } }))
        }
        BenchmarkFamily::Gpcs => Ok(best_gpcs(state)),
    }
}

/// Folds any real `alpha` onto `[0, π/2]` by reflection.
fn fold_alpha(alpha: f64) -> f64 {
    let x = alpha.rem_euclid(PI);
    if x > FRAC_PI_2 {
        PI - x
    } else {
        x
    }
}

fn gpcs_overlap(state: &PureState, alpha: f64, beta: f64) -> f64 {
    let g = gpcs_amplitudes(state.n(), alpha, beta);
    let s: Complex64 = g.iter().zip(state.amplitudes()).map(|(g, c)| g.conj() * c).sum();
    s.norm_sqr().min(1.0)
}

fn best_gpcs(state: &PureState) -> BestOverlap {
    let n = state.n();
    let c = state.amplitudes();
    // ⟨GPCS|ψ⟩ = Σ_k w_k(α) e^{-iβ(N-2k)} c_k with w_k real.
    let weights: Vec<Vec<f64>> = (0..ALPHA_GRID)
        .map(|a| {
            let alpha = FRAC_PI_2 * a as f64 / (ALPHA_GRID - 1) as f64;
            let (s, co) = alpha.sin_cos();
            (0..=n).map(|k| binom_f64(n, k).sqrt() * co.powi((n - k) as i32) * (-s).powi(k as i32)).collect()
        })
        .collect();
    let phased: Vec<Vec<Complex64>> = (0..BETA_GRID)
        .map(|b| {
            let beta = PI * b as f64 / BETA_GRID as f64;
            (0..=n).map(|k| c[k] * Complex64::from_polar(1.0, -beta * (n as f64 - 2.0 * k as f64))).collect()
        })
        .collect();
    let (mut best_a, mut best_b, mut best_v) = (0, 0, f64::NEG_INFINITY);
    for (a, w) in weights.iter().enumerate() {
        for (b, p) in phased.iter().enumerate() {
            let s: Complex64 = w.iter().zip(p).map(|(w, p)| p * *w).sum();
            let v = s.norm_sqr();
            if v > best_v {
                (best_a, best_b, best_v) = (a, b, v);
            }
        }
    }
    let start = [
        FRAC_PI_2 * best_a as f64 / (ALPHA_GRID - 1) as f64,
        PI * best_b as f64 / BETA_GRID as f64,
    ];
    let settings = SimplexSettings { initial_step: 0.01, tolerance: 1e-13, max_evaluations: 5_000, max_restarts: 10 };
    let refined = simplex::maximize(|x| gpcs_overlap(state, fold_alpha(x[0]), x[1]), &start, &settings);
    let alpha = fold_alpha(refined.point[0]);
    let beta = refined.point[1].rem_euclid(PI);
    BestOverlap { value: gpcs_overlap(state, alpha, beta), params: FamilyParams::Gpcs { alpha, beta } }
}

/// Overlaps with all three families; M&M′ uses the best admissible split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    pub noon: f64,
    pub mm: f64,
    pub gpcs: f64,
}

pub fn overlap_summary(state: &PureState) -> Result<OverlapSummary> {
    Ok(OverlapSummary {
        noon: best_overlap(state, BenchmarkFamily::Noon)?.value,
        mm: best_overlap(state, BenchmarkFamily::Mm(MmSplit::Best))?.value,
        gpcs: best_overlap(state, BenchmarkFamily::Gpcs)?.value,
    })
}
