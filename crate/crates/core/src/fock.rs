//! Two-mode Fock-basis states with a fixed total photon number.
//!
//! Index `k` of an amplitude vector counts the photons in mode B (the control
//! arm), so `c_k` multiplies `|N-k, k⟩`. Every module shares this ordering.

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance for states built in memory.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Norm tolerance accepted when reading a state file.
pub const FILE_NORM_TOLERANCE: f64 = 1e-6;

/// Magnitude below which an amplitude is treated as absent when fixing the
/// global phase.
const PHASE_ANCHOR_THRESHOLD: f64 = 1e-10;

/// Exact binomial coefficient `C(n, k)`; zero when `k` is outside `[0, n]`.
pub fn binom(n: u64, k: i64) -> Result<u128> {
    if k < 0 || k as u64 > n {
        return Ok(0);
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n - k + i) / i is an integer; cancel the gcd first so the
        // product only overflows when the result itself does.
        let num = (n - k + i) as u128;
        let den = i as u128;
        let g = acc.gcd(&den);
        let (acc_r, den_r) = (acc / g, den / g);
        let num_r = num / den_r;
        acc = acc_r
            .checked_mul(num_r)
            .ok_or(Error::BinomialOverflow { n, k: k as i64 })?;
    }
    Ok(acc)
}

/// `C(n, k)` as `f64`, for the small `n` used in amplitude formulas.
pub(crate) fn binom_f64(n: usize, k: usize) -> f64 {
    binom(n as u64, k as i64).expect("binomial within u128 range") as f64
}

/// Converts a loss in dB into the amplitude pair `(t, r)` of the equivalent
/// beam splitter. The intensity transmission is `t² = 10^(-dB/10)`.
pub fn db_to_amplitude(r_db: f64) -> Result<(f64, f64)> {
    if !r_db.is_finite() || r_db < 0.0 {
        return Err(Error::InvalidLoss(r_db));
    }
    let t = 10f64.powf(-r_db / 20.0);
    let r = (1.0 - t * t).max(0.0).sqrt();
    Ok((t, r))
}

/// Inverse of [`db_to_amplitude`] for an amplitude transmission `t`.
pub fn amplitude_to_db(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidTransmission(t));
    }
    Ok(-10.0 * (t * t).log10() + 0.0)
}

/// Per-arm photon loss. Arm A is the detection arm carrying the phase, arm B
/// the control arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossDb", into = "LossDb")]
pub struct LossSpec {
    r_a_db: f64,
    r_b_db: f64,
    t_a: f64,
    r_a: f64,
    t_b: f64,
    r_b: f64,
}

#[derive(Serialize, Deserialize)]
struct LossDb {
    ra_db: f64,
    rb_db: f64,
}

impl TryFrom<LossDb> for LossSpec {
    type Error = Error;
    fn try_from(value: LossDb) -> Result<Self> {
        LossSpec::new(value.ra_db, value.rb_db)
    }
}

impl From<LossSpec> for LossDb {
    fn from(value: LossSpec) -> Self {
        LossDb { ra_db: value.r_a_db, rb_db: value.r_b_db }
    }
}

impl LossSpec {
    pub fn new(r_a_db: f64, r_b_db: f64) -> Result<Self> {
        let (t_a, r_a) = db_to_amplitude(r_a_db)?;
        let (t_b, r_b) = db_to_amplitude(r_b_db)?;
        Ok(Self { r_a_db, r_b_db, t_a, r_a, t_b, r_b })
    }

    pub fn lossless() -> Self {
        Self::new(0.0, 0.0).expect("0 dB is valid")
    }

    /// Builds a loss from amplitude transmissions in `(0, 1]`.
    pub fn from_transmissions(t_a: f64, t_b: f64) -> Result<Self> {
        let r_a_db = amplitude_to_db(t_a)?;
        let r_b_db = amplitude_to_db(t_b)?;
        Ok(Self {
            r_a_db,
            r_b_db,
            t_a,
            r_a: (1.0 - t_a * t_a).max(0.0).sqrt(),
            t_b,
            r_b: (1.0 - t_b * t_b).max(0.0).sqrt(),
        })
    }

    pub fn r_a_db(&self) -> f64 {
        self.r_a_db
    }

    pub fn r_b_db(&self) -> f64 {
        self.r_b_db
    }

    /// Amplitude transmission `t` of arm A.
    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    /// Amplitude reflection `r` of arm A.
    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    /// Amplitude transmission `t′` of arm B.
    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    /// Amplitude reflection `r′` of arm B.
    pub fn r_b(&self) -> f64 {
        self.r_b
    }
}

/// Normalized `N`-photon two-mode pure state `Σ_k c_k |N-k, k⟩`.
///
/// Serializes in the state-file layout of [`StateFile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Normalizes `raw` into a state of `n` photons.
    pub fn new(n: usize, raw: Vec<Complex64>) -> Result<Self> {
        if raw.len() != n + 1 {
            return Err(Error::WrongLength { n, expected: n + 1, got: raw.len() });
        }
        let norm_sqr: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sqr.is_finite() && norm_sqr > 0.0) {
            return Err(Error::ZeroState);
        }
        let scale = norm_sqr.sqrt().recip();
        let amplitudes = raw.into_iter().map(|c| c * scale).collect();
        Ok(Self { n, amplitudes })
    }

    /// Basis state `|N-k, k⟩`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::WrongLength { n, expected: n + 1, got: k + 1 });
        }
        let mut raw = vec![Complex64::new(0.0, 0.0); n + 1];
        raw[k] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes: raw })
    }

    /// Total photon number `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Populations `|c_k|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Same state with the first non-negligible amplitude rotated onto the
    /// non-negative real axis.
    pub fn canonical(&self) -> Self {
        let anchor = self
            .amplitudes
            .iter()
            .find(|c| c.norm() > PHASE_ANCHOR_THRESHOLD)
            .copied();
        let Some(anchor) = anchor else {
            return self.clone();
        };
        let rot = Complex64::from_polar(1.0, -anchor.arg());
        let mut amplitudes: Vec<Complex64> = self.amplitudes.iter().map(|c| c * rot).collect();
        if let Some(c) = amplitudes.iter_mut().find(|c| c.norm() > PHASE_ANCHOR_THRESHOLD) {
            *c = Complex64::new(c.norm(), 0.0);
        }
        Self { n: self.n, amplitudes }
    }

    /// Multiplies every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let rot = Complex64::from_polar(1.0, theta);
        Self { n: self.n, amplitudes: self.amplitudes.iter().map(|c| c * rot).collect() }
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::PhotonNumberMismatch(self.n, other.n));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Normalizes `raw` and fixes the global phase for reporting.
pub fn make_pure_state(n: usize, raw: Vec<Complex64>) -> Result<PureState> {
    Ok(PureState::new(n, raw)?.canonical())
}

/// `|⟨a|b⟩|²`.
pub fn squared_overlap(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// On-disk state representation: `{"n": N, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&PureState> for StateFile {
    fn from(state: &PureState) -> Self {
        StateFile {
            n: state.n,
            amplitudes: state.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl From<PureState> for StateFile {
    fn from(state: PureState) -> Self {
        StateFile::from(&state)
    }
}

impl TryFrom<StateFile> for PureState {
    type Error = Error;

    /// Re-normalizes, rejecting files whose norm is off by more than
    /// [`FILE_NORM_TOLERANCE`].
    fn try_from(file: StateFile) -> Result<Self> {
        let raw: Vec<Complex64> =
            file.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        if raw.len() != file.n + 1 {
            return Err(Error::WrongLength { n: file.n, expected: file.n + 1, got: raw.len() });
        }
        let norm_sqr: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
        let deviation = (norm_sqr - 1.0).abs();
        if !(deviation <= FILE_NORM_TOLERANCE) {
            return Err(Error::NotNormalized { deviation, tolerance: FILE_NORM_TOLERANCE });
        }
        PureState::new(file.n, raw)
    }
}

impl PureState {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| Error::StateFile(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateFile::from(self)).expect("state serializes")
    }
}
