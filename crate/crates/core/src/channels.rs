//! Phase shift, per-arm photon loss and passive two-mode elements.
//!
//! Loss maps an `N`-photon pure state onto a mixture over the number `L` of
//! photons scattered out of the interferometer. Sector `L` is a dense
//! `(N+1-L)`-dimensional block over `|N-L-i, i⟩`, so every operation here
//! works block by block.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{binom_f64, LossSpec, PureState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest photon number accepted by [`loss_channel_oracle`].
pub const ORACLE_MAX_N: usize = 8;

pub type Block = DMatrix<Complex64>;

/// Applies `e^{iφ n_A}`: `c_k → c_k e^{iφ(N-k)}`.
pub fn phase_shift(state: &PureState, phi: f64) -> PureState {
    let n = state.n();
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| c * Complex64::from_polar(1.0, phi * (n - k) as f64))
        .collect();
    PureState::new(n, amps).expect("phase shift preserves the norm")
}

/// Reduced two-mode density matrix after loss, one block per number of lost
/// photons.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedDensityMatrix {
    n: usize,
    blocks: Vec<Block>,
}

/// Worst-case deviations of a [`BlockedDensityMatrix`] from a valid state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub max_hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub total_trace: f64,
}

impl BlockedDensityMatrix {
    pub fn new(n: usize, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() != n + 1 {
            return Err(Error::DimensionMismatch { block: blocks.len(), expected: n + 1, got: blocks.len() });
        }
        for (l, b) in blocks.iter().enumerate() {
            let dim = n + 1 - l;
            if b.nrows() != dim || b.ncols() != dim {
                return Err(Error::DimensionMismatch { block: l, expected: dim, got: b.nrows() });
            }
        }
        Ok(Self { n, blocks })
    }

    /// `|ψ⟩⟨ψ|` placed in the no-loss block.
    pub fn from_pure(state: &PureState) -> Self {
        let n = state.n();
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let mut blocks: Vec<Block> = (0..=n).map(|l| DMatrix::zeros(n + 1 - l, n + 1 - l)).collect();
        blocks[0] = &v * v.adjoint();
        Self { n, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block for `lost` scattered photons.
    pub fn block(&self, lost: usize) -> &Block {
        &self.blocks[lost]
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    pub fn check_invariants(&self) -> InvariantReport {
        let mut max_herm: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        for b in &self.blocks {
            let dev = (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            max_herm = max_herm.max(dev);
            let herm = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = herm.symmetric_eigenvalues();
            min_eig = min_eig.min(eig.iter().copied().fold(f64::INFINITY, f64::min));
        }
        InvariantReport { max_hermitian_deviation: max_herm, min_eigenvalue: min_eig, total_trace: self.total_trace() }
    }

    /// Largest elementwise difference to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &BlockedDensityMatrix) -> f64 {
        assert_eq!(self.n, other.n, "photon numbers differ");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// JSON dump: `{"n": N, "blocks": [[[[re, im], ...], ...], ...]}`, rows
    /// outermost within each block.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump {
            n: usize,
            blocks: Vec<Vec<Vec<[f64; 2]>>>,
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| (0..b.nrows()).map(|i| (0..b.ncols()).map(|j| [b[(i, j)].re, b[(i, j)].im]).collect()).collect())
            .collect();
        serde_json::to_value(Dump { n: self.n, blocks }).expect("dump serializes")
    }
}

/// Precomputed loss amplitudes `A_{N,L,i,m}` for one photon number and loss.
///
/// `m` photons are lost from arm B and `L - m` from arm A, taking the input
/// component `c_{i+m}` to `|N-L-i, i⟩`.
#[derive(Debug, Clone)]
pub struct LossCoefficients {
    n: usize,
    // Indexed [L][i][m], i in 0..=N-L, m in 0..=L.
    table: Vec<Vec<Vec<f64>>>,
}

impl LossCoefficients {
    pub fn new(n: usize, loss: &LossSpec) -> Self {
        let (t, r, tp, rp) = (loss.t_a(), loss.r_a(), loss.t_b(), loss.r_b());
        let table = (0..=n)
            .map(|l| {
                (0..=n - l)
                    .map(|i| {
                        (0..=l)
                            .map(|m| {
                                let arm_a = binom_f64(n - i - m, n - l - i).sqrt()
                                    * t.powi((n - l - i) as i32)
                                    * r.powi((l - m) as i32);
                                let arm_b = binom_f64(i + m, i).sqrt() * tp.powi(i as i32) * rp.powi(m as i32);
                                arm_a * arm_b
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { n, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, lost: usize, i: usize, m: usize) -> f64 {
        self.table[lost][i][m]
    }

    /// Reduced density matrix of `state` after loss.
    pub fn apply(&self, state: &PureState) -> BlockedDensityMatrix {
        assert_eq!(state.n(), self.n, "photon number differs from the coefficient table");
        let c = state.amplitudes();
        let n = self.n;
        let blocks = (0..=n)
            .map(|l| {
                let dim = n + 1 - l;
                let mut block = DMatrix::from_element(dim, dim, ZERO);
                // ρ_L = Σ_m v_m v_m†, v_m[i] = c_{i+m} A_{N,L,i,m}.
                let mut v = vec![ZERO; dim];
                for m in 0..=l {
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi = c[i + m] * self.table[l][i][m];
                    }
                    for j in 0..dim {
                        let vj = v[j].conj();
                        for i in 0..dim {
                            block[(i, j)] += v[i] * vj;
                        }
                    }
                }
                block
            })
            .collect();
        BlockedDensityMatrix { n, blocks }
    }
}

/// Reduced density matrix of `state` after per-arm loss.
pub fn loss_channel(state: &PureState, loss: &LossSpec) -> BlockedDensityMatrix {
    LossCoefficients::new(state.n(), loss).apply(state)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Multiplies a two-variable polynomial, stored by power of the second
/// variable at fixed total degree, by `(x·a + y·b)`.
fn times_linear(poly: &[f64], x: f64, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; poly.len() + 1];
    for (p, &coef) in poly.iter().enumerate() {
        out[p] += coef * x;
        out[p + 1] += coef * y;
    }
    out
}

/// Loss channel computed by brute force: each arm photon is routed through a
/// fictitious beam splitter into its own environment mode, `a† → t a† + r e†`
/// and `b† → t′ b† + r′ f†`, and the environment is traced out afterwards.
pub fn loss_channel_oracle(state: &PureState, loss: &LossSpec) -> Result<BlockedDensityMatrix> {
    let n = state.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleLimit { n, max: ORACLE_MAX_N });
    }
    // Four-mode ket keyed by (n_a, n_b, n_e, n_f).
    let mut ket: BTreeMap<(usize, usize, usize, usize), Complex64> = BTreeMap::new();
    for (k, &ck) in state.amplitudes().iter().enumerate() {
        let (na, nb) = (n - k, k);
        let mut poly_a = vec![1.0];
        for _ in 0..na {
            poly_a = times_linear(&poly_a, loss.t_a(), loss.r_a());
        }
        let mut poly_b = vec![1.0];
        for _ in 0..nb {
            poly_b = times_linear(&poly_b, loss.t_b(), loss.r_b());
        }
        let input_norm = (factorial(na) * factorial(nb)).sqrt();
        for (ne, &pa) in poly_a.iter().enumerate() {
            for (nf, &pb) in poly_b.iter().enumerate() {
                let (a, b) = (na - ne, nb - nf);
                let ket_norm = (factorial(a) * factorial(b) * factorial(ne) * factorial(nf)).sqrt();
                *ket.entry((a, b, ne, nf)).or_insert(ZERO) += ck * (pa * pb * ket_norm / input_norm);
            }
        }
    }
    let mut blocks: Vec<Block> = (0..=n).map(|l| DMatrix::from_element(n + 1 - l, n + 1 - l, ZERO)).collect();
    for (&(a, b, ne, nf), &amp) in &ket {
        let l = ne + nf;
        debug_assert_eq!(a + b, n - l);
        for (&(a2, b2, ne2, nf2), &amp2) in &ket {
            if ne2 == ne && nf2 == nf {
                debug_assert_eq!(a2 + b2, n - l);
                blocks[l][(b, b2)] += amp * amp2.conj();
            }
        }
    }
    BlockedDensityMatrix::new(n, blocks)
}

/// Passive photon-number-conserving element as one unitary per loss block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUnitaryFamily {
    n: usize,
    unitaries: Vec<Block>,
}

impl BlockUnitaryFamily {
    pub fn identity(n: usize) -> Self {
        Self { n, unitaries: (0..=n).map(|l| DMatrix::identity(n + 1 - l, n + 1 - l)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unitary acting on the block with `lost` scattered photons.
    pub fn unitary(&self, lost: usize) -> &Block {
        &self.unitaries[lost]
    }

    pub fn unitaries(&self) -> &[Block] {
        &self.unitaries
    }

    /// Family of `U^(L)†`.
    pub fn adjoint(&self) -> Self {
        Self { n: self.n, unitaries: self.unitaries.iter().map(|u| u.adjoint()).collect() }
    }

    /// Largest entry of `U†U - I` over all blocks.
    pub fn unitarity_error(&self) -> f64 {
        self.unitaries
            .iter()
            .map(|u| {
                let dim = u.nrows();
                (u.adjoint() * u - DMatrix::<Complex64>::identity(dim, dim))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Mode transformation `a† → τ a† + ρ b†`, `b† → -ρ* a† + τ* b†` expanded in
/// every photon-number sector `n = N - L`.
///
/// Column `k` of `U^(L)` is
/// `(τ a† + ρ b†)^{n-k} (-ρ* a† + τ* b†)^k |0,0⟩ / √((n-k)! k!)` written in the
/// `|n-i, i⟩` basis.
pub fn beam_splitter_family(n: usize, tau: Complex64, rho: Complex64) -> Result<BlockUnitaryFamily> {
    let norm = tau.norm_sqr() + rho.norm_sqr();
    if !((norm - 1.0).abs() <= 1e-10) {
        return Err(Error::NotUnitary(norm));
    }
    let unitaries = (0..=n).map(|l| sector_unitary(n - l, tau, rho)).collect();
    Ok(BlockUnitaryFamily { n, unitaries })
}

fn sector_unitary(sector: usize, tau: Complex64, rho: Complex64) -> Block {
    let mut u = DMatrix::from_element(sector + 1, sector + 1, ZERO);
    let minus_rho_conj = -rho.conj();
    let tau_conj = tau.conj();
    for k in 0..=sector {
        let na = sector - k;
        // p of the first factor's photons and q of the second's end in mode B.
        for p in 0..=na {
            let first = binom_f64(na, p) * tau.powu((na - p) as u32) * rho.powu(p as u32);
            for q in 0..=k {
                let second = binom_f64(k, q) * minus_rho_conj.powu((k - q) as u32) * tau_conj.powu(q as u32);
                let i = p + q;
                let scale = (factorial(sector - i) * factorial(i) / (factorial(na) * factorial(k))).sqrt();
                u[(i, k)] += first * second * scale;
            }
        }
    }
    u
}

/// The 50-50 splitter used for detection: `τ = 1/√2`, `ρ = i/√2`.
pub fn fifty_fifty(n: usize) -> BlockUnitaryFamily {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    beam_splitter_family(n, Complex64::new(s, 0.0), Complex64::new(0.0, s)).expect("50-50 is unitary")
}

/// `ρ_L → U^(L) ρ_L U^(L)†` for every block.
pub fn apply_block_unitary(rho: &BlockedDensityMatrix, family: &BlockUnitaryFamily) -> Result<BlockedDensityMatrix> {
    if rho.n != family.n {
        return Err(Error::PhotonNumberMismatch(rho.n, family.n));
    }
    let blocks = rho
        .blocks
        .iter()
        .zip(&family.unitaries)
        .enumerate()
        .map(|(l, (b, u))| {
            if b.nrows() != u.nrows() {
                return Err(Error::DimensionMismatch { block: l, expected: b.nrows(), got: u.nrows() });
            }
            Ok(u * b * u.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockedDensityMatrix { n: rho.n, blocks })
}
