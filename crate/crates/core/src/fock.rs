//! Sparse multimode Fock-space states and the linear-optical unitaries acting
//! on them.
//!
//! A [`FockState`] is a superposition of occupation vectors over an ordered,
//! fixed list of modes. Every passive linear-optical element conserves the
//! total photon number, so unitaries are applied exactly block by block with
//! no truncation error: a two-mode element acting on `|m, n⟩` is expanded
//! through the creation-operator substitution
//!
//! ```text
//! U |m,n⟩ = (m! n!)^{-1/2} (u00 a† + u01 b†)^m (u10 a† + u11 b†)^n |0,0⟩
//! ```
//!
//! where `u` is the 2×2 mode matrix of the element.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default maximum total photon number of a state.
pub const DEFAULT_CUTOFF: u32 = 6;

/// Amplitudes with magnitude below this are dropped after every unitary.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Squared-norm tolerance for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
    None,
}

/// A bosonic mode: a spatial label plus an optional polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub spatial: u16,
    pub polarization: Polarization,
}

impl ModeId {
    pub const fn new(spatial: u16, polarization: Polarization) -> Self {
        Self {
            spatial,
            polarization,
        }
    }

    /// Polarization-less mode.
    pub const fn path(spatial: u16) -> Self {
        Self::new(spatial, Polarization::None)
    }

    pub const fn h(spatial: u16) -> Self {
        Self::new(spatial, Polarization::H)
    }

    pub const fn v(spatial: u16) -> Self {
        Self::new(spatial, Polarization::V)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarization {
            Polarization::H => write!(f, "{}H", self.spatial),
            Polarization::V => write!(f, "{}V", self.spatial),
            Polarization::None => write!(f, "{}", self.spatial),
        }
    }
}

/// Photon counts, one entry per mode of the owning state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(Vec<u32>);

impl Occupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }
}

impl From<Vec<u32>> for Occupation {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl From<&[u32]> for Occupation {
    fn from(v: &[u32]) -> Self {
        Self(v.to_vec())
    }
}

impl<const N: usize> From<[u32; N]> for Occupation {
    fn from(v: [u32; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Beamsplitter angles: `t = cos θ`, `r = sin θ e^{iΦ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsParams {
    pub theta: f64,
    pub phi: f64,
}

impl BsParams {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Beamsplitter with the default reflection phase Φ = π/2.
    pub const fn with_theta(theta: f64) -> Self {
        Self::new(theta, FRAC_PI_2)
    }

    /// The 50:50 beamsplitter, θ = π/4, Φ = π/2.
    pub const fn symmetric() -> Self {
        Self::with_theta(std::f64::consts::FRAC_PI_4)
    }

    pub fn transmission(&self) -> Complex64 {
        Complex64::new(self.theta.cos(), 0.0)
    }

    pub fn reflection(&self) -> Complex64 {
        Complex64::from_polar(self.theta.sin(), self.phi)
    }
}

impl Default for BsParams {
    fn default() -> Self {
        Self::symmetric()
    }
}

/// Mode matrix of a beamsplitter, `a' = t a + r b`.
///
/// The lower-left entry is `-r*`, which equals `r` at Φ = π/2 and keeps the
/// matrix unitary for every Φ.
pub fn bs_mode_matrix(params: BsParams) -> Mat2 {
    let t = params.transmission();
    let r = params.reflection();
    [[t, r], [-r.conj(), t]]
}

/// Mode matrix of an ideal mirror (`t = 0`, `r = i`).
pub const MIRROR: Mat2 = [[ZERO, I], [I, ZERO]];

/// Matrix product `a · b`.
pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Sparse pure (or flagged unnormalized) state over an ordered list of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: Vec<ModeId>,
    terms: BTreeMap<Occupation, Complex64>,
    cutoff: u32,
    normalized: bool,
}

impl FockState {
    fn empty(modes: Vec<ModeId>, cutoff: u32) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        Ok(Self {
            modes,
            terms: BTreeMap::new(),
            cutoff,
            normalized: false,
        })
    }

    pub fn vacuum(modes: Vec<ModeId>, cutoff: u32) -> Result<Self> {
        let zeros = vec![0; modes.len()];
        Self::basis(modes, &zeros, cutoff)
    }

    /// A single Fock basis state `|n_1, …, n_k⟩`.
    pub fn basis(modes: Vec<ModeId>, counts: &[u32], cutoff: u32) -> Result<Self> {
        Self::from_terms(modes, [(counts.to_vec(), ONE)], cutoff)
    }

    /// Builds a state from (occupation, amplitude) pairs. Repeated
    /// occupations are summed. The result is flagged normalized only if its
    /// squared norm is within [`NORM_TOLERANCE`] of one.
    pub fn from_terms<I>(modes: Vec<ModeId>, terms: I, cutoff: u32) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut state = Self::empty(modes, cutoff)?;
        for (counts, amp) in terms {
            if counts.len() != state.modes.len() {
                return Err(Error::OccupationLength {
                    expected: state.modes.len(),
                    got: counts.len(),
                });
            }
            let occ = Occupation(counts);
            let total = occ.total();
            if total > cutoff {
                return Err(Error::CutoffExceeded {
                    count: total,
                    cutoff,
                });
            }
            *state.terms.entry(occ).or_insert(ZERO) += amp;
        }
        state.prune();
        state.normalized = (state.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE;
        Ok(state)
    }

    /// Coherent state `|α⟩` on a single mode, truncated at `cutoff` photons
    /// and renormalized.
    pub fn coherent(mode: ModeId, alpha: Complex64, cutoff: u32) -> Result<Self> {
        let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        let mut terms = Vec::with_capacity(cutoff as usize + 1);
        for n in 0..=cutoff {
            if n > 0 {
                amp *= alpha / (n as f64).sqrt();
            }
            terms.push((vec![n], amp));
        }
        let state = Self::from_terms(vec![mode], terms, cutoff)?;
        Ok(state.normalize()?.0)
    }

    /// Probability mass of a coherent state beyond `cutoff` photons.
    pub fn coherent_tail_mass(alpha: Complex64, cutoff: u32) -> f64 {
        let mean = alpha.norm_sqr();
        let mut p = (-mean).exp();
        let mut kept = p;
        for n in 1..=cutoff {
            p *= mean / n as f64;
            kept += p;
        }
        (1.0 - kept).max(0.0)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over the stored terms in ascending occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, counts: &[u32]) -> Complex64 {
        self.terms
            .get(&Occupation(counts.to_vec()))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn mode_index(&self, mode: ModeId) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| *m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// False for states produced by non-unitary operations (ladder
    /// operators, post-selection branches) until they are renormalized.
    pub fn is_flagged_normalized(&self) -> bool {
        self.normalized
    }

    /// Checks the numeric norm, independent of the flag.
    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(n));
        }
        Ok(())
    }

    pub fn with_cutoff(mut self, cutoff: u32) -> Result<Self> {
        if let Some(count) = self.terms.keys().map(Occupation::total).max() {
            if count > cutoff {
                return Err(Error::CutoffExceeded { count, cutoff });
            }
        }
        self.cutoff = cutoff;
        Ok(self)
    }

    /// Tensor product, modes of `self` first. The cutoff is the larger of
    /// the two and must accommodate every product term.
    pub fn tensor(&self, other: &FockState) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        let cutoff = self.cutoff.max(other.cutoff);
        let mut out = Self::empty(modes, cutoff)?;
        for (o1, a1) in &self.terms {
            for (o2, a2) in &other.terms {
                let mut counts = o1.0.clone();
                counts.extend_from_slice(&o2.0);
                let total: u32 = counts.iter().sum();
                if total > cutoff {
                    return Err(Error::CutoffExceeded {
                        count: total,
                        cutoff,
                    });
                }
                out.terms.insert(Occupation(counts), a1 * a2);
            }
        }
        out.prune();
        out.normalized = self.normalized && other.normalized;
        Ok(out)
    }

    /// Appends empty modes to the end of the mode list.
    pub fn with_vacuum_modes(&self, extra: &[ModeId]) -> Result<Self> {
        let vac = Self::vacuum(extra.to_vec(), self.cutoff)?;
        self.tensor(&vac)
    }

    /// Multiplies every amplitude by `factor`. Marks the result unnormalized
    /// unless `|factor| = 1`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= factor;
        }
        out.prune();
        out.normalized = self.normalized && (factor.norm() - 1.0).abs() <= NORM_TOLERANCE;
        out
    }

    /// Vector sum of two states on the same modes (unnormalized in general).
    pub fn plus(&self, other: &FockState) -> Result<Self> {
        self.same_modes(other)?;
        let mut out = self.clone();
        for (o, a) in &other.terms {
            *out.terms.entry(o.clone()).or_insert(ZERO) += a;
        }
        out.cutoff = self.cutoff.max(other.cutoff);
        out.prune();
        out.normalized = (out.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE;
        Ok(out)
    }

    fn same_modes(&self, other: &FockState) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    /// Builds a state with the same modes from raw terms, keeping the
    /// normalization flag of `self`.
    fn rebuilt(&self, terms: BTreeMap<Occupation, Complex64>) -> Self {
        let mut out = Self {
            modes: self.modes.clone(),
            terms,
            cutoff: self.cutoff,
            normalized: self.normalized,
        };
        out.prune();
        out
    }

    /// Returns the unit-norm state and the original norm.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let norm = self.norm_sqr().sqrt();
        if self.terms.is_empty() || norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut out = self.scaled(Complex64::new(1.0 / norm, 0.0));
        out.normalized = true;
        Ok((out, norm))
    }

    /// Restricts a state to a subset of its modes, dropping the others.
    /// Every term must be empty on the dropped modes.
    pub(crate) fn project_out_vacuum(&self, keep: &[usize]) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (o, a) in &self.terms {
            let dropped_empty = o
                .0
                .iter()
                .enumerate()
                .all(|(i, n)| keep.contains(&i) || *n == 0);
            if !dropped_empty {
                return None;
            }
            let counts: Vec<u32> = keep.iter().map(|&i| o.0[i]).collect();
            terms.insert(Occupation(counts), *a);
        }
        Some(Self {
            modes: keep.iter().map(|&i| self.modes[i]).collect(),
            terms,
            cutoff: self.cutoff,
            normalized: self.normalized,
        })
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (o, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, o)?;
        }
        Ok(())
    }
}

/// `⟨s1|s2⟩`.
pub fn inner_product(s1: &FockState, s2: &FockState) -> Result<Complex64> {
    s1.same_modes(s2)?;
    let (small, large, conj_small) = if s1.terms.len() <= s2.terms.len() {
        (s1, s2, true)
    } else {
        (s2, s1, false)
    };
    let mut acc = ZERO;
    for (o, a) in &small.terms {
        if let Some(b) = large.terms.get(o) {
            acc += if conj_small { a.conj() * b } else { b.conj() * a };
        }
    }
    Ok(acc)
}

/// `|⟨s1|s2⟩|²`; meaningful for normalized inputs.
pub fn fidelity(s1: &FockState, s2: &FockState) -> Result<f64> {
    Ok(inner_product(s1, s2)?.norm_sqr())
}

pub fn normalize(s: &FockState) -> Result<(FockState, f64)> {
    s.normalize()
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

fn powers(x: Complex64, n: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(ONE);
    for k in 1..=n {
        p.push(p[k - 1] * x);
    }
    p
}

/// Image of `|p, q⟩` under the substitution `a† → u00 a† + u01 b†`,
/// `b† → u10 a† + u11 b†`; entry `k` is the amplitude of `|k, p+q-k⟩`.
pub(crate) fn two_mode_block(u: &Mat2, p: usize, q: usize, fact: &[f64]) -> Vec<Complex64> {
    let n = p + q;
    let binom = |m: usize, k: usize| fact[m] / (fact[k] * fact[m - k]);
    let (p00, p01) = (powers(u[0][0], p), powers(u[0][1], p));
    let (p10, p11) = (powers(u[1][0], q), powers(u[1][1], q));
    let mut out = vec![ZERO; n + 1];
    for i in 0..=p {
        let c1 = p00[i] * p01[p - i] * binom(p, i);
        if c1 == ZERO {
            continue;
        }
        for j in 0..=q {
            let c2 = p10[j] * p11[q - j] * binom(q, j);
            out[i + j] += c1 * c2;
        }
    }
    let inv = 1.0 / (fact[p] * fact[q]).sqrt();
    for (k, amp) in out.iter_mut().enumerate() {
        *amp *= inv * (fact[k] * fact[n - k]).sqrt();
    }
    out
}

/// Applies the passive two-mode unitary with mode matrix `u` to modes `a`
/// and `b`. `u` must be unitary.
pub fn apply_mode_unitary(state: &FockState, a: ModeId, b: ModeId, u: &Mat2) -> Result<FockState> {
    if a == b {
        return Err(Error::SameMode(a));
    }
    let ia = state.mode_index(a)?;
    let ib = state.mode_index(b)?;
    let max_n = state
        .terms
        .keys()
        .map(|o| (o.0[ia] + o.0[ib]) as usize)
        .max()
        .unwrap_or(0);
    let fact = factorials(max_n);
    let mut blocks: BTreeMap<(usize, usize), Vec<Complex64>> = BTreeMap::new();
    let mut terms = BTreeMap::new();
    for (o, amp) in &state.terms {
        let (p, q) = (o.0[ia] as usize, o.0[ib] as usize);
        let block = blocks
            .entry((p, q))
            .or_insert_with(|| two_mode_block(u, p, q, &fact));
        let n = p + q;
        for (k, c) in block.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let mut counts = o.0.clone();
            counts[ia] = k as u32;
            counts[ib] = (n - k) as u32;
            *terms.entry(Occupation(counts)).or_insert(ZERO) += amp * c;
        }
    }
    Ok(state.rebuilt(terms))
}

/// `U_BS` on modes `a`, `b`.
pub fn apply_beamsplitter(
    state: &FockState,
    a: ModeId,
    b: ModeId,
    params: BsParams,
) -> Result<FockState> {
    apply_mode_unitary(state, a, b, &bs_mode_matrix(params))
}

/// Ideal mirror (`t = 0`, `r = i`) folding a beam back onto its own rail:
/// every photon in `mode` picks up the reflection amplitude `i`.
pub fn apply_mirror(state: &FockState, mode: ModeId) -> Result<FockState> {
    apply_phase(state, mode, FRAC_PI_2)
}

/// Phase shifter: each term picks up `e^{iφ n_m}`.
pub fn apply_phase(state: &FockState, mode: ModeId, phi: f64) -> Result<FockState> {
    let idx = state.mode_index(mode)?;
    let terms = state
        .terms
        .iter()
        .map(|(o, a)| {
            let n = o.0[idx] as f64;
            (o.clone(), a * Complex64::from_polar(1.0, phi * n))
        })
        .collect();
    Ok(state.rebuilt(terms))
}

/// Diagonal two-mode phase `e^{iφ n_1 n_2}`. On single-photon rails this is
/// the controlled phase gate.
pub fn apply_controlled_phase(
    state: &FockState,
    m1: ModeId,
    m2: ModeId,
    phi: f64,
) -> Result<FockState> {
    if m1 == m2 {
        return Err(Error::SameMode(m1));
    }
    let i1 = state.mode_index(m1)?;
    let i2 = state.mode_index(m2)?;
    let terms = state
        .terms
        .iter()
        .map(|(o, a)| {
            let n = (o.0[i1] * o.0[i2]) as f64;
            (o.clone(), a * Complex64::from_polar(1.0, phi * n))
        })
        .collect();
    Ok(state.rebuilt(terms))
}

/// Polarizing beamsplitter between spatial ports `in1` and `in2`.
///
/// H photons are transmitted and stay on their spatial label; V photons are
/// reflected onto the other label, picking up a phase `i` each.
pub fn apply_pbs(state: &FockState, in1: u16, in2: u16) -> Result<FockState> {
    for s in [in1, in2] {
        if state.mode_index(ModeId::h(s)).is_err() || state.mode_index(ModeId::v(s)).is_err() {
            return Err(Error::MissingPolarization(s));
        }
    }
    apply_mode_unitary(state, ModeId::v(in1), ModeId::v(in2), &MIRROR)
}

/// Passive unitary on the (H, V) pair of one spatial mode, e.g. a waveplate.
pub fn apply_polarization_unitary(state: &FockState, spatial: u16, u: &Mat2) -> Result<FockState> {
    let (h, v) = (ModeId::h(spatial), ModeId::v(spatial));
    if state.mode_index(h).is_err() || state.mode_index(v).is_err() {
        return Err(Error::MissingPolarization(spatial));
    }
    apply_mode_unitary(state, h, v, u)
}

/// `a†_m`. Fails if any resulting term would exceed the cutoff.
pub fn creation(state: &FockState, mode: ModeId) -> Result<FockState> {
    let idx = state.mode_index(mode)?;
    let mut terms = BTreeMap::new();
    for (o, a) in &state.terms {
        let total = o.total() + 1;
        if total > state.cutoff {
            return Err(Error::CutoffExceeded {
                count: total,
                cutoff: state.cutoff,
            });
        }
        let mut counts = o.0.clone();
        counts[idx] += 1;
        let factor = (counts[idx] as f64).sqrt();
        terms.insert(Occupation(counts), a * factor);
    }
    let mut out = state.rebuilt(terms);
    out.normalized = false;
    Ok(out)
}

/// `a_m`. Annihilating the vacuum yields the (flagged) zero vector.
pub fn annihilation(state: &FockState, mode: ModeId) -> Result<FockState> {
    let idx = state.mode_index(mode)?;
    let mut terms = BTreeMap::new();
    for (o, a) in &state.terms {
        let n = o.0[idx];
        if n == 0 {
            continue;
        }
        let mut counts = o.0.clone();
        counts[idx] = n - 1;
        terms.insert(Occupation(counts), a * (n as f64).sqrt());
    }
    let mut out = state.rebuilt(terms);
    out.normalized = false;
    Ok(out)
}

/// Matrix of `U_BS` on the `n`-photon block of two path modes, in the basis
/// `|n, 0⟩, |n−1, 1⟩, …, |0, n⟩`; column `j` is the image of basis state `j`.
pub fn bs_block_matrix(params: BsParams, n: u32) -> Result<DMatrix<Complex64>> {
    let (a, b) = (ModeId::path(0), ModeId::path(1));
    let dim = n as usize + 1;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        let k = j as u32;
        let input = FockState::basis(vec![a, b], &[n - k, k], n.max(1))?;
        let out = apply_beamsplitter(&input, a, b, params)?;
        for i in 0..dim {
            let l = i as u32;
            m[(i, j)] = out.amplitude(&[n - l, l]);
        }
    }
    Ok(m)
}

/// Independent reference for [`bs_block_matrix`] at `Φ = π/2`:
/// `exp(iθ(a†b + ab†))` on the `n`-photon block, from the eigendecomposition
/// of the real symmetric generator.
pub fn hamiltonian_block_exp(theta: f64, n: u32) -> DMatrix<Complex64> {
    let dim = n as usize + 1;
    // a†b |n−k, k⟩ = √((n−k+1)k) |n−k+1, k−1⟩
    let mut g = DMatrix::<f64>::zeros(dim, dim);
    for k in 1..dim {
        let v = (((n as usize - k + 1) * k) as f64).sqrt();
        g[(k - 1, k)] = v;
        g[(k, k - 1)] = v;
    }
    let eig = SymmetricEigen::new(g);
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, theta * l)));
    &v * d * v.transpose()
}
