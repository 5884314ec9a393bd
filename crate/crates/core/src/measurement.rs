//! Photon counting on Fock states: Born-rule distributions, post-selection,
//! seeded sampling, the HBT `g²(0)` and the strong-local-oscillator homodyne
//! mean.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{apply_beamsplitter, BsParams, FockState, ModeId, Occupation};

/// Constraint on a single detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Exact(u32),
    Any,
}

/// Heralding condition: per-mode exact counts or wildcards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionPattern {
    constraints: Vec<(ModeId, Count)>,
}

impl DetectionPattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn exact(mut self, mode: ModeId, n: u32) -> Self {
        self.constraints.push((mode, Count::Exact(n)));
        self
    }

    pub fn any(mut self, mode: ModeId) -> Self {
        self.constraints.push((mode, Count::Any));
        self
    }

    pub fn constraints(&self) -> &[(ModeId, Count)] {
        &self.constraints
    }
}

/// Joint photon-count probabilities over a list of measured modes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    modes: Vec<ModeId>,
    entries: BTreeMap<Occupation, f64>,
}

impl OutcomeDistribution {
    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Occupation, f64)> {
        self.entries.iter().map(|(o, p)| (o, *p))
    }

    pub fn probability(&self, counts: &[u32]) -> f64 {
        self.entries
            .get(&Occupation::from(counts))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inverse-CDF draw over the outcomes in ascending occupation order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Occupation {
        let u: f64 = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        let mut last = None;
        for (o, p) in &self.entries {
            acc += p;
            last = Some(o);
            if u < acc {
                return o.clone();
            }
        }
        // u landed in the rounding slack above the final partial sum
        last.cloned().unwrap_or_else(|| Occupation::new(Vec::new()))
    }
}

fn indices(state: &FockState, modes: &[ModeId]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(modes.len());
    for m in modes {
        let i = state.mode_index(*m)?;
        if out.contains(&i) {
            return Err(Error::DuplicateMode(*m));
        }
        out.push(i);
    }
    Ok(out)
}

/// Born-rule distribution of photon counts on `measured`, marginalizing all
/// other modes.
pub fn photon_distribution(state: &FockState, measured: &[ModeId]) -> Result<OutcomeDistribution> {
    state.check_normalized()?;
    let idx = indices(state, measured)?;
    let mut entries: BTreeMap<Occupation, f64> = BTreeMap::new();
    for (o, a) in state.terms() {
        let key: Vec<u32> = idx.iter().map(|&i| o.counts()[i]).collect();
        *entries.entry(Occupation::new(key)).or_insert(0.0) += a.norm_sqr();
    }
    Ok(OutcomeDistribution {
        modes: measured.to_vec(),
        entries,
    })
}

/// Unnormalized branch selected by `pattern`, expressed over the modes not
/// fixed by an exact count (wildcard modes stay in the state).
pub fn project(state: &FockState, pattern: &DetectionPattern) -> Result<FockState> {
    let mut fixed = Vec::new();
    for (m, count) in pattern.constraints() {
        let i = state.mode_index(*m)?;
        if let Count::Exact(n) = count {
            fixed.push((i, *n));
        }
    }
    let keep: Vec<usize> = (0..state.modes().len())
        .filter(|i| !fixed.iter().any(|(j, _)| j == i))
        .collect();
    let remaining: Vec<ModeId> = keep.iter().map(|&i| state.modes()[i]).collect();
    let terms: Vec<(Vec<u32>, Complex64)> = state
        .terms()
        .filter(|(o, _)| fixed.iter().all(|&(i, n)| o.counts()[i] == n))
        .map(|(o, a)| (keep.iter().map(|&i| o.counts()[i]).collect(), *a))
        .collect();
    FockState::from_terms(remaining, terms, state.cutoff())
}

/// Conditional state after observing `pattern`, and the probability of the
/// observation. A zero-probability pattern yields probability 0 and an empty,
/// flagged-unnormalized state.
pub fn post_select(state: &FockState, pattern: &DetectionPattern) -> Result<(FockState, f64)> {
    state.check_normalized()?;
    let branch = project(state, pattern)?;
    let p = branch.norm_sqr();
    if branch.is_zero() {
        return Ok((branch, 0.0));
    }
    Ok((branch.normalize()?.0, p))
}

/// One seeded draw from [`photon_distribution`].
pub fn sample_counts(state: &FockState, measured: &[ModeId], seed: u64) -> Result<Occupation> {
    let dist = photon_distribution(state, measured)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(dist.sample(&mut rng))
}

fn single_mode(state: &FockState) -> Result<()> {
    if state.modes().len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "expected a single-mode state, got {} modes",
            state.modes().len()
        )));
    }
    state.check_normalized()
}

/// `⟨a†a†aa⟩ / ⟨a†a⟩²` evaluated on the Fock expansion.
pub fn g2_direct(state: &FockState) -> Result<f64> {
    single_mode(state)?;
    let (mut n1, mut n2) = (0.0, 0.0);
    for (o, a) in state.terms() {
        let n = o.counts()[0] as f64;
        let p = a.norm_sqr();
        n1 += p * n;
        n2 += p * n * (n - 1.0);
    }
    if n1 == 0.0 {
        return Err(Error::InvalidParameter("g2 of the vacuum is undefined".into()));
    }
    Ok(n2 / (n1 * n1))
}

/// HBT geometry: the mode and a vacuum enter a 50:50 beamsplitter and the
/// normalized coincidence `⟨n_a' n_b'⟩ / (⟨n_a'⟩⟨n_b'⟩)` is evaluated exactly.
pub fn g2_hbt(state: &FockState) -> Result<f64> {
    single_mode(state)?;
    let signal = state.modes()[0];
    let idler = ModeId::new(signal.spatial.wrapping_add(1), signal.polarization);
    let joint = state.with_vacuum_modes(&[idler])?;
    let out = apply_beamsplitter(&joint, signal, idler, BsParams::symmetric())?;
    let (mut na, mut nb, mut nab) = (0.0, 0.0, 0.0);
    for (o, a) in out.terms() {
        let p = a.norm_sqr();
        let (x, y) = (o.counts()[0] as f64, o.counts()[1] as f64);
        na += p * x;
        nb += p * y;
        nab += p * x * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidParameter("g2 of the vacuum is undefined".into()));
    }
    Ok(nab / (na * nb))
}

/// Zero-delay second-order correlation, from the HBT coincidence rate.
pub fn g2_zero(state: &FockState) -> Result<f64> {
    let hbt = g2_hbt(state)?;
    let direct = g2_direct(state)?;
    debug_assert!(
        (hbt - direct).abs() <= 1e-9 * direct.abs().max(1.0),
        "HBT {hbt} and ladder-operator {direct} g2 disagree"
    );
    Ok(hbt)
}

/// `⟨a⟩` of a single-mode state.
pub fn mean_field(state: &FockState) -> Result<Complex64> {
    single_mode(state)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (o, a) in state.terms() {
        let n = o.counts()[0];
        if n == 0 {
            continue;
        }
        let lower = state.amplitude(&[n - 1]);
        acc += lower.conj() * a * (n as f64).sqrt();
    }
    Ok(acc)
}

/// Balanced-homodyne difference current in the strong local-oscillator
/// limit: `2|α_LO| ⟨X cos(φ+π/2) + Y sin(φ+π/2)⟩` with `X = (a+a†)/2`,
/// `Y = (a−a†)/2i`. Note the vacuum variance of `X` is 1/4 here, unlike the
/// `x = √2 X` convention of the Gaussian engine.
pub fn homodyne_mean(state: &FockState, phi: f64, lo_amplitude: f64) -> Result<f64> {
    if lo_amplitude.is_nan() || lo_amplitude <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "local oscillator amplitude must be positive, got {lo_amplitude}"
        )));
    }
    let a = mean_field(state)?;
    let (x, y) = (a.re, a.im);
    let angle = phi + FRAC_PI_2;
    Ok(2.0 * lo_amplitude * (x * angle.cos() + y * angle.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_CUTOFF;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn modes2() -> Vec<ModeId> {
        vec![ModeId::path(0), ModeId::path(1)]
    }

    fn split_photon(theta: f64) -> FockState {
        let s = FockState::basis(modes2(), &[1, 0], DEFAULT_CUTOFF).unwrap();
        apply_beamsplitter(&s, ModeId::path(0), ModeId::path(1), BsParams::with_theta(theta)).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let i = Complex64::new(0.0, FRAC_1_SQRT_2);
        let hom = FockState::from_terms(modes2(), [(vec![2, 0], i), (vec![0, 2], i)], DEFAULT_CUTOFF)
            .unwrap();
        let d = photon_distribution(&hom, &modes2()).unwrap();
        assert_abs_diff_eq!(d.probability(&[2, 0]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probability(&[0, 2]), 0.5, epsilon = 1e-15);
        assert_eq!(d.len(), 2);

        let one = FockState::basis(modes2(), &[1, 0], DEFAULT_CUTOFF).unwrap();
        let d = photon_distribution(&one, &modes2()).unwrap();
        assert_eq!(d.probability(&[1, 0]), 1.0);

        let theta = 0.3f64;
        let d = photon_distribution(&split_photon(theta), &modes2()).unwrap();
        assert_abs_diff_eq!(d.probability(&[1, 0]), theta.cos().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(d.probability(&[0, 1]), theta.sin().powi(2), epsilon = 1e-15);
    }

    #[test]
    fn marginal_distribution() {
        let d = photon_distribution(&split_photon(0.3), &[ModeId::path(1)]).unwrap();
        assert_abs_diff_eq!(d.probability(&[1]), 0.3f64.sin().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unnormalized_input_rejected() {
        let s = FockState::basis(modes2(), &[1, 0], DEFAULT_CUTOFF)
            .unwrap()
            .scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(
            photon_distribution(&s, &modes2()),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn post_select_examples() {
        let theta = 0.4f64;
        let pat = DetectionPattern::new().exact(ModeId::path(1), 1);
        let (cond, p) = post_select(&split_photon(theta), &pat).unwrap();
        assert_eq!(cond.modes(), &[ModeId::path(0)]);
        assert_abs_diff_eq!(p, theta.sin().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(cond.amplitude(&[0]).norm(), 1.0, epsilon = 1e-15);

        let none = DetectionPattern::new().exact(ModeId::path(1), 3);
        let (cond, p) = post_select(&split_photon(theta), &none).unwrap();
        assert_eq!(p, 0.0);
        assert!(cond.is_zero() && !cond.is_flagged_normalized());

        let s = FockState::basis(modes2(), &[2, 0], DEFAULT_CUTOFF).unwrap();
        let s = apply_beamsplitter(&s, ModeId::path(0), ModeId::path(1), BsParams::with_theta(theta))
            .unwrap();
        let (cond, p) = post_select(&s, &pat).unwrap();
        let (c, sn) = (theta.cos(), theta.sin());
        assert_abs_diff_eq!(p, 2.0 * c * c * sn * sn, epsilon = 1e-15);
        assert_abs_diff_eq!(cond.amplitude(&[1]).norm(), 1.0, epsilon = 1e-15);

        let bad = DetectionPattern::new().exact(ModeId::path(9), 1);
        assert!(post_select(&s, &bad).is_err());
    }

    #[test]
    fn wildcard_modes_stay() {
        let pat = DetectionPattern::new().any(ModeId::path(0)).exact(ModeId::path(1), 0);
        let (cond, p) = post_select(&split_photon(0.2), &pat).unwrap();
        assert_eq!(cond.modes(), &[ModeId::path(0)]);
        assert_abs_diff_eq!(p, 0.2f64.cos().powi(2), epsilon = 1e-15);
    }

    #[test]
    fn sampling_is_deterministic() {
        let one = FockState::basis(modes2(), &[1, 0], DEFAULT_CUTOFF).unwrap();
        for seed in 0..20 {
            assert_eq!(sample_counts(&one, &modes2(), seed).unwrap().counts(), &[1, 0]);
        }
        let s = split_photon(std::f64::consts::FRAC_PI_4);
        assert_eq!(
            sample_counts(&s, &modes2(), 99).unwrap(),
            sample_counts(&s, &modes2(), 99).unwrap()
        );
    }

    #[test]
    fn g2_fock_and_vacuum() {
        let m = vec![ModeId::path(0)];
        let one = FockState::basis(m.clone(), &[1], DEFAULT_CUTOFF).unwrap();
        assert_abs_diff_eq!(g2_zero(&one).unwrap(), 0.0, epsilon = 1e-15);
        let two = FockState::basis(m.clone(), &[2], DEFAULT_CUTOFF).unwrap();
        assert_abs_diff_eq!(g2_zero(&two).unwrap(), 0.5, epsilon = 1e-14);
        let vac = FockState::vacuum(m, DEFAULT_CUTOFF).unwrap();
        assert!(g2_zero(&vac).is_err());
    }

    #[test]
    fn homodyne_examples() {
        let m = ModeId::path(0);
        let vac = FockState::vacuum(vec![m], DEFAULT_CUTOFF).unwrap();
        assert_eq!(homodyne_mean(&vac, 0.3, 5.0).unwrap(), 0.0);
        let beta = 0.8;
        let coh = FockState::coherent(m, Complex64::new(beta, 0.0), 14).unwrap();
        let lo = 3.0;
        assert_abs_diff_eq!(
            homodyne_mean(&coh, -FRAC_PI_2, lo).unwrap(),
            2.0 * lo * beta,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(homodyne_mean(&coh, 0.0, lo).unwrap(), 0.0, epsilon = 1e-6);
        assert!(homodyne_mean(&coh, 0.0, 0.0).is_err());
    }
}
