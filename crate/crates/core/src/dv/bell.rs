use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{pol_pair, SPATIAL_A, SPATIAL_B};
use crate::error::{Error, Result};
use crate::fock::{apply_beamsplitter, apply_pbs, BsParams, FockState, ModeId, DEFAULT_CUTOFF};
use crate::measurement::{photon_distribution, project, DetectionPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
        }
    }
}

/// Verdict of the linear-optical Bell analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BellClass {
    PhiMinus,
    PhiPlus,
    Ambiguous,
}

impl BellClass {
    pub fn name(self) -> &'static str {
        match self {
            BellClass::PhiMinus => "phi-",
            BellClass::PhiPlus => "phi+",
            BellClass::Ambiguous => "ambiguous",
        }
    }
}

/// The four detectors behind the two analyzer PBSs. `D1V`/`D4H` watch the
/// first beamsplitter output, `D3V`/`D2H` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detector {
    D1V,
    D2H,
    D3V,
    D4H,
}

impl Detector {
    pub const ALL: [Detector; 4] = [Detector::D1V, Detector::D2H, Detector::D3V, Detector::D4H];

    pub fn name(self) -> &'static str {
        match self {
            Detector::D1V => "D1V",
            Detector::D2H => "D2H",
            Detector::D3V => "D3V",
            Detector::D4H => "D4H",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BellOutcome {
    pub classification: BellClass,
    /// Fired detectors and their photon counts.
    pub signature: BTreeMap<Detector, u32>,
}

impl BellOutcome {
    pub fn from_signature(signature: BTreeMap<Detector, u32>) -> Self {
        Self {
            classification: classify(&signature),
            signature,
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.classification.name())?;
        for (i, (d, n)) in self.signature.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}:{n}")?;
        }
        write!(f, "}}")
    }
}

/// Counts-based classification: one photon each at {D1V, D2H} or
/// {D3V, D4H} is φ−, one each at {D1V, D4H} or {D3V, D2H} is φ+, anything
/// else is ambiguous.
pub fn classify(signature: &BTreeMap<Detector, u32>) -> BellClass {
    use Detector::*;
    let fired: Vec<Detector> = signature
        .iter()
        .filter(|(_, n)| **n > 0)
        .map(|(d, _)| *d)
        .collect();
    if fired.len() != 2 || fired.iter().any(|d| signature[d] != 1) {
        return BellClass::Ambiguous;
    }
    match (fired[0], fired[1]) {
        (D1V, D2H) | (D3V, D4H) => BellClass::PhiMinus,
        (D1V, D4H) | (D2H, D3V) => BellClass::PhiPlus,
        _ => BellClass::Ambiguous,
    }
}

fn bell_modes() -> Vec<ModeId> {
    let mut m = pol_pair(SPATIAL_A).to_vec();
    m.extend(pol_pair(SPATIAL_B));
    m
}

/// Polarization Bell state on modes `(a_H, a_V, b_H, b_V)`.
pub fn bell_state(kind: BellKind) -> FockState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let terms = match kind {
        BellKind::PsiPlus => [(vec![1, 0, 1, 0], h), (vec![0, 1, 0, 1], h)],
        BellKind::PsiMinus => [(vec![1, 0, 1, 0], h), (vec![0, 1, 0, 1], -h)],
        BellKind::PhiPlus => [(vec![1, 0, 0, 1], h), (vec![0, 1, 1, 0], h)],
        BellKind::PhiMinus => [(vec![1, 0, 0, 1], h), (vec![0, 1, 1, 0], -h)],
    };
    FockState::from_terms(bell_modes(), terms, DEFAULT_CUTOFF).expect("Bell modes are valid")
}

fn require_pol_pairs(state: &FockState, spatial: &[u16]) -> Result<()> {
    for &s in spatial {
        for m in pol_pair(s) {
            if state.mode_index(m).is_err() {
                return Err(Error::MissingPolarization(s));
            }
        }
    }
    Ok(())
}

/// Polarization-independent 50:50 beamsplitter between spatial modes `a`
/// and `b`.
pub fn bell_transform(state: &FockState) -> Result<FockState> {
    require_pol_pairs(state, &[SPATIAL_A, SPATIAL_B])?;
    let bs = BsParams::symmetric();
    let s = apply_beamsplitter(state, ModeId::h(SPATIAL_A), ModeId::h(SPATIAL_B), bs)?;
    apply_beamsplitter(&s, ModeId::v(SPATIAL_A), ModeId::v(SPATIAL_B), bs)
}

/// One detection pattern of the analyzer.
#[derive(Debug, Clone, PartialEq)]
pub struct BellBranch {
    pub outcome: BellOutcome,
    pub probability: f64,
    /// Unnormalized state of every mode outside the analyzer, conditioned on
    /// this pattern.
    pub remainder: FockState,
}

/// Routes two beamsplitter output arms through a PBS each and counts
/// photons on `D1V`, `D2H`, `D3V`, `D4H`.
///
/// `arm1` feeds `D1V` (reflected V) and `D4H` (transmitted H); `arm2` feeds
/// `D3V` and `D2H`. Returns every pattern with nonzero probability, in
/// ascending occupation order.
pub fn analyze_bell_arms(state: &FockState, arm1: u16, arm2: u16) -> Result<Vec<BellBranch>> {
    state.check_normalized()?;
    require_pol_pairs(state, &[arm1, arm2])?;
    let top = state.modes().iter().map(|m| m.spatial).max().unwrap_or(0);
    let (anc1, anc2) = (top + 1, top + 2);
    let mut ancillas = pol_pair(anc1).to_vec();
    ancillas.extend(pol_pair(anc2));
    let s = state.with_vacuum_modes(&ancillas)?;
    let s = apply_pbs(&s, arm1, anc1)?;
    let s = apply_pbs(&s, arm2, anc2)?;

    let detectors = [
        (Detector::D1V, ModeId::v(anc1)),
        (Detector::D2H, ModeId::h(arm2)),
        (Detector::D3V, ModeId::v(anc2)),
        (Detector::D4H, ModeId::h(arm1)),
    ];
    // ports the PBSs leave empty
    let dark = [
        ModeId::v(arm1),
        ModeId::h(anc1),
        ModeId::v(arm2),
        ModeId::h(anc2),
    ];
    let measured: Vec<ModeId> = detectors.iter().map(|(_, m)| *m).collect();
    let dist = photon_distribution(&s, &measured)?;
    let mut branches = Vec::with_capacity(dist.len());
    for (occ, p) in dist.entries() {
        let mut pattern = DetectionPattern::new();
        let mut signature = BTreeMap::new();
        for ((det, mode), n) in detectors.iter().zip(occ.counts()) {
            pattern = pattern.exact(*mode, *n);
            if *n > 0 {
                signature.insert(*det, *n);
            }
        }
        for m in dark {
            pattern = pattern.exact(m, 0);
        }
        let remainder = project(&s, &pattern)?;
        debug_assert!((remainder.norm_sqr() - p).abs() < 1e-12, "PBS left light in a dark port");
        branches.push(BellBranch {
            outcome: BellOutcome::from_signature(signature),
            probability: p,
            remainder,
        });
    }
    Ok(branches)
}

/// Exact output statistics of a Bell measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BellTable {
    pub patterns: Vec<(BellOutcome, f64)>,
    pub class_probabilities: BTreeMap<BellClass, f64>,
}

impl BellTable {
    fn from_branches(branches: &[BellBranch]) -> Self {
        let mut class_probabilities: BTreeMap<BellClass, f64> = [
            (BellClass::PhiMinus, 0.0),
            (BellClass::PhiPlus, 0.0),
            (BellClass::Ambiguous, 0.0),
        ]
        .into_iter()
        .collect();
        for b in branches {
            *class_probabilities.entry(b.outcome.classification).or_default() += b.probability;
        }
        Self {
            patterns: branches
                .iter()
                .map(|b| (b.outcome.clone(), b.probability))
                .collect(),
            class_probabilities,
        }
    }

    pub fn probability(&self, class: BellClass) -> f64 {
        self.class_probabilities.get(&class).copied().unwrap_or(0.0)
    }
}

pub(crate) fn sample_index<R: Rng>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let total: f64 = weights.clone().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Full linear-optical Bell measurement (beamsplitter, two PBSs, four
/// detectors) on a two-photon polarization state over `(a_H, a_V, b_H, b_V)`.
/// Returns one seeded sample and the exact table it was drawn from.
pub fn bell_measure(state: &FockState, seed: u64) -> Result<(BellOutcome, BellTable)> {
    require_pol_pairs(state, &[SPATIAL_A, SPATIAL_B])?;
    if state.modes().len() != 4 {
        return Err(Error::InvalidParameter(format!(
            "Bell measurement expects 4 polarization modes, got {}",
            state.modes().len()
        )));
    }
    for (o, _) in state.terms() {
        if o.total() != 2 {
            return Err(Error::PhotonNumber {
                expected: 2,
                found: o.total(),
            });
        }
    }
    let branches = analyze_bell_arms(&bell_transform(state)?, SPATIAL_A, SPATIAL_B)?;
    let table = BellTable::from_branches(&branches);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = sample_index(branches.iter().map(|b| b.probability), &mut rng);
    Ok((branches[pick].outcome.clone(), table))
}
