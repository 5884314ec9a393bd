//! Gaussian states in the covariance-matrix picture.
//!
//! Quadratures obey `[x, p] = i`, so the vacuum has covariance `½I`.
//! Phase-space vectors are ordered `(x₁, p₁, …, xₙ, pₙ)` and
//! `σ_ij = ½⟨{ΔR_i, ΔR_j}⟩`. The homodyne observable of
//! [`crate::measurement`] uses `X = (a + a†)/2` instead; the two are related
//! by `x = √2·X` and are never mixed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use nalgebra::{Cholesky, DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use dashu_float::ops::SquareRoot;
use dashu_float::FBig;

use crate::error::{Error, Result};

/// Symmetry tolerance for covariance matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest admissible eigenvalue of `σ + (i/2)Ω`.
pub const PHYSICALITY_TOLERANCE: f64 = -1e-10;
/// Tolerance on `SΩSᵀ = Ω`.
pub const SYMPLECTIC_TOLERANCE: f64 = 1e-12;

/// `Ω = ⊕ [[0, 1], [−1, 0]]` over `n` modes.
pub fn omega(n: usize) -> Result<DMatrix<f64>> {
    if n < 1 {
        return Err(Error::InvalidParameter("omega needs at least one mode".into()));
    }
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    /// Offset inside a mode's `(x, p)` pair.
    pub fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    /// `Π = diag(1, 0)` for X, `Π′ = diag(0, 1)` for P.
    pub fn projector(self) -> Matrix2<f64> {
        match self {
            Quadrature::X => Matrix2::new(1.0, 0.0, 0.0, 0.0),
            Quadrature::P => Matrix2::new(0.0, 0.0, 0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        }
    }
}

/// Result of the eigenvalue test on `σ + (i/2)Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    pub min_eigenvalue: f64,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
        return Err(Error::Dimension {
            expected: 2 * (m.nrows() / 2).max(1),
            got: m.nrows(),
        });
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(())
}

/// Physicality test for a covariance matrix: the Hermitian matrix
/// `σ + (i/2)Ω` must be positive semidefinite.
pub fn is_physical(cov: &DMatrix<f64>) -> Result<Physicality> {
    check_symmetric(cov)?;
    let om = omega(cov.nrows() / 2)?;
    let h = DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| {
        Complex64::new(cov[(i, j)], 0.5 * om[(i, j)])
    });
    let min_eigenvalue = SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(Physicality {
        physical: min_eigenvalue >= PHYSICALITY_TOLERANCE,
        min_eigenvalue,
    })
}

/// A Gaussian state: mean vector and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates dimensions, symmetry and physicality.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&cov)?;
        if mean.len() != cov.nrows() {
            return Err(Error::Dimension {
                expected: cov.nrows(),
                got: mean.len(),
            });
        }
        let p = is_physical(&cov)?;
        if !p.physical {
            return Err(Error::Unphysical(p.min_eigenvalue));
        }
        Ok(Self { mean, cov })
    }

    pub fn from_cov(cov: DMatrix<f64>) -> Result<Self> {
        Self::new(DVector::zeros(cov.nrows()), cov)
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("a state needs at least one mode".into()));
        }
        Self::from_cov(DMatrix::identity(2 * n, 2 * n) * 0.5)
    }

    /// Single-mode vacuum squeezed in `x` (`s > 0`) or `p` (`s < 0`).
    pub fn squeezed_vacuum(s: f64) -> Result<Self> {
        let c = 0.5 * (-2.0 * s).exp();
        let d = 0.5 * (2.0 * s).exp();
        Self::from_cov(DMatrix::from_row_slice(2, 2, &[c, 0.0, 0.0, d]))
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// 2×2 block `(i, j)` of the covariance matrix.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn physicality(&self) -> Physicality {
        is_physical(&self.cov).expect("covariance validated at construction")
    }

    /// Direct sum of two states, `self` first.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (n1, n2) = (self.cov.nrows(), other.cov.nrows());
        let mut cov = DMatrix::zeros(n1 + n2, n1 + n2);
        cov.view_mut((0, 0), (n1, n1)).copy_from(&self.cov);
        cov.view_mut((n1, n1), (n2, n2)).copy_from(&other.cov);
        let mean = DVector::from_iterator(
            n1 + n2,
            self.mean.iter().chain(other.mean.iter()).copied(),
        );
        GaussianState { mean, cov }
    }

    /// Second moment `⟨(Σ_k w_k R_k)²⟩` minus the squared mean, i.e. the
    /// variance of a linear combination of quadratures.
    pub fn variance_of(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.cov.nrows() {
            return Err(Error::Dimension {
                expected: self.cov.nrows(),
                got: weights.len(),
            });
        }
        let w = DVector::from_column_slice(weights);
        Ok((w.transpose() * &self.cov * &w)[(0, 0)])
    }
}

/// A symplectic matrix acting on `matrix.nrows() / 2` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
}

impl SymplecticOp {
    /// Checks `SΩSᵀ = Ω`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::Dimension {
                expected: 2 * (matrix.nrows() / 2).max(1),
                got: matrix.nrows(),
            });
        }
        let err = symplectic_error(&matrix)?;
        if err > SYMPLECTIC_TOLERANCE {
            return Err(Error::NotSymplectic(err));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `self · other`, i.e. `other` first.
    pub fn compose(&self, other: &SymplecticOp) -> Result<SymplecticOp> {
        if self.matrix.nrows() != other.matrix.nrows() {
            return Err(Error::Dimension {
                expected: self.matrix.nrows(),
                got: other.matrix.nrows(),
            });
        }
        SymplecticOp::new(&self.matrix * &other.matrix)
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &SymplecticOp) -> SymplecticOp {
        let (n1, n2) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(&self.matrix);
        m.view_mut((n1, n1), (n2, n2)).copy_from(&other.matrix);
        SymplecticOp { matrix: m }
    }
}

/// Max-entry deviation of `SΩSᵀ` from `Ω`.
pub fn symplectic_error(s: &DMatrix<f64>) -> Result<f64> {
    let om = omega(s.nrows() / 2)?;
    Ok((s * &om * s.transpose() - om).abs().max())
}

/// The phase matrix `S_P = [[cosΦ, sinΦ], [−sinΦ, cosΦ]]`.
pub fn symplectic_phase(phi: f64) -> SymplecticOp {
    let (s, c) = phi.sin_cos();
    SymplecticOp {
        matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
    }
}

/// `diag(e^{−s}, e^{s})`.
pub fn symplectic_squeeze(s: f64) -> SymplecticOp {
    SymplecticOp {
        matrix: DMatrix::from_row_slice(2, 2, &[(-s).exp(), 0.0, 0.0, s.exp()]),
    }
}

/// `S_BS = [[cosθ·I, sinθ·S_P], [−sinθ·S_Pᵀ, cosθ·I]]`.
pub fn symplectic_bs(theta: f64, phi: f64) -> SymplecticOp {
    let (s, c) = theta.sin_cos();
    let sp = symplectic_phase(phi).matrix;
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&(DMatrix::identity(2, 2) * c));
    m.view_mut((0, 2), (2, 2)).copy_from(&(&sp * s));
    m.view_mut((2, 0), (2, 2)).copy_from(&(sp.transpose() * -s));
    m.view_mut((2, 2), (2, 2)).copy_from(&(DMatrix::identity(2, 2) * c));
    SymplecticOp { matrix: m }
}

/// Applies `S` to the listed modes (in order): `σ → SσSᵀ`, `R̄ → SR̄`.
pub fn apply_symplectic(state: &GaussianState, op: &SymplecticOp, modes: &[usize]) -> Result<GaussianState> {
    let n = state.n_modes();
    if modes.len() != op.n_modes() {
        return Err(Error::Dimension {
            expected: op.n_modes(),
            got: modes.len(),
        });
    }
    for (i, &m) in modes.iter().enumerate() {
        if m >= n {
            return Err(Error::InvalidParameter(format!("mode {m} out of range for {n} modes")));
        }
        if modes[..i].contains(&m) {
            return Err(Error::InvalidParameter(format!("mode {m} listed twice")));
        }
    }
    let err = symplectic_error(&op.matrix)?;
    if err > SYMPLECTIC_TOLERANCE {
        return Err(Error::NotSymplectic(err));
    }
    let mut full = DMatrix::identity(2 * n, 2 * n);
    for (a, &ma) in modes.iter().enumerate() {
        for (b, &mb) in modes.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    full[(2 * ma + i, 2 * mb + j)] = op.matrix[(2 * a + i, 2 * b + j)];
                }
            }
        }
    }
    let cov = &full * &state.cov * full.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState {
        mean: &full * &state.mean,
        cov,
    })
}

fn tmsv_blocks<T: Real>(r: T) -> [[T; 4]; 4] {
    // Build both blocks from one exponential so that A − |C| is exactly ½e^{−2r}.
    let quarter = T::from_f64(0.25);
    let e = (r.clone() + r).exp();
    let ei = T::from_f64(1.0) / e.clone();
    let a = quarter.clone() * (e.clone() + ei.clone());
    let c = quarter * (e - ei);
    let z = T::from_f64(0.0);
    [
        [a.clone(), z.clone(), -c.clone(), z.clone()],
        [z.clone(), a.clone(), z.clone(), c.clone()],
        [-c.clone(), z.clone(), a.clone(), z.clone()],
        [z.clone(), c, z, a],
    ]
}

/// Two-mode squeezed vacuum: `A = B = ½cosh(2r)I`,
/// `C = diag(−½sinh(2r), ½sinh(2r))`.
pub fn tmsv(r: f64) -> Result<GaussianState> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("squeezing must be finite and ≥ 0, got {r}")));
    }
    let b = tmsv_blocks::<f64>(r);
    GaussianState::from_cov(DMatrix::from_fn(4, 4, |i, j| b[i][j]))
}

/// EPR channel from two equally squeezed single-mode vacua.
///
/// Both inputs are squeezed in `x` and combined on `S_BS(π/4, π/2)`; a
/// quarter-turn `x_B → −p_B, p_B → x_B` on the output `B` then gives
/// [`tmsv`] exactly. Squeezing `x_a` and `p_b` as printed and combining them
/// on `S_BS(π/4, 0)` gives the same channel up to a π phase on `B`.
pub fn epr_from_squeezed(r: f64) -> Result<GaussianState> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("squeezing must be finite and ≥ 0, got {r}")));
    }
    let two = GaussianState::squeezed_vacuum(r)?.tensor(&GaussianState::squeezed_vacuum(r)?);
    let mixed = apply_symplectic(&two, &symplectic_bs(FRAC_PI_4, FRAC_PI_2), &[0, 1])?;
    apply_symplectic(&mixed, &symplectic_phase(-FRAC_PI_2), &[1])
}

/// Alice's local squeezing `s` on the mode she sends to Bob (mode 1).
pub fn squeeze_channel(channel: &GaussianState, s: f64) -> Result<GaussianState> {
    if channel.n_modes() != 2 {
        return Err(Error::Dimension {
            expected: 4,
            got: channel.cov.nrows(),
        });
    }
    apply_symplectic(channel, &symplectic_squeeze(s), &[1])
}

fn conditioning_parts(state: &GaussianState, mode: usize, q: Quadrature) -> Result<(usize, Vec<usize>, f64)> {
    let n = state.n_modes();
    if n < 2 {
        return Err(Error::InvalidParameter("conditioning needs at least two modes".into()));
    }
    if mode >= n {
        return Err(Error::InvalidParameter(format!("mode {mode} out of range for {n} modes")));
    }
    let k = 2 * mode + q.offset();
    let var = state.cov[(k, k)];
    if var.is_nan() || var <= 0.0 {
        return Err(Error::NonPositiveVariance(var));
    }
    let rest = (0..2 * n).filter(|i| i / 2 != mode).collect();
    Ok((k, rest, var))
}

/// State of the remaining modes after homodyning quadrature `q` of `mode`.
///
/// The covariance is the Schur complement `σ_R − σ_Rk σ_kk⁺ σ_kR`, which is
/// outcome independent; the mean is left at its prior value, as for the
/// ensemble average over outcomes. Use [`homodyne_condition_on`] for a
/// definite outcome.
pub fn homodyne_condition(state: &GaussianState, mode: usize, q: Quadrature) -> Result<GaussianState> {
    let (k, rest, var) = conditioning_parts(state, mode, q)?;
    let m = rest.len();
    let cov = DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (rest[i], rest[j]);
        state.cov[(a, b)] - state.cov[(a, k)] * state.cov[(k, b)] / var
    });
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean = DVector::from_fn(m, |i, _| state.mean[rest[i]]);
    Ok(GaussianState { mean, cov })
}

/// As [`homodyne_condition`], with the mean shifted by the observed value.
pub fn homodyne_condition_on(
    state: &GaussianState,
    mode: usize,
    q: Quadrature,
    outcome: f64,
) -> Result<GaussianState> {
    let (k, rest, var) = conditioning_parts(state, mode, q)?;
    let mut out = homodyne_condition(state, mode, q)?;
    let shift = outcome - state.mean[k];
    for (i, &a) in rest.iter().enumerate() {
        out.mean[i] += state.cov[(a, k)] * shift / var;
    }
    Ok(out)
}

/// Bob's reduced covariance `B − 2sech(2r)·CᵀΠC` after Alice homodynes `q`
/// on the squeezed TMSV channel, in closed form.
pub fn cv_qkd_closed_form(r: f64, s: f64, q: Quadrature) -> Matrix2<f64> {
    let ch = 0.5 * (2.0 * r).cosh();
    let sh = 0.5 * (2.0 * r).sinh();
    let b = Matrix2::new(ch * (-2.0 * s).exp(), 0.0, 0.0, ch * (2.0 * s).exp());
    let c = Matrix2::new(-sh * (-s).exp(), 0.0, 0.0, sh * s.exp());
    b - c.transpose() * q.projector() * c * (2.0 / (2.0 * r).cosh())
}

/// Field operations needed by the teleportation covariance map, so that it
/// can run both in `f64` and in extended precision.
trait Real:
    Clone
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

/// Working precision of the extended-precision path, in bits.
const WIDE_PRECISION: usize = 256;

type Wide = FBig;

impl Real for Wide {
    fn from_f64(v: f64) -> Self {
        FBig::try_from(v)
            .expect("finite input")
            .with_precision(WIDE_PRECISION)
            .value()
    }
    fn to_f64(&self) -> f64 {
        FBig::to_f64(self).value()
    }
    fn exp(&self) -> Self {
        FBig::exp(self)
    }
    fn sqrt(&self) -> Self {
        SquareRoot::sqrt(self)
    }
}

type M2<T> = [[T; 2]; 2];

fn m2_mul<T: Real>(a: &M2<T>, b: &M2<T>) -> M2<T> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone())
    })
}

fn m2_t<T: Real>(a: &M2<T>) -> M2<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].clone()))
}

fn m2_zip<T: Real>(a: &M2<T>, b: &M2<T>, f: impl Fn(T, T) -> T) -> M2<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(a[i][j].clone(), b[i][j].clone())))
}

/// Covariance picture of the teleportation protocol over modes
/// `(in, A, B)`: `S_BS(π/4, π/2)` on `(in, A)`, `x` homodyne on both
/// outputs, Bob's quarter-turn `x → −p, p → x`, then the displacement
/// `G·(m₁, m₂)`. The output covariance follows from exact conditioning and
/// the spread of the conditional mean over outcomes.
fn teleport_cov_generic<T: Real>(sigma_in: &M2<T>, ch: &[[T; 4]; 4], gain: T) -> Result<M2<T>> {
    let z = T::from_f64(0.0);
    let one = T::from_f64(1.0);
    let h = T::from_f64(0.5).sqrt();
    let mut sigma: [[T; 6]; 6] = std::array::from_fn(|_| std::array::from_fn(|_| z.clone()));
    for i in 0..2 {
        for j in 0..2 {
            sigma[i][j] = sigma_in[i][j].clone();
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            sigma[2 + i][2 + j] = ch[i][j].clone();
        }
    }
    let mut s: [[T; 6]; 6] = std::array::from_fn(|_| std::array::from_fn(|_| z.clone()));
    let bs = [
        [h.clone(), z.clone(), z.clone(), h.clone()],
        [z.clone(), h.clone(), -h.clone(), z.clone()],
        [z.clone(), h.clone(), h.clone(), z.clone()],
        [-h.clone(), z.clone(), z.clone(), h.clone()],
    ];
    for i in 0..4 {
        for j in 0..4 {
            s[i][j] = bs[i][j].clone();
        }
    }
    s[4][4] = one.clone();
    s[5][5] = one.clone();
    let dot = |a: &[T; 6], b: &[T; 6]| (0..6).fold(z.clone(), |acc, k| acc + a[k].clone() * b[k].clone());
    let sig_t: [[T; 6]; 6] = std::array::from_fn(|j| std::array::from_fn(|k| sigma[k][j].clone()));
    let tmp: [[T; 6]; 6] = std::array::from_fn(|i| std::array::from_fn(|j| dot(&s[i], &sig_t[j])));
    let out: [[T; 6]; 6] = std::array::from_fn(|i| std::array::from_fn(|j| dot(&tmp[i], &s[j])));
    let pick = |rows: [usize; 2], cols: [usize; 2]| -> M2<T> {
        std::array::from_fn(|i| std::array::from_fn(|j| out[rows[i]][cols[j]].clone()))
    };
    let (mi, bi) = ([0usize, 2], [4usize, 5]);
    let smm = pick(mi, mi);
    let sbm = pick(bi, mi);
    let sbb = pick(bi, bi);
    let det = smm[0][0].clone() * smm[1][1].clone() - smm[0][1].clone() * smm[1][0].clone();
    if det.partial_cmp(&z) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NonPositiveVariance(det.to_f64()));
    }
    let inv = [
        [smm[1][1].clone() / det.clone(), -smm[0][1].clone() / det.clone()],
        [-smm[1][0].clone() / det.clone(), smm[0][0].clone() / det],
    ];
    let k = m2_mul(&sbm, &inv);
    let cond = m2_zip(&sbb, &m2_mul(&k, &m2_t(&sbm)), |a, b| a - b);
    let rot = [[z.clone(), -one.clone()], [one, z]];
    let mut m = m2_mul(&rot, &k);
    m[0][0] = m[0][0].clone() + gain.clone();
    m[1][1] = m[1][1].clone() + gain;
    let spread = m2_mul(&m2_mul(&m, &smm), &m2_t(&m));
    let rotated = m2_mul(&m2_mul(&rot, &cond), &m2_t(&rot));
    Ok(m2_zip(&rotated, &spread, |a, b| a + b))
}

fn validate_teleport_inputs(sigma_in: &Matrix2<f64>, gain: f64) -> Result<()> {
    if !gain.is_finite() || gain <= 0.0 {
        return Err(Error::InvalidParameter(format!("gain must be positive, got {gain}")));
    }
    let input = DMatrix::from_fn(2, 2, |i, j| sigma_in[(i, j)]);
    let p = is_physical(&input)?;
    if !p.physical {
        return Err(Error::Unphysical(p.min_eigenvalue));
    }
    Ok(())
}

fn widen(m: &Matrix2<f64>) -> M2<Wide> {
    std::array::from_fn(|i| std::array::from_fn(|j| Wide::from_f64(m[(i, j)])))
}

fn narrow(m: &M2<Wide>) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| Real::to_f64(&m[i][j]))
}

/// The `G = √2` gain of the ideal protocol, exact in the working precision
/// rather than rounded through `f64`.
fn wide_gain(gain: f64) -> Wide {
    if gain == SQRT_2 {
        Real::sqrt(&Wide::from_f64(2.0))
    } else {
        Wide::from_f64(gain)
    }
}

/// Output covariance of CV teleportation of an input with covariance
/// `sigma_in` through a two-mode `channel` (Alice holds mode 0, Bob mode 1)
/// with gain `G`. Evaluated in 256-bit arithmetic.
pub fn cv_teleport_cov(sigma_in: &Matrix2<f64>, channel: &GaussianState, gain: f64) -> Result<Matrix2<f64>> {
    validate_teleport_inputs(sigma_in, gain)?;
    if channel.n_modes() != 2 {
        return Err(Error::Dimension {
            expected: 4,
            got: channel.cov.nrows(),
        });
    }
    let ch: [[Wide; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| Wide::from_f64(channel.cov[(i, j)])));
    Ok(narrow(&teleport_cov_generic(&widen(sigma_in), &ch, wide_gain(gain))?))
}

/// [`cv_teleport_cov`] through `tmsv(r)`, with the channel itself built in
/// 256-bit arithmetic. Rounding the channel entries to `f64` first destroys
/// the `e^{−2r}` noise term once `cosh(2r)` approaches `1e8`, and `r = 20`
/// needs about 120 significant bits.
pub fn cv_teleport_cov_tmsv(sigma_in: &Matrix2<f64>, r: f64, gain: f64) -> Result<Matrix2<f64>> {
    validate_teleport_inputs(sigma_in, gain)?;
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("squeezing must be finite and ≥ 0, got {r}")));
    }
    let ch = tmsv_blocks(Wide::from_f64(r));
    Ok(narrow(&teleport_cov_generic(&widen(sigma_in), &ch, wide_gain(gain))?))
}

/// Same map evaluated directly as the linear transform
/// `x_out = −p_B + G(x_in + p_A)/√2`, `p_out = x_B + G(p_in + x_A)/√2`.
pub fn cv_teleport_cov_direct(sigma_in: &Matrix2<f64>, channel: &GaussianState, gain: f64) -> Result<Matrix2<f64>> {
    validate_teleport_inputs(sigma_in, gain)?;
    let g = gain / SQRT_2;
    #[rustfmt::skip]
    let l = nalgebra::SMatrix::<f64, 2, 6>::from_row_slice(&[
        g, 0.0, 0.0, g, 0.0, -1.0,
        0.0, g, g, 0.0, 1.0, 0.0,
    ]);
    let mut sigma = nalgebra::SMatrix::<f64, 6, 6>::zeros();
    sigma.fixed_view_mut::<2, 2>(0, 0).copy_from(sigma_in);
    for i in 0..4 {
        for j in 0..4 {
            sigma[(2 + i, 2 + j)] = channel.cov[(i, j)];
        }
    }
    Ok(l * sigma * l.transpose())
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One Monte-Carlo teleportation shot in the quadrature picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvTeleportSample {
    pub x_in: f64,
    pub p_in: f64,
    pub x_out: f64,
    pub p_out: f64,
    /// Deviation from `x_out = x_in + (x_A + x_B)`, `p_out = p_in − (p_A − p_B)`;
    /// only defined at `G = √2`.
    pub identity_residual: Option<f64>,
}

/// Output statistics of [`cv_teleport_mc`].
#[derive(Debug, Clone, PartialEq)]
pub struct CvTeleportStats {
    pub trials: usize,
    pub mean: [f64; 2],
    pub cov: Matrix2<f64>,
    pub max_identity_residual: Option<f64>,
}

fn channel_sampler(r: f64) -> Result<nalgebra::Matrix4<f64>> {
    let cov = tmsv(r)?.cov;
    let m = nalgebra::Matrix4::from_fn(|i, j| cov[(i, j)]);
    Cholesky::new(m)
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidParameter(format!("channel covariance at r={r} is numerically singular")))
}

fn normal4<R: Rng>(rng: &mut R) -> nalgebra::Vector4<f64> {
    nalgebra::Vector4::from_fn(|_, _| rng.sample(StandardNormal))
}

/// One seeded shot. The coherent input has quadrature means `(x_in, p_in)`
/// and vacuum noise `½`; the channel quadratures are drawn from `tmsv(r)`.
/// Alice measures `x′ = (x_in + x_A)/√2` and `p′ = (p_in − p_A)/√2`; Bob
/// displaces by `G` times the outcomes.
pub fn cv_teleport_sample(x_in: f64, p_in: f64, r: f64, gain: f64, seed: u64) -> Result<CvTeleportSample> {
    let l = channel_sampler(r)?;
    Ok(teleport_shot(x_in, p_in, &l, gain, &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn teleport_shot<R: Rng>(x0: f64, p0: f64, l: &nalgebra::Matrix4<f64>, gain: f64, rng: &mut R) -> CvTeleportSample {
    let sd = 0.5f64.sqrt();
    let x_in = x0 + sd * rng.sample::<f64, _>(StandardNormal);
    let p_in = p0 + sd * rng.sample::<f64, _>(StandardNormal);
    let ch = l * normal4(rng);
    let (xa, pa, xb, pb) = (ch[0], ch[1], ch[2], ch[3]);
    let xbar = (x_in + xa) / SQRT_2;
    let pbar = (p_in - pa) / SQRT_2;
    let x_out = xb + gain * xbar;
    let p_out = pb + gain * pbar;
    let identity_residual = ((gain - SQRT_2).abs() < 1e-15).then(|| {
        let dx = x_out - (x_in + (xa + xb));
        let dp = p_out - (p_in - (pa - pb));
        dx.abs().max(dp.abs())
    });
    CvTeleportSample {
        x_in,
        p_in,
        x_out,
        p_out,
        identity_residual,
    }
}

/// Aggregates samples into means and a sample covariance with compensated
/// summation.
pub fn teleport_stats(samples: &[CvTeleportSample]) -> Result<CvTeleportStats> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let (mut sx, mut sp) = (Neumaier::default(), Neumaier::default());
    for s in samples {
        sx.add(s.x_out);
        sp.add(s.p_out);
    }
    let mean = [sx.value() / n as f64, sp.value() / n as f64];
    let (mut cxx, mut cxp, mut cpp) = (Neumaier::default(), Neumaier::default(), Neumaier::default());
    for s in samples {
        let (dx, dp) = (s.x_out - mean[0], s.p_out - mean[1]);
        cxx.add(dx * dx);
        cxp.add(dx * dp);
        cpp.add(dp * dp);
    }
    let d = (n - 1) as f64;
    let cov = Matrix2::new(cxx.value() / d, cxp.value() / d, cxp.value() / d, cpp.value() / d);
    let max_identity_residual = samples
        .iter()
        .map(|s| s.identity_residual)
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)));
    Ok(CvTeleportStats {
        trials: n,
        mean,
        cov,
        max_identity_residual,
    })
}

/// Monte-Carlo teleportation over `trials` shots from one seeded stream.
pub fn cv_teleport_mc(x_in: f64, p_in: f64, r: f64, gain: f64, trials: usize, seed: u64) -> Result<CvTeleportStats> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!("need at least two trials, got {trials}")));
    }
    let l = channel_sampler(r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<_> = (0..trials).map(|_| teleport_shot(x_in, p_in, &l, gain, &mut rng)).collect();
    teleport_stats(&samples)
}

/// One CV QKD round on `squeeze_channel(tmsv(r), s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvQkdRound {
    pub alice_quadrature: Quadrature,
    pub bob_quadrature: Quadrature,
    pub alice_value: f64,
    pub bob_value: f64,
    pub kept: bool,
}

/// Seeded CV QKD round: both parties pick `x` or `p` uniformly and measure
/// their half of the shared state. Kept iff the choices coincide. With
/// the TMSV sign convention kept `x` values are anticorrelated and kept `p`
/// values correlated.
pub fn cv_qkd_round(r: f64, s: f64, seed: u64) -> Result<CvQkdRound> {
    let l = qkd_sampler(r, s)?;
    Ok(qkd_shot(&l, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Lower Cholesky factor of `squeeze_channel(tmsv(r), s)` for repeated rounds.
pub fn qkd_sampler(r: f64, s: f64) -> Result<nalgebra::Matrix4<f64>> {
    let cov = squeeze_channel(&tmsv(r)?, s)?.cov;
    let m = nalgebra::Matrix4::from_fn(|i, j| cov[(i, j)]);
    Cholesky::new(m)
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidParameter(format!("channel covariance at r={r}, s={s} is numerically singular")))
}

/// One round from a precomputed sampler.
pub fn qkd_shot<R: Rng>(l: &nalgebra::Matrix4<f64>, rng: &mut R) -> CvQkdRound {
    let pick = |rng: &mut R| if rng.random_bool(0.5) { Quadrature::P } else { Quadrature::X };
    let alice_quadrature = pick(rng);
    let bob_quadrature = pick(rng);
    let v = l * normal4(rng);
    CvQkdRound {
        alice_quadrature,
        bob_quadrature,
        alice_value: v[alice_quadrature.offset()],
        bob_value: v[2 + bob_quadrature.offset()],
        kept: alice_quadrature == bob_quadrature,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn omega_structure() {
        let o = omega(1).unwrap();
        assert_eq!(o, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let o2 = omega(3).unwrap();
        assert_eq!(&o2 * &o2, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(o2.transpose(), -&o2);
        assert!(omega(0).is_err());
    }

    #[test]
    fn physicality_examples() {
        let half = DMatrix::identity(2, 2) * 0.5;
        let p = is_physical(&half).unwrap();
        assert!(p.physical);
        assert_abs_diff_eq!(p.min_eigenvalue, 0.0, epsilon = 1e-14);
        let p = is_physical(&(DMatrix::identity(2, 2) * 0.1)).unwrap();
        assert!(!p.physical);
        assert_abs_diff_eq!(p.min_eigenvalue, 0.1 - 0.5, epsilon = 1e-14);
        for r in [0.0, 0.5, 1.0, 2.0] {
            assert!(tmsv(r).unwrap().physicality().physical);
        }
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(matches!(is_physical(&bad), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn bs_examples() {
        let sp = symplectic_phase(FRAC_PI_2);
        assert!(max_diff(sp.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])) < 1e-15);
        assert!(max_diff(symplectic_bs(0.0, 0.7).matrix(), &DMatrix::identity(4, 4)) < 1e-15);
        assert_eq!(symplectic_squeeze(0.0).matrix(), &DMatrix::identity(2, 2));
        for (t, p) in [(0.3, 0.1), (FRAC_PI_4, FRAC_PI_2), (1.2, -2.0)] {
            assert!(symplectic_error(symplectic_bs(t, p).matrix()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn vacuum_is_bs_invariant() {
        let vac = GaussianState::vacuum(2).unwrap();
        let out = apply_symplectic(&vac, &symplectic_bs(0.4, 1.1), &[0, 1]).unwrap();
        assert!(max_diff(out.cov(), vac.cov()) < 1e-15);
    }

    #[test]
    fn rejects_non_symplectic() {
        let vac = GaussianState::vacuum(1).unwrap();
        let op = SymplecticOp { matrix: DMatrix::identity(2, 2) * 2.0 };
        assert!(matches!(apply_symplectic(&vac, &op, &[0]), Err(Error::NotSymplectic(_))));
        assert!(SymplecticOp::new(DMatrix::identity(2, 2) * 2.0).is_err());
    }

    #[test]
    fn omega_as_phase_negates_mean_twice() {
        let st = GaussianState::new(DVector::from_vec(vec![1.0, -2.0]), DMatrix::identity(2, 2) * 0.7).unwrap();
        let op = SymplecticOp::new(omega(1).unwrap()).unwrap();
        let twice = apply_symplectic(&apply_symplectic(&st, &op, &[0]).unwrap(), &op, &[0]).unwrap();
        assert_eq!(twice.mean(), &(-st.mean()));
        assert!(max_diff(twice.cov(), st.cov()) < 1e-15);
    }

    #[test]
    fn tmsv_values() {
        let t = tmsv(1.0).unwrap();
        assert_abs_diff_eq!(t.cov()[(0, 0)], 1.88110, epsilon = 1e-5);
        assert_abs_diff_eq!(t.cov()[(0, 2)], -1.81343, epsilon = 1e-5);
        assert_abs_diff_eq!(t.cov()[(1, 3)], 1.81343, epsilon = 1e-5);
        assert!(max_diff(tmsv(0.0).unwrap().cov(), &(DMatrix::identity(4, 4) * 0.5)) < 1e-15);
        for r in [0.0, 0.5, 1.0, 2.0] {
            let t = tmsv(r).unwrap();
            let e = (-2.0 * r).exp();
            assert_abs_diff_eq!(t.variance_of(&[1.0, 0.0, 1.0, 0.0]).unwrap(), e, epsilon = 1e-12);
            assert_abs_diff_eq!(t.variance_of(&[0.0, 1.0, 0.0, -1.0]).unwrap(), e, epsilon = 1e-12);
        }
    }

    #[test]
    fn epr_routes() {
        for r in [0.0, 0.3, 1.0, 2.0] {
            let t = tmsv(r).unwrap();
            assert!(max_diff(epr_from_squeezed(r).unwrap().cov(), t.cov()) < 1e-12);
            // x_a ⊗ p_b squeezing on the Φ = 0 beamsplitter
            let two = GaussianState::squeezed_vacuum(r).unwrap().tensor(&GaussianState::squeezed_vacuum(-r).unwrap());
            let out = apply_symplectic(&two, &symplectic_bs(FRAC_PI_4, 0.0), &[0, 1]).unwrap();
            let out = apply_symplectic(&out, &symplectic_phase(std::f64::consts::PI), &[1]).unwrap();
            assert!(max_diff(out.cov(), t.cov()) < 1e-12);
        }
    }

    #[test]
    fn printed_pairing_on_quarter_wave_bs_is_a_product_state() {
        let r = 1.0;
        let two = GaussianState::squeezed_vacuum(r).unwrap().tensor(&GaussianState::squeezed_vacuum(-r).unwrap());
        let out = apply_symplectic(&two, &symplectic_bs(FRAC_PI_4, FRAC_PI_2), &[0, 1]).unwrap();
        assert!(out.block(0, 1).abs().max() < 1e-12);
    }

    #[test]
    fn squeeze_channel_blocks() {
        let (r, s) = (1.0f64, 0.3f64);
        let out = squeeze_channel(&tmsv(r).unwrap(), s).unwrap();
        let (ch, sh) = (0.5 * (2.0 * r).cosh(), 0.5 * (2.0 * r).sinh());
        assert_abs_diff_eq!(out.block(1, 1)[(0, 0)], ch * (-2.0 * s).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.block(1, 1)[(1, 1)], ch * (2.0 * s).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.block(0, 1)[(0, 0)], -sh * (-s).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.block(0, 1)[(1, 1)], sh * s.exp(), epsilon = 1e-12);
        assert_eq!(out.block(0, 0), tmsv(r).unwrap().block(0, 0));
        assert_eq!(squeeze_channel(&tmsv(r).unwrap(), 0.0).unwrap().cov(), tmsv(r).unwrap().cov());
    }

    #[test]
    fn conditioning_examples() {
        let bob = homodyne_condition(&tmsv(1.0).unwrap(), 0, Quadrature::X).unwrap();
        assert_abs_diff_eq!(bob.cov()[(0, 0)], 1.0 / (2.0 * 2f64.cosh()), epsilon = 1e-12);
        assert_abs_diff_eq!(bob.cov()[(0, 0)], 0.13291, epsilon = 1e-5);
        let vac = homodyne_condition(&tmsv(0.0).unwrap(), 0, Quadrature::P).unwrap();
        assert!(max_diff(vac.cov(), &(DMatrix::identity(2, 2) * 0.5)) < 1e-15);
        for q in [Quadrature::X, Quadrature::P] {
            let got = homodyne_condition(&squeeze_channel(&tmsv(0.7).unwrap(), 0.4).unwrap(), 0, q).unwrap();
            let want = cv_qkd_closed_form(0.7, 0.4, q);
            for i in 0..2 {
                for j in 0..2 {
                    assert_abs_diff_eq!(got.cov()[(i, j)], want[(i, j)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn conditioning_with_outcome_shifts_mean() {
        let t = tmsv(0.5).unwrap();
        let bob = homodyne_condition_on(&t, 0, Quadrature::X, 1.0).unwrap();
        let c = t.cov()[(0, 2)] / t.cov()[(0, 0)];
        assert_abs_diff_eq!(bob.mean()[0], c, epsilon = 1e-15);
        assert_eq!(bob.mean()[1], 0.0);
    }

    #[test]
    fn teleport_cov_closed_form_and_oracle() {
        let half = Matrix2::identity() * 0.5;
        for r in [0.0, 0.5, 1.0, 2.0] {
            let ch = tmsv(r).unwrap();
            let out = cv_teleport_cov(&half, &ch, SQRT_2).unwrap();
            let want = half + Matrix2::identity() * (-2.0 * r).exp();
            assert!((out - want).abs().max() < 1e-12, "r={r}");
            let direct = cv_teleport_cov_direct(&half, &ch, SQRT_2).unwrap();
            assert!((out - direct).abs().max() < 1e-12);
        }
        let sq = Matrix2::new(0.2, 0.05, 0.05, 1.5);
        let ch = squeeze_channel(&tmsv(0.8).unwrap(), 0.2).unwrap();
        for g in [0.5, 1.0, SQRT_2, 2.0] {
            let a = cv_teleport_cov(&sq, &ch, g).unwrap();
            let b = cv_teleport_cov_direct(&sq, &ch, g).unwrap();
            assert!((a - b).abs().max() < 1e-12, "g={g}");
        }
    }

    #[test]
    fn teleport_limits() {
        let half = Matrix2::identity() * 0.5;
        let ideal = cv_teleport_cov_tmsv(&half, 20.0, SQRT_2).unwrap();
        assert!((ideal - half).norm() < 1e-12);
        let classical = cv_teleport_cov_tmsv(&half, 0.0, SQRT_2).unwrap();
        assert!((classical - Matrix2::identity() * 1.5).abs().max() < 1e-12);
        assert!(cv_teleport_cov(&half, &tmsv(1.0).unwrap(), 0.0).is_err());
        assert!(cv_teleport_cov(&(Matrix2::identity() * 0.1), &tmsv(1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn teleport_mc_identity() {
        let stats = cv_teleport_mc(0.3, -0.2, 1.0, SQRT_2, 2000, 3).unwrap();
        assert!(stats.max_identity_residual.unwrap() < 1e-12);
        assert!(cv_teleport_mc(0.0, 0.0, 1.0, 1.0, 100, 3).unwrap().max_identity_residual.is_none());
        let one = cv_teleport_sample(0.0, 0.0, 1.0, SQRT_2, 9).unwrap();
        assert_eq!(one, cv_teleport_sample(0.0, 0.0, 1.0, SQRT_2, 9).unwrap());
    }

    #[test]
    fn qkd_rounds() {
        let r = cv_qkd_round(1.0, 0.0, 4).unwrap();
        assert_eq!(r, cv_qkd_round(1.0, 0.0, 4).unwrap());
        assert_eq!(r.kept, r.alice_quadrature == r.bob_quadrature);
    }
}
