use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::time::Instant;

use beamsplit::dv::{
    bell_measure, bell_state, cnot_matrix, derive_mdi_table, hadamard_matrix, hom_distribution, mdi_qkd_round, mzi,
    photon_subtract, qkd_exact, qkd_round, rng_bit, rng_distribution, teleport_dv, teleport_dv_exact, Basis,
    BellKind, BitRelation, MdiChoice,
};
use beamsplit::fock::{annihilation, fidelity};
use beamsplit::gaussian::{
    cv_qkd_closed_form, cv_teleport_cov_tmsv, cv_teleport_sample, homodyne_condition, is_physical, qkd_sampler,
    qkd_shot, squeeze_channel, teleport_stats, tmsv,
};
use beamsplit::measurement::{g2_zero, homodyne_mean, photon_distribution};
use beamsplit::{BsParams, Complex64, FockState, ModeId, OutcomeDistribution, Quadrature};
use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::report::ExperimentResult;
use crate::spec::{Experiment, ExperimentSpec, Params};
use crate::{CliError, CliResult};

const MAX_TRIALS: u64 = 10_000_000;
const MAX_CUTOFF: u32 = 40;
const MAX_SQUEEZING: f64 = 20.0;
/// Largest `r` the Monte-Carlo samplers accept; beyond it the channel
/// covariance is numerically singular in `f64`.
const MAX_SAMPLED_SQUEEZING: f64 = 8.0;

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmatrix<const N: usize>(m: &[[Complex64; N]; N]) -> Value {
    Value::Array(m.iter().map(|row| Value::Array(row.iter().map(|z| cjson(*z)).collect())).collect())
}

fn rmatrix2(m: &Matrix2<f64>) -> Value {
    json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

fn rmatrix(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect())
}

fn pattern_key(counts: &[u32]) -> String {
    counts.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn distribution_json(d: &OutcomeDistribution) -> Value {
    let mut m = Map::new();
    for (o, p) in d.entries() {
        m.insert(pattern_key(o.counts()), json!(p));
    }
    Value::Object(m)
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("object literal"),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn normalized_pair(p: &Params) -> CliResult<()> {
    let n = p.alpha.norm_sqr() + p.beta.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("|alpha|^2 + |beta|^2 must be 1, got {n}")));
    }
    Ok(())
}

fn squeezing(p: &Params, max: f64) -> CliResult<()> {
    if !(p.r >= 0.0 && p.r <= max) {
        return Err(invalid(format!("r must lie in [0, {max}], got {}", p.r)));
    }
    Ok(())
}

/// Checks every parameter the experiment reads before anything runs.
fn validate(spec: &ExperimentSpec) -> CliResult<()> {
    let p = &spec.params;
    for (name, v) in [("theta", p.theta), ("phi", p.phi), ("r", p.r), ("s", p.s)] {
        finite(name, v)?;
    }
    for (name, z) in [("alpha", p.alpha), ("beta", p.beta)] {
        finite(name, z.re)?;
        finite(name, z.im)?;
    }
    if let Some(t) = p.trials {
        if t > MAX_TRIALS {
            return Err(invalid(format!("trials must be at most {MAX_TRIALS}, got {t}")));
        }
    }
    if !(1..=MAX_CUTOFF).contains(&p.cutoff) {
        return Err(invalid(format!("cutoff must lie in [1, {MAX_CUTOFF}], got {}", p.cutoff)));
    }
    let sampled = p.trials.is_some();
    match spec.experiment {
        Experiment::Rng => {
            if p.trials == Some(0) {
                return Err(invalid("rng needs at least one trial"));
            }
        }
        Experiment::TeleportDv => normalized_pair(p)?,
        Experiment::PhotonSubtract => {
            normalized_pair(p)?;
            if !(p.theta > 0.0 && p.theta < FRAC_PI_2) {
                return Err(invalid(format!("theta must lie in (0, pi/2), got {}", p.theta)));
            }
            if p.cutoff < 2 {
                return Err(invalid("photon-subtract needs cutoff >= 2"));
            }
        }
        Experiment::Mzi => {
            if !(0.0..=FRAC_PI_2).contains(&p.theta) {
                return Err(invalid(format!("theta must lie in [0, pi/2], got {}", p.theta)));
            }
        }
        Experiment::G2 => {
            if p.alpha.norm_sqr() == 0.0 {
                return Err(invalid("g2 is undefined for the vacuum (alpha = 0)"));
            }
        }
        Experiment::TeleportCv => {
            squeezing(p, if sampled { MAX_SAMPLED_SQUEEZING } else { MAX_SQUEEZING })?;
            if p.trials == Some(1) {
                return Err(invalid("teleport-cv needs at least two trials for a sample covariance"));
            }
        }
        Experiment::QkdCv => {
            squeezing(p, MAX_SAMPLED_SQUEEZING)?;
            if p.s.abs() > 5.0 {
                return Err(invalid(format!("|s| must be at most 5, got {}", p.s)));
            }
        }
        Experiment::Physicality => {
            squeezing(p, MAX_SAMPLED_SQUEEZING)?;
            if p.s.abs() > 5.0 {
                return Err(invalid(format!("|s| must be at most 5, got {}", p.s)));
            }
        }
        _ => {}
    }
    Ok(())
}

fn params_json(spec: &ExperimentSpec) -> Map<String, Value> {
    let p = &spec.params;
    let mut m = obj(json!({
        "theta": p.theta,
        "phi": p.phi,
        "r": p.r,
        "s": p.s,
        "alpha": cjson(p.alpha),
        "beta": cjson(p.beta),
        "cutoff": p.cutoff,
    }));
    if let Some(t) = p.trials {
        m.insert("trials".into(), json!(t));
    }
    m
}

/// Seeds `base, base+1, …` evaluated in parallel, returned in trial order.
fn per_trial<T: Send>(base: u64, trials: u64, f: impl Fn(u64) -> CliResult<T> + Sync) -> CliResult<Vec<T>> {
    (0..trials).into_par_iter().map(|i| f(base.wrapping_add(i))).collect()
}

fn bits_string(bits: impl Iterator<Item = u8>) -> String {
    bits.map(|b| char::from(b'0' + b)).collect()
}

fn sample_histogram(d: &OutcomeDistribution, base: u64, trials: u64) -> CliResult<Value> {
    let draws = per_trial(base, trials, |seed| Ok(d.sample(&mut ChaCha8Rng::seed_from_u64(seed))))?;
    let mut m = Map::new();
    for o in draws {
        let e = m.entry(pattern_key(o.counts())).or_insert(json!(0));
        *e = json!(e.as_u64().unwrap_or(0) + 1);
    }
    Ok(Value::Object(m))
}

type Sections = (Map<String, Value>, Map<String, Value>);

fn hom(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let d = hom_distribution(BsParams::new(p.theta, p.phi))?;
    let exact = obj(json!({
        "distribution": distribution_json(&d),
        "coincidence_probability": d.probability(&[1, 1]),
    }));
    let mut sampled = Map::new();
    if let Some(t) = p.trials {
        sampled.insert("counts".into(), sample_histogram(&d, spec.seed, t)?);
    }
    Ok((exact, sampled))
}

fn bell(spec: &ExperimentSpec) -> CliResult<Sections> {
    let mut exact = Map::new();
    let mut sampled = Map::new();
    for kind in BellKind::ALL {
        let state = bell_state(kind);
        let (_, table) = bell_measure(&state, spec.seed)?;
        let classes: Map<String, Value> = table
            .class_probabilities
            .iter()
            .map(|(c, p)| (c.name().to_string(), json!(p)))
            .collect();
        let patterns: Vec<Value> = table
            .patterns
            .iter()
            .map(|(o, p)| {
                let sig: Map<String, Value> = o.signature.iter().map(|(d, n)| (d.name().to_string(), json!(n))).collect();
                json!({ "signature": sig, "classification": o.classification.name(), "probability": p })
            })
            .collect();
        exact.insert(kind.name().into(), json!({ "classes": classes, "patterns": patterns }));
        if let Some(t) = spec.params.trials {
            let outcomes = per_trial(spec.seed, t, |seed| Ok(bell_measure(&state, seed)?.0.classification))?;
            let mut counts = Map::new();
            for c in outcomes {
                let e = counts.entry(c.name().to_string()).or_insert(json!(0));
                *e = json!(e.as_u64().unwrap_or(0) + 1);
            }
            sampled.insert(kind.name().into(), Value::Object(counts));
        }
    }
    Ok((exact, sampled))
}

fn teleport(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let a = teleport_dv_exact(p.alpha, p.beta)?;
    let branches: Vec<Value> = a
        .branches
        .iter()
        .map(|(o, prob, f)| {
            let sig: Map<String, Value> = o.signature.iter().map(|(d, n)| (d.name().to_string(), json!(n))).collect();
            json!({ "signature": sig, "classification": o.classification.name(), "probability": prob, "fidelity": f })
        })
        .collect();
    let exact = obj(json!({ "success_probability": a.success_probability, "branches": branches }));
    let mut sampled = Map::new();
    if let Some(t) = p.trials {
        let rounds = per_trial(spec.seed, t, |seed| Ok(teleport_dv(p.alpha, p.beta, seed)?))?;
        let successes = rounds.iter().filter(|r| r.success).count();
        let min_fid = rounds.iter().filter_map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
        let z = rounds.iter().filter(|r| r.correction.map(|c| c.name()) == Some("pauli-z")).count();
        sampled = obj(json!({
            "successes": successes,
            "success_rate": successes as f64 / t.max(1) as f64,
            "pauli_z_corrections": z,
            "min_fidelity": if successes > 0 { json!(min_fid) } else { Value::Null },
        }));
    }
    Ok((exact, sampled))
}

fn qkd(spec: &ExperimentSpec) -> CliResult<Sections> {
    let a = qkd_exact()?;
    let exact = obj(json!({
        "sift_probability": a.sift_probability,
        "agreement_probability": a.agreement_probability,
        "qber": a.qber,
    }));
    let mut sampled = Map::new();
    if let Some(t) = spec.params.trials {
        let rounds = per_trial(spec.seed, t, |seed| Ok(qkd_round(seed)?))?;
        let kept: Vec<_> = rounds.iter().filter(|r| r.kept).collect();
        let errors = kept.iter().filter(|r| r.alice_bit != r.bob_bit).count();
        sampled = obj(json!({
            "kept": kept.len(),
            "sift_rate": kept.len() as f64 / t.max(1) as f64,
            "errors": errors,
            "qber": if kept.is_empty() { Value::Null } else { json!(errors as f64 / kept.len() as f64) },
            "alice_key": bits_string(kept.iter().filter_map(|r| r.alice_bit)),
            "bob_key": bits_string(kept.iter().filter_map(|r| r.bob_bit)),
        }));
    }
    Ok((exact, sampled))
}

fn random_choice<R: Rng>(rng: &mut R) -> MdiChoice {
    let basis = if rng.random_bool(0.5) { Basis::Diagonal } else { Basis::Rectilinear };
    MdiChoice::new(basis, u8::from(rng.random_bool(0.5))).expect("bit is 0 or 1")
}

fn mdi(spec: &ExperimentSpec) -> CliResult<Sections> {
    let table = derive_mdi_table()?;
    let rows: Vec<Value> = table
        .iter()
        .map(|((basis, class), rel)| {
            let rel = match rel {
                BitRelation::Equal => "equal",
                BitRelation::Opposite => "opposite",
            };
            json!({ "basis": basis.name(), "outcome": class.name(), "bits": rel })
        })
        .collect();
    let exact = obj(json!({ "bit_relations": rows }));
    let mut sampled = Map::new();
    if let Some(t) = spec.params.trials {
        let rounds = per_trial(spec.seed, t, |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = (random_choice(&mut rng), random_choice(&mut rng));
            Ok(mdi_qkd_round(a, b, rng.random())?)
        })?;
        let kept: Vec<_> = rounds.iter().filter(|r| r.kept).collect();
        let errors = kept.iter().filter(|r| r.alice_bit != r.bob_bit).count();
        sampled = obj(json!({
            "kept": kept.len(),
            "sift_rate": kept.len() as f64 / t.max(1) as f64,
            "errors": errors,
            "alice_key": bits_string(kept.iter().filter_map(|r| r.alice_bit)),
            "bob_key": bits_string(kept.iter().filter_map(|r| r.bob_bit)),
        }));
    }
    Ok((exact, sampled))
}

fn subtract(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let m = ModeId::path(0);
    let input = FockState::from_terms(vec![m], [(vec![1], p.alpha), (vec![2], p.beta)], p.cutoff)?;
    let (cond, prob) = photon_subtract(&input, m, p.theta)?;
    let ideal = annihilation(&input, m)?.normalize()?.0;
    let f = fidelity(&cond, &ideal)?;
    let amps: Vec<Value> = (0..=p.cutoff).map(|n| cjson(cond.amplitude(&[n]))).collect();
    let exact = obj(json!({
        "herald_probability": prob,
        "conditional_amplitudes": amps,
        "fidelity_to_ideal": f,
        "infidelity": 1.0 - f,
    }));
    let mut sampled = Map::new();
    if let Some(t) = p.trials {
        let heralds = per_trial(spec.seed, t, |seed| Ok(ChaCha8Rng::seed_from_u64(seed).random_bool(prob)))?;
        let n = heralds.iter().filter(|h| **h).count();
        sampled = obj(json!({ "heralds": n, "herald_rate": n as f64 / t.max(1) as f64 }));
    }
    Ok((exact, sampled))
}

fn mzi_run(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let q = mzi(p.theta)?;
    let [a0, a1] = q.amplitudes();
    let exact = obj(json!({
        "amplitudes": [cjson(a0), cjson(a1)],
        "probabilities": [a0.norm_sqr(), a1.norm_sqr()],
    }));
    let mut sampled = Map::new();
    if let Some(t) = p.trials {
        let d = photon_distribution(q.state(), &[ModeId::path(0), ModeId::path(1)])?;
        sampled.insert("counts".into(), sample_histogram(&d, spec.seed, t)?);
    }
    Ok((exact, sampled))
}

fn rng_run(spec: &ExperimentSpec) -> CliResult<Sections> {
    let d = rng_distribution()?;
    let exact = obj(json!({ "p0": d.probability(&[1, 0]), "p1": d.probability(&[0, 1]) }));
    let mut sampled = Map::new();
    if let Some(t) = spec.params.trials {
        let bits = per_trial(spec.seed, t, |seed| Ok(rng_bit(seed)?))?;
        let ones = bits.iter().filter(|b| **b == 1).count() as f64;
        let zeros = t as f64 - ones;
        let e = t as f64 / 2.0;
        let chi2 = ((ones - e).powi(2) + (zeros - e).powi(2)) / e;
        sampled = obj(json!({
            "bits": bits_string(bits.iter().copied()),
            "ones": ones as u64,
            "zeros": zeros as u64,
            "chi_square": chi2,
        }));
    }
    Ok((exact, sampled))
}

fn g2_run(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let m = ModeId::path(0);
    let coh = FockState::coherent(m, p.alpha, p.cutoff)?;
    let mut fock = Map::new();
    for n in 1..=p.cutoff.min(5) {
        fock.insert(n.to_string(), json!(g2_zero(&FockState::basis(vec![m], &[n], p.cutoff)?)?));
    }
    let exact = obj(json!({
        "coherent": g2_zero(&coh)?,
        "coherent_tail_mass": FockState::coherent_tail_mass(p.alpha, p.cutoff),
        "fock": fock,
    }));
    Ok((exact, Map::new()))
}

fn homodyne_run(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let coh = FockState::coherent(ModeId::path(0), p.alpha, p.cutoff)?;
    let exact = obj(json!({
        "difference_current": homodyne_mean(&coh, p.phi, 1.0)?,
        "x_quadrature": homodyne_mean(&coh, -FRAC_PI_2, 1.0)?,
        "y_quadrature": homodyne_mean(&coh, 0.0, 1.0)?,
        "coherent_tail_mass": FockState::coherent_tail_mass(p.alpha, p.cutoff),
    }));
    Ok((exact, Map::new()))
}

fn teleport_cv(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let half = Matrix2::identity() * 0.5;
    let out = cv_teleport_cov_tmsv(&half, p.r, SQRT_2)?;
    let exact = obj(json!({
        "sigma_in": rmatrix2(&half),
        "sigma_out": rmatrix2(&out),
        "added_noise": (-2.0 * p.r).exp(),
    }));
    let mut sampled = Map::new();
    if let Some(t) = p.trials {
        // coherent input |α⟩ has x = √2 Re α, p = √2 Im α
        let (x0, p0) = (SQRT_2 * p.alpha.re, SQRT_2 * p.alpha.im);
        let samples = per_trial(spec.seed, t, |seed| Ok(cv_teleport_sample(x0, p0, p.r, SQRT_2, seed)?))?;
        let stats = teleport_stats(&samples)?;
        sampled = obj(json!({
            "mean": stats.mean,
            "cov": rmatrix2(&stats.cov),
            "max_identity_residual": stats.max_identity_residual,
        }));
    }
    Ok((exact, sampled))
}

fn qkd_cv(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let ch = squeeze_channel(&tmsv(p.r)?, p.s)?;
    let bx = homodyne_condition(&ch, 0, Quadrature::X)?;
    let bp = homodyne_condition(&ch, 0, Quadrature::P)?;
    let corr = |q: Quadrature| {
        let k = q.offset();
        ch.cov()[(k, 2 + k)] / (ch.cov()[(k, k)] * ch.cov()[(2 + k, 2 + k)]).sqrt()
    };
    let exact = obj(json!({
        "channel": rmatrix(ch.cov()),
        "bob_given_x": rmatrix(bx.cov()),
        "bob_given_p": rmatrix(bp.cov()),
        "bob_given_x_closed_form": rmatrix2(&cv_qkd_closed_form(p.r, p.s, Quadrature::X)),
        "bob_given_p_closed_form": rmatrix2(&cv_qkd_closed_form(p.r, p.s, Quadrature::P)),
        "correlation_x": corr(Quadrature::X),
        "correlation_p": corr(Quadrature::P),
    }));
    let mut sampled = Map::new();
    if let Some(t) = p.trials {
        let l = qkd_sampler(p.r, p.s)?;
        let rounds = per_trial(spec.seed, t, |seed| Ok(qkd_shot(&l, &mut ChaCha8Rng::seed_from_u64(seed))))?;
        let kept: Vec<_> = rounds.iter().filter(|r| r.kept).collect();
        // sign binning; Bob negates x outcomes because kept x values are anticorrelated
        let bit = |v: f64| u8::from(v > 0.0);
        let alice: Vec<u8> = kept.iter().map(|r| bit(r.alice_value)).collect();
        let bob: Vec<u8> = kept
            .iter()
            .map(|r| match r.bob_quadrature {
                Quadrature::X => bit(-r.bob_value),
                Quadrature::P => bit(r.bob_value),
            })
            .collect();
        let errors = alice.iter().zip(&bob).filter(|(a, b)| a != b).count();
        sampled = obj(json!({
            "kept": kept.len(),
            "sift_rate": kept.len() as f64 / t.max(1) as f64,
            "bit_errors": errors,
            "alice_key": bits_string(alice.iter().copied()),
            "bob_key": bits_string(bob.iter().copied()),
        }));
    }
    Ok((exact, sampled))
}

fn physicality(spec: &ExperimentSpec) -> CliResult<Sections> {
    let p = &spec.params;
    let ch = squeeze_channel(&tmsv(p.r)?, p.s)?;
    let report = |m: &DMatrix<f64>| -> CliResult<Value> {
        let r = is_physical(m)?;
        Ok(json!({ "physical": r.physical, "min_eigenvalue": r.min_eigenvalue }))
    };
    let exact = obj(json!({
        "channel": report(ch.cov())?,
        "vacuum": report(&(DMatrix::identity(2, 2) * 0.5))?,
        "sub_vacuum_0.1": report(&(DMatrix::identity(2, 2) * 0.1))?,
    }));
    Ok((exact, Map::new()))
}

fn gate(spec: &ExperimentSpec) -> CliResult<Sections> {
    let exact = match spec.experiment {
        Experiment::Hadamard => obj(json!({ "matrix": cmatrix(&hadamard_matrix()?) })),
        _ => obj(json!({ "matrix": cmatrix(&cnot_matrix()?) })),
    };
    Ok((exact, Map::new()))
}

/// Validates and runs one experiment.
pub fn run(spec: &ExperimentSpec) -> CliResult<ExperimentResult> {
    validate(spec)?;
    let start = Instant::now();
    let (exact, sampled) = match spec.experiment {
        Experiment::Hom => hom(spec)?,
        Experiment::BellMeasure => bell(spec)?,
        Experiment::TeleportDv => teleport(spec)?,
        Experiment::QkdDv => qkd(spec)?,
        Experiment::MdiQkd => mdi(spec)?,
        Experiment::PhotonSubtract => subtract(spec)?,
        Experiment::Hadamard | Experiment::Cnot => gate(spec)?,
        Experiment::Mzi => mzi_run(spec)?,
        Experiment::Rng => rng_run(spec)?,
        Experiment::G2 => g2_run(spec)?,
        Experiment::Homodyne => homodyne_run(spec)?,
        Experiment::TeleportCv => teleport_cv(spec)?,
        Experiment::QkdCv => qkd_cv(spec)?,
        Experiment::Physicality => physicality(spec)?,
    };
    Ok(ExperimentResult {
        experiment: spec.experiment.name().to_string(),
        params: params_json(spec),
        seed: spec.seed,
        exact,
        sampled,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
