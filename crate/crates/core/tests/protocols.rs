use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use beamsplit::dv::{
    bell_measure, bell_state, bell_transform, cnot_dualrail, cnot_matrix, derive_mdi_table,
    hadamard_dualrail, hadamard_matrix, mdi_extra_flip, mdi_qkd_round, mzi, photon_subtract,
    qkd_exact, teleport_dv, teleport_dv_exact, BellClass, BellKind, DualRailPair, DualRailQubit,
    MdiChoice,
};
use beamsplit::fock::fidelity;
use beamsplit::{Complex64, FockState, ModeId};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn bell_confusion_matrix_is_exact() {
    for kind in BellKind::ALL {
        let (_, table) = bell_measure(&bell_state(kind), 0).unwrap();
        let want = match kind {
            BellKind::PhiMinus => BellClass::PhiMinus,
            BellKind::PhiPlus => BellClass::PhiPlus,
            BellKind::PsiPlus | BellKind::PsiMinus => BellClass::Ambiguous,
        };
        assert!((table.probability(want) - 1.0).abs() < 1e-12, "{kind:?}");
    }
}

#[test]
fn singlet_like_state_stays_split() {
    // φ− leaves the beamsplitter with one photon per port
    let out = bell_transform(&bell_state(BellKind::PhiMinus)).unwrap();
    for (o, _) in out.terms() {
        let c = o.counts();
        assert_eq!(c[0] + c[1], 1);
        assert_eq!(c[2] + c[3], 1);
    }
}

#[test]
fn teleportation_of_random_qubits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (alpha, beta) = (c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n));
        let a = teleport_dv_exact(alpha, beta).unwrap();
        assert!((a.success_probability - 0.5).abs() < 1e-12);
        for (_, _, f) in &a.branches {
            if let Some(f) = f {
                assert!((f - 1.0).abs() < 1e-12);
            }
        }
        let r = teleport_dv(alpha, beta, rng.random()).unwrap();
        if r.success {
            assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn qkd_branch_statistics() {
    let a = qkd_exact().unwrap();
    assert!((a.sift_probability - 0.5).abs() < 1e-12);
    assert!((a.agreement_probability - 1.0).abs() < 1e-12);
}

#[test]
fn mdi_table_and_rounds() {
    let table = derive_mdi_table().unwrap();
    assert_eq!(table.len(), 4);
    for alice in MdiChoice::all() {
        for bob in MdiChoice::all() {
            for seed in 0..8 {
                let r = mdi_qkd_round(alice, bob, seed).unwrap();
                if alice.basis != bob.basis {
                    assert!(!r.kept);
                }
                if r.kept {
                    assert_eq!(r.alice_bit, r.bob_bit);
                }
            }
        }
    }
    assert!(mdi_extra_flip(beamsplit::dv::Basis::Diagonal, BellClass::PhiPlus));
}

#[test]
fn photon_subtraction_examples() {
    let m = ModeId::path(0);
    for theta in [0.1, 0.5, 1.0] {
        let one = FockState::basis(vec![m], &[1], 6).unwrap();
        let (cond, p) = photon_subtract(&one, m, theta).unwrap();
        assert!((p - theta.sin().powi(2)).abs() < 1e-12);
        assert!((cond.amplitude(&[0]).norm() - 1.0).abs() < 1e-12);
    }
    let two = FockState::basis(vec![m], &[2], 6).unwrap();
    let (cond, p) = photon_subtract(&two, m, 0.1).unwrap();
    assert!((p - 2.0 * (0.1f64.cos() * 0.1f64.sin()).powi(2)).abs() < 1e-12);
    assert!((cond.amplitude(&[1]).norm() - 1.0).abs() < 1e-12);
    let sup = FockState::from_terms(vec![m], [(vec![1], c(FRAC_1_SQRT_2, 0.0)), (vec![2], c(FRAC_1_SQRT_2, 0.0))], 6)
        .unwrap();
    let target = beamsplit::fock::annihilation(&sup, m).unwrap().normalize().unwrap().0;
    let (cond, _) = photon_subtract(&sup, m, 0.05).unwrap();
    assert!(1.0 - fidelity(&cond, &target).unwrap() <= 1e-2);
}

fn mat4_mul(a: &[[Complex64; 4]; 4], b: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

#[test]
fn gate_algebra() {
    let q0 = DualRailQubit::new(ModeId::path(0), ModeId::path(1), ONE, ZERO).unwrap();
    let q1 = DualRailQubit::new(ModeId::path(0), ModeId::path(1), ZERO, ONE).unwrap();
    for q in [&q0, &q1] {
        let hh = hadamard_dualrail(&hadamard_dualrail(q).unwrap()).unwrap();
        assert!((fidelity(hh.state(), q.state()).unwrap() - 1.0).abs() < 1e-12);
        let [a, b] = hh.amplitudes();
        let [a0, b0] = q.amplitudes();
        assert!((a - a0).norm() < 1e-12 && (b - b0).norm() < 1e-12);
    }
    let plus = hadamard_dualrail(&q0).unwrap().amplitudes();
    assert!((plus[0] - FRAC_1_SQRT_2).norm() < 1e-12 && (plus[1] - FRAC_1_SQRT_2).norm() < 1e-12);
    let h = hadamard_matrix().unwrap();
    assert!((h[1][1] + FRAC_1_SQRT_2).norm() < 1e-12);

    let cx = cnot_matrix().unwrap();
    let id = mat4_mul(&cx, &cx);
    let z_c: [[Complex64; 4]; 4] =
        std::array::from_fn(|i| std::array::from_fn(|j| if i != j { ZERO } else if i >= 2 { -ONE } else { ONE }));
    let lhs = mat4_mul(&cx, &z_c);
    let rhs = mat4_mul(&z_c, &cx);
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { ONE } else { ZERO };
            assert!((id[i][j] - want).norm() < 1e-12);
            assert!((lhs[i][j] - rhs[i][j]).norm() < 1e-12);
        }
    }
}

#[test]
fn cnot_truth_table_and_entangling_power() {
    let basis = |k: usize| {
        let mut a = [ZERO; 4];
        a[k] = ONE;
        DualRailPair::new(a).unwrap()
    };
    let out = cnot_dualrail(&basis(2)).unwrap().amplitudes();
    assert!((out[3] - ONE).norm() < 1e-12);
    let out = cnot_dualrail(&basis(0)).unwrap().amplitudes();
    assert!((out[0] - ONE).norm() < 1e-12);

    let h = c(FRAC_1_SQRT_2, 0.0);
    let input = DualRailPair::new([h, ZERO, h, ZERO]).unwrap();
    let out = cnot_dualrail(&input).unwrap().amplitudes();
    let m = Matrix2::new(out[0], out[1], out[2], out[3]);
    let sv = m.singular_values();
    for s in sv.iter() {
        assert!((s - FRAC_1_SQRT_2).abs() < 1e-12);
    }
}

#[test]
fn interferometer_output() {
    let q = mzi(FRAC_PI_4).unwrap();
    let [a0, a1] = q.amplitudes();
    assert!(a0.norm() < 1e-12 && (a1 + ONE).norm() < 1e-12);
    let [b0, b1] = mzi(0.0).unwrap().amplitudes();
    assert!((b0 - Complex64::i()).norm() < 1e-12 && b1.norm() < 1e-12);
    for k in 0..10 {
        let s = mzi(k as f64 * 0.15).unwrap();
        assert!((s.state().norm_sqr() - 1.0).abs() < 1e-12);
    }
}
