#![allow(clippy::excessive_precision)]

mod common;

use approx::assert_relative_eq;
use heisenspec::group::privileged_change;
use heisenspec::hypo::{self, LeviData, SublaplacianModel, Witness};
use heisenspec::mehler::{self, HeatQuery};
use heisenspec::oracle::{
    counting_function, heat_trace, mellin_power, nilmanifold_spectrum, synthetic_spectrum,
    MatrixOperator, MellinParams, NilmanifoldGrid, Spectrum,
};
use heisenspec::weyl;
use heisenspec::{Error, Point};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

// Reference values from 40-digit quadrature.
const NU_REFERENCE: [(u32, f64, f64); 6] = [
    (3, 0.0, 0.000070265040269548586369),
    (2, 1.5, 0.044512911924324611314),
    (3, 2.9, 12.832736961787563536),
    (3, -1.2, 0.00017730183763583582657),
    (2, 0.3, 0.0024176628091543235495),
    (1, 0.9, 2.5539661368163386856),
];

const KERNEL_REFERENCE: [(u32, f64, f64, f64, f64, f64, f64); 4] = [
    (1, 0.0, 0.3, 0.17, 0.7, 0.14359330833658562249, 0.0),
    (
        1,
        0.5,
        0.3,
        0.17,
        0.7,
        0.13432316205800690105,
        -0.15375030722791079126,
    ),
    (
        2,
        0.5,
        -1.1,
        0.4,
        1.3,
        0.0024746308535779059958,
        0.0019520631512007074156,
    ),
    (
        3,
        -1.2,
        2.0,
        1.0,
        0.5,
        -0.000063343839607630887312,
        0.000076700173580946304883,
    ),
];

#[test]
fn nu_reference_values() {
    for (n, mu, exact) in NU_REFERENCE {
        let est = mehler::nu_estimate(n, mu, mehler::DEFAULT_NU_TOL).unwrap();
        assert_relative_eq!(est.value, exact, max_relative = 1e-10);
        assert!(est.est_error <= 1e-10 * exact);
        assert_relative_eq!(common::nu_trapezoid(n, mu), exact, max_relative = 1e-12);
    }
    // n = 1 closed form: π² / (8 cos²(πμ/2)) / (2π)² / 2 · 2.
    let mu: f64 = 0.9;
    let closed = std::f64::consts::PI.powi(2)
        / (2.0 * (std::f64::consts::FRAC_PI_2 * mu).cos().powi(2))
        / (2.0 * std::f64::consts::PI).powi(2)
        / 2.0;
    assert_relative_eq!(
        mehler::nu(1, mu, 1e-12).unwrap(),
        closed,
        max_relative = 1e-11
    );
}

#[test]
fn kernel_reference_values() {
    for (n, mu, x0, r2, t, re, im) in KERNEL_REFERENCE {
        let k = mehler::heat_kernel(&HeatQuery::new(n, mu, x0, r2, t)).unwrap();
        let exact = Complex64::new(re, im);
        assert!(
            (k.value - exact).norm() <= 1e-8 * exact.norm(),
            "{n} {mu}: {} vs {exact}",
            k.value
        );
    }
}

#[test]
fn kernel_hermitian_in_x0() {
    let a = mehler::heat_kernel(&HeatQuery::new(2, 0.7, 0.9, 0.3, 0.8)).unwrap();
    let b = mehler::heat_kernel(&HeatQuery::new(2, 0.7, -0.9, 0.3, 0.8)).unwrap();
    assert!((a.value - b.value.conj()).norm() < 1e-12 * a.value.norm());
}

#[test]
fn kernel_parabolic_scaling() {
    // k(λ²x0, λ²r², λ²t) = λ^{−(2n+2)} k(x0, r², t).
    let (n, lambda) = (2u32, 1.7f64);
    let l2 = lambda * lambda;
    let a = mehler::heat_kernel(&HeatQuery::new(n, 0.4, 0.5, 0.6, 0.9)).unwrap();
    let b = mehler::heat_kernel(&HeatQuery::new(n, 0.4, l2 * 0.5, l2 * 0.6, l2 * 0.9)).unwrap();
    let scaled = b.value * lambda.powi(2 * n as i32 + 2);
    assert!((scaled - a.value).norm() < 1e-9 * a.value.norm());
}

#[test]
fn karamata_recovers_power_laws() {
    // (d + 2)/m ∈ {1, 3/2, 2}, with t·λ_max large enough that truncation is invisible.
    for (a, d, m) in [(1.0, 2, 4), (1.5, 1, 2), (2.0, 2, 2)] {
        let nu0 = 1.3;
        let sp = synthetic_spectrum(a, nu0, 1_000_000).unwrap();
        let samples: Vec<(f64, f64)> = [0.04, 0.03, 0.02, 0.01]
            .iter()
            .map(|&t| (t, heat_trace(&sp, t).unwrap()))
            .collect();
        let fit = weyl::karamata_fit(&samples, d, m).unwrap();
        assert_relative_eq!(fit.nu0, nu0, max_relative = 0.02);
    }
}

#[test]
fn heat_trace_matches_counting_stieltjes() {
    // Σ e^{−tλ_k} = t ∫ e^{−tλ} N(λ) dλ, with N piecewise constant.
    let sp = Spectrum::new(vec![0.0, 1.5, 2.0, 7.25], vec![1, 3, 2, 4]).unwrap();
    for t in [0.1, 0.7, 2.0] {
        let eigs = sp.eigenvalues();
        let mut integral = 0.0;
        for (i, &l) in eigs.iter().enumerate() {
            let next = eigs.get(i + 1).map_or(0.0, |&u| (-t * u).exp());
            integral += counting_function(&sp, l) as f64 * ((-t * l).exp() - next) / t;
        }
        assert_relative_eq!(
            heat_trace(&sp, t).unwrap(),
            t * integral,
            max_relative = 1e-14
        );
    }
}

#[test]
fn spectrum_csv_round_trip() {
    let sp = Spectrum::new(vec![0.0, 0.1 + 0.2, 1e-300, 7.0], vec![1, 2, 3, 4]);
    assert!(sp.is_err(), "unsorted input must be rejected");
    let sp = Spectrum::new(vec![0.0, 1e-300, 0.1 + 0.2, 7.0], vec![1, 3, 2, 4]).unwrap();
    let mut buf = Vec::new();
    sp.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("eigenvalue,multiplicity\n"));
    assert_eq!(Spectrum::read_csv(buf.as_slice()).unwrap(), sp);
}

#[test]
fn nilmanifold_second_order() {
    // Lowest nonzero eigenvalue of the continuum operator at μ = 0 is 2π.
    let level = |n: usize| {
        let sp = nilmanifold_spectrum(&NilmanifoldGrid::new(n, 0.0).unwrap(), 2).unwrap();
        sp.expanded()[1]
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let ratio = (level(6) - two_pi) / (level(12) - two_pi);
    assert!((3.0..=5.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn nilmanifold_nonnegative_with_mu() {
    let sp = nilmanifold_spectrum(&NilmanifoldGrid::new(8, 0.6).unwrap(), 100).unwrap();
    assert!(sp.eigenvalues()[0] > -1e-10);
    // For μ ≠ 0 the constants still lie in the kernel.
    assert!(sp.eigenvalues()[0].abs() < 1e-10);
}

#[test]
fn mellin_semigroup() {
    let p = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
    let op = MatrixOperator::new(p).unwrap();
    let prm = MellinParams::default();
    for (s1, s2) in [(0.3, 0.5), (1.0, 0.7), (0.4, 0.2)] {
        let a = mellin_power(&op, Complex64::new(s1, 0.3), prm).unwrap();
        let b = mellin_power(&op, Complex64::new(s2, -0.1), prm).unwrap();
        let ab = mellin_power(&op, Complex64::new(s1 + s2, 0.2), prm).unwrap();
        assert!((a * b - &ab).norm() <= 1e-7 * ab.norm());
    }
}

fn signed_eigs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1u32..4, 1..4).prop_map(|v| {
        let mut e: Vec<f64> = v.into_iter().flat_map(|x| [x as f64 * 0.5; 2]).collect();
        e.sort_by(|a, b| b.total_cmp(a));
        e
    })
}

proptest! {
    #[test]
    fn rockland_matches_exhaustive_lattice(eigs in signed_eigs(), mu in -12.0f64..12.0, snap in any::<bool>()) {
        // Snap μ onto the half-integer grid half the time so that hits occur.
        let mu = if snap { (mu * 2.0).round() / 2.0 } else { mu };
        let levi = LeviData::new(eigs.clone()).unwrap();
        let gens: Vec<f64> = eigs.iter().step_by(2).copied().collect();
        let threshold = 0.5 * eigs.iter().sum::<f64>();
        let mut gens_all = gens.clone();
        gens_all.extend(gens);
        let model = SublaplacianModel::new(levi, vec![Complex64::new(mu, 0.0)], 1e-9).unwrap();
        let expected = !common::in_singular_set(mu, threshold, &gens_all, true);
        prop_assert_eq!(hypo::rockland_sublaplacian(&model), expected);
        if hypo::weaker_condition(&model) {
            prop_assert!(hypo::rockland_sublaplacian(&model));
        }
    }

    #[test]
    fn off_axis_spectrum_is_always_rockland(eigs in signed_eigs(), re in -10.0f64..10.0, im in 0.01f64..3.0) {
        let model = SublaplacianModel::new(LeviData::new(eigs).unwrap(), vec![Complex64::new(re, im)], 1e-9).unwrap();
        prop_assert!(hypo::check_rockland(&model).pass);
        prop_assert!(hypo::check_weaker(&model).pass);
    }

    #[test]
    fn y_witness_contains_degree(n in 0usize..9, r_frac in 0.0f64..1.0, k_frac in 0.0f64..1.0, q_frac in 0.0f64..1.0) {
        let r = (r_frac * (n + 1) as f64) as usize;
        let kappa = (k_frac * (r + 1) as f64) as usize;
        let q = (q_frac * (n + 1) as f64) as usize;
        let v = hypo::check_y(n, kappa, r, q).unwrap();
        match v.witness {
            Some(Witness::Window { lo, hi }) => prop_assert!(!v.pass && lo <= q && q <= hi),
            None => prop_assert!(v.pass),
            Some(other) => prop_assert!(false, "unexpected witness {:?}", other),
        }
        // Y(q) is invariant under q ↦ n − q combined with κ ↦ r − κ.
        prop_assert_eq!(v.pass, hypo::y_condition(n, r - kappa, r, n - q).unwrap());
    }

    #[test]
    fn ypq_with_p_zero_matches_enumeration(n in 1usize..9, kappa_frac in 0.0f64..1.0, q_frac in 0.0f64..1.0) {
        let kappa = (kappa_frac * (n + 1) as f64) as usize;
        let q = (q_frac * (n + 1) as f64) as usize;
        prop_assert_eq!(hypo::ypq_condition(n, kappa, n, 0, q).unwrap(), common::brute_ypq(n, kappa, n, 0, q));
    }

    #[test]
    fn privileged_frame_rows_map_to_basis(entries in prop::collection::vec(-2.0f64..2.0, 9), u0 in -1.0f64..1.0) {
        let mut frame = DMatrix::from_row_slice(3, 3, &entries);
        for i in 0..3 {
            frame[(i, i)] += 5.0;
        }
        let u = Point::new(u0, vec![0.3, -0.4]);
        let psi = privileged_change(&frame, &u).unwrap();
        let prod = &psi.a * frame.transpose();
        prop_assert!((prod - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
        let centre = psi.apply(&u).unwrap();
        prop_assert!(centre.x0.abs() < 1e-15 && centre.xprime.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn nu_is_even(n in 1u32..4, frac in 0.0f64..0.95) {
        let mu = frac * n as f64;
        let a = mehler::nu(n, mu, 1e-10).unwrap();
        let b = mehler::nu(n, -mu, 1e-10).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn predictions_invert(d in 1u32..8, m in (1u32..4).prop_map(|h| 2 * h), nu0 in 0.1f64..10.0, lambda in 1.0f64..1e4) {
        let model = weyl::AsymptoticModel::new(d, m, nu0).unwrap();
        let count = weyl::predict(&model, weyl::Prediction::Counting(lambda)).unwrap();
        let back = weyl::predict(&model, weyl::Prediction::Eigen(count)).unwrap();
        prop_assert!((back - lambda).abs() <= 1e-10 * lambda);
    }
}

#[test]
fn weyl_tables_cover_every_index() {
    for n in 1..=4u32 {
        for kappa in 0..=n / 2 {
            for coeff in [weyl::Coefficient::Alpha, weyl::Coefficient::Beta] {
                let t = weyl::table(coeff, n, kappa, 1e-10).unwrap();
                assert_eq!(t.rows.len() + t.skipped.len(), ((n + 1) * (n + 1)) as usize);
                assert!(t.rows.iter().all(|r| r.value > 0.0));
            }
        }
        let t = weyl::table(weyl::Coefficient::Gamma, n, 0, 1e-10).unwrap();
        assert_eq!(t.skipped.len(), 1);
        assert_eq!(t.skipped[0].index, vec![n]);
    }
    assert!(matches!(
        weyl::table(weyl::Coefficient::Alpha, 3, 2, 1e-10),
        Err(Error::OutOfRange(_))
    ));
}
