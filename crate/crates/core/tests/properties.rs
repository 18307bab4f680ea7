//! Property-based invariants.

use effham_core::coupling::{bare_mass_from_observed, smoothing_from_moment, smoothing_parameter};
use effham_core::focksim::{
    discrete_bare_mass, discretize_field, fiber_ground_energy_exact, fiber_hamiltonian, overlap, overlap_exponent,
    polarization_frame, AngularRule, DiscreteModes, FockBasis, ModeNode, RadialRule,
};
use effham_core::linalg::{dot, SymmetricOperator};
use effham_core::model::{field_moment, nondimensionalize, unit_sphere_area, FieldModel, PhysicalParams};
use effham_core::potentials::{
    effective_potential, gauss_kernel_convolve, ConvolutionMethod, GridSpec, PotentialSpec, SmoothedRepr,
};
use effham_core::spectra::{build_hamiltonian, ground_state, HamiltonianOptions};
use ndarray::{Array1, ArrayD};
use proptest::prelude::*;

fn sharp_moment_closed_form(d: usize, c: f64, kappa: f64, lambda: f64, p: u32) -> f64 {
    let pref = unit_sphere_area(d) * (2.0 * std::f64::consts::PI).powi(-(d as i32)) / c.powi(p as i32);
    let e = d as i32 - p as i32;
    if e == 0 {
        pref * (lambda / kappa).ln()
    } else {
        pref * (lambda.powi(e) - kappa.powi(e)) / e as f64
    }
}

fn line(v: Vec<f64>) -> ArrayD<f64> {
    Array1::from(v).into_dyn()
}

fn smooth_field(n: usize, centres: &[(f64, f64)]) -> Vec<f64> {
    let h = 16.0 / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = -8.0 + i as f64 * h;
            centres.iter().map(|(c, a)| a * (-(x - c) * (x - c)).exp()).sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moments_match_closed_form(d in 2usize..=4, kappa in 0.1f64..2.0, ratio in 1.05f64..50.0,
                                 c in 0.3f64..3.0, p in 2u32..=3) {
        let params = PhysicalParams::new(1.0, c, 1.0, 1.0, 1.0, d).unwrap();
        let f = FieldModel::sharp_shell(params, kappa, kappa * ratio).unwrap();
        let exact = sharp_moment_closed_form(d, c, kappa, kappa * ratio, p);
        let got = field_moment(&f, p).unwrap();
        prop_assert!((got - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn moments_are_monotone_in_cutoffs(kappa in 0.1f64..2.0, ratio in 1.1f64..20.0, grow in 1.01f64..3.0) {
        let p = PhysicalParams::natural(3);
        let base = FieldModel::sharp_shell(p, kappa, kappa * ratio).unwrap();
        let wider = FieldModel::sharp_shell(p, kappa, kappa * ratio * grow).unwrap();
        let lower = FieldModel::sharp_shell(p, kappa / grow, kappa * ratio).unwrap();
        for q in [2, 3] {
            let m = field_moment(&base, q).unwrap();
            prop_assert!(field_moment(&wider, q).unwrap() > m);
            prop_assert!(field_moment(&lower, q).unwrap() > m);
        }
    }

    #[test]
    fn nondimensionalization_round_trips(hbar in 1e-3f64..1e3, c in 1e-2f64..1e3, eps0 in 1e-3f64..1e2,
                                         q in -5.0f64..5.0, m in 1e-3f64..1e3, unit in 1e-3f64..1e3) {
        let p = PhysicalParams::new(hbar, c, eps0, q, m, 3).unwrap();
        let back = nondimensionalize(&p, unit).unwrap().unscale();
        for (x, y) in [(back.hbar, hbar), (back.c, c), (back.eps0, eps0), (back.q, q), (back.m, m)] {
            prop_assert!((x - y).abs() <= 1e-14 * y.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn smoothing_constant_is_reassembled_exactly(q in -3.0f64..3.0, m in 0.1f64..10.0, lambda in 1.5f64..30.0) {
        let p = PhysicalParams::natural(3).with_charge(q).with_mass(m);
        let f = FieldModel::sharp_shell(p, 1.0, lambda).unwrap();
        let r = smoothing_parameter(&p, &f).unwrap();
        let again = smoothing_from_moment(&p, m, r.i3);
        prop_assert!((r.a - again).abs() <= 1e-15 * r.a.abs());
        prop_assert_eq!(r.a == 0.0, q == 0.0);
        let m0 = bare_mass_from_observed(&p, &f).unwrap();
        prop_assert!(m0 > 0.0 && m0 <= m);
    }

    #[test]
    fn smoothing_is_linear_monotone_and_keeps_lower_bound(
        c1 in prop::collection::vec((-5.0f64..5.0, -2.0f64..2.0), 1..4),
        c2 in prop::collection::vec((-5.0f64..5.0, 0.0f64..2.0), 1..4),
        alpha in -2.0f64..2.0, beta in -2.0f64..2.0, a in 0.005f64..0.2,
    ) {
        let n = 321;
        let h = 16.0 / (n - 1) as f64;
        let v = smooth_field(n, &c1);
        // w = v + non-negative bumps, so v ≤ w pointwise.
        let bump = smooth_field(n, &c2);
        let w: Vec<f64> = v.iter().zip(&bump).map(|(x, y)| x + y).collect();
        let sv = gauss_kernel_convolve(&line(v.clone()), a, h, ConvolutionMethod::Fft).unwrap();
        let sw = gauss_kernel_convolve(&line(w.clone()), a, h, ConvolutionMethod::Fft).unwrap();
        let mix: Vec<f64> = v.iter().zip(&w).map(|(x, y)| alpha * x + beta * y).collect();
        let smix = gauss_kernel_convolve(&line(mix), a, h, ConvolutionMethod::Fft).unwrap();
        let scale = v.iter().chain(&w).fold(1.0f64, |m, x| m.max(x.abs()));
        let inf_v = v.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
        for i in 0..n {
            prop_assert!((smix[i] - alpha * sv[i] - beta * sw[i]).abs() <= 1e-12 * scale * (1.0 + alpha.abs() + beta.abs()));
            prop_assert!(sv[i] <= sw[i] + 1e-12 * scale);
            prop_assert!(sv[i] >= inf_v - 1e-12 * scale);
        }
    }

    #[test]
    fn smoothing_commutes_with_periodic_shift(vals in prop::collection::vec(-3.0f64..3.0, 64), shift in 1usize..63,
                                             a in 0.001f64..0.05) {
        let h = 0.05;
        let shifted: Vec<f64> = (0..64).map(|i| vals[(i + shift) % 64]).collect();
        let s1 = gauss_kernel_convolve(&line(vals), a, h, ConvolutionMethod::Periodic).unwrap();
        let s2 = gauss_kernel_convolve(&line(shifted), a, h, ConvolutionMethod::Periodic).unwrap();
        for i in 0..64 {
            prop_assert!((s2[i] - s1[(i + shift) % 64]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_width_is_identity(vals in prop::collection::vec(-3.0f64..3.0, 16)) {
        let grid = GridSpec::box_grid(1, 2.0, 16).unwrap();
        let v = PotentialSpec::grid_sampled(grid, vals.clone()).unwrap();
        let s = effective_potential(&v, 0.0, Some(&grid)).unwrap();
        let out = s.sample(&grid).unwrap();
        for (x, y) in out.iter().zip(&vals) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn smoothed_harmonic_is_shifted_parabola(k in 0.1f64..5.0, a in 0.0f64..1.0, d in 1usize..=4,
                                             x in prop::collection::vec(-5.0f64..5.0, 4)) {
        let v = PotentialSpec::harmonic(d, k).unwrap();
        let s = effective_potential(&v, a, None).unwrap();
        let r2: f64 = x[..d].iter().map(|c| c * c).sum();
        if a > 0.0 {
            let closed = matches!(s.repr, SmoothedRepr::ClosedFormHarmonic { .. });
            prop_assert!(closed);
        }
        prop_assert!((s.value_at(&x[..d]) - (0.5 * k * r2 + k * d as f64 * a)).abs() <= 1e-12 * (1.0 + r2));
    }

    #[test]
    fn polarization_frames_complete_the_wavevector(k in prop::collection::vec(-3.0f64..3.0, 3)) {
        prop_assume!(k.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let frame = polarization_frame(&k).unwrap();
        let kn2: f64 = k.iter().map(|x| x * x).sum();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = frame.iter().map(|e| e[i] * e[j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((s - (id - k[i] * k[j] / kn2)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn discrete_mass_identity(p in prop::collection::vec(-10.0f64..10.0, 3), q in 0.1f64..3.0) {
        let params = PhysicalParams::natural(3).with_charge(q);
        let f = FieldModel::sharp_shell(params, 1.0, 3.0).unwrap();
        let modes = discretize_field(&f, 4, AngularRule::SphericalDesign(3), RadialRule::GaussLegendre).unwrap();
        let m0 = discrete_bare_mass(&modes, &params);
        let e0 = fiber_ground_energy_exact(&modes, &p, &params, m0).unwrap();
        let exact = dot(&p, &p) / 2.0;
        prop_assert!((e0 - exact).abs() <= 1e-13 * exact.max(1e-300));
    }

    #[test]
    fn overlap_is_symmetric_and_gaussian(p in prop::collection::vec(-2.0f64..2.0, 3),
                                         p2 in prop::collection::vec(-2.0f64..2.0, 3), t in 0.1f64..3.0) {
        let params = PhysicalParams::natural(3).with_charge(1.3);
        let f = FieldModel::sharp_shell(params, 1.0, 2.0).unwrap();
        let modes = discretize_field(&f, 3, AngularRule::SphericalDesign(5), RadialRule::GaussLegendre).unwrap();
        let o1 = overlap(&modes, &p, &p2, &params).unwrap();
        let o2 = overlap(&modes, &p2, &p, &params).unwrap();
        prop_assert!(o1 == o2 && o1 > 0.0 && o1 <= 1.0);
        // The exponent scales quadratically along any ray.
        let dp: Vec<f64> = p.iter().zip(&p2).map(|(a, b)| a - b).collect();
        let scaled: Vec<f64> = dp.iter().map(|x| t * x).collect();
        let e1 = overlap_exponent(&modes, &dp, &params);
        let et = overlap_exponent(&modes, &scaled, &params);
        prop_assert!((et - t * t * e1).abs() <= 1e-10 * (1.0 + et));
    }

    #[test]
    fn fiber_matrix_is_symmetric(q in 0.1f64..3.0, p in prop::collection::vec(-2.0f64..2.0, 2), n in 1usize..8) {
        let params = PhysicalParams::natural(2).with_charge(q);
        let nodes = [
            ModeNode { k: vec![1.0, 0.0], weight: 0.7, omega: 1.0, rho: 0.9 },
            ModeNode { k: vec![0.3, 1.5], weight: 1.1, omega: 1.7, rho: 0.4 },
        ];
        let modes = DiscreteModes::from_nodes(&params, &nodes).unwrap();
        let basis = FockBasis::new(modes.channel_count(), n).unwrap();
        let h = fiber_hamiltonian(&modes, &basis, &p, &params, 0.8).unwrap();
        prop_assert!(h.matrix.asymmetry() <= 1e-13);
        prop_assert!((h.matrix.get(0, 0) - dot(&p, &p) / 1.6).abs() <= 1e-15);
    }

    #[test]
    fn grid_hamiltonian_is_symmetric_and_bounded_below(seed in 0u64..1000, k in 0.1f64..3.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = GridSpec::box_grid(2, 4.0, 20).unwrap();
        let v = PotentialSpec::harmonic(2, k).unwrap();
        let h = build_hamiltonian(&v.into(), &grid, 1.0, &PhysicalParams::natural(2), HamiltonianOptions::default()).unwrap();
        let x: Vec<f64> = (0..h.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..h.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
        let (mut hx, mut hy) = (vec![0.0; h.dim()], vec![0.0; h.dim()]);
        h.apply(&x, &mut hx);
        h.apply(&y, &mut hy);
        let (a, b) = (dot(&x, &hy), dot(&hx, &y));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        let e = ground_state(&h).unwrap().eigenvalues[0];
        prop_assert!(e >= h.potential_floor());
    }
}
