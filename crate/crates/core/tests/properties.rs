use std::f64::consts::{PI, TAU};

use contextium::kcbs::{dichotomic_observable, zero_eigenstate};
use contextium::majorana::{
    overlap_via_bargmann, stars_from_state, state_from_stars, triad_coefficients, variance_a, zero_population,
};
use contextium::measures::{
    d_single, hybrid_bound, mie, mie_via_commutators, opnorm_bound, purity_bound, robertson_check,
    spectral_bound,
};
use contextium::operator::{
    commutator, conjugate_diagonal, eigendecompose, fidelity, hs_norm, max_norm, purity, random, trace_norm,
    variance, CMatrix, DEFAULT_GROUP_TOL,
};
use contextium::{Context, DensityMatrix, Direction, HermitianOperator, StarPair};
use proptest::prelude::*;
use rand::Rng;

fn direction() -> impl Strategy<Value = Direction> {
    (-1.0f64..=1.0, 0.0f64..TAU).prop_map(|(z, p)| Direction::new(z.acos(), p).unwrap())
}

fn star_pair() -> impl Strategy<Value = StarPair> {
    (direction(), direction()).prop_map(|(m, n)| StarPair::new(m, n))
}

fn context_from_seed(seed: u64) -> Context {
    let mut rng = random::rng(seed);
    let d = rng.random_range(3..=5);
    let u = random::unitary(d, &mut rng);
    // B has a two-fold eigenvalue so that A and C need not commute.
    let mut bvals: Vec<f64> = vec![0.0, 0.0];
    bvals.extend((2..d).map(|i| i as f64));
    let b = conjugate_diagonal(&u, &bvals).unwrap();
    let block = |rng: &mut rand_chacha::ChaCha8Rng| {
        let h = random::hermitian(2, rng);
        let mut m = CMatrix::zeros(d, d);
        m.view_mut((0, 0), (2, 2)).copy_from(&*h);
        for i in 2..d {
            m[(i, i)] = num_complex::Complex64::new(rng.random::<f64>() * 4.0 - 2.0, 0.0);
        }
        HermitianOperator::new(&u * m * u.adjoint()).unwrap()
    };
    let a = block(&mut rng);
    let c = block(&mut rng);
    Context::new(a, b, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = random::rng(seed);
        let h = random::hermitian(d, &mut rng);
        let dec = eigendecompose(&h, DEFAULT_GROUP_TOL).unwrap();
        prop_assert!(max_norm(&(dec.reconstruct() - &*h)) < 1e-10);
        prop_assert_eq!(dec.dims.iter().sum::<usize>(), d);
        for w in dec.eigenvalues.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn norms_are_ordered(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = random::rng(seed);
        let x = random::ginibre(d, &mut rng);
        let op = contextium::operator::op_norm(&x);
        let hs = hs_norm(&x);
        let tr = trace_norm(&x);
        prop_assert!(op <= hs + 1e-12);
        prop_assert!(hs <= tr + 1e-12);
        prop_assert!(tr <= (d as f64).sqrt() * hs + 1e-12);
    }

    #[test]
    fn projector_commutator_identity(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = random::rng(seed);
        let p = random::projector(d, rng.random_range(1..d), &mut rng);
        let q = random::projector(d, rng.random_range(1..d), &mut rng);
        let lhs = hs_norm(&commutator(&p, &q).unwrap()).powi(2);
        let pq = &*p * &*q;
        let rhs = 2.0 * pq.trace().re - 2.0 * (&pq * &pq).trace().re;
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn mie_forms_agree_and_stay_in_range(seed in any::<u64>()) {
        let ctx = context_from_seed(seed);
        let e = mie(&ctx).unwrap();
        let ec = mie_via_commutators(&ctx).unwrap();
        prop_assert!((e.raw - ec.raw).abs() < 1e-10);
        let d = ctx.dim() as f64;
        prop_assert!(e.value >= 1.0 / d && e.value <= 1.0);
    }

    #[test]
    fn bound_chain(seed in any::<u64>(), mixed in any::<bool>()) {
        let ctx = context_from_seed(seed);
        let mut rng = random::rng(seed ^ 0x9e37_79b9);
        let rho = if mixed { random::mixed_with(ctx.dim(), &mut rng) } else { random::pure_with(ctx.dim(), &mut rng) };
        let d = d_single(&ctx, &rho).unwrap();
        let slack = 1e-9;
        prop_assert!(d <= hybrid_bound(&ctx, &rho).unwrap() + slack);
        prop_assert!(hybrid_bound(&ctx, &rho).unwrap() <= purity_bound(&ctx, &rho).unwrap() + slack);
        prop_assert!(purity_bound(&ctx, &rho).unwrap() <= spectral_bound(&ctx).unwrap() + slack);
        prop_assert!(d <= opnorm_bound(&ctx) + slack);
        prop_assert!(robertson_check(&ctx, &rho).unwrap().satisfied);
    }

    #[test]
    fn purity_range(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = random::rng(seed);
        let rho = random::mixed_with(d, &mut rng);
        let b = purity(&rho);
        prop_assert!(b >= 1.0 / d as f64 - 1e-12 && b <= 1.0 + 1e-12);
    }

    #[test]
    fn dichotomic_observables(k in direction()) {
        let a = dichotomic_observable(&k);
        prop_assert!(max_norm(&(&*a * &*a - CMatrix::identity(3, 3))) < 1e-12);
        prop_assert!((a.trace().re - 1.0).abs() < 1e-12);
        let z = zero_eigenstate(&k);
        prop_assert!((&*a * &z + &z).norm() < 1e-12);
    }

    #[test]
    fn wrapped_direction_keeps_vector(t in -10.0f64..10.0, p in -10.0f64..10.0) {
        let d = Direction::wrapped(t, p);
        let v = d.vector();
        let want = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
        for i in 0..3 {
            prop_assert!((v[i] - want[i]).abs() < 1e-12);
        }
        prop_assert!(d.theta() >= 0.0 && d.theta() <= PI);
        prop_assert!(d.phi() >= 0.0 && d.phi() < TAU);
    }

    #[test]
    fn star_round_trip(p in star_pair()) {
        let psi = state_from_stars(&p);
        let back = stars_from_state(&psi).unwrap();
        prop_assert!(fidelity(&psi, &state_from_stars(&back)) > 1.0 - 1e-9);
        if p.cos_angle() > -1.0 + 1e-6 {
            prop_assert!(back.distance(&p) < 1e-7);
        }
    }

    #[test]
    fn triad_coefficients_normalized(p in star_pair(), k in direction()) {
        let tc = triad_coefficients(&p, &k);
        prop_assert!((tc.norm_sqr() - 1.0).abs() < 1e-10);
        let direct = zero_population(&state_from_stars(&p), &k);
        prop_assert!((tc.k.norm_sqr() - direct).abs() < 1e-9);
        prop_assert!((overlap_via_bargmann(&p, &k) - direct).abs() < 1e-9);
    }

    #[test]
    fn near_antipodal_normalization(m in direction(), eps in 1e-12f64..1e-4, k in direction()) {
        let v = m.antipode().vector();
        let n = Direction::from_vector([v[0] + eps, v[1] - eps, v[2] + eps]).unwrap();
        let tc = triad_coefficients(&StarPair::new(m, n), &k);
        prop_assert!((tc.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn variance_formula(p in star_pair(), k in direction()) {
        let rho = DensityMatrix::from_pure(&state_from_stars(&p)).unwrap();
        let direct = variance(&dichotomic_observable(&k), &rho).unwrap();
        prop_assert!((variance_a(&p, &k) - direct).abs() < 1e-10);
        prop_assert!(direct <= 1.0 + 1e-12);
    }
}
