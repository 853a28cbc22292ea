use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use bloch_lab::criteria::{coordinate_density, criterion_density, schwarz_expansion_sup};
use bloch_lab::experiment::random_polynomials;
use bloch_lab::holo::{compose, moebius_automorphism, HoloFunction, HoloSelfMap};
use bloch_lab::norms::{bloch_density, bloch_norm_estimate, timoney_q};
use bloch_lab::oracle::{discrepancy, fd_gradient, FD_STEP};
use bloch_lab::polydisk::{bergman_metric, boundary_distance, disk_weight, segment_point, ClosedPoint, Direction, PolydiskPoint};
use bloch_lab::sampling::{maximize, SamplingPlan};
use bloch_lab::testfn::{tail_bound, Family, TestFunction};

fn coords(n: usize, max_r: f64) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.0..max_r, 0.0..TAU), n)
        .prop_map(|v| v.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect())
}

fn point(n: usize, max_r: f64) -> impl Strategy<Value = PolydiskPoint> {
    coords(n, max_r).prop_map(|c| PolydiskPoint::new(c).unwrap())
}

fn complex(max: f64) -> impl Strategy<Value = Complex64> {
    (-max..max, -max..max).prop_map(|(a, b)| Complex64::new(a, b))
}

fn polynomial(n: usize, seed: u64) -> HoloFunction {
    random_polynomials(n, 1, 4, seed).pop().unwrap().1
}

/// A Möbius automorphism of `U^2` from raw parameters.
fn automorphism(a: &[Complex64], theta: &[f64], swap: bool) -> HoloSelfMap {
    moebius_automorphism(a, theta, if swap { &[1, 0] } else { &[0, 1] }).unwrap()
}

fn small_plan(seed: u64) -> SamplingPlan {
    SamplingPlan { levels: 8, angular_count: 8, max_rounds: 3, budget: 50_000, seed, ..SamplingPlan::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bergman_metric_is_quadratically_homogeneous(
        z in point(3, 0.999),
        u in prop::collection::vec(complex(2.0), 3),
        lambda in complex(3.0),
    ) {
        let u = Direction::new(u);
        let lhs = bergman_metric(&z, &u.scale(lambda)).unwrap();
        let rhs = lambda.norm_sqr() * bergman_metric(&z, &u).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn boundary_distance_is_positive_exactly_inside(c in coords(2, 0.999_999), k in 0usize..2, t in 0.0..TAU) {
        prop_assert!(boundary_distance(&c) > 0.0);
        let mut on_boundary = c.clone();
        on_boundary[k] = Complex64::from_polar(1.0, t);
        let closed = ClosedPoint::new(on_boundary).unwrap();
        prop_assert_eq!(closed.is_interior(), boundary_distance(closed.coords()) > 0.0);
    }

    #[test]
    fn segment_differences_telescope(z in point(3, 0.95), w in point(3, 0.95), seed in any::<u64>()) {
        let f = polynomial(3, seed);
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 1..=3 {
            let a = f.eval(segment_point(&z, &w, j - 1).unwrap().coords()).unwrap();
            let b = f.eval(segment_point(&z, &w, j).unwrap().coords()).unwrap();
            sum += a - b;
        }
        let direct = f.eval(z.coords()).unwrap() - f.eval(w.coords()).unwrap();
        prop_assert!((sum - direct).norm() <= 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn series_partials_match_finite_differences(z in coords(2, 0.95), seed in any::<u64>()) {
        let f = polynomial(2, seed);
        let exact = f.gradient_at(&z).unwrap();
        let fd = fd_gradient(&f, &z, FD_STEP).unwrap();
        for (a, b) in exact.iter().zip(&fd) {
            prop_assert!((a - b).norm() <= 1e-6 * a.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn compose_follows_the_chain_rule(
        z in coords(2, 0.99),
        a in prop::collection::vec((0.0..0.9f64, 0.0..TAU), 2),
        theta in prop::collection::vec(0.0..TAU, 2),
        swap in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let a: Vec<Complex64> = a.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect();
        let phi = Arc::new(automorphism(&a, &theta, swap));
        let f = polynomial(2, seed);
        let composed = compose(&f, &phi).unwrap().gradient_at(&z).unwrap();
        let jet = phi.jet(&z).unwrap();
        let outer = f.gradient_at(&jet.values).unwrap();
        for k in 0..2 {
            let expected: Complex64 = (0..2).map(|m| outer[m] * jet.jacobian[m][k]).sum();
            prop_assert!((composed[k] - expected).norm() <= 1e-12 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn automorphisms_keep_points_inside_and_preserve_the_metric(
        z in coords(2, 0.999),
        a in prop::collection::vec((0.0..0.95f64, 0.0..TAU), 2),
        theta in prop::collection::vec(0.0..TAU, 2),
        swap in any::<bool>(),
    ) {
        let a: Vec<Complex64> = a.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect();
        let phi = automorphism(&a, &theta, swap);
        let image = phi.eval(&z).unwrap();
        prop_assert!(image.iter().all(|c| c.norm() < 1.0));
        let ratio = schwarz_expansion_sup(&phi, &z).unwrap();
        prop_assert!((ratio - 1.0).abs() <= 1e-9, "{ratio}");
    }

    #[test]
    fn l1_density_is_sandwiched_by_timoney(z in coords(3, 0.999), seed in any::<u64>()) {
        let f = polynomial(3, seed);
        let d = bloch_density(&f, 1.0, &z).unwrap();
        let q = timoney_q(&f, &z).unwrap();
        let tol = 1e-12 * d.max(1.0);
        prop_assert!(q <= d + tol && d <= 3f64.sqrt() * q + tol, "q {q} d {d}");
    }

    #[test]
    fn criterion_density_is_the_sum_of_rows(
        z in coords(2, 0.999),
        a in prop::collection::vec((0.0..0.9f64, 0.0..TAU), 2),
        theta in prop::collection::vec(0.0..TAU, 2),
        p in 0.1..3.0f64,
        q in 0.1..3.0f64,
    ) {
        let a: Vec<Complex64> = a.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect();
        let phi = automorphism(&a, &theta, false);
        let total = criterion_density(&phi, p, q, &z).unwrap();
        let rows: f64 = (0..2).map(|l| coordinate_density(&phi, p, q, l, &z).unwrap()).sum();
        prop_assert!((total - rows).abs() <= 1e-12 * total.max(1.0));
    }

    #[test]
    fn f_family_density_identity(z in coords(2, 0.999), w in coords(1, 0.99), l in 0usize..2, p in 0.2..2.5f64) {
        let t = TestFunction::new(Family::F, 2, l, w[0], p).unwrap();
        let d = bloch_density(&t.to_holo(), p, &z).unwrap();
        let expected = (disk_weight(z[l]) / (Complex64::new(1.0, 0.0) - w[0].conj() * z[l]).norm()).powf(p);
        prop_assert!((d - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn g_family_decays_on_compact_sets(z in coords(2, 0.9), angle in 0.0..TAU, radius in 0.9..0.999f64, p in 0.2..2.5f64) {
        let w = Complex64::from_polar(radius, angle);
        let g = TestFunction::new(Family::G, 2, 0, w, p).unwrap();
        let allowed = (1.0 - w.norm_sqr()) / (1.0 - 0.9f64).powf(p);
        prop_assert!(g.eval(&z).unwrap().norm() <= allowed * (1.0 + 1e-12));
    }

    #[test]
    fn discrepancy_is_symmetric_and_bounded(a in -1e6..1e6f64, b in -1e6..1e6f64) {
        let d = discrepancy(a, b);
        prop_assert_eq!(d, discrepancy(b, a));
        prop_assert!(d >= 0.0 && d <= 2.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn norm_trace_is_nondecreasing(seed in any::<u64>(), p in 0.3..2.0f64) {
        let f = polynomial(2, seed);
        let est = bloch_norm_estimate(&f, p, &small_plan(seed)).unwrap();
        prop_assert!(est.trace.windows(2).all(|w| w[1] >= w[0]), "{:?}", est.trace);
        prop_assert!((est.value - est.offset - est.trace.last().copied().unwrap_or(0.0)).abs() <= 1e-12 * est.value.max(1.0));
    }

    #[test]
    fn maximize_is_deterministic_for_a_seed(seed in any::<u64>()) {
        let f = polynomial(2, seed);
        let run = || maximize(2, &small_plan(seed), |z| bloch_density(&f, 1.0, z)).unwrap();
        let (a, b) = (run(), run());
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn g_truncation_gap_is_below_the_tail(angle in 0.0..TAU, radius in 0.1..0.8f64) {
        let w = Complex64::from_polar(radius, angle);
        let g = TestFunction::new(Family::G, 2, 1, w, 1.0).unwrap();
        for m in [2usize, 4, 8, 16] {
            let gap = bloch_lab::norms::little_bloch_gap(&g.to_holo(), 1.0, m, &small_plan(7)).unwrap().value;
            prop_assert!(gap <= tail_bound(1.0, w, m).unwrap() + 1e-6, "m {m}: {gap}");
        }
    }
}
