use aim_core::baselines::{solve_gd, solve_heavy_ball, BaselineConfig, BaselineMethod};
use aim_core::inertia::{inertia_hessian_gradient, quasi_newton_metric, select_alpha, InertiaKind, InertiaStrategy};
use aim_core::metric::project_onto;
use aim_core::problems::{
    generate_synthetic, parse_libsvm, serialize_libsvm, smooth_abs, smooth_abs_derivative, L2LpProblem,
    LogisticL2Problem, SyntheticSpec,
};
use aim_core::solver::{aim_step, compute_gamma, solve_aim, SolverConfig};
use aim_core::verify::{
    check_acceptance, check_descent, check_reg_newton_equiv_rank1, check_secant_metric, check_theorem33_equiv,
    default_fd_step, first_violation, grad_check, q_eta, rayleigh_r,
};
use aim_core::{DenseSymmetricMatrix, DenseVector, MetricDescriptor, ObjectiveOracle, QuadraticObjective, SparseMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = DenseVector> {
    prop::collection::vec(-10.0f64..10.0, n).prop_map(DenseVector::from)
}

fn nonzero_vec(n: usize) -> impl Strategy<Value = DenseVector> {
    vec_strategy(n).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

/// `n`, then `(m, μ, v)` of that dimension.
fn metric_case() -> impl Strategy<Value = (DenseVector, f64, DenseVector)> {
    (1usize..=64).prop_flat_map(|n| (nonzero_vec(n), 0.0f64..0.999, vec_strategy(n)))
}

/// `BᵀB/n + shift·I`
fn spd(n: usize) -> impl Strategy<Value = DenseSymmetricMatrix> {
    (prop::collection::vec(-1.0f64..1.0, n * n), 0.1f64..1.0)
        .prop_map(move |(b, shift)| {
            let mut h = DenseSymmetricMatrix::gram(&b, n, 0.0).unwrap();
            let scale = 1.0 / n as f64;
            let data: Vec<f64> = h.as_slice().iter().map(|x| x * scale).collect();
            h = DenseSymmetricMatrix::new(n, data).unwrap();
            h.shifted(shift)
        })
}

fn eigen_range(h: &DenseSymmetricMatrix) -> (f64, f64) {
    let n = h.dim();
    let m = DMatrix::from_row_slice(n, n, h.as_slice());
    let e = SymmetricEigen::new(m).eigenvalues;
    (e.min(), e.max())
}

fn close(a: &DenseVector, b: &DenseVector, rel: f64) -> bool {
    a.sub(b).unwrap().norm() <= rel * (1.0 + b.norm())
}

proptest! {
    #[test]
    fn metric_pair_are_inverses((m, mu, v) in metric_case()) {
        let d = MetricDescriptor::new(m, mu, 1e-8).unwrap();
        let there = d.apply(&d.apply_inverse(&v).unwrap()).unwrap();
        let back = d.apply_inverse(&d.apply(&v).unwrap()).unwrap();
        let scale = v.norm().max(1e-300);
        prop_assert!(there.sub(&v).unwrap().norm() <= 1e-12 * scale);
        prop_assert!(back.sub(&v).unwrap().norm() <= 1e-12 * scale);
    }

    #[test]
    fn metric_sandwich((m, mu, v) in metric_case()) {
        let d = MetricDescriptor::new(m, mu, 1e-8).unwrap();
        let vv = v.norm_sq();
        prop_assert!(d.apply_inverse(&v).unwrap().norm_sq() <= vv * (1.0 + 1e-14));
        prop_assert!(d.norm_sq(&v).unwrap() >= vv * (1.0 - 1e-14));
    }

    #[test]
    fn projection_is_idempotent_and_symmetric(
        (m, v, w) in (1usize..=32).prop_flat_map(|n| (nonzero_vec(n), vec_strategy(n), vec_strategy(n)))
    ) {
        let pv = project_onto(&m, &v).unwrap();
        let ppv = project_onto(&m, &pv).unwrap();
        prop_assert!(close(&ppv, &pv, 1e-12));
        let a = w.dot(&pv).unwrap();
        let b = v.dot(&project_onto(&m, &w).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + v.norm() * w.norm()));
    }

    #[test]
    fn inertial_step_matches_compact_form(
        (x, g, m, mu, beta) in (1usize..=32).prop_flat_map(|n| {
            (vec_strategy(n), vec_strategy(n), nonzero_vec(n), 0.0f64..0.999, 1e-3f64..10.0)
        })
    ) {
        let gamma = compute_gamma(Some(&m), &g, beta, mu);
        let step = aim_step(&x, &g, beta, gamma, Some(&m)).unwrap();
        let d = MetricDescriptor::new(m, mu, 0.0).unwrap();
        let mut compact = x.clone();
        compact.axpy(-beta, &d.apply_inverse(&g).unwrap()).unwrap();
        prop_assert!(close(&step, &compact, 1e-12));
    }

    #[test]
    fn quasi_newton_metric_satisfies_secant(
        (s, y) in (2usize..=32).prop_flat_map(|n| (nonzero_vec(n), nonzero_vec(n)))
            .prop_filter("curvature", |(s, y)| s.dot(y).unwrap() > 1e-3 * s.norm() * y.norm())
    ) {
        let alpha = select_alpha(&s, &y, 2.0).unwrap();
        match quasi_newton_metric(&s, &y, alpha, 0.0) {
            Ok(metric) => {
                prop_assert!((0.0..1.0).contains(&metric.mu()));
                prop_assert!(check_secant_metric(&metric, &s, &y, alpha).unwrap() <= 1e-10);
            }
            // αy parallel to s leaves no rank-one correction
            Err(_) => prop_assert!(y.scaled(alpha).sub(&s).unwrap().norm() <= 1e-8 * s.norm()),
        }
    }

    #[test]
    fn hessian_gradient_matches_exact_product_on_quadratics(
        (h, x) in (1usize..=12).prop_flat_map(|n| (spd(n), vec_strategy(n)))
    ) {
        let q = QuadraticObjective::new(h.clone(), DenseVector::zeros(h.dim())).unwrap();
        let g = q.gradient(&x).unwrap();
        prop_assume!(g.norm() > 1e-6);
        let m = inertia_hessian_gradient(&q, &x, &g, 1e-3, 1e-8).unwrap().unwrap();
        let exact = h.matvec(&g).unwrap().normalized(0.0).unwrap();
        prop_assert!(close(&m, &exact, 1e-9));
    }

    #[test]
    fn rayleigh_ratio_within_spectrum(
        (h, g) in (1usize..=16).prop_flat_map(|n| (spd(n), nonzero_vec(n)))
    ) {
        let r = rayleigh_r(&g, &h).unwrap();
        let (lo, hi) = eigen_range(&h);
        prop_assert!(lo - 1e-10 <= r && r <= hi + 1e-10, "{lo} {r} {hi}");
    }

    #[test]
    fn rank_one_newton_equivalence(
        (h, g, theta) in (1usize..=16).prop_flat_map(|n| (nonzero_vec(n), nonzero_vec(n), 0.05f64..20.0))
    ) {
        prop_assume!(h.dot(&g).unwrap().abs() > 1e-3 * h.norm() * g.norm());
        prop_assert!(check_reg_newton_equiv_rank1(&h, &g, theta).unwrap() <= 1e-10);
    }

    #[test]
    fn polynomial_newton_equivalence(
        (h, g, theta) in prop::sample::select(vec![2usize, 3, 4, 8])
            .prop_flat_map(|n| (spd(n), nonzero_vec(n), 0.1f64..5.0))
    ) {
        prop_assert!(check_theorem33_equiv(&h, &g, theta).unwrap() <= 1e-8);
    }

    #[test]
    fn q_eta_is_monotone(a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(q_eta(lo).unwrap() <= q_eta(hi).unwrap());
    }

    #[test]
    fn smoothing_bounds(z in -2.0f64..2.0, eps in 1e-3f64..1.0) {
        let s = smooth_abs(z, eps);
        prop_assert!(s - z.abs() >= -1e-15);
        prop_assert!(s - z.abs() <= eps / 2.0 + 1e-15);
        prop_assert!(s >= eps / 2.0 - 1e-15);
        prop_assert!(smooth_abs_derivative(z, eps).abs() <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn aim_runs_descend_and_respect_acceptance(
        (h, x0, kind) in (2usize..=10).prop_flat_map(|n| {
            (spd(n), vec_strategy(n), prop::sample::select(InertiaKind::ALL.to_vec()))
        })
    ) {
        let b = h.matvec(&DenseVector::filled(h.dim(), 1.0)).unwrap();
        let q = QuadraticObjective::new(h, b).unwrap();
        let cfg = SolverConfig::default();
        let strategy = InertiaStrategy::new(kind);
        let trace = solve_aim(&q, &strategy, &x0, &cfg).unwrap();
        prop_assert!(trace.converged(), "{kind}: {:?}", trace.message);
        prop_assert_eq!(first_violation(&check_descent(&trace, cfg.eta).unwrap()), None);
        prop_assert_eq!(first_violation(&check_acceptance(&trace, cfg.eta).unwrap()), None);
        let expected = 1 + trace.iterations() * (1 + kind.extra_grad_evals()) + trace.rejections();
        prop_assert_eq!(trace.total_grad_evals, expected);
    }

    #[test]
    fn heavy_ball_without_momentum_is_gradient_descent(
        (h, x0, beta) in (1usize..=8).prop_flat_map(|n| (spd(n), vec_strategy(n), 0.01f64..1.0))
    ) {
        let q = QuadraticObjective::new(h, DenseVector::zeros(x0.len())).unwrap();
        let hb = BaselineConfig { gamma: 0.0, max_iters: 200, ..BaselineConfig::new(BaselineMethod::Hb, beta) };
        let gd = BaselineConfig { method: BaselineMethod::Gd, ..hb.clone() };
        let a = solve_heavy_ball(&q, &x0, &hb).unwrap();
        let b = solve_gd(&q, &x0, &gd).unwrap();
        prop_assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            prop_assert_eq!(&ra.x, &rb.x);
            prop_assert_eq!(ra.f.to_bits(), rb.f.to_bits());
        }
    }

    #[test]
    fn libsvm_round_trip(
        rows in prop::collection::vec(
            (prop::bool::ANY, prop::collection::btree_map(0usize..50, -1e6f64..1e6, 0..8)),
            1..40,
        )
    ) {
        let labels: Vec<f64> = rows.iter().map(|(l, _)| if *l { 1.0 } else { 0.0 }).collect();
        let a = SparseMatrix::from_rows(50, rows.iter().map(|(_, r)| r.iter().map(|(&c, &v)| (c, v)).collect()).collect())
            .unwrap();
        let text = serialize_libsvm(&a, &labels).unwrap();
        let back = parse_libsvm(text.as_bytes(), Some(50)).unwrap();
        prop_assert_eq!(&back.a, &a);
        prop_assert_eq!(&back.labels, &labels);
        prop_assert_eq!(serialize_libsvm(&back.a, &back.labels).unwrap(), text);
    }

    #[test]
    fn objectives_match_finite_differences(seed in 0u64..1000, p in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let data = generate_synthetic(&SyntheticSpec::new(30, 20, 0.3, seed)).unwrap();
        let l2lp = L2LpProblem::new(data.a.clone(), data.b.clone(), data.lambda, p, 0.1).unwrap();
        let labels: Vec<f64> = data.b.iter().map(|&b| if b > 0.0 { 1.0 } else { 0.0 }).collect();
        let logistic = LogisticL2Problem::new(data.a, labels, 1e-3).unwrap();
        let x = data.v.scaled(3.0);
        prop_assert!(grad_check(&l2lp, &x, default_fd_step(&x)).unwrap() <= 1e-6);
        prop_assert!(grad_check(&logistic, &x, default_fd_step(&x)).unwrap() <= 1e-6);
    }

    #[test]
    fn logistic_is_midpoint_convex(
        seed in 0u64..1000,
        (x, y) in (vec_strategy(20), vec_strategy(20)),
    ) {
        let data = generate_synthetic(&SyntheticSpec::new(25, 20, 0.3, seed)).unwrap();
        let labels: Vec<f64> = data.b.iter().map(|&b| if b > 0.0 { 1.0 } else { 0.0 }).collect();
        let p = LogisticL2Problem::new(data.a, labels, 1e-2).unwrap();
        let mid = x.add(&y).unwrap().scaled(0.5);
        let (fx, fy, fm) = (p.value(&x).unwrap(), p.value(&y).unwrap(), p.value(&mid).unwrap());
        prop_assert!(fm <= 0.5 * (fx + fy) + 1e-12);
    }

    #[test]
    fn synthetic_generation_is_deterministic(seed in any::<u64>(), density in 0.05f64..1.0) {
        let spec = SyntheticSpec::new(15, 12, density, seed);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        prop_assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        prop_assert_eq!(a, b);
    }
}
