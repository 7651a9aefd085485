use approx::assert_relative_eq;
use logminor::entropy::entropy_constant;
use logminor::linalg::symmetric_eigenvalues;
use logminor::{
    enumerate_exact, gen_e1, gen_e4, gen_haar_orthogonal, gen_wishart, make_spd,
    principal_submatrix, sample_logminors, two_level_moments, BoundContext, BoundSet, IndexSet,
    SamplePlan, SpdMatrix, SquareMatrix,
};
use proptest::prelude::*;

fn random_spd(n: usize, kappa: f64, seed: u64) -> SpdMatrix<f64> {
    gen_e4(n, kappa, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn deleting_one_index_interlaces(n in 3usize..10, drop in 0usize..10, seed in any::<u64>(), kappa in 1.5f64..20.0) {
        let drop = drop % n;
        let m = random_spd(n, kappa, seed);
        let keep: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
        let sub = principal_submatrix(&m, &IndexSet::new(keep, n).unwrap()).unwrap();
        let parent = &m.spectrum().unwrap().eigenvalues;
        let child = &sub.spectrum().unwrap().eigenvalues;
        let slack = 1e-10 * parent[0];
        for i in 0..n - 1 {
            prop_assert!(child[i] <= parent[i] + slack);
            prop_assert!(child[i] >= parent[i + 1] - slack);
        }
    }

    #[test]
    fn exact_law_is_permutation_invariant(n in 3usize..9, k in 1usize..9, seed in any::<u64>()) {
        let k = 1 + (k - 1) % n;
        let m = random_spd(n, 4.0, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed % n as u64) as usize);
        perm.swap(0, n - 1);
        let p = make_spd(m.entries().permuted(&perm)).unwrap();
        let a = enumerate_exact(&m, k, None).unwrap();
        let b = enumerate_exact(&p, k, None).unwrap();
        prop_assert!((a.mean - b.mean).abs() < 1e-10);
        prop_assert!((a.variance - b.variance).abs() < 1e-10);
        let mut va = a.distribution.values.clone();
        let mut vb = b.distribution.values.clone();
        va.sort_by(f64::total_cmp);
        vb.sort_by(f64::total_cmp);
        for (x, y) in va.iter().zip(&vb) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn orthogonal_conjugation_preserves_log_det(n in 2usize..10, seed in any::<u64>()) {
        let m = random_spd(n, 6.0, seed);
        let q = gen_haar_orthogonal::<f64>(n, seed.wrapping_add(1));
        let c = make_spd(m.entries().conjugate_by(&q)).unwrap();
        prop_assert!((m.log_det().unwrap() - c.log_det().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn cholesky_log_det_matches_eigenvalues(n in 1usize..12, seed in any::<u64>()) {
        let id = make_spd(SquareMatrix::<f64>::identity(n)).unwrap();
        let w = gen_wishart(n, 3 * n, &id, seed).unwrap();
        let from_eigs: f64 = symmetric_eigenvalues(w.entries()).unwrap().iter().map(|l| l.ln()).sum();
        prop_assert!((w.log_det().unwrap() - from_eigs).abs() < 1e-9);
    }

    #[test]
    fn reported_tails_are_nonincreasing_in_r(n in 2usize..200, k in 1usize..200, kappa in 1.0f64..100.0) {
        let k = 1 + (k - 1) % n;
        let set = BoundSet::evaluate(&BoundContext::new(n, k, kappa).unwrap().with_diagonal(true)).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..50 {
            let t = set.tails_at(0.1 * i as f64).unwrap().tightest();
            prop_assert!((0.0..=1.0).contains(&t));
            prop_assert!(t <= prev);
            prev = t;
        }
    }
}

#[test]
fn sampled_mean_converges_to_exact() {
    for &(n, k) in &[(12usize, 3usize), (16, 8)] {
        let m = random_spd(n, 5.0, 99);
        let exact = enumerate_exact(&m, k, None).unwrap();
        let q = 100_000;
        let s = sample_logminors(&m, &SamplePlan::new(k, q, 5)).unwrap();
        let envelope = 4.0 * (exact.variance / q as f64).sqrt();
        assert!(
            (s.mean() - exact.mean).abs() <= envelope,
            "n={n} k={k}: {} vs {} (envelope {envelope})",
            s.mean(),
            exact.mean
        );
    }
}

#[test]
fn entropy_is_affine_in_log_minor() {
    let m = gen_e1::<f64>(10, 3.0).unwrap();
    let exact = enumerate_exact(&m, 4, None).unwrap();
    let report = logminor::estimate_mean_entropy(&m, &SamplePlan::new(4, 500, 1), None).unwrap();
    assert_relative_eq!(
        report.mean_entropy,
        0.5 * report.mean_logminor + 4.0 * entropy_constant::<f64>(),
        epsilon = 1e-12
    );
    assert!(exact.mean > 0.0);
}

#[test]
fn single_precision_matches_double_on_e1() {
    let m64 = gen_e1::<f64>(20, 3.0).unwrap();
    let m32 = gen_e1::<f32>(20, 3.0).unwrap();
    for k in [1, 5, 10] {
        let a = enumerate_exact(&m64, k, None).unwrap();
        let b = enumerate_exact(&m32, k, None).unwrap();
        assert!((a.mean - b.mean as f64).abs() < 1e-4, "k={k}");
        assert!((a.variance - b.variance as f64).abs() < 1e-4, "k={k}");
    }
}

#[test]
fn exact_and_closed_form_agree_on_e1_in_single_precision() {
    let m = gen_e1::<f32>(12, 3.0).unwrap();
    let s = enumerate_exact(&m, 6, None).unwrap();
    let (mean, var) = two_level_moments(12, 6, 6, 3.0f32).unwrap();
    assert_relative_eq!(s.mean, mean, max_relative = 1e-5);
    assert_relative_eq!(s.variance, var, max_relative = 1e-4);
}

#[test]
fn pipeline_estimates_stay_within_four_sigma() {
    let m = gen_e1::<f64>(20, 3.0).unwrap();
    let (mean, var) = two_level_moments(20, 5, 10, 3.0f64).unwrap();
    let mut outside = 0;
    for seed in 0..1000u64 {
        let r = logminor::run_pipeline(
            &m,
            5,
            0.025,
            logminor::PlanMetric::SeEntropy,
            logminor::BoundChoice::Support,
            None,
            seed,
        )
        .unwrap();
        let q = r.estimate.q as f64;
        if (r.estimate.mean_logminor - mean).abs() > 4.0 * (var / q).sqrt() {
            outside += 1;
        }
    }
    assert!(
        outside <= 1,
        "{outside} of 1000 reruns outside the 4-sigma envelope"
    );
}
