use logminor::reproduce::{
    reproduce_reference, Relation, DEFAULT_BINS, E1_REFERENCE, REFERENCE_KS,
};
use logminor::DEFAULT_SEED;

#[test]
fn reference_reproduction_passes_all_hard_checks() {
    let r = reproduce_reference(DEFAULT_SEED, DEFAULT_BINS).unwrap();
    let failed: Vec<_> = r.report.hard_failures().map(|c| c.name.clone()).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert!(r.report.passed);
    assert_eq!(r.report.rows.len(), 16);

    for reference in &E1_REFERENCE {
        let row = r
            .report
            .rows
            .iter()
            .find(|x| x.k == reference.k && x.example == "E1")
            .unwrap();
        assert!((row.mean - reference.mean).abs() < 5e-4);
        assert!((row.bound_diagonal.unwrap() - reference.bound_diagonal).abs() < 5e-4);
    }
    for row in r
        .report
        .rows
        .iter()
        .filter(|x| x.example == "E3" || x.example == "E4")
    {
        assert!(row.bound_diagonal.is_none());
    }
}

#[test]
fn every_check_carries_a_tolerance() {
    let r = reproduce_reference(DEFAULT_SEED, 20).unwrap();
    for c in &r.report.checks {
        match c.relation {
            Relation::Equal => assert_eq!(c.tolerance, 5e-4, "{}", c.name),
            Relation::AtMost => assert!(c.tolerance > 0.0, "{}", c.name),
            Relation::Greater => assert!(!c.hard, "{}", c.name),
        }
    }
    let soft = r.report.checks.iter().filter(|c| !c.hard).count();
    assert_eq!(soft, 6 * REFERENCE_KS.len());
}

#[test]
fn figure_csvs_have_expected_shape() {
    let r = reproduce_reference(DEFAULT_SEED, 30).unwrap();
    let mut lines = r.densities_csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "example,k,bin_center,bin_width,density"
    );
    assert_eq!(lines.count(), 16 * 30);

    let mut lines = r.tails_csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "example,k,r,empirical_tail,b1_exponential,b2_chebyshev_support_linear,b2_chebyshev_support_quadratic,b3_chebyshev_diagonal"
    );
    assert_eq!(lines.count(), 16 * 200);

    assert!(r.sampling_bounds_csv.starts_with("sweep,n,k,q,"));
}

#[test]
fn reproduction_is_deterministic() {
    let a = reproduce_reference(17, 40).unwrap();
    let b = reproduce_reference(17, 40).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.densities_csv, b.densities_csv);
    assert_eq!(a.tails_csv, b.tails_csv);
    let c = reproduce_reference(18, 40).unwrap();
    assert_ne!(a.tails_csv, c.tails_csv);
}
