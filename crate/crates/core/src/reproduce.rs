//! Reference reproduction at `n = 20`, `κ = 3`: exact moments and bound
//! columns for the four example ensembles, plus CSV data for the density,
//! tail and standard-error plots.

use serde::Serialize;

use crate::bounds::{BoundContext, BoundSet, CvBounds, SeBounds};
use crate::error::{Error, Result};
use crate::exact::{enumerate_exact, ExactSummary};
use crate::generators::{gen_e1, gen_e2, gen_e3, gen_e4};
use crate::linalg::SpdMatrix;
use crate::sampling::{empirical_tail, histogram};

/// Absolute tolerance for three-decimal reference values.
pub const TABLE_TOLERANCE: f64 = 5e-4;
/// Additive tolerance for bound-dominance checks.
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;
/// Additive tolerance for the support-width check.
pub const SUPPORT_TOLERANCE: f64 = 1e-9;

pub const REFERENCE_N: usize = 20;
pub const REFERENCE_KAPPA: f64 = 3.0;
pub const REFERENCE_KS: [usize; 4] = [1, 5, 10, 19];

/// Default histogram resolution for density data.
pub const DEFAULT_BINS: usize = 60;
/// Number of `r` points per tail curve.
pub const TAIL_POINTS: usize = 200;

/// Reference row for the E1 ensemble, to three decimals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub k: usize,
    pub mean: f64,
    pub variance: f64,
    pub bound_exponential: f64,
    pub bound_support_linear: f64,
    pub bound_diagonal: f64,
}

pub const E1_REFERENCE: [ReferenceRow; 4] = [
    ReferenceRow {
        k: 1,
        mean: 0.549,
        variance: 0.302,
        bound_exponential: 6.880,
        bound_support_linear: 0.302,
        bound_diagonal: 0.302,
    },
    ReferenceRow {
        k: 5,
        mean: 2.747,
        variance: 1.191,
        bound_exponential: 27.156,
        bound_support_linear: 1.509,
        bound_diagonal: 1.191,
    },
    ReferenceRow {
        k: 10,
        mean: 5.493,
        variance: 1.588,
        bound_exponential: 36.208,
        bound_support_linear: 3.017,
        bound_diagonal: 1.588,
    },
    ReferenceRow {
        k: 19,
        mean: 10.437,
        variance: 0.302,
        bound_exponential: 6.880,
        bound_support_linear: 0.302,
        bound_diagonal: 0.302,
    },
];

/// Reference `(k, example, mean, variance)` for the seed-dependent ensembles,
/// for side-by-side inspection only.
pub const REFERENCE_RANDOM_ROWS: [(usize, &str, f64, f64); 12] = [
    (1, "E2", 0.689, 0.115),
    (1, "E3", 0.683, 0.021),
    (1, "E4", 0.739, 0.005),
    (5, "E2", 3.446, 0.454),
    (5, "E3", 3.283, 0.091),
    (5, "E4", 3.649, 0.020),
    (10, "E2", 6.893, 0.605),
    (10, "E3", 6.213, 0.128),
    (10, "E4", 7.176, 0.031),
    (19, "E2", 13.096, 0.115),
    (19, "E3", 10.570, 0.022),
    (19, "E4", 13.155, 0.008),
];

pub const EXAMPLES: [&str; 4] = ["E1", "E2", "E3", "E4"];

/// The four example matrices at the reference size; E2–E4 depend on `seed`.
pub fn example_matrices(seed: u64) -> Result<Vec<(&'static str, SpdMatrix<f64>)>> {
    let (n, kappa) = (REFERENCE_N, REFERENCE_KAPPA);
    Ok(vec![
        ("E1", gen_e1(n, kappa)?),
        ("E2", gen_e2(n, kappa, seed)?),
        ("E3", gen_e3(n, kappa, seed)?),
        ("E4", gen_e4(n, kappa, seed)?),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub k: usize,
    pub example: String,
    pub mean: f64,
    pub variance: f64,
    pub bound_exponential: f64,
    pub bound_support_linear: f64,
    pub bound_support_quadratic: f64,
    pub bound_diagonal: Option<f64>,
    pub support_width: f64,
    pub support_width_bound: f64,
}

/// One checked cell. `hard` checks decide the exit status.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub hard: bool,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|actual - expected| <= tolerance`
    Equal,
    /// `actual <= expected + tolerance`
    AtMost,
    /// `actual > expected`
    Greater,
}

impl Check {
    fn new(
        name: String,
        expected: f64,
        actual: f64,
        tolerance: f64,
        relation: Relation,
        hard: bool,
    ) -> Self {
        let passed = match relation {
            Relation::Equal => (actual - expected).abs() <= tolerance,
            Relation::AtMost => actual <= expected + tolerance,
            Relation::Greater => actual > expected,
        };
        Self {
            name,
            expected,
            actual,
            tolerance,
            relation,
            hard,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n: usize,
    pub kappa: f64,
    pub rows: Vec<TableRow>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn hard_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.hard && !c.passed)
    }

    pub fn soft_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.hard && !c.passed)
    }
}

/// Everything `verify` produces.
#[derive(Clone, Debug)]
pub struct Reproduction {
    pub report: VerifyReport,
    pub densities_csv: String,
    pub tails_csv: String,
    pub sampling_bounds_csv: String,
}

#[derive(Serialize)]
struct DensityRow<'a> {
    example: &'a str,
    k: usize,
    bin_center: f64,
    bin_width: f64,
    density: f64,
}

#[derive(Serialize)]
struct TailRow<'a> {
    example: &'a str,
    k: usize,
    r: f64,
    empirical_tail: f64,
    b1_exponential: f64,
    b2_chebyshev_support_linear: f64,
    b2_chebyshev_support_quadratic: f64,
    b3_chebyshev_diagonal: Option<f64>,
}

fn csv_string<S: Serialize>(rows: impl IntoIterator<Item = S>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Enumerates the four examples at every reference `k`, checks the E1 cells
/// and bound columns against the reference values, checks bound dominance
/// for every example, and emits figure data.
pub fn reproduce_reference(seed: u64, bins: usize) -> Result<Reproduction> {
    let examples = example_matrices(seed)?;
    let n = REFERENCE_N;
    let kappa = REFERENCE_KAPPA;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut densities = Vec::new();
    let mut tails = Vec::new();
    let mut summaries: Vec<(usize, &str, ExactSummary<f64>)> = Vec::new();

    for &k in &REFERENCE_KS {
        let reference = E1_REFERENCE
            .iter()
            .find(|r| r.k == k)
            .expect("reference row");
        for (name, m) in &examples {
            let s = enumerate_exact(m, k, None)?;
            let ctx = BoundContext::new(n, k, kappa)?.with_diagonal(m.is_diagonal());
            let set = BoundSet::evaluate(&ctx)?;
            let row = TableRow {
                k,
                example: name.to_string(),
                mean: s.mean,
                variance: s.variance,
                bound_exponential: set.var_exponential,
                bound_support_linear: set.var_support_linear,
                bound_support_quadratic: set.var_support_quadratic,
                bound_diagonal: set.var_diagonal,
                support_width: s.support_width(),
                support_width_bound: set.support_width,
            };

            let cell = |what: &str| format!("k={k} {name} {what}");
            if *name == "E1" {
                checks.push(Check::new(
                    cell("mean"),
                    reference.mean,
                    s.mean,
                    TABLE_TOLERANCE,
                    Relation::Equal,
                    true,
                ));
                checks.push(Check::new(
                    cell("variance"),
                    reference.variance,
                    s.variance,
                    TABLE_TOLERANCE,
                    Relation::Equal,
                    true,
                ));
            }
            checks.push(Check::new(
                cell("exponential bound"),
                reference.bound_exponential,
                row.bound_exponential,
                TABLE_TOLERANCE,
                Relation::Equal,
                true,
            ));
            checks.push(Check::new(
                cell("support bound (linear form)"),
                reference.bound_support_linear,
                row.bound_support_linear,
                TABLE_TOLERANCE,
                Relation::Equal,
                true,
            ));
            if let Some(d) = row.bound_diagonal {
                checks.push(Check::new(
                    cell("diagonal bound"),
                    reference.bound_diagonal,
                    d,
                    TABLE_TOLERANCE,
                    Relation::Equal,
                    true,
                ));
            }
            for (label, bound) in [
                ("variance <= exponential bound", Some(row.bound_exponential)),
                (
                    "variance <= support bound (quadratic)",
                    Some(row.bound_support_quadratic),
                ),
                (
                    "variance <= support bound (linear)",
                    Some(row.bound_support_linear),
                ),
                ("variance <= diagonal bound", row.bound_diagonal),
            ] {
                if let Some(b) = bound {
                    checks.push(Check::new(
                        cell(label),
                        b,
                        s.variance,
                        DOMINANCE_TOLERANCE,
                        Relation::AtMost,
                        true,
                    ));
                }
            }
            checks.push(Check::new(
                cell("support width <= wedge * log kappa"),
                row.support_width_bound,
                row.support_width,
                SUPPORT_TOLERANCE,
                Relation::AtMost,
                true,
            ));

            for b in histogram(&s.distribution, bins)? {
                densities.push(DensityRow {
                    example: name,
                    k,
                    bin_center: b.center,
                    bin_width: b.width,
                    density: b.density,
                });
            }
            let r_max = set.support_width.max(1e-9);
            for i in 1..=TAIL_POINTS {
                let r = r_max * i as f64 / TAIL_POINTS as f64;
                let t = set.tails_at(r)?;
                tails.push(TailRow {
                    example: name,
                    k,
                    r,
                    empirical_tail: empirical_tail(&s.distribution, r)?,
                    b1_exponential: t.exponential.reported,
                    b2_chebyshev_support_linear: t.chebyshev_support_linear.reported,
                    b2_chebyshev_support_quadratic: t.chebyshev_support_quadratic.reported,
                    b3_chebyshev_diagonal: t.chebyshev_diagonal.map(|d| d.reported),
                });
            }
            rows.push(row);
            summaries.push((k, name, s));
        }

        // Seed-dependent orderings, reported but not enforced.
        let var = |e: &str| {
            summaries
                .iter()
                .find(|(kk, nm, _)| *kk == k && *nm == e)
                .unwrap()
                .2
                .variance
        };
        let mean = |e: &str| {
            summaries
                .iter()
                .find(|(kk, nm, _)| *kk == k && *nm == e)
                .unwrap()
                .2
                .mean
        };
        for (a, b) in [("E1", "E2"), ("E2", "E3"), ("E3", "E4")] {
            checks.push(Check::new(
                format!("k={k} Var {a} > Var {b} (seed-dependent)"),
                var(b),
                var(a),
                0.0,
                Relation::Greater,
                false,
            ));
        }
        for (a, b) in [("E4", "E2"), ("E2", "E3"), ("E3", "E1")] {
            checks.push(Check::new(
                format!("k={k} E {a} > E {b} (seed-dependent)"),
                mean(b),
                mean(a),
                0.0,
                Relation::Greater,
                false,
            ));
        }
    }

    let passed = checks.iter().filter(|c| c.hard).all(|c| c.passed);
    Ok(Reproduction {
        report: VerifyReport {
            seed,
            n,
            kappa,
            rows,
            checks,
            passed,
        },
        densities_csv: csv_string(densities)?,
        tails_csv: csv_string(tails)?,
        sampling_bounds_csv: sampling_bounds_csv(REFERENCE_KAPPA, 1.0, 2000)?,
    })
}

/// Which sweep a sampling-bound row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// `k = 30`, `n` varies.
    FixedK,
    /// `n = 400`, `k` varies.
    FixedN,
    /// `k / n = 0.1`, `k` varies.
    FixedRatio,
}

/// Standard-error (B1, B2) and coefficient-of-variation (B1', B2') bounds at one `(n, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingBoundRow {
    pub sweep: Sweep,
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub b1_se_logminor: f64,
    pub b2_se_logminor: f64,
    pub b1_se_entropy: f64,
    pub b2_se_entropy: f64,
    pub b1p_cv_logminor: f64,
    pub b2p_cv_logminor: f64,
    pub b1p_cv_entropy: f64,
    pub b2p_cv_entropy: f64,
}

pub const SWEEP_FIXED_K: usize = 30;
pub const SWEEP_FIXED_N: usize = 400;
pub const SWEEP_MAX_N: usize = 10_000;

fn fixed_k_grid() -> Vec<usize> {
    let k = SWEEP_FIXED_K;
    let mut ns: Vec<usize> = (k..=4 * k).collect();
    let mut x = (4 * k) as f64;
    while (x as usize) < SWEEP_MAX_N {
        x *= 1.1;
        ns.push((x as usize).min(SWEEP_MAX_N));
    }
    ns.dedup();
    if *ns.last().unwrap() != SWEEP_MAX_N {
        ns.push(SWEEP_MAX_N);
    }
    ns
}

fn bound_row(
    sweep: Sweep,
    n: usize,
    k: usize,
    kappa_hat: f64,
    ell: f64,
    q_per_k: u64,
) -> Result<SamplingBoundRow> {
    let q = q_per_k * k as u64;
    let ctx = BoundContext::new(n, k, kappa_hat)?.with_q(q).with_ell(ell);
    let se: SeBounds<f64> = crate::bounds::se_bounds(&ctx)?;
    let cv: CvBounds<f64> = crate::bounds::cv_bounds(&ctx)?;
    Ok(SamplingBoundRow {
        sweep,
        n,
        k,
        q,
        b1_se_logminor: se.se1_logminor,
        b2_se_logminor: se.se2_logminor,
        b1_se_entropy: se.se1_entropy(),
        b2_se_entropy: se.se2_entropy(),
        b1p_cv_logminor: cv.cvy1,
        b2p_cv_logminor: cv.cvy2,
        b1p_cv_entropy: cv.cvh1,
        b2p_cv_entropy: cv.cvh2,
    })
}

/// The three standard-error / CV sweeps with `q = q_per_k · k`.
pub fn sampling_bound_rows(
    kappa_hat: f64,
    ell: f64,
    q_per_k: u64,
) -> Result<Vec<SamplingBoundRow>> {
    let mut rows = Vec::new();
    for n in fixed_k_grid() {
        rows.push(bound_row(
            Sweep::FixedK,
            n,
            SWEEP_FIXED_K,
            kappa_hat,
            ell,
            q_per_k,
        )?);
    }
    for k in 1..=SWEEP_FIXED_N {
        rows.push(bound_row(
            Sweep::FixedN,
            SWEEP_FIXED_N,
            k,
            kappa_hat,
            ell,
            q_per_k,
        )?);
    }
    for k in 1..=100 {
        rows.push(bound_row(
            Sweep::FixedRatio,
            10 * k,
            k,
            kappa_hat,
            ell,
            q_per_k,
        )?);
    }
    Ok(rows)
}

pub fn sampling_bounds_csv(kappa_hat: f64, ell: f64, q_per_k: u64) -> Result<String> {
    csv_string(sampling_bound_rows(kappa_hat, ell, q_per_k)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_k_grid_covers_range() {
        let g = fixed_k_grid();
        assert_eq!(g[0], SWEEP_FIXED_K);
        assert_eq!(*g.last().unwrap(), SWEEP_MAX_N);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sampling_bound_limit() {
        let rows = sampling_bound_rows(3.0, 1.0, 2000).unwrap();
        let last = rows.iter().rfind(|r| r.sweep == Sweep::FixedK).unwrap();
        let limit = (6.0 * 30.0 / 60_000.0f64).sqrt() * 3f64.ln();
        assert!((last.b1_se_logminor / limit - 1.0).abs() < 0.01);
    }
}
