//! Uniform sampling of principal submatrices and the `S_Y` / `S_h` estimators.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{cv_bounds, se_bounds, BoundContext, CvBounds, SeBounds};
use crate::entropy::entropy_from_log_det;
use crate::error::{Error, Result};
use crate::exact::binomial;
use crate::linalg::{IndexSet, LogDetWorkspace, SpdMatrix};
use crate::rng::stream;
use crate::scalar::{compensated_sum, from_usize, lit, to_f64, Scalar};

/// Draws per RNG stream when sampling. Fixed so results do not depend on the
/// number of worker threads.
pub const SAMPLE_CHUNK: usize = 1024;

/// How many log-minors to draw and from which stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplePlan {
    pub k: usize,
    pub q: usize,
    pub seed: u64,
    /// i.i.d. draws (the setting the error bounds cover). `false` draws
    /// distinct subsets, for exploration only.
    pub with_replacement: bool,
}

impl SamplePlan {
    pub fn new(k: usize, q: usize, seed: u64) -> Self {
        Self {
            k,
            q,
            seed,
            with_replacement: true,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::KTooLarge { k: self.k, n });
        }
        if self.q == 0 {
            return Err(Error::BadArguments(
                "sample count q must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Empirical,
    Exact,
}

/// Weighted point masses of `Y_{M,k}` (natural log).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogMinorDistribution<T> {
    pub values: Vec<T>,
    pub weights: Vec<T>,
    pub kind: DistributionKind,
    pub k: usize,
    pub n: usize,
}

impl<T: Scalar> LogMinorDistribution<T> {
    /// Equal-weight distribution over `values`.
    pub fn uniform(values: Vec<T>, kind: DistributionKind, k: usize, n: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let w = T::one() / from_usize::<T>(values.len());
        let weights = vec![w; values.len()];
        Ok(Self {
            values,
            weights,
            kind,
            k,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weighted mean with compensated summation.
    pub fn mean(&self) -> T {
        compensated_sum(self.values.iter().zip(&self.weights).map(|(&v, &w)| v * w))
    }

    /// Weighted (population) variance, two-pass.
    pub fn variance(&self) -> T {
        let mu = self.mean();
        compensated_sum(
            self.values
                .iter()
                .zip(&self.weights)
                .map(|(&v, &w)| w * (v - mu) * (v - mu)),
        )
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Uniform `k`-subset of `0..n`: partial Fisher–Yates, then sort.
pub fn sample_index_set<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<IndexSet> {
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    Ok(IndexSet::from_sorted_unchecked(partial_shuffle(
        &mut pool, k, rng,
    )))
}

fn partial_shuffle<R: Rng + ?Sized>(pool: &mut [usize], k: usize, rng: &mut R) -> Vec<usize> {
    let n = pool.len();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

/// `q` draws of `Y_{M,k}`, each with weight `1/q`. Deterministic per seed and
/// independent of thread count.
pub fn sample_logminors<T: Scalar>(
    m: &SpdMatrix<T>,
    plan: &SamplePlan,
) -> Result<LogMinorDistribution<T>> {
    let n = m.dim();
    plan.validate(n)?;
    let values = if plan.with_replacement {
        sample_with_replacement(m, plan)?
    } else {
        sample_distinct(m, plan)?
    };
    LogMinorDistribution::uniform(values, DistributionKind::Empirical, plan.k, n)
}

fn sample_with_replacement<T: Scalar>(m: &SpdMatrix<T>, plan: &SamplePlan) -> Result<Vec<T>> {
    let n = m.dim();
    let chunks = plan.q.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = SAMPLE_CHUNK.min(plan.q - c * SAMPLE_CHUNK);
            let mut rng = stream(plan.seed, "sample", c as u64);
            let mut ws = LogDetWorkspace::new(plan.k);
            let mut pool: Vec<usize> = (0..n).collect();
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let idx = partial_shuffle(&mut pool, plan.k, &mut rng);
                out.push(ws.log_det_principal(m.entries(), &idx)?);
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(plan.q);
    for p in parts {
        values.extend(p?);
    }
    Ok(values)
}

fn sample_distinct<T: Scalar>(m: &SpdMatrix<T>, plan: &SamplePlan) -> Result<Vec<T>> {
    let n = m.dim();
    let total = binomial(n, plan.k);
    if (plan.q as u128) > total {
        return Err(Error::BadArguments(format!(
            "cannot draw {} distinct subsets out of C({n}, {}) = {total}",
            plan.q, plan.k
        )));
    }
    let mut rng = stream(plan.seed, "sample-distinct", 0);
    let mut ws = LogDetWorkspace::new(plan.k);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::with_capacity(plan.q);
    let mut values = Vec::with_capacity(plan.q);
    while values.len() < plan.q {
        let idx = partial_shuffle(&mut pool, plan.k, &mut rng);
        if seen.insert(idx.clone()) {
            values.push(ws.log_det_principal(m.entries(), &idx)?);
        }
    }
    Ok(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaSource {
    /// Caller-supplied upper bound on κ(M).
    UserBound,
    /// Exact κ(M) from the eigensolver.
    ExactCondition,
}

/// `κ̂`, an upper bound on the condition number, with where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaHat<T> {
    pub value: T,
    pub source: KappaSource,
}

impl<T: Scalar> KappaHat<T> {
    pub fn bound(value: T) -> Self {
        Self {
            value,
            source: KappaSource::UserBound,
        }
    }

    pub fn exact(m: &SpdMatrix<T>) -> Result<Self> {
        Ok(Self {
            value: m.condition_number()?,
            source: KappaSource::ExactCondition,
        })
    }

    /// Resolves an optional user bound against `m`, rejecting `κ̂ < κ(M)`.
    ///
    /// A relative slack of `1e-9` absorbs eigensolver rounding, so a user who
    /// passes the nominal κ of a Haar-conjugated matrix is not rejected.
    pub fn resolve(user: Option<T>, m: &SpdMatrix<T>) -> Result<Self> {
        let kappa = m.condition_number()?;
        match user {
            None => Ok(Self {
                value: kappa,
                source: KappaSource::ExactCondition,
            }),
            Some(v) if v >= kappa * (T::one() - lit::<T>(1e-9)) && v >= T::one() => {
                Ok(Self::bound(v))
            }
            Some(v) => Err(Error::KappaHatTooSmall {
                kappa_hat: to_f64(v),
                kappa: to_f64(kappa),
            }),
        }
    }
}

/// `S_Y`, `S_h` and the a-priori error bounds that apply to them.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct EstimateReport<T> {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub seed: u64,
    pub kappa: T,
    pub kappa_hat: T,
    pub kappa_hat_source: KappaSource,
    pub ell: T,
    /// `S_Y`, sample mean of log-minors (nats).
    pub mean_logminor: T,
    /// `S_h`, sample mean of subsystem entropy (nats).
    pub mean_entropy: T,
    /// Empirical standard deviation of the drawn log-minors.
    pub sample_std_logminor: T,
    pub se_bounds: SeBounds<T>,
    /// Absent when ℓ(M) = 0.
    pub cv_bounds: Option<CvBounds<T>>,
    /// `λ_n < 1 < λ_1`: the CV bounds' `|E[Y]| >= k ℓ(M)` step is not guaranteed.
    pub spectrum_straddles_one: bool,
}

/// Samples `plan.q` log-minors and attaches the standard-error and
/// coefficient-of-variation bounds for `κ̂` (defaults to the exact κ(M)).
pub fn estimate_mean_entropy<T: Scalar>(
    m: &SpdMatrix<T>,
    plan: &SamplePlan,
    kappa_hat: Option<T>,
) -> Result<EstimateReport<T>> {
    let kh = KappaHat::resolve(kappa_hat, m)?;
    let dist = sample_logminors(m, plan)?;
    report_from_distribution(m, plan, kh, &dist)
}

/// Builds the report for log-minors already drawn under `plan`.
pub fn report_from_distribution<T: Scalar>(
    m: &SpdMatrix<T>,
    plan: &SamplePlan,
    kh: KappaHat<T>,
    dist: &LogMinorDistribution<T>,
) -> Result<EstimateReport<T>> {
    let n = m.dim();
    let spectrum = m.spectrum()?;
    let mean_logminor = dist.mean();
    let mean_entropy = entropy_from_log_det(mean_logminor, plan.k);
    let ctx = BoundContext::new(n, plan.k, kh.value)?
        .with_diagonal(m.is_diagonal())
        .with_q(plan.q as u64)
        .with_ell(spectrum.ell);
    let se = se_bounds(&ctx)?;
    let cv = match cv_bounds(&ctx) {
        Ok(cv) => Some(cv),
        Err(Error::EllZero) => None,
        Err(e) => return Err(e),
    };
    Ok(EstimateReport {
        n,
        k: plan.k,
        q: plan.q,
        seed: plan.seed,
        kappa: spectrum.condition_number,
        kappa_hat: kh.value,
        kappa_hat_source: kh.source,
        ell: spectrum.ell,
        mean_logminor,
        mean_entropy,
        sample_std_logminor: dist.variance().sqrt(),
        se_bounds: se,
        cv_bounds: cv,
        spectrum_straddles_one: spectrum.straddles_one(),
    })
}

/// `P(|Y - E[Y]| >= r)` under `dist`, using the distribution's own weighted mean.
pub fn empirical_tail<T: Scalar>(dist: &LogMinorDistribution<T>, r: T) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(Error::NegativeR(to_f64(r)));
    }
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let mu = dist.mean();
    Ok(compensated_sum(
        dist.values
            .iter()
            .zip(&dist.weights)
            .filter(|(&v, _)| (v - mu).abs() >= r)
            .map(|(_, &w)| w),
    ))
}

/// One equal-width histogram bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin<T> {
    pub center: T,
    pub width: T,
    pub density: T,
}

/// Equal-width density histogram over `[min, max]` of the values.
///
/// A degenerate range is widened to `1e-9` around the single value.
pub fn histogram<T: Scalar>(
    dist: &LogMinorDistribution<T>,
    bins: usize,
) -> Result<Vec<HistogramBin<T>>> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if bins == 0 {
        return Err(Error::BadArguments(
            "histogram needs at least one bin".into(),
        ));
    }
    let (mut lo, mut hi) = (dist.min(), dist.max());
    if hi <= lo {
        let half = lit::<T>(0.5e-9);
        lo = lo - half;
        hi = hi + half;
    }
    let nb = from_usize::<T>(bins);
    let width = (hi - lo) / nb;
    let mut mass = vec![T::zero(); bins];
    for (&v, &w) in dist.values.iter().zip(&dist.weights) {
        let pos = ((v - lo) / width).floor();
        let b = pos.to_usize().unwrap_or(0).min(bins - 1);
        mass[b] = mass[b] + w;
    }
    Ok(mass
        .into_iter()
        .enumerate()
        .map(|(i, m)| HistogramBin {
            center: lo + width * (from_usize::<T>(i) + lit::<T>(0.5)),
            width,
            density: m / width,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_exact;
    use crate::generators::gen_e1;
    use crate::linalg::{make_spd, SquareMatrix};

    #[test]
    fn full_subset_when_k_equals_n() {
        let mut rng = stream(0, "t", 0);
        assert_eq!(sample_index_set(5, 5, &mut rng).unwrap(), IndexSet::all(5));
        assert_eq!(sample_index_set(1, 1, &mut rng).unwrap().as_slice(), &[0]);
        assert!(matches!(
            sample_index_set(3, 4, &mut rng),
            Err(Error::KTooLarge { k: 4, n: 3 })
        ));
    }

    #[test]
    fn index_sets_are_uniform() {
        // 6 subsets of {0..4} of size 2; each count ~ Binomial(60000, 1/6).
        let draws = 60_000;
        let mut rng = stream(3, "uniformity", 0);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let s = sample_index_set(4, 2, &mut rng).unwrap();
            *counts.entry(s.as_slice().to_vec()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (s, &c) in &counts {
            let z = (c as f64 - draws as f64 * p) / sd;
            assert!(z.abs() < 5.0, "{s:?}: z = {z}");
        }
    }

    #[test]
    fn identity_gives_zero_logminors() {
        let m = make_spd(SquareMatrix::<f64>::identity(6)).unwrap();
        let d = sample_logminors(&m, &SamplePlan::new(3, 100, 1)).unwrap();
        assert!(d.values.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn diagonal_k1_draws_log_eigenvalues() {
        let m = make_spd(SquareMatrix::from_diagonal(&[5.0, 2.0, 1.5])).unwrap();
        let d = sample_logminors(&m, &SamplePlan::new(1, 500, 2)).unwrap();
        let logs = [5f64.ln(), 2f64.ln(), 1.5f64.ln()];
        for v in d.values {
            assert!(logs.iter().any(|l| (l - v).abs() < 1e-14));
        }
    }

    #[test]
    fn sampling_is_deterministic_across_chunks() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let plan = SamplePlan::new(5, 3 * SAMPLE_CHUNK + 17, 9);
        let a = sample_logminors(&m, &plan).unwrap();
        let b = sample_logminors(&m, &plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), plan.q);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| sample_logminors(&m, &plan).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn distinct_mode_has_no_duplicates_and_checks_capacity() {
        let m = gen_e1::<f64>(6, 3.0).unwrap();
        let mut plan = SamplePlan::new(3, 20, 4);
        plan.with_replacement = false;
        let d = sample_logminors(&m, &plan).unwrap();
        let exact = enumerate_exact(&m, 3, None).unwrap();
        let mut a = d.values.clone();
        let mut b = exact.distribution.values.clone();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);
        plan.q = 21;
        assert!(sample_logminors(&m, &plan).is_err());
    }

    #[test]
    fn identity_estimate_has_zero_bounds() {
        let m = make_spd(SquareMatrix::<f64>::identity(5)).unwrap();
        let r = estimate_mean_entropy(&m, &SamplePlan::new(2, 10, 0), None).unwrap();
        assert_eq!(r.mean_logminor, 0.0);
        let c = 1.0 + (2.0 * std::f64::consts::PI).ln();
        assert!((r.mean_entropy - c).abs() < 1e-15);
        assert_eq!(r.se_bounds.se1_logminor, 0.0);
        assert_eq!(r.se_bounds.se2_logminor, 0.0);
        assert_eq!(r.se_bounds.se3_logminor, Some(0.0));
        assert!(r.cv_bounds.is_none());
    }

    #[test]
    fn e1_se1_matches_formula() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let q = 2000 * 5;
        let r = estimate_mean_entropy(&m, &SamplePlan::new(5, q, 1), Some(3.0)).unwrap();
        let expect = (6.0 * 5.0 * 15.0 / (q as f64 * 20.0)).sqrt() * 3f64.ln();
        assert!((r.se_bounds.se1_logminor - expect).abs() < 1e-15);
        assert_eq!(r.se_bounds.se1_entropy(), r.se_bounds.se1_logminor / 2.0);
    }

    #[test]
    fn entropy_is_affine_in_logminor_mean() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let r = estimate_mean_entropy(&m, &SamplePlan::new(19, 50, 3), None).unwrap();
        assert_eq!(r.mean_entropy, entropy_from_log_det(r.mean_logminor, 19));
        let c = 19.0 / 2.0 * (1.0 + (2.0 * std::f64::consts::PI).ln());
        assert!((r.mean_entropy - r.mean_logminor / 2.0 - c).abs() < 1e-12);
    }

    #[test]
    fn kappa_hat_below_condition_number_rejected() {
        let m = gen_e1::<f64>(4, 3.0).unwrap();
        assert!(matches!(
            estimate_mean_entropy(&m, &SamplePlan::new(2, 10, 0), Some(2.0)),
            Err(Error::KappaHatTooSmall { .. })
        ));
    }

    #[test]
    fn tails_of_e1_two_point_distribution() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let d = enumerate_exact(&m, 1, None).unwrap().distribution;
        assert_eq!(empirical_tail(&d, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_tail(&d, 0.6).unwrap(), 0.0);
        assert!((empirical_tail(&d, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(empirical_tail(&d, -0.1), Err(Error::NegativeR(_))));
    }

    #[test]
    fn degenerate_tail_is_one_at_zero() {
        let d =
            LogMinorDistribution::uniform(vec![2.0f64; 4], DistributionKind::Exact, 1, 4).unwrap();
        assert_eq!(empirical_tail(&d, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_tail(&d, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn histogram_cases() {
        let id = make_spd(SquareMatrix::<f64>::identity(6)).unwrap();
        let d = enumerate_exact(&id, 3, None).unwrap().distribution;
        let h = histogram(&d, 60).unwrap();
        assert_eq!(h.iter().filter(|b| b.density > 0.0).count(), 1);

        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let d = enumerate_exact(&m, 5, None).unwrap().distribution;
        let h = histogram(&d, 60).unwrap();
        let occupied: Vec<_> = h.iter().filter(|b| b.density > 0.0).collect();
        assert_eq!(occupied.len(), 6);
        let total: f64 = h.iter().map(|b| b.density * b.width).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(matches!(histogram(&d, 0), Err(Error::BadArguments(_))));
    }

    #[test]
    fn empty_distribution_rejected() {
        assert!(matches!(
            LogMinorDistribution::<f64>::uniform(vec![], DistributionKind::Empirical, 1, 1),
            Err(Error::EmptyDistribution)
        ));
    }
}
