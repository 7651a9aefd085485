//! Exhaustive enumeration of all `C(n, k)` principal log-minors, closed-form
//! moments for two-level diagonal matrices, and a randomized search for
//! non-diagonal matrices whose log-minor variance beats every diagonal matrix
//! with the same condition number.

use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{conjugate_diagonal, haar_from_stream, pinned_uniform_spectrum};
use crate::linalg::{make_spd, LogDetWorkspace, SpdMatrix, SquareMatrix};
use crate::rng::{stream, Gaussian};
use crate::sampling::{DistributionKind, LogMinorDistribution};
use crate::scalar::{to_f64, Scalar};

/// Default cap on the number of subsets [`enumerate_exact`] will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Subsets per enumeration work unit.
const ENUM_CHUNK: usize = 4096;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) / (i + 1) is exact at every step.
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(mut rank: u128, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut x = 0usize;
    for i in 0..k {
        loop {
            let count = binomial(n - x - 1, k - i - 1);
            if rank < count {
                break;
            }
            rank -= count;
            x += 1;
        }
        out.push(x);
        x += 1;
    }
    out
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
/// Returns `false` after the last one.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact law of `Y_{M,k}` with its moments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactSummary<T> {
    pub n: usize,
    pub k: usize,
    pub count: u64,
    pub mean: T,
    pub variance: T,
    pub min: T,
    pub max: T,
    #[serde(skip)]
    pub distribution: LogMinorDistribution<T>,
}

impl<T: Scalar> ExactSummary<T> {
    pub fn support_width(&self) -> T {
        self.max - self.min
    }
}

/// Progress callback: `(subsets done, total)`.
pub type Progress<'a> = &'a (dyn Fn(u64, u64) + Sync);

/// Enumerates every `k`-subset in lexicographic order. `cap` defaults to
/// [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_exact<T: Scalar>(
    m: &SpdMatrix<T>,
    k: usize,
    cap: Option<u128>,
) -> Result<ExactSummary<T>> {
    enumerate_exact_with_progress(m, k, cap, None)
}

pub fn enumerate_exact_with_progress<T: Scalar>(
    m: &SpdMatrix<T>,
    k: usize,
    cap: Option<u128>,
    progress: Option<Progress<'_>>,
) -> Result<ExactSummary<T>> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let count = binomial(n, k);
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    if count > cap || count > usize::MAX as u128 {
        return Err(Error::TooManySubsets { count, cap });
    }
    let values = all_log_minors(m.entries(), k, count as usize, progress)?;
    let distribution = LogMinorDistribution::uniform(values, DistributionKind::Exact, k, n)?;
    Ok(ExactSummary {
        n,
        k,
        count: count as u64,
        mean: distribution.mean(),
        variance: distribution.variance(),
        min: distribution.min(),
        max: distribution.max(),
        distribution,
    })
}

/// Log-minors in lexicographic subset order. Work is split into fixed chunks,
/// so the output is identical for any number of threads.
fn all_log_minors<T: Scalar>(
    a: &SquareMatrix<T>,
    k: usize,
    count: usize,
    progress: Option<Progress<'_>>,
) -> Result<Vec<T>> {
    let n = a.dim();
    let mut values = vec![T::zero(); count];
    let done = AtomicU64::new(0);
    let report_every = 100_000u64;
    values
        .par_chunks_mut(ENUM_CHUNK)
        .enumerate()
        .try_for_each(|(c, out)| -> Result<()> {
            let mut idx = unrank_combination((c * ENUM_CHUNK) as u128, n, k);
            let mut ws = LogDetWorkspace::new(k);
            for (i, slot) in out.iter_mut().enumerate() {
                if i > 0 {
                    next_combination(&mut idx, n);
                }
                *slot = ws.log_det_principal(a, &idx)?;
            }
            if let Some(cb) = progress {
                let before = done.fetch_add(out.len() as u64, Ordering::Relaxed);
                let after = before + out.len() as u64;
                if after / report_every > before / report_every || after == count as u64 {
                    cb(after, count as u64);
                }
            }
            Ok(())
        })?;
    Ok(values)
}

/// Serial enumeration returning only the population variance; used per trial
/// inside already-parallel searches.
fn exact_variance_serial<T: Scalar>(a: &SquareMatrix<T>, k: usize) -> Result<T> {
    let n = a.dim();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut ws = LogDetWorkspace::new(k);
    let mut values = Vec::with_capacity(binomial(n, k) as usize);
    loop {
        values.push(ws.log_det_principal(a, &idx)?);
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    let d = LogMinorDistribution::uniform(values, DistributionKind::Exact, k, n)?;
    Ok(d.variance())
}

/// Exact hypergeometric factors of a two-level diagonal log-minor.
///
/// With `ell` of `n` eigenvalues equal to κ and the rest 1, `Y / log κ` is
/// hypergeometric, so `E[Y] = mean_factor · log κ` and
/// `Var[Y] = variance_factor · (log κ)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HypergeometricFactors {
    /// `k ℓ / n`
    pub mean_factor: Ratio<u128>,
    /// `k (n-k) (n-ℓ) ℓ / (n² (n-1))`
    pub variance_factor: Ratio<u128>,
}

pub fn hypergeometric_factors(n: usize, k: usize, ell: usize) -> Result<HypergeometricFactors> {
    if n < 2 || ell < 1 || ell >= n {
        return Err(Error::BadArguments(format!(
            "two-level split needs 1 <= ell <= n-1 (n = {n}, ell = {ell})"
        )));
    }
    if k < 1 || k > n {
        return Err(Error::BadArguments(format!(
            "need 1 <= k <= n (n = {n}, k = {k})"
        )));
    }
    let (n, k, ell) = (n as u128, k as u128, ell as u128);
    Ok(HypergeometricFactors {
        mean_factor: Ratio::new(k * ell, n),
        variance_factor: Ratio::new(k * (n - k) * (n - ell) * ell, n * n * (n - 1)),
    })
}

fn ratio_to<T: Scalar>(r: Ratio<u128>) -> T {
    T::from_u128(*r.numer()).unwrap() / T::from_u128(*r.denom()).unwrap()
}

/// `(E[Y], Var[Y])` for the two-level diagonal matrix with `ell` entries κ.
pub fn two_level_moments<T: Scalar>(n: usize, k: usize, ell: usize, kappa: T) -> Result<(T, T)> {
    if !(kappa >= T::one()) {
        return Err(Error::BadArguments(format!(
            "kappa must be >= 1, got {kappa}"
        )));
    }
    let f = hypergeometric_factors(n, k, ell)?;
    let lk = kappa.ln();
    Ok((
        ratio_to::<T>(f.mean_factor) * lk,
        ratio_to::<T>(f.variance_factor) * lk * lk,
    ))
}

/// Largest two-level diagonal variance over all splits, and the split attaining it.
pub fn max_two_level_variance<T: Scalar>(n: usize, k: usize, kappa: T) -> Result<(T, usize)> {
    let mut best = (T::neg_infinity(), 0);
    for ell in 1..n {
        let (_, v) = two_level_moments(n, k, ell, kappa)?;
        if v > best.0 {
            best = (v, ell);
        }
    }
    Ok(best)
}

/// Random matrices examined by [`conjecture_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchModel {
    /// Spectrum `{κ, 1}` plus uniform draws on `[1, κ]`, Haar-conjugated.
    HaarConjugated,
    /// Diagonal with pinned extremes and interior eigenvalues drawn from `{1, κ}`.
    DiagonalVertices,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport<T> {
    pub n: usize,
    pub k: usize,
    pub kappa: T,
    pub trials: usize,
    pub seed: u64,
    pub model: SearchModel,
    pub best_variance: T,
    pub best_trial: usize,
    /// Largest variance over two-level diagonal matrices with the same κ.
    pub diagonal_max: T,
    pub diagonal_best_split: usize,
    pub excess: T,
    pub counterexample: bool,
    #[serde(skip)]
    pub witness: SquareMatrix<T>,
}

/// Tolerance above the diagonal maximum before a trial counts as a counterexample.
pub const COUNTEREXAMPLE_TOLERANCE: f64 = 1e-9;

/// Draws `trials` random matrices with condition number κ, computes the exact
/// variance of `Y_{·,k}` for each, and compares the largest against the best
/// two-level diagonal.
pub fn conjecture_search<T: Scalar>(
    n: usize,
    k: usize,
    kappa: T,
    trials: usize,
    seed: u64,
    model: SearchModel,
) -> Result<ConjectureReport<T>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if trials == 0 {
        return Err(Error::BadArguments("trials must be at least 1".into()));
    }
    if !(kappa >= T::one()) {
        return Err(Error::KappaBelowOne(to_f64(kappa)));
    }
    let count = binomial(n, k);
    if count > DEFAULT_ENUMERATION_CAP {
        return Err(Error::TooManySubsets {
            count,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let (diagonal_max, diagonal_best_split) = max_two_level_variance(n, k, kappa)?;

    let results: Vec<(T, SquareMatrix<T>)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(T, SquareMatrix<T>)> {
            let m = trial_matrix(n, kappa, seed, t as u64, model)?;
            let v = exact_variance_serial(m.entries(), k)?;
            Ok((v, m.into_entries()))
        })
        .collect::<Result<_>>()?;

    let (best_trial, (best_variance, witness)) = results
        .into_iter()
        .enumerate()
        .fold(
            None::<(usize, (T, SquareMatrix<T>))>,
            |acc, (i, cur)| match acc {
                Some((j, best)) if best.0 >= cur.0 => Some((j, best)),
                _ => Some((i, cur)),
            },
        )
        .expect("at least one trial");
    let excess = best_variance - diagonal_max;
    Ok(ConjectureReport {
        n,
        k,
        kappa,
        trials,
        seed,
        model,
        best_variance,
        best_trial,
        diagonal_max,
        diagonal_best_split,
        excess,
        counterexample: to_f64(excess) > COUNTEREXAMPLE_TOLERANCE,
        witness,
    })
}

fn trial_matrix<T: Scalar>(
    n: usize,
    kappa: T,
    seed: u64,
    trial: u64,
    model: SearchModel,
) -> Result<SpdMatrix<T>> {
    let mut rng = stream(seed, "conjecture-spectrum", trial);
    match model {
        SearchModel::HaarConjugated => {
            let d = pinned_uniform_spectrum(n, kappa, &mut rng);
            let mut g = Gaussian::new(stream(seed, "conjecture-haar", trial));
            let q = haar_from_stream::<T, _>(n, &mut g);
            make_spd(conjugate_diagonal(&d, &q))
        }
        SearchModel::DiagonalVertices => {
            let mut d = Vec::with_capacity(n);
            d.push(kappa);
            for _ in 0..n - 2 {
                d.push(if rng.gen::<bool>() { kappa } else { T::one() });
            }
            d.push(T::one());
            make_spd(SquareMatrix::from_diagonal(&d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_e1, gen_two_level_diagonal};
    use approx::assert_abs_diff_eq;

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 6), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn unrank_matches_iteration() {
        let (n, k) = (7, 3);
        let mut idx: Vec<usize> = (0..k).collect();
        let mut rank = 0u128;
        loop {
            assert_eq!(unrank_combination(rank, n, k), idx);
            rank += 1;
            if !next_combination(&mut idx, n) {
                break;
            }
        }
        assert_eq!(rank, binomial(n, k));
    }

    #[test]
    fn identity_enumeration() {
        let m = make_spd(SquareMatrix::<f64>::identity(8)).unwrap();
        let s = enumerate_exact(&m, 4, None).unwrap();
        assert_eq!(s.count, 70);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn e1_moments_match_reference_values() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let s = enumerate_exact(&m, 19, None).unwrap();
        assert_abs_diff_eq!(s.mean, 10.437, epsilon = 5e-4);
        assert_abs_diff_eq!(s.variance, 0.302, epsilon = 5e-4);
        let s10 = enumerate_exact(&m, 10, None).unwrap();
        assert_eq!(s10.count, 184_756);
        assert_abs_diff_eq!(s10.mean, 5.493, epsilon = 5e-4);
        assert_abs_diff_eq!(s10.variance, 1.588, epsilon = 5e-4);
    }

    #[test]
    fn cap_is_enforced() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        assert!(matches!(
            enumerate_exact(&m, 10, Some(1000)),
            Err(Error::TooManySubsets {
                count: 184_756,
                cap: 1000
            })
        ));
    }

    #[test]
    fn progress_reaches_total() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let last = std::sync::Mutex::new(0u64);
        let cb = |done: u64, total: u64| {
            assert!(done <= total);
            let mut l = last.lock().unwrap();
            *l = (*l).max(done);
        };
        enumerate_exact_with_progress(&m, 10, None, Some(&cb)).unwrap();
        assert_eq!(*last.lock().unwrap(), 184_756);
    }

    #[test]
    fn enumeration_is_thread_count_independent() {
        let m = crate::generators::gen_e3::<f64>(14, 3.0, 5).unwrap();
        let a = enumerate_exact(&m, 7, None).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| enumerate_exact(&m, 7, None).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn two_level_reference_values() {
        let (mean, var) = two_level_moments::<f64>(20, 5, 10, 3.0).unwrap();
        assert_abs_diff_eq!(mean, 2.747, epsilon = 5e-4);
        assert_abs_diff_eq!(var, 1.191, epsilon = 5e-4);
        let (_, var10) = two_level_moments::<f64>(20, 10, 10, 3.0).unwrap();
        assert_abs_diff_eq!(var10, 1.588, epsilon = 5e-4);
        assert_eq!(two_level_moments::<f64>(9, 4, 3, 1.0).unwrap(), (0.0, 0.0));
        assert!(two_level_moments::<f64>(9, 4, 0, 2.0).is_err());
        assert!(two_level_moments::<f64>(9, 10, 3, 2.0).is_err());
    }

    #[test]
    fn two_level_matches_enumeration_small_grid() {
        for n in 2..=9 {
            for ell in 1..n {
                let m = gen_two_level_diagonal::<f64>(n, 2.5, ell).unwrap();
                for k in 1..=n {
                    let s = enumerate_exact(&m, k, None).unwrap();
                    let (mean, var) = two_level_moments(n, k, ell, 2.5).unwrap();
                    assert!((s.mean - mean).abs() <= 1e-10 * mean.abs().max(1e-300) + 1e-14);
                    assert!((s.variance - var).abs() <= 1e-10 * var.abs() + 1e-14);
                }
            }
        }
    }

    #[test]
    fn conjecture_trivial_kappa() {
        let r = conjecture_search::<f64>(5, 2, 1.0, 20, 1, SearchModel::HaarConjugated).unwrap();
        assert!(r.best_variance.abs() < 1e-20);
        assert!(!r.counterexample);
    }

    #[test]
    fn diagonal_vertex_search_attains_two_level_maximum() {
        let r = conjecture_search::<f64>(6, 3, 3.0, 200, 2, SearchModel::DiagonalVertices).unwrap();
        assert!(!r.counterexample);
        assert!((r.best_variance - r.diagonal_max).abs() < 1e-12);
        assert_eq!(r.diagonal_best_split, 3);
    }

    #[test]
    fn haar_search_is_deterministic() {
        let a = conjecture_search::<f64>(5, 2, 3.0, 30, 4, SearchModel::HaarConjugated).unwrap();
        let b = conjecture_search::<f64>(5, 2, 3.0, 30, 4, SearchModel::HaarConjugated).unwrap();
        assert_eq!(a, b);
        assert!(!a.witness.is_diagonal());
    }
}
