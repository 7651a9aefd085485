//! Closed-form tail, variance, standard-error and coefficient-of-variation
//! bounds for `Y_{M,k}` given only `κ̂ >= κ(M)`, and a sample-size planner
//! that inverts them.
//!
//! Three families of variance bound are provided:
//!
//! * **exponential**: `6 k(n-k)/n · (log κ̂)²`, obtained by integrating the
//!   exponential tail bound `3 exp(-(r / log κ̂) √(n / (k(n-k))))`;
//! * **support**: Popoviciu's inequality on a support of width at most
//!   `∧ log κ̂` where `∧ = min(k, n-k)`. The quadratic form `¼ (∧ log κ̂)²`
//!   is what Popoviciu gives directly; the linear form `¼ ∧ (log κ̂)²` is the
//!   one the standard-error and CV bounds are built on. Both are exposed;
//! * **diagonal**: `(k/4) (n-k)/(n-1) · (log κ̂)²`, valid only for diagonal
//!   matrices and attained by the two-level diagonal with a half/half split.
//!
//! Every variance bound `V` yields a standard-error bound `√(V/q)` for `S_Y`,
//! halved for the entropy mean `S_h`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Parameters every bound is a function of.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundContext<T> {
    pub n: usize,
    pub k: usize,
    /// Upper bound on κ(M); at least 1.
    pub kappa_hat: T,
    pub diagonal: bool,
    /// ℓ(M) = min(|log λ_1|, |log λ_n|), when known.
    pub ell: Option<T>,
    pub q: Option<u64>,
}

impl<T: Scalar> BoundContext<T> {
    pub fn new(n: usize, k: usize, kappa_hat: T) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::KTooLarge { k, n });
        }
        if !(kappa_hat >= T::one()) || !kappa_hat.is_finite() {
            return Err(Error::KappaBelowOne(to_f64(kappa_hat)));
        }
        Ok(Self {
            n,
            k,
            kappa_hat,
            diagonal: false,
            ell: None,
            q: None,
        })
    }

    pub fn with_diagonal(mut self, diagonal: bool) -> Self {
        self.diagonal = diagonal;
        self
    }

    pub fn with_ell(mut self, ell: T) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn with_q(mut self, q: u64) -> Self {
        self.q = Some(q);
        self
    }

    /// `∧_{n,k} = min(k, n-k)`.
    pub fn wedge(&self) -> usize {
        self.k.min(self.n - self.k)
    }

    pub fn log_kappa(&self) -> T {
        self.kappa_hat.ln()
    }

    fn nf(&self) -> T {
        from_usize(self.n)
    }

    fn kf(&self) -> T {
        from_usize(self.k)
    }

    fn n_minus_k(&self) -> T {
        from_usize(self.n - self.k)
    }

    fn q_or_err(&self) -> Result<T> {
        match self.q {
            Some(0) => Err(Error::BadArguments("q must be at least 1".into())),
            Some(q) => Ok(T::from_u64(q).unwrap()),
            None => Err(Error::MissingSampleCount),
        }
    }
}

/// Which closed form of the support-based variance bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportVariant {
    /// `¼ (∧ log κ̂)²`: Popoviciu applied to the support width.
    Quadratic,
    /// `¼ ∧ (log κ̂)²`: the form the standard-error and CV bounds use.
    Linear,
}

/// A probability bound: the raw formula value and its clamp to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound<T> {
    pub raw: T,
    pub reported: T,
}

impl<T: Scalar> TailBound<T> {
    fn clamp(raw: T) -> Self {
        Self {
            raw,
            reported: raw.max(T::zero()).min(T::one()),
        }
    }
}

/// `6 k(n-k)/n · (log κ̂)²`.
pub fn var_bound_exponential<T: Scalar>(ctx: &BoundContext<T>) -> T {
    let lk = ctx.log_kappa();
    lit::<T>(6.0) * ctx.kf() * ctx.n_minus_k() / ctx.nf() * lk * lk
}

/// `P(|Y - E Y| >= r) <= 3 exp(-(r / log κ̂) √(n / (k(n-k))))`.
///
/// `k = n` is rejected with `KEqualsN` (the exponent is undefined and `Y` is
/// deterministic). For `κ̂ = 1` the distribution is a point mass: the bound is
/// 1 at `r = 0` and 0 beyond.
pub fn tail_bound_exponential<T: Scalar>(ctx: &BoundContext<T>, r: T) -> Result<TailBound<T>> {
    if !(r >= T::zero()) {
        return Err(Error::NegativeR(to_f64(r)));
    }
    if ctx.k == ctx.n {
        return Err(Error::KEqualsN);
    }
    let lk = ctx.log_kappa();
    if lk == T::zero() {
        let v = if r == T::zero() { T::one() } else { T::zero() };
        return Ok(TailBound {
            raw: v,
            reported: v,
        });
    }
    let rate = (ctx.nf() / (ctx.kf() * ctx.n_minus_k())).sqrt();
    Ok(TailBound::clamp(lit::<T>(3.0) * (-(r / lk) * rate).exp()))
}

/// Support-width variance bound in either closed form.
pub fn var_bound_support<T: Scalar>(ctx: &BoundContext<T>, variant: SupportVariant) -> T {
    let w: T = from_usize(ctx.wedge());
    let lk = ctx.log_kappa();
    let quarter = lit::<T>(0.25);
    match variant {
        SupportVariant::Quadratic => quarter * (w * lk) * (w * lk),
        SupportVariant::Linear => quarter * w * lk * lk,
    }
}

/// Upper bound `∧ log κ̂` on `max Y - min Y`.
pub fn support_width_bound<T: Scalar>(ctx: &BoundContext<T>) -> T {
    from_usize::<T>(ctx.wedge()) * ctx.log_kappa()
}

/// `(k/4) (n-k)/(n-1) (log κ̂)²`, for diagonal matrices only.
pub fn var_bound_diagonal<T: Scalar>(ctx: &BoundContext<T>) -> Result<T> {
    if !ctx.diagonal {
        return Err(Error::NotDiagonal);
    }
    if ctx.k == ctx.n {
        return Ok(T::zero());
    }
    let lk = ctx.log_kappa();
    let nm1: T = from_usize(ctx.n - 1);
    Ok(ctx.kf() / lit::<T>(4.0) * (ctx.n_minus_k() / nm1) * lk * lk)
}

/// Chebyshev tail `min(1, var / r²)` from a variance bound.
pub fn tail_chebyshev<T: Scalar>(var_bound: T, r: T) -> Result<TailBound<T>> {
    if !(r > T::zero()) {
        return Err(Error::NonpositiveR(to_f64(r)));
    }
    Ok(TailBound::clamp(var_bound / (r * r)))
}

/// Standard-error bounds on `S_Y`. Entropy-mean bounds are exactly half and
/// are derived on access, never stored separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeBounds<T> {
    /// `√(6k(n-k)/(qn)) log κ̂`
    pub se1_logminor: T,
    /// `½ √(∧/q) log κ̂`
    pub se2_logminor: T,
    /// `½ √(k(n-k)/(q(n-1))) log κ̂`, diagonal matrices only.
    pub se3_logminor: Option<T>,
}

impl<T: Scalar> SeBounds<T> {
    pub fn se1_entropy(&self) -> T {
        halve(self.se1_logminor)
    }

    pub fn se2_entropy(&self) -> T {
        halve(self.se2_logminor)
    }

    pub fn se3_entropy(&self) -> Option<T> {
        self.se3_logminor.map(halve)
    }
}

fn halve<T: Scalar>(x: T) -> T {
    x / (T::one() + T::one())
}

impl<T: Scalar> Serialize for SeBounds<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SeBounds", 6)?;
        st.serialize_field("se1_logminor", &self.se1_logminor)?;
        st.serialize_field("se2_logminor", &self.se2_logminor)?;
        st.serialize_field("se3_logminor", &self.se3_logminor)?;
        st.serialize_field("se1_entropy", &self.se1_entropy())?;
        st.serialize_field("se2_entropy", &self.se2_entropy())?;
        st.serialize_field("se3_entropy", &self.se3_entropy())?;
        st.end()
    }
}

/// Standard-error bounds; requires `ctx.q`.
pub fn se_bounds<T: Scalar>(ctx: &BoundContext<T>) -> Result<SeBounds<T>> {
    let q = ctx.q_or_err()?;
    Ok(SeBounds {
        se1_logminor: (var_bound_exponential(ctx) / q).sqrt(),
        se2_logminor: (var_bound_support(ctx, SupportVariant::Linear) / q).sqrt(),
        se3_logminor: if ctx.diagonal {
            Some((var_bound_diagonal(ctx)? / q).sqrt())
        } else {
            None
        },
    })
}

/// Coefficient-of-variation bounds for `S_Y` (`cvy*`) and `S_h` (`cvh*`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CvBounds<T> {
    pub cvy1: T,
    pub cvy2: T,
    pub cvh1: T,
    pub cvh2: T,
}

/// CV bounds; requires `ctx.q` and `ctx.ell > 0`.
pub fn cv_bounds<T: Scalar>(ctx: &BoundContext<T>) -> Result<CvBounds<T>> {
    let q = ctx.q_or_err()?;
    let ell = match ctx.ell {
        Some(l) if l > T::zero() => l,
        Some(_) => return Err(Error::EllZero),
        None => {
            return Err(Error::BadArguments(
                "coefficient-of-variation bounds need ell(M)".into(),
            ))
        }
    };
    let lk = ctx.log_kappa();
    let k = ctx.kf();
    let w: T = from_usize(ctx.wedge());
    let two = lit::<T>(2.0);
    // log(2eπ) = 1 + log 2π
    let log_2e_pi = T::one() + T::TAU().ln();
    let root1 = (lit::<T>(6.0) * ctx.n_minus_k() / (q * k * ctx.nf())).sqrt();
    let root2 = (w / (q * k * k)).sqrt();
    Ok(CvBounds {
        cvy1: lk / ell * root1,
        cvy2: lk / (two * ell) * root2,
        cvh1: two * lk / (ell + log_2e_pi) * root1,
        cvh2: lk / (ell + log_2e_pi) * root2,
    })
}

/// `a_i = √k_i · ℓ_i` and whether it is nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationSequence<T> {
    pub values: Vec<T>,
    pub nondecreasing: bool,
}

pub fn concentration_sequence<T: Scalar>(
    ks: &[usize],
    ells: &[T],
) -> Result<ConcentrationSequence<T>> {
    if ks.len() != ells.len() {
        return Err(Error::LengthMismatch(ks.len(), ells.len()));
    }
    let values: Vec<T> = ks
        .iter()
        .zip(ells)
        .map(|(&k, &l)| from_usize::<T>(k).sqrt() * l)
        .collect();
    let nondecreasing = values.windows(2).all(|w| w[0] <= w[1]);
    Ok(ConcentrationSequence {
        values,
        nondecreasing,
    })
}

/// Quantity whose bound the planner drives below a target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMetric {
    SeLogminor,
    SeEntropy,
    CvLogminor,
    CvEntropy,
}

impl std::str::FromStr for PlanMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "se_logminor" => Self::SeLogminor,
            "se_entropy" => Self::SeEntropy,
            "cv_logminor" => Self::CvLogminor,
            "cv_entropy" => Self::CvEntropy,
            _ => return Err(Error::BadArguments(format!("unknown metric `{s}`"))),
        })
    }
}

/// Which variance bound the planner inverts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundChoice {
    /// se1 / cvy1 / cvh1.
    Exponential,
    /// se2 / cvy2 / cvh2.
    Support,
    /// se3 (diagonal matrices; standard error only).
    Diagonal,
}

impl std::str::FromStr for BoundChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exponential" | "1" | "b1" => Self::Exponential,
            "support" | "2" | "b2" => Self::Support,
            "diagonal" | "3" | "b3" => Self::Diagonal,
            _ => return Err(Error::BadArguments(format!("unknown bound `{s}`"))),
        })
    }
}

/// Evaluates the selected bound at the `q` stored in `ctx`.
pub fn metric_bound<T: Scalar>(
    ctx: &BoundContext<T>,
    metric: PlanMetric,
    choice: BoundChoice,
) -> Result<T> {
    match metric {
        PlanMetric::SeLogminor | PlanMetric::SeEntropy => {
            let se = se_bounds(ctx)?;
            let y = match choice {
                BoundChoice::Exponential => se.se1_logminor,
                BoundChoice::Support => se.se2_logminor,
                BoundChoice::Diagonal => se.se3_logminor.ok_or(Error::NotDiagonal)?,
            };
            Ok(if metric == PlanMetric::SeEntropy {
                halve(y)
            } else {
                y
            })
        }
        PlanMetric::CvLogminor | PlanMetric::CvEntropy => {
            let cv = cv_bounds(ctx)?;
            let entropy = metric == PlanMetric::CvEntropy;
            match (choice, entropy) {
                (BoundChoice::Exponential, false) => Ok(cv.cvy1),
                (BoundChoice::Support, false) => Ok(cv.cvy2),
                (BoundChoice::Exponential, true) => Ok(cv.cvh1),
                (BoundChoice::Support, true) => Ok(cv.cvh2),
                (BoundChoice::Diagonal, _) => Err(Error::UnsupportedBound(
                    "no coefficient-of-variation bound is built on the diagonal variance bound"
                        .into(),
                )),
            }
        }
    }
}

/// Result of [`plan_sample_size`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlannedSampleSize<T> {
    pub q: u64,
    /// Bound value at `q`.
    pub achieved: T,
    /// Bound value at `q - 1` (absent when `q = 1`).
    pub previous: Option<T>,
}

/// Smallest `q >= 1` with `bound(q) <= target`.
///
/// Every bound has the form `c / √q`, so `q = ⌈(c / target)²⌉`; the result is
/// then nudged by re-evaluation to absorb rounding.
pub fn plan_sample_size<T: Scalar>(
    ctx: &BoundContext<T>,
    target: T,
    metric: PlanMetric,
    choice: BoundChoice,
) -> Result<PlannedSampleSize<T>> {
    if !(target > T::zero()) {
        return Err(Error::UnattainableTarget(to_f64(target)));
    }
    let at = |q: u64| metric_bound(&ctx.with_q(q), metric, choice);
    let c = at(1)?;
    let raw = (c / target) * (c / target);
    let raw = raw.ceil();
    let q_max = (u64::MAX / 4) as f64;
    let raw_f = to_f64(raw);
    if !raw_f.is_finite() || raw_f > q_max {
        return Err(Error::SampleSizeOverflow);
    }
    let mut q = (raw_f as u64).max(1);
    while at(q)? > target {
        q += 1;
    }
    while q > 1 && at(q - 1)? <= target {
        q -= 1;
    }
    Ok(PlannedSampleSize {
        q,
        achieved: at(q)?,
        previous: if q > 1 { Some(at(q - 1)?) } else { None },
    })
}

/// All variance bounds for one context, plus tail evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundSet<T> {
    pub context: BoundContext<T>,
    pub wedge: usize,
    pub var_exponential: T,
    pub var_support_quadratic: T,
    pub var_support_linear: T,
    pub var_diagonal: Option<T>,
    pub support_width: T,
    pub se: Option<SeBounds<T>>,
    pub cv: Option<CvBounds<T>>,
}

/// Tail bounds at one `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBounds<T> {
    pub r: T,
    pub exponential: TailBound<T>,
    pub chebyshev_support_quadratic: TailBound<T>,
    pub chebyshev_support_linear: TailBound<T>,
    pub chebyshev_diagonal: Option<TailBound<T>>,
}

impl<T: Scalar> TailBounds<T> {
    /// Tightest reported (clamped) bound.
    pub fn tightest(&self) -> T {
        let mut m = self
            .exponential
            .reported
            .min(self.chebyshev_support_quadratic.reported)
            .min(self.chebyshev_support_linear.reported);
        if let Some(d) = self.chebyshev_diagonal {
            m = m.min(d.reported);
        }
        m
    }
}

impl<T: Scalar> BoundSet<T> {
    pub fn evaluate(ctx: &BoundContext<T>) -> Result<Self> {
        Ok(Self {
            context: *ctx,
            wedge: ctx.wedge(),
            var_exponential: var_bound_exponential(ctx),
            var_support_quadratic: var_bound_support(ctx, SupportVariant::Quadratic),
            var_support_linear: var_bound_support(ctx, SupportVariant::Linear),
            var_diagonal: if ctx.diagonal {
                Some(var_bound_diagonal(ctx)?)
            } else {
                None
            },
            support_width: support_width_bound(ctx),
            se: match ctx.q {
                Some(_) => Some(se_bounds(ctx)?),
                None => None,
            },
            cv: match (ctx.q, ctx.ell) {
                (Some(_), Some(l)) if l > T::zero() => Some(cv_bounds(ctx)?),
                _ => None,
            },
        })
    }

    /// Tail bounds at `r > 0`. At `k = n` every tail is 0 (the variable is constant).
    pub fn tails_at(&self, r: T) -> Result<TailBounds<T>> {
        if !(r > T::zero()) {
            return Err(Error::NonpositiveR(to_f64(r)));
        }
        let exponential = match tail_bound_exponential(&self.context, r) {
            Ok(t) => t,
            Err(Error::KEqualsN) => TailBound {
                raw: T::zero(),
                reported: T::zero(),
            },
            Err(e) => return Err(e),
        };
        Ok(TailBounds {
            r,
            exponential,
            chebyshev_support_quadratic: tail_chebyshev(self.var_support_quadratic, r)?,
            chebyshev_support_linear: tail_chebyshev(self.var_support_linear, r)?,
            chebyshev_diagonal: match self.var_diagonal {
                Some(v) => Some(tail_chebyshev(v, r)?),
                None => None,
            },
        })
    }
}
