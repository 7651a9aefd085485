//! End-to-end estimate: condition number and ℓ(M) → sample size → sample → report.

use serde::Serialize;

use crate::bounds::{plan_sample_size, BoundChoice, BoundContext, PlanMetric, PlannedSampleSize};
use crate::error::Result;
use crate::linalg::SpdMatrix;
use crate::sampling::{estimate_mean_entropy, EstimateReport, KappaHat, SamplePlan};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PipelineReport<T> {
    pub metric: PlanMetric,
    pub bound: BoundChoice,
    pub target: T,
    pub plan: PlannedSampleSize<T>,
    pub estimate: EstimateReport<T>,
}

/// Plans `q` so the chosen bound meets `target`, then samples and reports.
pub fn run_pipeline<T: Scalar>(
    m: &SpdMatrix<T>,
    k: usize,
    target: T,
    metric: PlanMetric,
    bound: BoundChoice,
    kappa_hat: Option<T>,
    seed: u64,
) -> Result<PipelineReport<T>> {
    let kh = KappaHat::resolve(kappa_hat, m)?;
    let spectrum = m.spectrum()?;
    let ctx = BoundContext::new(m.dim(), k, kh.value)?
        .with_diagonal(m.is_diagonal())
        .with_ell(spectrum.ell);
    let plan = plan_sample_size(&ctx, target, metric, bound)?;
    let q = usize::try_from(plan.q).map_err(|_| crate::error::Error::SampleSizeOverflow)?;
    let estimate = estimate_mean_entropy(m, &SamplePlan::new(k, q, seed), Some(kh.value))?;
    let estimate = EstimateReport {
        kappa_hat_source: kh.source,
        ..estimate
    };
    Ok(PipelineReport {
        metric,
        bound,
        target,
        plan,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::entropy_constant;
    use crate::generators::gen_e1;
    use crate::linalg::{make_spd, SquareMatrix};

    #[test]
    fn identity_needs_one_sample() {
        let m = make_spd(SquareMatrix::<f64>::identity(6)).unwrap();
        let r = run_pipeline(
            &m,
            3,
            1e-6,
            PlanMetric::SeEntropy,
            BoundChoice::Support,
            None,
            1,
        )
        .unwrap();
        assert_eq!(r.plan.q, 1);
        assert!((r.estimate.mean_entropy - 3.0 * entropy_constant::<f64>()).abs() < 1e-14);
    }

    #[test]
    fn e1_entropy_target() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let r = run_pipeline(
            &m,
            5,
            0.025,
            PlanMetric::SeEntropy,
            BoundChoice::Support,
            Some(3.0),
            7,
        )
        .unwrap();
        assert_eq!(r.plan.q, 604);
        assert_eq!(r.estimate.q, 604);
    }

    #[test]
    fn cv_metric_on_ell_zero_matrix_fails_with_hint() {
        let m = gen_e1::<f64>(20, 3.0).unwrap();
        let err = run_pipeline(
            &m,
            5,
            0.01,
            PlanMetric::CvLogminor,
            BoundChoice::Support,
            None,
            7,
        )
        .unwrap_err();
        assert!(err.to_string().contains("rescale"));
    }
}
