use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use logminor::bounds::{metric_bound, BoundSet, PlannedSampleSize, TailBounds};
use logminor::exact::{enumerate_exact_with_progress, SearchModel};
use logminor::reproduce::{reproduce_reference, sampling_bound_rows, REFERENCE_RANDOM_ROWS};
use logminor::sampling::{report_from_distribution, KappaSource};
use logminor::{
    conjecture_search, entropy_from_log_det, run_pipeline, sample_logminors, BoundChoice,
    BoundContext, CvBounds, EstimateReport, GeneratorKind, GeneratorSpec, KappaHat, LogBase,
    PlanMetric, SamplePlan, SeBounds, SpdMatrix64,
};
use serde::Serialize;

use crate::matrix_file::{load_matrix, matrix_csv, matrix_text};
use crate::output::{to_csv, write_file, Format, Sink};

/// `start:stop:step`, inclusive of `stop` up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct RGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl std::str::FromStr for RGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got `{s}`"));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: `{x}`"))
        };
        let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
        if start > 0.0 && stop >= start && step > 0.0 && stop.is_finite() {
            Ok(Self { start, stop, step })
        } else {
            Err(format!("need 0 < start <= stop and step > 0, got `{s}`"))
        }
    }
}

impl RGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

pub struct Common<'a> {
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<&'a Path>,
    pub log_base: LogBase,
}

impl Common<'_> {
    fn sink(&self) -> Sink<'_> {
        Sink {
            out: self.out,
            format: self.format.unwrap_or(Format::Json),
        }
    }
}

#[derive(Serialize)]
struct GenOutput {
    kind: GeneratorKind,
    n: usize,
    seed: u64,
    kappa: f64,
    ell: f64,
    log_det: f64,
    eigenvalues: Vec<f64>,
    matrix: Vec<Vec<f64>>,
}

pub fn gen(c: &Common, spec: GeneratorSpec<f64>) -> Result<bool> {
    let m = spec.generate()?;
    let sp = m.spectrum()?;
    let summary = format!(
        "generated {:?} n={} kappa(M)={:.6} ell(M)={:.6} log det={:.6}",
        spec.kind,
        m.dim(),
        sp.condition_number,
        sp.ell,
        m.log_det()?
    );
    let sink = c.sink();
    match c.format {
        None => sink.write_raw(&matrix_text(m.entries()), &summary)?,
        Some(Format::Csv) => sink.write_raw(&matrix_csv(m.entries())?, &summary)?,
        Some(Format::Json) => sink.emit(
            &GenOutput {
                kind: spec.kind,
                n: m.dim(),
                seed: spec.seed,
                kappa: sp.condition_number,
                ell: sp.ell,
                log_det: m.log_det()?,
                eigenvalues: sp.eigenvalues.clone(),
                matrix: m.entries().rows(),
            },
            &summary,
        )?,
    }
    Ok(true)
}

#[derive(Serialize)]
struct EstimateBounds {
    se1_logminor: f64,
    se2_logminor: f64,
    se3_logminor: Option<f64>,
    se1_entropy: f64,
    se2_entropy: f64,
    se3_entropy: Option<f64>,
    cvy1: Option<f64>,
    cvy2: Option<f64>,
    cvh1: Option<f64>,
    cvh2: Option<f64>,
}

impl EstimateBounds {
    fn new(se: &SeBounds<f64>, cv: Option<&CvBounds<f64>>, b: LogBase) -> Self {
        Self {
            se1_logminor: b.scale(se.se1_logminor),
            se2_logminor: b.scale(se.se2_logminor),
            se3_logminor: se.se3_logminor.map(|x| b.scale(x)),
            se1_entropy: b.scale(se.se1_entropy()),
            se2_entropy: b.scale(se.se2_entropy()),
            se3_entropy: se.se3_entropy().map(|x| b.scale(x)),
            cvy1: cv.map(|c| c.cvy1),
            cvy2: cv.map(|c| c.cvy2),
            cvh1: cv.map(|c| c.cvh1),
            cvh2: cv.map(|c| c.cvh2),
        }
    }
}

#[derive(Serialize)]
struct EstimateOutput {
    n: usize,
    k: usize,
    q: usize,
    seed: u64,
    log_base: f64,
    kappa: f64,
    kappa_hat: f64,
    kappa_hat_source: KappaSource,
    ell: f64,
    mean_logminor: f64,
    mean_entropy: f64,
    variance: f64,
    bounds: EstimateBounds,
    spectrum_straddles_one: bool,
}

impl EstimateOutput {
    fn new(r: &EstimateReport<f64>, b: LogBase) -> Self {
        Self {
            n: r.n,
            k: r.k,
            q: r.q,
            seed: r.seed,
            log_base: b.base(),
            kappa: r.kappa,
            kappa_hat: r.kappa_hat,
            kappa_hat_source: r.kappa_hat_source,
            ell: b.scale(r.ell),
            mean_logminor: b.scale(r.mean_logminor),
            mean_entropy: b.scale(r.mean_entropy),
            variance: b.scale_variance(r.sample_std_logminor * r.sample_std_logminor),
            bounds: EstimateBounds::new(&r.se_bounds, r.cv_bounds.as_ref(), b),
            spectrum_straddles_one: r.spectrum_straddles_one,
        }
    }

    fn summary(&self) -> String {
        let mut s = format!(
            "S_Y = {:.6} (se <= {:.3e}), S_h = {:.6} (se <= {:.3e}) from q={} draws of k={} of n={}",
            self.mean_logminor,
            self.bounds.se2_logminor.min(self.bounds.se1_logminor),
            self.mean_entropy,
            self.bounds.se2_entropy.min(self.bounds.se1_entropy),
            self.q,
            self.k,
            self.n
        );
        if self.spectrum_straddles_one && self.bounds.cvy1.is_some() {
            s.push_str("\nnote: spectrum straddles 1, so the CV bounds' |E[Y]| >= k*ell(M) step is not guaranteed");
        }
        s
    }
}

#[derive(Serialize)]
struct ValueRow {
    index: usize,
    log_minor: f64,
}

fn dump_values(path: &Path, values: &[f64], b: LogBase) -> Result<()> {
    let rows: Vec<ValueRow> = values
        .iter()
        .enumerate()
        .map(|(index, &v)| ValueRow {
            index,
            log_minor: b.scale(v),
        })
        .collect();
    write_file(path, &to_csv(&serde_json::to_value(rows)?)?)
}

pub struct SampleArgs<'a> {
    pub matrix: &'a Path,
    pub k: usize,
    pub q: usize,
    pub kappa_hat: Option<f64>,
    pub distinct: bool,
    pub dump_values: Option<&'a Path>,
}

pub fn sample(c: &Common, a: SampleArgs) -> Result<bool> {
    let m = load_matrix(a.matrix)?;
    let plan = SamplePlan {
        with_replacement: !a.distinct,
        ..SamplePlan::new(a.k, a.q, c.seed)
    };
    let kappa_hat = KappaHat::resolve(a.kappa_hat, &m)?;
    let dist = sample_logminors(&m, &plan)?;
    if let Some(path) = a.dump_values {
        dump_values(path, &dist.values, c.log_base)?;
    }
    let report = report_from_distribution(&m, &plan, kappa_hat, &dist)?;
    let out = EstimateOutput::new(&report, c.log_base);
    c.sink().emit(&out, &out.summary())?;
    Ok(true)
}

#[derive(Serialize)]
struct VarianceBounds {
    var_exponential: f64,
    var_support_quadratic: f64,
    var_support_linear: f64,
    var_diagonal: Option<f64>,
    support_width: f64,
}

impl VarianceBounds {
    fn new(set: &BoundSet<f64>, b: LogBase) -> Self {
        Self {
            var_exponential: b.scale_variance(set.var_exponential),
            var_support_quadratic: b.scale_variance(set.var_support_quadratic),
            var_support_linear: b.scale_variance(set.var_support_linear),
            var_diagonal: set.var_diagonal.map(|v| b.scale_variance(v)),
            support_width: b.scale(set.support_width),
        }
    }
}

#[derive(Serialize)]
struct ExactOutput {
    n: usize,
    k: usize,
    count: u64,
    log_base: f64,
    kappa: f64,
    mean_logminor: f64,
    mean_entropy: f64,
    variance: f64,
    min: f64,
    max: f64,
    support_width: f64,
    bounds: VarianceBounds,
}

pub fn exact(
    c: &Common,
    matrix: &Path,
    k: usize,
    cap: u128,
    quiet: bool,
    dump: Option<&Path>,
) -> Result<bool> {
    let m = load_matrix(matrix)?;
    let show = |done: u64, total: u64| eprintln!("exact: {done}/{total} subsets");
    let progress: Option<&(dyn Fn(u64, u64) + Sync)> = if quiet { None } else { Some(&show) };
    let s = enumerate_exact_with_progress(&m, k, Some(cap), progress)?;
    if let Some(path) = dump {
        dump_values(path, &s.distribution.values, c.log_base)?;
    }
    let kappa = m.condition_number()?;
    let set =
        BoundSet::evaluate(&BoundContext::new(m.dim(), k, kappa)?.with_diagonal(m.is_diagonal()))?;
    let b = c.log_base;
    let out = ExactOutput {
        n: s.n,
        k: s.k,
        count: s.count,
        log_base: b.base(),
        kappa,
        mean_logminor: b.scale(s.mean),
        mean_entropy: b.scale(entropy_from_log_det(s.mean, k)),
        variance: b.scale_variance(s.variance),
        min: b.scale(s.min),
        max: b.scale(s.max),
        support_width: b.scale(s.support_width()),
        bounds: VarianceBounds::new(&set, b),
    };
    let summary = format!(
        "E[Y] = {:.6}, Var(Y) = {:.6} over all {} subsets (k={}, n={}); tightest variance bound {:.6}",
        out.mean_logminor,
        out.variance,
        out.count,
        k,
        out.n,
        [
            Some(out.bounds.var_exponential),
            Some(out.bounds.var_support_quadratic),
            Some(out.bounds.var_support_linear),
            out.bounds.var_diagonal
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min)
    );
    c.sink().emit(&out, &summary)?;
    Ok(true)
}

pub struct ContextArgs {
    pub n: usize,
    pub k: usize,
    pub kappa_hat: f64,
    pub q: Option<u64>,
    pub ell: Option<f64>,
    pub diagonal: bool,
}

impl ContextArgs {
    fn context(&self) -> Result<BoundContext<f64>> {
        let mut ctx =
            BoundContext::new(self.n, self.k, self.kappa_hat)?.with_diagonal(self.diagonal);
        if let Some(q) = self.q {
            ctx = ctx.with_q(q);
        }
        if let Some(ell) = self.ell {
            ctx = ctx.with_ell(ell);
        }
        Ok(ctx)
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    n: usize,
    k: usize,
    q: Option<u64>,
    kappa_hat: f64,
    ell: Option<f64>,
    diagonal: bool,
    log_base: f64,
    wedge: usize,
    bounds: VarianceBounds,
    se: Option<EstimateBounds>,
    tails: Vec<TailRow>,
}

#[derive(Serialize)]
struct TailRow {
    r: f64,
    exponential: f64,
    exponential_raw: f64,
    chebyshev_support_quadratic: f64,
    chebyshev_support_linear: f64,
    chebyshev_diagonal: Option<f64>,
    tightest: f64,
}

impl TailRow {
    fn new(r: f64, t: &TailBounds<f64>) -> Self {
        Self {
            r,
            exponential: t.exponential.reported,
            exponential_raw: t.exponential.raw,
            chebyshev_support_quadratic: t.chebyshev_support_quadratic.reported,
            chebyshev_support_linear: t.chebyshev_support_linear.reported,
            chebyshev_diagonal: t.chebyshev_diagonal.map(|d| d.reported),
            tightest: t.tightest(),
        }
    }
}

pub fn bounds(c: &Common, a: &ContextArgs, r_grid: Option<&RGrid>) -> Result<bool> {
    let ctx = a.context()?;
    let set = BoundSet::evaluate(&ctx)?;
    let b = c.log_base;
    let nats_per_unit = b.base().ln();
    let tails = match r_grid {
        Some(g) => g
            .points()
            .into_iter()
            .map(|r| Ok(TailRow::new(r, &set.tails_at(r * nats_per_unit)?)))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let out = BoundsOutput {
        n: a.n,
        k: a.k,
        q: a.q,
        kappa_hat: a.kappa_hat,
        ell: a.ell.map(|l| b.scale(l)),
        diagonal: a.diagonal,
        log_base: b.base(),
        wedge: set.wedge,
        bounds: VarianceBounds::new(&set, b),
        se: set
            .se
            .as_ref()
            .map(|se| EstimateBounds::new(se, set.cv.as_ref(), b)),
        tails,
    };
    let summary = format!(
        "Var(Y) <= {:.6} (exponential), {:.6} (support, quadratic), {:.6} (support, linear){}; support width <= {:.6}",
        out.bounds.var_exponential,
        out.bounds.var_support_quadratic,
        out.bounds.var_support_linear,
        out.bounds
            .var_diagonal
            .map(|d| format!(", {d:.6} (diagonal)"))
            .unwrap_or_default(),
        out.bounds.support_width
    );
    let sink = c.sink();
    match (sink.format, r_grid.is_some()) {
        (Format::Csv, true) => {
            sink.write_raw(&to_csv(&serde_json::to_value(&out.tails)?)?, &summary)?
        }
        _ => sink.emit(&out, &summary)?,
    }
    Ok(true)
}

fn is_se(metric: PlanMetric) -> bool {
    matches!(metric, PlanMetric::SeLogminor | PlanMetric::SeEntropy)
}

#[derive(Serialize)]
struct PlanOutput {
    n: usize,
    k: usize,
    kappa_hat: f64,
    ell: Option<f64>,
    diagonal: bool,
    log_base: f64,
    metric: PlanMetric,
    bound: BoundChoice,
    target: f64,
    q: u64,
    achieved: f64,
    previous: Option<f64>,
}

pub fn plan(
    c: &Common,
    a: &ContextArgs,
    metric: PlanMetric,
    bound: BoundChoice,
    target: f64,
) -> Result<bool> {
    let ctx = a.context()?;
    let b = c.log_base;
    let (to_nats, from_nats): (f64, Box<dyn Fn(f64) -> f64>) = if is_se(metric) {
        (b.base().ln(), Box::new(move |x| b.scale(x)))
    } else {
        (1.0, Box::new(|x| x))
    };
    let PlannedSampleSize {
        q,
        achieved,
        previous,
    } = logminor::plan_sample_size(&ctx, target * to_nats, metric, bound)?;
    debug_assert!(metric_bound(&ctx.with_q(q), metric, bound)? <= target * to_nats);
    let out = PlanOutput {
        n: a.n,
        k: a.k,
        kappa_hat: a.kappa_hat,
        ell: a.ell,
        diagonal: a.diagonal,
        log_base: b.base(),
        metric,
        bound,
        target,
        q,
        achieved: from_nats(achieved),
        previous: previous.map(&from_nats),
    };
    let summary = format!("q = {q} (bound {:.6} <= target {target})", out.achieved);
    c.sink().emit(&out, &summary)?;
    Ok(true)
}

pub fn conjecture(
    c: &Common,
    n: usize,
    k: usize,
    kappa: f64,
    trials: usize,
    model: SearchModel,
) -> Result<bool> {
    let r = conjecture_search(n, k, kappa, trials, c.seed, model)?;
    let summary = format!(
        "best variance {:.9} over {} trials vs two-level diagonal maximum {:.9} (split {}): {}",
        r.best_variance,
        r.trials,
        r.diagonal_max,
        r.diagonal_best_split,
        if r.counterexample {
            "COUNTEREXAMPLE"
        } else {
            "no counterexample"
        }
    );
    c.sink().emit(&r, &summary)?;
    if r.counterexample {
        if let Some(path) = c.out {
            let witness = path.with_extension("witness.txt");
            write_file(&witness, &matrix_text(&r.witness))?;
            println!("wrote witness {}", witness.display());
        }
    }
    Ok(!r.counterexample)
}

pub fn verify(c: &Common, bins: usize, figure_dir: Option<&PathBuf>) -> Result<bool> {
    let rep = reproduce_reference(c.seed, bins)?;
    let report = &rep.report;
    let mut summary = String::new();
    summary.push_str(&format!(
        "{:>3} {:<3} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10}  {}\n",
        "k",
        "ex",
        "mean",
        "variance",
        "expon.",
        "supp.lin",
        "supp.quad",
        "diagonal",
        "reference draw"
    ));
    for row in &report.rows {
        let reference = REFERENCE_RANDOM_ROWS
            .iter()
            .find(|(k, ex, _, _)| *k == row.k && *ex == row.example)
            .map(|(_, _, m, v)| format!("({m:.3}, {v:.3})"))
            .unwrap_or_default();
        summary.push_str(&format!(
            "{:>3} {:<3} {:>9.3} {:>9.3} {:>10.3} {:>10.3} {:>10.3} {:>10}  {}\n",
            row.k,
            row.example,
            row.mean,
            row.variance,
            row.bound_exponential,
            row.bound_support_linear,
            row.bound_support_quadratic,
            row.bound_diagonal
                .map(|d| format!("{d:.3}"))
                .unwrap_or_else(|| "-".into()),
            reference
        ));
    }
    let hard = report.checks.iter().filter(|x| x.hard).count();
    let hard_failed: Vec<_> = report.hard_failures().collect();
    summary.push_str(&format!(
        "hard checks: {} of {hard} passed\n",
        hard - hard_failed.len()
    ));
    for f in &hard_failed {
        summary.push_str(&format!(
            "  FAIL {}: expected {} got {} (tol {:e})\n",
            f.name, f.expected, f.actual, f.tolerance
        ));
    }
    for s in report.checks.iter().filter(|x| !x.hard) {
        summary.push_str(&format!(
            "  observation {}: {}\n",
            s.name,
            if s.passed { "holds" } else { "does not hold" }
        ));
    }
    if let Some(dir) = figure_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, body) in [
            ("densities.csv", &rep.densities_csv),
            ("tails.csv", &rep.tails_csv),
            ("sampling_bounds.csv", &rep.sampling_bounds_csv),
        ] {
            write_file(&dir.join(name), body)?;
        }
        summary.push_str(&format!("figure data in {}\n", dir.display()));
    }
    summary.push_str(if report.passed {
        "verify: PASS"
    } else {
        "verify: FAIL"
    });
    c.sink().emit(report, &summary)?;
    Ok(report.passed)
}

pub fn figure_data(c: &Common, kappa_hat: f64, ell: f64, q_per_k: u64) -> Result<bool> {
    let rows = sampling_bound_rows(kappa_hat, ell, q_per_k)?;
    let summary = format!(
        "{} rows of standard-error and CV bounds (kappa_hat={kappa_hat}, ell={ell}, q={q_per_k}k)",
        rows.len()
    );
    let sink = Sink {
        out: c.out,
        format: c.format.unwrap_or(Format::Csv),
    };
    sink.emit(&rows, &summary)?;
    Ok(true)
}

#[derive(Serialize)]
struct PipelineOutput {
    metric: PlanMetric,
    bound: BoundChoice,
    target: f64,
    plan_q: u64,
    plan_achieved: f64,
    #[serde(flatten)]
    estimate: EstimateOutput,
}

pub struct PipelineArgs<'a> {
    pub matrix: &'a Path,
    pub k: usize,
    pub target: f64,
    pub metric: PlanMetric,
    pub bound: BoundChoice,
    pub kappa_hat: Option<f64>,
}

pub fn pipeline(c: &Common, a: PipelineArgs) -> Result<bool> {
    let m: SpdMatrix64 = load_matrix(a.matrix)?;
    let b = c.log_base;
    let to_nats = if is_se(a.metric) { b.base().ln() } else { 1.0 };
    let kh = KappaHat::resolve(a.kappa_hat, &m)?;
    let r = run_pipeline(
        &m,
        a.k,
        a.target * to_nats,
        a.metric,
        a.bound,
        Some(kh.value),
        c.seed,
    )
    .context("pipeline failed")?;
    let mut estimate = EstimateOutput::new(&r.estimate, b);
    estimate.kappa_hat_source = kh.source;
    let out = PipelineOutput {
        metric: a.metric,
        bound: a.bound,
        target: a.target,
        plan_q: r.plan.q,
        plan_achieved: if is_se(a.metric) {
            b.scale(r.plan.achieved)
        } else {
            r.plan.achieved
        },
        estimate,
    };
    let summary = format!("planned q = {}\n{}", out.plan_q, out.estimate.summary());
    c.sink().emit(&out, &summary)?;
    Ok(true)
}

pub fn generator_spec(
    kind: GeneratorKind,
    n: usize,
    kappa: f64,
    ell: Option<usize>,
    dof: Option<usize>,
    spectrum: Option<Vec<f64>>,
    seed: u64,
) -> Result<GeneratorSpec<f64>> {
    if kind == GeneratorKind::Custom && spectrum.is_none() {
        bail!("--kind custom needs --spectrum");
    }
    Ok(GeneratorSpec {
        ell_split: ell,
        degrees_of_freedom: dof,
        spectrum,
        ..GeneratorSpec::new(kind, n, kappa, seed)
    })
}
