//! The canonical experiments. Each is a pure function of its parameters:
//! replicate `s` draws from `RngStream::new(master_seed, s)` and rows are
//! emitted in canonical order, so the thread count never changes the output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{
    DiscreteParams, Experiment, ExperimentConfig, ExperimentParams, FunctionalParams, LyuParams, NeuralParams,
    OscillatingParams, RademacherParams, SweepParams,
};
use super::rows::{emit_csv, median, quantile, select, sort_canonical, Method, Metric, ResultRow};
use super::svg::{emit_svg, PlotSpec};
use crate::asymptotics::{empirical_covariance, AsymptoticReport};
use crate::discrete::{
    at_constant_search, tensorization_check, pseudolikelihood_fit, ratio_matching_fit, ratio_matching_odds_weighted,
    ratio_matching_weighted, two_point_mixture, DiscreteFit, HypercubeModel, IsingFamily,
};
use crate::error::{Error, Result};
use crate::estimators::{mle_fit_default_init, score_matching_fit};
use crate::expfam::{catalog, CatalogFamily, ExpFamilyModel, Normal};
use crate::functional::{lyu_equivalence_check, rademacher_gaussian_bound, FunctionalConstants};
use crate::neuralscore::mixture_run;
use crate::numerics::{sym_eig, Grid1D, RngStream};

/// Mass fractions of the reported error ellipses.
pub const ELLIPSE_LEVELS: [f64; 2] = [0.5, 0.9];

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub rows: Vec<ResultRow>,
    pub plots: Vec<PlotSpec>,
    /// One line per error-tagged row.
    pub failures: Vec<String>,
}

impl RunOutput {
    fn new(experiment: Experiment) -> Self {
        Self { experiment, rows: Vec::new(), plots: Vec::new(), failures: Vec::new() }
    }

    fn push(&mut self, seed: Option<u64>, param: f64, method: Method, metric: Metric, value: f64) {
        self.rows.push(ResultRow::new(self.experiment, seed, param, method, metric, value));
    }

    fn fail(&mut self, seed: Option<u64>, param: f64, method: Method, err: &Error) {
        self.push(seed, param, method, Metric::FitFailed, 1.0);
        let seed = seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        self.failures.push(format!("{} param={param:?} seed={seed} method={method}: {err}", self.experiment));
    }

    fn finish(mut self) -> Self {
        sort_canonical(&mut self.rows);
        self.failures.sort();
        self
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run_params(&cfg.params)
}

pub fn run_params(params: &ExperimentParams) -> Result<RunOutput> {
    params.validate()?;
    match params {
        ExperimentParams::BimodalCut(p) => run_bimodal_cut(p),
        ExperimentParams::BimodalNocut(p) => run_bimodal_nocut(p),
        ExperimentParams::Oscillating(p) => run_oscillating(p),
        ExperimentParams::NeuralBimodal(p) => run_neural_bimodal(p),
        ExperimentParams::FunctionalSweep(p) => run_functional_sweep(p),
        ExperimentParams::DiscreteSuite(p) => run_discrete_suite(p),
        ExperimentParams::RademacherGaussian(p) => run_rademacher_gaussian(p),
        ExperimentParams::AppendixLyu(p) => run_appendix_lyu(p),
    }
}

/// Writes `<experiment>.csv`, one SVG per plot and, if any replicate failed,
/// `<experiment>_failures.txt`. Returns the written paths.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let csv = dir.join(format!("{}.csv", out.experiment));
    emit_csv(&out.rows, &csv)?;
    written.push(csv);
    for plot in &out.plots {
        let path = dir.join(format!("{}.svg", plot.name));
        emit_svg(plot, &path)?;
        written.push(path);
    }
    if !out.failures.is_empty() {
        let path = dir.join(format!("{}_failures.txt", out.experiment));
        let mut text = String::new();
        for f in &out.failures {
            let _ = writeln!(text, "{f}");
        }
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn euclid_error(theta_hat: &[f64], theta: &[f64]) -> f64 {
    theta_hat.iter().zip(theta).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// log₁₀ errors of the replicates at one parameter point, failures as `+∞`.
pub fn log10_errors_with_failures(rows: &[ResultRow], param: f64, method: Method) -> Vec<f64> {
    let mut v = select(rows, param, method, Metric::Log10ParamError);
    let failed = select(rows, param, method, Metric::FitFailed).len();
    v.extend(std::iter::repeat_n(f64::INFINITY, failed));
    v
}

struct Replicate {
    param_index: usize,
    seed: u64,
    fits: Vec<(Method, Result<Vec<f64>>)>,
}

/// Draws `n` samples per `(param, seed)` and fits SM and MLE.
fn mc_fits(models: &[ExpFamilyModel], n: usize, seeds: usize, master_seed: u64) -> Vec<Replicate> {
    let jobs: Vec<(usize, u64)> = (0..models.len()).flat_map(|i| (0..seeds as u64).map(move |s| (i, s))).collect();
    jobs.into_par_iter()
        .map(|(i, seed)| {
            let model = &models[i];
            let x = model.sample(&mut RngStream::new(master_seed, seed), n);
            let sm = score_matching_fit(model.stat(), &x).map(|r| r.theta_hat);
            let mle = mle_fit_default_init(model, &x).map(|r| r.theta_hat);
            Replicate { param_index: i, seed, fits: vec![(Method::Sm, sm), (Method::Mle, mle)] }
        })
        .collect()
}

/// Per-replicate error rows, median and 90% quantile rows, and the raw
/// estimates grouped by `(param index, method)`.
fn record_fits(out: &mut RunOutput, params: &[f64], models: &[ExpFamilyModel], reps: Vec<Replicate>) -> Vec<Vec<(Method, Vec<Vec<f64>>)>> {
    let mut estimates: Vec<Vec<(Method, Vec<Vec<f64>>)>> =
        params.iter().map(|_| vec![(Method::Sm, Vec::new()), (Method::Mle, Vec::new())]).collect();
    for rep in reps {
        let a = params[rep.param_index];
        for (method, fit) in rep.fits {
            match fit {
                Ok(theta_hat) => {
                    let err = euclid_error(&theta_hat, models[rep.param_index].theta());
                    out.push(Some(rep.seed), a, method, Metric::Log10ParamError, err.log10());
                    let slot = estimates[rep.param_index].iter_mut().find(|(m, _)| *m == method).expect("method slot");
                    slot.1.push(theta_hat);
                }
                Err(e) => out.fail(Some(rep.seed), a, method, &e),
            }
        }
    }
    for &a in params {
        for method in [Method::Sm, Method::Mle] {
            let v = log10_errors_with_failures(&out.rows, a, method);
            if let (Some(med), Some(q90)) = (median(&v), quantile(&v, 0.9)) {
                out.push(None, a, method, Metric::Log10ErrorMedian, med);
                out.push(None, a, method, Metric::Log10ErrorQ90, q90);
            }
        }
    }
    estimates
}

fn median_series(rows: &[ResultRow], params: &[f64], method: Method) -> Vec<(f64, f64)> {
    params
        .iter()
        .map(|&a| (a, select(rows, a, method, Metric::Log10ErrorMedian).first().copied().unwrap_or(f64::NAN)))
        .collect()
}

/// Ellipse and alignment rows for a two-dimensional estimate cloud.
fn error_geometry(out: &mut RunOutput, a: f64, method: Method, estimates: &[Vec<f64>]) -> Result<()> {
    if estimates.len() < 3 || estimates[0].len() != 2 {
        return Ok(());
    }
    let cov = empirical_covariance(estimates);
    let eig = sym_eig(&cov)?;
    let major = &eig.vectors[1];
    let mut angle = major[1].atan2(major[0]).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if angle >= 180.0 {
        angle -= 180.0;
    }
    let cut_dir = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
    let cos = (major[0] * cut_dir[0] + major[1] * cut_dir[1]).abs().min(1.0);
    out.push(None, a, method, Metric::EllipseAngleDeg, angle);
    out.push(None, a, method, Metric::ErrorAlignmentDeg, cos.acos().to_degrees());
    for (level, (maj, min)) in ELLIPSE_LEVELS.iter().zip([
        (Metric::Ellipse50Major, Metric::Ellipse50Minor),
        (Metric::Ellipse90Major, Metric::Ellipse90Minor),
    ]) {
        // Gaussian level set holding `level` of the mass: Mahalanobis radius² = −2 ln(1 − level).
        let r2 = -2.0 * (1.0 - level).ln();
        out.push(None, a, method, maj, (eig.values[1].max(0.0) * r2).sqrt());
        out.push(None, a, method, min, (eig.values[0].max(0.0) * r2).sqrt());
    }
    Ok(())
}

fn run_bimodal(exp: Experiment, p: &SweepParams, family: fn(f64) -> CatalogFamily) -> Result<RunOutput> {
    let mut out = RunOutput::new(exp);
    let mut params = Vec::new();
    let mut models = Vec::new();
    for &a in &p.offsets {
        match family(a).model() {
            Ok(m) => {
                params.push(a);
                models.push(m);
            }
            Err(e) => out.fail(None, a, Method::Exact, &e),
        }
    }
    for (&a, model) in params.iter().zip(&models) {
        match AsymptoticReport::compute(model) {
            Ok(r) => {
                out.push(None, a, Method::Exact, Metric::WorstRatio, r.worst_ratio);
                out.push(None, a, Method::Exact, Metric::CpRestricted, r.c_p_restricted);
            }
            Err(e) => out.fail(None, a, Method::Exact, &e),
        }
    }
    let reps = mc_fits(&models, p.n, p.seeds, p.master_seed);
    let estimates = record_fits(&mut out, &params, &models, reps);
    for (&a, per_method) in params.iter().zip(&estimates) {
        for (method, est) in per_method {
            if let Err(e) = error_geometry(&mut out, a, *method, est) {
                out.fail(None, a, *method, &e);
            }
        }
    }
    let errors = PlotSpec::new(
        &format!("{exp}_errors"),
        &format!("{exp}: median log10 parameter error, n = {}", p.n),
        "offset a",
        "log10 error",
    )
    .with_series("sm", median_series(&out.rows, &params, Method::Sm))
    .with_series("mle", median_series(&out.rows, &params, Method::Mle));
    let ratio: Vec<(f64, f64)> = params
        .iter()
        .filter_map(|&a| select(&out.rows, a, Method::Exact, Metric::WorstRatio).first().map(|r| (a, *r)))
        .collect();
    out.plots.push(errors);
    if !ratio.is_empty() {
        out.plots.push(
            PlotSpec::new(&format!("{exp}_worst_ratio"), &format!("{exp}: asymptotic worst-direction ratio"), "offset a", "ratio")
                .log_y()
                .with_series("sm/mle", ratio),
        );
    }
    Ok(out.finish())
}

/// Two statistics `(F₁, F₁ + erf)` at `θ = (1, 0)`.
pub fn run_bimodal_cut(p: &SweepParams) -> Result<RunOutput> {
    run_bimodal(Experiment::BimodalCut, p, catalog::bimodal_with_cut)
}

/// The single statistic `F₁`.
pub fn run_bimodal_nocut(p: &SweepParams) -> Result<RunOutput> {
    run_bimodal(Experiment::BimodalNocut, p, catalog::bimodal_single)
}

pub fn run_oscillating(p: &OscillatingParams) -> Result<RunOutput> {
    let mut out = RunOutput::new(Experiment::Oscillating);
    let mut params = Vec::new();
    let mut models = Vec::new();
    for &w in &p.omegas {
        let report = catalog::oscillating(w).model().and_then(|m| {
            let r = AsymptoticReport::compute(&m)?;
            Ok((m, r.gamma_sm.op_norm()?, r.gamma_mle.op_norm()?, r))
        });
        match report {
            Ok((m, sm, mle, r)) => {
                out.push(None, w, Method::Sm, Metric::GammaSmOp, sm);
                out.push(None, w, Method::Mle, Metric::GammaMleOp, mle);
                out.push(None, w, Method::Exact, Metric::ELap2, r.smoothness.e_lap2);
                out.push(None, w, Method::Exact, Metric::EJf4, r.smoothness.e_jf4);
                out.push(None, w, Method::Exact, Metric::WorstRatio, r.worst_ratio);
                params.push(w);
                models.push(m);
            }
            Err(e) => out.fail(None, w, Method::Exact, &e),
        }
    }
    if p.seeds > 0 {
        let reps = mc_fits(&models, p.n, p.seeds, p.master_seed);
        record_fits(&mut out, &params, &models, reps);
    }
    let norms = |metric: Metric, method: Method| -> Vec<(f64, f64)> {
        params.iter().map(|&w| (w, select(&out.rows, w, method, metric)[0])).collect()
    };
    if !params.is_empty() {
        let plot = PlotSpec::new("oscillating_gamma", "oscillating: asymptotic covariance norms", "omega", "operator norm")
            .log_x()
            .log_y()
            .with_series("sm", norms(Metric::GammaSmOp, Method::Sm))
            .with_series("mle", norms(Metric::GammaMleOp, Method::Mle));
        out.plots.push(plot);
    }
    Ok(out.finish())
}

pub fn run_neural_bimodal(p: &NeuralParams) -> Result<RunOutput> {
    let mut out = RunOutput::new(Experiment::NeuralBimodal);
    let cfg = p.train_config();
    let jobs: Vec<(f64, u64)> = p.offsets.iter().flat_map(|&a| (0..p.seeds as u64).map(move |s| (a, s))).collect();
    let results: Vec<_> = jobs.into_par_iter().map(|(a, s)| (a, s, mixture_run(a, &cfg, &cfg.stream(s)))).collect();
    for (a, s, r) in results {
        match r {
            Ok(m) => {
                out.push(Some(s), a, Method::Net, Metric::Tv, m.tv);
                out.push(Some(s), a, Method::Net, Metric::LogWeightRatio, m.log_weight_ratio);
                out.push(Some(s), a, Method::Net, Metric::ModeScoreError, m.mode_score_error);
                out.push(Some(s), a, Method::Net, Metric::TailLoss, m.tail_loss);
            }
            Err(e) => out.fail(Some(s), a, Method::Net, &e),
        }
    }
    let med = |metric: Metric, f: fn(f64) -> f64| -> Vec<(f64, f64)> {
        p.offsets
            .iter()
            .map(|&a| {
                let v: Vec<f64> = select(&out.rows, a, Method::Net, metric).into_iter().map(f).collect();
                (a, median(&v).unwrap_or(f64::NAN))
            })
            .collect()
    };
    let plot = PlotSpec::new("neural_bimodal", "neural score model: median over seeds", "offset a", "value")
        .with_series("TV", med(Metric::Tv, |v| v))
        .with_series("|log w-ratio|", med(Metric::LogWeightRatio, f64::abs));
    out.plots.push(plot);
    Ok(out.finish())
}

/// Param `0` is the standard normal; param `a > 0` the bimodal quartic density.
pub fn run_functional_sweep(p: &FunctionalParams) -> Result<RunOutput> {
    let mut out = RunOutput::new(Experiment::FunctionalSweep);
    let mut targets = vec![(0.0, catalog::gaussian_mean_1d(0.0))];
    targets.extend(p.offsets.iter().map(|&a| (a, catalog::bimodal_quartic(a))));
    let results: Vec<_> = targets
        .into_par_iter()
        .map(|(a, fam)| (a, fam.model().and_then(|m| FunctionalConstants::for_model(&m, p.grid_n))))
        .collect();
    for (a, r) in results {
        match r {
            Ok(c) => {
                out.push(None, a, Method::Exact, Metric::Cp, c.c_p);
                if let Some(r) = c.c_p_restricted {
                    out.push(None, a, Method::Exact, Metric::CpRestricted, r);
                }
                out.push(None, a, Method::Exact, Metric::CLsLower, c.c_ls_lower);
                out.push(None, a, Method::Exact, Metric::CLsUpper, c.c_ls_upper);
                out.push(None, a, Method::Exact, Metric::CIs, c.c_is);
                out.push(None, a, Method::Exact, Metric::ChainHolds, if c.chain_holds() { 1.0 } else { 0.0 });
            }
            Err(e) => out.fail(None, a, Method::Exact, &e),
        }
    }
    let series = |metric: Metric| -> Vec<(f64, f64)> {
        p.offsets
            .iter()
            .filter_map(|&a| select(&out.rows, a, Method::Exact, metric).first().map(|v| (a, *v)))
            .collect()
    };
    let (cp, cpr) = (series(Metric::Cp), series(Metric::CpRestricted));
    if !cp.is_empty() {
        out.plots.push(
            PlotSpec::new("functional_sweep", "Poincare constants of the bimodal quartic density", "offset a", "constant")
                .log_y()
                .with_series("C_P", cp)
                .with_series("C_P restricted", cpr),
        );
    }
    Ok(out.finish())
}

fn max_abs_param_error(fit: &DiscreteFit, truth: &IsingFamily) -> f64 {
    fit.family.params().iter().zip(truth.params()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Two-spin Ising fits (param = sample size), identity checks on random
/// `d = 3` tables (param = 3), searched tensorization constants (param = 0
/// for a product measure, param = ε for the two-point mixture on `{±1}⁴`).
pub fn run_discrete_suite(p: &DiscreteParams) -> Result<RunOutput> {
    let mut out = RunOutput::new(Experiment::DiscreteSuite);
    let truth = IsingFamily::new(2, vec![(0, 1)], vec![0.0, 0.0], vec![p.coupling])?;
    let model = truth.model()?;
    let jobs: Vec<(usize, u64)> = p.sizes.iter().flat_map(|&n| (0..p.seeds as u64).map(move |s| (n, s))).collect();
    let fits: Vec<_> = jobs
        .into_par_iter()
        .map(|(n, s)| {
            let samples = model.sample(&mut RngStream::new(p.master_seed, s).substream(n as u64), n);
            (n, s, pseudolikelihood_fit(&truth, &samples), ratio_matching_fit(&truth, &samples))
        })
        .collect();
    for (n, s, pl, rm) in fits {
        for (method, fit) in [(Method::Pl, pl), (Method::Rm, rm)] {
            match fit {
                Ok(f) => out.push(Some(s), n as f64, method, Metric::ParamError, max_abs_param_error(&f, &truth)),
                Err(e) => out.fail(Some(s), n as f64, method, &e),
            }
        }
    }

    let mut rm_worst = 0.0f64;
    let mut pl_worst = 0.0f64;
    let id_stream = RngStream::new(p.master_seed, 0).substream(3);
    for k in 0..p.identity_instances as u64 {
        let mut s = id_stream.substream(k);
        let (pm, qm) = (HypercubeModel::random(3, 1.0, &mut s)?, HypercubeModel::random(3, 1.0, &mut s)?);
        let w = pm.probs();
        let (direct, odds) = (ratio_matching_weighted(&qm, &w), ratio_matching_odds_weighted(&qm, &w));
        rm_worst = rm_worst.max((direct - odds).abs() / direct.abs().max(1.0));
        pl_worst = pl_worst.max(tensorization_check(&pm, &qm, 1.0)?.identity_error);
    }
    if p.identity_instances > 0 {
        out.push(None, 3.0, Method::Rm, Metric::RmIdentityError, rm_worst);
        out.push(None, 3.0, Method::Pl, Metric::PlIdentityError, pl_worst);
    }

    let root = RngStream::new(p.master_seed, 0);
    let mut targets = vec![(0.0, IsingFamily::new(3, vec![], vec![0.4, -0.2, 0.0], vec![])?.model())];
    targets.extend(p.mixture_eps.iter().map(|&e| (e, two_point_mixture(4, e))));
    let searches: Vec<_> = targets
        .into_par_iter()
        .map(|(param, q)| (param, q.and_then(|q| at_constant_search(&q, p.at_restarts, &root))))
        .collect();
    for (param, r) in searches {
        match r {
            Ok(r) => out.push(None, param, Method::Exact, Metric::CAtLower, r.c_at_lower),
            Err(e) => out.fail(None, param, Method::Exact, &e),
        }
    }

    let series = |method: Method| -> Vec<(f64, f64)> {
        p.sizes
            .iter()
            .map(|&n| (n as f64, median(&select(&out.rows, n as f64, method, Metric::ParamError)).unwrap_or(f64::NAN)))
            .collect()
    };
    out.plots.push(
        PlotSpec::new("discrete_suite", "two-spin Ising: median max-abs parameter error", "samples", "error")
            .log_x()
            .log_y()
            .with_series("pl", series(Method::Pl))
            .with_series("rm", series(Method::Rm)),
    );
    Ok(out.finish())
}

/// Param is the case index; case `k` uses stream `k`.
pub fn run_rademacher_gaussian(p: &RademacherParams) -> Result<RunOutput> {
    let mut out = RunOutput::new(Experiment::RademacherGaussian);
    for (k, c) in p.cases.iter().enumerate() {
        match rademacher_gaussian_bound(c.r, c.d, c.n, &RngStream::new(p.master_seed, k as u64)) {
            Ok(r) => {
                out.push(None, k as f64, Method::Sm, Metric::EmpiricalKl, r.empirical_kl);
                out.push(None, k as f64, Method::Exact, Metric::KlBound, r.bound);
                out.push(None, k as f64, Method::Exact, Metric::RateRn, r.r_n);
            }
            Err(e) => out.fail(None, k as f64, Method::Sm, &e),
        }
    }
    Ok(out.finish())
}

/// Param `0`: `N(μ,1)` against `N(0,1)`. Param `1`: bimodal quartic against `N(0,1)`.
pub fn run_appendix_lyu(p: &LyuParams) -> Result<RunOutput> {
    let mut out = RunOutput::new(Experiment::AppendixLyu);
    let std = Normal::standard();
    let span = |lo: f64, hi: f64| Grid1D::new(lo, hi, ((hi - lo) / p.spacing).round() as usize + 1);
    let mu = p.gaussian_shift;
    let gaussian = span(mu.min(0.0) - 12.0, mu.max(0.0) + 12.0)
        .and_then(|g| lyu_equivalence_check(&Normal::new(mu, 1.0), &std, &g));
    let a = p.bimodal_offset;
    let bimodal = catalog::bimodal_quartic(a)
        .model()
        .and_then(|m| lyu_equivalence_check(&m, &std, &span(-a - 8.0, a + 8.0)?));
    for (param, r) in [(0.0, gaussian), (1.0, bimodal)] {
        match r {
            Ok(c) => {
                out.push(None, param, Method::Exact, Metric::LhsDeriv, c.lhs_deriv);
                out.push(None, param, Method::Exact, Metric::RhsDeriv, c.rhs_deriv);
                let gap = (c.lhs_deriv - c.rhs_deriv).abs() / c.lhs_deriv.abs().max(f64::MIN_POSITIVE);
                out.push(None, param, Method::Exact, Metric::RelativeGap, gap);
            }
            Err(e) => out.fail(None, param, Method::Exact, &e),
        }
    }
    Ok(out.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expcli::rows::render_csv;
    use crate::expcli::svg::render_svg;

    fn small_sweep() -> SweepParams {
        SweepParams { offsets: vec![1.0, 7.0], n: 10_000, seeds: 3, master_seed: 42 }
    }

    #[test]
    fn bimodal_cut_isolates_failures_and_plots_two_series() {
        let out = run_bimodal_cut(&small_sweep()).unwrap();
        // Score matching is numerically singular at a = 7; the sweep still completes.
        assert_eq!(select(&out.rows, 7.0, Method::Sm, Metric::FitFailed).len(), 3);
        assert_eq!(out.failures.len(), 3);
        assert_eq!(select(&out.rows, 7.0, Method::Mle, Metric::Log10ParamError).len(), 3);
        assert_eq!(select(&out.rows, 7.0, Method::Sm, Metric::Log10ErrorMedian), vec![f64::INFINITY]);
        let plot = &out.plots[0];
        assert_eq!(plot.series.len(), 2);
        assert_eq!((plot.series[0].name.as_str(), plot.series[1].name.as_str()), ("sm", "mle"));
        assert!(plot.series.iter().all(|s| s.points.len() == 2));
        assert_eq!(select(&out.rows, 1.0, Method::Exact, Metric::WorstRatio).len(), 1);
        assert_eq!(select(&out.rows, 1.0, Method::Mle, Metric::Ellipse90Major).len(), 1);
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let p = SweepParams { offsets: vec![2.0], n: 10_000, seeds: 4, master_seed: 7 };
        let run_in = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let out = pool.install(|| run_bimodal_nocut(&p)).unwrap();
            (render_csv(&out.rows).unwrap(), render_svg(&out.plots[0]).unwrap())
        };
        assert_eq!(run_in(1), run_in(3));
    }

    #[test]
    fn rows_are_canonically_sorted() {
        let out = run_bimodal_nocut(&SweepParams { offsets: vec![3.0, 1.0], n: 10_000, seeds: 2, master_seed: 1 }).unwrap();
        let mut sorted = out.rows.clone();
        sort_canonical(&mut sorted);
        assert_eq!(sorted, out.rows);
        assert_eq!(out.rows[0].param, 1.0);
    }

    #[test]
    fn lyu_and_rademacher_rows() {
        let out = run_appendix_lyu(&LyuParams::default()).unwrap();
        for param in [0.0, 1.0] {
            assert!(select(&out.rows, param, Method::Exact, Metric::RelativeGap)[0] < 0.01);
        }
        let r = run_rademacher_gaussian(&RademacherParams::default()).unwrap();
        assert_eq!(r.rows.len(), 6);
    }

    #[test]
    fn written_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_rademacher_gaussian(&RademacherParams::default()).unwrap();
        let files = write_outputs(&out, dir.path()).unwrap();
        assert_eq!(files, vec![dir.path().join("rademacher_gaussian.csv")]);
    }
}
