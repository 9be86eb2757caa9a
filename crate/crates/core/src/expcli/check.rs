//! The acceptance suite: thirteen pass/fail criteria with pinned tolerances.
//! Each criterion passes only if its numerical clauses hold and it finishes
//! within its runtime budget.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{
    DiscreteParams, Experiment, ExperimentParams, FunctionalParams, LyuParams, NeuralParams, OscillatingParams,
    RademacherParams, SweepParams, DEFAULT_MASTER_SEED,
};
use super::experiments::{log10_errors_with_failures, run_params, write_outputs, RunOutput};
use super::rows::{median, render_csv, select, Method, Metric};
use super::svg::render_svg;
use crate::asymptotics::{empirical_covariance, poincare_bound_check, restricted_poincare, AsymptoticReport};
use crate::error::Result;
use crate::estimators::score_matching_fit;
use crate::expfam::catalog;
use crate::numerics::{RngStream, SymMatrix};

pub const CONSISTENCY_TOL: f64 = 1e-6;
pub const NORMALITY_REPLICATES: usize = 400;
pub const NORMALITY_N: usize = 100_000;
pub const NORMALITY_FROBENIUS_TOL: f64 = 0.15;
pub const SCALING_SLOPE_MIN: f64 = 0.8;
pub const CUT_RATIO_LARGE_A: f64 = 30.0;
pub const CUT_RATIO_SMALL_A: f64 = 3.0;
pub const NOCUT_RATIO_MAX: f64 = 3.0;
pub const NOCUT_CP_MAX: f64 = 10.0;
pub const MLE_SPREAD_MAX: f64 = 2.0;
pub const SM_GROWTH_MIN: f64 = 100.0;
pub const LAP2_SLOPE: (f64, f64) = (3.7, 4.3);
pub const GAUSSIAN_CP_TOL: f64 = 0.01;
pub const LYU_REL_TOL: f64 = 0.01;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const PRODUCT_AT_RANGE: (f64, f64) = (0.99, 1.0 + 1e-6);
pub const ISING_RECOVERY_TOL: f64 = 0.08;
pub const NEURAL_TV_MAX: f64 = 0.1;
pub const NEURAL_SCORE_ERR_MAX: f64 = 0.5;
pub const NEURAL_MIN_SEEDS: usize = 7;

/// Runtime budgets in seconds, indexed by criterion number − 1.
pub const BUDGETS: [f64; 13] = [10.0, 300.0, 30.0, 60.0, 600.0, 600.0, 60.0, 60.0, 60.0, 30.0, 300.0, 900.0, 600.0];

pub const NAMES: [&str; 13] = [
    "consistency identity",
    "asymptotic normality",
    "Poincare efficiency bound",
    "cut-family ratio scaling",
    "cut sweep SM/MLE errors",
    "no-cut sweep SM/MLE errors",
    "oscillating family",
    "Gaussian finite-sample bound",
    "functional-constant chain",
    "smoothing-derivative equivalence",
    "discrete suite",
    "neural score model",
    "determinism",
];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.1} s, budget {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds,
            BUDGETS[self.id - 1]
        )
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub results: Vec<CriterionResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed_ids(&self) -> Vec<usize> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.id).collect()
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub master_seed: u64,
    /// Where experiment CSV and SVG files are written; nothing is written if `None`.
    pub out_dir: Option<PathBuf>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { master_seed: DEFAULT_MASTER_SEED, out_dir: None }
    }
}

type Outcome = Result<(bool, String)>;

struct Runner<'a> {
    opts: &'a CheckOptions,
    results: Vec<CriterionResult>,
    on_result: &'a mut dyn FnMut(&CriterionResult),
}

impl Runner<'_> {
    fn record(&mut self, id: usize, start: Instant, outcome: Outcome) {
        let seconds = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let in_budget = seconds <= BUDGETS[id - 1];
        let detail = if in_budget { detail } else { format!("{detail}; over runtime budget") };
        let r = CriterionResult { id, name: NAMES[id - 1], passed: ok && in_budget, detail, seconds };
        (self.on_result)(&r);
        self.results.push(r);
    }

    fn experiment(&self, params: ExperimentParams) -> Result<RunOutput> {
        let out = run_params(&params)?;
        if let Some(dir) = &self.opts.out_dir {
            write_outputs(&out, dir)?;
        }
        Ok(out)
    }
}

/// Runs all criteria in order, calling `on_result` as each one finishes.
pub fn run_check(opts: &CheckOptions, on_result: &mut dyn FnMut(&CriterionResult)) -> CheckReport {
    let seed = opts.master_seed;
    let mut r = Runner { opts, results: Vec::new(), on_result };

    let t = Instant::now();
    r.record(1, t, consistency());
    let t = Instant::now();
    r.record(2, t, normality(seed));
    let t = Instant::now();
    r.record(3, t, poincare_bound());
    let t = Instant::now();
    r.record(4, t, cut_scaling());
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::BimodalCut(SweepParams { master_seed: seed, ..Default::default() }));
    r.record(5, t, out.and_then(|o| cut_sweep(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::BimodalNocut(SweepParams { master_seed: seed, ..Default::default() }));
    r.record(6, t, out.and_then(|o| nocut(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::Oscillating(OscillatingParams { master_seed: seed, ..Default::default() }));
    r.record(7, t, out.and_then(|o| oscillating(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::RademacherGaussian(RademacherParams { master_seed: seed, ..Default::default() }));
    r.record(8, t, out.and_then(|o| rademacher(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::FunctionalSweep(FunctionalParams::default()));
    r.record(9, t, out.and_then(|o| functional(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::AppendixLyu(LyuParams::default()));
    r.record(10, t, out.and_then(|o| lyu(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::DiscreteSuite(DiscreteParams { master_seed: seed, ..Default::default() }));
    r.record(11, t, out.and_then(|o| discrete(&o)));
    let t = Instant::now();
    let out = r.experiment(ExperimentParams::NeuralBimodal(NeuralParams { master_seed: seed, ..Default::default() }));
    r.record(12, t, out.and_then(|o| neural(&o)));
    let t = Instant::now();
    r.record(13, t, determinism(seed));
    CheckReport { results: r.results }
}

fn consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut label = String::new();
    for fam in catalog::standard_instances() {
        let model = fam.model()?;
        let mo = model.moments();
        let r: f64 = mo
            .a_matrix
            .matvec(model.theta())
            .iter()
            .zip(&mo.mean_lap)
            .map(|(a, b)| (a + b).powi(2))
            .sum::<f64>()
            .sqrt();
        if r >= worst {
            worst = r;
            label = fam.label.clone();
        }
    }
    Ok((worst < CONSISTENCY_TOL, format!("max |A theta + E lap F| = {worst:.2e} ({label})")))
}

fn normality(seed: u64) -> Outcome {
    let model = catalog::bimodal_quartic(1.0).model()?;
    let gamma = AsymptoticReport::compute(&model)?.gamma_sm;
    let theta = model.theta().to_vec();
    let scaled: Vec<Vec<f64>> = (0..NORMALITY_REPLICATES as u64)
        .into_par_iter()
        .map(|r| {
            let x = model.sample(&mut RngStream::new(seed, r).substream(2), NORMALITY_N);
            let fit = score_matching_fit(model.stat(), &x)?;
            Ok(fit.theta_hat.iter().zip(&theta).map(|(a, b)| (NORMALITY_N as f64).sqrt() * (a - b)).collect())
        })
        .collect::<Result<_>>()?;
    let cov = empirical_covariance(&scaled);
    let m = gamma.dim();
    let diff = SymMatrix::from_fn(m, |i, j| cov.get(i, j) - gamma.get(i, j));
    let rel = diff.frobenius() / gamma.frobenius();
    Ok((
        rel <= NORMALITY_FROBENIUS_TOL,
        format!("relative Frobenius gap {rel:.4} over {NORMALITY_REPLICATES} replicates (tol {NORMALITY_FROBENIUS_TOL})"),
    ))
}

fn poincare_bound() -> Outcome {
    let mut violations = Vec::new();
    let mut count = 0;
    for fam in catalog::standard_instances() {
        let model = fam.model()?;
        let c_p = restricted_poincare(&model.moments())?;
        let b = poincare_bound_check(&model, c_p)?;
        count += 1;
        if !b.holds {
            violations.push(format!("{} ({:.3e} > {:.3e})", fam.label, b.lhs, b.rhs));
        }
    }
    Ok((violations.is_empty(), format!("{} violations over {count} families {violations:?}", violations.len())))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn cut_scaling() -> Outcome {
    let ratios: Vec<f64> = (1..=7)
        .map(|a| Ok(AsymptoticReport::compute(&catalog::bimodal_with_cut(a as f64).model()?)?.worst_ratio))
        .collect::<Result<_>>()?;
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let pts: Vec<(f64, f64)> = (3..=7).map(|a| ((a * a) as f64 / 8.0, ratios[a - 1].ln())).collect();
    let slope = least_squares_slope(&pts);
    Ok((
        increasing && slope >= SCALING_SLOPE_MIN,
        format!("strictly increasing: {increasing}; slope of ln ratio vs a^2/8 over a=3..7 = {slope:.3} (min {SCALING_SLOPE_MIN})"),
    ))
}

/// `10^(median log₁₀ SM error − median log₁₀ MLE error)`, failures counted as `+∞`.
fn median_ratio(out: &RunOutput, a: f64) -> (f64, usize) {
    let sm = log10_errors_with_failures(&out.rows, a, Method::Sm);
    let mle = log10_errors_with_failures(&out.rows, a, Method::Mle);
    let failed = select(&out.rows, a, Method::Sm, Metric::FitFailed).len();
    match (median(&sm), median(&mle)) {
        (Some(s), Some(m)) => (10f64.powf(s - m), failed),
        _ => (f64::NAN, failed),
    }
}

fn cut_sweep(out: &RunOutput) -> Outcome {
    let (r7, f7) = median_ratio(out, 7.0);
    let (r1, _) = median_ratio(out, 1.0);
    let (r6, _) = median_ratio(out, 6.0);
    let mle_failed = select(&out.rows, 7.0, Method::Mle, Metric::FitFailed).len();
    Ok((
        r7 >= CUT_RATIO_LARGE_A && r1 <= CUT_RATIO_SMALL_A && mle_failed == 0,
        format!(
            "median SM/MLE error ratio a=1: {r1:.3} (max {CUT_RATIO_SMALL_A}); a=6: {r6:.3e}; a=7: {r7:.3e} (min {CUT_RATIO_LARGE_A}; {f7} SM fits singular, counted as unbounded)"
        ),
    ))
}

fn nocut(out: &RunOutput) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cp_max: f64 = 0.0;
    let mut ok = true;
    for a in 1..=7 {
        let a = a as f64;
        let (r, _) = median_ratio(out, a);
        ok &= r <= NOCUT_RATIO_MAX;
        worst = worst.max(r);
        let cp = select(&out.rows, a, Method::Exact, Metric::CpRestricted);
        ok &= cp.len() == 1 && cp[0] <= NOCUT_CP_MAX;
        cp_max = cp_max.max(cp.first().copied().unwrap_or(f64::INFINITY));
    }
    Ok((
        ok,
        format!("max median SM/MLE ratio {worst:.3} (max {NOCUT_RATIO_MAX}); max restricted C_P {cp_max:.3} (max {NOCUT_CP_MAX})"),
    ))
}

fn oscillating(out: &RunOutput) -> Outcome {
    let one = |w: f64, method: Method, metric: Metric| select(&out.rows, w, method, metric).first().copied().unwrap_or(f64::NAN);
    let omegas = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let mle: Vec<f64> = omegas.iter().map(|&w| one(w, Method::Mle, Metric::GammaMleOp)).collect();
    let spread = mle.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / mle.iter().cloned().fold(f64::INFINITY, f64::min);
    let growth = one(32.0, Method::Sm, Metric::GammaSmOp) / one(2.0, Method::Sm, Metric::GammaSmOp);
    let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&w: &f64| (w.ln(), one(w, Method::Exact, Metric::ELap2).ln())).collect();
    let slope = least_squares_slope(&pts);
    let ok = spread < MLE_SPREAD_MAX && growth >= SM_GROWTH_MIN && (LAP2_SLOPE.0..=LAP2_SLOPE.1).contains(&slope);
    Ok((
        ok,
        format!(
            "|G_MLE| max/min {spread:.3} (max {MLE_SPREAD_MAX}); |G_SM|(32)/|G_SM|(2) = {growth:.2} (min {SM_GROWTH_MIN}); E|lap F|^2 slope {slope:.3}"
        ),
    ))
}

fn rademacher(out: &RunOutput) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [0.0, 1.0] {
        let emp = select(&out.rows, k, Method::Sm, Metric::EmpiricalKl);
        let bound = select(&out.rows, k, Method::Exact, Metric::KlBound);
        let (e, b) = (emp.first().copied().unwrap_or(f64::NAN), bound.first().copied().unwrap_or(f64::NAN));
        ok &= e <= b;
        parts.push(format!("case {k}: E KL {e:.4e} <= bound {b:.4e}"));
    }
    Ok((ok, parts.join("; ")))
}

fn functional(out: &RunOutput) -> Outcome {
    let one = |a: f64, m: Metric| select(&out.rows, a, Method::Exact, m).first().copied().unwrap_or(f64::NAN);
    let cp = one(0.0, Metric::Cp);
    let (lo, hi) = (one(0.0, Metric::CLsLower), one(0.0, Metric::CLsUpper));
    let chain: Vec<f64> = out.rows.iter().filter(|r| r.metric == Metric::ChainHolds).map(|r| r.value).collect();
    let failed = out.rows.iter().filter(|r| r.metric == Metric::FitFailed).count();
    let chain_ok = !chain.is_empty() && chain.iter().all(|v| *v == 1.0) && failed == 0;
    let ok = (cp - 1.0).abs() <= GAUSSIAN_CP_TOL && lo <= 0.5 && 0.5 <= hi && chain_ok;
    Ok((
        ok,
        format!(
            "N(0,1): C_P = {cp:.6}, C_LS in [{lo:.4}, {hi:.4}]; chain holds on {}/{} densities",
            chain.iter().filter(|v| **v == 1.0).count(),
            chain.len() + failed
        ),
    ))
}

fn lyu(out: &RunOutput) -> Outcome {
    let gaps: Vec<f64> = [0.0, 1.0]
        .iter()
        .map(|&k| select(&out.rows, k, Method::Exact, Metric::RelativeGap).first().copied().unwrap_or(f64::NAN))
        .collect();
    Ok((gaps.iter().all(|g| *g < LYU_REL_TOL), format!("relative gaps Gaussian {:.2e}, bimodal {:.2e}", gaps[0], gaps[1])))
}

fn discrete(out: &RunOutput) -> Outcome {
    let one = |p: f64, method: Method, m: Metric| select(&out.rows, p, method, m).first().copied().unwrap_or(f64::NAN);
    let rm_id = one(3.0, Method::Rm, Metric::RmIdentityError);
    let pl_id = one(3.0, Method::Pl, Metric::PlIdentityError);
    let at = one(0.0, Method::Exact, Metric::CAtLower);
    let mut worst: f64 = 0.0;
    let mut recovered = true;
    for method in [Method::Pl, Method::Rm] {
        let errs = select(&out.rows, 100_000.0, method, Metric::ParamError);
        recovered &= !errs.is_empty() && select(&out.rows, 100_000.0, method, Metric::FitFailed).is_empty();
        worst = errs.iter().cloned().fold(worst, f64::max);
    }
    let ok = rm_id <= IDENTITY_TOL
        && pl_id <= IDENTITY_TOL
        && (PRODUCT_AT_RANGE.0..=PRODUCT_AT_RANGE.1).contains(&at)
        && recovered
        && worst <= ISING_RECOVERY_TOL;
    Ok((
        ok,
        format!(
            "RM identity {rm_id:.1e}, PL identity {pl_id:.1e}, product C_AT {at:.8}, max |(h,J) error| at n=1e5 {worst:.4} (tol {ISING_RECOVERY_TOL})"
        ),
    ))
}

fn neural(out: &RunOutput) -> Outcome {
    let tv2 = select(&out.rows, 2.0, Method::Net, Metric::Tv);
    let tv_ok = tv2.iter().filter(|v| **v <= NEURAL_TV_MAX).count();
    let lw6 = select(&out.rows, 6.0, Method::Net, Metric::LogWeightRatio);
    let lw_ok = lw6.iter().filter(|v| v.abs() >= std::f64::consts::LN_2).count();
    let se6 = select(&out.rows, 6.0, Method::Net, Metric::ModeScoreError);
    let se_max = se6.iter().cloned().fold(0.0, f64::max);
    let ok = tv_ok >= NEURAL_MIN_SEEDS
        && lw_ok >= NEURAL_MIN_SEEDS
        && !se6.is_empty()
        && se6.len() == lw6.len()
        && se_max < NEURAL_SCORE_ERR_MAX;
    Ok((
        ok,
        format!(
            "a=2: TV <= {NEURAL_TV_MAX} in {tv_ok}/{}; a=6: |log w-ratio| >= ln 2 in {lw_ok}/{} (need {NEURAL_MIN_SEEDS}), max mode score error {se_max:.3}",
            tv2.len(),
            lw6.len()
        ),
    ))
}

/// Reduced versions of every experiment, used by the determinism criterion.
pub fn determinism_configs(seed: u64) -> Vec<ExperimentParams> {
    vec![
        ExperimentParams::BimodalCut(SweepParams { offsets: vec![1.0, 6.0, 7.0], n: 10_000, seeds: 3, master_seed: seed }),
        ExperimentParams::BimodalNocut(SweepParams { offsets: vec![2.0, 5.0], n: 10_000, seeds: 3, master_seed: seed }),
        ExperimentParams::Oscillating(OscillatingParams { omegas: vec![2.0, 8.0], n: 10_000, seeds: 2, master_seed: seed }),
        ExperimentParams::NeuralBimodal(NeuralParams { offsets: vec![2.0], seeds: 2, steps: 300, width: 32, master_seed: seed, ..Default::default() }),
        ExperimentParams::FunctionalSweep(FunctionalParams { offsets: vec![2.0], grid_n: 1025 }),
        ExperimentParams::DiscreteSuite(DiscreteParams {
            sizes: vec![1000],
            seeds: 3,
            identity_instances: 5,
            at_restarts: 2,
            mixture_eps: vec![0.1],
            master_seed: seed,
            ..Default::default()
        }),
        ExperimentParams::RademacherGaussian(RademacherParams { master_seed: seed, ..Default::default() }),
        ExperimentParams::AppendixLyu(LyuParams::default()),
    ]
}

/// Concatenated CSV and SVG bytes of the given runs.
pub fn artifact_bytes(configs: &[ExperimentParams]) -> Result<Vec<(Experiment, String)>> {
    configs
        .iter()
        .map(|p| {
            let out = run_params(p)?;
            let mut text = render_csv(&out.rows)?;
            for plot in &out.plots {
                text.push_str(&render_svg(plot)?);
            }
            Ok((out.experiment, text))
        })
        .collect()
}

/// Runs the reduced configs twice, in a one-thread and a three-thread pool,
/// and compares the bytes.
fn determinism(seed: u64) -> Outcome {
    let configs = determinism_configs(seed);
    let in_pool = |threads: usize| -> Result<Vec<(Experiment, String)>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::invalid(e.to_string()))?;
        pool.install(|| artifact_bytes(&configs))
    };
    let (a, b) = (in_pool(1)?, in_pool(3)?);
    let differing: Vec<String> = a.iter().zip(&b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.to_string()).collect();
    let bytes: usize = a.iter().map(|x| x.1.len()).sum();
    Ok((
        differing.is_empty() && a.len() == b.len(),
        format!("{} experiments, {bytes} bytes of CSV+SVG; differing: {differing:?}", a.len()),
    ))
}

/// Output directory of `smlab check` when none is given.
pub fn default_check_dir() -> &'static Path {
    Path::new("smlab-check")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        assert!((least_squares_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tables_line_up() {
        assert_eq!(NAMES.len(), BUDGETS.len());
        let r = CriterionResult { id: 13, name: NAMES[12], passed: true, detail: "x".into(), seconds: 1.0 };
        assert!(r.line().starts_with("[PASS] 13 determinism: x"));
    }

    #[test]
    fn quick_criteria_pass() {
        for (id, o) in [(1, consistency()), (3, poincare_bound()), (4, cut_scaling())] {
            let (ok, detail) = o.unwrap();
            assert!(ok, "criterion {id}: {detail}");
        }
    }
}
