//! Enumeration checks for approximate tensorization of entropy: the
//! decomposition of the pseudolikelihood gap into conditional KLs, the
//! Pythagorean identity behind ratio matching, and a searched lower bound on
//! the tensorization constant.

use serde::Serialize;

use super::estimators::{pseudolikelihood_weighted, ratio_matching_weighted};
use super::hypercube::{flip, HypercubeModel};
use crate::error::{Error, Result};
use crate::numerics::quadrature::compensated_sum;
use crate::numerics::RngStream;

pub const MAX_TABLE_DIM: usize = 8;

fn check_dims(p: &HypercubeModel, q: &HypercubeModel) -> Result<()> {
    p.check_same_dim(q)?;
    if p.dim() > MAX_TABLE_DIM {
        return Err(Error::invalid(format!("table checks need d <= {MAX_TABLE_DIM}")));
    }
    Ok(())
}

/// `Σᵢ 𝔼_p KL(p(Xᵢ | X_{∼i}), q(Xᵢ | X_{∼i}))`.
pub fn conditional_kl_sum(p: &HypercubeModel, q: &HypercubeModel) -> Result<f64> {
    p.check_same_dim(q)?;
    let mut terms = Vec::with_capacity(p.size() * p.dim());
    for x in 0..p.size() as u32 {
        let px = p.prob(x);
        if px == 0.0 {
            continue;
        }
        for i in 0..p.dim() {
            let lq = q.log_conditional(i, x);
            if lq == f64::NEG_INFINITY {
                return Err(Error::ZeroConditional);
            }
            terms.push(px * (p.log_conditional(i, x) - lq));
        }
    }
    Ok(compensated_sum(terms))
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorizationReport {
    pub kl: f64,
    /// `L_p(p) − L_p(q)`.
    pub pl_gap: f64,
    pub conditional_kl: f64,
    /// `|L_p(p) − L_p(q) − Σᵢ 𝔼 KL(conditionals)|`.
    pub identity_error: f64,
    /// `KL(p,q) ≤ c_at·(L_p(p) − L_p(q))` with relative slack `1e-12`.
    pub holds: bool,
}

pub fn tensorization_check(p: &HypercubeModel, q: &HypercubeModel, c_at: f64) -> Result<TensorizationReport> {
    check_dims(p, q)?;
    let w = p.probs();
    let pl_gap = pseudolikelihood_weighted(p, &w)? - pseudolikelihood_weighted(q, &w)?;
    let conditional_kl = conditional_kl_sum(p, q)?;
    let kl = p.kl(q)?;
    Ok(TensorizationReport {
        kl,
        pl_gap,
        conditional_kl,
        identity_error: (pl_gap - conditional_kl).abs(),
        holds: kl <= c_at * pl_gap * (1.0 + 1e-12) + 1e-15,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MartonReport {
    /// `𝔼_p (p(Xᵢ=+1 | X_{∼i}) − q(Xᵢ=+1 | X_{∼i}))²`, i.e. the expected squared
    /// total variation between the conditionals, per coordinate.
    pub tv2_terms: Vec<f64>,
    /// `M_p(q) − M_p(p)`.
    pub rm_gap: f64,
    /// Largest per-coordinate violation of
    /// `TV²ᵢ = 𝔼|1(Xᵢ=+1) − q(+|·)|² − 𝔼|1(Xᵢ=+1) − p(+|·)|²`.
    pub coordinate_gap: f64,
    /// `|Σᵢ TV²ᵢ − (M_p(q) − M_p(p))|`.
    pub identity_gap: f64,
}

pub fn marton_tv_check(p: &HypercubeModel, q: &HypercubeModel) -> Result<MartonReport> {
    check_dims(p, q)?;
    let d = p.dim();
    let mut tv2 = vec![Vec::new(); d];
    let mut resid_q = vec![Vec::new(); d];
    let mut resid_p = vec![Vec::new(); d];
    for x in 0..p.size() as u32 {
        let px = p.prob(x);
        for i in 0..d {
            let ind = ((x >> i) & 1) as f64;
            let (pp, qp) = (p.prob_plus(i, x), q.prob_plus(i, x));
            tv2[i].push(px * (pp - qp).powi(2));
            resid_q[i].push(px * (ind - qp).powi(2));
            resid_p[i].push(px * (ind - pp).powi(2));
        }
    }
    let tv2_terms: Vec<f64> = tv2.into_iter().map(compensated_sum).collect();
    let mut coordinate_gap: f64 = 0.0;
    for i in 0..d {
        let diff = compensated_sum(resid_q[i].iter().copied()) - compensated_sum(resid_p[i].iter().copied());
        coordinate_gap = coordinate_gap.max((tv2_terms[i] - diff).abs());
    }
    let w = p.probs();
    let rm_gap = ratio_matching_weighted(q, &w) - ratio_matching_weighted(p, &w);
    let identity_gap = (compensated_sum(tv2_terms.iter().copied()) - rm_gap).abs();
    Ok(MartonReport { tv2_terms, rm_gap, coordinate_gap, identity_gap })
}

#[derive(Debug, Clone, Serialize)]
pub struct AtSearch {
    /// Best ratio `KL(p,q) / Σᵢ 𝔼_p KL(conditionals)` found; a lower bound on
    /// the tensorization constant of `q`.
    pub c_at_lower: f64,
    /// Probability table of the best witness `p`.
    pub witness: Vec<f64>,
    pub best_restart: usize,
}

pub const AT_SEARCH_ITERS: usize = 4000;
const AT_MIN_DENOMINATOR: f64 = 1e-14;
/// Witness logits stay within this range of their maximum so no entry of
/// the softmax underflows.
const AT_LOGIT_RANGE: f64 = 700.0;

struct RatioEval {
    ratio: f64,
    /// Gradient of the ratio with respect to the table entries.
    grad: Vec<f64>,
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s = compensated_sum(e.iter().copied());
    e.into_iter().map(|v| v / s).collect()
}

fn ratio_eval(p: &[f64], log_q: &[f64], log_qcond: &[Vec<f64>], d: usize) -> Option<RatioEval> {
    let n = p.len();
    let lp: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let num = compensated_sum((0..n).map(|x| p[x] * (lp[x] - log_q[x])));
    let mut den_terms = Vec::with_capacity(n * d);
    let mut dden = vec![0.0; n];
    for x in 0..n {
        for i in 0..d {
            let y = flip(x as u32, i) as usize;
            let lpc = lp[x] - (p[x] + p[y]).ln();
            let t = lpc - log_qcond[i][x];
            den_terms.push(p[x] * t);
            dden[x] += t;
        }
    }
    let den = compensated_sum(den_terms);
    if !(den > AT_MIN_DENOMINATOR) || !num.is_finite() {
        return None;
    }
    let ratio = num / den;
    let grad = (0..n).map(|x| ((lp[x] - log_q[x] + 1.0) - ratio * dden[x]) / den).collect();
    Some(RatioEval { ratio, grad })
}

/// Searches for a table `p` maximizing the tensorization ratio against `q`
/// by mirror (exponentiated-gradient) ascent from `restarts` random starts
/// around `q`. Restart `k` uses `stream.substream(k)`, so raising `restarts`
/// never lowers the result.
pub fn at_constant_search(q: &HypercubeModel, restarts: usize, stream: &RngStream) -> Result<AtSearch> {
    let d = q.dim();
    if d > MAX_TABLE_DIM {
        return Err(Error::invalid(format!("tensorization search needs d <= {MAX_TABLE_DIM}")));
    }
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    let n = q.size();
    let floor = -AT_LOGIT_RANGE;
    let log_q: Vec<f64> = (0..n as u32).map(|x| q.log_prob(x).max(floor)).collect();
    let log_qcond: Vec<Vec<f64>> =
        (0..d).map(|i| (0..n as u32).map(|x| q.log_conditional(i, x).max(floor)).collect()).collect();

    let mut best: Option<AtSearch> = None;
    for k in 0..restarts {
        let mut rng = stream.substream(k as u64);
        let mut z: Vec<f64> = log_q.iter().map(|l| l + 2.0 * rng.std_normal()).collect();
        let mut p = softmax(&z);
        let Some(mut cur) = ratio_eval(&p, &log_q, &log_qcond, d) else { continue };
        let mut step = 0.1;
        for _ in 0..AT_SEARCH_ITERS {
            let mut moved = false;
            for _ in 0..40 {
                let mut trial: Vec<f64> = z.iter().zip(&cur.grad).map(|(zi, g)| zi + step * g).collect();
                let top = trial.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                trial.iter_mut().for_each(|v| *v = v.max(top - AT_LOGIT_RANGE));
                let tp = softmax(&trial);
                match ratio_eval(&tp, &log_q, &log_qcond, d) {
                    Some(e) if e.ratio > cur.ratio => {
                        z = trial;
                        p = tp;
                        cur = e;
                        step *= 1.5;
                        moved = true;
                        break;
                    }
                    _ => step *= 0.5,
                }
            }
            if !moved {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| cur.ratio > b.c_at_lower) {
            best = Some(AtSearch { c_at_lower: cur.ratio, witness: p.clone(), best_restart: k });
        }
    }
    best.ok_or(Error::DegenerateDenominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::IsingFamily;

    #[test]
    fn identity_and_inequality_on_random_pairs() {
        let mut s = RngStream::new(31, 0);
        for _ in 0..100 {
            let p = HypercubeModel::random(3, 1.0, &mut s).unwrap();
            let q = HypercubeModel::random(3, 1.0, &mut s).unwrap();
            let r = tensorization_check(&p, &q, f64::INFINITY).unwrap();
            assert!(r.identity_error < 1e-12, "{}", r.identity_error);
            let m = marton_tv_check(&p, &q).unwrap();
            assert!(m.identity_gap < 1e-12 && m.coordinate_gap < 1e-12);
        }
        let p = HypercubeModel::random(3, 1.0, &mut s).unwrap();
        let same = tensorization_check(&p, &p, 1.0).unwrap();
        assert_eq!((same.kl, same.pl_gap), (0.0, 0.0));
        let m = marton_tv_check(&p, &p).unwrap();
        assert!(m.tv2_terms.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn product_reference_tensorizes_with_constant_one() {
        let mut s = RngStream::new(32, 0);
        let q = IsingFamily::new(3, vec![], vec![0.3, -0.8, 0.1], vec![]).unwrap().model().unwrap();
        for _ in 0..50 {
            let p = HypercubeModel::random(3, 1.5, &mut s).unwrap();
            assert!(tensorization_check(&p, &q, 1.0).unwrap().holds);
        }
    }

    #[test]
    fn flipped_conditional_hand_case() {
        // d = 1: the conditional is the marginal; q(+) = 1 − p(+) gives TV² = (2p(+) − 1)².
        let p = HypercubeModel::from_probs(1, &[0.3, 0.7]).unwrap();
        let q = HypercubeModel::from_probs(1, &[0.7, 0.3]).unwrap();
        let m = marton_tv_check(&p, &q).unwrap();
        assert!((m.tv2_terms[0] - 0.16).abs() < 1e-15);
        assert!((m.rm_gap - 0.16).abs() < 1e-15);
    }

    #[test]
    fn search_on_product_measure() {
        let q = IsingFamily::new(2, vec![], vec![0.4, -0.2], vec![]).unwrap().model().unwrap();
        let r = at_constant_search(&q, 8, &RngStream::new(42, 0)).unwrap();
        assert!(r.c_at_lower >= 0.99 && r.c_at_lower <= 1.0 + 1e-6, "{}", r.c_at_lower);
    }

    #[test]
    fn search_grows_as_mixture_separates() {
        let stream = RngStream::new(42, 1);
        let vals: Vec<f64> = [0.1, 0.03, 0.01]
            .iter()
            .map(|&e| at_constant_search(&two_point(e), 10, &stream).unwrap().c_at_lower)
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2], "{vals:?}");
        assert!(vals[0] > 1.0);
    }

    fn two_point(eps: f64) -> HypercubeModel {
        crate::discrete::two_point_mixture(4, eps).unwrap()
    }

    #[test]
    fn more_restarts_never_lower_the_bound() {
        let q = two_point(0.05);
        let s = RngStream::new(7, 0);
        let mut prev = 0.0;
        for r in [1, 2, 4, 8] {
            let v = at_constant_search(&q, r, &s).unwrap().c_at_lower;
            assert!(v >= prev);
            prev = v;
        }
    }
}
