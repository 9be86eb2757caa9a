//! One-hidden-layer tanh score network in 1-D, trained by plain SGD on the
//! score matching objective `𝔼[s′(X) + ½ s(X)²]` with fresh samples each
//! step, and the density recovered from it by integrating the score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{Density1D, ExpFamilyModel, Normal};
use crate::numerics::quadrature::compensated_sum;
use crate::numerics::{Grid1D, RngStream};

/// A target that can be sampled, with known density and score.
pub trait ScoreTarget: Density1D {
    fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<f64>;
}

impl ScoreTarget for ExpFamilyModel {
    fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<f64> {
        ExpFamilyModel::sample(self, stream, n)
    }
}

impl ScoreTarget for Normal {
    fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.mean + self.sd * stream.std_normal()).collect()
    }
}

/// `½ N(−a, 1) + ½ N(a, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub a: f64,
}

impl Density1D for GaussianMixture {
    fn log_density(&self, x: f64) -> f64 {
        let (u, v) = (-0.5 * (x - self.a).powi(2), -0.5 * (x + self.a).powi(2));
        let m = u.max(v);
        m + ((u - m).exp() + (v - m).exp()).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - std::f64::consts::LN_2
    }

    fn score(&self, x: f64) -> f64 {
        -x + self.a * (self.a * x).tanh()
    }
}

impl ScoreTarget for GaussianMixture {
    fn sample(&self, stream: &mut RngStream, n: usize) -> Vec<f64> {
        (0..n).map(|_| stream.rademacher() * self.a + stream.std_normal()).collect()
    }
}

/// `s(x) = skip·x + Σⱼ aⱼ tanh(bⱼx + cⱼ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreNet1D {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub skip: f64,
}

/// Parameter-shaped gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrad {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub skip: f64,
}

impl ScoreNet1D {
    pub fn zeros(width: usize) -> Self {
        Self { a: vec![0.0; width], b: vec![0.0; width], c: vec![0.0; width], skip: 0.0 }
    }

    /// `b, c ~ U[−1, 1]·4/√width`, `a = 0`, `skip = −0.1`.
    pub fn init(width: usize, stream: &mut RngStream) -> Self {
        let scale = 4.0 / (width as f64).sqrt();
        let mut net = Self::zeros(width);
        for j in 0..width {
            net.b[j] = stream.uniform_range(-1.0, 1.0) * scale;
            net.c[j] = stream.uniform_range(-1.0, 1.0) * scale;
        }
        net.skip = -0.1;
        net
    }

    pub fn width(&self) -> usize {
        self.a.len()
    }

    pub fn score(&self, x: f64) -> f64 {
        self.skip * x + (0..self.width()).map(|j| self.a[j] * (self.b[j] * x + self.c[j]).tanh()).sum::<f64>()
    }

    pub fn score_d1(&self, x: f64) -> f64 {
        self.skip
            + (0..self.width())
                .map(|j| {
                    let t = (self.b[j] * x + self.c[j]).tanh();
                    self.a[j] * self.b[j] * (1.0 - t * t)
                })
                .sum::<f64>()
    }

    pub fn score_d2(&self, x: f64) -> f64 {
        (0..self.width())
            .map(|j| {
                let t = (self.b[j] * x + self.c[j]).tanh();
                -2.0 * self.a[j] * self.b[j] * self.b[j] * t * (1.0 - t * t)
            })
            .sum()
    }

    pub fn apply(&mut self, g: &NetGrad, step: f64) {
        for j in 0..self.width() {
            self.a[j] -= step * g.a[j];
            self.b[j] -= step * g.b[j];
            self.c[j] -= step * g.c[j];
        }
        self.skip -= step * g.skip;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite parameters serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("score net: {e}")))?;
        if net.b.len() != net.a.len() || net.c.len() != net.a.len() {
            return Err(Error::Config("score net: a, b, c must have equal length".into()));
        }
        Ok(net)
    }
}

/// `tanh` through one `exp`; about three times cheaper than `f64::tanh`
/// and accurate to a few ulp in absolute terms, which is all training needs.
#[inline]
fn fast_tanh(u: f64) -> f64 {
    1.0 - 2.0 / (1.0 + (2.0 * u).exp())
}

/// Batch loss `(1/b) Σ [s′(xᵢ) + ½ s(xᵢ)²]` and its exact gradient.
pub fn sm_loss_and_grad(net: &ScoreNet1D, batch: &[f64]) -> (f64, NetGrad) {
    assert!(!batch.is_empty(), "batch must be nonempty");
    let k = net.width();
    let mut g = NetGrad { a: vec![0.0; k], b: vec![0.0; k], c: vec![0.0; k], skip: 0.0 };
    let mut t = vec![0.0; k];
    let mut loss = 0.0;
    for &x in batch {
        for ((tj, b), c) in t.iter_mut().zip(&net.b).zip(&net.c) {
            *tj = fast_tanh(b * x + c);
        }
        let mut s = net.skip * x;
        let mut ds = net.skip;
        for ((tj, a), b) in t.iter().zip(&net.a).zip(&net.b) {
            s += a * tj;
            ds += a * b * (1.0 - tj * tj);
        }
        loss += ds + 0.5 * s * s;
        g.skip += 1.0 + s * x;
        let sx = s * x;
        for j in 0..k {
            let (a, b, tj) = (net.a[j], net.b[j], t[j]);
            let t1 = 1.0 - tj * tj;
            let t2 = -2.0 * tj * t1;
            g.a[j] += b * t1 + s * tj;
            g.b[j] += a * (t1 + b * x * t2 + sx * t1);
            g.c[j] += a * (b * t2 + s * t1);
        }
    }
    let inv = 1.0 / batch.len() as f64;
    for v in g.a.iter_mut().chain(g.b.iter_mut()).chain(g.c.iter_mut()) {
        *v *= inv;
    }
    g.skip *= inv;
    (loss * inv, g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub width: usize,
    pub steps: usize,
    pub batch: usize,
    pub step_size: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { width: 256, steps: 30_000, batch: 64, step_size: 1e-3, seed: 42 }
    }
}

impl TrainConfig {
    /// Stream for replicate `index` under this config's master seed.
    pub fn stream(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, index)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.steps == 0 || self.batch == 0 || !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("width, steps, batch and step_size must be positive"));
        }
        Ok(())
    }
}

pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: ScoreNet1D,
    /// Mean batch loss over the last 10% of steps.
    pub tail_loss: f64,
    /// Least-squares slope (per step) of the per-block median batch loss
    /// across ten blocks of the last 10% of steps.
    pub tail_slope: f64,
}

/// Plain constant-step SGD from [`ScoreNet1D::init`], fresh batch every step.
/// Initialization and batches come from independent substreams of `stream`.
pub fn train(target: &dyn ScoreTarget, cfg: &TrainConfig, stream: &RngStream) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut net = ScoreNet1D::init(cfg.width, &mut stream.substream(0));
    let mut data = stream.substream(1);
    let tail_start = cfg.steps - (cfg.steps / 10).max(1);
    let mut tail = Vec::with_capacity(cfg.steps - tail_start);
    for step in 0..cfg.steps {
        let batch = target.sample(&mut data, cfg.batch);
        let (loss, g) = sm_loss_and_grad(&net, &batch);
        if !(loss.abs() <= DIVERGENCE_LOSS) {
            return Err(Error::DivergedLoss { loss, step });
        }
        net.apply(&g, cfg.step_size);
        if step >= tail_start {
            tail.push(loss);
        }
    }
    let tail_loss = compensated_sum(tail.iter().copied()) / tail.len() as f64;
    Ok(TrainOutcome { net, tail_loss, tail_slope: block_median_slope(&tail) })
}

fn block_median_slope(losses: &[f64]) -> f64 {
    let blocks = 10.min(losses.len());
    let size = losses.len() / blocks;
    if size == 0 || blocks < 2 {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = (0..blocks)
        .map(|k| {
            let mut b = losses[k * size..(k + 1) * size].to_vec();
            b.sort_by(f64::total_cmp);
            ((k as f64 + 0.5) * size as f64, b[b.len() / 2])
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// A normalized density tabulated on a grid.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub grid: Grid1D,
    pub density: Vec<f64>,
}

/// Integrates `score` from the node nearest the grid midpoint (Simpson on
/// each interval), exponentiates and normalizes with the trapezoid rule.
pub fn reconstruct_density(score: impl Fn(f64) -> f64, grid: &Grid1D) -> Reconstruction {
    let x = grid.nodes();
    let n = x.len();
    let h = grid.spacing();
    let s: Vec<f64> = x.iter().map(|&v| score(v)).collect();
    let seg: Vec<f64> = (0..n - 1).map(|i| h / 6.0 * (s[i] + 4.0 * score(0.5 * (x[i] + x[i + 1])) + s[i + 1])).collect();
    let mid = n / 2;
    let mut log_p = vec![0.0; n];
    for i in mid + 1..n {
        log_p[i] = log_p[i - 1] + seg[i - 1];
    }
    for i in (0..mid).rev() {
        log_p[i] = log_p[i + 1] - seg[i];
    }
    let max = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut density: Vec<f64> = log_p.iter().map(|l| (l - max).exp()).collect();
    let mass = trapezoid(&density, h);
    density.iter_mut().for_each(|d| *d /= mass);
    Reconstruction { grid: grid.clone(), density }
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    h * (compensated_sum(v.iter().copied()) - 0.5 * (v[0] + v[n - 1]))
}

impl Reconstruction {
    pub fn mass(&self) -> f64 {
        trapezoid(&self.density, self.grid.spacing())
    }

    /// Total variation distance to `truth` by the trapezoid rule.
    pub fn tv_distance(&self, truth: &dyn Density1D) -> f64 {
        let diff: Vec<f64> = self.grid.nodes().iter().zip(&self.density).map(|(&x, d)| (d - truth.density(x)).abs()).collect();
        0.5 * trapezoid(&diff, self.grid.spacing())
    }

    /// `(mass on x > 0) / (mass on x < 0)`, split at the node nearest 0.
    pub fn weight_ratio(&self) -> f64 {
        let x = self.grid.nodes();
        let h = self.grid.spacing();
        let z = x.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|p| p.0).unwrap_or(0);
        trapezoid(&self.density[z..], h) / trapezoid(&self.density[..=z], h)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        for (x, d) in self.grid.nodes().iter().zip(&self.density) {
            out.push_str(&format!("{x},{d}\n"));
        }
        out
    }
}

/// `sup |d/dx log truth − s|` over `[center − 1, center + 1]` on 401 points.
pub fn score_sup_error(net: &ScoreNet1D, truth: &dyn Density1D, center: f64) -> f64 {
    (0..=400)
        .map(|k| {
            let x = center - 1.0 + k as f64 / 200.0;
            (truth.score(x) - net.score(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct MixtureMetrics {
    pub a: f64,
    pub tv: f64,
    pub log_weight_ratio: f64,
    /// Worse of the two modes.
    pub mode_score_error: f64,
    pub tail_loss: f64,
}

/// Default reconstruction grid for `½N(−a,1) + ½N(a,1)`.
pub fn mixture_grid(a: f64) -> Grid1D {
    Grid1D::new(-a - 8.0, a + 8.0, 4001).expect("valid grid")
}

/// Trains on the symmetric mixture and evaluates the reconstruction.
pub fn mixture_run(a: f64, cfg: &TrainConfig, stream: &RngStream) -> Result<MixtureMetrics> {
    let target = GaussianMixture { a };
    let out = train(&target, cfg, stream)?;
    let rec = reconstruct_density(|x| out.net.score(x), &mixture_grid(a));
    Ok(MixtureMetrics {
        a,
        tv: rec.tv_distance(&target),
        log_weight_ratio: rec.weight_ratio().ln(),
        mode_score_error: score_sup_error(&out.net, &target, a).max(score_sup_error(&out.net, &target, -a)),
        tail_loss: out.tail_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_net(width: usize, rng: &mut RngStream) -> ScoreNet1D {
        let mut net = ScoreNet1D::init(width, rng);
        for j in 0..width {
            net.a[j] = rng.std_normal();
            net.b[j] = rng.std_normal();
            net.c[j] = rng.std_normal();
        }
        net.skip = rng.std_normal();
        net
    }

    #[test]
    fn zero_net_loss_and_grad() {
        let net = ScoreNet1D::zeros(3);
        let (loss, g) = sm_loss_and_grad(&net, &[0.3, -1.0, 2.0]);
        assert_eq!(loss, 0.0);
        assert_eq!(g.skip, 1.0);
        assert!(g.a.iter().chain(&g.b).chain(&g.c).all(|v| *v == 0.0));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = RngStream::new(1, 0);
        let net = random_net(5, &mut rng);
        for _ in 0..20 {
            let x = rng.uniform_range(-3.0, 3.0);
            let h = 1e-5;
            let d1 = (net.score(x + h) - net.score(x - h)) / (2.0 * h);
            let d2 = (net.score_d1(x + h) - net.score_d1(x - h)) / (2.0 * h);
            assert!((d1 - net.score_d1(x)).abs() < 1e-6 * d1.abs().max(1.0));
            assert!((d2 - net.score_d2(x)).abs() < 1e-6 * d2.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = RngStream::new(2, 0);
        let net = random_net(4, &mut rng);
        let batch: Vec<f64> = (0..20).map(|_| 1.5 * rng.std_normal()).collect();
        let (_, g) = sm_loss_and_grad(&net, &batch);
        let loss = |n: &ScoreNet1D| sm_loss_and_grad(n, &batch).0;
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        let mut check = |analytic: f64, plus: ScoreNet1D, minus: ScoreNet1D| {
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-3));
        };
        for j in 0..4 {
            for (which, analytic) in [(0, g.a[j]), (1, g.b[j]), (2, g.c[j])] {
                let (mut p, mut m) = (net.clone(), net.clone());
                let (pv, mv) = match which {
                    0 => (&mut p.a, &mut m.a),
                    1 => (&mut p.b, &mut m.b),
                    _ => (&mut p.c, &mut m.c),
                };
                pv[j] += h;
                mv[j] -= h;
                check(analytic, p, m);
            }
        }
        let (mut p, mut m) = (net.clone(), net.clone());
        p.skip += h;
        m.skip -= h;
        check(g.skip, p, m);
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn true_score_population_loss() {
        // s(x) = −x on N(0,1): 𝔼[−1 + x²/2] = −1/2.
        let mut net = ScoreNet1D::zeros(1);
        net.skip = -1.0;
        let mut rng = RngStream::new(3, 0);
        let batch: Vec<f64> = (0..200_000).map(|_| rng.std_normal()).collect();
        let (loss, _) = sm_loss_and_grad(&net, &batch);
        assert!((loss + 0.5).abs() < 0.01);
    }

    #[test]
    fn reconstruction_of_known_scores() {
        let g = Grid1D::new(-10.0, 10.0, 2001).unwrap();
        let r = reconstruct_density(|x| -x, &g);
        assert!((r.mass() - 1.0).abs() < 1e-12);
        let n = Normal::standard();
        let sup = g.nodes().iter().zip(&r.density).filter(|(x, _)| x.abs() <= 6.0).map(|(&x, d)| (d - n.density(x)).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-6, "{sup}");
        let shifted = reconstruct_density(|x| -(x - 1.5), &g);
        let n = Normal::new(1.5, 1.0);
        assert!(g.nodes().iter().zip(&shifted.density).all(|(&x, d)| (d - n.density(x)).abs() < 1e-6));
        assert!(shifted.tv_distance(&n) < 1e-6);
    }

    #[test]
    fn differentiating_the_reconstruction_recovers_the_score() {
        let mut rng = RngStream::new(4, 0);
        let net = random_net(6, &mut rng);
        let g = Grid1D::new(-3.0, 3.0, 6001).unwrap();
        let r = reconstruct_density(|x| net.score(x), &g);
        let x = g.nodes();
        let h = g.spacing();
        for i in (1..x.len() - 1).step_by(50) {
            let d = (r.density[i + 1].ln() - r.density[i - 1].ln()) / (2.0 * h);
            assert!((d - net.score(x[i])).abs() < 1e-6 * net.score(x[i]).abs().max(1.0));
        }
    }

    #[test]
    fn mixture_target_is_consistent() {
        let m = GaussianMixture { a: 2.0 };
        let g = mixture_grid(2.0);
        let r = reconstruct_density(|x| m.score(x), &g);
        assert!(r.tv_distance(&m) < 1e-8);
        assert!(r.weight_ratio().ln().abs() < 1e-8);
        let mut rng = RngStream::new(5, 0);
        let xs = m.sample(&mut rng, 100_000);
        let mean_abs = xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64;
        assert!((mean_abs - 2.0).abs() < 0.02);
    }

    #[test]
    fn gaussian_target_is_learned() {
        let cfg = TrainConfig { width: 64, steps: 5000, ..TrainConfig::default() };
        let out = train(&Normal::standard(), &cfg, &RngStream::new(42, 0)).unwrap();
        let mut rng = RngStream::new(6, 0);
        let err: f64 = (0..20_000).map(|_| rng.std_normal()).map(|x| (out.net.score(x) + x).powi(2)).sum::<f64>() / 20_000.0;
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn json_round_trip() {
        let net = random_net(3, &mut RngStream::new(7, 0));
        assert_eq!(ScoreNet1D::from_json(&net.to_json()).unwrap(), net);
        assert!(ScoreNet1D::from_json(r#"{"a":[1.0],"b":[],"c":[0.0],"skip":0.0}"#).is_err());
    }
}
