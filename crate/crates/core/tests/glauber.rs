//! Glauber dynamics on a three-spin Ising model leaves the target invariant.

use smlab::discrete::{glauber_run, glauber_transition, IsingFamily};
use smlab::numerics::RngStream;

fn model() -> smlab::discrete::HypercubeModel {
    IsingFamily::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![0.3, -0.5, 0.1], vec![0.7, -0.4, 0.2])
        .unwrap()
        .model()
        .unwrap()
}

#[test]
fn exact_kernel_is_stationary_and_stochastic() {
    let m = model();
    let pi = m.probs();
    for y in 0..8u32 {
        let mass: f64 = (0..8u32).map(|x| pi[x as usize] * glauber_transition(&m, x, y)).sum();
        assert!((mass - pi[y as usize]).abs() < 1e-14, "{y}: {mass} vs {}", pi[y as usize]);
    }
    for x in 0..8u32 {
        let row: f64 = (0..8u32).map(|y| glauber_transition(&m, x, y)).sum();
        assert!((row - 1.0).abs() < 1e-14);
    }
}

#[test]
fn long_run_frequencies_match_target() {
    let m = model();
    let pi = m.probs();
    let root = RngStream::new(42, 0);
    let chains = 20_000;
    let mut counts = [0usize; 8];
    for c in 0..chains {
        let mut s = root.substream(c);
        counts[glauber_run(&m, 0, 30, &mut s) as usize] += 1;
    }
    for x in 0..8 {
        let p = counts[x] as f64 / chains as f64;
        let sd = (pi[x] * (1.0 - pi[x]) / chains as f64).sqrt();
        assert!((p - pi[x]).abs() < 5.0 * sd, "state {x}: {p} vs {}", pi[x]);
    }
}
