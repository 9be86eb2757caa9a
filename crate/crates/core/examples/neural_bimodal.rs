//! Trains the tanh score network on a two-Gaussian mixture with close and
//! with distant modes and reports how well the integrated density matches.
//!
//! Usage: `neural_bimodal [seeds] [steps]`.

use rayon::prelude::*;
use smlab::neuralscore::{mixture_run, TrainConfig};

fn main() -> smlab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let seeds = args.first().copied().unwrap_or(10);
    let cfg = TrainConfig { steps: args.get(1).copied().unwrap_or(30_000), ..TrainConfig::default() };
    println!("{:>3} {:>5} {:>8} {:>12} {:>12} {:>10}", "a", "seed", "TV", "log w-ratio", "mode err", "loss");
    for a in [2.0, 4.0, 6.0] {
        let rows: Vec<_> = (0..seeds as u64)
            .into_par_iter()
            .map(|s| mixture_run(a, &cfg, &cfg.stream(s)))
            .collect::<smlab::Result<_>>()?;
        for (s, m) in rows.iter().enumerate() {
            println!("{a:>3} {s:>5} {:>8.4} {:>12.4} {:>12.4} {:>10.4}", m.tv, m.log_weight_ratio, m.mode_score_error, m.tail_loss);
        }
    }
    Ok(())
}
