//! Runs a reduced no-cut sweep through the experiment harness and writes the
//! CSV and SVG files, as `smlab run` does.
//!
//! Usage: `experiment_outputs [out_dir]`.

use smlab::expcli::config::SweepParams;
use smlab::expcli::experiments::run_bimodal_nocut;
use smlab::expcli::write_outputs;

fn main() -> smlab::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "smlab-example-out".into());
    let out = run_bimodal_nocut(&SweepParams { offsets: vec![1.0, 3.0, 5.0, 7.0], n: 20_000, seeds: 5, master_seed: 42 })?;
    for path in write_outputs(&out, dir.as_ref())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
