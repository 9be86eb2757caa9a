//! One draw from the two-statistic bimodal family, fitted by score matching
//! and by maximum likelihood, next to the asymptotic prediction.
//!
//! Usage: `fit_comparison [a] [n]`.

use smlab::asymptotics::AsymptoticReport;
use smlab::estimators::{mle_fit_default_init, score_matching_fit};
use smlab::expfam::catalog;
use smlab::numerics::RngStream;

fn main() -> smlab::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let a = args.first().copied().unwrap_or(4.0);
    let n = args.get(1).copied().unwrap_or(1e5) as usize;
    let model = catalog::bimodal_with_cut(a).model()?;
    let x = model.sample(&mut RngStream::new(42, 0), n);
    let report = AsymptoticReport::compute(&model)?;
    println!("a = {a}, n = {n}, true theta = {:?}", model.theta());
    match score_matching_fit(model.stat(), &x) {
        Ok(r) => println!("score matching      theta = {:?}", r.theta_hat),
        Err(e) => println!("score matching      failed: {e}"),
    }
    let mle = mle_fit_default_init(&model, &x)?;
    println!("maximum likelihood  theta = {:?} ({} Newton steps)", mle.theta_hat, mle.newton_iters);
    println!(
        "asymptotic sd along the worst direction: SM {:.3e}, MLE {:.3e} (ratio of variances {:.3e})",
        (report.worst_ratio * report.gamma_mle.quad_form(&report.worst_direction) / n as f64).sqrt(),
        (report.gamma_mle.quad_form(&report.worst_direction) / n as f64).sqrt(),
        report.worst_ratio
    );
    Ok(())
}
