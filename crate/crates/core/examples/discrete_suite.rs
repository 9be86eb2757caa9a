//! Pseudolikelihood and ratio matching on a two-spin Ising model, and the
//! searched tensorization constant of product and two-point-mixture targets.

use smlab::discrete::{
    at_constant_search, tensorization_check, pseudolikelihood_fit, ratio_matching_fit, two_point_mixture, IsingFamily,
};
use smlab::numerics::RngStream;

fn main() -> smlab::Result<()> {
    let truth = IsingFamily::new(2, vec![(0, 1)], vec![0.0, 0.0], vec![0.8])?;
    let model = truth.model()?;
    let root = RngStream::new(42, 0);
    for n in [1_000, 10_000, 100_000] {
        let samples = model.sample(&mut root.substream(n as u64), n);
        let pl = pseudolikelihood_fit(&truth, &samples)?;
        let rm = ratio_matching_fit(&truth, &samples)?;
        println!("n = {n:>6}: PL (h, J) = ({:+.4}, {:+.4}, {:.4})  RM (h, J) = ({:+.4}, {:+.4}, {:.4})",
            pl.family.h[0], pl.family.h[1], pl.family.j[0], rm.family.h[0], rm.family.h[1], rm.family.j[0]);
    }
    println!();
    let product = IsingFamily::new(3, vec![], vec![0.4, -0.2, 0.0], vec![])?.model()?;
    let r = at_constant_search(&product, 10, &root)?;
    println!("product measure, d = 3: C_AT >= {:.6}", r.c_at_lower);
    for eps in [0.1, 0.03, 0.01] {
        let q = two_point_mixture(4, eps)?;
        let r = at_constant_search(&q, 10, &root)?;
        let witness = smlab::discrete::HypercubeModel::from_probs(4, &r.witness)?;
        let check = tensorization_check(&witness, &q, r.c_at_lower)?;
        println!(
            "two-point mixture, eps = {eps:<5}: C_AT >= {:>10.4}  (witness KL {:.4}, PL gap {:.3e})",
            r.c_at_lower, check.kl, check.pl_gap
        );
    }
    Ok(())
}
