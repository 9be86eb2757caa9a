//! Finite-sample KL of the score matching (sample mean) estimate for a
//! Gaussian location family constrained to a ball, against `R·√((R²+d)/n)`.

use smlab::functional::rademacher_gaussian_bound;
use smlab::numerics::RngStream;

fn main() -> smlab::Result<()> {
    println!("{:>4} {:>3} {:>6} {:>12} {:>12} {:>12}", "R", "d", "n", "r_n", "E KL", "bound");
    for (r, d, n) in [(1.0, 1, 100), (2.0, 5, 400), (1.0, 1, 1000), (3.0, 10, 1000)] {
        let rep = rademacher_gaussian_bound(r, d, n, &RngStream::new(42, 0))?;
        println!("{r:>4} {d:>3} {n:>6} {:>12.4e} {:>12.4e} {:>12.4e}", rep.r_n, rep.empirical_kl, rep.bound);
    }
    Ok(())
}
