//! Derivative of the KL divergence along Gaussian smoothing of both arguments
//! compared with the score matching loss gap.

use smlab::expfam::{catalog, Normal};
use smlab::functional::lyu_equivalence_check;
use smlab::numerics::Grid1D;

fn main() -> smlab::Result<()> {
    let std = Normal::standard();
    let g = Grid1D::new(-12.0, 12.0, 4801)?;
    for mu in [0.25, 0.5, 1.0] {
        let r = lyu_equivalence_check(&Normal::new(mu, 1.0), &std, &g)?;
        println!("N({mu},1) vs N(0,1): d/dt KL = {:+.6}, -Fisher = {:+.6}", r.lhs_deriv, r.rhs_deriv);
    }
    for a in [1.0, 2.0] {
        let m = catalog::bimodal_quartic(a).model()?;
        let g = Grid1D::new(-a - 8.0, a + 8.0, ((2.0 * a + 16.0) / 0.005) as usize + 1)?;
        let r = lyu_equivalence_check(&m, &std, &g)?;
        println!("bimodal(a={a}) vs N(0,1): d/dt KL = {:+.6}, -Fisher = {:+.6}", r.lhs_deriv, r.rhs_deriv);
    }
    Ok(())
}
