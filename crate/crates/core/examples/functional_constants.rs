//! Poincaré, log-Sobolev and isoperimetric constants of the Gaussian and of
//! the bimodal family, plus the KL / Fisher-information checks.

use smlab::expfam::{catalog, Normal};
use smlab::functional::{
    log_sobolev_bg, lyu_equivalence_check, lsi_gap_check, FunctionalConstants, GridDensity, DEFAULT_NODES,
};
use smlab::numerics::Grid1D;

fn main() -> smlab::Result<()> {
    let grid = Grid1D::new(-12.0, 12.0, DEFAULT_NODES)?;
    let normal = GridDensity::from_density(&Normal::standard(), &grid)?;
    let c = FunctionalConstants::compute(&normal)?;
    let bg = log_sobolev_bg(&normal)?;
    println!("N(0,1): C_P {:.6}  C_LS in [{:.4}, {:.4}]  C_IS {:.6}  B {:.6}", c.c_p, c.c_ls_lower, c.c_ls_upper, c.c_is, bg.b_plus.max(bg.b_minus));
    println!("{}", c.method_notes);
    println!();
    println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>12}", "a", "C_P", "C_P(restr)", "C_LS lo", "C_LS hi", "C_IS");
    for a in 1..=7 {
        let m = catalog::bimodal_quartic(a as f64).model()?;
        let c = FunctionalConstants::for_model(&m, DEFAULT_NODES)?;
        println!(
            "{a:>3} {:>12.5e} {:>12.5} {:>12.5e} {:>12.5e} {:>12.5e}  chain {}",
            c.c_p,
            c.c_p_restricted.unwrap_or(f64::NAN),
            c.c_ls_lower,
            c.c_ls_upper,
            c.c_is,
            c.chain_holds()
        );
    }
    println!();
    let g = Grid1D::new(-12.0, 12.0, 12001)?;
    let r = lsi_gap_check(&Normal::new(0.8, 1.0), &Normal::standard(), &g, 0.5)?;
    println!("N(0.8,1) vs N(0,1): KL {:.6}  gap {:.6}  I {:.6}  KL/I {:.6}", r.kl, r.gap, r.fisher, r.kl / r.fisher);
    let b = catalog::bimodal_quartic(1.0).model()?;
    let g = Grid1D::new(-8.0, 8.0, 3201)?;
    let l = lyu_equivalence_check(&b, &Normal::standard(), &g)?;
    println!("bimodal(1) vs N(0,1): -I {:.8}  dKL_t/dt {:.8}", l.lhs_deriv, l.rhs_deriv);
    Ok(())
}
