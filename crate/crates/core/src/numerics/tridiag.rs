//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for
//! eigenvalues, inverse iteration for eigenvectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid("tridiagonal sizes do not match"));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tridiagonal entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            q = if i == 0 {
                self.diag[0] - x
            } else {
                self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q
            };
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to absolute width `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::invalid("eigenvalue index out of range"));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (hi - lo).abs().max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..400 {
            if hi - lo <= tol.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unit eigenvector for an (approximate) eigenvalue by inverse iteration.
    pub fn eigenvector(&self, lambda: f64, start: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let shift = lambda - 1e-10 * (hi - lo).abs().max(f64::MIN_POSITIVE);
        let mut x = normalized(start.to_vec())?;
        for _ in 0..8 {
            let d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
            let y = solve_tridiagonal(&self.off, &d, &self.off, &x)?;
            let next = normalized(y)?;
            let dot: f64 = next.iter().zip(&x).map(|(a, b)| a * b).sum();
            x = next;
            if 1.0 - dot.abs() < 1e-15 {
                break;
            }
        }
        if n > 0 {
            // Fix the sign so that the largest-magnitude entry is positive.
            let imax = (0..n).max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap_or(0);
            if x[imax] < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(x)
    }
}

fn normalized(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NoConvergence {
            what: "inverse iteration",
            residual: norm,
        });
    }
    v.iter_mut().for_each(|a| *a /= norm);
    Ok(v)
}

/// Solves a general tridiagonal system by Gaussian elimination with partial pivoting.
/// `lower[i]` is entry `(i + 1, i)`, `upper[i]` is entry `(i, i + 1)`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(Error::invalid("tridiagonal system sizes do not match"));
    }
    let scale = diag.iter().chain(lower).chain(upper).fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * 1e-3;
    // Row i holds (d[i], u1[i], u2[i]) after elimination.
    let mut d = diag.to_vec();
    let mut u1: Vec<f64> = upper.to_vec();
    u1.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    let mut l: Vec<f64> = lower.to_vec();
    for i in 0..n.saturating_sub(1) {
        if l[i].abs() > d[i].abs() {
            // Swap rows i and i + 1.
            let (a0, a1, a2) = (d[i], u1[i], u2[i]);
            d[i] = l[i];
            u1[i] = d[i + 1];
            u2[i] = u1[i + 1];
            l[i] = a0;
            d[i + 1] = a1;
            u1[i + 1] = a2;
            b.swap(i, i + 1);
        }
        if d[i].abs() <= floor {
            d[i] = floor.copysign(if d[i] == 0.0 { 1.0 } else { d[i] });
        }
        let m = l[i] / d[i];
        d[i + 1] -= m * u1[i];
        if i + 1 < n - 1 {
            u1[i + 1] -= m * u2[i];
        }
        b[i + 1] -= m * b[i];
    }
    if d[n - 1].abs() <= floor {
        d[n - 1] = floor;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence {
            what: "tridiagonal solve",
            residual: f64::INFINITY,
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::{sym_eig, SymMatrix};
    use proptest::prelude::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        // Eigenvalues 2 − 2cos(kπ/(n+1)).
        let n = 50;
        let t = laplacian(n);
        for k in 0..n {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            let got = t.eigenvalue(k, 1e-14).unwrap();
            assert!((got - want).abs() < 1e-12, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn eigenvector_is_sine_mode() {
        let n = 20;
        let t = laplacian(n);
        let lam = t.eigenvalue(0, 1e-15).unwrap();
        let v = t.eigenvector(lam, &vec![1.0; n]).unwrap();
        let norm: f64 = (1..=n).map(|j| (j as f64 * std::f64::consts::PI / (n + 1) as f64).sin().powi(2)).sum::<f64>().sqrt();
        for j in 0..n {
            let want = ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).sin() / norm;
            assert!((v[j] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_needs_pivoting() {
        // Zero leading diagonal forces a row swap.
        let x = solve_tridiagonal(&[1.0, 1.0], &[0.0, 1.0, 2.0], &[1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        // Oracle by hand: x1 = 1, x0 + x1 + x2 = 2, x1 + 2 x2 = 3 → x2 = 1, x0 = 0.
        assert!((x[0] - 0.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((x[2] - 1.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn matches_dense_jacobi(
            diag in prop::collection::vec(-5.0f64..5.0, 2..24),
            seed in prop::collection::vec(-3.0f64..3.0, 24),
        ) {
            let n = diag.len();
            let off: Vec<f64> = seed[..n - 1].to_vec();
            let t = SymTridiagonal::new(diag.clone(), off.clone()).unwrap();
            let dense = SymMatrix::from_fn(n, |i, j| {
                if i == j { diag[i] } else if j == i + 1 { off[i] } else { 0.0 }
            });
            let e = sym_eig(&dense).unwrap();
            for k in 0..n {
                let got = t.eigenvalue(k, 1e-13).unwrap();
                prop_assert!((got - e.values[k]).abs() < 1e-9, "k={} {} vs {}", k, got, e.values[k]);
            }
        }

        #[test]
        fn solve_residual_small(
            lower in prop::collection::vec(-2.0f64..2.0, 15),
            diag in prop::collection::vec(-2.0f64..2.0, 16),
            upper in prop::collection::vec(-2.0f64..2.0, 15),
        ) {
            let rhs: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
            let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
            let n = 16;
            let mut r = 0.0f64;
            let mut xn = 0.0f64;
            for i in 0..n {
                let mut v = diag[i] * x[i];
                if i > 0 { v += lower[i - 1] * x[i - 1]; }
                if i + 1 < n { v += upper[i] * x[i + 1]; }
                r = r.max((v - rhs[i]).abs());
                xn = xn.max(x[i].abs());
            }
            prop_assert!(r <= 1e-9 * (1.0 + 6.0 * xn));
        }
    }
}
