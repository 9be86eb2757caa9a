//! Small dense symmetric linear algebra: cyclic Jacobi eigensolver,
//! Cholesky solves and the largest eigenvalue of a symmetric-definite pencil.

use crate::error::{Error, Result};

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// Eigendecomposition with ascending eigenvalues; `vectors[k]` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

const SYMMETRY_TOL: f64 = 1e-10;

impl SymMatrix {
    /// Builds from row-major entries, rejecting matrices that are not symmetric to
    /// 1e-10 relative Frobenius deviation. The stored matrix is exactly symmetrized.
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::invalid(format!("expected {dim}x{dim} entries, got {}", data.len())));
        }
        let mut m = Self { dim, data };
        let norm = m.frobenius();
        let mut dev = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let d = m.data[i * dim + j] - m.data[j * dim + i];
                dev += d * d;
            }
        }
        if dev.sqrt() > SYMMETRY_TOL * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::invalid("matrix is not symmetric"));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = 0.5 * (m.data[i * dim + j] + m.data[j * dim + i]);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Fills the upper triangle from `f(i, j)` and mirrors it.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// `Σ_k s_k v_k v_kᵀ`.
    pub fn outer_sum<'a>(dim: usize, terms: impl IntoIterator<Item = (f64, &'a [f64])>) -> Self {
        let mut m = Self::zeros(dim);
        for (s, v) in terms {
            for i in 0..dim {
                let si = s * v[i];
                for j in i..dim {
                    m.data[i * dim + j] += si * v[j];
                }
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                m.data[j * dim + i] = m.data[i * dim + j];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn as_rows(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `Mᵀ · self · M` for a square (not necessarily symmetric) row-major `m`.
    pub fn congruence(&self, m: &[f64]) -> Self {
        let n = self.dim;
        assert_eq!(m.len(), n * n);
        // t = self * m
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    t[i * n + j] += a * m[k * n + j];
                }
            }
        }
        Self::from_fn(n, |i, j| (0..n).map(|k| m[k * n + i] * t[k * n + j]).sum())
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn op_norm(&self) -> Result<f64> {
        let eig = sym_eig(self)?;
        Ok(eig.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Inverse of a positive definite matrix via Cholesky solves on identity columns.
    pub fn inverse_spd(&self) -> Result<Self> {
        let chol = Cholesky::new(self)?;
        let n = self.dim;
        let mut inv = Self::zeros(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = chol.solve(&e);
            for i in 0..n {
                inv.data[i * n + j] = col[i];
            }
        }
        // Average the tiny asymmetry introduced by rounding.
        Ok(Self::from_fn(n, |i, j| 0.5 * (inv.data[i * n + j] + inv.data[j * n + i])))
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eig(m: &SymMatrix) -> Result<SymEig> {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = m.frobenius();
    let cap = 100 * n * n;
    let mut rotations = 0usize;
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };
    loop {
        let current = off(&a);
        if current <= f64::EPSILON * norm * 1e-2 || current == 0.0 {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Skip rotations that cannot change the diagonal in floating point.
                if apq.abs() < 1e-3 * f64::EPSILON * (app.abs() + aqq.abs()).max(f64::MIN_POSITIVE)
                    && apq.abs() < 1e-3 * f64::EPSILON * norm
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if rotations >= cap {
                    return Err(Error::NoConvergence {
                        what: "Jacobi eigensolver",
                        residual: off(&a),
                    });
                }
                rotations += 1;
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
        .collect();
    Ok(SymEig { values, vectors })
}

/// Lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn new(a: &SymMatrix) -> Result<Self> {
        let n = a.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: d });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { dim: n, l })
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }
}

/// Solves `a x = rhs` for positive definite `a`.
pub fn solve_spd(a: &SymMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.dim {
        return Err(Error::invalid("rhs dimension mismatch"));
    }
    let chol = Cholesky::new(a)?;
    let mut x = chol.solve(rhs);
    // One step of iterative refinement.
    let r: Vec<f64> = a.matvec(&x).iter().zip(rhs).map(|(ax, b)| b - ax).collect();
    let dx = chol.solve(&r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

/// `max_w ⟨w, a w⟩ / ⟨w, b w⟩` and a maximizer normalized to `⟨w, b w⟩ = 1`.
pub fn gen_eig_max(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    if a.dim != b.dim {
        return Err(Error::invalid("pencil dimension mismatch"));
    }
    let n = a.dim;
    let b_eig = sym_eig(b)?;
    let b_norm = b_eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b_min = b_eig.values[0];
    if !(b_min > 1e-12 * b_norm) {
        return Err(Error::NotPositiveDefinite { pivot: b_min });
    }
    let chol = Cholesky::new(b)?;
    // C = L⁻¹ A L⁻ᵀ, built column by column.
    let mut linv_a = vec![0.0; n * n];
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| a.get(i, j)).collect();
        let y = chol.forward(&col);
        for i in 0..n {
            linv_a[i * n + j] = y[i];
        }
    }
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let row: Vec<f64> = linv_a[i * n..(i + 1) * n].to_vec();
        let y = chol.forward(&row);
        for j in 0..n {
            c[j * n + i] = y[j];
        }
    }
    let c = SymMatrix::from_fn(n, |i, j| 0.5 * (c[i * n + j] + c[j * n + i]));
    let eig = sym_eig(&c)?;
    let lambda = eig.values[n - 1];
    let w = chol.backward(&eig.vectors[n - 1]);
    Ok((lambda, w))
}
