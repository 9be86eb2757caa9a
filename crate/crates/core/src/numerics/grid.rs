use crate::error::{Error, Result};

/// Uniform 1-D grid on `[lo, hi]` with `n >= 16` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub const MIN_NODES: usize = 16;

    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::invalid(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::invalid(format!("grid needs at least {} nodes, got {n}", Self::MIN_NODES)));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        nodes[n - 1] = hi;
        Ok(Self { lo, hi, nodes })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.nodes.len() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Same interval with twice the number of intervals.
    pub fn refined(&self) -> Self {
        Self::new(self.lo, self.hi, 2 * (self.nodes.len() - 1) + 1).expect("refining a valid grid")
    }

    /// Index `i` such that `nodes[i] <= x < nodes[i + 1]`, clamped to the last interval.
    pub fn interval_of(&self, x: f64) -> usize {
        let h = self.spacing();
        let raw = ((x - self.lo) / h).floor();
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.nodes.len() - 2)
        }
    }
}
