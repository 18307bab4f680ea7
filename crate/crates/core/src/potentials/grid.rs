use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridKind {
    /// Nodes r_i = i·h on `[0, r_max]`.
    Radial { r_max: f64 },
    /// Tensor grid on `[−L, L]^dim`.
    Box { dim: usize, half_width: f64 },
}

/// Uniform real-space grid with `n` nodes per axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n: usize,
}

impl GridSpec {
    pub fn radial(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return invalid(format!("radial extent must be positive, got {r_max}"));
        }
        Self::checked(GridKind::Radial { r_max }, n)
    }

    pub fn box_grid(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("box grid needs at least one axis");
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return invalid(format!("box half-width must be positive, got {half_width}"));
        }
        Self::checked(GridKind::Box { dim, half_width }, n)
    }

    fn checked(kind: GridKind, n: usize) -> Result<Self> {
        if n < 8 {
            return invalid(format!("grid needs at least 8 points per axis, got {n}"));
        }
        Ok(Self { kind, n })
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, GridKind::Radial { .. })
    }

    /// Number of array axes (1 for radial grids).
    pub fn dim(&self) -> usize {
        match self.kind {
            GridKind::Radial { .. } => 1,
            GridKind::Box { dim, .. } => dim,
        }
    }

    pub fn extent(&self) -> f64 {
        match self.kind {
            GridKind::Radial { r_max } => r_max,
            GridKind::Box { half_width, .. } => 2.0 * half_width,
        }
    }

    pub fn origin(&self) -> f64 {
        match self.kind {
            GridKind::Radial { .. } => 0.0,
            GridKind::Box { half_width, .. } => -half_width,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.extent() / (self.n - 1) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        let h = self.spacing();
        let o = self.origin();
        (0..self.n).map(|i| o + i as f64 * h).collect()
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.dim()]
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multi-index of a row-major flat index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let dim = self.dim();
        let mut idx = vec![0; dim];
        for ax in (0..dim).rev() {
            idx[ax] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        let h = self.spacing();
        let o = self.origin();
        idx.iter().map(|&i| o + i as f64 * h).collect()
    }

    /// Same extent with `2n − 1` nodes, i.e. half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            kind: self.kind,
            n: 2 * self.n - 1,
        }
    }

    /// Multilinear interpolation of row-major `values` at `x`; zero outside.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let dim = self.dim();
        let h = self.spacing();
        let o = self.origin();
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0; dim];
        for ax in 0..dim {
            let s = (x[ax] - o) / h;
            if !(s >= 0.0 && s <= (self.n - 1) as f64) {
                return 0.0;
            }
            let i = (s.floor() as usize).min(self.n - 2);
            base[ax] = i;
            frac[ax] = s - i as f64;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut flat = 0;
            for ax in 0..dim {
                let bit = (corner >> ax) & 1;
                w *= if bit == 1 { frac[ax] } else { 1.0 - frac[ax] };
                flat = flat * self.n + base[ax] + bit;
            }
            if w != 0.0 {
                total += w * values[flat];
            }
        }
        total
    }
}
