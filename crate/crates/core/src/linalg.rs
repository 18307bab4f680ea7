//! Sparse symmetric operators, banded LDLᵀ factorization and a Lanczos
//! eigensolver with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A real symmetric linear map applied matrix-free.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Compressed sparse rows; used for the truncated Fock-space matrices.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[row.clone()]
            .binary_search(&j)
            .map(|k| self.vals[row.start + k])
            .unwrap_or(0.0)
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                worst = worst.max((self.vals[k] - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.vals[k];
            }
        }
        m
    }
}

impl SymmetricOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }
}

/// Symmetric banded matrix stored by diagonals: `bands[k][i] = A[i, i+k]`.
#[derive(Debug, Clone)]
pub struct BandedSymmetric {
    bands: Vec<Vec<f64>>,
}

impl BandedSymmetric {
    /// `bands[0]` is the main diagonal (length n); `bands[k]` has length n − k.
    pub fn new(bands: Vec<Vec<f64>>) -> Self {
        let n = bands[0].len();
        for (k, b) in bands.iter().enumerate() {
            assert_eq!(b.len(), n.saturating_sub(k), "band {k} has wrong length");
        }
        Self { bands }
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.bands[0]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth() {
            0.0
        } else {
            self.bands[k][lo]
        }
    }

    /// Gershgorin bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let b = self.bandwidth();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            for j in i.saturating_sub(b)..(i + b + 1).min(n) {
                if j != i {
                    r += self.entry(i, j).abs();
                }
            }
            lo = lo.min(self.bands[0][i] - r);
            hi = hi.max(self.bands[0][i] + r);
        }
        (lo, hi)
    }

    /// LDLᵀ factorization of `A − shift·I` without pivoting.
    pub fn ldlt(&self, shift: f64) -> BandedLdlt {
        let n = self.dim();
        let b = self.bandwidth();
        // l[i][k] = L[i, i-1-k]
        let mut l = vec![vec![0.0; b]; n];
        let mut d = vec![0.0; n];
        for j in 0..n {
            let mut dj = self.bands[0][j] - shift;
            for k in j.saturating_sub(b)..j {
                let ljk = l[j][j - 1 - k];
                dj -= ljk * ljk * d[k];
            }
            if dj == 0.0 {
                dj = f64::EPSILON * (1.0 + self.bands[0][j].abs());
            }
            d[j] = dj;
            for i in (j + 1)..(j + b + 1).min(n) {
                let mut s = self.entry(i, j);
                for k in i.saturating_sub(b)..j {
                    s -= l[i][i - 1 - k] * l[j][j - 1 - k] * d[k];
                }
                l[i][i - 1 - j] = s / dj;
            }
        }
        BandedLdlt { l, d, b }
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia).
    pub fn count_below(&self, x: f64) -> usize {
        self.ldlt(x).negative_pivots()
    }

    /// Bisection for the `index`-th smallest eigenvalue (0-based).
    pub fn bisect_eigenvalue(&self, index: usize, rel_tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            if hi - lo <= rel_tol * scale {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl SymmetricOperator for BandedSymmetric {
    fn dim(&self) -> usize {
        self.bands[0].len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            y[i] = self.bands[0][i] * x[i];
        }
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for i in 0..n - k {
                y[i] += band[i] * x[i + k];
                y[i + k] += band[i] * x[i];
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BandedLdlt {
    l: Vec<Vec<f64>>,
    d: Vec<f64>,
    b: usize,
}

impl BandedLdlt {
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(self.b)..i {
                s -= self.l[i][i - 1 - k] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..(i + self.b + 1).min(n) {
                s -= self.l[j][j - 1 - i] * x[j];
            }
            x[i] = s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Absolute residual target `‖Av − λv‖` for unit `v`.
    pub tol: f64,
    /// Iteration cap; `None` uses `10·k·√n` (at least 40).
    pub max_iter: Option<usize>,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

pub(crate) fn default_cap(n: usize, k: usize) -> usize {
    ((10.0 * k as f64 * (n as f64).sqrt()).ceil() as usize).max(40)
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| 1.0 + 0.5 * (rng.random::<f64>() - 0.5)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes of classical Gram–Schmidt.
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.par_iter().map(|q| dot(q, v)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
        }
    }
}

/// Core Lanczos loop on a transformed operator `t_apply`.
///
/// Ritz vectors for the `k` extreme eigenvalues of the transform
/// (smallest if `largest` is false) are certified against the original
/// operator `h` through the residual `‖h y − ρ(y) y‖`.
fn lanczos_core<T, H>(
    n: usize,
    k: usize,
    largest: bool,
    mut t_apply: T,
    h: &H,
    opts: LanczosOptions,
    guess: Option<&[f64]>,
) -> Result<EigenPairs>
where
    T: FnMut(&[f64], &mut [f64]),
    H: SymmetricOperator + ?Sized,
{
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {n}-dimensional operator"
        )));
    }
    let cap = opts.max_iter.unwrap_or_else(|| default_cap(n, k)).min(n).max(k);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap.min(512));
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);

    let mut q = start_vector(n, opts.seed);
    if let Some(g) = guess {
        let gn = norm(g);
        if g.len() == n && gn > 0.0 {
            // Keep a small random admixture so no eigen-direction is missing.
            q.iter_mut().zip(g).for_each(|(x, gi)| *x = gi / gn + 1e-3 * *x);
            let qn = norm(&q);
            q.iter_mut().for_each(|x| *x /= qn);
        }
    }
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;
    let mut hy = vec![0.0; n];
    let check_every = 5usize;

    for iter in 0..cap {
        t_apply(&q, &mut w);
        let alpha = dot(&q, &w);
        basis.push(q.clone());
        alphas.push(alpha);
        orthogonalize(&mut w, &basis);
        let beta = norm(&w);

        let m = basis.len();
        let exhausted = m == n;
        let breakdown = beta <= 1e-13 * alphas.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        let should_check = m >= k && (m.is_multiple_of(check_every) || exhausted || breakdown || iter + 1 == cap);

        if should_check {
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
            if largest {
                order.reverse();
            }
            // Cheap screening with the Lanczos residual bound before forming vectors.
            let bound_ok = order[..k]
                .iter()
                .all(|&j| (beta * eig.eigenvectors[(m - 1, j)]).abs() <= 1e-3 || exhausted || breakdown);
            if bound_ok || iter + 1 == cap {
                let mut values = Vec::with_capacity(k);
                let mut vectors = Vec::with_capacity(k);
                let mut residuals = Vec::with_capacity(k);
                for &j in &order[..k] {
                    let mut y = vec![0.0; n];
                    for (i, qi) in basis.iter().enumerate() {
                        let c = eig.eigenvectors[(i, j)];
                        y.iter_mut().zip(qi).for_each(|(a, b)| *a += c * b);
                    }
                    let ny = norm(&y);
                    y.iter_mut().for_each(|a| *a /= ny);
                    h.apply(&y, &mut hy);
                    let rho = dot(&y, &hy);
                    let r = hy
                        .iter()
                        .zip(&y)
                        .map(|(a, b)| (a - rho * b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    values.push(rho);
                    vectors.push(y);
                    residuals.push(r);
                }
                let worst = residuals.iter().cloned().fold(0.0, f64::max);
                best_residual = best_residual.min(worst);
                if worst <= opts.tol {
                    let mut idx: Vec<usize> = (0..k).collect();
                    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
                    return Ok(EigenPairs {
                        values: idx.iter().map(|&i| values[i]).collect(),
                        vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
                        residuals: idx.iter().map(|&i| residuals[i]).collect(),
                        iterations: m,
                    });
                }
            }
        }

        if exhausted {
            break;
        }
        if breakdown {
            // Invariant subspace found; continue from a fresh direction.
            let mut fresh: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&mut fresh, &basis);
            let nf = norm(&fresh);
            if nf == 0.0 {
                break;
            }
            fresh.iter_mut().for_each(|x| *x /= nf);
            betas.push(0.0);
            q = fresh;
        } else {
            betas.push(beta);
            q = w.iter().map(|x| x / beta).collect();
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: basis.len(),
        best_residual,
    })
}

/// The `k` smallest eigenpairs of `op` by plain Lanczos.
pub fn lanczos_smallest<A: SymmetricOperator + ?Sized>(op: &A, k: usize, opts: LanczosOptions) -> Result<EigenPairs> {
    lanczos_core(op.dim(), k, false, |x, y| op.apply(x, y), op, opts, None)
}

/// As [`lanczos_smallest`], starting from an approximate eigenvector.
pub fn lanczos_smallest_from<A: SymmetricOperator + ?Sized>(
    op: &A,
    k: usize,
    opts: LanczosOptions,
    guess: &[f64],
) -> Result<EigenPairs> {
    lanczos_core(op.dim(), k, false, |x, y| op.apply(x, y), op, opts, Some(guess))
}

/// The `k` smallest eigenpairs of a banded matrix by shift-and-invert
/// Lanczos. The shift sits below the lowest eigenvalue, placed from
/// inertia counts so that `(A − σ)⁻¹` is positive definite.
pub fn banded_smallest(op: &BandedSymmetric, k: usize, opts: LanczosOptions) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {n}-dimensional operator"
        )));
    }
    let lambda0 = op.bisect_eigenvalue(0, 1e-13);
    let gap = if n > 1 {
        (op.bisect_eigenvalue(1, 1e-13) - lambda0).max(1e-12 * (1.0 + lambda0.abs()))
    } else {
        1.0
    };
    let mut shift = lambda0 - 0.1 * gap;
    // Guard against bisection round-off leaving σ above λ₀.
    while op.count_below(shift) > 0 {
        shift -= gap;
    }
    let fact = op.ldlt(shift);
    lanczos_core(
        n,
        k,
        true,
        |x, y| {
            y.copy_from_slice(x);
            fact.solve_in_place(y);
        },
        op,
        opts,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian(n: usize) -> BandedSymmetric {
        BandedSymmetric::new(vec![vec![2.0; n], vec![-1.0; n - 1]])
    }

    fn exact_laplacian_eig(n: usize, j: usize) -> f64 {
        let theta = std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64;
        2.0 - 2.0 * theta.cos()
    }

    #[test]
    fn banded_inertia_counts_eigenvalues() {
        let a = laplacian(50);
        let x = 0.5 * (exact_laplacian_eig(50, 3) + exact_laplacian_eig(50, 4));
        assert_eq!(a.count_below(x), 4);
    }

    #[test]
    fn banded_solve_inverts() {
        let a = BandedSymmetric::new(vec![vec![5.0; 20], vec![-1.0; 19], vec![0.5; 18]]);
        let f = a.ldlt(0.3);
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; 20];
        a.apply(&x, &mut b);
        b.iter_mut().zip(&x).for_each(|(bi, xi)| *bi -= 0.3 * xi);
        f.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn shift_invert_matches_exact_laplacian() {
        let n = 400;
        let pairs = banded_smallest(&laplacian(n), 3, LanczosOptions::default()).unwrap();
        for j in 0..3 {
            assert_relative_eq!(pairs.values[j], exact_laplacian_eig(n, j), max_relative = 1e-9);
            assert!(pairs.residuals[j] <= 1e-8);
        }
    }

    #[test]
    fn plain_lanczos_matches_dense() {
        let n = 60;
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                let mut r = vec![(i, 1.0 + (i as f64) * 0.37 % 3.0)];
                if i + 1 < n {
                    r.push((i + 1, 0.4));
                }
                if i > 0 {
                    r.push((i - 1, 0.4));
                }
                if i + 7 < n {
                    r.push((i + 7, -0.1));
                }
                if i >= 7 {
                    r.push((i - 7, -0.1));
                }
                r
            })
            .collect();
        let a = CsrMatrix::from_rows(rows);
        assert_eq!(a.asymmetry(), 0.0);
        let dense = SymmetricEigen::new(a.to_dense());
        let mut ev: Vec<f64> = dense.eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pairs = lanczos_smallest(
            &a,
            2,
            LanczosOptions {
                max_iter: Some(60),
                ..Default::default()
            },
        )
        .unwrap();
        assert_relative_eq!(pairs.values[0], ev[0], max_relative = 1e-10);
        assert_relative_eq!(pairs.values[1], ev[1], max_relative = 1e-10);
    }

    #[test]
    fn too_many_pairs_is_rejected() {
        let a = laplacian(4);
        assert!(matches!(
            lanczos_smallest(&a, 5, LanczosOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
