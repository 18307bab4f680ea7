//! Finite-difference Schrödinger operators −(ħ²/2m)Δ + V on Dirichlet boxes or
//! radial ℓ-channels, their low spectra, and the level-shift and variational
//! comparisons between V and its smoothing.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{banded_smallest, dot, lanczos_smallest, BandedSymmetric, LanczosOptions, SymmetricOperator};
use crate::model::PhysicalParams;
use crate::potentials::{effective_potential, GridKind, GridSpec, PotentialSpec, SmoothedPotential};

/// Largest `k` accepted by [`low_spectrum`].
pub const MAX_LEVELS: usize = 32;

/// Where the potential samples come from.
#[derive(Debug, Clone)]
pub enum PotentialSource {
    Bare(PotentialSpec),
    Smoothed(SmoothedPotential),
}

impl From<PotentialSpec> for PotentialSource {
    fn from(v: PotentialSpec) -> Self {
        Self::Bare(v)
    }
}

impl From<SmoothedPotential> for PotentialSource {
    fn from(v: SmoothedPotential) -> Self {
        Self::Smoothed(v)
    }
}

impl PotentialSource {
    pub fn dim(&self) -> usize {
        match self {
            Self::Bare(v) => v.dim,
            Self::Smoothed(v) => v.dim,
        }
    }

    fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        match self {
            Self::Bare(v) => v.sample(grid),
            Self::Smoothed(v) => v.sample(grid),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// ψ = 0 on the faces of the box.
    DirichletBox,
    /// Reduced wavefunction u = rψ in angular-momentum channel ℓ, u(0) = u(R) = 0.
    Radial { ell: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianOptions {
    /// Kinetic stencil order, 2 or 4.
    pub order: usize,
    /// Angular momentum of the radial channel.
    pub ell: usize,
    pub solver: LanczosOptions,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        Self {
            order: 4,
            ell: 0,
            solver: LanczosOptions::default(),
        }
    }
}

/// Discretized Hamiltonian acting on the interior nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub grid: GridSpec,
    pub mass: f64,
    pub hbar: f64,
    pub order: usize,
    pub boundary: Boundary,
    /// Potential at the interior nodes (centrifugal term excluded).
    pub potential: Vec<f64>,
    solver: LanczosOptions,
    /// Interior nodes per axis.
    m: usize,
    /// One-dimensional kinetic bands; the diagonal holds the boundary-corrected entries.
    kinetic: Vec<Vec<f64>>,
    banded: Option<BandedSymmetric>,
}

/// Second-derivative stencil weights at offsets 0, 1, 2, … (scaled by 1/h²).
fn stencil(order: usize) -> Result<Vec<f64>> {
    match order {
        2 => Ok(vec![-2.0, 1.0]),
        4 => Ok(vec![-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0]),
        _ => invalid(format!("stencil order must be 2 or 4, got {order}")),
    }
}

/// Bands of −(ħ²/2m)·D² on `m` interior nodes. Ghost nodes beyond each wall
/// are reflections u(−x) = s·u(x) with `left_sign` at the first wall and odd
/// reflection at the second.
fn kinetic_bands(m: usize, order: usize, h: f64, coef: f64, left_sign: f64) -> Result<Vec<Vec<f64>>> {
    let w = stencil(order)?;
    let scale = -coef / (h * h);
    let mut bands: Vec<Vec<f64>> = (0..w.len()).map(|k| vec![scale * w[k]; m.saturating_sub(k)]).collect();
    // With the order-4 stencil the first and last interior nodes reach one
    // ghost node each, which mirrors back onto themselves.
    if w.len() > 2 && m > 0 {
        bands[0][0] += scale * w[2] * left_sign;
        bands[0][m - 1] -= scale * w[2];
    }
    Ok(bands)
}

impl GridHamiltonian {
    /// Dimension of the unknown vector.
    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    /// Interior node coordinates (radius for radial grids).
    pub fn interior_points(&self) -> Vec<Vec<f64>> {
        let axis = self.grid.axis();
        let d = self.axes();
        (0..self.len())
            .map(|flat| {
                let mut rest = flat;
                let mut p = vec![0.0; d];
                for ax in (0..d).rev() {
                    p[ax] = axis[1 + rest % self.m];
                    rest /= self.m;
                }
                p
            })
            .collect()
    }

    fn axes(&self) -> usize {
        self.grid.dim()
    }

    /// Embeds an interior vector into the full grid with zero boundary values.
    pub fn to_full_grid(&self, v: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let d = self.axes();
        let mut out = vec![0.0; n.pow(d as u32)];
        for (flat, &x) in v.iter().enumerate() {
            let mut rest = flat;
            let mut full = 0;
            let mut stride = 1;
            for _ in 0..d {
                full += (1 + rest % self.m) * stride;
                rest /= self.m;
                stride *= n;
            }
            out[full] = x;
        }
        out
    }

    /// ⟨ψ, Hψ⟩ / ⟨ψ, ψ⟩.
    pub fn expectation(&self, psi: &[f64]) -> Result<f64> {
        if psi.len() != self.len() {
            return invalid(format!(
                "vector length {} does not match operator size {}",
                psi.len(),
                self.len()
            ));
        }
        let nn = dot(psi, psi);
        if nn == 0.0 {
            return invalid("zero vector");
        }
        let mut hp = vec![0.0; psi.len()];
        self.apply(psi, &mut hp);
        Ok(dot(psi, &hp) / nn)
    }

    /// Lower bound min(V) (plus the centrifugal term) on the spectrum.
    pub fn potential_floor(&self) -> f64 {
        self.potential.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

impl SymmetricOperator for GridHamiltonian {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if let Some(b) = &self.banded {
            return b.apply(x, y);
        }
        let d = self.axes();
        let m = self.m;
        let kin = &self.kinetic;
        y.par_iter_mut().enumerate().for_each(|(flat, yi)| {
            let mut s = 0.0;
            let mut stride = 1;
            let mut rest = flat;
            for _ in 0..d {
                let i = rest % m;
                rest /= m;
                s += kin[0][i] * x[flat];
                for (k, band) in kin.iter().enumerate().skip(1) {
                    if i + k < m {
                        s += band[i] * x[flat + k * stride];
                    }
                    if i >= k {
                        s += band[i - k] * x[flat - k * stride];
                    }
                }
                stride *= m;
            }
            *yi = s + self.potential[flat] * x[flat];
        });
    }
}

/// Assembles the discrete Hamiltonian for `v` on `grid` with kinetic mass `mass`.
pub fn build_hamiltonian(
    v: &PotentialSource,
    grid: &GridSpec,
    mass: f64,
    params: &PhysicalParams,
    opts: HamiltonianOptions,
) -> Result<GridHamiltonian> {
    if !(mass > 0.0 && mass.is_finite()) {
        return invalid(format!("mass must be positive, got {mass}"));
    }
    let hbar = params.hbar;
    let coef = hbar * hbar / (2.0 * mass);
    let h = grid.spacing();
    let n = grid.n;
    let m = n - 2;
    let samples = v.sample(grid)?;
    let (boundary, left_sign, potential) = match grid.kind {
        GridKind::Radial { .. } => {
            if v.dim() != 3 {
                return Err(Error::UnsupportedDimension {
                    d: v.dim(),
                    context: "the radial reduction u = rψ is implemented for d = 3".into(),
                });
            }
            let ell = opts.ell as f64;
            let r = grid.axis();
            let pot: Vec<f64> = (1..n - 1)
                .map(|i| samples[i] + coef * ell * (ell + 1.0) / (r[i] * r[i]))
                .collect();
            // u(r) ∼ r^{ℓ+1} has parity (−1)^{ℓ+1} under r → −r.
            let sign = if opts.ell.is_multiple_of(2) { -1.0 } else { 1.0 };
            (Boundary::Radial { ell: opts.ell }, sign, pot)
        }
        GridKind::Box { dim, .. } => {
            let mut pot = Vec::with_capacity(m.pow(dim as u32));
            for flat in 0..m.pow(dim as u32) {
                let mut rest = flat;
                let mut full = 0;
                let mut stride = 1;
                for _ in 0..dim {
                    full += (1 + rest % m) * stride;
                    rest /= m;
                    stride *= n;
                }
                pot.push(samples[full]);
            }
            (Boundary::DirichletBox, -1.0, pot)
        }
    };
    let kinetic = kinetic_bands(m, opts.order, h, coef, left_sign)?;
    let banded = (grid.dim() == 1).then(|| {
        let mut bands = kinetic.clone();
        bands[0].iter_mut().zip(&potential).for_each(|(k, v)| *k += v);
        BandedSymmetric::new(bands)
    });
    Ok(GridHamiltonian {
        grid: *grid,
        mass,
        hbar,
        order: opts.order,
        boundary,
        potential,
        solver: opts.solver,
        m,
        kinetic,
        banded,
    })
}

/// Estimates of one eigenvalue on the grid and on its refinement (n → 2n − 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConvergence {
    pub n: usize,
    pub refined_n: usize,
    pub coarse: f64,
    pub refined: f64,
    /// |coarse − refined|, a conservative bound on the coarse-grid error.
    pub estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit vectors on the interior nodes.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// ‖Hv − λv‖ for unit v.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub convergence: Vec<GridConvergence>,
}

pub fn ground_state(h: &GridHamiltonian) -> Result<SpectralResult> {
    low_spectrum(h, 1)
}

/// The `k` lowest eigenpairs with residual certificates.
pub fn low_spectrum(h: &GridHamiltonian, k: usize) -> Result<SpectralResult> {
    if k == 0 || k > MAX_LEVELS {
        return invalid(format!("number of levels must be in 1..={MAX_LEVELS}, got {k}"));
    }
    let pairs = match &h.banded {
        Some(b) => banded_smallest(b, k, h.solver)?,
        None => lanczos_smallest(h, k, h.solver)?,
    };
    Ok(SpectralResult {
        eigenvalues: pairs.values,
        eigenvectors: Some(pairs.vectors),
        residuals: pairs.residuals,
        iterations: pairs.iterations,
        convergence: Vec::new(),
    })
}

/// Low spectrum on `grid` plus the same levels on the refined grid.
pub fn low_spectrum_converged(
    v: &PotentialSource,
    grid: &GridSpec,
    mass: f64,
    params: &PhysicalParams,
    k: usize,
    opts: HamiltonianOptions,
) -> Result<SpectralResult> {
    let mut coarse = low_spectrum(&build_hamiltonian(v, grid, mass, params, opts)?, k)?;
    let fine_grid = grid.refined();
    let fine = low_spectrum(&build_hamiltonian(v, &fine_grid, mass, params, opts)?, k)?;
    coarse.convergence = coarse
        .eigenvalues
        .iter()
        .zip(&fine.eigenvalues)
        .map(|(&c, &f)| GridConvergence {
            n: grid.n,
            refined_n: fine_grid.n,
            coarse: c,
            refined: f,
            estimate: (c - f).abs(),
        })
        .collect();
    Ok(coarse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelShift {
    pub state_index: usize,
    pub a: f64,
    /// E_k(H_V).
    pub bare: f64,
    /// E_k(H_eff).
    pub effective: f64,
    /// E_k(H_eff) − E_k(H_V).
    pub full: f64,
    /// ⟨ψ_k, (V_eff − V) ψ_k⟩ with ψ_k the H_V eigenvector.
    pub first_order: f64,
}

/// Shift of level `state_index` caused by smoothing V with parameter `a`.
/// The kinetic mass is `params.m`.
pub fn level_shift(
    v: &PotentialSpec,
    a: f64,
    grid: &GridSpec,
    params: &PhysicalParams,
    state_index: usize,
    opts: HamiltonianOptions,
) -> Result<LevelShift> {
    let mut all = level_shifts(v, a, grid, params, state_index + 1, opts)?;
    Ok(all.pop().expect("k >= 1"))
}

/// Shifts of the `k` lowest levels from one pair of solves.
pub fn level_shifts(
    v: &PotentialSpec,
    a: f64,
    grid: &GridSpec,
    params: &PhysicalParams,
    k: usize,
    opts: HamiltonianOptions,
) -> Result<Vec<LevelShift>> {
    let hv = build_hamiltonian(&PotentialSource::Bare(v.clone()), grid, params.m, params, opts)?;
    let veff = effective_potential(v, a, Some(grid))?;
    let he = build_hamiltonian(&PotentialSource::Smoothed(veff), grid, params.m, params, opts)?;
    let sv = low_spectrum(&hv, k)?;
    let se = low_spectrum(&he, k)?;
    let vectors = sv.eigenvectors.as_ref().expect("vectors");
    Ok((0..k)
        .map(|i| {
            let first_order = vectors[i]
                .iter()
                .zip(he.potential.iter().zip(&hv.potential))
                .map(|(p, (e, b))| p * p * (e - b))
                .sum();
            LevelShift {
                state_index: i,
                a,
                bare: sv.eigenvalues[i],
                effective: se.eigenvalues[i],
                full: se.eigenvalues[i] - sv.eigenvalues[i],
                first_order,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    pub a: f64,
    /// inf σ(H_V) on the grid.
    pub bare: f64,
    /// inf σ(H_eff) on the grid.
    pub effective: f64,
    /// effective − bare.
    pub gap: f64,
    /// Combined grid-convergence estimate of both energies.
    pub tolerance: f64,
    pub holds: bool,
}

/// Compares inf σ(H_V) with inf σ(H_eff); a violation beyond the grid
/// tolerance is reported as an invariant violation.
pub fn spectral_inequality_report(
    v: &PotentialSpec,
    a: f64,
    grid: &GridSpec,
    params: &PhysicalParams,
    opts: HamiltonianOptions,
) -> Result<InequalityReport> {
    let bare_src = PotentialSource::Bare(v.clone());
    let sv = low_spectrum_converged(&bare_src, grid, params.m, params, 1, opts)?;
    let coarse = effective_potential(v, a, Some(grid))?;
    let fine_grid = grid.refined();
    let fine = effective_potential(v, a, Some(&fine_grid))?;
    let he = build_hamiltonian(&coarse.into(), grid, params.m, params, opts)?;
    let hf = build_hamiltonian(&fine.into(), &fine_grid, params.m, params, opts)?;
    let e_eff = low_spectrum(&he, 1)?.eigenvalues[0];
    let e_fine = low_spectrum(&hf, 1)?.eigenvalues[0];
    let bare = sv.eigenvalues[0];
    let tolerance = sv.convergence[0].estimate + (e_eff - e_fine).abs() + 1e-12 * (1.0 + bare.abs());
    let report = InequalityReport {
        a,
        bare,
        effective: e_eff,
        gap: e_eff - bare,
        tolerance,
        holds: bare <= e_eff + tolerance,
    };
    if !report.holds {
        return Err(Error::InvariantViolation(format!(
            "inf spectrum of H_V = {bare} exceeds that of H_eff = {e_eff} beyond grid tolerance {tolerance}"
        )));
    }
    Ok(report)
}
