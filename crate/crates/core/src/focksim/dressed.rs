//! The quadratic form of the dressed state ψ_dr = Σ_P ψ̂(P)·Φ₀(P) ⊗ |P⟩:
//! kinetic part Σ |P|²/(2m)|ψ̂|² and potential part ∫ V(x)‖ψ_dr(x)‖² dx,
//! where ‖ψ_dr(x)‖² carries the overlap kernel ⟨Φ₀(P), Φ₀(P′)⟩.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::Serialize;

use super::fock::overlap_exponent;
use super::modes::DiscreteModes;
use crate::error::{invalid, Error, Result};
use crate::fft::fft_nd;
use crate::model::PhysicalParams;
use crate::potentials::PotentialSpec;

/// Periodic position/momentum lattice with `n` points per axis:
/// x_i = (i − n/2)·h with h = L/n, and P_k = 2πħk/L for k = −n/2, …, n/2 − 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceGrid {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub hbar: f64,
}

impl PhaseSpaceGrid {
    pub fn new(dim: usize, n: usize, length: f64, hbar: f64) -> Result<Self> {
        if dim == 0 || n < 8 || !n.is_multiple_of(2) {
            return invalid("phase-space grid needs d ≥ 1 and an even n ≥ 8");
        }
        if !(length > 0.0 && hbar > 0.0) {
            return invalid("phase-space grid needs positive length and ħ");
        }
        Ok(Self { dim, n, length, hbar })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar / self.length
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for ax in (0..self.dim).rev() {
            idx[ax] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// Position of a flat node index.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let h = self.dx();
        self.unravel(flat)
            .iter()
            .map(|&i| (i as f64 - (self.n / 2) as f64) * h)
            .collect()
    }

    /// Momentum of a flat node index.
    pub fn momentum(&self, flat: usize) -> Vec<f64> {
        let dp = self.dp();
        self.unravel(flat)
            .iter()
            .map(|&i| (i as f64 - (self.n / 2) as f64) * dp)
            .collect()
    }
}

/// ψ̂ sampled on the momentum lattice, with ΔP^d Σ|ψ̂|² = 1.
#[derive(Debug, Clone)]
pub struct MomentumWavefunction {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<Complex64>,
}

impl MomentumWavefunction {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} momentum samples, got {}",
                grid.len(),
                values.len()
            ));
        }
        let psi = Self { grid, values };
        let nrm = psi.norm_sqr();
        if (nrm - 1.0).abs() > 1e-8 {
            return invalid(format!("momentum wavefunction has squared norm {nrm}, expected 1"));
        }
        Ok(psi)
    }

    /// ψ̂(P) ∝ exp(−σ²|P|²/ħ²), so |ψ(x)|² is a Gaussian with variance σ² per axis.
    /// Normalized on the lattice.
    pub fn gaussian(grid: PhaseSpaceGrid, sigma: f64) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return invalid("Gaussian width must be positive");
        }
        let s2 = sigma * sigma / (grid.hbar * grid.hbar);
        let mut values: Vec<Complex64> = (0..grid.len())
            .map(|f| {
                let p2: f64 = grid.momentum(f).iter().map(|p| p * p).sum();
                Complex64::new((-s2 * p2).exp(), 0.0)
            })
            .collect();
        let nrm = (grid.dp().powi(grid.dim as i32) * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
        values.iter_mut().for_each(|v| *v /= nrm);
        Ok(Self { grid, values })
    }

    /// ΔP^d Σ|ψ̂|².
    pub fn norm_sqr(&self) -> f64 {
        self.grid.dp().powi(self.grid.dim as i32) * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// The overlap ⟨Φ₀(P), Φ₀(P′)⟩ as a function of ΔP = P′ − P.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OverlapKernel {
    /// exp(−a|ΔP|²/ħ²).
    Continuum { a: f64 },
    /// exp(−ΔPᵀ A ΔP) with A = q²Σ_c g_c g_cᵀ/ω_c²/(4m²ħ²), row-major d×d.
    Modes { matrix: Vec<f64> },
}

impl OverlapKernel {
    pub fn from_modes(modes: &DiscreteModes, params: &PhysicalParams) -> Self {
        let d = modes.dim;
        let mut matrix = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        // A is recovered from the exponent on the coordinate axes and their sums.
        for i in 0..d {
            e.fill(0.0);
            e[i] = 1.0;
            matrix[i * d + i] = overlap_exponent(modes, &e, params);
        }
        for i in 0..d {
            for j in (i + 1)..d {
                e.fill(0.0);
                e[i] = 1.0;
                e[j] = 1.0;
                let both = overlap_exponent(modes, &e, params);
                let off = 0.5 * (both - matrix[i * d + i] - matrix[j * d + j]);
                matrix[i * d + j] = off;
                matrix[j * d + i] = off;
            }
        }
        Self::Modes { matrix }
    }

    pub fn value(&self, dp: &[f64], hbar: f64) -> f64 {
        match self {
            Self::Continuum { a } => (-a * dp.iter().map(|x| x * x).sum::<f64>() / (hbar * hbar)).exp(),
            Self::Modes { matrix } => {
                let d = dp.len();
                let mut s = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        s += dp[i] * matrix[i * d + j] * dp[j];
                    }
                }
                (-s).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedForm {
    pub kinetic: f64,
    pub potential: f64,
}

impl DressedForm {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Dressed density ‖ψ_dr(x_i)‖² on the position lattice.
///
/// With C(q) = ΔP^d Σ_P conj ψ̂(P) ψ̂(P + q) the density is
/// L^{−d} Σ_q C(q) K(q) e^{i q·x/ħ}; the lags q are collected by a
/// zero-padded FFT and folded onto the n-point lattice.
pub fn dressed_density(psi: &MomentumWavefunction, kernel: &OverlapKernel) -> Vec<f64> {
    let g = psi.grid;
    let (d, n) = (g.dim, g.n);
    let big = 2 * n;
    let mut pad = ArrayD::<Complex64>::zeros(IxDyn(&vec![big; d]));
    for (flat, v) in psi.values.iter().enumerate() {
        let idx = g.unravel(flat);
        pad[IxDyn(&idx)] = *v;
    }
    fft_nd(&mut pad, false);
    pad.mapv_inplace(|z| Complex64::new(z.norm_sqr(), 0.0));
    fft_nd(&mut pad, true);
    let corr_scale = g.dp().powi(d as i32) / (big as f64).powi(d as i32);
    let dp = g.dp();

    let mut folded = ArrayD::<Complex64>::zeros(IxDyn(&vec![n; d]));
    let mut lag = vec![0.0; d];
    let mut fold_idx = vec![0usize; d];
    for (idx, c) in pad.indexed_iter() {
        let mut parity = 0usize;
        for ax in 0..d {
            let q = idx[ax] as i64;
            let q = if q >= n as i64 { q - big as i64 } else { q };
            lag[ax] = q as f64 * dp;
            parity += q.unsigned_abs() as usize;
            fold_idx[ax] = q.rem_euclid(n as i64) as usize;
        }
        // x_0 = −(n/2)h contributes the phase e^{−iπq} = (−1)^q.
        let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        folded[IxDyn(&fold_idx)] += *c * (corr_scale * sign * kernel.value(&lag, g.hbar));
    }
    fft_nd(&mut folded, true);
    let scale = g.length.powi(-(d as i32));
    let mut out = vec![0.0; g.len()];
    for (idx, z) in folded.indexed_iter() {
        let mut flat = 0;
        for ax in 0..d {
            flat = flat * n + idx[ax];
        }
        out[flat] = scale * z.re;
    }
    out
}

/// Kinetic and potential parts of the dressed quadratic form with kinetic mass `params.m`.
pub fn dressed_quadratic_form(
    psi: &MomentumWavefunction,
    v: &PotentialSpec,
    kernel: &OverlapKernel,
    params: &PhysicalParams,
) -> Result<DressedForm> {
    let g = psi.grid;
    if v.dim != g.dim {
        return invalid(format!(
            "potential lives in d = {} but the wavefunction in d = {}",
            v.dim, g.dim
        ));
    }
    let nrm = psi.norm_sqr();
    if (nrm - 1.0).abs() > 1e-8 {
        return invalid(format!("momentum wavefunction has squared norm {nrm}, expected 1"));
    }
    let vol_p = g.dp().powi(g.dim as i32);
    let kinetic = vol_p
        * psi
            .values
            .iter()
            .enumerate()
            .map(|(f, z)| g.momentum(f).iter().map(|p| p * p).sum::<f64>() / (2.0 * params.m) * z.norm_sqr())
            .sum::<f64>();
    let mut vx = Vec::with_capacity(g.len());
    for f in 0..g.len() {
        let val = v.value_at(&g.position(f));
        if !val.is_finite() {
            return Err(Error::UnsupportedPotential(format!(
                "potential is singular at a lattice node ({val}); supply a regular potential"
            )));
        }
        vx.push(val);
    }
    let rho = dressed_density(psi, kernel);
    let potential = g.dx().powi(g.dim as i32) * vx.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>();
    Ok(DressedForm { kinetic, potential })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ V ρ_dr by the literal double sum over momentum pairs.
    fn double_sum(psi: &MomentumWavefunction, v: &PotentialSpec, kernel: &OverlapKernel) -> f64 {
        let g = psi.grid;
        let (dx, dp) = (g.dx(), g.dp());
        let pref = (dp / (2.0 * std::f64::consts::PI * g.hbar)).powi(2 * g.dim as i32) * dx.powi(g.dim as i32);
        let mut total = Complex64::default();
        for xi in 0..g.len() {
            let x = g.position(xi);
            let vx = v.value_at(&x);
            for a in 0..g.len() {
                let pa = g.momentum(a);
                for b in 0..g.len() {
                    let pb = g.momentum(b);
                    let dpv: Vec<f64> = pb.iter().zip(&pa).map(|(u, w)| u - w).collect();
                    let phase: f64 = dpv.iter().zip(&x).map(|(u, w)| u * w).sum::<f64>() / g.hbar;
                    total += psi.values[a].conj()
                        * psi.values[b]
                        * kernel.value(&dpv, g.hbar)
                        * Complex64::from_polar(1.0, phase)
                        * vx;
                }
            }
        }
        // (ΔP/2πħ)^{2d}·(2πħ)^d ... collapses to L^{−d} per momentum pair.
        (total * pref * (2.0 * std::f64::consts::PI * g.hbar).powi(g.dim as i32)).re
    }

    #[test]
    fn fft_density_matches_double_sum() {
        let g = PhaseSpaceGrid::new(1, 16, 12.0, 1.0).unwrap();
        let mut psi = MomentumWavefunction::gaussian(g, 0.8).unwrap();
        // Break the symmetry so odd lags matter.
        for (f, z) in psi.values.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, 0.3 * g.momentum(f)[0]);
        }
        let v = PotentialSpec::harmonic(1, 1.3).unwrap();
        for kernel in [OverlapKernel::Continuum { a: 0.0 }, OverlapKernel::Continuum { a: 0.2 }] {
            let fast = dressed_quadratic_form(&psi, &v, &kernel, &PhysicalParams::natural(3)).unwrap();
            let slow = double_sum(&psi, &v, &kernel);
            assert!(
                (fast.potential - slow).abs() < 1e-12 * slow.abs(),
                "{} {}",
                fast.potential,
                slow
            );
        }
    }

    #[test]
    fn undressed_limit_is_plain_expectation() {
        let g = PhaseSpaceGrid::new(2, 32, 16.0, 1.0).unwrap();
        let psi = MomentumWavefunction::gaussian(g, 1.0).unwrap();
        let v = PotentialSpec::harmonic(2, 1.0).unwrap();
        let f = dressed_quadratic_form(
            &psi,
            &v,
            &OverlapKernel::Continuum { a: 0.0 },
            &PhysicalParams::natural(2),
        )
        .unwrap();
        assert!((f.potential - 1.0).abs() < 1e-10, "{}", f.potential);
        assert!((f.kinetic - 0.25).abs() < 1e-10);
    }

    #[test]
    fn rejects_unnormalized_and_singular_input() {
        let g = PhaseSpaceGrid::new(1, 16, 10.0, 1.0).unwrap();
        assert!(MomentumWavefunction::new(g, vec![Complex64::new(1.0, 0.0); 16]).is_err());
        let g3 = PhaseSpaceGrid::new(3, 8, 8.0, 1.0).unwrap();
        let psi = MomentumWavefunction::gaussian(g3, 1.0).unwrap();
        let v = PotentialSpec::coulomb(1.0).unwrap();
        let r = dressed_quadratic_form(
            &psi,
            &v,
            &OverlapKernel::Continuum { a: 0.1 },
            &PhysicalParams::natural(3),
        );
        assert!(matches!(r, Err(Error::UnsupportedPotential(_))));
    }
}
