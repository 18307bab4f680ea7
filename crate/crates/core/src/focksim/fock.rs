//! Occupation-number bases, fiber Hamiltonians
//! H₀(P) = dΓ(ħω) − (q/m)Φ_S(P·g) + |P|²/(2m₀) and their coherent ground states.
//!
//! Segal field: Φ_S(f) = (a†(f) + a(f))/√2 with f_c = P·g_c real.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::modes::DiscreteModes;
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, lanczos_smallest, lanczos_smallest_from, norm, CsrMatrix, LanczosOptions, SymmetricOperator};
use crate::model::PhysicalParams;

/// Channel counts above this are refused by the truncated solvers.
pub const MAX_DIAGONALIZED_CHANNELS: usize = 6;
/// Bases up to this size are diagonalized densely.
const DENSE_LIMIT: usize = 300;

/// All occupation vectors over `channels` oscillators with total at most `max_total`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub channels: usize,
    pub max_total: usize,
    states: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl FockBasis {
    /// Basis dimension C(channels + max_total, max_total).
    pub fn dimension_for(channels: usize, max_total: usize) -> u128 {
        binomial(channels + max_total, max_total)
    }

    pub fn new(channels: usize, max_total: usize) -> Result<Self> {
        if channels == 0 {
            return invalid("Fock basis needs at least one channel");
        }
        let dim = Self::dimension_for(channels, max_total);
        if dim > 20_000_000 {
            return invalid(format!("Fock basis of dimension {dim} is too large"));
        }
        if max_total > u16::MAX as usize {
            return invalid("occupation truncation exceeds 65535");
        }
        let mut states = Vec::with_capacity(dim as usize);
        let mut cur = vec![0u16; channels];
        fill(&mut states, &mut cur, 0, max_total);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self {
            channels,
            max_total,
            states,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u16]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Index of the vacuum (all occupations zero).
    pub fn vacuum(&self) -> usize {
        0
    }
}

fn fill(out: &mut Vec<Vec<u16>>, cur: &mut Vec<u16>, pos: usize, left: usize) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for n in 0..=left {
        cur[pos] = n as u16;
        fill(out, cur, pos + 1, left - n);
    }
    cur[pos] = 0;
}

/// Truncation N = ⌈10·Σ|α|²⌉ + 40.
pub fn truncation_for(alphas: &[f64]) -> usize {
    (10.0 * alphas.iter().map(|a| a * a).sum::<f64>()).ceil() as usize + 40
}

fn check_p(modes: &DiscreteModes, p: &[f64]) -> Result<()> {
    if p.len() != modes.dim {
        return invalid(format!(
            "momentum has {} components, modes live in d = {}",
            p.len(),
            modes.dim
        ));
    }
    Ok(())
}

/// f_c = P·g_c.
pub fn test_vector(modes: &DiscreteModes, p: &[f64]) -> Vec<f64> {
    modes.channels.iter().map(|c| dot(&c.g, p)).collect()
}

#[derive(Debug, Clone)]
pub struct FiberHamiltonian {
    pub p: Vec<f64>,
    pub m: f64,
    pub m0: f64,
    pub matrix: CsrMatrix,
}

impl SymmetricOperator for FiberHamiltonian {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.apply(x, y)
    }
}

/// Matrix of H₀(P) in `basis`. The interaction uses the mass `params.m`; the
/// kinetic term uses `m0`.
pub fn fiber_hamiltonian(
    modes: &DiscreteModes,
    basis: &FockBasis,
    p: &[f64],
    params: &PhysicalParams,
    m0: f64,
) -> Result<FiberHamiltonian> {
    check_p(modes, p)?;
    if basis.channels != modes.channel_count() {
        return invalid(format!(
            "basis has {} channels but the modes provide {}",
            basis.channels,
            modes.channel_count()
        ));
    }
    if !(m0 > 0.0 && m0.is_finite()) {
        return invalid(format!("bare mass must be positive, got {m0}"));
    }
    let f = test_vector(modes, p);
    let theta: Vec<f64> = f
        .iter()
        .map(|fc| -params.q / params.m * fc / std::f64::consts::SQRT_2)
        .collect();
    let energies: Vec<f64> = modes.channels.iter().map(|c| params.hbar * c.omega).collect();
    let kinetic = dot(p, p) / (2.0 * m0);
    let rows: Vec<Vec<(usize, f64)>> = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let occ = basis.state(i);
            let mut row = Vec::with_capacity(2 * occ.len() + 1);
            let diag: f64 = occ.iter().zip(&energies).map(|(&n, e)| n as f64 * e).sum::<f64>() + kinetic;
            row.push((i, diag));
            let mut nb = occ.to_vec();
            for c in 0..occ.len() {
                if theta[c] == 0.0 {
                    continue;
                }
                let n = occ[c];
                if n > 0 {
                    nb[c] = n - 1;
                    row.push((basis.index_of(&nb).unwrap(), theta[c] * (n as f64).sqrt()));
                }
                nb[c] = n + 1;
                if let Some(j) = basis.index_of(&nb) {
                    row.push((j, theta[c] * (n as f64 + 1.0).sqrt()));
                }
                nb[c] = n;
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(FiberHamiltonian {
        p: p.to_vec(),
        m: params.m,
        m0,
        matrix: CsrMatrix::from_rows(rows),
    })
}

/// E₀(P) = −(q²/(2m²ħ)) Σ_c (P·g_c)²/ω_c + |P|²/(2m₀).
pub fn fiber_ground_energy_exact(modes: &DiscreteModes, p: &[f64], params: &PhysicalParams, m0: f64) -> Result<f64> {
    check_p(modes, p)?;
    let f = test_vector(modes, p);
    let s: f64 = f.iter().zip(&modes.channels).map(|(fc, c)| fc * fc / c.omega).sum();
    Ok(-params.q * params.q / (2.0 * params.m * params.m * params.hbar) * s + dot(p, p) / (2.0 * m0))
}

/// Bare mass from the discrete mass relation 1/m₀ = 1/m + (q²/(m²ħ))·μ, where
/// μ = tr(Σ_c g_c g_cᵀ/ω_c)/d. For an angular rule exact on quadratics the
/// tensor is μ·Id and E₀(P) = |P|²/(2m) for every P.
pub fn discrete_bare_mass(modes: &DiscreteModes, params: &PhysicalParams) -> f64 {
    let d = modes.dim;
    let t = modes.coupling_tensor(1);
    let mu = (0..d).map(|i| t[i * d + i]).sum::<f64>() / d as f64;
    1.0 / (1.0 / params.m + params.q * params.q / (params.m * params.m * params.hbar) * mu)
}

/// Ground energy of the truncated fiber Hamiltonian, dense for small bases.
pub fn truncated_ground_energy(h: &FiberHamiltonian) -> Result<f64> {
    truncated_ground_state(h).map(|(e, _)| e)
}

/// Ground energy and unit eigenvector of the truncated fiber Hamiltonian.
pub fn truncated_ground_state(h: &FiberHamiltonian) -> Result<(f64, Vec<f64>)> {
    truncated_ground_state_from(h, None)
}

fn truncated_ground_state_from(h: &FiberHamiltonian, guess: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
    let n = h.matrix.dim();
    if n <= DENSE_LIMIT {
        let eig = SymmetricEigen::new(h.matrix.to_dense());
        let (i, &e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        return Ok((e, eig.eigenvectors.column(i).iter().copied().collect()));
    }
    let opts = LanczosOptions {
        tol: 1e-10,
        ..Default::default()
    };
    let pairs = match guess {
        Some(g) => lanczos_smallest_from(h, 1, opts, g)?,
        None => lanczos_smallest(h, 1, opts)?,
    };
    Ok((pairs.values[0], pairs.vectors[0].clone()))
}

/// Truncated ground energies for N = 0, 1, …, `max_total`.
pub fn truncation_sweep(
    modes: &DiscreteModes,
    p: &[f64],
    params: &PhysicalParams,
    m0: f64,
    max_total: usize,
) -> Result<Vec<f64>> {
    if modes.channel_count() > MAX_DIAGONALIZED_CHANNELS {
        return Err(Error::Unsupported(format!(
            "truncated diagonalization is limited to {MAX_DIAGONALIZED_CHANNELS} channels, got {}",
            modes.channel_count()
        )));
    }
    let mut energies = Vec::with_capacity(max_total + 1);
    let mut prev: Option<(FockBasis, Vec<f64>)> = None;
    for n in 0..=max_total {
        let basis = FockBasis::new(modes.channel_count(), n)?;
        let h = fiber_hamiltonian(modes, &basis, p, params, m0)?;
        // The previous ground state, embedded, starts the next solve.
        let guess = prev.as_ref().map(|(old, v)| {
            let mut g = vec![0.0; basis.len()];
            for (i, x) in v.iter().enumerate() {
                g[basis.index_of(old.state(i)).expect("nested bases")] = *x;
            }
            g
        });
        let (e, v) = truncated_ground_state_from(&h, guess.as_deref())?;
        energies.push(e);
        prev = Some((basis, v));
    }
    Ok(energies)
}

/// Φ₀(P) = ⊗_c (coherent state with real amplitude α_c) expanded in a basis.
#[derive(Debug, Clone, Serialize)]
pub struct CoherentState {
    /// α_c = q·(P·g_c)/(√2·m·ħ·ω_c).
    pub alphas: Vec<f64>,
    /// Coefficients Π_c e^{−α_c²/2} α_c^{n_c}/√(n_c!) on the basis states.
    #[serde(skip)]
    pub coefficients: Vec<f64>,
}

impl CoherentState {
    /// Squared norm of the truncated expansion.
    pub fn truncated_norm_sqr(&self) -> f64 {
        dot(&self.coefficients, &self.coefficients)
    }
}

pub fn coherent_amplitudes(modes: &DiscreteModes, p: &[f64], params: &PhysicalParams) -> Result<Vec<f64>> {
    check_p(modes, p)?;
    let f = test_vector(modes, p);
    Ok(f.iter()
        .zip(&modes.channels)
        .map(|(fc, c)| params.q * fc / (std::f64::consts::SQRT_2 * params.m * params.hbar * c.omega))
        .collect())
}

/// Ground state Φ₀(P) of the fiber Hamiltonian truncated to `basis`.
pub fn coherent_ground(
    modes: &DiscreteModes,
    p: &[f64],
    params: &PhysicalParams,
    basis: &FockBasis,
) -> Result<CoherentState> {
    if basis.channels != modes.channel_count() {
        return invalid("basis and modes disagree on the channel count");
    }
    let alphas = coherent_amplitudes(modes, p, params)?;
    // Per channel, table of e^{−α²/2} α^n/√(n!) for n ≤ N.
    let tables: Vec<Vec<f64>> = alphas
        .iter()
        .map(|&a| {
            let mut t = Vec::with_capacity(basis.max_total + 1);
            t.push((-a * a / 2.0).exp());
            for n in 1..=basis.max_total {
                let prev = t[n - 1];
                t.push(prev * a / (n as f64).sqrt());
            }
            t
        })
        .collect();
    let coefficients = (0..basis.len())
        .map(|i| {
            basis
                .state(i)
                .iter()
                .zip(&tables)
                .map(|(&n, t)| t[n as usize])
                .product()
        })
        .collect();
    Ok(CoherentState { alphas, coefficients })
}

/// ‖HΦ − EΦ‖/‖Φ‖ within the truncated space.
pub fn eigen_residual(h: &FiberHamiltonian, state: &[f64], energy: f64) -> f64 {
    let mut y = vec![0.0; state.len()];
    h.apply(state, &mut y);
    y.iter_mut().zip(state).for_each(|(yi, xi)| *yi -= energy * xi);
    norm(&y) / norm(state)
}

/// ⟨Φ, Φ′⟩ computed coefficient by coefficient.
pub fn truncated_inner_product(a: &CoherentState, b: &CoherentState) -> Result<f64> {
    if a.coefficients.len() != b.coefficients.len() {
        return invalid("states live in different bases");
    }
    Ok(dot(&a.coefficients, &b.coefficients))
}

/// Closed-form overlap ⟨Φ₀(P), Φ₀(P′)⟩ = exp(−q²Σ_c((P−P′)·g_c)²/ω_c²/(4m²ħ²)).
pub fn overlap(modes: &DiscreteModes, p: &[f64], p2: &[f64], params: &PhysicalParams) -> Result<f64> {
    check_p(modes, p)?;
    check_p(modes, p2)?;
    let dp: Vec<f64> = p.iter().zip(p2).map(|(a, b)| a - b).collect();
    Ok((-overlap_exponent(modes, &dp, params)).exp())
}

/// q²Σ_c(ΔP·g_c)²/ω_c²/(4m²ħ²).
pub fn overlap_exponent(modes: &DiscreteModes, dp: &[f64], params: &PhysicalParams) -> f64 {
    let s: f64 = modes
        .channels
        .iter()
        .map(|c| dot(&c.g, dp).powi(2) / (c.omega * c.omega))
        .sum();
    params.q * params.q * s / (4.0 * params.m * params.m * params.hbar * params.hbar)
}

/// Continuum limit exp(−a|ΔP|²/ħ²).
pub fn continuum_overlap(a: f64, dp: &[f64], hbar: f64) -> f64 {
    (-a * dot(dp, dp) / (hbar * hbar)).exp()
}

/// Dense matrix of H₀(P), for small bases.
pub fn dense_matrix(h: &FiberHamiltonian) -> DMatrix<f64> {
    h.matrix.to_dense()
}

#[cfg(test)]
mod tests {
    use super::super::modes::ModeNode;
    use super::*;

    fn single(q: f64) -> (DiscreteModes, PhysicalParams) {
        let p = PhysicalParams::natural(2).with_charge(q);
        let node = ModeNode {
            k: vec![0.0, 1.0],
            weight: 1.0,
            omega: 1.0,
            rho: 1.0,
        };
        (DiscreteModes::from_nodes(&p, &[node]).unwrap(), p)
    }

    #[test]
    fn basis_dimension_and_vacuum() {
        let b = FockBasis::new(3, 5).unwrap();
        assert_eq!(b.len() as u128, FockBasis::dimension_for(3, 5));
        assert_eq!(b.len(), 56);
        assert_eq!(b.state(b.vacuum()), &[0, 0, 0]);
        assert_eq!(b.index_of(&[1, 2, 2]).map(|i| b.state(i).to_vec()), Some(vec![1, 2, 2]));
        assert_eq!(b.index_of(&[3, 3, 0]), None);
    }

    #[test]
    fn decoupled_fiber_is_diagonal() {
        let (modes, params) = single(0.0);
        let basis = FockBasis::new(1, 10).unwrap();
        let h = fiber_hamiltonian(&modes, &basis, &[0.3, 0.4], &params, 1.0).unwrap();
        assert_eq!(h.matrix.nnz(), basis.len());
        assert!((truncated_ground_energy(&h).unwrap() - 0.125).abs() < 1e-15);
        assert!((h.matrix.get(0, 0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn displaced_oscillator() {
        let (modes, params) = single(0.7);
        let p = [0.2, -1.1];
        let basis = FockBasis::new(1, 40).unwrap();
        let h = fiber_hamiltonian(&modes, &basis, &p, &params, 0.9).unwrap();
        let f = test_vector(&modes, &p)[0];
        let theta = -0.7 * f / std::f64::consts::SQRT_2;
        let exact = dot(&p, &p) / 1.8 - theta * theta;
        assert!((truncated_ground_energy(&h).unwrap() - exact).abs() < 1e-12);
        assert!((fiber_ground_energy_exact(&modes, &p, &params, 0.9).unwrap() - exact).abs() < 1e-14);
        assert!(h.matrix.asymmetry() < 1e-13);
    }

    #[test]
    fn coherent_state_is_eigenvector() {
        let (modes, params) = single(1.3);
        let p = [0.5, 0.8];
        let alphas = coherent_amplitudes(&modes, &p, &params).unwrap();
        let basis = FockBasis::new(1, truncation_for(&alphas)).unwrap();
        let h = fiber_hamiltonian(&modes, &basis, &p, &params, 1.0).unwrap();
        let phi = coherent_ground(&modes, &p, &params, &basis).unwrap();
        let e0 = fiber_ground_energy_exact(&modes, &p, &params, 1.0).unwrap();
        assert!(eigen_residual(&h, &phi.coefficients, e0) <= 1e-8);
        let vac = FockBasis::new(1, 0).unwrap();
        let phi0 = coherent_ground(&modes, &p, &params, &vac).unwrap();
        assert!((phi0.truncated_norm_sqr() - (-alphas[0] * alphas[0]).exp()).abs() < 1e-15);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let (modes, params) = single(1.0);
        let basis = FockBasis::new(2, 3).unwrap();
        assert!(fiber_hamiltonian(&modes, &basis, &[0.0, 1.0], &params, 1.0).is_err());
        assert!(fiber_hamiltonian(&modes, &FockBasis::new(1, 3).unwrap(), &[1.0], &params, 1.0).is_err());
    }
}
