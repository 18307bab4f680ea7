//! Finite photon-mode discretizations with polarization frames and the
//! coupling vectors g = √(ħ/(ε₀ω))·ρ̂·√w·e.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{field_moment, unit_sphere_area, FieldModel, PhysicalParams};
use crate::quad::gauss_legendre;

/// A wavevector node with its quadrature weight and field data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeNode {
    pub k: Vec<f64>,
    pub weight: f64,
    pub omega: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub k: Vec<f64>,
    pub weight: f64,
    pub omega: f64,
    pub rho: f64,
    /// d − 1 unit vectors orthogonal to k and to each other.
    pub polarizations: Vec<Vec<f64>>,
}

/// One oscillator: a mode with a fixed polarization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    pub mode: usize,
    pub polarization: usize,
    pub omega: f64,
    /// Coupling vector g in ℝ^d.
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteModes {
    pub dim: usize,
    pub modes: Vec<Mode>,
    pub channels: Vec<Channel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngularRule {
    /// `n` equally spaced directions on the circle (d = 2).
    EqualAngles(usize),
    /// Spherical design exact to the given polynomial degree (d = 3):
    /// octahedron up to 3, icosahedron up to 5.
    SphericalDesign(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RadialRule {
    GaussLegendre,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModePreset {
    /// Two radial nodes along a single direction; 2(d − 1) channels.
    Tiny,
    /// 16 radial nodes times the angular rule.
    Medium,
    /// 32 radial nodes times the angular rule.
    Fine,
}

/// Orthonormal complement of k̂ from Gram–Schmidt over the candidates
/// e_d, e_1, …, e_{d−1}; candidates nearly parallel to the span so far are skipped.
pub fn polarization_frame(k: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = k.len();
    let kn = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(kn > 0.0 && kn.is_finite()) {
        return invalid("wavevector must be non-zero and finite");
    }
    let mut basis = vec![k.iter().map(|x| x / kn).collect::<Vec<f64>>()];
    let candidates = std::iter::once(d - 1).chain(0..d - 1);
    for c in candidates {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[c] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn > 1e-3 {
            basis.push(v.iter().map(|x| x / vn).collect());
        }
    }
    basis.remove(0);
    Ok(basis)
}

fn equal_angles(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn octahedron() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for axis in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; 3];
            v[axis] = s;
            out.push(v);
        }
    }
    out
}

fn icosahedron() -> Vec<Vec<f64>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let mut out = Vec::new();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            out.push(vec![0.0, s1, s2 * phi]);
            out.push(vec![s1, s2 * phi, 0.0]);
            out.push(vec![s2 * phi, 0.0, s1]);
        }
    }
    out.iter().map(|v| v.iter().map(|x| x / norm).collect()).collect()
}

/// Unit directions of an angular rule with equal weights.
pub fn angular_nodes(dim: usize, rule: AngularRule) -> Result<Vec<Vec<f64>>> {
    match (dim, rule) {
        (2, AngularRule::EqualAngles(n)) if n >= 3 => Ok(equal_angles(n)),
        (2, AngularRule::EqualAngles(n)) => Err(Error::Unsupported(format!(
            "{n} equal angles do not integrate quadratics exactly; need at least 3"
        ))),
        (3, AngularRule::SphericalDesign(order)) if order <= 3 => Ok(octahedron()),
        (3, AngularRule::SphericalDesign(order)) if order <= 5 => Ok(icosahedron()),
        (3, AngularRule::SphericalDesign(order)) => Err(Error::Unsupported(format!(
            "no spherical design of order {order} is available"
        ))),
        (d, rule) => Err(Error::Unsupported(format!(
            "angular rule {rule:?} is not available in d = {d}"
        ))),
    }
}

impl DiscreteModes {
    /// Modes from explicit nodes, with polarization frames from [`polarization_frame`].
    pub fn from_nodes(params: &PhysicalParams, nodes: &[ModeNode]) -> Result<Self> {
        params.validate()?;
        let dim = params.d;
        let mut modes = Vec::with_capacity(nodes.len());
        let mut channels = Vec::new();
        for (j, node) in nodes.iter().enumerate() {
            if node.k.len() != dim {
                return invalid(format!("mode {j} has {} components, expected {dim}", node.k.len()));
            }
            if !(node.omega > 0.0 && node.omega.is_finite()) {
                return Err(Error::Divergence(format!(
                    "mode {j} has non-positive frequency {}",
                    node.omega
                )));
            }
            if !(node.weight > 0.0 && node.weight.is_finite()) {
                return invalid(format!("mode {j} has non-positive weight {}", node.weight));
            }
            let polarizations = polarization_frame(&node.k)?;
            let amp = (params.hbar / (params.eps0 * node.omega)).sqrt() * node.rho * node.weight.sqrt();
            for (l, e) in polarizations.iter().enumerate() {
                channels.push(Channel {
                    mode: j,
                    polarization: l,
                    omega: node.omega,
                    g: e.iter().map(|x| amp * x).collect(),
                });
            }
            modes.push(Mode {
                k: node.k.clone(),
                weight: node.weight,
                omega: node.omega,
                rho: node.rho,
                polarizations,
            });
        }
        Ok(Self { dim, modes, channels })
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Î_p = Σ_j w_j ρ̂_j²/ω_j^p.
    pub fn moment(&self, p: u32) -> f64 {
        self.modes
            .iter()
            .map(|m| m.weight * m.rho * m.rho / m.omega.powi(p as i32))
            .sum()
    }

    /// Σ_c g_c g_cᵀ / ω_c^p as a row-major d×d matrix.
    pub fn coupling_tensor(&self, p: u32) -> Vec<f64> {
        let d = self.dim;
        let mut t = vec![0.0; d * d];
        for c in &self.channels {
            let s = 1.0 / c.omega.powi(p as i32);
            for i in 0..d {
                for j in 0..d {
                    t[i * d + j] += s * c.g[i] * c.g[j];
                }
            }
        }
        t
    }

    /// Largest deviation of Σ_λ e e ᵀ from Id − k̂k̂ᵀ over all modes.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for m in &self.modes {
            let kn2: f64 = m.k.iter().map(|x| x * x).sum();
            for i in 0..d {
                for j in 0..d {
                    let id = if i == j { 1.0 } else { 0.0 };
                    let sum: f64 = m.polarizations.iter().map(|e| e[i] * e[j]).sum();
                    worst = worst.max((sum - (id - m.k[i] * m.k[j] / kn2)).abs());
                }
            }
        }
        worst
    }
}

/// Product quadrature of the field: radial rule on the form-factor support
/// times an equal-weight angular rule.
pub fn discretize_field(
    field: &FieldModel,
    radial_points: usize,
    angular: AngularRule,
    radial: RadialRule,
) -> Result<DiscreteModes> {
    let d = field.dim();
    if radial_points == 0 {
        return invalid("need at least one radial node");
    }
    let dirs = angular_nodes(d, angular)?;
    let (lo, hi) = field.support();
    let (r, w) = radial_nodes(lo, hi, radial_points, radial);
    let area = unit_sphere_area(d) / dirs.len() as f64;
    let mut nodes = Vec::with_capacity(r.len() * dirs.len());
    for (&ri, &wi) in r.iter().zip(&w) {
        for u in &dirs {
            nodes.push(ModeNode {
                k: u.iter().map(|x| ri * x).collect(),
                weight: wi * ri.powi(d as i32 - 1) * area,
                omega: field.omega(ri),
                rho: field.rho(ri),
            });
        }
    }
    DiscreteModes::from_nodes(&field.params, &nodes)
}

fn radial_nodes(lo: f64, hi: f64, n: usize, rule: RadialRule) -> (Vec<f64>, Vec<f64>) {
    match rule {
        RadialRule::GaussLegendre => gauss_legendre(n, lo, hi),
        RadialRule::Midpoint => {
            let h = (hi - lo) / n as f64;
            ((0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(), vec![h; n])
        }
    }
}

/// Preset discretizations of a field.
pub fn preset_modes(field: &FieldModel, preset: ModePreset) -> Result<DiscreteModes> {
    let d = field.dim();
    let angular = match d {
        2 => AngularRule::EqualAngles(16),
        3 => AngularRule::SphericalDesign(5),
        _ => return Err(Error::Unsupported(format!("no mode presets for d = {d}"))),
    };
    match preset {
        ModePreset::Tiny => {
            let (lo, hi) = field.support();
            let (r, w) = gauss_legendre(2, lo, hi);
            let s = unit_sphere_area(d);
            let nodes: Vec<ModeNode> = r
                .iter()
                .zip(&w)
                .map(|(&ri, &wi)| {
                    let mut k = vec![0.0; d];
                    k[d - 1] = ri;
                    ModeNode {
                        k,
                        weight: wi * ri.powi(d as i32 - 1) * s,
                        omega: field.omega(ri),
                        rho: field.rho(ri),
                    }
                })
                .collect();
            DiscreteModes::from_nodes(&field.params, &nodes)
        }
        ModePreset::Medium => discretize_field(field, 16, angular, RadialRule::GaussLegendre),
        ModePreset::Fine => discretize_field(field, 32, angular, RadialRule::GaussLegendre),
    }
}

/// Relative error of the discrete moment Î_p against the quadrature of the field.
pub fn moment_error(modes: &DiscreteModes, field: &FieldModel, p: u32) -> Result<f64> {
    let exact = field_moment(field, p)?;
    Ok((modes.moment(p) - exact).abs() / exact.abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell(d: usize) -> FieldModel {
        FieldModel::sharp_shell(PhysicalParams::natural(d), 1.0, std::f64::consts::E).unwrap()
    }

    #[test]
    fn frames_are_orthonormal() {
        for k in [
            vec![0.0, 0.0, 2.0],
            vec![1.0, -2.0, 0.5],
            vec![0.0, 3.0, 0.0],
            vec![1e-9, 0.0, -1.0],
        ] {
            let f = polarization_frame(&k).unwrap();
            assert_eq!(f.len(), 2);
            let kn = k.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (i, e) in f.iter().enumerate() {
                let ek: f64 = e.iter().zip(&k).map(|(a, b)| a * b).sum();
                assert!(ek.abs() / kn < 1e-12);
                for (j, e2) in f.iter().enumerate() {
                    let p: f64 = e.iter().zip(e2).map(|(a, b)| a * b).sum();
                    assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn planar_angular_average() {
        let p = PhysicalParams::natural(2);
        let nodes: Vec<ModeNode> = equal_angles(8)
            .into_iter()
            .map(|k| ModeNode {
                k,
                weight: 2.0 * std::f64::consts::PI,
                omega: 1.0,
                rho: 1.0,
            })
            .collect();
        let modes = DiscreteModes::from_nodes(&p, &nodes).unwrap();
        let u = [0.3, -1.7];
        let avg: f64 = modes
            .modes
            .iter()
            .map(|m| (u[0] * m.polarizations[0][0] + u[1] * m.polarizations[0][1]).powi(2))
            .sum::<f64>()
            / 8.0;
        assert!((avg - (u[0] * u[0] + u[1] * u[1]) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn designs_are_exact_for_quadratics() {
        for rule in [AngularRule::SphericalDesign(3), AngularRule::SphericalDesign(5)] {
            let dirs = angular_nodes(3, rule).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let m: f64 = dirs.iter().map(|u| u[i] * u[j]).sum::<f64>() / dirs.len() as f64;
                    assert!((m - if i == j { 1.0 / 3.0 } else { 0.0 }).abs() < 1e-15);
                }
            }
        }
        assert!(matches!(
            angular_nodes(3, AngularRule::SphericalDesign(7)),
            Err(Error::Unsupported(_))
        ));
        assert!(angular_nodes(4, AngularRule::SphericalDesign(3)).is_err());
    }

    #[test]
    fn radial_refinement_converges() {
        let field = shell(3);
        let mut last = f64::INFINITY;
        for n in [2, 4, 8] {
            let modes = discretize_field(&field, n, AngularRule::SphericalDesign(3), RadialRule::Midpoint).unwrap();
            let err = moment_error(&modes, &field, 3).unwrap();
            assert!(err < last / 3.0, "n={n} err={err}");
            last = err;
        }
        let gl = discretize_field(&field, 16, AngularRule::SphericalDesign(5), RadialRule::GaussLegendre).unwrap();
        assert!(moment_error(&gl, &field, 3).unwrap() < 1e-12);
        assert!(gl.completeness_error() < 1e-12);
    }

    #[test]
    fn presets_have_expected_sizes() {
        let f3 = shell(3);
        assert_eq!(preset_modes(&f3, ModePreset::Tiny).unwrap().channel_count(), 4);
        assert_eq!(
            preset_modes(&f3, ModePreset::Medium).unwrap().channel_count(),
            16 * 12 * 2
        );
        let f2 = shell(2);
        assert_eq!(preset_modes(&f2, ModePreset::Fine).unwrap().channel_count(), 32 * 16);
    }
}
