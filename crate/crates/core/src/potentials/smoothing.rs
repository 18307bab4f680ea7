//! Heat-kernel smoothing V ↦ V_eff = G_a * V with
//! G_a(x) = (4πa)^{−d/2} exp(−|x|²/(4a)).

use ndarray::{ArrayD, Axis, IxDyn};
use serde::Serialize;

use super::grid::{GridKind, GridSpec};
use super::spec::{PotentialKind, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::fft::{convolve_symmetric_direct, convolve_symmetric_fft, convolve_symmetric_periodic};
use crate::quad::{integrate_pieces, QuadOptions};

/// Kernel samples reach this many √a before truncation (e^{−36} relative).
const KERNEL_REACH: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum ConvolutionMethod {
    /// Zero-padded FFT convolution.
    #[default]
    Fft,
    /// Direct summation; the reference path.
    Direct,
    /// Circular convolution treating the data as periodic.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SmoothedRepr {
    /// a = 0.
    Unsmoothed(PotentialSpec),
    /// K|x|²/2 + shift with shift = K·d·a.
    ClosedFormHarmonic { k: f64, shift: f64 },
    /// −γ·erf(|x|/(2√a))/|x|.
    ClosedFormCoulombErf { gamma: f64 },
    /// Values on a grid.
    Grid { grid: GridSpec, values: Vec<f64> },
    /// Radial quadrature of the three-dimensional convolution, evaluated on demand.
    RadialQuadrature(PotentialSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothedPotential {
    pub a: f64,
    pub dim: usize,
    pub repr: SmoothedRepr,
    /// Accuracy notes (e.g. grid spacing coarser than the kernel width).
    pub warnings: Vec<String>,
}

/// Sampled 1-D heat kernel at spacing `h`, one half `w[0..=J]`, normalized
/// so that w₀ + 2Σⱼ wⱼ = 1.
pub fn sampled_heat_kernel(a: f64, h: f64) -> Vec<f64> {
    let reach = ((KERNEL_REACH * a.sqrt() / h).ceil() as usize).max(1);
    let mut w: Vec<f64> = (0..=reach)
        .map(|j| (-(j as f64 * h).powi(2) / (4.0 * a)).exp())
        .collect();
    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn convolve_line(data: &[f64], kernel: &[f64], method: ConvolutionMethod) -> Vec<f64> {
    match method {
        ConvolutionMethod::Fft => convolve_symmetric_fft(data, kernel),
        ConvolutionMethod::Direct => convolve_symmetric_direct(data, kernel),
        ConvolutionMethod::Periodic => convolve_symmetric_periodic(data, kernel),
    }
}

/// Separable heat-kernel convolution of an array sampled at spacing `h`.
pub fn gauss_kernel_convolve(samples: &ArrayD<f64>, a: f64, h: f64, method: ConvolutionMethod) -> Result<ArrayD<f64>> {
    if !(a >= 0.0 && a.is_finite()) {
        return invalid(format!("smoothing parameter must be non-negative, got {a}"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return invalid("samples must be finite");
    }
    if a == 0.0 {
        return Ok(samples.clone());
    }
    let kernel = sampled_heat_kernel(a, h);
    let mut out = samples.clone();
    for ax in 0..out.ndim() {
        for mut lane in out.lanes_mut(Axis(ax)) {
            let line: Vec<f64> = lane.iter().copied().collect();
            let conv = convolve_line(&line, &kernel, method);
            lane.iter_mut().zip(conv).for_each(|(x, v)| *x = v);
        }
    }
    Ok(out)
}

/// Zero-padded FFT convolution of grid samples with the sampled heat kernel.
pub fn gauss_kernel_convolve_grid(samples: &ArrayD<f64>, a: f64, grid: &GridSpec) -> Result<ArrayD<f64>> {
    check_shape(samples, grid)?;
    gauss_kernel_convolve(samples, a, grid.spacing(), ConvolutionMethod::Fft)
}

fn check_shape(samples: &ArrayD<f64>, grid: &GridSpec) -> Result<()> {
    if samples.shape() != grid.shape().as_slice() {
        return invalid(format!(
            "sample shape {:?} does not match grid shape {:?}",
            samples.shape(),
            grid.shape()
        ));
    }
    Ok(())
}

/// Smooths a radial d = 3 profile on a radial grid via the odd extension of
/// r·V(r): (G_a * V)(r) = (G¹_a * u)(r)/r with u(s) = s·V(|s|).
pub fn smooth_radial_3d(grid: &GridSpec, values: &[f64], a: f64, method: ConvolutionMethod) -> Result<Vec<f64>> {
    if !grid.is_radial() {
        return invalid("odd-extension smoothing needs a radial grid");
    }
    if a == 0.0 {
        return Ok(values.to_vec());
    }
    let n = grid.n;
    let h = grid.spacing();
    let r = grid.axis();
    let mut line = vec![0.0; 2 * n - 1];
    for i in 1..n {
        let u = r[i] * values[i];
        line[n - 1 + i] = u;
        line[n - 1 - i] = -u;
    }
    let kernel = sampled_heat_kernel(a, h);
    let conv = convolve_line(&line, &kernel, method);
    let c = &conv[n - 1..];
    let mut out = vec![0.0; n];
    for i in 1..n {
        out[i] = c[i] / r[i];
    }
    // Odd c(s) = c'(0) s + O(s³) ⇒ c'(0) = (8c₁ − c₂)/(6h).
    out[0] = (8.0 * c[1] - c[2]) / (6.0 * h);
    Ok(out)
}

/// (G_a * V)(r) in three dimensions for a radial V by one-dimensional quadrature:
/// V_eff(r) = (4πa)^{−1/2} r^{−1} ∫₀^∞ V(s) s [e^{−(r−s)²/4a} − e^{−(r+s)²/4a}] ds.
pub fn radial_convolution_3d(v: &PotentialSpec, a: f64, r: f64) -> f64 {
    let reach = KERNEL_REACH * a.sqrt();
    let lo = (r - reach).max(0.0);
    let mut hi = r + reach;
    if let Some(s) = v.support_radius() {
        hi = hi.min(s);
    }
    if hi <= lo {
        return 0.0;
    }
    let mut pts = vec![lo, hi];
    pts.extend(v.radial_breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    if r > lo && r < hi {
        pts.push(r);
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let norm = 1.0 / (4.0 * std::f64::consts::PI * a).sqrt();
    let q = integrate_pieces(
        |s| {
            let vs = v.radial_value(s).unwrap();
            let factor = if r == 0.0 {
                s * s / a * (-s * s / (4.0 * a)).exp()
            } else {
                s * (-(r - s).powi(2) / (4.0 * a)).exp() * -(-r * s / a).exp_m1() / r
            };
            vs * factor
        },
        &pts,
        QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            ..Default::default()
        },
    );
    norm * q.value
}

/// V_eff for a potential at smoothing parameter `a`.
pub fn effective_potential(v: &PotentialSpec, a: f64, grid: Option<&GridSpec>) -> Result<SmoothedPotential> {
    effective_potential_with(v, a, grid, ConvolutionMethod::Fft)
}

pub fn effective_potential_with(
    v: &PotentialSpec,
    a: f64,
    grid: Option<&GridSpec>,
    method: ConvolutionMethod,
) -> Result<SmoothedPotential> {
    if !(a >= 0.0 && a.is_finite()) {
        return invalid(format!("smoothing parameter must be non-negative, got {a}"));
    }
    let mut warnings = Vec::new();
    let used_grid = match (&v.kind, grid) {
        (PotentialKind::GridSampled { grid: own, .. }, Some(g)) if own != g => {
            return invalid("grid-sampled potential must be smoothed on its own grid");
        }
        (PotentialKind::GridSampled { grid: own, .. }, _) => Some(*own),
        (_, g) => g.copied(),
    };
    if let Some(g) = used_grid {
        if a > 0.0 && g.spacing() > a.sqrt() {
            warnings.push(format!(
                "grid spacing {:.3e} exceeds kernel width sqrt(a) = {:.3e}",
                g.spacing(),
                a.sqrt()
            ));
        }
    }
    let repr = if a == 0.0 {
        SmoothedRepr::Unsmoothed(v.clone())
    } else {
        match &v.kind {
            PotentialKind::Harmonic { k } => SmoothedRepr::ClosedFormHarmonic {
                k: *k,
                shift: k * v.dim as f64 * a,
            },
            PotentialKind::Coulomb { gamma } => SmoothedRepr::ClosedFormCoulombErf { gamma: *gamma },
            PotentialKind::GridSampled { grid, values } => {
                let arr = ArrayD::from_shape_vec(IxDyn(&grid.shape()), values.clone()).expect("validated shape");
                let out = gauss_kernel_convolve(&arr, a, grid.spacing(), method)?;
                SmoothedRepr::Grid {
                    grid: *grid,
                    values: out.into_raw_vec_and_offset().0,
                }
            }
            PotentialKind::FiniteWell { .. } | PotentialKind::TabulatedRadial(_) => match used_grid {
                Some(g) if g.is_radial() => {
                    if v.dim != 3 {
                        return Err(Error::UnsupportedDimension {
                            d: v.dim,
                            context: "radial-grid smoothing is implemented for d = 3".into(),
                        });
                    }
                    let samples = v.sample(&g)?;
                    SmoothedRepr::Grid {
                        grid: g,
                        values: smooth_radial_3d(&g, &samples, a, method)?,
                    }
                }
                Some(g) => {
                    let samples = v.sample(&g)?;
                    let arr = ArrayD::from_shape_vec(IxDyn(&g.shape()), samples).expect("grid shape");
                    let out = gauss_kernel_convolve(&arr, a, g.spacing(), method)?;
                    SmoothedRepr::Grid {
                        grid: g,
                        values: out.into_raw_vec_and_offset().0,
                    }
                }
                None if v.dim == 3 => SmoothedRepr::RadialQuadrature(v.clone()),
                None => {
                    return Err(Error::Unsupported(format!(
                        "smoothing a radial potential in d = {} needs a grid",
                        v.dim
                    )))
                }
            },
        }
    };
    Ok(SmoothedPotential {
        a,
        dim: v.dim,
        repr,
        warnings,
    })
}

impl SmoothedPotential {
    /// V_eff(x) at a point.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match &self.repr {
            SmoothedRepr::Unsmoothed(v) => v.value_at(x),
            SmoothedRepr::ClosedFormHarmonic { k, shift } => 0.5 * k * r * r + shift,
            SmoothedRepr::ClosedFormCoulombErf { gamma } => coulomb_erf(*gamma, self.a, r),
            SmoothedRepr::Grid { grid, values } => {
                if grid.is_radial() {
                    grid.interpolate(values, &[r])
                } else {
                    grid.interpolate(values, x)
                }
            }
            SmoothedRepr::RadialQuadrature(v) => radial_convolution_3d(v, self.a, r),
        }
    }

    /// V_eff(r) for radially symmetric representations.
    pub fn radial_value(&self, r: f64) -> Option<f64> {
        match &self.repr {
            SmoothedRepr::Unsmoothed(v) => v.radial_value(r),
            SmoothedRepr::Grid { grid, .. } if !grid.is_radial() => None,
            _ => {
                let mut x = vec![0.0; self.dim];
                x[0] = r;
                match &self.repr {
                    SmoothedRepr::Grid { grid, values } => Some(grid.interpolate(values, &[r])),
                    _ => Some(self.value_at(&x)),
                }
            }
        }
    }

    /// Values at every node of `grid`, row-major.
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        match &self.repr {
            SmoothedRepr::Unsmoothed(v) => v.sample(grid),
            SmoothedRepr::Grid { grid: own, values } if own == grid => Ok(values.clone()),
            _ => match grid.kind {
                GridKind::Radial { .. } => grid
                    .axis()
                    .into_iter()
                    .map(|r| {
                        self.radial_value(r)
                            .ok_or_else(|| Error::InvalidArgument("potential is not radial".into()))
                    })
                    .collect(),
                GridKind::Box { dim, .. } => {
                    if dim != self.dim {
                        return invalid(format!(
                            "grid has {dim} axes but the potential lives in d = {}",
                            self.dim
                        ));
                    }
                    Ok((0..grid.len())
                        .map(|f| self.value_at(&grid.point(&grid.unravel(f))))
                        .collect())
                }
            },
        }
    }
}

/// −γ·erf(r/(2√a))/r with the removable singularity −γ/√(πa) at r = 0.
pub fn coulomb_erf(gamma: f64, a: f64, r: f64) -> f64 {
    let s = 2.0 * a.sqrt();
    if r < 1e-8 * s {
        // erf(z)/z → 2/√π (1 − z²/3)
        let z = r / s;
        -gamma * 2.0 / (std::f64::consts::PI.sqrt() * s) * (1.0 - z * z / 3.0)
    } else {
        -gamma * libm::erf(r / s) / r
    }
}
