use serde::{Deserialize, Serialize};

use super::grid::{GridKind, GridSpec};
use crate::error::{invalid, Error, Result};
use crate::model::RadialTable;

/// ∫ over the unit cube [−½, ½]³ of 1/|x|, equal to 3·ln(2 + √3) − π/2.
pub(crate) fn unit_cube_inverse_radius() -> f64 {
    3.0 * (2.0 + 3f64.sqrt()).ln() - std::f64::consts::FRAC_PI_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    /// K|x|²/2.
    Harmonic { k: f64 },
    /// −γ/|x|, three dimensions only.
    Coulomb { gamma: f64 },
    /// −depth inside the ball of the given radius, zero outside.
    FiniteWell { depth: f64, radius: f64 },
    /// Piecewise-linear V(|x|), zero beyond the table.
    TabulatedRadial(RadialTable),
    /// Samples on a box grid, interpolated multilinearly and zero outside.
    GridSampled { grid: GridSpec, values: Vec<f64> },
}

/// Which of the admissibility conditions a potential is declared to meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    /// |V| infinitesimally form-bounded by −Δ.
    pub form_bounded: bool,
    /// V bounded from below.
    pub bounded_below: bool,
    /// Gaussian-weighted L¹ finite for all t > 0.
    pub gaussian_integrable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub dim: usize,
    pub kind: PotentialKind,
}

impl PotentialSpec {
    pub fn harmonic(dim: usize, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("harmonic constant must be positive, got {k}"));
        }
        Self::checked(dim, PotentialKind::Harmonic { k })
    }

    pub fn coulomb(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return invalid(format!("Coulomb strength must be positive, got {gamma}"));
        }
        Self::checked(3, PotentialKind::Coulomb { gamma })
    }

    pub fn finite_well(dim: usize, depth: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && depth.is_finite()) {
            return invalid("finite well needs a positive radius and finite depth");
        }
        Self::checked(dim, PotentialKind::FiniteWell { depth, radius })
    }

    pub fn tabulated(dim: usize, table: RadialTable) -> Result<Self> {
        Self::checked(dim, PotentialKind::TabulatedRadial(table))
    }

    pub fn grid_sampled(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let dim = match grid.kind {
            GridKind::Box { dim, .. } => dim,
            GridKind::Radial { .. } => return invalid("grid-sampled potentials need a box grid"),
        };
        if values.len() != grid.len() {
            return invalid(format!("expected {} samples, got {}", grid.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("grid samples must be finite");
        }
        Self::checked(dim, PotentialKind::GridSampled { grid, values })
    }

    /// Zero potential on a coarse grid.
    pub fn zero(dim: usize) -> Self {
        let grid = GridSpec::box_grid(dim, 1.0, 8).expect("valid grid");
        Self {
            dim,
            kind: PotentialKind::GridSampled {
                values: vec![0.0; grid.len()],
                grid,
            },
        }
    }

    fn checked(dim: usize, kind: PotentialKind) -> Result<Self> {
        if dim == 0 {
            return invalid("potential dimension must be positive");
        }
        if matches!(kind, PotentialKind::Coulomb { .. }) && dim != 3 {
            return Err(Error::UnsupportedDimension {
                d: dim,
                context: "Coulomb potential is defined for d = 3".into(),
            });
        }
        Ok(Self { dim, kind })
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.kind, PotentialKind::GridSampled { .. })
    }

    /// V(r) for radially symmetric kinds.
    pub fn radial_value(&self, r: f64) -> Option<f64> {
        match &self.kind {
            PotentialKind::Harmonic { k } => Some(0.5 * k * r * r),
            PotentialKind::Coulomb { gamma } => Some(-gamma / r),
            PotentialKind::FiniteWell { depth, radius } => Some(if r < *radius { -depth } else { 0.0 }),
            PotentialKind::TabulatedRadial(t) => Some(t.value_or_zero(r)),
            PotentialKind::GridSampled { .. } => None,
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::GridSampled { grid, values } => grid.interpolate(values, x),
            _ => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                self.radial_value(r).unwrap()
            }
        }
    }

    /// Radius beyond which V vanishes, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Harmonic { .. } | PotentialKind::Coulomb { .. } => None,
            PotentialKind::FiniteWell { radius, .. } => Some(*radius),
            PotentialKind::TabulatedRadial(t) => Some(t.range().1),
            PotentialKind::GridSampled { grid, .. } => Some(grid.extent() / 2.0 * (grid.dim() as f64).sqrt()),
        }
    }

    /// Radii where V is not smooth.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::FiniteWell { radius, .. } => vec![*radius],
            PotentialKind::TabulatedRadial(t) => t.radii().to_vec(),
            _ => vec![],
        }
    }

    pub fn infimum(&self) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { .. } => 0.0,
            PotentialKind::Coulomb { .. } => f64::NEG_INFINITY,
            PotentialKind::FiniteWell { depth, .. } => (-depth).min(0.0),
            PotentialKind::TabulatedRadial(t) => t.values().iter().cloned().fold(0.0, f64::min),
            PotentialKind::GridSampled { values, .. } => values.iter().cloned().fold(0.0, f64::min),
        }
    }

    pub fn admissibility(&self) -> Admissibility {
        match &self.kind {
            PotentialKind::Harmonic { .. } => Admissibility {
                form_bounded: false,
                bounded_below: true,
                gaussian_integrable: true,
            },
            // Coulomb lies in Rollnik + L∞ without being bounded below.
            PotentialKind::Coulomb { .. } => Admissibility {
                form_bounded: true,
                bounded_below: false,
                gaussian_integrable: true,
            },
            _ => Admissibility {
                form_bounded: true,
                bounded_below: true,
                gaussian_integrable: true,
            },
        }
    }

    /// Values at every node of `grid`, row-major. The Coulomb singularity
    /// at a node is replaced by its cell average.
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        match grid.kind {
            GridKind::Radial { .. } => {
                if !self.is_radial() {
                    return invalid("radial grid needs a radially symmetric potential");
                }
                let h = grid.spacing();
                Ok(grid
                    .axis()
                    .into_iter()
                    .map(|r| match (&self.kind, r == 0.0) {
                        // Average of 1/r over the ball of radius h/2 is 3/h.
                        (PotentialKind::Coulomb { gamma }, true) => -gamma * 3.0 / h,
                        _ => self.radial_value(r).unwrap(),
                    })
                    .collect())
            }
            GridKind::Box { dim, .. } => {
                if dim != self.dim {
                    return invalid(format!(
                        "grid has {dim} axes but the potential lives in d = {}",
                        self.dim
                    ));
                }
                if let PotentialKind::GridSampled { grid: own, values } = &self.kind {
                    if own == grid {
                        return Ok(values.clone());
                    }
                }
                let h = grid.spacing();
                Ok((0..grid.len())
                    .map(|flat| {
                        let x = grid.point(&grid.unravel(flat));
                        let r2: f64 = x.iter().map(|v| v * v).sum();
                        match &self.kind {
                            PotentialKind::Coulomb { gamma } if r2 < 1e-24 * h * h => {
                                -gamma * unit_cube_inverse_radius() / h
                            }
                            _ => self.value_at(&x),
                        }
                    })
                    .collect())
            }
        }
    }
}
