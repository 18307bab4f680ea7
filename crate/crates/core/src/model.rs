//! Physical constants, the photon field model and its radial moments.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};

/// Constants of the electron–field system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
    /// Coupling constant; zero switches the interaction off.
    pub q: f64,
    /// Mass entering the model (observed mass unless a caller says otherwise).
    pub m: f64,
    /// Spatial dimension, at least 2.
    pub d: usize,
}

impl PhysicalParams {
    pub fn new(hbar: f64, c: f64, eps0: f64, q: f64, m: f64, d: usize) -> Result<Self> {
        let p = Self { hbar, c, eps0, q, m, d };
        p.validate()?;
        Ok(p)
    }

    /// ħ = c = ε₀ = q = m = 1.
    pub fn natural(d: usize) -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            eps0: 1.0,
            q: 1.0,
            m: 1.0,
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("c", self.c), ("eps0", self.eps0), ("m", self.m)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !self.q.is_finite() {
            return invalid("q must be finite");
        }
        if self.d < 2 {
            return Err(Error::UnsupportedDimension {
                d: self.d,
                context: "the model needs d >= 2".into(),
            });
        }
        Ok(())
    }

    pub fn with_charge(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_mass(mut self, m: f64) -> Self {
        self.m = m;
        self
    }
}

/// Area of the unit sphere S^{d−1} in ℝ^d.
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / libm::tgamma(h)
}

/// Piecewise-linear radial table, zero outside its range unless the caller
/// treats the range otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    r: Vec<f64>,
    v: Vec<f64>,
}

impl RadialTable {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.len() < 2 {
            return invalid("radial table needs at least two (r, value) pairs of equal length");
        }
        if r.iter().chain(&v).any(|x| !x.is_finite()) {
            return invalid("radial table contains non-finite entries");
        }
        if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("radial table abscissae must be non-negative and strictly increasing");
        }
        Ok(Self { r, v })
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn range(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().unwrap())
    }

    /// Linear interpolation; `None` outside the tabulated range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let i = match self.r.partition_point(|&ri| ri <= x) {
            0 => 0,
            i if i >= self.r.len() => self.r.len() - 2,
            i => i - 1,
        };
        let t = (x - self.r[i]) / (self.r[i + 1] - self.r[i]);
        Some(self.v[i] + t * (self.v[i + 1] - self.v[i]))
    }

    /// Interpolated value, zero outside the range.
    pub fn value_or_zero(&self, x: f64) -> f64 {
        self.interpolate(x).unwrap_or(0.0)
    }
}

/// Photon dispersion relation ω(|k|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dispersion {
    /// ω = c·|k| with c from the physical parameters.
    Linear,
    Tabulated(RadialTable),
}

/// Radial form factor ρ̂(|k|). Every kind vanishes outside `[κ, Λ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FormFactor {
    /// Constant (2π)^{−d/2} on the shell.
    SharpShell,
    /// (2π)^{−d/2}·exp(−(r − center)²/(2 width²)) on the shell.
    GaussianShell {
        center: f64,
        width: f64,
    },
    Tabulated(RadialTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub params: PhysicalParams,
    pub dispersion: Dispersion,
    pub formfactor: FormFactor,
    pub kappa: f64,
    pub lambda: f64,
}

impl FieldModel {
    pub fn new(
        params: PhysicalParams,
        dispersion: Dispersion,
        formfactor: FormFactor,
        kappa: f64,
        lambda: f64,
    ) -> Result<Self> {
        params.validate()?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return invalid(format!("kappa must be positive, got {kappa}"));
        }
        if !(lambda > kappa && lambda.is_finite()) {
            return invalid(format!("Lambda must exceed kappa, got {lambda} <= {kappa}"));
        }
        if let FormFactor::GaussianShell { width, .. } = formfactor {
            if width.is_nan() || width <= 0.0 {
                return invalid("gaussian-shell width must be positive");
            }
        }
        Ok(Self {
            params,
            dispersion,
            formfactor,
            kappa,
            lambda,
        })
    }

    /// Linear dispersion with a sharp shell on `[kappa, lambda]`.
    pub fn sharp_shell(params: PhysicalParams, kappa: f64, lambda: f64) -> Result<Self> {
        Self::new(params, Dispersion::Linear, FormFactor::SharpShell, kappa, lambda)
    }

    pub fn dim(&self) -> usize {
        self.params.d
    }

    fn amplitude(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powf(-(self.params.d as f64) / 2.0)
    }

    pub fn omega(&self, r: f64) -> f64 {
        match &self.dispersion {
            Dispersion::Linear => self.params.c * r,
            Dispersion::Tabulated(t) => t.interpolate(r).unwrap_or(f64::NAN),
        }
    }

    pub fn rho(&self, r: f64) -> f64 {
        if r < self.kappa || r > self.lambda {
            return 0.0;
        }
        match &self.formfactor {
            FormFactor::SharpShell => self.amplitude(),
            FormFactor::GaussianShell { center, width } => {
                self.amplitude() * (-(r - center).powi(2) / (2.0 * width * width)).exp()
            }
            FormFactor::Tabulated(t) => t.value_or_zero(r),
        }
    }

    /// Radial interval carrying the form factor.
    pub fn support(&self) -> (f64, f64) {
        match &self.formfactor {
            FormFactor::Tabulated(t) => {
                let (lo, hi) = t.range();
                (lo.max(self.kappa), hi.min(self.lambda))
            }
            _ => (self.kappa, self.lambda),
        }
    }

    /// Support endpoints plus every tabulation node inside the support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut pts = vec![lo, hi];
        if let FormFactor::Tabulated(t) = &self.formfactor {
            pts.extend(t.radii().iter().copied().filter(|&r| r > lo && r < hi));
        }
        if let Dispersion::Tabulated(t) = &self.dispersion {
            pts.extend(t.radii().iter().copied().filter(|&r| r > lo && r < hi));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    fn check_dispersion(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if hi <= lo {
            return Ok(());
        }
        for r in self.breakpoints() {
            let w = self.omega(r);
            if !w.is_finite() {
                return Err(Error::Divergence(format!(
                    "dispersion undefined at |k| = {r} inside the form-factor support"
                )));
            }
            if w <= 0.0 {
                return Err(Error::Divergence(format!(
                    "omega = {w} at |k| = {r} inside the form-factor support"
                )));
            }
        }
        Ok(())
    }

    /// Copy with ω replaced by `s·ω`.
    pub fn with_scaled_dispersion(&self, s: f64) -> Self {
        let mut out = self.clone();
        match &mut out.dispersion {
            Dispersion::Linear => out.params.c *= s,
            Dispersion::Tabulated(t) => {
                let v = t.values().iter().map(|x| x * s).collect();
                *t = RadialTable::new(t.radii().to_vec(), v).expect("scaling keeps the table valid");
            }
        }
        out
    }
}

/// I_p = ∫_{ℝ^d} |ρ̂(k)|²/ω(k)^p dk by radial reduction and adaptive quadrature.
pub fn field_moment(field: &FieldModel, p: u32) -> Result<f64> {
    field_moment_with(field, p, QuadOptions::default())
}

pub fn field_moment_with(field: &FieldModel, p: u32, opts: QuadOptions) -> Result<f64> {
    let (lo, hi) = field.support();
    if hi <= lo {
        return Ok(0.0);
    }
    field.check_dispersion()?;
    let d = field.dim() as i32;
    let pts = field.breakpoints();
    let q = integrate_pieces(
        |r| {
            let rho = field.rho(r);
            if rho == 0.0 {
                0.0
            } else {
                r.powi(d - 1) * rho * rho / field.omega(r).powi(p as i32)
            }
        },
        &pts,
        opts,
    );
    if !q.value.is_finite() {
        return Err(Error::Divergence(format!("moment I_{p} is not finite")));
    }
    Ok(unit_sphere_area(field.dim()) * q.value)
}

/// Parameters re-expressed in units where ħ = m = ε₀ = 1 and the chosen
/// length unit is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledParams {
    pub base: PhysicalParams,
    pub length_unit: f64,
    pub mass_unit: f64,
    pub time_unit: f64,
    pub energy_unit: f64,
    pub charge_unit: f64,
    pub scaled: PhysicalParams,
}

pub fn nondimensionalize(params: &PhysicalParams, length_unit: f64) -> Result<ScaledParams> {
    params.validate()?;
    if !(length_unit > 0.0 && length_unit.is_finite()) {
        return invalid(format!("length unit must be positive, got {length_unit}"));
    }
    let mass_unit = params.m;
    let time_unit = params.m * length_unit * length_unit / params.hbar;
    let energy_unit = params.hbar * params.hbar / (params.m * length_unit * length_unit);
    // Charge unit chosen so that the permittivity becomes 1.
    let charge_unit = (params.eps0 * params.hbar * params.hbar / (params.m * length_unit)).sqrt();
    let eps_unit = charge_unit * charge_unit * time_unit * time_unit / (mass_unit * length_unit.powi(3));
    let scaled = PhysicalParams {
        hbar: params.hbar / (energy_unit * time_unit),
        c: params.c * time_unit / length_unit,
        eps0: params.eps0 / eps_unit,
        q: params.q / charge_unit,
        m: params.m / mass_unit,
        d: params.d,
    };
    Ok(ScaledParams {
        base: *params,
        length_unit,
        mass_unit,
        time_unit,
        energy_unit,
        charge_unit,
        scaled,
    })
}

impl ScaledParams {
    /// Reconstructs dimensional parameters from the scaled copy.
    pub fn unscale(&self) -> PhysicalParams {
        let eps_unit = self.charge_unit * self.charge_unit * self.time_unit * self.time_unit
            / (self.mass_unit * self.length_unit.powi(3));
        PhysicalParams {
            hbar: self.scaled.hbar * self.energy_unit * self.time_unit,
            c: self.scaled.c * self.length_unit / self.time_unit,
            eps0: self.scaled.eps0 * eps_unit,
            q: self.scaled.q * self.charge_unit,
            m: self.scaled.m * self.mass_unit,
            d: self.scaled.d,
        }
    }

    pub fn length_to_scaled(&self, x: f64) -> f64 {
        x / self.length_unit
    }

    pub fn wavenumber_to_scaled(&self, k: f64) -> f64 {
        k * self.length_unit
    }

    pub fn energy_from_scaled(&self, e: f64) -> f64 {
        e * self.energy_unit
    }
}
