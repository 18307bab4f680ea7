//! The Gaussian smoothing constant `a` and the two mass-renormalization
//! relations between bare and observed electron mass.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{field_moment, FieldModel, PhysicalParams};

/// Which mass the interaction term carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MassConvention {
    /// Interaction uses the observed mass `m`; `params.m` is observed and
    /// the bare mass follows from 1/m₀ = 1/m + ((d−1)/d)(q²/ε₀m²)·I₂.
    #[default]
    ObservedInInteraction,
    /// Interaction uses the bare mass; `params.m` is the bare mass `m₀` and
    /// 1/m = 1/m₀ − ((d−1)/d)(q²/ε₀m₀²)·I₂ must be positive.
    BareInInteraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingResult {
    /// Variance scale of the smoothing kernel (length²).
    pub a: f64,
    pub i2: f64,
    pub i3: f64,
    /// Observed mass.
    pub m: f64,
    /// Bare mass, when one was derived.
    pub m0: Option<f64>,
    /// Mass that entered the formula for `a`.
    pub mass_in_a: f64,
    pub convention: MassConvention,
    pub params: PhysicalParams,
}

fn check_dims(params: &PhysicalParams, field: &FieldModel) -> Result<()> {
    params.validate()?;
    if params.d != field.dim() {
        return invalid(format!(
            "parameter dimension {} differs from field dimension {}",
            params.d,
            field.dim()
        ));
    }
    Ok(())
}

/// a = ((d−1)/(4d))·(ħq²/(ε₀ mass²))·I₃ for an explicit mass.
pub fn smoothing_from_moment(params: &PhysicalParams, mass: f64, i3: f64) -> f64 {
    let d = params.d as f64;
    (d - 1.0) / (4.0 * d) * params.hbar * params.q * params.q / (params.eps0 * mass * mass) * i3
}

fn correction(params: &PhysicalParams, mass: f64, i2: f64) -> f64 {
    let d = params.d as f64;
    (d - 1.0) / d * params.q * params.q / (params.eps0 * mass * mass) * i2
}

/// Smoothing constant with the observed mass `params.m`.
pub fn smoothing_parameter(params: &PhysicalParams, field: &FieldModel) -> Result<CouplingResult> {
    check_dims(params, field)?;
    let i2 = field_moment(field, 2)?;
    let i3 = field_moment(field, 3)?;
    Ok(CouplingResult {
        a: smoothing_from_moment(params, params.m, i3),
        i2,
        i3,
        m: params.m,
        m0: None,
        mass_in_a: params.m,
        convention: MassConvention::ObservedInInteraction,
        params: *params,
    })
}

/// m₀ from the observed mass; always 0 < m₀ ≤ m.
pub fn bare_mass_from_observed(params: &PhysicalParams, field: &FieldModel) -> Result<f64> {
    check_dims(params, field)?;
    let i2 = field_moment(field, 2)?;
    Ok(bare_mass_from_moment(params, i2))
}

pub fn bare_mass_from_moment(params: &PhysicalParams, i2: f64) -> f64 {
    1.0 / (1.0 / params.m + correction(params, params.m, i2))
}

/// Observed mass when the interaction carries the bare mass `params.m`.
pub fn observed_mass_from_bare(params: &PhysicalParams, field: &FieldModel) -> Result<f64> {
    check_dims(params, field)?;
    let i2 = field_moment(field, 2)?;
    observed_mass_from_moment(params, i2)
}

pub fn observed_mass_from_moment(params: &PhysicalParams, i2: f64) -> Result<f64> {
    let m0 = params.m;
    let inverse = 1.0 / m0 - correction(params, m0, i2);
    if inverse <= 0.0 {
        let d = params.d as f64;
        let critical = (params.eps0 * m0 * d / ((d - 1.0) * i2)).sqrt();
        return Err(Error::PositivityViolation {
            inverse_mass: inverse,
            critical_charge: critical,
        });
    }
    Ok(1.0 / inverse)
}

/// Smoothing constant and both masses under the chosen convention.
pub fn effective_coupling(
    params: &PhysicalParams,
    field: &FieldModel,
    convention: MassConvention,
) -> Result<CouplingResult> {
    check_dims(params, field)?;
    let i2 = field_moment(field, 2)?;
    let i3 = field_moment(field, 3)?;
    let (m, m0, mass_in_a) = match convention {
        MassConvention::ObservedInInteraction => {
            let m0 = bare_mass_from_moment(params, i2);
            (params.m, m0, params.m)
        }
        MassConvention::BareInInteraction => {
            let m = observed_mass_from_moment(params, i2)?;
            (m, params.m, params.m)
        }
    };
    Ok(CouplingResult {
        a: smoothing_from_moment(params, mass_in_a, i3),
        i2,
        i3,
        m,
        m0: Some(m0),
        mass_in_a,
        convention,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    fn field(kappa: f64, lambda: f64) -> FieldModel {
        FieldModel::sharp_shell(PhysicalParams::natural(3), kappa, lambda).unwrap()
    }

    #[test]
    fn natural_unit_smoothing_constant() {
        let r = smoothing_parameter(&PhysicalParams::natural(3), &field(1.0, E)).unwrap();
        assert_relative_eq!(r.a, 1.0 / (12.0 * PI * PI), max_relative = 1e-10);
        assert_relative_eq!(r.a, 8.4434e-3, max_relative = 1e-4);
    }

    #[test]
    fn zero_charge_switches_smoothing_off() {
        let p = PhysicalParams::natural(3).with_charge(0.0);
        let r = smoothing_parameter(&p, &field(1.0, E)).unwrap();
        assert_eq!(r.a, 0.0);
        assert_eq!(bare_mass_from_observed(&p, &field(1.0, 2.0)).unwrap(), 1.0);
        assert_eq!(observed_mass_from_bare(&p, &field(1.0, 2.0)).unwrap(), 1.0);
    }

    #[test]
    fn smoothing_scales_with_charge_squared() {
        let f = field(0.7, 3.1);
        let a1 = smoothing_parameter(&PhysicalParams::natural(3).with_charge(0.3), &f)
            .unwrap()
            .a;
        let a2 = smoothing_parameter(&PhysicalParams::natural(3).with_charge(0.6), &f)
            .unwrap()
            .a;
        assert_relative_eq!(a2, 4.0 * a1, max_relative = 1e-14);
    }

    #[test]
    fn bare_mass_for_unit_shell() {
        let m0 = bare_mass_from_observed(&PhysicalParams::natural(3), &field(1.0, 2.0)).unwrap();
        let expected = 1.0 / (1.0 + (2.0 / 3.0) / (2.0 * PI * PI));
        assert_relative_eq!(m0, expected, max_relative = 1e-10);
        assert!((m0 - 0.96733).abs() < 1e-4);
    }

    #[test]
    fn observed_mass_for_unit_shell() {
        let m = observed_mass_from_bare(&PhysicalParams::natural(3), &field(1.0, 2.0)).unwrap();
        assert_relative_eq!(m, 1.0 / (1.0 - 1.0 / (3.0 * PI * PI)), max_relative = 1e-10);
        assert!((m - 1.03495).abs() < 1e-4);
    }

    #[test]
    fn strong_coupling_violates_positivity_with_critical_charge() {
        let f = field(1.0, 2.0);
        let i2 = 1.0 / (2.0 * PI * PI);
        let qstar = (3.0 / (2.0 * i2)).sqrt();
        let err = observed_mass_from_bare(&PhysicalParams::natural(3).with_charge(1.01 * qstar), &f).unwrap_err();
        match err {
            Error::PositivityViolation {
                critical_charge,
                inverse_mass,
            } => {
                assert_relative_eq!(critical_charge, qstar, max_relative = 1e-9);
                assert!(inverse_mass <= 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(observed_mass_from_bare(&PhysicalParams::natural(3).with_charge(0.99 * qstar), &f).is_ok());
    }

    #[test]
    fn conventions_differ_by_mass_ratio_squared() {
        let p = PhysicalParams::natural(3).with_charge(1.7);
        let f = field(1.0, 3.0);
        let obs = effective_coupling(&p, &f, MassConvention::ObservedInInteraction).unwrap();
        let m0 = obs.m0.unwrap();
        let bare = effective_coupling(&p.with_mass(m0), &f, MassConvention::BareInInteraction).unwrap();
        // Same a formula with m -> m0.
        assert_relative_eq!(bare.a / obs.a, (p.m / m0).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let f = FieldModel::sharp_shell(PhysicalParams::natural(2), 1.0, 2.0).unwrap();
        assert!(smoothing_parameter(&PhysicalParams::natural(3), &f).is_err());
    }
}
