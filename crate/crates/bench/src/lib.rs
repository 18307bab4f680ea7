//! Fixtures shared by the benchmarks.

use effham_core::focksim::{discretize_field, AngularRule, DiscreteModes, RadialRule};
use effham_core::{FieldModel, PhysicalParams};
use ndarray::{ArrayD, IxDyn};

/// Sharp shell on [1, e] in natural units.
pub fn unit_shell(d: usize) -> FieldModel {
    FieldModel::sharp_shell(PhysicalParams::natural(d), 1.0, std::f64::consts::E).expect("valid shell")
}

/// Six isotropic channels in two dimensions.
pub fn six_channels(q: f64) -> (DiscreteModes, PhysicalParams) {
    let params = PhysicalParams::natural(2).with_charge(q);
    let field = FieldModel::sharp_shell(params, 1.0, 2.0).expect("valid shell");
    let modes = discretize_field(&field, 2, AngularRule::EqualAngles(3), RadialRule::GaussLegendre).expect("modes");
    (modes, params)
}

/// A smooth bump field on an n³ grid.
pub fn bump_field(n: usize) -> ArrayD<f64> {
    let h = 8.0 / (n - 1) as f64;
    ArrayD::from_shape_fn(IxDyn(&[n, n, n]), |ix| {
        let r2: f64 = (0..3).map(|k| (-4.0 + ix[k] as f64 * h).powi(2)).sum();
        -(-r2).exp()
    })
}
