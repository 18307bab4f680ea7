//! Numerical checks of the admissibility conditions on V: the Gaussian-weighted
//! L¹ norm ∫|V| e^{−t|x|²} dx and the Rollnik norm ∬ |V(x)||V(y)|/|x−y|² dx dy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};
use serde::Serialize;

use super::spec::{PotentialKind, PotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::model::unit_sphere_area;
use crate::quad::{integrate_pieces, QuadOptions};

pub const DEFAULT_SEED: u64 = 0x0dd5_eed5;

/// Outcome of a finiteness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Verdict {
    Finite { value: f64, error: f64 },
    Divergent,
    Inconclusive { last: f64 },
}

impl Verdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, Verdict::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Verdict::Finite { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Sequence of estimates under doubling of the truncation radius, classified.
/// Two consecutive changes within 1% (plus `noise`) mean convergence; two
/// consecutive growth factors above 1.5 mean divergence.
fn classify(estimates: &[(f64, f64)]) -> Verdict {
    let n = estimates.len();
    let stable = |i: usize| {
        let (a, ea) = estimates[i - 1];
        let (b, eb) = estimates[i];
        (b - a).abs() <= 0.01 * b.abs() + 3.0 * (ea * ea + eb * eb).sqrt()
    };
    if n >= 3 && stable(n - 1) && stable(n - 2) {
        let (value, error) = estimates[n - 1];
        return Verdict::Finite { value, error };
    }
    let grows = |i: usize| estimates[i].0.abs() > 1.5 * estimates[i - 1].0.abs();
    if n >= 3 && grows(n - 1) && grows(n - 2) {
        return Verdict::Divergent;
    }
    Verdict::Inconclusive {
        last: estimates.last().map_or(0.0, |e| e.0),
    }
}

/// S_{d−1}∫₀^R r^{d−1}|V(r)| e^{−tr²} dr for a radial potential.
pub fn gaussian_weighted_l1_radial(v: &PotentialSpec, t: f64, r_max: f64) -> Result<(f64, f64)> {
    if !v.is_radial() {
        return invalid("radial quadrature needs a radially symmetric potential");
    }
    let d = v.dim as i32;
    let mut pts = vec![0.0, r_max];
    pts.extend(v.radial_breakpoints().into_iter().filter(|&b| b > 0.0 && b < r_max));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = integrate_pieces(
        |r| {
            if r == 0.0 {
                return 0.0;
            }
            r.powi(d - 1) * v.radial_value(r).unwrap().abs() * (-t * r * r).exp()
        },
        &pts,
        QuadOptions {
            rel_tol: 1e-12,
            ..Default::default()
        },
    );
    let s = unit_sphere_area(v.dim);
    Ok((s * q.value, s * q.abs_error))
}

/// Gaussian-weighted L¹ norm with the default seed for the sampled path.
pub fn check_condition_v2(v: &PotentialSpec, t: f64, budget: usize) -> Result<Verdict> {
    check_condition_v2_seeded(v, t, budget, DEFAULT_SEED)
}

/// Radial kinds use quadrature with the truncation radius doubled until the
/// value settles. Grid kinds use Monte Carlo with x drawn from the density
/// (t/π)^{d/2} e^{−t|x|²}.
pub fn check_condition_v2_seeded(v: &PotentialSpec, t: f64, budget: usize, seed: u64) -> Result<Verdict> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("condition parameter t must be positive, got {t}"));
    }
    match &v.kind {
        PotentialKind::GridSampled { values, .. } => {
            if budget < 2 {
                return invalid("Monte Carlo budget must be at least 2");
            }
            if values.iter().all(|&x| x == 0.0) {
                return Ok(Verdict::Finite { value: 0.0, error: 0.0 });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sd = (0.5 / t).sqrt();
            let mass = (std::f64::consts::PI / t).powf(v.dim as f64 / 2.0);
            let mut x = vec![0.0; v.dim];
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..budget {
                for xi in x.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *xi = sd * z;
                }
                let f = mass * v.value_at(&x).abs();
                sum += f;
                sum2 += f * f;
            }
            let n = budget as f64;
            let mean = sum / n;
            let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            Ok(Verdict::Finite {
                value: mean,
                error: (var / n).sqrt(),
            })
        }
        _ => {
            let r0 = (40.0 / t).sqrt().max(v.support_radius().unwrap_or(0.0));
            let mut estimates = Vec::new();
            for k in 0..6 {
                estimates.push(gaussian_weighted_l1_radial(v, t, r0 * 2f64.powi(k))?);
                if k >= 2 {
                    match classify(&estimates) {
                        Verdict::Inconclusive { .. } => {}
                        verdict => return Ok(verdict),
                    }
                }
            }
            Ok(classify(&estimates))
        }
    }
}

/// Rollnik norm with the default seed.
pub fn rollnik_norm_estimate(v: &PotentialSpec, budget: usize) -> Result<Verdict> {
    rollnik_norm_estimate_seeded(v, budget, DEFAULT_SEED)
}

/// Monte Carlo estimate of the Rollnik norm in d = 3.
///
/// Writing y = x + s·u with u on the unit sphere cancels the 1/|x−y|² factor
/// against the Jacobian s², so with x uniform in the ball B_R and s uniform on
/// [0, 2R] each sample vol(B_R)·4π·2R·|V(x)||V(y)| is bounded whenever V is.
/// Potentials without compact support are truncated to B_R with R doubled
/// until the estimates settle or keep growing.
pub fn rollnik_norm_estimate_seeded(v: &PotentialSpec, budget: usize, seed: u64) -> Result<Verdict> {
    if v.dim != 3 {
        return Err(Error::UnsupportedDimension {
            d: v.dim,
            context: "the Rollnik norm is defined for d = 3".into(),
        });
    }
    if budget < 2 {
        return invalid("Monte Carlo budget must be at least 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match v.support_radius() {
        Some(radius) => {
            let (value, error) = rollnik_truncated(v, radius, budget, &mut rng);
            Ok(Verdict::Finite { value, error })
        }
        None => {
            let mut estimates = Vec::new();
            for k in 0..6 {
                estimates.push(rollnik_truncated(v, 2f64.powi(k), budget, &mut rng));
                if k >= 2 {
                    match classify(&estimates) {
                        Verdict::Inconclusive { .. } => {}
                        verdict => return Ok(verdict),
                    }
                }
            }
            Ok(classify(&estimates))
        }
    }
}

/// Estimate of ∬_{B_R×B_R} |V(x)||V(y)|/|x−y|² and its standard error.
fn rollnik_truncated(v: &PotentialSpec, radius: f64, budget: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let vol = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
    let scale = vol * 4.0 * std::f64::consts::PI * 2.0 * radius;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..budget {
        let x = uniform_in_ball(rng, radius);
        let u: [f64; 3] = UnitSphere.sample(rng);
        let s = rng.random::<f64>() * 2.0 * radius;
        let y = [x[0] + s * u[0], x[1] + s * u[1], x[2] + s * u[2]];
        let f = if y.iter().map(|c| c * c).sum::<f64>() <= radius * radius {
            scale * v.value_at(&x).abs() * v.value_at(&y).abs()
        } else {
            0.0
        };
        sum += f;
        sum2 += f * f;
    }
    let n = budget as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 3] {
    let u: [f64; 3] = UnitSphere.sample(rng);
    let r = radius * rng.random::<f64>().cbrt();
    [r * u[0], r * u[1], r * u[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_gaussian_moment() {
        let v = PotentialSpec::harmonic(3, 1.0).unwrap();
        let value = check_condition_v2(&v, 1.0, 0).unwrap().value().unwrap();
        assert!((value - 0.75 * PI.powf(1.5)).abs() < 1e-9);
    }

    #[test]
    fn coulomb_gaussian_moment() {
        let v = PotentialSpec::coulomb(1.0).unwrap();
        let value = check_condition_v2(&v, 1.0, 0).unwrap().value().unwrap();
        assert!((value - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn zero_potential() {
        let v = PotentialSpec::zero(3);
        assert_eq!(check_condition_v2(&v, 1.0, 100).unwrap().value(), Some(0.0));
        assert_eq!(rollnik_norm_estimate(&v, 100).unwrap().value(), Some(0.0));
    }

    #[test]
    fn harmonic_is_not_rollnik() {
        let v = PotentialSpec::harmonic(3, 1.0).unwrap();
        assert_eq!(rollnik_norm_estimate(&v, 20_000).unwrap(), Verdict::Divergent);
    }

    #[test]
    fn unit_well_rollnik() {
        let v = PotentialSpec::finite_well(3, 1.0, 1.0).unwrap();
        match rollnik_norm_estimate(&v, 200_000).unwrap() {
            Verdict::Finite { value, error } => assert!((value - 4.0 * PI * PI).abs() < 3.0 * error),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rollnik_rejects_other_dimensions() {
        let v = PotentialSpec::finite_well(2, 1.0, 1.0).unwrap();
        assert!(matches!(
            rollnik_norm_estimate(&v, 10),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn grid_sampled_matches_radial() {
        use crate::potentials::GridSpec;
        let grid = GridSpec::box_grid(2, 6.0, 121).unwrap();
        let w = PotentialSpec::harmonic(2, 1.0).unwrap();
        let sampled = PotentialSpec::grid_sampled(grid, w.sample(&grid).unwrap()).unwrap();
        let exact = check_condition_v2(&w, 1.0, 0).unwrap().value().unwrap();
        match check_condition_v2(&sampled, 1.0, 100_000).unwrap() {
            Verdict::Finite { value, error } => assert!((value - exact).abs() < 4.0 * error + 1e-3),
            other => panic!("{other:?}"),
        }
    }
}
