//! Growth of `sup |G|` at a free boundary point: the `r^{1/2}` upper bound
//! and non-degeneracy.

use serde::{Deserialize, Serialize};

use super::{ball_nodes, linear_regression, plate_ball};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::geometry::Ball;

/// Log-log fit of `sup |G|` against `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    /// Fitted exponent.
    pub slope: f64,
    /// `exp(intercept)`.
    pub prefactor: f64,
    /// `max_k sups_k / r_k^{1/2}` for the upper fit, `min_k` for the lower one.
    pub envelope: f64,
}

/// `r_max, r_max/2, ...` down to `8h`, returned in increasing order.
pub fn dyadic_radii(h: f64, r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = r_max;
    while r >= 8.0 * h * (1.0 - 1e-12) {
        out.push(r);
        r *= 0.5;
    }
    out.reverse();
    out
}

fn check_radii(field: &VectorField, x0: &[f64], radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 radii, got {}", radii.len())));
    }
    let floor = 8.0 * field.grid().h();
    for &r in radii {
        if r < floor * (1.0 - 1e-12) {
            return Err(Error::RadiusBelowFloor { radius: r, floor });
        }
        Ball::new(x0, r).check_inside(field.grid())?;
    }
    Ok(())
}

fn fit(radii: &[f64], sups: Vec<f64>, upper: bool) -> Result<PowerFit> {
    if sups.iter().any(|&s| s <= 0.0) {
        return Err(Error::ZeroField);
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    let (slope, intercept) = linear_regression(&lx, &ly);
    let ratios = radii.iter().zip(&sups).map(|(r, s)| s / r.sqrt());
    let envelope = if upper { ratios.fold(f64::NEG_INFINITY, f64::max) } else { ratios.fold(f64::INFINITY, f64::min) };
    Ok(PowerFit { radii: radii.to_vec(), sups, slope, prefactor: intercept.exp(), envelope })
}

/// `sup_{B_r(X0)} |G|` over nodes of the full ball.
pub fn holder_fit(field: &VectorField, x0: &[f64], radii: &[f64]) -> Result<PowerFit> {
    check_radii(field, x0, radii)?;
    let grid = field.grid();
    let sups = radii
        .iter()
        .map(|&r| ball_nodes(grid, x0, r).into_iter().map(|i| field.norm_at(i)).fold(0.0, f64::max))
        .collect();
    fit(radii, sups, true)
}

/// `sup_{𝓑_r(x0)} |G|` over plate nodes.
pub fn nondeg_fit(field: &VectorField, x0: &[f64], radii: &[f64]) -> Result<PowerFit> {
    check_radii(field, x0, radii)?;
    let grid = field.grid();
    let sups = radii
        .iter()
        .map(|&r| plate_ball(grid, x0, r).into_iter().map(|p| field.norm_at(grid.plate_node(p))).fold(0.0, f64::max))
        .collect();
    fit(radii, sups, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::profiles::{sample_profile, ProfileSpec};
    use approx::assert_relative_eq;

    #[test]
    fn u_profile_constants() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let radii = dyadic_radii(h, 0.5);
        assert_eq!(radii.len(), 4);
        for alpha in [1.0, 2.0] {
            let g = sample_profile(&grid, &ProfileSpec::halfplane(1, 2, alpha)).unwrap();
            let up = holder_fit(&g, &[0.0], &radii).unwrap();
            let low = nondeg_fit(&g, &[0.0], &radii).unwrap();
            for f in [&up, &low] {
                assert!((f.slope - 0.5).abs() < 0.02, "{f:?}");
                assert_relative_eq!(f.envelope, alpha, max_relative = 0.05);
                assert_relative_eq!(f.prefactor, alpha, max_relative = 0.05);
            }
        }
    }

    #[test]
    fn preconditions() {
        let h = 1.0 / 64.0;
        let grid = make_grid(1, 1, h, 1.0).unwrap();
        let g = sample_profile(&grid, &ProfileSpec::halfplane(1, 1, 1.0)).unwrap();
        assert!(holder_fit(&g, &[0.0], &[0.25, 0.5]).is_err());
        assert!(matches!(holder_fit(&g, &[0.0], &[4.0 * h, 0.25, 0.5]), Err(Error::RadiusBelowFloor { .. })));
        assert!(matches!(nondeg_fit(&VectorField::zeros(&grid), &[0.0], &[0.125, 0.25, 0.5]), Err(Error::ZeroField)));
    }
}
