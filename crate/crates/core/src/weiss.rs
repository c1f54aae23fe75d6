//! The Weiss functional
//! `W(X_0, G, r) = r^{-n} J(G, B_r(X_0)) - (1/2) r^{-(n+1)} ∫_{∂B_r(X_0)} |G|^2`,
//! radial series and the lower bound on its derivative.

use serde::{Deserialize, Serialize};

use crate::energy::energy;
use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::geometry::{ball_quadrature, pairwise_sum, Ball, MAX_DIM};

/// Smallest radius accepted, in units of the grid spacing.
pub const MIN_RADIUS_CELLS: f64 = 4.0;

fn check_radius(field: &VectorField, r: f64) -> Result<()> {
    let floor = MIN_RADIUS_CELLS * field.grid().h();
    if r < floor * (1.0 - 1e-12) {
        return Err(Error::RadiusBelowFloor { radius: r, floor });
    }
    Ok(())
}

pub fn weiss_value(field: &VectorField, mask: &PlateMask, x0: &[f64], r: f64) -> Result<f64> {
    check_radius(field, r)?;
    let n = field.grid().n() as i32;
    let parts = energy(field, mask, &Ball::new(x0, r))?;
    Ok(parts.total / r.powi(n) - 0.5 * parts.boundary_l2 / r.powi(n + 1))
}

/// `r^{-(n+2)} Σ_i ∫_{∂B_r} (<∇g^i, X - X_0> - g^i/2)^2`, with the radial
/// derivative taken by central differences of interpolated values.
pub fn deriv_lowerbound(field: &VectorField, x0: &[f64], r: f64) -> Result<f64> {
    check_radius(field, r)?;
    let grid = field.grid();
    let n = grid.n();
    let ball = Ball::new(x0, r);
    // the outer difference point must stay in the box
    let delta = 0.5 * grid.h();
    Ball::new(x0, r + delta).check_inside(grid)?;
    let quad = ball_quadrature(grid, &ball)?;
    let c = ball.center_point();
    let m = grid.m();
    let (mut gm, mut g0, mut gp) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut y = [0.0; MAX_DIM];
    let terms: Vec<f64> = quad
        .surface
        .iter()
        .map(|s| {
            let at = |rho: f64, out: &mut [f64], y: &mut [f64; MAX_DIM]| {
                for a in 0..=n {
                    y[a] = c[a] + rho * s.normal[a];
                }
                field.interpolate_into(&y[..=n], out);
            };
            at(r - delta, &mut gm, &mut y);
            at(r, &mut g0, &mut y);
            at(r + delta, &mut gp, &mut y);
            let sq: f64 = (0..m)
                .map(|i| {
                    let radial = r * (gp[i] - gm[i]) / (2.0 * delta);
                    (radial - 0.5 * g0[i]).powi(2)
                })
                .sum();
            s.weight * sq
        })
        .collect();
    Ok(pairwise_sum(&terms) / r.powi(n as i32 + 2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeissSeries {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub w: Vec<f64>,
    pub deriv_lb: Vec<f64>,
    /// `(W_{k+1} - W_k) / (r_{k+1} - r_k)`.
    pub slopes: Vec<f64>,
    /// Allowed decrease of `W` between consecutive radii.
    pub tol_w: f64,
    /// Allowed shortfall of a slope below the mean lower bound of its interval.
    pub tol_slope: f64,
    /// Intervals where `W` drops by more than `tol_w`.
    pub decreases: Vec<usize>,
    /// Intervals where the slope falls short of the lower bound by more than `tol_slope`.
    pub lb_violations: Vec<usize>,
}

impl WeissSeries {
    pub const CSV_HEADER: &'static str = "r,W,slope,deriv_lb";

    /// One row per radius; the slope column holds the interval ending at that
    /// radius and is empty on the first row.
    pub fn csv_rows(&self) -> Vec<String> {
        (0..self.radii.len())
            .map(|k| {
                let slope = if k == 0 { String::new() } else { self.slopes[k - 1].to_string() };
                format!("{},{},{},{}", self.radii[k], self.w[k], slope, self.deriv_lb[k])
            })
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.decreases.is_empty() && self.lb_violations.is_empty()
    }
}

/// `k` geometrically spaced radii from `r_min` to `r_max`.
pub fn geometric_radii(r_min: f64, r_max: f64, k: usize) -> Result<Vec<f64>> {
    if k < 2 || !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::Precondition(format!("need k >= 2 radii with 0 < r_min < r_max, got {r_min}, {r_max}, {k}")));
    }
    let ratio = (r_max / r_min).ln() / (k - 1) as f64;
    Ok((0..k).map(|i| if i + 1 == k { r_max } else { r_min * (ratio * i as f64).exp() }).collect())
}

/// Weiss values over geometric radii with the monotonicity report
/// (`tol_w = 5h`, `tol_slope = 10h`).
pub fn weiss_series(field: &VectorField, mask: &PlateMask, x0: &[f64], r_min: f64, r_max: f64, k: usize) -> Result<WeissSeries> {
    let radii = geometric_radii(r_min, r_max, k)?;
    let h = field.grid().h();
    let w = radii.iter().map(|&r| weiss_value(field, mask, x0, r)).collect::<Result<Vec<_>>>()?;
    let deriv_lb = radii.iter().map(|&r| deriv_lowerbound(field, x0, r)).collect::<Result<Vec<_>>>()?;
    let slopes: Vec<f64> = (0..k - 1).map(|i| (w[i + 1] - w[i]) / (radii[i + 1] - radii[i])).collect();
    let (tol_w, tol_slope) = (5.0 * h, 10.0 * h);
    let decreases = (0..k - 1).filter(|&i| w[i + 1] - w[i] < -tol_w).collect();
    let lb_violations = (0..k - 1)
        .filter(|&i| slopes[i] < 0.5 * (deriv_lb[i] + deriv_lb[i + 1]) - tol_slope)
        .collect();
    Ok(WeissSeries { center: x0.to_vec(), radii, w, deriv_lb, slopes, tol_w, tol_slope, decreases, lb_violations })
}

/// `(W(8h), 2 W(8h) - W(16h))`: the small-radius value and its Richardson estimate.
pub fn weiss_limit(field: &VectorField, mask: &PlateMask, x0: &[f64]) -> Result<(f64, f64)> {
    let h = field.grid().h();
    let w8 = weiss_value(field, mask, x0, 8.0 * h)?;
    let w16 = weiss_value(field, mask, x0, 16.0 * h)?;
    Ok((w8, 2.0 * w8 - w16))
}
