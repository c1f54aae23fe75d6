//! Closed-form fields built from `U(t, s) = Re sqrt(t + i s)`: the half-plane
//! ground state, its translates, rotations and amplitudes, and vector profiles
//! `ξ α U(<x, ν> - c, x_{n+1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::geometry::Grid;

/// `U(t, s) = r^{1/2} cos(θ/2)` with `θ ∈ [-π, π]`.
///
/// Evaluated as `sqrt((r + t) / 2)`, switching to the cancellation-free form
/// `|s| / sqrt(2 (r - t))` for `t < 0`. The result is exactly zero on
/// `{t <= 0, s = 0}`.
pub fn eval_u(t: f64, s: f64) -> f64 {
    let r = t.hypot(s);
    if t >= 0.0 {
        (0.5 * (r + t)).sqrt()
    } else {
        s.abs() / (2.0 * (r - t)).sqrt()
    }
}

/// `Re (t + i|s|)^{3/2} = t U(t, s) - |s| U(-t, s)`: the next homogeneous
/// harmonic function vanishing on `{t <= 0, s = 0}`.
pub fn eval_u32(t: f64, s: f64) -> f64 {
    t * eval_u(t, s) - s.abs() * eval_u(-t, s)
}

/// Gradient of `U` in the `(t, s)` plane for `s >= 0` (even extension below).
pub fn grad_u(t: f64, s: f64) -> Result<(f64, f64)> {
    let r = t.hypot(s);
    if r == 0.0 {
        return Err(Error::Singular("U is not differentiable at the origin".into()));
    }
    // f = sqrt(z), f' = 1/(2 sqrt z); U = Re f so U_t = Re f', U_s = -Im f'
    let half = 0.5 / r.sqrt();
    let cos_half = eval_u(t, s) / r.sqrt();
    let sin_half = eval_u(-t, s.abs()) / r.sqrt() * s.signum();
    Ok((half * cos_half, half * sin_half))
}

/// `|∇U|^2 = 1 / (4 |(t, s)|)`.
pub fn grad_u_sq(t: f64, s: f64) -> Result<f64> {
    let r = t.hypot(s);
    if r == 0.0 {
        return Err(Error::Singular("|∇U|^2 is unbounded at the origin".into()));
    }
    Ok(0.25 / r)
}

/// The `t` at which `U(t, s) = v`, for `v > 0`: `t = v^2 - s^2 / (4 v^2)`.
///
/// `U(·, s)` is strictly increasing where positive, so `U(t', s) <= v` iff
/// `t' <= t`. Returns `None` for `v <= 0`.
pub fn u_level_t(v: f64, s: f64) -> Option<f64> {
    if v > 0.0 {
        Some(v * v - s * s / (4.0 * v * v))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Halfplane,
    Comparison,
    /// `ξ α Re((<x, ν> - c) + i x_{n+1})^{3/2}`, a perturbation term with the
    /// same zero set and slope as the half-plane profile.
    ThreeHalves,
}

/// `ξ α U(<x, ν> - c, x_{n+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub alpha: f64,
    /// Unit direction in the plate, pointing into the positivity set.
    pub nu: Vec<f64>,
    /// Free boundary offset: the zero set on the plate is `<x, ν> <= shift`.
    #[serde(default)]
    pub shift: f64,
    /// Unit vector in component space.
    pub xi: Vec<f64>,
}

const UNIT_TOL: f64 = 1e-9;

impl ProfileSpec {
    /// `α U(x_n, x_{n+1}) f^1`, the standard half-plane profile.
    pub fn halfplane(n: usize, m: usize, alpha: f64) -> Self {
        let mut nu = vec![0.0; n];
        nu[n - 1] = 1.0;
        let mut xi = vec![0.0; m];
        xi[0] = 1.0;
        ProfileSpec { kind: ProfileKind::Halfplane, alpha, nu, shift: 0.0, xi }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_nu(mut self, nu: Vec<f64>) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_xi(mut self, xi: Vec<f64>) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_kind(mut self, kind: ProfileKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.nu.len() != n {
            return Err(Error::InvalidProfile(format!("nu has {} entries, expected {n}", self.nu.len())));
        }
        if self.xi.len() != m {
            return Err(Error::InvalidProfile(format!("xi has {} entries, expected {m}", self.xi.len())));
        }
        let unit = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>().sqrt() - 1.0).abs() < UNIT_TOL;
        if !unit(&self.nu) {
            return Err(Error::InvalidProfile("nu is not a unit vector".into()));
        }
        if !unit(&self.xi) {
            return Err(Error::InvalidProfile("xi is not a unit vector".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidProfile(format!("alpha = {} must be positive", self.alpha)));
        }
        if !self.shift.is_finite() {
            return Err(Error::InvalidProfile("shift must be finite".into()));
        }
        Ok(())
    }

    /// Scalar part `α U(<x, ν> - c, x_{n+1})` at `x` (length `n + 1`).
    pub fn scalar(&self, x: &[f64]) -> f64 {
        let n = self.nu.len();
        let t: f64 = self.nu.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.shift;
        match self.kind {
            ProfileKind::ThreeHalves => self.alpha * eval_u32(t, x[n]),
            _ => self.alpha * eval_u(t, x[n]),
        }
    }
}

/// `ξ α U(<x, ν> - c, x_{n+1})`.
pub fn eval_profile(spec: &ProfileSpec, x: &[f64]) -> Vec<f64> {
    let s = spec.scalar(x);
    spec.xi.iter().map(|v| v * s).collect()
}

/// Samples a sum of profiles on `grid`.
pub fn sample_profiles(grid: &Grid, specs: &[ProfileSpec]) -> Result<VectorField> {
    for spec in specs {
        spec.validate(grid.n(), grid.m())?;
    }
    Ok(VectorField::from_fn(grid, |x, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for spec in specs {
            let s = spec.scalar(x);
            for (o, xi) in out.iter_mut().zip(&spec.xi) {
                *o += xi * s;
            }
        }
    }))
}

pub fn sample_profile(grid: &Grid, spec: &ProfileSpec) -> Result<VectorField> {
    sample_profiles(grid, std::slice::from_ref(spec))
}

/// Threshold `τ = h^{1/2} / 4` used to read a positivity set off closed-form data.
pub fn diagnostic_threshold(h: f64) -> f64 {
    0.25 * h.sqrt()
}

/// Samples a profile and derives its plate mask by thresholding `|G| > τ`.
pub fn sample_with_mask(grid: &Grid, specs: &[ProfileSpec]) -> Result<(VectorField, PlateMask)> {
    let field = sample_profiles(grid, specs)?;
    let mask = PlateMask::from_threshold(&field, diagnostic_threshold(grid.h()));
    Ok((field, mask))
}

/// Translate profiles `α U` are strict comparison subsolutions iff `α > 1`.
pub fn is_strict_subsolution(spec: &ProfileSpec) -> Result<bool> {
    require_comparison(spec)?;
    Ok(spec.alpha > 1.0)
}

/// Translate profiles `α U` are strict comparison supersolutions iff `α < 1`.
pub fn is_strict_supersolution(spec: &ProfileSpec) -> Result<bool> {
    require_comparison(spec)?;
    Ok(spec.alpha < 1.0)
}

fn require_comparison(spec: &ProfileSpec) -> Result<()> {
    match spec.kind {
        ProfileKind::Comparison => Ok(()),
        ProfileKind::Halfplane | ProfileKind::ThreeHalves => Err(Error::InvalidProfile("expected a comparison profile".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn u_values() {
        assert_eq!(eval_u(1.0, 0.0), 1.0);
        assert_eq!(eval_u(-1.0, 0.0), 0.0);
        assert_eq!(eval_u(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(eval_u(0.0, 1.0), FRAC_1_SQRT_2, epsilon = 1e-15);
        // even in s
        assert_eq!(eval_u(0.3, -0.2), eval_u(0.3, 0.2));
    }

    #[test]
    fn u_matches_polar_form() {
        for k in 0..50 {
            let theta = -std::f64::consts::PI + k as f64 * 0.1257;
            let r = 0.37;
            let (t, s) = (r * theta.cos(), r * theta.sin());
            assert_abs_diff_eq!(eval_u(t, s), r.sqrt() * (theta / 2.0).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn three_halves_matches_polar_form() {
        for k in 0..50 {
            let theta = -std::f64::consts::PI + k as f64 * 0.1257;
            let r: f64 = 0.37;
            let (t, s) = (r * theta.cos(), r * theta.sin());
            assert_abs_diff_eq!(eval_u32(t, s), r.powf(1.5) * (1.5 * theta).cos(), epsilon = 1e-14);
        }
        assert_eq!(eval_u32(-0.5, 0.0), 0.0);
    }

    #[test]
    fn grad_u_sq_values() {
        assert_abs_diff_eq!(grad_u_sq(1.0, 0.0).unwrap(), 0.25);
        assert_abs_diff_eq!(grad_u_sq(0.0, 0.25).unwrap(), 1.0);
        assert!(grad_u_sq(0.0, 0.0).is_err());
        let (gt, gs) = grad_u(0.3, 0.4).unwrap();
        assert_abs_diff_eq!(gt * gt + gs * gs, grad_u_sq(0.3, 0.4).unwrap(), epsilon = 1e-14);
        // finite difference check
        let d = 1e-6;
        let ft = (eval_u(0.3 + d, 0.4) - eval_u(0.3 - d, 0.4)) / (2.0 * d);
        let fs = (eval_u(0.3, 0.4 + d) - eval_u(0.3, 0.4 - d)) / (2.0 * d);
        assert_abs_diff_eq!(gt, ft, epsilon = 1e-8);
        assert_abs_diff_eq!(gs, fs, epsilon = 1e-8);
    }

    #[test]
    fn dirichlet_energy_of_u_on_disk() {
        // midpoint rule in polar coordinates of 1/(4ρ) ρ dρ dθ
        let r = 0.5;
        let (nr, nt) = (400, 400);
        let mut acc = 0.0;
        for i in 0..nr {
            let rho = (i as f64 + 0.5) * r / nr as f64;
            for j in 0..nt {
                let th = -std::f64::consts::PI + (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / nt as f64;
                let g = grad_u_sq(rho * th.cos(), rho * th.sin()).unwrap();
                acc += g * rho * (r / nr as f64) * (2.0 * std::f64::consts::PI / nt as f64);
            }
        }
        assert_abs_diff_eq!(acc, std::f64::consts::PI * r / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn profile_values() {
        let spec = ProfileSpec::halfplane(1, 3, 1.0);
        assert_eq!(eval_profile(&spec, &[1.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let shifted = spec.clone().with_shift(0.25);
        assert_eq!(eval_profile(&shifted, &[0.25, 0.0]), vec![0.0, 0.0, 0.0]);
        let doubled = ProfileSpec { alpha: 2.0, ..spec.clone() };
        let x = [0.3, 0.2];
        let a = eval_profile(&spec, &x);
        let b = eval_profile(&doubled, &x);
        for (u, v) in a.iter().zip(&b) {
            assert_abs_diff_eq!(2.0 * u, *v, epsilon = 1e-15);
        }
    }

    #[test]
    fn profile_validation() {
        let spec = ProfileSpec::halfplane(2, 2, 1.0);
        assert!(spec.validate(2, 2).is_ok());
        assert!(spec.validate(1, 2).is_err());
        assert!(spec.clone().with_nu(vec![1.0, 1.0]).validate(2, 2).is_err());
        assert!(ProfileSpec { alpha: 0.0, ..spec.clone() }.validate(2, 2).is_err());
        assert!(spec.with_xi(vec![0.6, 0.8]).validate(2, 2).is_ok());
    }

    #[test]
    fn comparison_strictness() {
        let base = ProfileSpec::halfplane(1, 1, 1.1).with_kind(ProfileKind::Comparison);
        assert!(is_strict_subsolution(&base).unwrap());
        assert!(!is_strict_supersolution(&base).unwrap());
        let sup = ProfileSpec { alpha: 0.9, ..base.clone() };
        assert!(is_strict_supersolution(&sup).unwrap());
        assert!(!is_strict_subsolution(&sup).unwrap());
        let edge = ProfileSpec { alpha: 1.0, ..base.clone() };
        assert!(!is_strict_subsolution(&edge).unwrap());
        assert!(!is_strict_supersolution(&edge).unwrap());
        assert!(is_strict_subsolution(&ProfileSpec::halfplane(1, 1, 1.1)).is_err());
    }

    #[test]
    fn discrete_laplacian_of_u() {
        // 5-point stencil sum of sampled U: O(h^{1/2}) at the tip, O(h^2 / d^{3/2}) at distance d
        let h = 1.0 / 128.0;
        let stencil = |t: f64, s: f64| {
            eval_u(t + h, s) + eval_u(t - h, s) + eval_u(t, s + h) + eval_u(t, s - h) - 4.0 * eval_u(t, s)
        };
        let near = stencil(h, 0.0).abs();
        assert!(near > 0.01 * h.sqrt() && near < 2.0 * h.sqrt(), "near tip {near}");
        for &(t, s) in &[(0.0, 0.1), (0.25, 0.0), (-0.3, 0.3), (0.0, 0.5)] {
            let d: f64 = t * t + s * s;
            let d = d.sqrt();
            let far = stencil(t, s).abs();
            assert!(far < h * h / d.powf(1.5), "({t}, {s}): {far}");
        }
    }

    proptest! {
        #[test]
        fn u_is_half_homogeneous(t in -10.0f64..10.0, s in -10.0f64..10.0, lam in 0.01f64..100.0) {
            let a = eval_u(lam * t, lam * s);
            let b = lam.sqrt() * eval_u(t, s);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn u_slope_on_plate(t in 1e-6f64..1e3) {
            prop_assert!((eval_u(t, 0.0) / t.sqrt() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn u_level_inverts(v in 1e-3f64..3.0, s in -2.0f64..2.0) {
            let t = u_level_t(v, s).unwrap();
            prop_assert!((eval_u(t, s) - v).abs() < 1e-9 * (1.0 + v));
        }
    }
}
