//! Free boundary slope `|G|(x0 + t ν, 0) ≈ α √t` and the global constant `A*`.

use serde::{Deserialize, Serialize};

use super::{median, FbPoint};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::geometry::MAX_DIM;

/// Fit window `[4h, 32h]`, in grid cells.
pub const WINDOW_CELLS: (usize, usize) = (4, 32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub alpha: f64,
    /// Root-mean-square of `|G| - α √t` over the window.
    pub rms: f64,
    pub window: (f64, f64),
}

/// Least-squares `α` over `t = kh`, `k = 4..=32`.
pub fn slope(field: &VectorField, x0: &[f64], nu: &[f64]) -> Result<SlopeFit> {
    let grid = field.grid();
    let n = grid.n();
    if x0.len() != n || nu.len() != n {
        return Err(Error::ShapeMismatch("slope needs plate coordinates for the point and the normal".into()));
    }
    let h = grid.h();
    let mut y = [0.0; MAX_DIM];
    let mut pairs = Vec::new();
    for k in WINDOW_CELLS.0..=WINDOW_CELLS.1 {
        let t = k as f64 * h;
        for a in 0..n {
            y[a] = x0[a] + t * nu[a];
        }
        pairs.push((t, field.interpolate_norm(&y[..=n])?));
    }
    let num: f64 = pairs.iter().map(|(t, g)| g * t.sqrt()).sum();
    let den: f64 = pairs.iter().map(|(t, _)| t).sum();
    let alpha = num / den;
    let rms = (pairs.iter().map(|(t, g)| (g - alpha * t.sqrt()).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt();
    let window = (WINDOW_CELLS.0 as f64 * h, WINDOW_CELLS.1 as f64 * h);
    Ok(SlopeFit { alpha, rms, window })
}

/// Median slope over `points` (normally the regular points of a minimizer).
pub fn estimate_a_star<'a>(field: &VectorField, points: impl IntoIterator<Item = &'a FbPoint>) -> Result<f64> {
    let alphas = points.into_iter().map(|p| slope(field, &p.position, &p.normal).map(|s| s.alpha)).collect::<Result<Vec<_>>>()?;
    median(&alphas).ok_or_else(|| Error::EmptyFreeBoundary("no points to estimate A*".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::profiles::{sample_profile, ProfileSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn u_profile_slopes() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let g = sample_profile(&grid, &ProfileSpec::halfplane(1, 2, 1.0)).unwrap();
        let s = slope(&g, &[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(s.alpha, 1.0, epsilon = 0.05);
        assert!(s.rms < 1e-12);
        let g = sample_profile(&grid, &ProfileSpec::halfplane(1, 2, 0.7)).unwrap();
        assert_abs_diff_eq!(slope(&g, &[0.0], &[1.0]).unwrap().alpha, 0.7, epsilon = 0.05);
        // reflected profile, read along the inward normal
        let r = sample_profile(&grid, &ProfileSpec::halfplane(1, 2, 1.0).with_nu(vec![-1.0]).with_shift(-0.25)).unwrap();
        let p = FbPoint { position: vec![0.25], normal: vec![-1.0], edge: (0, 0) };
        assert_abs_diff_eq!(estimate_a_star(&r, [&p]).unwrap(), 1.0, epsilon = 1e-12);
        assert!(estimate_a_star(&r, []).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn slope_is_linear(lambda in 0.1f64..5.0, shift in -0.2f64..0.2) {
            let grid = make_grid(1, 2, 1.0 / 64.0, 1.0).unwrap();
            let spec = ProfileSpec::halfplane(1, 2, 1.0).with_shift(shift).with_xi(vec![0.6, 0.8]);
            let g = sample_profile(&grid, &spec).unwrap();
            let base = slope(&g, &[shift], &[1.0]).unwrap().alpha;
            let scaled = slope(&g.scaled(lambda), &[shift], &[1.0]).unwrap().alpha;
            prop_assert!((scaled / lambda - base).abs() <= 1e-12 * base.max(1.0));
        }
    }
}
