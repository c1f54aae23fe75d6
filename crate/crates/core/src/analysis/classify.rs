//! Regular / singular labels from small-radius densities and the blow-up fit.

use serde::{Deserialize, Serialize};

use super::density_ratio;
use crate::blowup::{blowup_series, reference_grid, BlowupSeries};
use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Half-width of the density band around 1/2 for regular points.
    pub band: f64,
    /// Density at or above which (at both radii) a point is singular.
    pub singular_floor: f64,
    /// Blow-up residual bound, as a fraction of `A*`.
    pub fit_tol: f64,
    /// The two density radii, in grid cells.
    pub density_cells: [f64; 2],
    /// Blow-up scales, decreasing.
    pub blowup_scales: Vec<f64>,
    /// Stabilization tolerance passed to the blow-up series.
    pub stab_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            band: 0.05,
            singular_floor: 0.55,
            fit_tol: 0.1,
            density_cells: [8.0, 16.0],
            blowup_scales: vec![0.25, 0.125, 0.0625],
            stab_tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Regular,
    Singular,
    Unresolved,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    /// `(r, density)` at the two radii.
    pub densities: Vec<(f64, f64)>,
    /// Final blow-up residual, when the densities allowed a regular label.
    pub fit_residual: Option<f64>,
    pub blowup: Option<BlowupSeries>,
}

/// Singular if both densities are at least the floor; regular if both lie in
/// `1/2 ± band` and the final blow-up residual is below `fit_tol · A*`;
/// unresolved otherwise.
pub fn classify(field: &VectorField, mask: &PlateMask, x0: &[f64], a_star: f64, config: &ClassifyConfig) -> Result<Classification> {
    if !(a_star > 0.0) {
        return Err(Error::Precondition(format!("A* must be positive, got {a_star}")));
    }
    let grid = field.grid();
    let densities = config
        .density_cells
        .iter()
        .map(|c| {
            let r = c * grid.h();
            density_ratio(grid, mask, x0, r).map(|d| (r, d))
        })
        .collect::<Result<Vec<_>>>()?;
    if densities.iter().all(|&(_, d)| d >= config.singular_floor) {
        return Ok(Classification { label: Label::Singular, densities, fit_residual: None, blowup: None });
    }
    if densities.iter().all(|&(_, d)| (d - 0.5).abs() <= config.band) {
        let series = blowup_series(field, mask, x0, &config.blowup_scales, &reference_grid(grid)?, config.stab_tol)?;
        let residual = series.final_fit().map_or(f64::INFINITY, |f| f.dist_inf);
        let label = if residual < config.fit_tol * a_star { Label::Regular } else { Label::Unresolved };
        return Ok(Classification { label, densities, fit_residual: Some(residual), blowup: Some(series) });
    }
    Ok(Classification { label: Label::Unresolved, densities, fit_residual: None, blowup: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::profiles::{sample_with_mask, ProfileSpec};

    #[test]
    fn half_plane_is_regular() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let (g, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 1.0)]).unwrap();
        let fb = crate::analysis::extract_fb(&grid, &mask).unwrap();
        let c = classify(&g, &mask, &fb.points[0].position, 1.0, &ClassifyConfig::default()).unwrap();
        assert_eq!(c.label, Label::Regular, "{c:?}");
    }

    #[test]
    fn three_quarter_sector_is_singular() {
        let h = 1.0 / 32.0;
        let grid = make_grid(2, 1, h, 1.0).unwrap();
        let c0 = [0.5 * h, 0.5 * h];
        let mask = PlateMask::from_predicate(&grid, |x| !(x[0] < c0[0] && x[1] < c0[1]));
        let g = VectorField::from_fn(&grid, |_, out| out[0] = 1.0);
        let c = classify(&g, &mask, &c0, 1.0, &ClassifyConfig::default()).unwrap();
        assert_eq!(c.label, Label::Singular);
        for (_, d) in &c.densities {
            assert!((d - 0.75).abs() < 0.02, "{d}");
        }
    }

    #[test]
    fn off_band_or_bad_fit_is_unresolved() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        // density 1/2 but the field is far from the half-plane family
        let (_, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 1.0)]).unwrap();
        let g = VectorField::from_fn(&grid, |x, out| {
            out[0] = crate::profiles::eval_u(x[0], x[1]) * (1.0 + 3.0 * x[1]);
            out[1] = 0.0;
        });
        let fb = crate::analysis::extract_fb(&grid, &mask).unwrap();
        let c = classify(&g, &mask, &fb.points[0].position, 1.0, &ClassifyConfig::default()).unwrap();
        assert_eq!(c.label, Label::Unresolved, "{c:?}");
        assert!(c.fit_residual.unwrap() >= 0.1);
        // densities about 0.525 and 0.513: outside a narrow band, below the singular floor
        let shifted = PlateMask::from_predicate(&grid, |x| x[0] > -0.2 * 8.0 * h);
        let c = classify(&g, &shifted, &[-0.2 * 8.0 * h + 0.5 * h], 1.0, &ClassifyConfig { band: 0.01, ..Default::default() });
        assert_eq!(c.unwrap().label, Label::Unresolved);
    }
}
