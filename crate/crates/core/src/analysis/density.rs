//! Density of the plate positivity set in plate balls.

use crate::error::{Error, Result};
use crate::field::PlateMask;
use crate::geometry::{pairwise_sum, plate_weights, unit_ball_volume, Ball, Grid};

/// `|{mask = 1} ∩ 𝓑_r(x0)| / (ω_n r^n)`, with the mask read as constant on
/// the dual cell of each plate node.
pub fn density_ratio(grid: &Grid, mask: &PlateMask, x0: &[f64], r: f64) -> Result<f64> {
    if mask.len() != grid.plate_count() {
        return Err(Error::ShapeMismatch("mask length differs from the plate node count".into()));
    }
    let ball = Ball::new(x0, r);
    ball.check_inside(grid)?;
    let covered: Vec<f64> = plate_weights(grid, &ball).into_iter().filter(|&(p, _)| mask.get(p)).map(|(_, w)| w).collect();
    let ratio = pairwise_sum(&covered) / (unit_ball_volume(grid.n()) * r.powi(grid.n() as i32));
    Ok(ratio.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn half_line_and_full() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 1, h, 1.0).unwrap();
        let half = PlateMask::from_predicate(&grid, |x| x[0] > 0.0);
        for r in [8.0 * h, 0.25] {
            assert_abs_diff_eq!(density_ratio(&grid, &half, &[0.0], r).unwrap(), 0.5, epsilon = 2.0 * h / r);
        }
        assert_eq!(density_ratio(&grid, &PlateMask::full(&grid), &[0.1], 0.25).unwrap(), 1.0);
        assert_eq!(density_ratio(&grid, &PlateMask::empty(&grid), &[0.1], 0.25).unwrap(), 0.0);
        assert!(density_ratio(&grid, &half, &[0.8], 0.25).is_err());
    }

    #[test]
    fn half_plane_and_sector() {
        let h = 1.0 / 64.0;
        let grid = make_grid(2, 1, h, 1.0).unwrap();
        let half = PlateMask::from_predicate(&grid, |x| x[0] + 0.3 * x[1] > 0.0);
        assert_abs_diff_eq!(density_ratio(&grid, &half, &[0.0, 0.0], 0.25).unwrap(), 0.5, epsilon = 2.0 * h / 0.25);
        // 270° sector, with the origin sitting between nodes
        let c = [0.5 * h, 0.5 * h];
        let sector = PlateMask::from_predicate(&grid, |x| !(x[0] < c[0] && x[1] < c[1]));
        assert_abs_diff_eq!(density_ratio(&grid, &sector, &c, 0.25).unwrap(), 0.75, epsilon = 2.0 * h / 0.25);
    }
}
