//! Trap widths `b - a` with `U(X + a e_n) <= g¹ <= |G| <= U(X + b e_n)` over
//! dyadic scales, after rotating the fitted `ν̂` to `e_n` and rescaling each
//! ball to unit size, and their geometric decay rate.

use serde::{Deserialize, Serialize};

use super::flatness::{best_on, rescaled_ball};
use super::linear_regression;
use crate::blowup::TUBE_CELLS;
use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::profiles::u_level_t;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapWidth {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub width: f64,
    /// Best flatness at this scale; its `(f̂, ν̂)` define the frame.
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub center: Vec<f64>,
    pub eps_bar: f64,
    /// Flatness at the largest scale.
    pub eps_top: f64,
    /// Scales where the trap holds, largest first.
    pub traps: Vec<TrapWidth>,
    /// `1 - exp(slope)` of `ln(width)` against the scale index, when at least
    /// three positive widths are available.
    pub eta: Option<f64>,
    /// First scale at which `g¹ > 0` failed off the plate.
    pub failure_scale: Option<f64>,
}

/// Scales must decrease strictly and stay at or above `8h`. The field is
/// expected in units where the free boundary slope is one (divided by `A*`).
pub fn harnack_decay(field: &VectorField, mask: &PlateMask, x0: &[f64], scales: &[f64], eps_bar: f64) -> Result<HarnackReport> {
    if scales.len() < 2 || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("Harnack scales must be at least two, strictly decreasing".into()));
    }
    let h = field.grid().h();
    let n = field.grid().n();
    let mut traps = Vec::new();
    let mut failure_scale = None;
    let mut eps_top = f64::NAN;
    for (k, &r) in scales.iter().enumerate() {
        let ball = rescaled_ball(field, mask, x0, r)?;
        let fl = best_on(&ball, x0, r)?;
        if k == 0 {
            eps_top = fl.eps;
            if fl.eps > eps_bar {
                return Err(Error::Precondition(format!("flatness {} at the largest scale exceeds ε̄ = {eps_bar}", fl.eps)));
            }
        }
        let tube = TUBE_CELLS * h / r;
        let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut broken = false;
        for (x, g) in ball.points.iter().zip(&ball.values) {
            let t: f64 = (0..n).map(|i| fl.nu[i] * x[i]).sum();
            let s = x[n];
            if t.hypot(s) < tube {
                continue;
            }
            let g1: f64 = g.iter().zip(&fl.f).map(|(a, b)| a * b).sum();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            match u_level_t(g1, s) {
                Some(level) => a = a.min(level - t),
                None if s == 0.0 && g1 == 0.0 => a = a.min(-t),
                None => {
                    broken = true;
                    break;
                }
            }
            if let Some(level) = u_level_t(norm, s) {
                b = b.max(level - t);
            }
        }
        if broken {
            failure_scale = Some(r);
            break;
        }
        traps.push(TrapWidth { r, a, b, width: b - a, eps: fl.eps });
    }
    let positive: Vec<(f64, f64)> = traps
        .iter()
        .enumerate()
        .filter(|(_, t)| t.width > 1e-12)
        .map(|(k, t)| (k as f64, t.width.ln()))
        .collect();
    let eta = (positive.len() >= 3).then(|| {
        let (ks, ls): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        1.0 - linear_regression(&ks, &ls).0.exp()
    });
    Ok(HarnackReport { center: x0.to_vec(), eps_bar, eps_top, traps, eta, failure_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::profiles::{sample_with_mask, ProfileSpec};

    #[test]
    fn u_profile_has_zero_width() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let scales = [0.25, 0.125, 0.0625];
        for shift in [0.0, 0.1] {
            let (g, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 1.0).with_shift(shift)]).unwrap();
            let rep = harnack_decay(&g, &mask, &[shift], &scales, 0.1).unwrap();
            assert_eq!(rep.traps.len(), 3);
            assert!(rep.failure_scale.is_none());
            for t in &rep.traps {
                assert!(t.width.abs() < 1e-9, "{t:?}");
            }
            assert!(rep.eta.is_none());
        }
    }

    #[test]
    fn curved_boundary_decays() {
        // U + 0.2 Re z^{3/2}: an exact harmonic profile with a curved level structure
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 1, h, 1.0).unwrap();
        let g = VectorField::from_fn(&grid, |x, out| {
            out[0] = crate::profiles::eval_u(x[0], x[1]) + 0.2 * crate::profiles::eval_u32(x[0], x[1]);
        });
        let mask = PlateMask::from_predicate(&grid, |x| x[0] > 0.0);
        let rep = harnack_decay(&g, &mask, &[0.0], &[0.5, 0.25, 0.125, 0.0625], 0.2).unwrap();
        assert_eq!(rep.traps.len(), 4);
        let w: Vec<f64> = rep.traps.iter().map(|t| t.width).collect();
        assert!(w.windows(2).all(|p| p[1] < p[0]), "{w:?}");
        let eta = rep.eta.unwrap();
        assert!(eta > 0.3 && eta < 0.7, "{eta}");
    }

    #[test]
    fn sign_change_breaks_the_trap() {
        let h = 1.0 / 64.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let g = VectorField::from_fn(&grid, |x, out| {
            let u = crate::profiles::eval_u(x[0], x[1]);
            // a slightly negative node just above the slit, where U is small
            out[0] = if (x[0] + 0.15625).hypot(x[1] - 0.015625) < 1e-3 { -1e-3 } else { u };
            out[1] = 0.0;
        });
        let mask = PlateMask::from_predicate(&grid, |x| x[0] > 0.0);
        let rep = harnack_decay(&g, &mask, &[0.0], &[0.5, 0.25, 0.125], 0.1).unwrap();
        assert_eq!(rep.failure_scale, Some(0.5));
        assert!(rep.failure_scale.is_some());
        assert!(harnack_decay(&g, &mask, &[0.0], &[0.25, 0.5], 0.3).is_err());
    }
}
