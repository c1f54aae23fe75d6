//! ε-flatness in the `(f, ν)` directions and the measured improvement of
//! flatness. All quantities are computed after rescaling `B_ρ0(x0)` to the
//! unit ball: `G'(X') = ρ0^{-1/2} G(x0 + ρ0 X')`.

use serde::{Deserialize, Serialize};

use super::ball_nodes;
use crate::blowup::golden_max;
use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::geometry::{Ball, Grid, MAX_DIM};
use crate::profiles::eval_u;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flatness {
    pub center: Vec<f64>,
    /// Radius of the ball that was rescaled to unit size.
    pub radius: f64,
    pub f: Vec<f64>,
    pub nu: Vec<f64>,
    /// `sup |G' - U(<x', ν>, x'_{n+1}) f|` over the unit ball.
    pub sup_term: f64,
    /// Smallest `s >= 0` with the mask empty on `{<x', ν> < -s}`.
    pub zero_term: f64,
    pub eps: f64,
}

pub(crate) struct Rescaled {
    pub n: usize,
    pub points: Vec<[f64; MAX_DIM]>,
    pub values: Vec<Vec<f64>>,
    /// Rescaled plate coordinates of mask = 1 nodes.
    pub positive: Vec<[f64; MAX_DIM]>,
}

pub(crate) fn rescaled_ball(field: &VectorField, mask: &PlateMask, x0: &[f64], rho: f64) -> Result<Rescaled> {
    let grid = field.grid();
    check_ball(grid, mask, x0, rho)?;
    let n = grid.n();
    let inv = 1.0 / rho.sqrt();
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut positive = Vec::new();
    for idx in ball_nodes(grid, x0, rho) {
        let x = grid.node_coord(idx);
        let mut y = [0.0; MAX_DIM];
        for a in 0..n {
            y[a] = (x[a] - x0[a]) / rho;
        }
        y[n] = x[n] / rho;
        let multi = grid.multi_index(idx);
        if multi[n] == 0 && mask.get(grid.plate_index(&multi[..n])) {
            positive.push(y);
        }
        points.push(y);
        values.push(field.value(idx).into_iter().map(|v| v * inv).collect());
    }
    Ok(Rescaled { n, points, values, positive })
}

fn check_ball(grid: &Grid, mask: &PlateMask, x0: &[f64], rho: f64) -> Result<()> {
    if mask.len() != grid.plate_count() {
        return Err(Error::ShapeMismatch("mask length differs from the plate node count".into()));
    }
    let floor = 8.0 * grid.h();
    if rho < floor * (1.0 - 1e-12) {
        return Err(Error::RadiusBelowFloor { radius: rho, floor });
    }
    Ball::new(x0, rho).check_inside(grid)
}

fn dot(n: usize, nu: &[f64], x: &[f64; MAX_DIM]) -> f64 {
    (0..n).map(|a| nu[a] * x[a]).sum()
}

impl Rescaled {
    fn sup_term(&self, f: &[f64], nu: &[f64]) -> f64 {
        let n = self.n;
        self.points.iter().zip(&self.values).fold(0.0, |acc, (x, g)| {
            let phi = eval_u(dot(n, nu, x), x[n]);
            let d2: f64 = g.iter().zip(f).map(|(gi, fi)| (gi - phi * fi).powi(2)).sum();
            acc.max(d2.sqrt())
        })
    }

    fn zero_term(&self, nu: &[f64]) -> f64 {
        self.positive.iter().fold(0.0, |acc, x| acc.max(-dot(self.n, nu, x)))
    }

    /// Unit `f` closest to `G'` in least squares for the direction `nu`.
    fn best_f(&self, nu: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let m = self.values.first()?.len();
        let mut v = vec![0.0; m];
        for (x, g) in self.points.iter().zip(&self.values) {
            let phi = eval_u(dot(n, nu, x), x[n]);
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi += phi * gi;
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        (norm > 0.0).then(|| v.iter().map(|a| a / norm).collect())
    }

    fn evaluate(&self, center: &[f64], radius: f64, f: Vec<f64>, nu: Vec<f64>) -> Flatness {
        let sup_term = self.sup_term(&f, &nu);
        let zero_term = self.zero_term(&nu);
        Flatness { center: center.to_vec(), radius, f, nu, sup_term, zero_term, eps: sup_term.max(zero_term) }
    }

    /// `sup |G' - (G'·f) f|` over the rescaled points with `|X'| <= r`.
    pub(crate) fn orthogonal_sup(&self, f: &[f64], r: f64) -> f64 {
        let r2 = r * r * (1.0 + 1e-12);
        self.points.iter().zip(&self.values).fold(0.0, |acc, (x, g)| {
            if x[..=self.n].iter().map(|v| v * v).sum::<f64>() > r2 {
                return acc;
            }
            let proj: f64 = g.iter().zip(f).map(|(a, b)| a * b).sum();
            let d2: f64 = g.iter().zip(f).map(|(a, b)| (a - proj * b).powi(2)).sum();
            acc.max(d2.sqrt())
        })
    }
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Precondition("direction must be non-zero".into()));
    }
    Ok(v.iter().map(|a| a / norm).collect())
}

/// ε̂ for given directions, on `B_ρ0(x0)` rescaled to unit size.
pub fn flatness(field: &VectorField, mask: &PlateMask, x0: &[f64], rho0: f64, f: &[f64], nu: &[f64]) -> Result<Flatness> {
    let grid = field.grid();
    if f.len() != grid.m() || nu.len() != grid.n() {
        return Err(Error::ShapeMismatch("f must have m and ν must have n entries".into()));
    }
    let r = rescaled_ball(field, mask, x0, rho0)?;
    Ok(r.evaluate(x0, rho0, unit(f)?, unit(nu)?))
}

fn angle_direction(n: usize, angle: f64) -> Vec<f64> {
    if n == 1 {
        vec![if angle.cos() >= 0.0 { 1.0 } else { -1.0 }]
    } else {
        vec![angle.cos(), angle.sin()]
    }
}

pub(crate) fn best_on(r: &Rescaled, x0: &[f64], rho0: f64) -> Result<Flatness> {
    let n = r.n;
    let eval_angle = |angle: f64| -> Option<Flatness> {
        let nu = angle_direction(n, angle);
        let f = r.best_f(&nu)?;
        Some(r.evaluate(x0, rho0, f, nu))
    };
    let cost = |angle: f64| eval_angle(angle).map_or(f64::INFINITY, |fl| fl.eps);
    let angle = if n == 1 {
        if cost(0.0) <= cost(std::f64::consts::PI) { 0.0 } else { std::f64::consts::PI }
    } else {
        let step = 1f64.to_radians();
        let (best, _) = (0..360)
            .map(|k| (k as f64 * step, cost(k as f64 * step)))
            .fold((0.0, f64::INFINITY), |acc, (a, c)| if c < acc.1 { (a, c) } else { acc });
        let refined = golden_max(best - step, best + step, 1e-5, |a| -cost(a));
        if cost(refined) <= cost(best) { refined } else { best }
    };
    eval_angle(angle).ok_or(Error::ZeroField)
}

/// Minimizes ε̂ over `ν` (two directions for n = 1, a 1° sweep refined by
/// golden section for n = 2) with the least-squares unit `f` for each `ν`.
pub fn best_flatness(field: &VectorField, mask: &PlateMask, x0: &[f64], rho0: f64) -> Result<Flatness> {
    let r = rescaled_ball(field, mask, x0, rho0)?;
    best_on(&r, x0, rho0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IofCheck {
    pub before: Flatness,
    pub after: Flatness,
    pub rho: f64,
    pub eps_before: f64,
    pub eps_after: f64,
    /// Grid floor `4 h^{1/2}` added to `ε_before / 2`.
    pub tolerance: f64,
    pub pass: bool,
    /// `sup_{B_ρ} |G' - (G'·f̂) f̂|` in unit-scale coordinates, `f̂` from the `B_ρ` fit.
    pub component_sup: f64,
    /// `(ε_before / 2)^{3/4} ρ^{1/2}`.
    pub component_bound: f64,
    pub component_ok: bool,
}

/// Flatness on `B_ρ0(x0)` against flatness on `B_{ρ ρ0}(x0)`, both rescaled to unit size.
pub fn iof_check(field: &VectorField, mask: &PlateMask, x0: &[f64], rho0: f64, rho: f64, eps_bar: f64) -> Result<IofCheck> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Precondition(format!("ρ must lie in (0, 1), got {rho}")));
    }
    let outer = rescaled_ball(field, mask, x0, rho0)?;
    let before = best_on(&outer, x0, rho0)?;
    if before.eps > eps_bar {
        return Err(Error::Precondition(format!("ε_before = {} exceeds ε̄ = {eps_bar}", before.eps)));
    }
    let after = best_flatness(field, mask, x0, rho * rho0)?;
    let tolerance = 4.0 * field.grid().h().sqrt();
    let pass = after.eps <= 0.5 * before.eps + tolerance;
    let component_sup = outer.orthogonal_sup(&after.f, rho);
    let component_bound = (0.5 * before.eps).powf(0.75) * rho.sqrt();
    Ok(IofCheck {
        eps_before: before.eps,
        eps_after: after.eps,
        before,
        after,
        rho,
        tolerance,
        pass,
        component_sup,
        component_ok: component_sup <= component_bound + tolerance,
        component_bound,
    })
}

/// Sign of the lead component and size of the orthogonal ones in the frame of
/// a flatness fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorStructure {
    /// `min <G', f̂>` over nodes of the unit ball where `G != 0`.
    pub min_lead: f64,
    pub lead_positive: bool,
    /// Smallest `C` with `|G' - <G', f̂> f̂| <= C ε̂ U(X' + ε̂ e_n)` on `B_{1/2}`.
    pub c_hat: f64,
}

/// Evaluates the lead-component sign and the orthogonal envelope for `fl`,
/// on the same rescaled ball.
pub fn vector_structure(field: &VectorField, mask: &PlateMask, fl: &Flatness) -> Result<VectorStructure> {
    let ball = rescaled_ball(field, mask, &fl.center, fl.radius)?;
    let n = ball.n;
    let mut min_lead = f64::INFINITY;
    let mut c_hat: f64 = 0.0;
    for (x, g) in ball.points.iter().zip(&ball.values) {
        let lead: f64 = g.iter().zip(&fl.f).map(|(a, b)| a * b).sum();
        if g.iter().any(|&v| v != 0.0) {
            min_lead = min_lead.min(lead);
        }
        if x[..=n].iter().map(|v| v * v).sum::<f64>() > 0.25 * (1.0 + 1e-12) {
            continue;
        }
        let orth = g.iter().zip(&fl.f).map(|(a, b)| (a - lead * b).powi(2)).sum::<f64>().sqrt();
        if orth == 0.0 {
            continue;
        }
        let t = dot(n, &fl.nu, x);
        let env = fl.eps * eval_u(t + fl.eps, x[n]);
        c_hat = if env > 0.0 { c_hat.max(orth / env) } else { f64::INFINITY };
    }
    Ok(VectorStructure { min_lead, lead_positive: min_lead > 0.0, c_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::profiles::{sample_with_mask, ProfileSpec};

    fn u_field(h: f64, n: usize, spec: ProfileSpec) -> (VectorField, PlateMask) {
        let grid = make_grid(n, 2, h, 1.0).unwrap();
        sample_with_mask(&grid, &[spec]).unwrap()
    }

    #[test]
    fn u_profile_is_flat() {
        let h = 1.0 / 128.0;
        let (g, mask) = u_field(h, 1, ProfileSpec::halfplane(1, 2, 1.0));
        let fl = flatness(&g, &mask, &[0.0], 0.5, &[1.0, 0.0], &[1.0]).unwrap();
        assert!(fl.eps < 1e-12, "{fl:?}");
        let best = best_flatness(&g, &mask, &[0.0], 0.5).unwrap();
        assert!(best.eps < 1e-12);
        assert_eq!(best.nu, vec![1.0]);
        assert!((best.f[0] - 1.0).abs() < 1e-12);
        let wrong = flatness(&g, &mask, &[0.0], 0.5, &[1.0, 0.0], &[-1.0]).unwrap();
        assert!(wrong.eps > 0.5);
    }

    #[test]
    fn translate_flatness_is_root_of_the_shift() {
        // U(x - 0.1) against U(x) at unit scale: the sup is U(0.1, 0) = 0.1^{1/2},
        // attained on the plate at x = 0.1
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 2.0).unwrap();
        let (g, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 1.0).with_shift(0.1)]).unwrap();
        let fl = flatness(&g, &mask, &[0.0], 1.0, &[1.0, 0.0], &[1.0]).unwrap();
        assert!((fl.sup_term - 0.1f64.sqrt()).abs() < 0.02, "{fl:?}");
        assert_eq!(fl.zero_term, 0.0);
        let back = flatness(&g, &mask, &[0.2], 1.0, &[1.0, 0.0], &[1.0]).unwrap();
        assert!((back.zero_term - 0.1).abs() <= h + 1e-12, "{back:?}");
    }

    #[test]
    fn island_sets_the_zero_term() {
        let h = 1.0 / 64.0;
        let (g, mut mask) = u_field(h, 1, ProfileSpec::halfplane(1, 2, 1.0));
        let grid = g.grid().clone();
        let p = (0..grid.plate_count()).find(|&p| (grid.plate_coord(p)[0] + 0.3125).abs() < 1e-12).unwrap();
        mask.set(p, true);
        let fl = flatness(&g, &mask, &[0.0], 0.5, &[1.0, 0.0], &[1.0]).unwrap();
        assert!(fl.eps >= 0.625 - 1e-12, "{fl:?}");
    }

    #[test]
    fn orthogonal_envelope() {
        // G = U f + δ U(x + ε) f⊥ has C = δ / ε̂ up to the fitted rotation of f
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let g = VectorField::from_fn(&grid, |x, out| {
            out[0] = eval_u(x[0], x[1]);
            out[1] = 0.02 * eval_u(x[0], x[1]);
        });
        let mask = PlateMask::from_predicate(&grid, |x| x[0] > 0.0);
        let fl = best_flatness(&g, &mask, &[0.0], 0.5).unwrap();
        assert!((fl.f[1] / fl.f[0] - 0.02).abs() < 1e-9);
        let vs = vector_structure(&g, &mask, &fl).unwrap();
        assert!(vs.lead_positive);
        assert!(vs.c_hat < 1e-6, "{vs:?}");
    }

    #[test]
    fn rotated_plane_profile() {
        let h = 1.0 / 32.0;
        let angle = 30f64.to_radians();
        let nu = vec![angle.cos(), angle.sin()];
        let (g, mask) = u_field(h, 2, ProfileSpec::halfplane(2, 2, 1.0).with_nu(nu.clone()).with_xi(vec![0.6, 0.8]));
        let best = best_flatness(&g, &mask, &[0.0, 0.0], 0.5).unwrap();
        assert!(best.eps < 0.05, "{best:?}");
        assert!(best.nu[0] * nu[0] + best.nu[1] * nu[1] > 0.999);
        assert!((best.f[0] - 0.6).abs() < 1e-3 && (best.f[1] - 0.8).abs() < 1e-3);
    }

    #[test]
    fn iof_on_u_and_precondition() {
        let h = 1.0 / 128.0;
        let (g, mask) = u_field(h, 1, ProfileSpec::halfplane(1, 2, 1.0));
        for rho in [0.25, 0.125] {
            let c = iof_check(&g, &mask, &[0.0], 0.5, rho, 0.1).unwrap();
            assert!(c.pass && c.component_ok, "{c:?}");
            assert!(c.eps_before < 1e-12 && c.eps_after < 1e-12);
        }
        let (t, tmask) = u_field(h, 1, ProfileSpec::halfplane(1, 2, 1.0).with_shift(0.1));
        assert!(matches!(iof_check(&t, &tmask, &[0.0], 0.5, 0.125, 0.1), Err(Error::Precondition(_))));
        let vs = vector_structure(&g, &mask, &best_flatness(&g, &mask, &[0.0], 0.5).unwrap()).unwrap();
        assert!(vs.lead_positive && vs.c_hat == 0.0);
        assert!(iof_check(&g, &mask, &[0.0], 0.5, 1.5, 0.1).is_err());
    }
}
