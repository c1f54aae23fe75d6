//! Blow-up rescaling `G_{X_0, r}(X) = r^{-1/2} G(X_0 + r X)`, fits against the
//! half-plane family `α U(<x, ν>, x_{n+1}) ξ`, and blow-up series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::geometry::{Grid, MAX_DIM};
use crate::profiles::eval_u;

/// Smallest blow-up scale accepted, in units of the source spacing.
pub const MIN_SCALE_CELLS: f64 = 8.0;
/// Half-width of the tube around the fitted free boundary excluded from
/// `dist_inf`, in units of the source spacing.
pub const TUBE_CELLS: f64 = 4.0;

fn check_mapped_box(source: &Grid, ref_grid: &Grid, x0: &[f64], r: f64) -> Result<()> {
    if ref_grid.n() != source.n() || ref_grid.m() != source.m() {
        return Err(Error::ShapeMismatch("reference grid dimensions differ from the source".into()));
    }
    if x0.len() != source.n() || !(r > 0.0) {
        return Err(Error::Precondition("blow-up needs a plate center and r > 0".into()));
    }
    let reach = r * ref_grid.extent();
    let tol = 1e-12 * source.extent();
    let inside = x0.iter().all(|c| c.abs() + reach <= source.extent() + tol) && reach <= source.extent() + tol;
    if inside {
        Ok(())
    } else {
        let mut corner = x0.to_vec();
        corner.push(reach);
        Err(Error::OutOfBox { point: corner })
    }
}

/// Samples `r^{-1/2} G(X_0 + r X)` on the nodes of `ref_grid`.
pub fn rescale(field: &VectorField, x0: &[f64], r: f64, ref_grid: &Grid) -> Result<VectorField> {
    let source = field.grid();
    check_mapped_box(source, ref_grid, x0, r)?;
    let n = source.n();
    let inv = 1.0 / r.sqrt();
    let mut y = [0.0; MAX_DIM];
    Ok(VectorField::from_fn(ref_grid, |x, out| {
        for a in 0..n {
            y[a] = x0[a] + r * x[a];
        }
        y[n] = r * x[n];
        field.interpolate_into(&y[..=n], out);
        out.iter_mut().for_each(|v| *v *= inv);
    }))
}

/// [`rescale`] plus the pulled-back plate mask.
pub fn rescale_with_mask(
    field: &VectorField,
    mask: &PlateMask,
    x0: &[f64],
    r: f64,
    ref_grid: &Grid,
) -> Result<(VectorField, PlateMask)> {
    let scaled = rescale(field, x0, r, ref_grid)?;
    let source = field.grid();
    let n = source.n();
    let new_mask = PlateMask::from_predicate(ref_grid, |x| {
        let mut y = [0.0; MAX_DIM];
        for a in 0..n {
            y[a] = x0[a] + r * x[a];
        }
        mask_at(source, mask, &y[..n])
    });
    Ok((scaled, new_mask))
}

/// Mask value of the plate dual cell containing `x`; on a shared face the
/// point is positive if any adjacent cell is.
pub fn mask_at(grid: &Grid, mask: &PlateMask, x: &[f64]) -> bool {
    let n = grid.n();
    let mut cands = [[usize::MAX; 2]; MAX_DIM];
    for a in 0..n {
        let last = grid.shape()[a] - 1;
        let s = ((x[a] + grid.extent()) / grid.h()).clamp(0.0, last as f64);
        let fl = s.floor();
        let frac = s - fl;
        let fl = fl as usize;
        if (frac - 0.5).abs() < 1e-9 {
            cands[a] = [fl, (fl + 1).min(last)];
        } else {
            let k = s.round() as usize;
            cands[a] = [k, k];
        }
    }
    let mut multi = [0usize; MAX_DIM];
    for combo in 0..1usize << n {
        for a in 0..n {
            multi[a] = cands[a][combo >> a & 1];
        }
        if mask.get(grid.plate_index(&multi)) {
            return true;
        }
    }
    false
}

/// Best member of `α U(<x, ν>, x_{n+1}) ξ` for a field on a reference grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub xi: Vec<f64>,
    pub nu: Vec<f64>,
    pub alpha: f64,
    /// Sup-norm residual on the closed unit ball outside the excluded tube.
    pub dist_inf: f64,
    /// Radius (reference units) of the excluded tube around `{<x, ν> = 0, x_{n+1} = 0}`.
    pub tube: f64,
}

struct Samples {
    points: Vec<[f64; MAX_DIM]>,
    values: Vec<Vec<f64>>,
}

fn unit_ball_samples(field: &VectorField) -> Samples {
    let grid = field.grid();
    let n = grid.n();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for idx in 0..grid.node_count() {
        let x = grid.node_coord(idx);
        let d2: f64 = x[..=n].iter().map(|v| v * v).sum();
        if d2 <= 1.0 + 1e-12 {
            points.push(x);
            values.push(field.value(idx));
        }
    }
    Samples { points, values }
}

fn direction(n: usize, angle: f64) -> [f64; MAX_DIM] {
    let mut nu = [0.0; MAX_DIM];
    if n == 1 {
        nu[0] = if angle.cos() >= 0.0 { 1.0 } else { -1.0 };
    } else {
        nu[0] = angle.cos();
        nu[1] = angle.sin();
    }
    nu
}

/// Projection `v = Σ φ F` and `Σ φ^2` for direction `nu`, over the samples
/// outside the tube.
fn project(samples: &Samples, n: usize, m: usize, nu: &[f64; MAX_DIM], tube: f64) -> (Vec<f64>, f64) {
    let mut v = vec![0.0; m];
    let mut norm = 0.0;
    for (x, val) in samples.points.iter().zip(&samples.values) {
        let t: f64 = (0..n).map(|a| nu[a] * x[a]).sum();
        if t.hypot(x[n]) < tube {
            continue;
        }
        let phi = eval_u(t, x[n]);
        norm += phi * phi;
        for (vi, fi) in v.iter_mut().zip(val) {
            *vi += phi * fi;
        }
    }
    (v, norm)
}

fn score(samples: &Samples, n: usize, m: usize, angle: f64, tube: f64) -> f64 {
    let (v, norm) = project(samples, n, m, &direction(n, angle), tube);
    if norm > 0.0 { v.iter().map(|a| a * a).sum::<f64>() / norm } else { 0.0 }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub(crate) fn golden_max(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Least-squares fit over the half-plane family. Samples within `tube`
/// (reference units) of the fitted free boundary are left out of both the fit
/// and the residual.
pub fn fit_profile(field: &VectorField, tube: f64) -> Result<ProfileFit> {
    let grid = field.grid();
    let (n, m) = (grid.n(), grid.m());
    let samples = unit_ball_samples(field);
    if samples.values.iter().all(|v| v.iter().all(|&a| a == 0.0)) {
        return Err(Error::ZeroField);
    }
    let angle = if n == 1 {
        let plus = score(&samples, n, m, 0.0, tube);
        let minus = score(&samples, n, m, std::f64::consts::PI, tube);
        if plus >= minus { 0.0 } else { std::f64::consts::PI }
    } else {
        let step = 1f64.to_radians();
        let (best, _) = (0..360)
            .map(|k| (k as f64 * step, score(&samples, n, m, k as f64 * step, tube)))
            .fold((0.0, f64::NEG_INFINITY), |acc, (a, s)| if s > acc.1 { (a, s) } else { acc });
        golden_max(best - step, best + step, 1e-6, |a| score(&samples, n, m, a, tube))
    };
    let nu = direction(n, angle);
    let (v, norm) = project(&samples, n, m, &nu, tube);
    let vnorm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if vnorm == 0.0 || norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let xi: Vec<f64> = v.iter().map(|a| a / vnorm).collect();
    let alpha = vnorm / norm;
    let mut dist_inf: f64 = 0.0;
    for (x, val) in samples.points.iter().zip(&samples.values) {
        let t: f64 = (0..n).map(|a| nu[a] * x[a]).sum();
        if t.hypot(x[n]) < tube {
            continue;
        }
        let phi = alpha * eval_u(t, x[n]);
        let d2: f64 = val.iter().zip(&xi).map(|(f, e)| (f - phi * e).powi(2)).sum();
        dist_inf = dist_inf.max(d2.sqrt());
    }
    Ok(ProfileFit { xi, nu: nu[..n].to_vec(), alpha, dist_inf, tube })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupScale {
    pub r: f64,
    pub fit: ProfileFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupSeries {
    pub center: Vec<f64>,
    pub scales: Vec<BlowupScale>,
    /// `dist_inf` never increases as the scale decreases.
    pub dist_nonincreasing: bool,
    /// Consecutive fits agree within the stabilization tolerance.
    pub stabilized: bool,
}

impl BlowupSeries {
    pub const CSV_HEADER: &'static str = "r,alpha,nu,xi,dist_inf";

    pub fn csv_rows(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";");
        self.scales
            .iter()
            .map(|s| format!("{},{},{},{},{}", s.r, s.fit.alpha, join(&s.fit.nu), join(&s.fit.xi), s.fit.dist_inf))
            .collect()
    }

    pub fn final_fit(&self) -> Option<&ProfileFit> {
        self.scales.last().map(|s| &s.fit)
    }
}

/// Reference grid for blow-ups: extent 1, same spacing as the source.
pub fn reference_grid(source: &Grid) -> Result<Grid> {
    Grid::new(source.n(), source.m(), source.h(), 1.0)
}

/// True if plate nodes of both signs lie within one spacing of `x0`.
pub fn is_free_boundary_point(grid: &Grid, mask: &PlateMask, x0: &[f64]) -> bool {
    let (mut pos, mut neg) = (false, false);
    let reach = grid.h() * (1.0 + 1e-9);
    for p in 0..grid.plate_count() {
        let x = grid.plate_coord(p);
        let d2: f64 = (0..grid.n()).map(|a| (x[a] - x0[a]).powi(2)).sum();
        if d2 <= reach * reach {
            if mask.get(p) { pos = true } else { neg = true }
        }
    }
    pos && neg
}

/// Rescale and fit at each scale (decreasing). `stab_tol` bounds the relative
/// change in `α` and the change in `ν`, `ξ` between consecutive scales.
pub fn blowup_series(
    field: &VectorField,
    mask: &PlateMask,
    x0: &[f64],
    scales: &[f64],
    ref_grid: &Grid,
    stab_tol: f64,
) -> Result<BlowupSeries> {
    let grid = field.grid();
    if !is_free_boundary_point(grid, mask, x0) {
        return Err(Error::Precondition(format!("{x0:?} is not a free boundary point")));
    }
    if scales.is_empty() || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("blow-up scales must be strictly decreasing".into()));
    }
    let floor = MIN_SCALE_CELLS * grid.h();
    if let Some(&r) = scales.iter().find(|&&r| r < floor * (1.0 - 1e-12)) {
        return Err(Error::RadiusBelowFloor { radius: r, floor });
    }
    let fits: Vec<BlowupScale> = scales
        .iter()
        .map(|&r| {
            let scaled = rescale(field, x0, r, ref_grid)?;
            let fit = fit_profile(&scaled, TUBE_CELLS * grid.h() / r)?;
            Ok(BlowupScale { r, fit })
        })
        .collect::<Result<_>>()?;
    let dist_nonincreasing = fits.windows(2).all(|w| w[1].fit.dist_inf <= w[0].fit.dist_inf);
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let stabilized = fits.windows(2).all(|w| {
        let (a, b) = (&w[0].fit, &w[1].fit);
        (a.alpha - b.alpha).abs() <= stab_tol * a.alpha.max(b.alpha)
            && diff(&a.nu, &b.nu) <= stab_tol
            && diff(&a.xi, &b.xi) <= stab_tol
    });
    Ok(BlowupSeries { center: x0.to_vec(), scales: fits, dist_nonincreasing, stabilized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;
    use crate::profiles::{sample_profile, sample_with_mask, ProfileSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn identity_rescale() {
        let grid = make_grid(1, 2, 1.0 / 32.0, 1.0).unwrap();
        let g = sample_profile(&grid, &ProfileSpec::halfplane(1, 2, 1.0).with_shift(0.1)).unwrap();
        let same = rescale(&g, &[0.0], 1.0, &grid).unwrap();
        assert_eq!(same, g);
    }

    #[test]
    fn homogeneous_field_is_a_fixed_point() {
        let h = 1.0 / 64.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let ref_grid = make_grid(1, 2, h, 0.5).unwrap();
        for alpha in [1.0, 0.7] {
            let g = sample_profile(&grid, &ProfileSpec::halfplane(1, 2, alpha)).unwrap();
            for r in [0.5, 0.25] {
                let s = rescale(&g, &[0.0], r, &ref_grid).unwrap();
                for idx in 0..ref_grid.node_count() {
                    let x = ref_grid.node_coord(idx);
                    let exact = alpha * eval_u(x[0], x[1]);
                    // interpolation of √ near the tip, amplified by r^{-1/2}
                    assert!((s.component(0)[idx] - exact).abs() < 2.0 * (h / r).sqrt(), "{x:?}");
                    assert_eq!(s.component(1)[idx], 0.0);
                }
            }
        }
    }

    #[test]
    fn rescale_composes() {
        let h = 1.0 / 64.0;
        let grid = make_grid(1, 1, h, 1.0).unwrap();
        let g = VectorField::from_fn(&grid, |x, out| out[0] = (3.0 * x[0]).sin() + x[1] * x[1]);
        let ref_grid = make_grid(1, 1, h, 0.5).unwrap();
        let x0 = [0.125];
        let once = rescale(&g, &x0, 0.25, &ref_grid).unwrap();
        let mid_grid = make_grid(1, 1, h, 1.0).unwrap();
        let first = rescale(&g, &x0, 0.5, &mid_grid).unwrap();
        let twice = rescale(&first, &[0.0], 0.5, &ref_grid).unwrap();
        for idx in 0..ref_grid.node_count() {
            assert_abs_diff_eq!(once.component(0)[idx], twice.component(0)[idx], epsilon = 4.0 * h * h * 9.0);
        }
    }

    #[test]
    fn rescale_out_of_box() {
        let grid = make_grid(1, 1, 1.0 / 16.0, 1.0).unwrap();
        let g = VectorField::zeros(&grid);
        assert!(rescale(&g, &[0.5], 0.75, &grid).is_err());
    }

    #[test]
    fn fit_recovers_family_member() {
        let h = 1.0 / 64.0;
        let grid = make_grid(1, 3, h, 1.0).unwrap();
        let spec = ProfileSpec::halfplane(1, 3, 0.7).with_xi(vec![0.0, 1.0, 0.0]);
        let g = sample_profile(&grid, &spec).unwrap();
        let fit = fit_profile(&g, 4.0 * h).unwrap();
        assert_abs_diff_eq!(fit.alpha, 0.7, epsilon = 1e-12);
        assert_eq!(fit.nu, vec![1.0]);
        assert_abs_diff_eq!(fit.xi[1], 1.0, epsilon = 1e-12);
        assert!(fit.dist_inf < 1e-12);
        let flipped = sample_profile(&grid, &spec.clone().with_nu(vec![-1.0])).unwrap();
        assert_eq!(fit_profile(&flipped, 4.0 * h).unwrap().nu, vec![-1.0]);
    }

    #[test]
    fn fit_resolves_rotation_in_the_plate() {
        let h = 1.0 / 16.0;
        let grid = make_grid(2, 1, h, 1.0).unwrap();
        let angle = 30f64.to_radians();
        let spec = ProfileSpec::halfplane(2, 1, 1.0).with_nu(vec![angle.cos(), angle.sin()]);
        let g = sample_profile(&grid, &spec).unwrap();
        let fit = fit_profile(&g, 4.0 * h).unwrap();
        let err = (fit.nu[0] * spec.nu[0] + fit.nu[1] * spec.nu[1]).clamp(-1.0, 1.0).acos().to_degrees();
        assert!(err < 1.5, "{err}");
    }

    #[test]
    fn fit_rejects_two_component_field() {
        let h = 1.0 / 64.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let a = ProfileSpec::halfplane(1, 2, 1.0).with_shift(0.4);
        let b = ProfileSpec::halfplane(1, 2, 1.0).with_nu(vec![-1.0]).with_shift(0.4).with_xi(vec![0.0, 1.0]);
        let g = crate::profiles::sample_profiles(&grid, &[a, b]).unwrap();
        let fit = fit_profile(&g, 4.0 * h).unwrap();
        assert!(fit.dist_inf > 0.3, "{}", fit.dist_inf);
        let zero = VectorField::zeros(&grid);
        assert_eq!(fit_profile(&zero, 0.0), Err(Error::ZeroField));
    }

    #[test]
    fn series_on_exact_profile() {
        let h = 1.0 / 128.0;
        let grid = make_grid(1, 2, h, 1.0).unwrap();
        let (g, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 1.0)]).unwrap();
        let ref_grid = reference_grid(&grid).unwrap();
        let s = blowup_series(&g, &mask, &[0.0], &[0.25, 0.125, 0.0625], &ref_grid, 0.05).unwrap();
        for sc in &s.scales {
            assert!(sc.fit.dist_inf < 0.05, "{:?}", sc.fit);
            assert_abs_diff_eq!(sc.fit.alpha, 1.0, epsilon = 0.01);
        }
        assert!(s.stabilized);
        assert!(blowup_series(&g, &mask, &[0.5], &[0.25], &ref_grid, 0.05).is_err());
        assert!(blowup_series(&g, &mask, &[0.0], &[0.125, 0.25], &ref_grid, 0.05).is_err());
        assert!(blowup_series(&g, &mask, &[0.0], &[0.25, 4.0 * h], &ref_grid, 0.05).is_err());
    }

    #[test]
    fn mask_pullback_ties() {
        let grid = make_grid(1, 1, 0.25, 1.0).unwrap();
        let mask = PlateMask::from_predicate(&grid, |x| x[0] > 0.0);
        assert!(!mask_at(&grid, &mask, &[0.0]));
        assert!(mask_at(&grid, &mask, &[0.125]));
        assert!(!mask_at(&grid, &mask, &[0.1]));
        assert!(mask_at(&grid, &mask, &[0.2]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fit_is_amplitude_covariant(lambda in 0.1f64..10.0, shift in -0.2f64..0.2, a in 0.2f64..2.0) {
            let h = 1.0 / 32.0;
            let grid = make_grid(1, 2, h, 1.0).unwrap();
            let spec = ProfileSpec::halfplane(1, 2, a).with_shift(shift).with_xi(vec![0.6, 0.8]);
            let g = sample_profile(&grid, &spec).unwrap();
            let f1 = fit_profile(&g, 4.0 * h).unwrap();
            let f2 = fit_profile(&g.scaled(lambda), 4.0 * h).unwrap();
            prop_assert_eq!(&f1.nu, &f2.nu);
            for (x, y) in f1.xi.iter().zip(&f2.xi) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert!((f2.alpha - lambda * f1.alpha).abs() < 1e-12 * f2.alpha);
        }
    }
}
