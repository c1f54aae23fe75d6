//! Built-in oracle suite: closed-form and trivial examples of every module at
//! `h = 1/128`, `n = 1`.

use std::f64::consts::PI;

use thinfb::analysis::{
    best_flatness, classify, density_ratio, domain_variation, extract_fb, flatness, harnack_decay, holder_fit, iof_check,
    nondeg_fit, regularity::dyadic_radii, slope, ClassifyConfig, Label,
};
use thinfb::blowup::{blowup_series, fit_profile, reference_grid, rescale};
use thinfb::energy::{energy, homogeneous_extension, scaling_check};
use thinfb::geometry::ball_quadrature;
use thinfb::profiles::{eval_profile, grad_u_sq, is_strict_subsolution, is_strict_supersolution, ProfileKind, ProfileSpec};
use thinfb::solver::{flip_pass, harmonic_replacement};
use thinfb::weiss::{deriv_lowerbound, weiss_series, weiss_value};
use thinfb::{make_grid, solve, Ball, Grid, PlateMask, SolveState, SolverConfig, VectorField};

use crate::fieldfile;

pub type UFn = fn(f64, f64) -> f64;

pub const H: f64 = 1.0 / 128.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// `α u(<x, e_n> - shift, x_{n+1}) e_1` on an `n = 1` grid, with the mask
/// read off the trace.
fn u_field(grid: &Grid, u: UFn, alpha: f64, shift: f64) -> (VectorField, PlateMask) {
    let g = VectorField::from_fn(grid, |x, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = alpha * u(x[0] - shift, x[1]);
    });
    let mask = PlateMask::from_threshold(&g, thinfb::profiles::diagnostic_threshold(grid.h()));
    (g, mask)
}

fn grid(m: usize) -> Grid {
    make_grid(1, m, H, 1.0).expect("fixed grid")
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    let msg = format!("{name} = {got:.6}, expected {want:.6} ± {tol:.2e}");
    if (got - want).abs() <= tol { Ok(msg) } else { Err(msg) }
}

fn all(results: Vec<Result<String, String>>) -> Result<String, String> {
    let mut ok = Vec::new();
    for r in results {
        ok.push(r?);
    }
    Ok(ok.join("; "))
}

fn require(cond: bool, msg: String) -> Result<String, String> {
    if cond { Ok(msg) } else { Err(msg) }
}

fn core<T>(r: thinfb::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

type Check = (&'static str, Box<dyn Fn() -> Result<String, String> + Sync>);

fn checks(u: UFn, with_solver: bool) -> Vec<Check> {
    let mut v: Vec<Check> = vec![
        ("geometry.grid_counts", Box::new(|| {
            let a = core(make_grid(1, 2, H, 1.0))?;
            let b = core(make_grid(2, 2, 1.0 / 32.0, 1.0))?;
            let bad = make_grid(1, 2, 0.3, 1.0).is_err();
            require(a.shape()[..2] == [257, 129] && b.shape()[..3] == [65, 65, 33] && bad, format!("{:?}, {:?}, h = 0.3 rejected: {bad}", &a.shape()[..2], &b.shape()[..3]))
        })),
        ("geometry.interpolation", Box::new(|| {
            let g = core(make_grid(1, 1, 0.01, 1.0))?;
            let lin = VectorField::from_fn(&g, |x, o| o[0] = x[0]);
            let even = VectorField::from_fn(&g, |x, o| o[0] = x[0] + x[1] * x[1]);
            let c = VectorField::from_fn(&g, |_, o| o[0] = 3.0);
            all(vec![
                within("linear", core(lin.interpolate(&[0.005, 0.0]))?[0], 0.005, 1e-14),
                within("reflected", core(even.interpolate(&[0.0, -0.25]))?[0], core(even.interpolate(&[0.0, 0.25]))?[0], 0.0),
                within("constant", core(c.interpolate(&[0.1234, 0.567]))?[0], 3.0, 1e-14),
            ])
        })),
        ("geometry.ball_quadrature", Box::new(|| {
            let q = core(ball_quadrature(&grid(1), &Ball::new(&[0.0], 0.5)))?;
            all(vec![within("area", q.volume_total(), PI * 0.25, 2.0 * H), within("length", q.surface_total(), PI, 2.0 * H)])
        })),
        ("U.values", Box::new(move || {
            all(vec![within("U(1,0)", u(1.0, 0.0), 1.0, 1e-15), within("U(-1,0)", u(-1.0, 0.0), 0.0, 0.0), within("U(0,1)", u(0.0, 1.0), 0.5f64.sqrt(), 1e-15)])
        })),
        ("U.profile_matches_u", Box::new(move || {
            let spec = ProfileSpec::halfplane(1, 2, 1.0);
            let mut worst: f64 = 0.0;
            for &(t, s) in &[(0.3, 0.1), (-0.2, 0.4), (0.7, 0.0), (-0.5, 0.0)] {
                worst = worst.max((eval_profile(&spec, &[t, s])[0] - u(t, s)).abs());
            }
            let shifted = eval_profile(&spec.clone().with_shift(0.25), &[0.25, 0.0]);
            let doubled = eval_profile(&ProfileSpec { alpha: 2.0, ..spec.clone() }, &[0.3, 0.2])[0] / eval_profile(&spec, &[0.3, 0.2])[0];
            all(vec![within("max |profile - u|", worst, 0.0, 1e-15), within("free boundary value", shifted[0], 0.0, 0.0), within("amplitude ratio", doubled, 2.0, 1e-15)])
        })),
        ("U.grad_sq", Box::new(|| {
            all(vec![within("|∇U|² at 1", core(grad_u_sq(0.6, 0.8))?, 0.25, 1e-15), within("|∇U|² at 1/4", core(grad_u_sq(0.0, 0.25))?, 1.0, 1e-15)])
        })),
        ("profiles.comparison_strictness", Box::new(|| {
            let c = |a: f64| ProfileSpec { alpha: a, ..ProfileSpec::halfplane(1, 1, 1.0).with_kind(ProfileKind::Comparison) };
            let ok = core(is_strict_subsolution(&c(1.1)))? && !core(is_strict_supersolution(&c(1.1)))?
                && core(is_strict_supersolution(&c(0.9)))?
                && !core(is_strict_subsolution(&c(1.0)))? && !core(is_strict_supersolution(&c(1.0)))?;
            require(ok, "α = 1.1 sub, 0.9 super, 1.0 neither".into())
        })),
        ("U.energy_parts", Box::new(move || {
            let (g, mask) = u_field(&grid(2), u, 1.0, 0.0);
            let e = core(energy(&g, &mask, &Ball::new(&[0.0], 0.5)))?;
            let e2 = core(energy(&g.scaled(2.0), &mask, &Ball::new(&[0.0], 0.5)))?;
            all(vec![
                within("dirichlet (upper half)", 0.5 * e.dirichlet, PI / 8.0, 5.0 * H),
                within("dirichlet (full)", e.dirichlet, PI / 4.0, 5.0 * H),
                within("plate_measure", e.plate_measure, 0.5, 5.0 * H),
                within("boundary_l2", e.boundary_l2, PI / 4.0, 5.0 * H),
                within("2U dirichlet ratio", e2.dirichlet / e.dirichlet, 4.0, 1e-12),
                within("2U boundary ratio", e2.boundary_l2 / e.boundary_l2, 4.0, 1e-12),
                within("2U plate_measure", e2.plate_measure, e.plate_measure, 0.0),
            ])
        })),
        ("energy.zero_field", Box::new(|| {
            let g = grid(2);
            let e = core(energy(&VectorField::zeros(&g), &PlateMask::empty(&g), &Ball::new(&[0.0], 0.5)))?;
            require(e.total == 0.0 && e.boundary_l2 == 0.0 && e.dirichlet == 0.0, format!("{e:?}"))
        })),
        ("U.scaling_identity", Box::new(move || {
            let (g, mask) = u_field(&grid(2), u, 1.0, 0.0);
            let (l1, r1) = core(scaling_check(&g, &mask, &[0.0], 1.0, 0.5))?;
            let (l2, r2) = core(scaling_check(&g, &mask, &[0.0], 0.25, 0.5))?;
            all(vec![within("r = 1", l1 - r1, 0.0, 1e-12), within("r = 1/4", l2 - r2, 0.0, 10.0 * H), within("J(U, B_1/2)", l2, PI / 4.0 + 0.5, 10.0 * H)])
        })),
        ("U.homogeneous_extension", Box::new(move || {
            let (g, mask) = u_field(&grid(2), u, 1.0, 0.0);
            let ext = core(homogeneous_extension(&g, &mask, &[0.0], 0.5))?;
            let v = core(ext.field.interpolate(&[0.125, 0.0]))?[0];
            let trace = core(g.interpolate(&[0.5, 0.0]))?[0];
            all(vec![within("excess", ext.excess(), 0.0, 10.0 * H), within("G̃ at r/4", v, 0.5 * trace, 1e-9)])
        })),
        ("U.weiss_values", Box::new(move || {
            let (g, mask) = u_field(&grid(2), u, 1.0, 0.0);
            let mut rs: Vec<Result<String, String>> =
                [0.125, 0.25, 0.5].iter().map(|&r| within(&format!("W({r})"), weiss_value(&g, &mask, &[0.0], r).unwrap_or(f64::NAN), 1.0, 5.0 * H)).collect();
            for r in [0.25, 0.5] {
                rs.push(within(&format!("W(2U, {r})"), weiss_value(&g.scaled(2.0), &mask, &[0.0], r).unwrap_or(f64::NAN), 1.0, 20.0 * H));
            }
            let z = grid(2);
            rs.push(within("W(0)", core(weiss_value(&VectorField::zeros(&z), &PlateMask::empty(&z), &[0.0], 0.25))?, 0.0, 0.0));
            all(rs)
        })),
        ("U.weiss_series", Box::new(move || {
            let (g, mask) = u_field(&grid(2), u, 1.0, 0.0);
            let s = core(weiss_series(&g, &mask, &[0.0], 8.0 * H, 0.25, 5))?;
            let spread = s.w.iter().map(|w| (w - 1.0).abs()).fold(0.0, f64::max);
            let degenerate = weiss_series(&g, &mask, &[0.0], 0.25, 0.25, 5).is_err();
            all(vec![within("max |W - 1|", spread, 0.0, 5.0 * H), require(s.decreases.is_empty() && degenerate, format!("decreases {:?}", s.decreases))])
        })),
        ("U.deriv_lowerbound", Box::new(move || {
            let (g, _) = u_field(&grid(2), u, 1.0, 0.0);
            let (t, _) = u_field(&grid(2), u, 1.0, 0.1);
            let lb = core(deriv_lowerbound(&g, &[0.0], 0.25))?;
            let lt = core(deriv_lowerbound(&t, &[0.0], 0.25))?;
            all(vec![within("lb(U)", lb, 0.0, 10.0 * H), require(lt > 10.0 * H && lb >= 0.0, format!("lb(translate) = {lt:.4}"))])
        })),
        ("U.blowup", Box::new(move || {
            let gr = grid(2);
            let (g, mask) = u_field(&gr, u, 0.7, 0.0);
            let rg = core(reference_grid(&gr))?;
            let scaled = core(rescale(&g, &[0.0], 0.25, &rg))?;
            let worst = (0..rg.node_count()).map(|i| (scaled.value(i)[0] - g.value(i)[0]).abs()).fold(0.0, f64::max);
            let comp2 = VectorField::from_fn(&gr, |x, o| {
                o[0] = 0.0;
                o[1] = 0.7 * u(x[0], x[1]);
            });
            let fit = core(fit_profile(&comp2, 0.0))?;
            let series = core(blowup_series(&g, &mask, &[0.0], &[0.25, 0.125, 0.0625], &rg, 0.05))?;
            let dist = series.scales.iter().map(|s| s.fit.dist_inf).fold(0.0, f64::max);
            let interior = blowup_series(&g, &mask, &[0.3], &[0.25], &rg, 0.05).is_err();
            all(vec![
                within("rescale fixed point", worst, 0.0, 2.0 * (H / 0.25f64).sqrt()),
                within("fit α", fit.alpha, 0.7, 1e-9),
                within("fit ξ²", fit.xi[1], 1.0, 1e-12),
                within("fit ν", fit.nu[0], 1.0, 0.0),
                within("fit dist", fit.dist_inf, 0.0, 1e-9),
                within("series dist", dist, 0.0, 0.01),
                require(interior, "interior point rejected".into()),
            ])
        })),
        ("U.slope", Box::new(move || {
            let (g, _) = u_field(&grid(2), u, 1.0, 0.0);
            let (g7, _) = u_field(&grid(2), u, 0.7, 0.0);
            all(vec![
                within("α̂(U)", core(slope(&g, &[0.0], &[1.0]))?.alpha, 1.0, 0.05),
                within("α̂(0.7U)", core(slope(&g7, &[0.0], &[1.0]))?.alpha, 0.7, 0.05),
            ])
        })),
        ("U.holder_nondeg", Box::new(move || {
            let (g, _) = u_field(&grid(2), u, 1.0, 0.0);
            let radii = dyadic_radii(H, 0.5);
            let a = core(holder_fit(&g, &[0.0], &radii))?;
            let b = core(nondeg_fit(&g, &[0.0], &radii))?;
            let b2 = core(nondeg_fit(&g.scaled(2.0), &[0.0], &radii))?;
            all(vec![
                within("holder slope", a.slope, 0.5, 0.02),
                within("nondeg slope", b.slope, 0.5, 0.02),
                within("C1", a.envelope, 1.0, 0.05),
                within("c", b.envelope, 1.0, 0.05),
                within("c(2U)", b2.envelope, 2.0, 0.1),
            ])
        })),
        ("U.density", Box::new(move || {
            let gr = grid(2);
            let (_, mask) = u_field(&gr, u, 1.0, 0.0);
            let fb = core(extract_fb(&gr, &mask))?;
            let x0 = fb.points.first().map(|p| p.position.clone()).ok_or("no free boundary")?;
            let full = core(density_ratio(&gr, &PlateMask::full(&gr), &[0.1], 0.25))?;
            all(vec![
                within("density at 8h", core(density_ratio(&gr, &mask, &x0, 8.0 * H))?, 0.5, 2.0 / 8.0),
                within("density at 1/4", core(density_ratio(&gr, &mask, &x0, 0.25))?, 0.5, 2.0 * H / 0.25),
                within("full mask", full, 1.0, 0.0),
            ])
        })),
        ("analysis.extract_fb", Box::new(|| {
            let gr = grid(1);
            let a = core(extract_fb(&gr, &PlateMask::from_predicate(&gr, |x| x[0] > 0.0)))?;
            let b = core(extract_fb(&gr, &PlateMask::from_predicate(&gr, |x| x[0] > 0.25)))?;
            let full = extract_fb(&gr, &PlateMask::full(&gr)).is_err();
            all(vec![
                within("point", a.points[0].position[0], 0.0, 0.5 * H),
                within("normal", a.points[0].normal[0], 1.0, 0.0),
                within("translated point", b.points[0].position[0], 0.25, 0.5 * H),
                require(a.points.len() == 1 && full, "single point; full mask rejected".into()),
            ])
        })),
        ("U.flatness", Box::new(move || {
            let gr = grid(2);
            let (g, mask) = u_field(&gr, u, 1.0, 0.0);
            let fl = core(flatness(&g, &mask, &[0.0], 0.5, &[1.0, 0.0], &[1.0]))?;
            let best = core(best_flatness(&g, &mask, &[0.0], 0.5))?;
            let mut island = mask.clone();
            let p = (0..gr.plate_count()).find(|&p| (gr.plate_coord(p)[0] + 0.3125).abs() < 1e-12).ok_or("no node")?;
            island.set(p, true);
            let isl = core(flatness(&g, &island, &[0.0], 0.5, &[1.0, 0.0], &[1.0]))?;
            let wide = core(make_grid(1, 2, H, 2.0))?;
            let (t, tmask) = u_field(&wide, u, 1.0, 0.1);
            let tr = core(flatness(&t, &tmask, &[0.0], 1.0, &[1.0, 0.0], &[1.0]))?;
            all(vec![
                within("ε̂(U)", fl.eps, 0.0, 1e-9),
                within("best ε̂(U)", best.eps, 0.0, 1e-9),
                require(isl.eps >= 0.625 - 1e-12, format!("island ε̂ = {:.4}", isl.eps)),
                within("translate by 0.1", tr.eps, 0.1f64.sqrt(), 0.02),
            ])
        })),
        ("U.iof", Box::new(move || {
            let gr = grid(2);
            let (g, mask) = u_field(&gr, u, 1.0, 0.0);
            let c = core(iof_check(&g, &mask, &[0.0], 0.5, 0.125, 0.1))?;
            let (t, tmask) = u_field(&gr, u, 1.0, 0.1);
            let pre = iof_check(&t, &tmask, &[0.0], 0.5, 0.125, 0.1).is_err();
            require(c.pass && c.component_ok && pre, format!("ε {:.2e} → {:.2e}; ε_before > ε̄ rejected: {pre}", c.eps_before, c.eps_after))
        })),
        ("U.harnack", Box::new(move || {
            let gr = grid(2);
            let mut rs = Vec::new();
            for shift in [0.0, 0.1] {
                let (g, mask) = u_field(&gr, u, 1.0, shift);
                let r = core(harnack_decay(&g, &mask, &[shift], &[0.25, 0.125, 0.0625], 0.1))?;
                let w = r.traps.iter().map(|t| t.width.abs()).fold(0.0, f64::max);
                rs.push(within(&format!("max width (shift {shift})"), w, 0.0, 1e-9));
                rs.push(require(r.traps.len() == 3, format!("{} scales", r.traps.len())));
            }
            all(rs)
        })),
        ("U.classify", Box::new(move || {
            let gr = grid(2);
            let (g, mask) = u_field(&gr, u, 1.0, 0.0);
            let fb = core(extract_fb(&gr, &mask))?;
            let x0 = fb.points.first().map(|p| p.position.clone()).ok_or("no free boundary")?;
            let c = core(classify(&g, &mask, &x0, 1.0, &ClassifyConfig::default()))?;
            let g2 = core(make_grid(2, 1, 1.0 / 32.0, 1.0))?;
            let c0 = [0.5 / 32.0, 0.5 / 32.0];
            let sector = PlateMask::from_predicate(&g2, |x| !(x[0] < c0[0] && x[1] < c0[1]));
            let s = core(classify(&VectorField::from_fn(&g2, |_, o| o[0] = 1.0), &sector, &c0, 1.0, &ClassifyConfig::default()))?;
            require(c.label == Label::Regular && s.label == Label::Singular, format!("half line {:?}, 270° sector {:?}", c.label, s.label))
        })),
        ("U.domain_variation", Box::new(move || {
            let h = H;
            let k = 64i64;
            let pts: Vec<Vec<f64>> = (-k..=k)
                .flat_map(|i| (0..=k).map(move |j| vec![i as f64 * h, j as f64 * h]))
                .filter(|p| p[0].hypot(p[1]) <= 0.5)
                .collect();
            let id = core(domain_variation(|x| u(x[0], x[1]), 1, 0.1, &pts))?;
            let tr = core(domain_variation(|x| u(x[0] + 0.05, x[1]), 1, 0.1, &pts))?;
            let tau = |x: &[f64]| 0.04 * (6.0 * x[0]).sin() * (1.0 - x[1]);
            let osc = core(domain_variation(|x| u(x[0] + tau(x), x[1]), 1, 0.1, &pts))?;
            let err = osc.points.iter().zip(&osc.w).map(|(x, w)| (w - tau(x)).abs()).fold(0.0, f64::max);
            all(vec![
                within("w(U)", id.w.iter().map(|w| w.abs()).fold(0.0, f64::max), 0.0, 1e-12),
                within("w(translate) - τ", tr.w.iter().map(|w| (w - 0.05).abs()).fold(0.0, f64::max), 0.0, 1e-12),
                within("w(oscillating) - τ", err, 0.0, 2.0 * h.sqrt()),
                require(osc.trap_holds && osc.w.iter().all(|w| w.abs() <= 0.1), "trap holds, |w| <= ε".into()),
            ])
        })),
        ("solver.harmonic_replacement", Box::new(|| {
            let gr = grid(1);
            let g = VectorField::from_fn(&gr, |x, o| o[0] = x[0] * x[0] + x[1] * x[1]);
            let ball = Ball::new(&[0.0], 0.5);
            let mask = PlateMask::full(&gr);
            let rep = core(harmonic_replacement(&g, 0, &ball, 1e-10, 50_000))?;
            let before = core(energy(&g, &mask, &ball))?.dirichlet;
            let after = core(energy(&rep, &mask, &ball))?.dirichlet;
            let c = VectorField::from_fn(&gr, |_, o| o[0] = 2.0);
            let cr = core(harmonic_replacement(&c, 0, &ball, 1e-10, 50_000))?;
            let drift = (0..gr.node_count()).map(|i| (cr.value(i)[0] - 2.0).abs()).fold(0.0, f64::max);
            all(vec![require(after < before, format!("dirichlet {before:.5} → {after:.5}")), within("constant drift", drift, 0.0, 1e-9)])
        })),
        ("solver.trivial_states", Box::new(|| {
            let gr = grid(2);
            let st = core(solve(&VectorField::zeros(&gr), &SolverConfig::default(), None))?;
            let g1 = grid(1);
            let mut mask = PlateMask::empty(&g1);
            let p = g1.plate_count() / 2;
            mask.set(p, true);
            let mut state = core(SolveState::new(VectorField::zeros(&g1), mask))?;
            let trials = flip_pass(&mut state, &SolverConfig::default());
            let t = trials.iter().find(|t| t.plate_index == p).ok_or("lone node not tested")?;
            all(vec![
                require(st.field.is_zero() && st.mask.none_set(), "zero data gives the zero state".into()),
                within("ΔJ of the lone node", t.delta_j, -H, 1e-12),
                require(t.accepted && state.mask.none_set(), "lone node removed".into()),
            ])
        })),
        ("fieldfile.round_trip", Box::new(move || {
            let (g, mask) = u_field(&grid(2), u, 0.8, 0.05);
            let (g2, m2) = fieldfile::decode(&fieldfile::encode(&g, &mask)).map_err(|e| e.to_string())?;
            let exact = g.components().iter().zip(g2.components()).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
            require(exact && m2 == mask, "bit-exact".into())
        })),
    ];
    if with_solver {
        v.push(("solver.a_star_half_plane", Box::new(move || {
            let gr = grid(2);
            let est = crate::pipeline::calibrate_a_star(&gr, &SolverConfig::default(), &ClassifyConfig::default()).map_err(|e| e.to_string())?;
            let a = est.value;
            let (phi, half) = u_field(&gr, u, a, 0.0);
            let mut fixed = core(SolveState::new(phi.clone(), PlateMask::from_predicate(&gr, |x| x[0] > 0.0)))?;
            let _ = half;
            thinfb::solver::relax_components(&mut fixed, &SolverConfig::default());
            let flips = flip_pass(&mut fixed, &SolverConfig::default()).iter().filter(|t| t.accepted).count();
            let st = core(solve(&phi, &SolverConfig::default(), None))?;
            let fb = core(extract_fb(&gr, &st.mask))?;
            let x0 = fb.points.first().map(|p| p.position.clone()).ok_or("no free boundary")?;
            let s = core(weiss_series(&st.field, &st.mask, &x0, 8.0 * H, 0.25, 5))?;
            let ext = core(homogeneous_extension(&st.field, &st.mask, &x0, 0.25))?;
            all(vec![
                require(flips <= 3, format!("half-plane mask under A*U data: {flips} flips")),
                within("free boundary", x0[0], 0.0, 3.0 * H),
                require(st.energy_trace_monotone() && s.decreases.is_empty(), format!("A* = {a:.4}; Weiss decreases {:?}", s.decreases)),
                require(ext.excess() >= -10.0 * H, format!("homogeneous extension excess {:.2e}", ext.excess())),
            ])
        })));
    }
    v
}

/// Runs every oracle with `u` standing in for `U`. Solver-backed checks are
/// included when `with_solver` is set.
pub fn run_oracles(u: UFn, with_solver: bool) -> Vec<CheckOutcome> {
    checks(u, with_solver)
        .into_iter()
        .map(|(name, f)| {
            let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
            match r {
                Ok(detail) => CheckOutcome { name, pass: true, detail },
                Err(detail) => CheckOutcome { name, pass: false, detail },
            }
        })
        .collect()
}

pub fn table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    outcomes
        .iter()
        .map(|o| format!("{:<4} {:<width$}  {}\n", if o.pass { "ok" } else { "FAIL" }, o.name, o.detail))
        .collect()
}
