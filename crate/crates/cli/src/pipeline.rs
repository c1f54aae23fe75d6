//! solve → diagnose → report.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thinfb::analysis::{
    best_flatness, classify, density_ratio, estimate_a_star, extract_fb, harnack_decay, holder_fit, iof_check, median,
    nondeg_fit, regularity::dyadic_radii, slope, vector_structure, Classification, ClassifyConfig, FbPoint, Flatness,
    HarnackReport, IofCheck, Label, PointReport, VectorStructure,
};
use thinfb::blowup::{blowup_series, reference_grid, BlowupSeries};
use thinfb::energy::{energy, scaling_check, EnergyBreakdown};
use thinfb::profiles::{sample_profile, sample_profiles, ProfileSpec};
use thinfb::weiss::{geometric_radii, weiss_series, WeissSeries};
use thinfb::{solve, Ball, Grid, PlateMask, SolveState, SolverConfig, VectorField};

use crate::config::{AStarMode, AStarSetting, Check, DiagnosticsConfig, RunConfig};
use crate::{fieldfile, CliError};

pub const FIELD_FILE: &str = "field.thinfb";
pub const ENERGY_TRACE: &str = "energy_trace.csv";
pub const MANIFEST: &str = "manifest.json";
pub const DIAGNOSE_MANIFEST: &str = "diagnose_manifest.json";
pub const VERDICT: &str = "verdict.json";

/// `A*` with the points and slopes it was taken from.
#[derive(Debug, Clone, Serialize)]
pub struct AStarEstimate {
    pub value: f64,
    pub source: &'static str,
    /// `(position, slope)` of the points entering the median.
    pub points: Vec<(Vec<f64>, f64)>,
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Half-width of the plate region a point needs for every radius in use.
fn reach(grid: &Grid, d: &DiagnosticsConfig) -> f64 {
    let h = grid.h();
    let blowup = d.classify.blowup_scales.iter().copied().fold(0.0, f64::max);
    let harnack = d.harnack_scales.iter().copied().fold(0.0, f64::max);
    let scaling = d.scaling_pairs.iter().map(|&(r, big)| r.max(big)).fold(0.0, f64::max);
    [d.weiss_max + h, d.density_max, d.regularity_max, d.flatness_radius, blowup, harnack, scaling, 32.0 * h, 16.0 * h]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Median slope over regular points (all interior points if none is regular),
/// with a provisional `A*` from all points for the classification.
pub fn estimate_from_field(field: &VectorField, mask: &PlateMask, classify_cfg: &ClassifyConfig, source: &'static str) -> Result<AStarEstimate, CliError> {
    let grid = field.grid();
    let fb = extract_fb(grid, mask)?;
    let reach = classify_cfg.blowup_scales.iter().copied().fold(32.0 * grid.h(), f64::max) + grid.h();
    let points: Vec<&FbPoint> = fb.interior(grid, reach);
    let provisional = estimate_a_star(field, points.iter().copied())?;
    let regular: Vec<&FbPoint> = points
        .iter()
        .copied()
        .filter(|p| classify(field, mask, &p.position, provisional, classify_cfg).is_ok_and(|c| c.label == Label::Regular))
        .collect();
    let used = if regular.is_empty() { points } else { regular };
    let slopes = used.iter().map(|p| slope(field, &p.position, &p.normal).map(|s| (p.position.clone(), s.alpha))).collect::<Result<Vec<_>, _>>()?;
    let value = median(&slopes.iter().map(|s| s.1).collect::<Vec<_>>()).ok_or_else(|| CliError::Core(thinfb::Error::EmptyFreeBoundary("no interior points".into())))?;
    Ok(AStarEstimate { value, source, points: slopes })
}

/// Minimizer with data `U f¹` on `grid`, and the median slope of its free boundary.
pub fn calibrate_a_star(grid: &Grid, solver: &SolverConfig, classify_cfg: &ClassifyConfig) -> Result<AStarEstimate, CliError> {
    let phi = sample_profile(grid, &ProfileSpec::halfplane(grid.n(), grid.m(), 1.0))?;
    let state = solve(&phi, solver, None)?;
    estimate_from_field(&state.field, &state.mask, classify_cfg, "calibrate")
}

/// Every numeric threshold used by the solver and the checks.
pub fn thresholds(config: &RunConfig) -> Value {
    let h = config.grid.h;
    json!({
        "solver": config.solver,
        "diagnostics": config.diagnostics,
        "fixed": {
            "weiss_tol_w": 5.0 * h,
            "weiss_tol_slope": 10.0 * h,
            "weiss_min_radius": thinfb::weiss::MIN_RADIUS_CELLS * h,
            "blowup_min_scale": thinfb::blowup::MIN_SCALE_CELLS * h,
            "blowup_tube": thinfb::blowup::TUBE_CELLS * h,
            "scaling_tol": 10.0 * h,
            "iof_tolerance": 4.0 * h.sqrt(),
            "slope_window": [4.0 * h, 32.0 * h],
            "slope_spread": 0.1,
            "regularity_min_radius": 8.0 * h,
        },
    })
}

pub struct SolveOutcome {
    pub state: SolveState,
    pub a_star: Option<AStarEstimate>,
    pub wall_time: f64,
}

/// Builds the boundary data, solves and writes the field file, the energy
/// trace and the manifest into `out`.
pub fn run_solve(config: &RunConfig, out: &Path) -> Result<SolveOutcome, CliError> {
    config.validate()?;
    let start = Instant::now();
    let grid = Grid::try_from(config.grid)?;
    let data = &config.boundary_data;
    let a_star = if data.profiles.iter().any(|p| p.uses_a_star()) {
        Some(calibrate_a_star(&grid, &config.solver, &config.diagnostics.classify)?)
    } else {
        None
    };
    let phi = if let Some(path) = &data.field_file {
        let (field, _) = fieldfile::read(path)?;
        if field.grid().spec() != config.grid {
            return Err(CliError::Config(format!("field file {} has a different grid", path.display())));
        }
        field
    } else {
        let specs = data.profiles.iter().map(|p| p.resolve(a_star.as_ref().map(|a| a.value))).collect::<Result<Vec<_>, _>>()?;
        if specs.is_empty() { VectorField::zeros(&grid) } else { sample_profiles(&grid, &specs)? }
    };
    let state = solve(&phi, &config.solver, None)?;
    let wall_time = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    fieldfile::write(&out.join(FIELD_FILE), &state.field, &state.mask)?;
    let rows: Vec<String> = state.energy_trace.iter().enumerate().map(|(k, j)| format!("{k},{j}")).collect();
    write_csv(&out.join(ENERGY_TRACE), "iteration,J", &rows)?;
    let manifest = json!({
        "tool": "thinfb",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "threads": rayon::current_num_threads(),
        "wall_time_s": wall_time,
        "a_star": a_star,
        "converged": state.converged,
        "budget_exhausted": state.budget_exhausted,
        "iterations": {
            "outer": state.iters.outer,
            "sweeps": state.iters.sweeps,
            "flips_tested": state.iters.flips_tested,
            "flips_accepted": state.iters.flips_accepted,
        },
        "residual": state.residual,
        "positive_plate_nodes": state.mask.count(),
        "thresholds": thresholds(config),
    });
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(SolveOutcome { state, a_star, wall_time })
}

/// Pass/fail of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub criterion: Option<u32>,
    pub pass: bool,
    /// Points (or pairs) the criterion was evaluated on.
    pub evaluated: usize,
    pub failures: Vec<String>,
    pub detail: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Verdict {
    pub a_star: Option<f64>,
    pub free_boundary_points: usize,
    pub diagnosed_points: usize,
    pub criteria: BTreeMap<String, CriterionResult>,
}

impl Verdict {
    pub fn all_pass(&self) -> bool {
        self.criteria.values().all(|c| c.pass)
    }
}

type Outcome<T> = Option<Result<T, String>>;

/// Everything computed at one free boundary point.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PointResult {
    pub report: PointReport,
    pub weiss: Outcome<WeissSeries>,
    pub energy: Outcome<Vec<(f64, EnergyBreakdown)>>,
    /// `(r, R, lhs, rhs)`.
    pub scaling: Outcome<Vec<(f64, f64, f64, f64)>>,
    pub classification: Outcome<Classification>,
    pub blowup: Outcome<BlowupSeries>,
    pub vector: Outcome<VectorStructure>,
    pub iof: Outcome<IofCheck>,
    pub harnack: Outcome<HarnackReport>,
    #[serde(skip)]
    flat: Option<Flatness>,
}

fn run<T>(on: bool, f: impl FnOnce() -> thinfb::Result<T>) -> Outcome<T> {
    on.then(|| f().map_err(|e| e.to_string()))
}

struct Context<'a> {
    field: &'a VectorField,
    normalized: VectorField,
    mask: &'a PlateMask,
    d: &'a DiagnosticsConfig,
    checks: &'a [Check],
    a_star: f64,
}

impl Context<'_> {
    fn has(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }

    fn point(&self, p: &FbPoint) -> PointResult {
        let grid = self.field.grid();
        let h = grid.h();
        let x0 = &p.position;
        let d = self.d;
        let mut out = PointResult { report: PointReport { position: x0.clone(), normal: p.normal.clone(), ..Default::default() }, ..Default::default() };
        let radii = geometric_radii(d.weiss_min_cells * h, d.weiss_max, d.weiss_count);
        out.weiss = run(self.has(Check::Weiss), || weiss_series(self.field, self.mask, x0, d.weiss_min_cells * h, d.weiss_max, d.weiss_count));
        out.energy = run(self.has(Check::Weiss) || self.has(Check::Scaling), || {
            radii.clone()?.into_iter().map(|r| energy(self.field, self.mask, &Ball::new(x0, r)).map(|e| (r, e))).collect()
        });
        out.scaling = run(self.has(Check::Scaling), || {
            d.scaling_pairs
                .iter()
                .map(|&(r, big)| scaling_check(self.field, self.mask, x0, r, big).map(|(l, rr)| (r, big, l, rr)))
                .collect()
        });
        if self.has(Check::Density) {
            match dyadic_radii(h, d.density_max).into_iter().map(|r| density_ratio(grid, self.mask, x0, r).map(|v| (r, v))).collect() {
                Ok(v) => out.report.density = v,
                Err(e) => out.report.skipped.push(format!("density: {e}")),
            }
        }
        if self.has(Check::Regularity) {
            let rr = dyadic_radii(h, d.regularity_max);
            match (holder_fit(self.field, x0, &rr), nondeg_fit(self.field, x0, &rr)) {
                (Ok(a), Ok(b)) => {
                    out.report.holder = Some(a);
                    out.report.nondeg = Some(b);
                }
                (Err(e), _) | (_, Err(e)) => out.report.skipped.push(format!("regularity: {e}")),
            }
        }
        match slope(self.field, x0, &p.normal) {
            Ok(s) => out.report.slope = Some(s),
            Err(e) => out.report.skipped.push(format!("slope: {e}")),
        }
        let needs_labels = [Check::Classify, Check::Density, Check::Blowup, Check::Iof].iter().any(|&c| self.has(c));
        out.classification = run(needs_labels, || classify(self.field, self.mask, x0, self.a_star, &d.classify));
        if let Some(Ok(c)) = &out.classification {
            out.report.label = Some(c.label);
        }
        out.blowup = run(self.has(Check::Blowup), || match &out.classification {
            Some(Ok(Classification { blowup: Some(b), .. })) => Ok(b.clone()),
            _ => blowup_series(self.field, self.mask, x0, &d.classify.blowup_scales, &reference_grid(grid)?, d.classify.stab_tol),
        });
        let needs_flat = [Check::Flatness, Check::Iof, Check::Harnack].iter().any(|&c| self.has(c));
        if needs_flat {
            match best_flatness(&self.normalized, self.mask, x0, d.flatness_radius) {
                Ok(f) => {
                    out.report.flatness = Some(f.clone());
                    out.flat = Some(f);
                }
                Err(e) => out.report.skipped.push(format!("flatness: {e}")),
            }
        }
        let flat = out.flat.clone().filter(|f| f.eps <= d.eps_bar);
        out.vector = run(self.has(Check::Flatness) && flat.is_some(), || vector_structure(&self.normalized, self.mask, flat.as_ref().unwrap()));
        out.iof = run(self.has(Check::Iof) && flat.is_some(), || iof_check(&self.normalized, self.mask, x0, d.flatness_radius, d.iof_rho, d.eps_bar));
        out.harnack = run(self.has(Check::Harnack) && flat.is_some(), || {
            harnack_decay(&self.normalized, self.mask, x0, &d.harnack_scales, d.eps_bar)
        });
        out
    }
}

fn fmt_point(k: usize, p: &PointResult) -> String {
    let pos: Vec<String> = p.report.position.iter().map(|v| format!("{v:.6}")).collect();
    format!("point {k} at ({})", pos.join(", "))
}

fn criterion(number: Option<u32>, evaluated: usize, failures: Vec<String>, detail: Value) -> CriterionResult {
    CriterionResult { criterion: number, pass: failures.is_empty(), evaluated, failures, detail }
}

fn is_regular(p: &PointResult) -> bool {
    p.report.label == Some(Label::Regular)
}

fn evaluate(results: &[PointResult], d: &DiagnosticsConfig, checks: &[Check], h: f64, a_star: f64) -> BTreeMap<String, CriterionResult> {
    let mut out = BTreeMap::new();
    let has = |c: Check| checks.contains(&c);
    let err = |k: usize, p: &PointResult, what: &str, e: &str| format!("{}: {what} failed: {e}", fmt_point(k, p));

    if has(Check::Weiss) {
        let mut failures = Vec::new();
        for (k, p) in results.iter().enumerate() {
            match &p.weiss {
                Some(Ok(s)) if !s.is_monotone() => failures.push(format!(
                    "{}: decreases at intervals {:?}, slope below the lower bound at {:?}",
                    fmt_point(k, p),
                    s.decreases,
                    s.lb_violations
                )),
                Some(Err(e)) => failures.push(err(k, p, "weiss", e)),
                _ => {}
            }
        }
        out.insert("weiss_monotonicity".into(), criterion(Some(2), results.len(), failures, json!({"tol_w": 5.0 * h, "tol_slope": 10.0 * h})));
    }
    if has(Check::Scaling) {
        let tol = 10.0 * h;
        let mut failures = Vec::new();
        let mut worst: f64 = 0.0;
        for (k, p) in results.iter().enumerate() {
            match &p.scaling {
                Some(Ok(rows)) => {
                    for &(r, big, l, rr) in rows {
                        worst = worst.max((l - rr).abs());
                        if (l - rr).abs() > tol {
                            failures.push(format!("{}: r = {r}, R = {big}: |{l} - {rr}| > {tol}", fmt_point(k, p)));
                        }
                    }
                }
                Some(Err(e)) => failures.push(err(k, p, "scaling", e)),
                None => {}
            }
        }
        out.insert("scaling_identity".into(), criterion(Some(3), results.len(), failures, json!({"tol": tol, "max_abs_diff": worst})));
    }
    if has(Check::Density) {
        let mut failures = Vec::new();
        let (lo, hi) = (d.density_floor, 1.0 - d.density_floor);
        for (k, p) in results.iter().enumerate() {
            for &(r, v) in &p.report.density {
                if !(lo..=hi).contains(&v) {
                    failures.push(format!("{}: density {v} at r = {r} outside [{lo}, {hi}]", fmt_point(k, p)));
                }
            }
            if p.report.density.is_empty() {
                failures.push(format!("{}: no density values", fmt_point(k, p)));
            }
            if is_regular(p) {
                if let Some(&(r, v)) = p.report.density.first() {
                    if (v - 0.5).abs() > d.classify.band {
                        failures.push(format!("{}: regular point with density {v} at r = {r}", fmt_point(k, p)));
                    }
                }
            }
        }
        out.insert("density_bounds".into(), criterion(Some(4), results.len(), failures, json!({"floor": lo, "ceiling": hi, "band": d.classify.band})));
    }
    if has(Check::Regularity) {
        let (lo, hi) = d.slope_band;
        let mut failures = Vec::new();
        for (k, p) in results.iter().enumerate() {
            match (&p.report.holder, &p.report.nondeg) {
                (Some(a), Some(b)) => {
                    if !(lo..=hi).contains(&a.slope) || !(lo..=hi).contains(&b.slope) || !(b.envelope > 0.0) {
                        failures.push(format!("{}: holder slope {}, nondeg slope {}, c = {}", fmt_point(k, p), a.slope, b.slope, b.envelope));
                    }
                }
                _ => failures.push(format!("{}: fits unavailable", fmt_point(k, p))),
            }
        }
        out.insert("regularity_growth".into(), criterion(Some(5), results.len(), failures, json!({"slope_band": [lo, hi]})));
    }
    if has(Check::Flatness) {
        let mut failures = Vec::new();
        let mut evaluated = 0;
        let mut c_max: f64 = 0.0;
        for (k, p) in results.iter().enumerate() {
            match &p.vector {
                Some(Ok(v)) => {
                    evaluated += 1;
                    c_max = c_max.max(v.c_hat);
                    if !v.lead_positive || v.c_hat > d.envelope_max {
                        failures.push(format!("{}: min lead component {}, C = {}", fmt_point(k, p), v.min_lead, v.c_hat));
                    }
                }
                Some(Err(e)) => failures.push(err(k, p, "vector structure", e)),
                None => {}
            }
        }
        let eps: Vec<f64> = results.iter().filter_map(|p| p.flat.as_ref().map(|f| f.eps)).collect();
        out.insert(
            "vectorial_structure".into(),
            criterion(Some(6), evaluated, failures, json!({"eps_bar": d.eps_bar, "c_max": c_max, "c_bound": d.envelope_max, "flatness": eps})),
        );
    }
    if has(Check::Blowup) {
        let mut failures = Vec::new();
        let mut evaluated = 0;
        for (k, p) in results.iter().enumerate().filter(|(_, p)| is_regular(p)) {
            evaluated += 1;
            match &p.blowup {
                Some(Ok(s)) => {
                    let last = s.final_fit().map_or(f64::INFINITY, |f| f.dist_inf);
                    if !s.dist_nonincreasing || last > d.classify.fit_tol * a_star {
                        let dist: Vec<f64> = s.scales.iter().map(|x| x.fit.dist_inf).collect();
                        failures.push(format!("{}: dist_inf {dist:?}", fmt_point(k, p)));
                    }
                }
                Some(Err(e)) => failures.push(err(k, p, "blowup", e)),
                None => {}
            }
        }
        out.insert(
            "blowup_homogeneity".into(),
            criterion(Some(7), evaluated, failures, json!({"scales": d.classify.blowup_scales, "fit_bound": d.classify.fit_tol * a_star})),
        );
    }
    if has(Check::Iof) {
        let mut failed = Vec::new();
        let mut evaluated = 0;
        for (k, p) in results.iter().enumerate().filter(|(_, p)| is_regular(p)) {
            match &p.iof {
                Some(Ok(c)) => {
                    evaluated += 1;
                    if !c.pass {
                        failed.push(format!("{}: eps_before {}, eps_after {}", fmt_point(k, p), c.eps_before, c.eps_after));
                    }
                }
                Some(Err(e)) => {
                    evaluated += 1;
                    failed.push(err(k, p, "iof", e));
                }
                None => {}
            }
        }
        let fraction = if evaluated == 0 { 1.0 } else { 1.0 - failed.len() as f64 / evaluated as f64 };
        let pass = fraction >= d.iof_pass_fraction;
        out.insert(
            "improvement_of_flatness".into(),
            CriterionResult {
                criterion: Some(8),
                pass,
                evaluated,
                failures: failed,
                detail: json!({"rho": d.iof_rho, "pass_fraction": fraction, "required": d.iof_pass_fraction, "tolerance": 4.0 * h.sqrt()}),
            },
        );
    }
    if has(Check::Harnack) {
        let mut failures = Vec::new();
        let mut evaluated = 0;
        let mut etas = Vec::new();
        for (k, p) in results.iter().enumerate() {
            match &p.harnack {
                Some(Ok(r)) => {
                    evaluated += 1;
                    etas.push(r.eta);
                    let widths_vanish = r.traps.iter().all(|t| t.width.abs() <= 1e-9);
                    let ok = r.failure_scale.is_none() && r.traps.len() >= 3 && (widths_vanish || r.eta.is_some_and(|e| e > 0.0));
                    if !ok {
                        failures.push(format!("{}: eta {:?}, failure scale {:?}", fmt_point(k, p), r.eta, r.failure_scale));
                    }
                }
                Some(Err(e)) => failures.push(err(k, p, "harnack", e)),
                None => {}
            }
        }
        out.insert("harnack_decay".into(), criterion(None, evaluated, failures, json!({"scales": d.harnack_scales, "eta": etas})));
    }
    if has(Check::Classify) {
        let mut failures = Vec::new();
        let mut counts = BTreeMap::new();
        for (k, p) in results.iter().enumerate() {
            match &p.classification {
                Some(Ok(c)) => *counts.entry(format!("{:?}", c.label).to_lowercase()).or_insert(0usize) += 1,
                Some(Err(e)) => failures.push(err(k, p, "classify", e)),
                None => {}
            }
        }
        out.insert("classification".into(), criterion(None, results.len(), failures, json!({"labels": counts})));
        let alphas: Vec<f64> = results.iter().filter(|p| is_regular(p)).filter_map(|p| p.report.slope.as_ref().map(|s| s.alpha)).collect();
        let spread = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max) - alphas.iter().copied().fold(f64::INFINITY, f64::min);
        let mut failures = Vec::new();
        if !alphas.is_empty() && spread > 0.1 * a_star {
            failures.push(format!("slope spread {spread} exceeds {}", 0.1 * a_star));
        }
        out.insert(
            "slope_constancy".into(),
            criterion(None, alphas.len(), failures, json!({"spread": if alphas.is_empty() { 0.0 } else { spread }, "bound": 0.1 * a_star})),
        );
    }
    out
}

fn resolve_a_star(field: &VectorField, mask: &PlateMask, config: &RunConfig) -> Result<AStarEstimate, CliError> {
    match config.diagnostics.a_star {
        AStarSetting::Value(v) => Ok(AStarEstimate { value: v, source: "config", points: Vec::new() }),
        AStarSetting::Mode(AStarMode::Estimate) => estimate_from_field(field, mask, &config.diagnostics.classify, "estimate"),
        AStarSetting::Mode(AStarMode::Calibrate) => calibrate_a_star(field.grid(), &config.solver, &config.diagnostics.classify),
    }
}

pub struct DiagnoseOutcome {
    pub verdict: Verdict,
    pub points: Vec<PointResult>,
    pub a_star: Option<AStarEstimate>,
}

/// Runs `checks` at every free boundary point whose balls fit in the box
/// and writes the reports, `verdict.json` and a manifest into `out`.
pub fn run_diagnose(field: &VectorField, mask: &PlateMask, config: &RunConfig, checks: &[Check], out: &Path) -> Result<DiagnoseOutcome, CliError> {
    let start = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut checks = checks.to_vec();
    checks.sort();
    checks.dedup();
    let grid = field.grid();
    let d = &config.diagnostics;
    let mut verdict = Verdict::default();
    let mut points = Vec::new();
    let mut a_star = None;
    let fb = match extract_fb(grid, mask) {
        Ok(fb) => Some(fb),
        Err(thinfb::Error::EmptyFreeBoundary(_)) => None,
        Err(e) => return Err(e.into()),
    };
    if !checks.is_empty() {
        if let Some(fb) = &fb {
            verdict.free_boundary_points = fb.points.len();
            let interior: Vec<&FbPoint> = fb.interior(grid, reach(grid, d));
            if !interior.is_empty() {
                let est = resolve_a_star(field, mask, config)?;
                let ctx = Context { field, normalized: field.scaled(1.0 / est.value), mask, d, checks: &checks, a_star: est.value };
                points = interior.par_iter().map(|p| ctx.point(p)).collect();
                verdict.a_star = Some(est.value);
                a_star = Some(est);
            }
        }
        verdict.diagnosed_points = points.len();
        verdict.criteria = evaluate(&points, d, &checks, grid.h(), verdict.a_star.unwrap_or(1.0));
    }

    if config.output.csv() {
        let report = thinfb::analysis::DiagnosticsReport { a_star: verdict.a_star, points: points.iter().map(|p| p.report.clone()).collect() };
        write_csv(&out.join("diagnostics.csv"), thinfb::analysis::DiagnosticsReport::CSV_HEADER, &report.csv_rows())?;
        for (k, p) in points.iter().enumerate() {
            if let Some(Ok(rows)) = &p.energy {
                let rows: Vec<String> = rows.iter().map(|(r, e)| e.csv_row(*r)).collect();
                write_csv(&out.join(format!("energy_{k}.csv")), EnergyBreakdown::CSV_HEADER, &rows)?;
            }
            if let Some(Ok(s)) = &p.weiss {
                write_csv(&out.join(format!("weiss_{k}.csv")), WeissSeries::CSV_HEADER, &s.csv_rows())?;
            }
            if let Some(Ok(s)) = &p.blowup {
                write_csv(&out.join(format!("blowup_{k}.csv")), BlowupSeries::CSV_HEADER, &s.csv_rows())?;
            }
        }
    }
    if config.output.json() {
        write_json(&out.join("diagnostics.json"), &json!({"a_star": a_star, "points": points}))?;
    }
    write_json(&out.join(VERDICT), &verdict)?;
    let checks_named: Vec<&str> = checks.iter().map(|c| c.name()).collect();
    write_json(
        &out.join(DIAGNOSE_MANIFEST),
        &json!({
            "tool": "thinfb",
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "checks": checks_named,
            "threads": rayon::current_num_threads(),
            "wall_time_s": start.elapsed().as_secs_f64(),
            "a_star": a_star,
            "thresholds": thresholds(config),
        }),
    )?;
    Ok(DiagnoseOutcome { verdict, points, a_star })
}
