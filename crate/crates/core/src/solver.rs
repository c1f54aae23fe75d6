//! Discrete local minimizers of `J`: harmonic relaxation at a fixed plate
//! mask alternated with greedy single-node mask flips.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{box_energy, cell_energy, cells_around, corner_offsets};
use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::geometry::{Ball, Grid};
use crate::profiles::diagnostic_threshold;

/// Node count above which a color sweep is split across threads.
const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScheme {
    /// Red-black successive over-relaxation with `ω = 2 / (1 + sin(π h / 2R))`.
    RedBlackSor,
    /// Red-black Gauss-Seidel (`ω = 1`).
    RedBlackGaussSeidel,
}

/// Traversal order of candidate plate nodes in a flip pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipOrder {
    /// Increasing plate index on every pass.
    Lexicographic,
    /// Increasing on even passes, decreasing on odd ones.
    Alternating,
    /// A permutation drawn from the config seed and the pass number.
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_outer: usize,
    /// Bound on `max |mean of neighbors - u|`; also the flip acceptance margin.
    pub relax_tol: f64,
    /// Sweep budget of one relaxation call.
    pub max_sweeps: usize,
    pub sweep: SweepScheme,
    pub flip_pass_order: FlipOrder,
    pub seed: u64,
    /// Radius of the re-relaxed neighborhood of a flip, in cells.
    pub patch_radius: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_outer: 400,
            relax_tol: 1e-9,
            max_sweeps: 50_000,
            sweep: SweepScheme::RedBlackSor,
            flip_pass_order: FlipOrder::Alternating,
            seed: 0,
            patch_radius: 16,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.relax_tol > 0.0 && self.relax_tol.is_finite()) {
            return Err(Error::Precondition(format!("relax_tol = {} must be positive", self.relax_tol)));
        }
        if self.max_sweeps == 0 || self.patch_radius == 0 {
            return Err(Error::Precondition("max_sweeps and patch_radius must be positive".into()));
        }
        Ok(())
    }

    fn omega(&self, grid: &Grid) -> f64 {
        match self.sweep {
            SweepScheme::RedBlackSor => sor_omega(grid.h(), grid.extent()),
            SweepScheme::RedBlackGaussSeidel => 1.0,
        }
    }
}

pub fn sor_omega(h: f64, size: f64) -> f64 {
    2.0 / (1.0 + (std::f64::consts::PI * h / (2.0 * size)).sin())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Iterations {
    pub outer: usize,
    pub sweeps: usize,
    pub flips_tested: usize,
    pub flips_accepted: usize,
}

#[derive(Debug, Clone)]
pub struct SolveState {
    pub field: VectorField,
    pub mask: PlateMask,
    /// `J` over the box after the initial relaxation and after every outer iteration.
    pub energy_trace: Vec<f64>,
    pub iters: Iterations,
    /// Last relaxation residual.
    pub residual: f64,
    pub converged: bool,
    /// A sweep or outer budget ran out.
    pub budget_exhausted: bool,
    pass: usize,
}

impl SolveState {
    /// State with `field` as boundary data and initial guess; masked-out plate
    /// nodes are zeroed.
    pub fn new(field: VectorField, mask: PlateMask) -> Result<Self> {
        if mask.len() != field.grid().plate_count() {
            return Err(Error::ShapeMismatch("mask length differs from the plate node count".into()));
        }
        let mut state = SolveState {
            field,
            mask,
            energy_trace: Vec::new(),
            iters: Iterations::default(),
            residual: f64::INFINITY,
            converged: false,
            budget_exhausted: false,
            pass: 0,
        };
        state.apply_mask();
        Ok(state)
    }

    fn apply_mask(&mut self) {
        let grid = self.field.grid().clone();
        for p in 0..grid.plate_count() {
            if !self.mask.get(p) && !grid.is_plate_boundary(p) {
                let idx = grid.plate_node(p);
                self.field.components_mut().iter_mut().for_each(|c| c[idx] = 0.0);
            }
        }
    }

    pub fn energy(&self) -> f64 {
        box_energy(&self.field, &self.mask).total
    }

    /// Checks the boundary-data and mask constraints against `phi`.
    pub fn check_constraints(&self, phi: &VectorField) -> Result<()> {
        let grid = self.field.grid();
        for idx in 0..grid.node_count() {
            if grid.is_box_boundary(idx) && self.field.value(idx) != phi.value(idx) {
                return Err(Error::Precondition(format!("boundary value changed at node {idx}")));
            }
        }
        for p in 0..grid.plate_count() {
            if !self.mask.get(p) && !grid.is_plate_boundary(p) && self.field.norm_at(grid.plate_node(p)) != 0.0 {
                return Err(Error::Precondition(format!("nonzero value on masked-out plate node {p}")));
            }
        }
        Ok(())
    }

    pub fn energy_trace_monotone(&self) -> bool {
        self.energy_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

/// A free node: its index and whether it sits on the plate.
#[derive(Debug, Clone, Copy)]
struct FreeNode {
    idx: usize,
    plate: bool,
}

/// Free nodes split by the parity of the multi-index sum.
struct Layout {
    colors: [Vec<FreeNode>; 2],
}

impl Layout {
    fn from_filter(grid: &Grid, nodes: impl Iterator<Item = usize>, free_plate: impl Fn(usize) -> bool) -> Self {
        let n = grid.n();
        let mut colors = [Vec::new(), Vec::new()];
        for idx in nodes {
            if grid.is_box_boundary(idx) {
                continue;
            }
            let mi = grid.multi_index(idx);
            let plate = mi[n] == 0;
            if plate && !free_plate(grid.plate_index(&mi[..n])) {
                continue;
            }
            let parity = mi[..=n].iter().sum::<usize>() % 2;
            colors[parity].push(FreeNode { idx, plate });
        }
        Layout { colors }
    }

    fn for_mask(grid: &Grid, mask: &PlateMask) -> Self {
        Self::from_filter(grid, 0..grid.node_count(), |p| mask.get(p))
    }

    fn len(&self) -> usize {
        self.colors[0].len() + self.colors[1].len()
    }
}

/// Mean of the stencil neighbors; on the plate the reflected neighbor doubles
/// the upward edge and the in-plate edges carry half weight.
#[inline]
fn stencil_mean(u: &[f64], node: FreeNode, strides: &[usize], n: usize) -> f64 {
    let idx = node.idx;
    let mut s = 0.0;
    for st in &strides[..n] {
        s += u[idx - st] + u[idx + st];
    }
    if node.plate {
        (s + 2.0 * u[idx + strides[n]]) / (2 * (n + 1)) as f64
    } else {
        (s + u[idx - strides[n]] + u[idx + strides[n]]) / (2 * (n + 1)) as f64
    }
}

/// One red-black sweep on `u`; returns the largest `|mean - u|` seen.
fn sweep(u: &mut [f64], layout: &Layout, grid: &Grid, omega: f64) -> f64 {
    let n = grid.n();
    let strides = grid.strides();
    let mut res: f64 = 0.0;
    for nodes in &layout.colors {
        if nodes.len() >= PAR_THRESHOLD {
            let view: &[f64] = u;
            let updates: Vec<(f64, f64)> = nodes
                .par_iter()
                .map(|&node| {
                    let d = stencil_mean(view, node, strides, n) - view[node.idx];
                    (view[node.idx] + omega * d, d.abs())
                })
                .collect();
            for (node, (v, d)) in nodes.iter().zip(updates) {
                u[node.idx] = v;
                res = res.max(d);
            }
        } else {
            for &node in nodes {
                let d = stencil_mean(u, node, strides, n) - u[node.idx];
                u[node.idx] += omega * d;
                res = res.max(d.abs());
            }
        }
    }
    res
}

/// Relaxes `u` on `layout` until the residual is at most `tol`.
/// Returns `(sweeps, residual, converged)`.
fn relax_scalar(u: &mut [f64], layout: &Layout, grid: &Grid, omega: f64, tol: f64, max_sweeps: usize) -> (usize, f64, bool) {
    if layout.len() == 0 {
        return (0, 0.0, true);
    }
    let mut res = f64::INFINITY;
    for k in 1..=max_sweeps {
        res = sweep(u, layout, grid, omega);
        if res <= tol {
            return (k, res, true);
        }
    }
    (max_sweeps, res, false)
}

/// Harmonic replacement of component `i` in `ball`: nodes inside the ball
/// (plate nodes included, reflected, unconstrained) are relaxed with the values
/// outside held fixed.
pub fn harmonic_replacement(field: &VectorField, i: usize, ball: &Ball, tol: f64, max_sweeps: usize) -> Result<VectorField> {
    let grid = field.grid();
    ball.check_inside(grid)?;
    if i >= grid.m() {
        return Err(Error::Precondition(format!("component {i} out of range")));
    }
    let c = ball.center_point();
    let n = grid.n();
    let inside = |idx: usize| {
        let x = grid.node_coord(idx);
        (0..=n).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>() < ball.radius * ball.radius
    };
    let layout = Layout::from_filter(grid, (0..grid.node_count()).filter(|&idx| inside(idx)), |_| true);
    let omega = sor_omega(grid.h(), ball.radius);
    let mut out = field.clone();
    let (sweeps, residual, ok) = relax_scalar(out.component_mut(i), &layout, grid, omega, tol, max_sweeps);
    if !ok {
        return Err(Error::NotConverged { sweeps, residual, tol });
    }
    Ok(out)
}

/// Relaxes every component at the current mask. On budget exhaustion the
/// state is kept and flagged.
pub fn relax_components(state: &mut SolveState, config: &SolverConfig) {
    let grid = state.field.grid().clone();
    let layout = Layout::for_mask(&grid, &state.mask);
    let omega = config.omega(&grid);
    let mut residual: f64 = 0.0;
    let mut all_ok = true;
    for comp in state.field.components_mut() {
        let (sweeps, res, ok) = relax_scalar(comp, &layout, &grid, omega, config.relax_tol, config.max_sweeps);
        state.iters.sweeps += sweeps;
        residual = residual.max(res);
        all_ok &= ok;
    }
    state.residual = residual;
    if !all_ok {
        state.budget_exhausted = true;
    }
}

/// Plate nodes off the plate edge with a neighbor of the opposite mask value.
pub fn flip_candidates(grid: &Grid, mask: &PlateMask) -> Vec<usize> {
    (0..grid.plate_count())
        .filter(|&p| !grid.is_plate_boundary(p) && grid.plate_neighbors(p).any(|q| mask.get(q) != mask.get(p)))
        .collect()
}

/// Outcome of a tentative flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipTrial {
    pub plate_index: usize,
    pub delta_j: f64,
    pub accepted: bool,
}

/// Node indices within `radius` cells of plate node `p` (Euclidean).
fn patch_nodes(grid: &Grid, p: usize, radius: usize) -> Vec<usize> {
    let n = grid.n();
    let center = grid.plate_multi_index(p);
    let shape = grid.shape();
    let r = radius as isize;
    let mut out = Vec::new();
    let mut offset = [0isize; 3];
    let total = (2 * radius + 1).pow(n as u32) * (radius + 1);
    for k in 0..total {
        let mut rem = k;
        for a in 0..n {
            offset[a] = (rem % (2 * radius + 1)) as isize - r;
            rem /= 2 * radius + 1;
        }
        offset[n] = rem as isize;
        if offset[..=n].iter().map(|o| o * o).sum::<isize>() > r * r {
            continue;
        }
        let mut multi = [0usize; 3];
        let mut ok = true;
        for a in 0..=n {
            let v = center[a] as isize + offset[a];
            if v < 0 || v >= shape[a] as isize {
                ok = false;
                break;
            }
            multi[a] = v as usize;
        }
        if ok {
            out.push(grid.node_index(&multi[..=n]));
        }
    }
    out
}

/// Toggles plate node `p`, re-relaxes the surrounding patch and keeps the
/// toggle iff `J` drops by more than `relax_tol`.
pub fn try_flip(state: &mut SolveState, p: usize, config: &SolverConfig) -> FlipTrial {
    let grid = state.field.grid().clone();
    let idx = grid.plate_node(p);
    let nodes = patch_nodes(&grid, p, config.patch_radius);
    let mut cells: Vec<usize> = nodes.iter().flat_map(|&v| cells_around(&grid, v)).collect();
    cells.sort_unstable();
    cells.dedup();
    let corners = corner_offsets(&grid);
    let local = |field: &VectorField| -> f64 {
        field
            .components()
            .iter()
            .map(|u| cells.iter().map(|&c| cell_energy(&grid, &corners, u, c)).sum::<f64>())
            .sum::<f64>()
    };
    let before = local(&state.field);
    let saved: Vec<Vec<f64>> = state.field.components().iter().map(|u| nodes.iter().map(|&v| u[v]).collect()).collect();
    let was = state.mask.get(p);
    state.mask.set(p, !was);
    if was {
        state.field.components_mut().iter_mut().for_each(|u| u[idx] = 0.0);
    }
    let mask = &state.mask;
    let layout = Layout::from_filter(&grid, nodes.iter().copied(), |q| mask.get(q));
    let omega = sor_omega(grid.h(), config.patch_radius as f64 * grid.h());
    for u in state.field.components_mut() {
        let (sweeps, _, _) = relax_scalar(u, &layout, &grid, omega, config.relax_tol, config.max_sweeps);
        state.iters.sweeps += sweeps;
    }
    let after = local(&state.field);
    let measure = grid.plate_cell_measure(p);
    let delta_j = 2.0 * (after - before) + if was { -measure } else { measure };
    let accepted = delta_j < -config.relax_tol;
    state.iters.flips_tested += 1;
    if accepted {
        state.iters.flips_accepted += 1;
    } else {
        state.mask.set(p, was);
        for (u, old) in state.field.components_mut().iter_mut().zip(&saved) {
            for (&v, &o) in nodes.iter().zip(old) {
                u[v] = o;
            }
        }
    }
    FlipTrial { plate_index: p, delta_j, accepted }
}

/// One pass over the flip candidates in the configured order; returns every
/// trial. Neighbors of an accepted flip are queued again, so a pass can move
/// the free boundary by several cells.
pub fn flip_pass(state: &mut SolveState, config: &SolverConfig) -> Vec<FlipTrial> {
    let grid = state.field.grid().clone();
    let mut order = flip_candidates(&grid, &state.mask);
    match config.flip_pass_order {
        FlipOrder::Lexicographic => {}
        FlipOrder::Alternating => {
            if state.pass % 2 == 1 {
                order.reverse();
            }
        }
        FlipOrder::Shuffled => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(state.pass as u64));
            order.shuffle(&mut rng);
        }
    }
    state.pass += 1;
    let mut queued = vec![false; grid.plate_count()];
    order.iter().for_each(|&p| queued[p] = true);
    let mut queue: VecDeque<usize> = order.into();
    let mut trials = Vec::new();
    while let Some(p) = queue.pop_front() {
        queued[p] = false;
        // earlier flips may have moved the boundary away
        if grid.plate_neighbors(p).all(|q| state.mask.get(q) == state.mask.get(p)) {
            continue;
        }
        let trial = try_flip(state, p, config);
        if trial.accepted {
            for q in grid.plate_neighbors(p) {
                if !queued[q] && !grid.is_plate_boundary(q) {
                    queued[q] = true;
                    queue.push_back(q);
                }
            }
        }
        trials.push(trial);
    }
    trials
}

/// Plate mask from `|trace| > h^{1/2}/4` of the unconstrained harmonic extension of `phi`.
pub fn initial_mask(phi: &VectorField, config: &SolverConfig) -> Result<PlateMask> {
    let state = initial_state(phi, config)?;
    if state.budget_exhausted {
        return Err(Error::NotConverged { sweeps: state.iters.sweeps, residual: state.residual, tol: config.relax_tol });
    }
    Ok(state.mask)
}

/// The harmonic extension with the thresholded mask, flagged if its
/// relaxation ran out of sweeps.
fn initial_state(phi: &VectorField, config: &SolverConfig) -> Result<SolveState> {
    let grid = phi.grid();
    let mut state = SolveState::new(phi.clone(), PlateMask::full(grid))?;
    relax_components(&mut state, config);
    state.mask = PlateMask::from_threshold(&state.field, diagnostic_threshold(grid.h()));
    Ok(state)
}

/// Alternates relaxation and flip passes until a pass accepts nothing with the
/// residual at tolerance. `phi` supplies the box-boundary data and the initial
/// guess inside.
pub fn solve(phi: &VectorField, config: &SolverConfig, init: Option<PlateMask>) -> Result<SolveState> {
    config.validate()?;
    let grid = phi.grid();
    if phi.is_zero() {
        let mut state = SolveState::new(phi.clone(), PlateMask::empty(grid))?;
        state.energy_trace.push(0.0);
        state.residual = 0.0;
        state.converged = true;
        return Ok(state);
    }
    let mask = match init {
        Some(mask) => mask,
        None => {
            let start = initial_state(phi, config)?;
            if start.budget_exhausted {
                let mut state = SolveState::new(start.field, start.mask)?;
                state.iters = start.iters;
                state.residual = start.residual;
                state.budget_exhausted = true;
                state.energy_trace.push(state.energy());
                return Ok(state);
            }
            start.mask
        }
    };
    let mut state = SolveState::new(phi.clone(), mask)?;
    relax_components(&mut state, config);
    state.energy_trace.push(state.energy());
    while state.iters.outer < config.max_outer && !state.budget_exhausted {
        state.iters.outer += 1;
        let accepted = flip_pass(&mut state, config).iter().filter(|t| t.accepted).count();
        relax_components(&mut state, config);
        state.energy_trace.push(state.energy());
        if accepted == 0 && state.residual <= config.relax_tol {
            state.converged = true;
            break;
        }
    }
    if !state.converged {
        state.budget_exhausted = true;
    }
    Ok(state)
}
