//! The thin one-phase functional `J(G, B) = ∫_B |∇G|^2 + L_n(𝓑 ∩ {|G| > 0})`,
//! its parts, the scaling identity and the homogeneous-extension competitor.
//!
//! The Dirichlet part is the edge-based (five-point) energy that the solver's
//! relaxation minimizes: per cell, the mean squared difference along each axis.
//! Integrals over balls weight each cell by its intersection with the ball,
//! doubled for the reflected half.

use serde::{Deserialize, Serialize};

use crate::blowup;
use crate::error::{Error, Result};
use crate::field::{PlateMask, VectorField};
use crate::geometry::{ball_quadrature, pairwise_sum, Ball, Grid, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub plate_measure: f64,
    pub total: f64,
    pub boundary_l2: f64,
}

impl EnergyBreakdown {
    pub const CSV_HEADER: &'static str = "r,dirichlet,plate_measure,total,boundary_l2";

    pub fn csv_row(&self, r: f64) -> String {
        format!("{r},{},{},{},{}", self.dirichlet, self.plate_measure, self.total, self.boundary_l2)
    }
}

/// Offsets of the `2^{n+1}` corners of a cell relative to its lower corner.
pub(crate) fn corner_offsets(grid: &Grid) -> Vec<usize> {
    let dims = grid.n() + 1;
    (0..1usize << dims)
        .map(|c| (0..dims).filter(|a| c >> a & 1 == 1).map(|a| grid.strides()[a]).sum())
        .collect()
}

/// `∫_cell |∇u|^2` of the edge-based energy for the cell with lower corner `base`.
#[inline]
pub(crate) fn cell_energy(grid: &Grid, corners: &[usize], u: &[f64], base: usize) -> f64 {
    let dims = grid.n() + 1;
    let edges_per_dir = 1usize << grid.n();
    let mut acc = 0.0;
    for d in 0..dims {
        let bit = 1usize << d;
        for (c, &off) in corners.iter().enumerate() {
            if c & bit == 0 {
                let diff = u[base + corners[c | bit]] - u[base + off];
                acc += diff * diff;
            }
        }
    }
    acc / edges_per_dir as f64 * grid.h().powi(grid.n() as i32 - 1)
}

/// Bilinear form matching [`cell_energy`]: `Σ_cells ∫ ∇u · ∇v` over `cells`.
pub fn dirichlet_form(grid: &Grid, u: &[f64], v: &[f64], cells: &[usize]) -> f64 {
    let corners = corner_offsets(grid);
    let dims = grid.n() + 1;
    let scale = grid.h().powi(grid.n() as i32 - 1) / (1usize << grid.n()) as f64;
    let terms: Vec<f64> = cells
        .iter()
        .map(|&base| {
            let mut acc = 0.0;
            for d in 0..dims {
                let bit = 1usize << d;
                for (c, &off) in corners.iter().enumerate() {
                    if c & bit == 0 {
                        let hi = base + corners[c | bit];
                        let lo = base + off;
                        acc += (u[hi] - u[lo]) * (v[hi] - v[lo]);
                    }
                }
            }
            acc * scale
        })
        .collect();
    pairwise_sum(&terms)
}

/// Lower-corner indices of every cell of the grid.
pub fn all_cells(grid: &Grid) -> Vec<usize> {
    (0..grid.node_count())
        .filter(|&idx| {
            let mi = grid.multi_index(idx);
            (0..=grid.n()).all(|a| mi[a] + 1 < grid.shape()[a])
        })
        .collect()
}

/// Lower-corner indices of the cells that have `idx` as a corner.
pub fn cells_around(grid: &Grid, idx: usize) -> impl Iterator<Item = usize> + '_ {
    let mi = grid.multi_index(idx);
    let dims = grid.n() + 1;
    (0..1usize << dims).filter_map(move |c| {
        let mut base = 0;
        for a in 0..dims {
            let i = if c >> a & 1 == 1 {
                if mi[a] == 0 {
                    return None;
                }
                mi[a] - 1
            } else {
                if mi[a] + 1 >= grid.shape()[a] {
                    return None;
                }
                mi[a]
            };
            base += i * grid.strides()[a];
        }
        Some(base)
    })
}

/// Reflection-doubled Dirichlet energy summed over `cells`.
pub fn dirichlet_on_cells(field: &VectorField, cells: &[usize]) -> f64 {
    let grid = field.grid();
    let corners = corner_offsets(grid);
    let terms: Vec<f64> = cells
        .iter()
        .map(|&c| field.components().iter().map(|u| cell_energy(grid, &corners, u, c)).sum::<f64>())
        .collect();
    2.0 * pairwise_sum(&terms)
}

/// `J` over the whole box (reflection-doubled); `boundary_l2` is left at zero.
pub fn box_energy(field: &VectorField, mask: &PlateMask) -> EnergyBreakdown {
    let grid = field.grid();
    let dirichlet = dirichlet_on_cells(field, &all_cells(grid));
    let measure: Vec<f64> =
        (0..grid.plate_count()).filter(|&p| mask.get(p)).map(|p| grid.plate_cell_measure(p)).collect();
    let plate_measure = pairwise_sum(&measure);
    EnergyBreakdown { dirichlet, plate_measure, total: dirichlet + plate_measure, boundary_l2: 0.0 }
}

/// `J(G, B)` with its parts and `∫_{∂B} |G|^2`.
pub fn energy(field: &VectorField, mask: &PlateMask, ball: &Ball) -> Result<EnergyBreakdown> {
    let grid = field.grid();
    if mask.len() != grid.plate_count() {
        return Err(Error::ShapeMismatch("mask length differs from the plate node count".into()));
    }
    let quad = ball_quadrature(grid, ball)?;
    let corners = corner_offsets(grid);
    let cell_measure = grid.h().powi(grid.n() as i32 + 1);
    let dirichlet_terms: Vec<f64> = quad
        .volume
        .iter()
        .map(|&(c, w)| {
            let e: f64 = field.components().iter().map(|u| cell_energy(grid, &corners, u, c)).sum();
            w / cell_measure * e
        })
        .collect();
    let dirichlet = pairwise_sum(&dirichlet_terms);
    let plate_terms: Vec<f64> = quad.plate.iter().filter(|&&(p, _)| mask.get(p)).map(|&(_, w)| w).collect();
    let plate_measure = pairwise_sum(&plate_terms);
    let mut buf = vec![0.0; grid.m()];
    let surface_terms: Vec<f64> = quad
        .surface
        .iter()
        .map(|s| {
            field.interpolate_into(&s.point[..=grid.n()], &mut buf);
            s.weight * buf.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    let boundary_l2 = pairwise_sum(&surface_terms);
    Ok(EnergyBreakdown { dirichlet, plate_measure, total: dirichlet + plate_measure, boundary_l2 })
}

/// `(J(G, B_R(X_0)), r^n J(G_{X_0, r}, B_{R/r}))`.
///
/// The blow-up is sampled on a grid of spacing `h / r`, so that for a node
/// center both sides see the same nodal values.
pub fn scaling_check(field: &VectorField, mask: &PlateMask, x0: &[f64], r: f64, big_r: f64) -> Result<(f64, f64)> {
    let grid = field.grid();
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("scale r = {r} must be positive")));
    }
    let lhs = energy(field, mask, &Ball::new(x0, big_r))?.total;
    let h_ref = grid.h() / r;
    let cells = (big_r / r / h_ref).ceil() as usize + 2;
    let ref_grid = Grid::new(grid.n(), grid.m(), h_ref, cells as f64 * h_ref)?;
    let (scaled, scaled_mask) = blowup::rescale_with_mask(field, mask, x0, r, &ref_grid)?;
    let origin = vec![0.0; grid.n()];
    let rhs = r.powi(grid.n() as i32) * energy(&scaled, &scaled_mask, &Ball::new(&origin, big_r / r))?.total;
    Ok((lhs, rhs))
}

/// The `1/2`-homogeneous extension into `B_r(X_0)` of the trace of `G` on
/// `∂B_r(X_0)`; nodes outside the ball keep their values.
#[derive(Debug, Clone)]
pub struct HomogeneousExtension {
    pub field: VectorField,
    pub mask: PlateMask,
    /// `J(G, B_r)` of the input.
    pub original: EnergyBreakdown,
    /// `J(G̃, B_r)` of the extension.
    pub extension: EnergyBreakdown,
}

impl HomogeneousExtension {
    /// `J(G̃, B_r) - J(G, B_r)`; non-negative for minimizers.
    pub fn excess(&self) -> f64 {
        self.extension.total - self.original.total
    }
}

pub fn homogeneous_extension(field: &VectorField, mask: &PlateMask, x0: &[f64], r: f64) -> Result<HomogeneousExtension> {
    if !(r > 0.0) {
        return Err(Error::Precondition("extension radius must be positive".into()));
    }
    let grid = field.grid();
    let ball = Ball::new(x0, r);
    ball.check_inside(grid)?;
    let center = ball.center_point();
    let n = grid.n();
    let mut out = field.clone();
    let mut buf = vec![0.0; grid.m()];
    for idx in 0..grid.node_count() {
        let x = grid.node_coord(idx);
        let dist = distance(&x, &center, n + 1);
        if dist >= r {
            continue;
        }
        if dist == 0.0 {
            for c in out.components_mut() {
                c[idx] = 0.0;
            }
            continue;
        }
        let proj = project(&x, &center, n + 1, r / dist);
        field.interpolate_into(&proj[..=n], &mut buf);
        let factor = (dist / r).sqrt();
        for (c, v) in out.components_mut().iter_mut().zip(&buf) {
            c[idx] = factor * v;
        }
    }
    let mut new_mask = mask.clone();
    for p in 0..grid.plate_count() {
        let x = grid.plate_coord(p);
        let dist = distance(&x, &center, n);
        if dist >= r {
            continue;
        }
        let positive = if dist == 0.0 {
            false
        } else {
            let proj = project(&x, &center, n, r / dist);
            blowup::mask_at(grid, mask, &proj[..n])
        };
        new_mask.set(p, positive);
    }
    let original = energy(field, mask, &ball)?;
    let extension = energy(&out, &new_mask, &ball)?;
    Ok(HomogeneousExtension { field: out, mask: new_mask, original, extension })
}

fn distance(x: &[f64; MAX_DIM], c: &[f64; MAX_DIM], dims: usize) -> f64 {
    (0..dims).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>().sqrt()
}

fn project(x: &[f64; MAX_DIM], c: &[f64; MAX_DIM], dims: usize, scale: f64) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    for a in 0..dims {
        out[a] = c[a] + scale * (x[a] - c[a]);
    }
    out
}
