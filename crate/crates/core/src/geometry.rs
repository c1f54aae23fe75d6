//! Structured grids over the upper half box `[-R, R]^n x [0, R]`, balls centered
//! on the plate `{x_{n+1} = 0}`, multilinear interpolation with even reflection,
//! and quadrature over balls.
//!
//! Only the upper half is stored. Every integral over a full ball counts the
//! reflected lower half, so volume and surface weights are doubled; plate
//! weights are not.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum supported coordinate count (`n + 1` with `n <= 2`).
pub const MAX_DIM: usize = 3;

/// Descriptor of a structured grid on the upper half box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n: usize,
    m: usize,
    h: f64,
    extent: f64,
    half: usize,
    shape: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
}

/// Serialized form of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub extent: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.n, spec.m, spec.h, spec.extent)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        grid.spec()
    }
}

/// Builds a validated grid; see [`Grid::new`].
pub fn make_grid(n: usize, m: usize, h: f64, extent: f64) -> Result<Grid> {
    Grid::new(n, m, h, extent)
}

impl Grid {
    pub fn new(n: usize, m: usize, h: f64, extent: f64) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidGrid(format!("plate dimension n = {n} not in {{1, 2}}")));
        }
        if m == 0 {
            return Err(Error::InvalidGrid("component count m must be at least 1".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing h = {h} must be positive")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent = {extent} must be positive")));
        }
        let ratio = extent / h;
        let half = ratio.round();
        if half < 1.0 || (ratio - half).abs() > 1e-9 * half.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "extent / h = {ratio} is not a positive integer"
            )));
        }
        let half = half as usize;
        let mut shape = [1usize; MAX_DIM];
        for s in shape.iter_mut().take(n) {
            *s = 2 * half + 1;
        }
        shape[n] = half + 1;
        let mut strides = [0usize; MAX_DIM];
        let mut acc = 1;
        for axis in (0..=n).rev() {
            strides[axis] = acc;
            acc *= shape[axis];
        }
        Ok(Grid { n, m, h, extent, half, shape, strides })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n: self.n, m: self.m, h: self.h, extent: self.extent }
    }

    /// Same geometry with a different component count.
    pub fn with_components(&self, m: usize) -> Result<Grid> {
        Grid::new(self.n, m, self.h, self.extent)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Number of cells between the center and the box edge along each axis.
    pub fn half_cells(&self) -> usize {
        self.half
    }

    /// Points per axis, `n + 1` entries, last axis is `x_{n+1}`.
    pub fn shape(&self) -> &[usize] {
        &self.shape[..=self.n]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides[..=self.n]
    }

    pub fn node_count(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn plate_count(&self) -> usize {
        self.shape[..self.n].iter().product()
    }

    /// Stride between consecutive `x_{n+1}` layers (always 1).
    pub fn layer_stride(&self) -> usize {
        self.strides[self.n]
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for axis in 0..=self.n {
            out[axis] = idx / self.strides[axis];
            idx %= self.strides[axis];
        }
        out
    }

    /// Node index of plate node `p` (plate nodes enumerated row-major over the
    /// first `n` axes).
    pub fn plate_node(&self, p: usize) -> usize {
        p * self.shape[self.n]
    }

    pub fn plate_multi_index(&self, mut p: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for axis in (0..self.n).rev() {
            out[axis] = p % self.shape[axis];
            p /= self.shape[axis];
        }
        out
    }

    pub fn plate_index(&self, multi: &[usize]) -> usize {
        let mut p = 0;
        for axis in 0..self.n {
            p = p * self.shape[axis] + multi[axis];
        }
        p
    }

    /// Coordinate of grid line `i` along `axis`.
    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        if axis < self.n {
            (i as f64 - self.half as f64) * self.h
        } else {
            i as f64 * self.h
        }
    }

    pub fn node_coord(&self, idx: usize) -> [f64; MAX_DIM] {
        let multi = self.multi_index(idx);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..=self.n {
            x[axis] = self.axis_coord(axis, multi[axis]);
        }
        x
    }

    pub fn plate_coord(&self, p: usize) -> [f64; MAX_DIM] {
        let multi = self.plate_multi_index(p);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.n {
            x[axis] = self.axis_coord(axis, multi[axis]);
        }
        x
    }

    /// True for nodes on the lateral faces or the top face of the box.
    pub fn is_box_boundary(&self, idx: usize) -> bool {
        let multi = self.multi_index(idx);
        (0..self.n).any(|a| multi[a] == 0 || multi[a] + 1 == self.shape[a])
            || multi[self.n] + 1 == self.shape[self.n]
    }

    pub fn is_plate_boundary(&self, p: usize) -> bool {
        let multi = self.plate_multi_index(p);
        (0..self.n).any(|a| multi[a] == 0 || multi[a] + 1 == self.shape[a])
    }

    /// Length/area of the dual cell of plate node `p`, clipped to the box.
    pub fn plate_cell_measure(&self, p: usize) -> f64 {
        let multi = self.plate_multi_index(p);
        (0..self.n)
            .map(|a| if multi[a] == 0 || multi[a] + 1 == self.shape[a] { 0.5 * self.h } else { self.h })
            .product()
    }

    /// Neighbors of plate node `p` along the plate axes.
    pub fn plate_neighbors(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        let multi = self.plate_multi_index(p);
        let mut out = [usize::MAX; 2 * MAX_DIM];
        for axis in 0..self.n {
            if multi[axis] > 0 {
                let mut q = multi;
                q[axis] -= 1;
                out[2 * axis] = self.plate_index(&q);
            }
            if multi[axis] + 1 < self.shape[axis] {
                let mut q = multi;
                q[axis] += 1;
                out[2 * axis + 1] = self.plate_index(&q);
            }
        }
        out.into_iter().filter(|&q| q != usize::MAX)
    }

    /// True if `x` (length `n + 1`) lies in the box after even reflection.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12 * self.extent;
        (0..self.n).all(|a| x[a].abs() <= self.extent + tol) && x[self.n].abs() <= self.extent + tol
    }

    /// Multilinear interpolation of nodal `values` at `x`; points below the
    /// plate are reflected.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::OutOfBox { point: x[..=self.n].to_vec() });
        }
        Ok(self.interpolate_unchecked(values, x))
    }

    /// As [`Grid::interpolate`] but clamps instead of failing.
    pub fn interpolate_unchecked(&self, values: &[f64], x: &[f64]) -> f64 {
        let (base, frac) = self.locate(x);
        let corners = 1usize << (self.n + 1);
        let mut acc = 0.0;
        for c in 0..corners {
            let mut w = 1.0;
            let mut idx = base;
            for axis in 0..=self.n {
                if c >> axis & 1 == 1 {
                    w *= frac[axis];
                    idx += self.strides[axis];
                } else {
                    w *= 1.0 - frac[axis];
                }
            }
            if w != 0.0 {
                acc += w * values[idx];
            }
        }
        acc
    }

    /// Gradient of the multilinear interpolant at `x` (reflected below the plate).
    pub fn interpolate_gradient(&self, values: &[f64], x: &[f64]) -> [f64; MAX_DIM] {
        let (base, frac) = self.locate(x);
        let corners = 1usize << (self.n + 1);
        let mut grad = [0.0; MAX_DIM];
        for c in 0..corners {
            let mut idx = base;
            for axis in 0..=self.n {
                if c >> axis & 1 == 1 {
                    idx += self.strides[axis];
                }
            }
            let v = values[idx];
            for (d, g) in grad.iter_mut().enumerate().take(self.n + 1) {
                let mut w = 1.0;
                for axis in 0..=self.n {
                    let hi = c >> axis & 1 == 1;
                    w *= if axis == d {
                        if hi { 1.0 / self.h } else { -1.0 / self.h }
                    } else if hi {
                        frac[axis]
                    } else {
                        1.0 - frac[axis]
                    };
                }
                *g += w * v;
            }
        }
        if x[self.n] < 0.0 {
            grad[self.n] = -grad[self.n];
        }
        grad
    }

    fn locate(&self, x: &[f64]) -> (usize, [f64; MAX_DIM]) {
        let mut base = 0;
        let mut frac = [0.0; MAX_DIM];
        for axis in 0..=self.n {
            let (coord, offset) = if axis < self.n {
                (x[axis], self.extent)
            } else {
                (x[axis].abs(), 0.0)
            };
            let s = ((coord + offset) / self.h).clamp(0.0, (self.shape[axis] - 1) as f64);
            let cell = (s.floor() as usize).min(self.shape[axis] - 2);
            frac[axis] = s - cell as f64;
            base += cell * self.strides[axis];
        }
        (base, frac)
    }
}

/// Ball `B_r(X_0)` with center on the plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    /// Plate coordinates of the center (length `n`); `x_{n+1} = 0`.
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: &[f64], radius: f64) -> Self {
        Ball { center: center.to_vec(), radius }
    }

    /// Center as a full `n + 1` coordinate.
    pub fn center_point(&self) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        c[..self.center.len()].copy_from_slice(&self.center);
        c
    }

    /// Strict containment; touching the box counts as outside.
    pub fn check_inside(&self, grid: &Grid) -> Result<()> {
        let err = || Error::BallOutsideBox { center: self.center.clone(), radius: self.radius };
        if self.center.len() != grid.n() || !(self.radius > 0.0) {
            return Err(err());
        }
        let r = self.radius;
        let inside = self.center.iter().all(|c| c.abs() + r < grid.extent()) && r < grid.extent();
        if inside { Ok(()) } else { Err(err()) }
    }
}

/// A weighted sample on `∂B_r` (reflection already folded into the weight).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub point: [f64; MAX_DIM],
    /// Outward unit normal.
    pub normal: [f64; MAX_DIM],
    pub weight: f64,
}

/// Quadrature weights of a ball on a grid.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    /// `(cell index, weight)`; cell index is the node index of its lower corner.
    /// Weights are `2 |cell ∩ B_r^+|`.
    pub volume: Vec<(usize, f64)>,
    /// `(plate index, |dual cell ∩ 𝓑_r|)`.
    pub plate: Vec<(usize, f64)>,
    pub surface: Vec<SurfaceSample>,
}

impl BallQuadrature {
    pub fn volume_total(&self) -> f64 {
        pairwise_sum(&self.volume.iter().map(|&(_, w)| w).collect::<Vec<_>>())
    }

    pub fn surface_total(&self) -> f64 {
        pairwise_sum(&self.surface.iter().map(|s| s.weight).collect::<Vec<_>>())
    }

    pub fn plate_total(&self) -> f64 {
        pairwise_sum(&self.plate.iter().map(|&(_, w)| w).collect::<Vec<_>>())
    }
}

pub fn ball_quadrature(grid: &Grid, ball: &Ball) -> Result<BallQuadrature> {
    ball.check_inside(grid)?;
    Ok(BallQuadrature {
        volume: volume_weights(grid, ball),
        plate: plate_weights(grid, ball),
        surface: surface_samples(grid, ball),
    })
}

/// Index range of cells along `axis` that may meet `[lo, hi]`.
fn cell_range(grid: &Grid, axis: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let offset = if axis < grid.n() { grid.extent() } else { 0.0 };
    let ncell = grid.shape()[axis] - 1;
    let a = (((lo + offset) / grid.h()).floor().max(0.0) as usize).min(ncell);
    let b = ((((hi + offset) / grid.h()).ceil()).max(0.0) as usize).min(ncell);
    a..b
}

fn volume_weights(grid: &Grid, ball: &Ball) -> Vec<(usize, f64)> {
    let h = grid.h();
    let r = ball.radius;
    let c = ball.center_point();
    let n = grid.n();
    let mut out = Vec::new();
    match n {
        1 => {
            for i in cell_range(grid, 0, c[0] - r, c[0] + r) {
                let x0 = grid.axis_coord(0, i);
                for j in cell_range(grid, 1, 0.0, r) {
                    let y0 = grid.axis_coord(1, j);
                    let a = rect_disk_area(x0 - c[0], x0 + h - c[0], y0, y0 + h, r);
                    if a > 0.0 {
                        out.push((grid.node_index(&[i, j]), 2.0 * a));
                    }
                }
            }
        }
        _ => {
            let cell_vol = h * h * h;
            for i in cell_range(grid, 0, c[0] - r, c[0] + r) {
                for k in cell_range(grid, 1, c[1] - r, c[1] + r) {
                    for j in cell_range(grid, 2, 0.0, r) {
                        let lo = [grid.axis_coord(0, i) - c[0], grid.axis_coord(1, k) - c[1], grid.axis_coord(2, j)];
                        let frac = cube_ball_fraction(lo, h, r);
                        if frac > 0.0 {
                            out.push((grid.node_index(&[i, k, j]), 2.0 * frac * cell_vol));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fraction of the cube `lo + [0, h]^3` inside the origin ball of radius `r`:
/// exact 0/1 away from the sphere, 8-point subsampling on cut cells.
fn cube_ball_fraction(lo: [f64; 3], h: f64, r: f64) -> f64 {
    let mut near2 = 0.0;
    let mut far2 = 0.0;
    for d in 0..3 {
        let a = lo[d];
        let b = lo[d] + h;
        let near = if a > 0.0 { a } else if b < 0.0 { -b } else { 0.0 };
        let far = a.abs().max(b.abs());
        near2 += near * near;
        far2 += far * far;
    }
    let r2 = r * r;
    if far2 <= r2 {
        return 1.0;
    }
    if near2 >= r2 {
        return 0.0;
    }
    let mut inside = 0;
    for s in 0..8 {
        let mut d2 = 0.0;
        for d in 0..3 {
            let off = if s >> d & 1 == 1 { 0.75 } else { 0.25 };
            let x = lo[d] + off * h;
            d2 += x * x;
        }
        if d2 < r2 {
            inside += 1;
        }
    }
    inside as f64 / 8.0
}

/// `(plate index, |dual cell ∩ 𝓑_r|)` for every plate node whose dual cell meets the plate ball.
pub fn plate_weights(grid: &Grid, ball: &Ball) -> Vec<(usize, f64)> {
    let h = grid.h();
    let r = ball.radius;
    let c = ball.center_point();
    let mut out = Vec::new();
    match grid.n() {
        1 => {
            for p in 0..grid.plate_count() {
                let x = grid.plate_coord(p)[0];
                let lo = (x - 0.5 * h).max(-grid.extent()).max(c[0] - r);
                let hi = (x + 0.5 * h).min(grid.extent()).min(c[0] + r);
                if hi > lo {
                    out.push((p, hi - lo));
                }
            }
        }
        _ => {
            for p in 0..grid.plate_count() {
                let x = grid.plate_coord(p);
                let x0 = (x[0] - 0.5 * h).max(-grid.extent()) - c[0];
                let x1 = (x[0] + 0.5 * h).min(grid.extent()) - c[0];
                let y0 = (x[1] - 0.5 * h).max(-grid.extent()) - c[1];
                let y1 = (x[1] + 0.5 * h).min(grid.extent()) - c[1];
                let a = rect_disk_area(x0, x1, y0, y1, r);
                if a > 0.0 {
                    out.push((p, a));
                }
            }
        }
    }
    out
}

fn surface_samples(grid: &Grid, ball: &Ball) -> Vec<SurfaceSample> {
    let h = grid.h();
    let r = ball.radius;
    let c = ball.center_point();
    let mut out = Vec::new();
    match grid.n() {
        1 => {
            // upper half circle, doubled
            let k = ((PI * r / h).ceil() as usize).max(8);
            let dtheta = PI / k as f64;
            for i in 0..k {
                let theta = (i as f64 + 0.5) * dtheta;
                let (s, co) = theta.sin_cos();
                out.push(SurfaceSample {
                    point: [c[0] + r * co, r * s, 0.0],
                    normal: [co, s, 0.0],
                    weight: 2.0 * r * dtheta,
                });
            }
        }
        _ => {
            // upper hemisphere; polar angle measured from the x_{n+1} axis
            let kp = ((0.5 * PI * r / h).ceil() as usize).max(4);
            let dphi = 0.5 * PI / kp as f64;
            for i in 0..kp {
                let phi = (i as f64 + 0.5) * dphi;
                let (sp, cp) = phi.sin_cos();
                let ka = ((2.0 * PI * r * sp / h).ceil() as usize).max(8);
                let dpsi = 2.0 * PI / ka as f64;
                for j in 0..ka {
                    let psi = (j as f64 + 0.5) * dpsi;
                    let (ss, cs) = psi.sin_cos();
                    let normal = [sp * cs, sp * ss, cp];
                    out.push(SurfaceSample {
                        point: [c[0] + r * normal[0], c[1] + r * normal[1], r * normal[2]],
                        normal,
                        weight: 2.0 * r * r * sp * dphi * dpsi,
                    });
                }
            }
        }
    }
    out
}

/// Exact area of `[x0, x1] x [y0, y1]` intersected with the disk of radius `r`
/// centered at the origin.
pub fn rect_disk_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    let a = x0.max(-r);
    let b = x1.min(r);
    if b <= a || y1 <= y0 {
        return 0.0;
    }
    let chord = |s: f64| (r * r - s * s).max(0.0).sqrt();
    // antiderivative of the half chord
    let prim = |s: f64| {
        let s = s.clamp(-r, r);
        0.5 * (s * chord(s) + r * r * (s / r).clamp(-1.0, 1.0).asin())
    };
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let s = (r * r - y * y).sqrt();
            for t in [-s, s] {
                if t > a && t < b {
                    breaks.push(t);
                }
            }
        }
    }
    breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let mid = 0.5 * (s0 + s1);
        let cm = chord(mid);
        let top_is_chord = cm < y1;
        let bottom_is_chord = -cm > y0;
        let top = if top_is_chord { cm } else { y1 };
        let bottom = if bottom_is_chord { -cm } else { y0 };
        if top <= bottom {
            continue;
        }
        let chord_int = prim(s1) - prim(s0);
        let len = s1 - s0;
        let top_int = if top_is_chord { chord_int } else { y1 * len };
        let bottom_int = if bottom_is_chord { -chord_int } else { y0 * len };
        area += top_int - bottom_int;
    }
    area.max(0.0)
}

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Volume of the unit `d`-ball for `d` in `1..=3`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {d}"),
    }
}
