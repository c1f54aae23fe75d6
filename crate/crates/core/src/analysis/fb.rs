//! The thin free boundary `F(G)`: boundary, within the plate, of the positivity set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PlateMask;
use crate::geometry::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbPoint {
    /// Plate coordinates of the midpoint of a plate edge joining a positive
    /// and a zero node.
    pub position: Vec<f64>,
    /// Unit normal in the plate pointing into the positivity set.
    pub normal: Vec<f64>,
    /// Plate indices of the zero and the positive endpoint.
    pub edge: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundary {
    pub points: Vec<FbPoint>,
}

impl FreeBoundary {
    /// Points whose plate ball of radius `reach` stays strictly inside the plate.
    pub fn interior(&self, grid: &Grid, reach: f64) -> Vec<&FbPoint> {
        self.points.iter().filter(|p| p.position.iter().all(|c| c.abs() + reach < grid.extent())).collect()
    }
}

/// Edge midpoints between positive and zero plate nodes. In the plate of
/// dimension 2 the normal is the gradient of a least-squares plane fitted to
/// the 0/1 mask on the 5 × 5 node stencil around the midpoint.
pub fn extract_fb(grid: &Grid, mask: &PlateMask) -> Result<FreeBoundary> {
    if mask.len() != grid.plate_count() {
        return Err(Error::ShapeMismatch("mask length differs from the plate node count".into()));
    }
    if mask.all_set() || mask.none_set() {
        return Err(Error::EmptyFreeBoundary(if mask.all_set() { "mask is full" } else { "mask is empty" }.into()));
    }
    let n = grid.n();
    let mut points = Vec::new();
    for p in 0..grid.plate_count() {
        let multi = grid.plate_multi_index(p);
        for axis in 0..n {
            if multi[axis] + 1 >= grid.shape()[axis] {
                continue;
            }
            let mut up = multi;
            up[axis] += 1;
            let q = grid.plate_index(&up[..n]);
            if mask.get(p) == mask.get(q) {
                continue;
            }
            let (zero, pos) = if mask.get(q) { (p, q) } else { (q, p) };
            let xp = grid.plate_coord(p);
            let mut position: Vec<f64> = xp[..n].to_vec();
            position[axis] += 0.5 * grid.h();
            let mut normal = vec![0.0; n];
            normal[axis] = if mask.get(q) { 1.0 } else { -1.0 };
            if n == 2 {
                if let Some(nu) = plane_fit_normal(grid, mask, &position) {
                    normal = nu;
                }
            }
            points.push(FbPoint { position, normal, edge: (zero, pos) });
        }
    }
    Ok(FreeBoundary { points })
}

/// Gradient direction of the plane `c + g·(x - mid)` fitted to the mask.
fn plane_fit_normal(grid: &Grid, mask: &PlateMask, mid: &[f64]) -> Option<Vec<f64>> {
    let h = grid.h();
    // normal equations for (c, g0, g1)
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for p in 0..grid.plate_count() {
        let x = grid.plate_coord(p);
        let d = [(x[0] - mid[0]) / h, (x[1] - mid[1]) / h];
        if d[0].abs() > 2.5 || d[1].abs() > 2.5 {
            continue;
        }
        let phi = [1.0, d[0], d[1]];
        let v = if mask.get(p) { 1.0 } else { 0.0 };
        for i in 0..3 {
            rhs[i] += phi[i] * v;
            for j in 0..3 {
                a[i][j] += phi[i] * phi[j];
            }
        }
    }
    let g = solve3(a, rhs)?;
    let norm = g[1].hypot(g[2]);
    (norm > 1e-12).then(|| vec![g[1] / norm, g[2] / norm])
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
