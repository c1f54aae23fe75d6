//! Free boundary extraction and pointwise or multi-scale diagnostics.

pub mod classify;
pub mod density;
pub mod domain;
pub mod fb;
pub mod flatness;
pub mod harnack;
pub mod regularity;
pub mod report;
pub mod slope;

pub use classify::{classify, ClassifyConfig, Classification, Label};
pub use density::density_ratio;
pub use domain::{domain_variation, DomainVariation, Trap};
pub use fb::{extract_fb, FbPoint, FreeBoundary};
pub use flatness::{best_flatness, flatness, iof_check, vector_structure, Flatness, IofCheck, VectorStructure};
pub use harnack::{harnack_decay, HarnackReport, TrapWidth};
pub use regularity::{dyadic_radii, holder_fit, nondeg_fit, PowerFit};
pub use report::{DiagnosticsReport, PointReport};
pub use slope::{estimate_a_star, slope, SlopeFit};

use crate::geometry::{Grid, MAX_DIM};

/// Least-squares line `y ≈ slope x + intercept`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Median of a non-empty list (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

/// Nodes in the closed ball `|X - (x0, 0)| <= r`.
pub(crate) fn ball_nodes(grid: &Grid, x0: &[f64], r: f64) -> Vec<usize> {
    let n = grid.n();
    let h = grid.h();
    let e = grid.extent();
    let r2 = r * r * (1.0 + 1e-12);
    let lo = |c: f64, off: f64| (((c - r + off) / h).floor().max(0.0)) as usize;
    let hi = |c: f64, off: f64, len: usize| ((((c + r + off) / h).ceil()) as usize).min(len - 1);
    let mut ranges = [(0usize, 0usize); MAX_DIM];
    for a in 0..n {
        ranges[a] = (lo(x0[a], e), hi(x0[a], e, grid.shape()[a]));
    }
    ranges[n] = (0, hi(0.0, 0.0, grid.shape()[n]));
    let mut out = Vec::new();
    let mut multi = [0usize; MAX_DIM];
    let counts: Vec<usize> = (0..=n).map(|a| ranges[a].1 - ranges[a].0 + 1).collect();
    let total: usize = counts.iter().product();
    for k in 0..total {
        let mut rem = k;
        for a in (0..=n).rev() {
            multi[a] = ranges[a].0 + rem % counts[a];
            rem /= counts[a];
        }
        let idx = grid.node_index(&multi[..=n]);
        let x = grid.node_coord(idx);
        let d2: f64 = (0..n).map(|a| (x[a] - x0[a]).powi(2)).sum::<f64>() + x[n] * x[n];
        if d2 <= r2 {
            out.push(idx);
        }
    }
    out.sort_unstable();
    out
}

/// Plate indices in the closed plate ball `|x - x0| <= r`.
pub(crate) fn plate_ball(grid: &Grid, x0: &[f64], r: f64) -> Vec<usize> {
    ball_nodes(grid, x0, r)
        .into_iter()
        .filter(|&idx| grid.multi_index(idx)[grid.n()] == 0)
        .map(|idx| grid.plate_index(&grid.multi_index(idx)[..grid.n()]))
        .collect()
}
