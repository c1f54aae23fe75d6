//! ε-domain variation: `w` with `U(X) = g(X - w e_n)` for a scalar `g`
//! trapped between translates of `U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MAX_DIM;
use crate::profiles::{eval_u, u_level_t};

/// Samples along `[-ε, ε]` used to test monotonicity in `e_n`.
const MONOTONE_SAMPLES: usize = 17;
const BISECTION_STEPS: usize = 80;

/// Tightest `[a, b]` with `U(X + a e_n) <= g(X) <= U(X + b e_n)` on a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trap {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVariation {
    /// Points off `P = {x_n <= 0, x_{n+1} = 0}` where `w` was solved.
    pub points: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    /// Input points lying on `P`.
    pub skipped: usize,
    /// `g` failed the monotonicity sample along `e_n` somewhere.
    pub multivalued: bool,
    /// Trap over the input points and the preimages `X - w e_n`.
    pub trap: Trap,
    /// `a <= w <= b` at every solved point (up to the bisection tolerance).
    pub trap_holds: bool,
}

fn shifted(x: &[f64], n: usize, d: f64) -> [f64; MAX_DIM] {
    let mut y = [0.0; MAX_DIM];
    y[..=n].copy_from_slice(&x[..=n]);
    y[n - 1] += d;
    y
}

fn u_at(x: &[f64], n: usize) -> f64 {
    eval_u(x[n - 1], x[n])
}

/// `(largest admissible a, smallest admissible b)` for the value `v` at `x`.
fn shift_range(x: &[f64], n: usize, v: f64) -> (f64, f64) {
    let (t, s) = (x[n - 1], x[n]);
    match u_level_t(v, s) {
        Some(level) => (level - t, level - t),
        // g = 0 leaves b free; a lower translate must vanish at x
        None if s == 0.0 => (-t, f64::NEG_INFINITY),
        None => (f64::NEG_INFINITY, f64::NEG_INFINITY),
    }
}

/// Solves `g(X - w e_n) = U(X)` by bisection on `[-ε, ε]` at every point off
/// `P`. `g` takes `n + 1` coordinates. The trapping
/// `U(X - ε e_n) <= g(X) <= U(X + ε e_n)` is checked on all points first.
pub fn domain_variation(g: impl Fn(&[f64]) -> f64, n: usize, eps: f64, points: &[Vec<f64>]) -> Result<DomainVariation> {
    if n == 0 || n >= MAX_DIM {
        return Err(Error::Precondition(format!("plate dimension {n} not supported")));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("ε must be positive, got {eps}")));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n + 1) {
        return Err(Error::ShapeMismatch(format!("point {p:?} does not have n + 1 coordinates")));
    }
    let slack = |v: f64| 1e-12 * v.abs().max(1.0);
    for x in points {
        let v = g(x);
        let lo = u_at(&shifted(x, n, -eps), n);
        let hi = u_at(&shifted(x, n, eps), n);
        if v < lo - slack(lo) || v > hi + slack(hi) {
            return Err(Error::TrappingViolated(format!("g = {v} outside [{lo}, {hi}] at {x:?}")));
        }
    }

    let mut out_points = Vec::new();
    let mut w = Vec::new();
    let mut multivalued = false;
    let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut widen = |x: &[f64], v: f64| {
        let (lo, hi) = shift_range(x, n, v);
        a = a.min(lo);
        b = b.max(hi);
    };
    let mut skipped = 0;
    for x in points {
        widen(x, g(x));
        if x[n] == 0.0 && x[n - 1] <= 0.0 {
            skipped += 1;
            continue;
        }
        let target = u_at(x, n);
        let phi = |d: f64| g(&shifted(x, n, -d)[..=n]) - target;
        let (mut lo, mut hi) = (-eps, eps);
        let (f_lo, f_hi) = (phi(lo), phi(hi));
        if !(f_lo >= 0.0 && f_hi <= 0.0) {
            return Err(Error::NotBracketed(x.clone()));
        }
        let samples: Vec<f64> = (0..MONOTONE_SAMPLES)
            .map(|k| phi(-eps + 2.0 * eps * k as f64 / (MONOTONE_SAMPLES - 1) as f64))
            .collect();
        if samples.windows(2).any(|p| p[1] > p[0] + slack(p[0])) {
            multivalued = true;
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * eps.max(1.0) {
                break;
            }
        }
        let root = 0.5 * (lo + hi);
        let pre = shifted(x, n, -root);
        widen(&pre[..=n], g(&pre[..=n]));
        out_points.push(x.clone());
        w.push(root);
    }
    let tol = 1e-9 * eps.max(1.0);
    let trap_holds = w.iter().all(|&v| v >= a - tol && v <= b + tol);
    Ok(DomainVariation { points: out_points, w, skipped, multivalued, trap: Trap { a, b }, trap_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(h: f64, r: f64) -> Vec<Vec<f64>> {
        let k = (r / h).round() as i64;
        let mut pts = Vec::new();
        for i in -k..=k {
            for j in 0..=k {
                let (x, s) = (i as f64 * h, j as f64 * h);
                if x.hypot(s) <= r {
                    pts.push(vec![x, s]);
                }
            }
        }
        pts
    }

    #[test]
    fn identity_and_translates() {
        let pts = lattice(1.0 / 32.0, 0.5);
        let dv = domain_variation(|x| eval_u(x[0], x[1]), 1, 0.1, &pts).unwrap();
        assert!(dv.w.iter().all(|w| w.abs() < 1e-12));
        assert_eq!(dv.skipped, 17);
        assert!(!dv.multivalued && dv.trap_holds);
        for tau in [-0.08, 0.05] {
            let dv = domain_variation(|x| eval_u(x[0] + tau, x[1]), 1, 0.1, &pts).unwrap();
            assert!(dv.w.iter().all(|w| (w - tau).abs() < 1e-12), "{tau}");
            assert!((dv.trap.b - tau).abs() < 1e-9 && dv.trap.a <= tau + 1e-9);
        }
    }

    #[test]
    fn oscillating_shift() {
        let h = 1.0 / 64.0;
        let pts = lattice(h, 0.5);
        let tau = |x: &[f64]| 0.04 * (6.0 * x[0]).sin() * (1.0 - x[1]);
        let dv = domain_variation(|x| eval_u(x[0] + tau(x), x[1]), 1, 0.1, &pts).unwrap();
        let err = dv.points.iter().zip(&dv.w).map(|(x, w)| (w - tau(x)).abs()).fold(0.0, f64::max);
        assert!(err <= 2.0 * h.sqrt(), "{err}");
        assert!(dv.w.iter().all(|w| w.abs() <= 0.1));
        assert!(dv.trap_holds && dv.trap.a >= -0.04 - 1e-9 && dv.trap.b <= 0.04 + 1e-9);
    }

    #[test]
    fn errors_and_multivalued_flag() {
        let pts = lattice(1.0 / 16.0, 0.5);
        assert!(matches!(
            domain_variation(|x| eval_u(x[0] + 0.2, x[1]), 1, 0.1, &pts),
            Err(Error::TrappingViolated(_))
        ));
        assert!(domain_variation(|x| eval_u(x[0], x[1]), 1, 0.0, &pts).is_err());
        // a bump that stays inside the trap but breaks monotonicity in e_n
        let bumpy = |x: &[f64]| {
            let lo = eval_u(x[0] - 0.1, x[1]);
            let hi = eval_u(x[0] + 0.1, x[1]);
            let mid = eval_u(x[0], x[1]);
            (mid + 0.5 * (hi - lo) * (40.0 * x[0]).sin()).clamp(lo, hi)
        };
        let dv = domain_variation(bumpy, 1, 0.1, &pts).unwrap();
        assert!(dv.multivalued);
    }
}
