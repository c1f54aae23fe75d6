//! Sampled vector fields and plate positivity masks.

use crate::error::{Error, Result};
use crate::geometry::{Grid, MAX_DIM};

/// An `m`-component field sampled on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField { grid: grid.clone(), comps: vec![vec![0.0; grid.node_count()]; grid.m()] }
    }

    pub fn from_components(grid: &Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != grid.m() || comps.iter().any(|c| c.len() != grid.node_count()) {
            return Err(Error::ShapeMismatch(format!(
                "expected {} components of {} nodes",
                grid.m(),
                grid.node_count()
            )));
        }
        Ok(VectorField { grid: grid.clone(), comps })
    }

    /// Samples `f(x, out)` at every node.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut field = Self::zeros(grid);
        let mut buf = vec![0.0; grid.m()];
        for idx in 0..grid.node_count() {
            let x = grid.node_coord(idx);
            f(&x[..=grid.n()], &mut buf);
            for (c, v) in field.comps.iter_mut().zip(&buf) {
                c[idx] = *v;
            }
        }
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.comps[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.comps[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn value(&self, idx: usize) -> Vec<f64> {
        self.comps.iter().map(|c| c[idx]).collect()
    }

    pub fn norm_at(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx] * c[idx]).sum::<f64>().sqrt()
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.grid.node_count()).map(|i| self.norm_at(i)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        VectorField {
            grid: self.grid.clone(),
            comps: self.comps.iter().map(|c| c.iter().map(|v| v * factor).collect()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.node_count()).map(|i| self.norm_at(i)).fold(0.0, f64::max)
    }

    /// Multilinear interpolation of every component at `x`.
    pub fn interpolate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.grid.contains(x) {
            return Err(Error::OutOfBox { point: x[..=self.grid.n()].to_vec() });
        }
        Ok(self.comps.iter().map(|c| self.grid.interpolate_unchecked(c, x)).collect())
    }

    pub fn interpolate_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = self.grid.interpolate_unchecked(c, x);
        }
    }

    pub fn interpolate_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.interpolate(x)?.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn node_coord(&self, idx: usize) -> [f64; MAX_DIM] {
        self.grid.node_coord(idx)
    }
}

/// Plate positivity indicator, one flag per plate node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlateMask {
    bits: Vec<bool>,
}

impl PlateMask {
    pub fn empty(grid: &Grid) -> Self {
        PlateMask { bits: vec![false; grid.plate_count()] }
    }

    pub fn full(grid: &Grid) -> Self {
        PlateMask { bits: vec![true; grid.plate_count()] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        PlateMask { bits }
    }

    /// Mask of plate nodes whose plate coordinates satisfy `pred`.
    pub fn from_predicate(grid: &Grid, pred: impl Fn(&[f64]) -> bool) -> Self {
        PlateMask {
            bits: (0..grid.plate_count()).map(|p| pred(&grid.plate_coord(p)[..grid.n()])).collect(),
        }
    }

    /// `|G(x, 0)| > tau` at every plate node.
    pub fn from_threshold(field: &VectorField, tau: f64) -> Self {
        let grid = field.grid();
        PlateMask { bits: (0..grid.plate_count()).map(|p| field.norm_at(grid.plate_node(p)) > tau).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, p: usize) -> bool {
        self.bits[p]
    }

    pub fn set(&mut self, p: usize, value: bool) {
        self.bits[p] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn all_set(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn none_set(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }
}
