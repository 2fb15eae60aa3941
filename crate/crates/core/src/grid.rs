//! Uniform tensor-product grids on boxes in R^k, k <= 3.
//!
//! Points are flattened row-major (last axis fastest), so flat order is
//! lexicographic order on multi-indices.

use serde::{Deserialize, Serialize};

use crate::error::{LdpError, Result};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(LdpError::InvalidGrid("axis bounds must be finite".into()));
        }
        if lower >= upper {
            return Err(LdpError::InvalidGrid(format!(
                "lower bound {lower} must be below upper bound {upper}"
            )));
        }
        if points < 2 {
            return Err(LdpError::InvalidGrid("an axis needs at least 2 points".into()));
        }
        Ok(Self { lower, upper, points })
    }

    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.points - 1) as f64
    }

    /// Multiply before dividing so that nodes at representable rationals
    /// of the span come out exact.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.upper;
        }
        self.lower + (self.upper - self.lower) * i as f64 / (self.points - 1) as f64
    }

    /// Index of the node equal to `x` (up to 1e-9 of a step).
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.lower) / self.step();
        let i = t.round();
        if i < 0.0 || i > (self.points - 1) as f64 || (t - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    /// Index of the nearest node, clamped to the axis.
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x - self.lower) / self.step()).round();
        t.clamp(0.0, (self.points - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(LdpError::InvalidGrid(format!(
                "grid dimension must be in 1..={MAX_DIM}, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            Axis::new(a.lower, a.upper, a.points)?;
        }
        Ok(Self { axes })
    }

    /// One-dimensional grid.
    pub fn line(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::new(vec![Axis::new(lower, upper, points)?])
    }

    pub fn from_bounds(lower: &[f64], upper: &[f64], points: &[usize]) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != points.len() {
            return Err(LdpError::InvalidGrid(
                "bounds and point counts must have equal length".into(),
            ));
        }
        let axes = lower
            .iter()
            .zip(upper)
            .zip(points)
            .map(|((&l, &u), &n)| Axis::new(l, u, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self, k: usize) -> f64 {
        self.axes[k].step()
    }

    pub fn max_step(&self) -> f64 {
        self.axes.iter().map(Axis::step).fold(0.0, f64::max)
    }

    fn stride(&self, k: usize) -> usize {
        self.axes[k + 1..].iter().map(|a| a.points).product()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rem = flat;
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].points;
            idx[k] = rem % n;
            rem /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(flat, &mut p);
        p
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let idx = self.multi_index(flat);
        for (k, a) in self.axes.iter().enumerate() {
            out[k] = a.coord(idx[k]);
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Flat indices of the lower and upper neighbours along axis `k`.
    pub fn neighbors(&self, flat: usize, k: usize) -> (Option<usize>, Option<usize>) {
        let i = self.multi_index(flat)[k];
        let s = self.stride(k);
        let lo = (i > 0).then(|| flat - s);
        let hi = (i + 1 < self.axes[k].points).then(|| flat + s);
        (lo, hi)
    }

    /// Nodes at max-norm index distance one (the `3^d − 1` surrounding nodes
    /// that exist).
    pub fn stencil(&self, flat: usize) -> Vec<usize> {
        let centre = self.multi_index(flat);
        let d = self.dim();
        let mut out = Vec::with_capacity(3usize.pow(d as u32) - 1);
        for code in 0..3usize.pow(d as u32) {
            let mut idx = [0usize; MAX_DIM];
            let mut c = code;
            let mut valid = true;
            for k in 0..d {
                let off = (c % 3) as isize - 1;
                c /= 3;
                let i = centre[k] as isize + off;
                if i < 0 || i >= self.axes[k].points as isize {
                    valid = false;
                    break;
                }
                idx[k] = i as usize;
            }
            let j = self.flat_index(&idx[..d]);
            if valid && j != flat {
                out.push(j);
            }
        }
        out
    }

    /// Number of grid layers between the point and the nearest face.
    pub fn boundary_layer(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| idx[k].min(a.points - 1 - idx[k]))
            .min()
            .unwrap_or(0)
    }

    /// Flat index of the node equal to `point`, if any.
    pub fn node_of(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim() {
            return None;
        }
        let mut idx = [0; MAX_DIM];
        for (k, a) in self.axes.iter().enumerate() {
            idx[k] = a.node_of(point[k])?;
        }
        Some(self.flat_index(&idx[..self.dim()]))
    }

    pub fn nearest(&self, point: &[f64]) -> usize {
        let mut idx = [0; MAX_DIM];
        for (k, a) in self.axes.iter().enumerate() {
            idx[k] = a.nearest(point[k]);
        }
        self.flat_index(&idx[..self.dim()])
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && self
                .axes
                .iter()
                .zip(point)
                .all(|(a, &x)| x >= a.lower && x <= a.upper)
    }
}
