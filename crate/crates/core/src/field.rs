//! Scalar fields on R^k with values in `(-inf, +inf]`.
//!
//! A field is either a closed-form map (optionally carrying its analytic
//! gradient) or a table of values on a [`Grid`]. Every field carries an
//! effective-domain predicate; evaluation outside it yields
//! [`Extended::Infinite`].

use std::fmt;
use std::sync::Arc;

use crate::error::{LdpError, Result};
use crate::grid::{Grid, MAX_DIM};
use crate::value::Extended;

pub type EvalFn = dyn Fn(&[f64]) -> Extended + Send + Sync;
pub type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
pub type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;

#[derive(Clone)]
pub enum Representation {
    ClosedForm {
        eval: Arc<EvalFn>,
        gradient: Option<Arc<GradFn>>,
    },
    Tabulated {
        grid: Grid,
        values: Arc<[Extended]>,
    },
}

#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    repr: Representation,
    domain: Option<Arc<DomainFn>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Representation::ClosedForm { gradient, .. } => {
                if gradient.is_some() {
                    "closed-form+gradient"
                } else {
                    "closed-form"
                }
            }
            Representation::Tabulated { .. } => "tabulated",
        };
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .finish()
    }
}

impl ScalarField {
    /// Closed-form field. Without an explicit domain predicate the
    /// effective domain is wherever `eval` is finite.
    pub fn closed_form<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Extended + Send + Sync + 'static,
    {
        Self {
            dim,
            repr: Representation::ClosedForm {
                eval: Arc::new(eval),
                gradient: None,
            },
            domain: None,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::closed_form(dim, move |_| Extended::Finite(c)).with_gradient(move |p| vec![0.0; p.len()])
    }

    /// Attaches an analytic gradient. No-op on tabulated fields.
    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if let Representation::ClosedForm { gradient, .. } = &mut self.repr {
            *gradient = Some(Arc::new(grad));
        }
        self
    }

    pub fn with_domain<D>(mut self, domain: D) -> Self
    where
        D: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.domain = Some(Arc::new(domain));
        self
    }

    /// Tabulated field; `values` follows the grid's flat order.
    pub fn tabulated(grid: Grid, values: Vec<Extended>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LdpError::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            dim: grid.dim(),
            repr: Representation::Tabulated {
                grid,
                values: values.into(),
            },
            domain: None,
        })
    }

    /// Samples `self` on `grid`.
    pub fn tabulate(&self, grid: &Grid) -> Result<Self> {
        self.check_dim(grid.dim())?;
        Self::tabulated(grid.clone(), self.values_on(grid))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn has_analytic_gradient(&self) -> bool {
        matches!(
            self.repr,
            Representation::ClosedForm {
                gradient: Some(_),
                ..
            }
        )
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.repr {
            Representation::Tabulated { grid, .. } => Some(grid),
            Representation::ClosedForm { .. } => None,
        }
    }

    pub fn table(&self) -> Option<&[Extended]> {
        match &self.repr {
            Representation::Tabulated { values, .. } => Some(values),
            Representation::ClosedForm { .. } => None,
        }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(LdpError::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    pub fn in_domain(&self, point: &[f64]) -> bool {
        self.eval(point).is_finite()
    }

    pub fn eval(&self, point: &[f64]) -> Extended {
        debug_assert_eq!(point.len(), self.dim);
        if let Some(d) = &self.domain {
            if !d(point) {
                return Extended::Infinite;
            }
        }
        match &self.repr {
            Representation::ClosedForm { eval, .. } => eval(point),
            Representation::Tabulated { grid, values } => interpolate(grid, values, point),
        }
    }

    pub fn analytic_gradient(&self, point: &[f64]) -> Option<Vec<f64>> {
        match &self.repr {
            Representation::ClosedForm {
                gradient: Some(g), ..
            } => Some(g(point)),
            _ => None,
        }
    }

    /// Values at every node of `grid`, reusing the table when `grid` is the
    /// field's own grid.
    pub fn values_on(&self, grid: &Grid) -> Vec<Extended> {
        if let Representation::Tabulated { grid: own, values } = &self.repr {
            if own == grid && self.domain.is_none() {
                return values.to_vec();
            }
        }
        let mut buf = vec![0.0; grid.dim()];
        (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut buf);
                self.eval(&buf)
            })
            .collect()
    }
}

/// Multilinear interpolation; any infinite corner with positive weight makes
/// the result infinite, and points off the grid are infinite.
fn interpolate(grid: &Grid, values: &[Extended], point: &[f64]) -> Extended {
    if let Some(i) = grid.node_of(point) {
        return values[i];
    }
    if !grid.contains(point) {
        return Extended::Infinite;
    }
    let d = grid.dim();
    let mut base = [0usize; MAX_DIM];
    let mut frac = [0.0; MAX_DIM];
    for k in 0..d {
        let a = grid.axis(k);
        let t = ((point[k] - a.lower) / a.step()).clamp(0.0, (a.points - 1) as f64);
        let i = (t.floor() as usize).min(a.points - 2);
        base[k] = i;
        frac[k] = t - i as f64;
    }
    let mut acc = 0.0;
    let mut idx = [0usize; MAX_DIM];
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        for k in 0..d {
            let up = (corner >> k) & 1 == 1;
            idx[k] = base[k] + up as usize;
            w *= if up { frac[k] } else { 1.0 - frac[k] };
        }
        if w == 0.0 {
            continue;
        }
        match values[grid.flat_index(&idx[..d])] {
            Extended::Finite(v) => acc += w * v,
            Extended::Infinite => return Extended::Infinite,
        }
    }
    Extended::Finite(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_length_is_checked() {
        let g = Grid::line(0.0, 1.0, 5).unwrap();
        assert!(ScalarField::tabulated(g, vec![Extended::ZERO; 4]).is_err());
    }

    #[test]
    fn domain_predicate_masks_closed_form() {
        let f = ScalarField::closed_form(1, |p| Extended::Finite(p[0]))
            .with_domain(|p| p[0] >= 0.0);
        assert_eq!(f.eval(&[-1.0]), Extended::Infinite);
        assert_eq!(f.eval(&[2.0]), Extended::Finite(2.0));
        let g = Grid::line(-1.0, 1.0, 3).unwrap();
        let t = f.tabulate(&g).unwrap();
        assert_eq!(
            t.table().unwrap(),
            &[Extended::Infinite, Extended::Finite(0.0), Extended::Finite(1.0)]
        );
    }

    #[test]
    fn bilinear_interpolation_reproduces_affine_maps() {
        let g = Grid::from_bounds(&[0.0, -1.0], &[2.0, 1.0], &[5, 9]).unwrap();
        let f = ScalarField::closed_form(2, |p| Extended::Finite(3.0 * p[0] - 2.0 * p[1] + 1.0));
        let t = f.tabulate(&g).unwrap();
        for p in [[0.3, 0.1], [1.77, -0.93], [2.0, 1.0]] {
            let v = t.eval(&p).finite().unwrap();
            assert!((v - (3.0 * p[0] - 2.0 * p[1] + 1.0)).abs() < 1e-12);
        }
        assert_eq!(t.eval(&[2.5, 0.0]), Extended::Infinite);
    }

    #[test]
    fn infinite_corner_poisons_interpolation() {
        let g = Grid::line(0.0, 1.0, 3).unwrap();
        let t = ScalarField::tabulated(
            g,
            vec![Extended::Finite(0.0), Extended::Finite(1.0), Extended::Infinite],
        )
        .unwrap();
        assert_eq!(t.eval(&[0.25]), Extended::Finite(0.5));
        assert_eq!(t.eval(&[0.75]), Extended::Infinite);
    }
}
