//! Convex-analysis substrate: brute-force Legendre–Fenchel conjugation on
//! grids, gradients, and infima over conditioning sets.

use rayon::prelude::*;

use crate::error::{LdpError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::sets::{ConditioningSet, Mode};
use crate::value::Extended;

/// Relative central-difference step, scaled by `1 + |x|` per coordinate.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A grid conjugate together with the points whose supremum was attained at
/// the edge of the primal grid or of the primal effective domain. At those
/// points the true conjugate may be larger (possibly infinite).
#[derive(Debug, Clone)]
pub struct Conjugate {
    pub field: ScalarField,
    pub saturated: Vec<bool>,
}

impl Conjugate {
    pub fn saturated_count(&self) -> usize {
        self.saturated.iter().filter(|&&s| s).count()
    }
}

/// `g(x) = max_λ [λ·x − f(λ)]` over the finite nodes of `primal_grid`,
/// evaluated at every node of `dual_grid`.
pub fn conjugate(f: &ScalarField, primal_grid: &Grid, dual_grid: &Grid) -> Result<Conjugate> {
    f.check_dim(primal_grid.dim())?;
    f.check_dim(dual_grid.dim())?;
    let d = primal_grid.dim();
    let values = f.values_on(primal_grid);

    let mut coords = Vec::new();
    let mut fvals = Vec::new();
    let mut edge = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if let Extended::Finite(v) = *v {
            coords.extend(primal_grid.point(i));
            fvals.push(v);
            let on_face = primal_grid.boundary_layer(i) == 0;
            let by_infinite = (0..d).any(|k| {
                let (lo, hi) = primal_grid.neighbors(i, k);
                [lo, hi]
                    .into_iter()
                    .flatten()
                    .any(|j| !values[j].is_finite())
            });
            edge.push(on_face || by_infinite);
        }
    }
    if fvals.is_empty() {
        return Err(LdpError::EmptyEffectiveDomain);
    }

    let (out, saturated): (Vec<Extended>, Vec<bool>) = (0..dual_grid.len())
        .into_par_iter()
        .map(|j| {
            let x = dual_grid.point(j);
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (m, fv) in fvals.iter().enumerate() {
                let lam = &coords[m * d..(m + 1) * d];
                let dot: f64 = lam.iter().zip(&x).map(|(a, b)| a * b).sum();
                let v = dot - fv;
                if v > best {
                    best = v;
                    arg = m;
                }
            }
            (Extended::Finite(best), edge[arg])
        })
        .unzip();

    Ok(Conjugate {
        field: ScalarField::tabulated(dual_grid.clone(), out)?,
        saturated,
    })
}

/// Analytic gradient when the field carries one, else central differences
/// with per-coordinate step `step · (1 + |x_i|)`.
pub fn gradient(f: &ScalarField, point: &[f64], step: f64) -> Result<Vec<f64>> {
    f.check_dim(point.len())?;
    if !f.in_domain(point) {
        return Err(LdpError::OutsideEffectiveDomain);
    }
    if let Some(g) = f.analytic_gradient(point) {
        return Ok(g);
    }
    let mut q = point.to_vec();
    let mut g = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let h = step * (1.0 + point[i].abs());
        q[i] = point[i] + h;
        let up = f.eval(&q).finite();
        q[i] = point[i] - h;
        let down = f.eval(&q).finite();
        q[i] = point[i];
        match (up, down) {
            (Some(u), Some(d)) => g.push((u - d) / (2.0 * h)),
            _ => return Err(LdpError::OutsideEffectiveDomain),
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(LdpError::OutsideEffectiveDomain);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infimum {
    pub value: Extended,
    pub argmin: Option<Vec<f64>>,
    pub index: Option<usize>,
}

impl Infimum {
    pub(crate) fn over(grid: &Grid, values: &[Extended], mask: &[bool]) -> Self {
        let mut best = Extended::Infinite;
        let mut index = None;
        for (i, (&v, &m)) in values.iter().zip(mask).enumerate() {
            if m && v.is_finite() && v < best {
                best = v;
                index = Some(i);
            }
        }
        Infimum {
            value: best,
            argmin: index.map(|i| grid.point(i)),
            index,
        }
    }
}

/// Minimum of `f` over grid nodes in the requested version of `set`.
/// Ties go to the lexicographically smallest grid index.
pub fn infimum_over(f: &ScalarField, set: &ConditioningSet, grid: &Grid, mode: Mode) -> Result<Infimum> {
    f.check_dim(grid.dim())?;
    let values = f.values_on(grid);
    let mask = set.membership_on_grid(grid, mode);
    Ok(Infimum::over(grid, &values, &mask))
}

/// Sup-norm of `f − f**` over primal nodes at least two layers from the
/// grid boundary.
pub fn biconjugate_defect(f: &ScalarField, primal_grid: &Grid, dual_grid: &Grid) -> Result<f64> {
    let g = conjugate(f, primal_grid, dual_grid)?;
    let gg = conjugate(&g.field, dual_grid, primal_grid)?;
    let fv = f.values_on(primal_grid);
    let ggv = gg.field.table().expect("conjugates are tabulated");
    let mut defect: f64 = 0.0;
    for i in 0..primal_grid.len() {
        if primal_grid.boundary_layer(i) < 2 {
            continue;
        }
        if let (Extended::Finite(a), Extended::Finite(b)) = (fv[i], ggv[i]) {
            defect = defect.max((a - b).abs());
        }
    }
    Ok(defect)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub point: Vec<f64>,
    pub magnitude: f64,
}

/// Interior nodes where some axis second difference falls below
/// `-1e-8 × max(1, max |f|)`.
pub fn convexity_violations(f: &ScalarField, grid: &Grid) -> Vec<Violation> {
    let values = f.values_on(grid);
    let scale = values
        .iter()
        .filter_map(|v| v.finite())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-8 * scale;
    let mut out = Vec::new();
    for i in 0..grid.len() {
        let Some(c) = values[i].finite() else { continue };
        let mut worst: f64 = 0.0;
        for k in 0..grid.dim() {
            if let (Some(lo), Some(hi)) = grid.neighbors(i, k) {
                if let (Some(a), Some(b)) = (values[lo].finite(), values[hi].finite()) {
                    let d2 = a - 2.0 * c + b;
                    if d2 < -tol {
                        worst = worst.max(-d2);
                    }
                }
            }
        }
        if worst > 0.0 {
            out.push(Violation {
                point: grid.point(i),
                magnitude: worst,
            });
        }
    }
    out
}

/// `max [λ·x − primal(λ) − dual(x)]` over all finite grid pairs, clipped
/// below at 0.
pub fn fenchel_young_defect(
    primal: &ScalarField,
    dual: &ScalarField,
    primal_grid: &Grid,
    dual_grid: &Grid,
) -> Result<f64> {
    primal.check_dim(primal_grid.dim())?;
    dual.check_dim(dual_grid.dim())?;
    primal.check_dim(dual_grid.dim())?;
    let pv = primal.values_on(primal_grid);
    let dv = dual.values_on(dual_grid);
    let lam: Vec<(Vec<f64>, f64)> = pv
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.finite().map(|v| (primal_grid.point(i), v)))
        .collect();
    let defect = (0..dual_grid.len())
        .into_par_iter()
        .filter_map(|j| dv[j].finite().map(|d| (j, d)))
        .map(|(j, d)| {
            let x = dual_grid.point(j);
            lam.iter()
                .map(|(l, p)| l.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - p - d)
                .fold(0.0_f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(defect)
}

/// A primal field, its grid conjugate and the Fenchel–Young defect between
/// them.
#[derive(Debug, Clone)]
pub struct ConjugatePair {
    pub primal: ScalarField,
    pub dual: ScalarField,
    pub dual_grid: Grid,
    pub defect: f64,
}

impl ConjugatePair {
    pub fn from_conjugation(f: &ScalarField, primal_grid: &Grid, dual_grid: &Grid) -> Result<Self> {
        let dual = conjugate(f, primal_grid, dual_grid)?.field;
        let defect = fenchel_young_defect(f, &dual, primal_grid, dual_grid)?;
        Ok(Self {
            primal: f.clone(),
            dual,
            dual_grid: dual_grid.clone(),
            defect,
        })
    }
}

/// Lipschitz bound with respect to the max-norm: the sum over axes of the
/// largest difference quotient `|f(p') − f(p)| / h_k` between finite
/// neighbours with at least one node inside `mask`.
pub fn lipschitz_estimate(values: &[Extended], grid: &Grid, mask: &[bool]) -> f64 {
    let mut per_axis = [0.0_f64; crate::grid::MAX_DIM];
    for i in 0..grid.len() {
        let Some(a) = values[i].finite() else { continue };
        for (k, best) in per_axis.iter_mut().enumerate().take(grid.dim()) {
            if let (_, Some(j)) = grid.neighbors(i, k) {
                if !(mask[i] || mask[j]) {
                    continue;
                }
                if let Some(b) = values[j].finite() {
                    *best = best.max((b - a).abs() / grid.step(k));
                }
            }
        }
    }
    per_axis.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{GridMask, Region};

    fn quad() -> ScalarField {
        ScalarField::closed_form(1, |p| Extended::Finite(0.5 * p[0] * p[0])).with_gradient(|p| vec![p[0]])
    }

    fn sup_gap(a: &ScalarField, b: impl Fn(f64) -> f64, grid: &Grid) -> f64 {
        grid.points()
            .map(|p| (a.eval(&p).finite().unwrap() - b(p[0])).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn quadratic_is_self_dual() {
        let pg = Grid::line(-5.0, 5.0, 512).unwrap();
        let dg = Grid::line(-3.0, 3.0, 513).unwrap();
        let g = conjugate(&quad(), &pg, &dg).unwrap();
        assert!(sup_gap(&g.field, |x| 0.5 * x * x, &dg) < 1e-3);
        assert_eq!(g.saturated_count(), 0);
    }

    #[test]
    fn shifted_gaussian_matches_fine_brute_force() {
        for mu in [0.0, 1.0] {
            let f = ScalarField::closed_form(1, move |p| Extended::Finite(mu * p[0] + 0.5 * p[0] * p[0]));
            let pg = Grid::line(-5.0, 5.0, 512).unwrap();
            let dg = Grid::line(-3.0, 3.0, 101).unwrap();
            let g = conjugate(&f, &pg, &dg).unwrap();
            // independent oracle: brute-force sup on a 10x finer lattice
            let fine: Vec<f64> = (0..5111).map(|i| -5.0 + 10.0 * i as f64 / 5110.0).collect();
            for x in dg.points() {
                let oracle = fine
                    .iter()
                    .map(|l| l * x[0] - mu * l - 0.5 * l * l)
                    .fold(f64::NEG_INFINITY, f64::max);
                let v = g.field.eval(&x).finite().unwrap();
                assert!((v - oracle).abs() < 1e-3, "x={x:?}");
                assert!((v - 0.5 * (x[0] - mu).powi(2)).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn bernoulli_free_energy_conjugates_to_kl() {
        let p = 0.3_f64;
        let f = ScalarField::closed_form(1, move |l| Extended::Finite((p * l[0].exp_m1()).ln_1p()));
        let pg = Grid::line(-5.0, 5.0, 512).unwrap();
        let dg = Grid::line(0.0, 1.0, 3).unwrap();
        let g = conjugate(&f, &pg, &dg).unwrap();
        let kl = 0.5 * (0.5 / p).ln() + 0.5 * (0.5 / (1.0 - p)).ln();
        let v = g.field.eval(&[0.5]).finite().unwrap();
        assert!((kl - 0.08717).abs() < 1e-5);
        assert!((v - kl).abs() < 1e-4, "{v} vs {kl}");
    }

    #[test]
    fn conjugate_rejects_empty_domain_and_bad_dims() {
        let f = ScalarField::closed_form(1, |_| Extended::Infinite);
        let g = Grid::line(-1.0, 1.0, 8).unwrap();
        assert_eq!(conjugate(&f, &g, &g).unwrap_err(), LdpError::EmptyEffectiveDomain);
        let g2 = Grid::from_bounds(&[0.0, 0.0], &[1.0, 1.0], &[3, 3]).unwrap();
        assert!(matches!(
            conjugate(&quad(), &g2, &g2),
            Err(LdpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn saturation_flags_grid_edge_maximisers() {
        let pg = Grid::line(-1.0, 1.0, 101).unwrap();
        let dg = Grid::line(-3.0, 3.0, 7).unwrap();
        let g = conjugate(&quad(), &pg, &dg).unwrap();
        assert_eq!(g.saturated, [true, true, true, false, true, true, true]);
    }

    #[test]
    fn gradients() {
        assert!((gradient(&quad(), &[1.0], DEFAULT_FD_STEP).unwrap()[0] - 1.0).abs() < 1e-8);
        let numeric = ScalarField::closed_form(1, |p| Extended::Finite(0.5 * p[0] * p[0]));
        assert!((gradient(&numeric, &[1.0], DEFAULT_FD_STEP).unwrap()[0] - 1.0).abs() < 1e-8);
        let pair = ScalarField::closed_form(2, |l| {
            let s = 1.0 - 2.0 * l[1];
            if s <= 0.0 {
                Extended::Infinite
            } else {
                Extended::Finite(-0.5 * s.ln() + l[0] * l[0] / (2.0 * s))
            }
        });
        let g = gradient(&pair, &[1.0, 0.0], DEFAULT_FD_STEP).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8 && (g[1] - 2.0).abs() < 1e-8, "{g:?}");
        let c = ScalarField::closed_form(3, |_| Extended::Finite(4.0));
        assert_eq!(gradient(&c, &[0.1, 0.2, 0.3], DEFAULT_FD_STEP).unwrap(), vec![0.0; 3]);
        assert_eq!(
            gradient(&pair, &[0.0, 0.6], DEFAULT_FD_STEP).unwrap_err(),
            LdpError::OutsideEffectiveDomain
        );
    }

    #[test]
    fn infimum_interior_vs_closure() {
        let g = Grid::line(-1.0, 3.0, 401).unwrap();
        let b = ConditioningSet::new(Region::HalfSpace {
            normal: vec![1.0],
            anchor: vec![1.0],
        })
        .unwrap();
        let c = infimum_over(&quad(), &b, &g, Mode::Closure).unwrap();
        assert_eq!(c.value, Extended::Finite(0.5));
        assert_eq!(c.argmin, Some(vec![1.0]));
        let i = infimum_over(&quad(), &b, &g, Mode::Interior).unwrap();
        let gap = i.value.finite().unwrap() - 0.5;
        assert!(gap > 0.0 && gap <= 1.01 * g.step(0) * 1.01);
        assert!(i.argmin.unwrap()[0] > 1.0);

        let whole = ConditioningSet::whole();
        assert_eq!(infimum_over(&quad(), &whole, &g, Mode::Raw).unwrap().value, Extended::Finite(0.0));
    }

    #[test]
    fn infimum_over_empty_interior_is_infinite() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let mut members = vec![false; 11];
        members[4] = true;
        let single = ConditioningSet::mask(GridMask::new(g.clone(), members).unwrap());
        let r = infimum_over(&quad(), &single, &g, Mode::Interior).unwrap();
        assert_eq!(r.value, Extended::Infinite);
        assert_eq!(r.argmin, None);
    }

    #[test]
    fn ties_break_to_smallest_index() {
        let g = Grid::line(-1.0, 1.0, 5).unwrap();
        let f = ScalarField::closed_form(1, |p| Extended::Finite((p[0] * p[0] - 0.25).abs()));
        let r = infimum_over(&f, &ConditioningSet::whole(), &g, Mode::Raw).unwrap();
        assert_eq!(r.index, Some(1));
    }

    #[test]
    fn biconjugate_defects() {
        let pg = Grid::line(-2.0, 2.0, 512).unwrap();
        let dg = Grid::line(-3.0, 3.0, 513).unwrap();
        assert!(biconjugate_defect(&quad(), &pg, &dg).unwrap() <= 1e-3);
        let lin = ScalarField::closed_form(1, |p| Extended::Finite(0.7 * p[0] - 0.2));
        // the kink of the linear function's conjugate sits on a dual node
        let dg_lin = Grid::line(-3.0, 3.0, 61).unwrap();
        assert!(biconjugate_defect(&lin, &pg, &dg_lin).unwrap() <= 1e-6);

        // quadratic with a concave bump of height 0.3 on [-0.5, 0.5]
        let bump = |x: f64| if x.abs() < 0.5 { 0.3 * (1.0 - 4.0 * x * x) } else { 0.0 };
        let f = ScalarField::closed_form(1, move |p| Extended::Finite(0.5 * p[0] * p[0] + bump(p[0])));
        let defect = biconjugate_defect(&f, &pg, &dg).unwrap();
        // oracle: lower convex envelope of the tabulated values by brute force
        let xs: Vec<f64> = pg.points().map(|p| p[0]).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 0.5 * x * x + bump(x)).collect();
        let mut env_gap: f64 = 0.0;
        for k in 2..xs.len() - 2 {
            let mut env = ys[k];
            for i in 0..k {
                for j in k + 1..xs.len() {
                    let t = (xs[k] - xs[i]) / (xs[j] - xs[i]);
                    env = env.min((1.0 - t) * ys[i] + t * ys[j]);
                }
            }
            env_gap = env_gap.max(ys[k] - env);
        }
        assert!((defect - env_gap).abs() < 1e-3, "{defect} vs {env_gap}");
        // hull is flat at 0.125 between ±0.5, so the gap at 0 is 0.3 − 0.125
        assert!((defect - 0.175).abs() < 5e-3, "{defect}");
    }

    #[test]
    fn convexity_checks() {
        let g = Grid::line(-2.0, 2.0, 101).unwrap();
        assert!(convexity_violations(&quad(), &g).is_empty());
        let neg = ScalarField::closed_form(1, |p| Extended::Finite(-p[0] * p[0]));
        assert_eq!(convexity_violations(&neg, &g).len(), 99);
        let p = 0.3;
        let kl = ScalarField::closed_form(1, move |x| {
            let x = x[0];
            Extended::Finite(x * (x / p).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - p)).ln())
        });
        let open_unit = Grid::line(1e-3, 1.0 - 1e-3, 512).unwrap();
        assert!(convexity_violations(&kl, &open_unit).is_empty());
    }

    #[test]
    fn conjugate_pair_obeys_fenchel_young() {
        let pg = Grid::line(-4.0, 4.0, 257).unwrap();
        let dg = Grid::line(-2.0, 2.0, 129).unwrap();
        let pair = ConjugatePair::from_conjugation(&quad(), &pg, &dg).unwrap();
        assert!(pair.defect <= 1e-12);
        let closed = ScalarField::closed_form(1, |x| Extended::Finite(0.5 * x[0] * x[0]));
        assert!(fenchel_young_defect(&quad(), &closed, &pg, &dg).unwrap() <= 1e-9);
        let too_small = ScalarField::closed_form(1, |x| Extended::Finite(0.4 * x[0] * x[0]));
        assert!(fenchel_young_defect(&quad(), &too_small, &pg, &dg).unwrap() > 0.1);
    }
}
