//! Conditioning constructions: the tilt equation `∇₁Ψ(λ₀, 0) = x₀`, the
//! half-space (or thickened shell) `B` through `x₀`, `inf I(B)`, the
//! conditional rate `I_B`, the conditional marginal rate of `Y` and the
//! conditional free energy.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::convex::{conjugate, gradient, infimum_over, lipschitz_estimate, Infimum, DEFAULT_FD_STEP};
use crate::error::{LdpError, Result};
use crate::field::ScalarField;
use crate::grid::{Axis, Grid};
use crate::models::JointModel;
use crate::sets::{ConditioningSet, Interval, Mode, Region};
use crate::value::Extended;

pub const DEFAULT_TILT_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 100;

/// Solution of the tilt equation at `x₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltSolution {
    pub x0: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub y0: Vec<f64>,
    /// `inf I(B) = λ₀·x₀ − Ψ(λ₀, 0)`.
    pub min_rate: f64,
    pub residual: f64,
    pub iterations: usize,
    /// A decreasing gradient was observed while solving.
    pub non_monotone: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

struct GradientEquation<'a> {
    psi: &'a ScalarField,
    target: &'a [f64],
    tail: &'a [f64],
}

impl GradientEquation<'_> {
    fn full(&self, lead: &[f64]) -> Vec<f64> {
        let mut p = lead.to_vec();
        p.extend_from_slice(self.tail);
        p
    }

    /// `∇₁Ψ(λ, tail) − target`, or `None` outside the domain.
    fn residual(&self, lead: &[f64]) -> Option<Vec<f64>> {
        let g = gradient(self.psi, &self.full(lead), DEFAULT_FD_STEP).ok()?;
        Some(g[..lead.len()].iter().zip(self.target).map(|(a, b)| a - b).collect())
    }

    fn residual_1d(&self, l: f64) -> Option<f64> {
        self.residual(&[l]).map(|r| r[0])
    }

    fn slope_1d(&self, l: f64) -> Option<f64> {
        let h = 1e-6 * (1.0 + l.abs());
        Some((self.residual_1d(l + h)? - self.residual_1d(l - h)?) / (2.0 * h))
    }
}

struct Root {
    lead: Vec<f64>,
    residual: f64,
    iterations: usize,
    non_monotone: bool,
}

fn stall(best_residual: f64, iterations: usize) -> LdpError {
    LdpError::SolverStall {
        best_residual,
        iterations,
    }
}

fn solve_1d(eq: &GradientEquation<'_>, tol: f64) -> Result<Root> {
    let g0 = eq.residual_1d(0.0).ok_or(LdpError::OutsideEffectiveDomain)?;
    let mut non_monotone = false;
    if g0.abs() <= tol {
        return Ok(Root {
            lead: vec![0.0],
            residual: g0.abs(),
            iterations: 0,
            non_monotone,
        });
    }
    // grow a bracket geometrically from 0 in the direction of the root
    let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
    let (mut inner, mut g_inner) = (0.0, g0);
    let mut step = 1.0;
    let mut outer = None;
    let mut iterations = 0;
    for _ in 0..80 {
        iterations += 1;
        let mut cand = dir * step;
        let mut g = eq.residual_1d(cand);
        let mut shrink = 0;
        while g.is_none() && shrink < 60 {
            cand = 0.5 * (inner + cand);
            g = eq.residual_1d(cand);
            shrink += 1;
        }
        let Some(g) = g else { break };
        if g.signum() != g0.signum() || g == 0.0 {
            outer = Some((cand, g));
            break;
        }
        if g.abs() > g_inner.abs() {
            non_monotone = true;
        }
        inner = cand;
        g_inner = g;
        step = 2.0 * cand.abs().max(step);
    }
    let Some((outer, g_outer)) = outer else {
        return Err(stall(g_inner.abs(), iterations));
    };

    let (mut lo, mut hi) = if inner < outer { (inner, outer) } else { (outer, inner) };
    let (mut l, mut g) = if g_inner.abs() < g_outer.abs() {
        (inner, g_inner)
    } else {
        (outer, g_outer)
    };
    let sign_lo = if lo == inner { g_inner.signum() } else { g_outer.signum() };

    while g.abs() > tol && iterations < MAX_NEWTON_ITERATIONS {
        iterations += 1;
        let slope = eq.slope_1d(l).unwrap_or(f64::NAN);
        if slope < 0.0 {
            non_monotone = true;
        }
        let mut next = None;
        if slope > 0.0 {
            let delta = -g / slope;
            let mut t = 1.0;
            for _ in 0..30 {
                let cand = l + t * delta;
                if cand > lo && cand < hi {
                    if let Some(gc) = eq.residual_1d(cand) {
                        if gc.abs() < g.abs() {
                            next = Some((cand, gc));
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
        }
        let (cand, gc) = match next {
            Some(v) => v,
            None => {
                let mid = 0.5 * (lo + hi);
                match eq.residual_1d(mid) {
                    Some(gm) => (mid, gm),
                    None => return Err(stall(g.abs(), iterations)),
                }
            }
        };
        if gc.signum() == sign_lo {
            lo = cand;
        } else {
            hi = cand;
        }
        if gc.abs() <= g.abs() || next.is_none() {
            l = cand;
            g = gc;
        }
        if hi - lo <= f64::EPSILON * (1.0 + l.abs()) {
            break;
        }
    }
    if g.abs() > tol {
        return Err(stall(g.abs(), iterations));
    }
    // a flat gradient means x₀ sits on the edge of the gradient range
    if eq.slope_1d(l).is_none_or(|s| s.abs() < 1e-14) {
        return Err(stall(g.abs(), iterations));
    }
    Ok(Root {
        lead: vec![l],
        residual: g.abs(),
        iterations,
        non_monotone,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn solve_nd(eq: &GradientEquation<'_>, tol: f64) -> Result<Root> {
    let d = eq.target.len();
    let mut l = vec![0.0; d];
    let mut r = eq.residual(&l).ok_or(LdpError::OutsideEffectiveDomain)?;
    let mut iterations = 0;
    while norm(&r) > tol && iterations < MAX_NEWTON_ITERATIONS {
        iterations += 1;
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let h = 1e-6 * (1.0 + l[j].abs());
            let mut up = l.clone();
            up[j] += h;
            let mut dn = l.clone();
            dn[j] -= h;
            let (ru, rd) = match (eq.residual(&up), eq.residual(&dn)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(stall(norm(&r), iterations)),
            };
            for i in 0..d {
                jac[(i, j)] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        let delta = jac
            .lu()
            .solve(&(-DVector::from_column_slice(&r)))
            .ok_or_else(|| stall(norm(&r), iterations))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = l.iter().zip(delta.iter()).map(|(a, b)| a + t * b).collect();
            if let Some(rc) = eq.residual(&cand) {
                if norm(&rc) < norm(&r) {
                    l = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = norm(&r);
    if residual > tol {
        return Err(stall(residual, iterations));
    }
    Ok(Root {
        lead: l,
        residual,
        iterations,
        non_monotone: false,
    })
}

fn solve_gradient_equation(psi: &ScalarField, target: &[f64], tail: &[f64], tol: f64) -> Result<Root> {
    if target.is_empty() || target.len() + tail.len() != psi.dim() {
        return Err(LdpError::DimensionMismatch {
            expected: psi.dim(),
            found: target.len() + tail.len(),
        });
    }
    let eq = GradientEquation { psi, target, tail };
    if target.len() == 1 {
        solve_1d(&eq, tol)
    } else {
        solve_nd(&eq, tol)
    }
}

/// Solves `∇₁Ψ(λ₀, 0) = x₀` by damped Newton (bracketed by bisection in one
/// dimension) starting from `λ = 0`.
pub fn solve_tilt(psi: &ScalarField, x0: &[f64], tol: f64) -> Result<TiltSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(LdpError::InvalidParameter("tilt tolerance must be positive".into()));
    }
    let d = x0.len();
    let tail = vec![0.0; psi.dim().saturating_sub(d)];
    let root = solve_gradient_equation(psi, x0, &tail, tol)?;
    let mut full = root.lead.clone();
    full.extend_from_slice(&tail);
    let g = gradient(psi, &full, DEFAULT_FD_STEP)?;
    let psi_at = psi.eval(&full).finite().ok_or(LdpError::OutsideEffectiveDomain)?;
    let min_rate = (dot(&root.lead, x0) - psi_at).max(0.0);
    Ok(TiltSolution {
        x0: x0.to_vec(),
        lambda0: root.lead,
        y0: g[d..].to_vec(),
        min_rate,
        residual: root.residual,
        iterations: root.iterations,
        non_monotone: root.non_monotone,
    })
}

/// `B = {λ₀·(x − x₀) ≥ 0}`, or the shell `0 ≤ λ₀·(x − x₀) < δ`.
pub fn build_conditioning_set(lambda0: &[f64], x0: &[f64], delta: Option<f64>) -> Result<ConditioningSet> {
    let region = match delta {
        None => Region::HalfSpace {
            normal: lambda0.to_vec(),
            anchor: x0.to_vec(),
        },
        Some(d) if d > 0.0 => Region::Shell {
            normal: lambda0.to_vec(),
            anchor: x0.to_vec(),
            thickness: d,
        },
        Some(d) => {
            return Err(LdpError::InvalidParameter(format!(
                "shell thickness must be positive, got {d}"
            )))
        }
    };
    ConditioningSet::new(region)
}

/// Grid infimum of a rate over `B`, optionally cross-checked against the
/// analytic value `λ₀·x₀ − Ψ(λ₀, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetInfimum {
    pub value: Extended,
    pub argmin: Option<Vec<f64>>,
    pub analytic: Option<f64>,
    pub tolerance: f64,
    /// `None` without an analytic value; `Some(false)` flags disagreement.
    pub agrees: Option<bool>,
}

fn local_lipschitz(values: &[Extended], grid: &Grid, centre: usize, radius: usize) -> f64 {
    let ci = grid.multi_index(centre);
    let mask: Vec<bool> = (0..grid.len())
        .map(|i| {
            let mi = grid.multi_index(i);
            (0..grid.dim()).all(|k| mi[k].abs_diff(ci[k]) <= radius)
        })
        .collect();
    lipschitz_estimate(values, grid, &mask)
}

pub fn inf_rate_on_set(
    rate: &ScalarField,
    set: &ConditioningSet,
    grid: &Grid,
    tilt: Option<&TiltSolution>,
) -> Result<SetInfimum> {
    let Infimum { value, argmin, index } = infimum_over(rate, set, grid, Mode::Raw)?;
    let Some(index) = index else {
        return Err(LdpError::EmptyConditioningSet);
    };
    let values = rate.values_on(grid);
    let tolerance = grid.max_step() * local_lipschitz(&values, grid, index, 2) + 1e-12;
    let analytic = tilt.map(|t| t.min_rate);
    let agrees = analytic.map(|a| (value.to_f64() - a).abs() <= tolerance);
    Ok(SetInfimum {
        value,
        argmin,
        analytic,
        tolerance,
        agrees,
    })
}

/// `I_B(x) = I(x) − inf I(B)` on `closure(B)`, `+inf` elsewhere.
#[derive(Debug, Clone)]
pub struct ConditionalRate {
    pub base: ScalarField,
    pub offset: f64,
    pub support: ConditioningSet,
}

impl ConditionalRate {
    pub fn eval(&self, point: &[f64]) -> Extended {
        if !self.support.closure_contains(point) {
            return Extended::Infinite;
        }
        self.base.eval(point).shift(self.offset)
    }

    pub fn to_field(&self) -> ScalarField {
        let me = self.clone();
        ScalarField::closed_form(self.base.dim(), move |p| me.eval(p))
    }
}

pub fn conditional_rate(rate: &ScalarField, set: &ConditioningSet, inf_value: Extended) -> Result<ConditionalRate> {
    let offset = inf_value.finite().ok_or(LdpError::InfiniteConditioningRate)?;
    Ok(ConditionalRate {
        base: rate.clone(),
        offset,
        support: set.clone(),
    })
}

/// Where `I(x₀, ·)` comes from in [`conditional_marginal_rate`].
#[derive(Debug, Clone, Copy)]
pub enum RateSource<'a> {
    ClosedForm(&'a ScalarField),
    /// Conjugate `Ψ` on `dual` (over `(x, y)`) and slice at the node column
    /// nearest `x₀`.
    Conjugate { primal: &'a Grid, dual: &'a Grid },
}

#[derive(Debug, Clone)]
pub struct MarginalRate {
    pub field: ScalarField,
    /// Bound on the error from slicing at a node other than `x₀`.
    pub slice_error: Option<f64>,
}

/// `I_{x₀}(y) = I(x₀, y) − λ₀·x₀ + Ψ(λ₀, 0)` on `R^{d′}`.
pub fn conditional_marginal_rate(psi: &ScalarField, tilt: &TiltSolution, source: RateSource<'_>) -> Result<MarginalRate> {
    let d = tilt.x0.len();
    let dy = psi.dim() - d;
    let offset = tilt.min_rate;
    match source {
        RateSource::ClosedForm(rate) => {
            rate.check_dim(psi.dim())?;
            let rate = rate.clone();
            let x0 = tilt.x0.clone();
            let field = ScalarField::closed_form(dy, move |y| {
                let mut p = x0.clone();
                p.extend_from_slice(y);
                rate.eval(&p).shift(offset)
            });
            Ok(MarginalRate {
                field,
                slice_error: None,
            })
        }
        RateSource::Conjugate { primal, dual } => {
            if dy == 0 {
                return Err(LdpError::Unsupported(
                    "numerical slicing needs a Y component; use the closed-form rate".into(),
                ));
            }
            let conj = conjugate(psi, primal, dual)?;
            let values = conj.field.table().expect("conjugates are tabulated");
            let mut col = [0usize; 3];
            let mut dist: f64 = 0.0;
            for (k, (c, &x)) in col.iter_mut().zip(&tilt.x0).enumerate() {
                *c = dual.axis(k).nearest(x);
                dist = dist.max((dual.axis(k).coord(*c) - x).abs());
            }
            let y_axes: Vec<Axis> = dual.axes()[d..].to_vec();
            let y_grid = Grid::new(y_axes)?;
            let mut slice = Vec::with_capacity(y_grid.len());
            let mut x_lip: f64 = 0.0;
            for j in 0..y_grid.len() {
                let yi = y_grid.multi_index(j);
                let mut idx = col;
                idx[d..d + dy].copy_from_slice(&yi[..dy]);
                let flat = dual.flat_index(&idx[..d + dy]);
                slice.push(values[flat].shift(offset));
                for k in 0..d {
                    let (lo, hi) = dual.neighbors(flat, k);
                    for nb in [lo, hi].into_iter().flatten() {
                        if let (Some(a), Some(b)) = (values[flat].finite(), values[nb].finite()) {
                            x_lip = x_lip.max((a - b).abs() / dual.step(k));
                        }
                    }
                }
            }
            Ok(MarginalRate {
                field: ScalarField::tabulated(y_grid, slice)?,
                slice_error: Some(dist * x_lip),
            })
        }
    }
}

/// `Ψ_{x₀}(λ) = Ψ(λ₀, λ) − Ψ(λ₀, 0)` on `R^{d′}`.
pub fn conditional_free_energy(psi: &ScalarField, lambda0: &[f64]) -> Result<ScalarField> {
    let d = lambda0.len();
    if d == 0 || d > psi.dim() {
        return Err(LdpError::DimensionMismatch {
            expected: psi.dim(),
            found: d,
        });
    }
    let dy = psi.dim() - d;
    let mut base_point = lambda0.to_vec();
    base_point.resize(psi.dim(), 0.0);
    let base = psi.eval(&base_point).finite().ok_or(LdpError::OutsideEffectiveDomain)?;
    let joined = {
        let l0 = lambda0.to_vec();
        move |l: &[f64]| {
            let mut p = l0.clone();
            p.extend_from_slice(l);
            p
        }
    };
    let f = {
        let psi = psi.clone();
        let joined = joined.clone();
        ScalarField::closed_form(dy, move |l| psi.eval(&joined(l)).shift(base))
    };
    if psi.has_analytic_gradient() {
        let psi = psi.clone();
        Ok(f.with_gradient(move |l| psi.analytic_gradient(&joined(l)).expect("checked")[d..].to_vec()))
    } else {
        Ok(f)
    }
}

/// Conjugate of `I_{x₀}` computed through the tilt equation at fixed `λ`:
/// `λ ↦ inf_{λ₁} [Ψ(λ₁, λ) − λ₁·x₀] + inf I(B)`.
///
/// This coincides with [`conditional_free_energy`] only when `∇₁Ψ(λ₀, λ)`
/// does not depend on `λ`.
pub fn slice_free_energy(psi: &ScalarField, tilt: &TiltSolution) -> ScalarField {
    let psi = psi.clone();
    let x0 = tilt.x0.clone();
    let offset = tilt.min_rate;
    let dy = psi.dim() - x0.len();
    ScalarField::closed_form(dy, move |l| {
        let Ok(root) = solve_gradient_equation(&psi, &x0, l, DEFAULT_TILT_TOL) else {
            return Extended::Infinite;
        };
        let mut p = root.lead.clone();
        p.extend_from_slice(l);
        match psi.eval(&p) {
            Extended::Finite(v) => Extended::Finite(v - dot(&root.lead, &x0) + offset),
            Extended::Infinite => Extended::Infinite,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    /// Sup-norm gap between the grid conjugate of `Ψ_{x₀}` and `I_{x₀}`.
    pub max_defect: Extended,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
    pub compared: usize,
    /// Finite `I_{x₀}` where the conjugate's maximiser sat on the primal edge;
    /// excluded from the comparison.
    pub unresolved: usize,
    /// Infinite `I_{x₀}` matched by an edge maximiser.
    pub both_unbounded: usize,
}

/// Compares `conjugate(Ψ_{x₀})` with `I_{x₀}` on `y_grid`, skipping two
/// boundary layers. For `d′ = 0` both sides are scalars and no grids are
/// needed.
pub fn verify_duality(
    psi_x0: &ScalarField,
    i_x0: &ScalarField,
    grids: Option<(&Grid, &Grid)>,
) -> Result<DualityReport> {
    if psi_x0.dim() != i_x0.dim() {
        return Err(LdpError::DimensionMismatch {
            expected: psi_x0.dim(),
            found: i_x0.dim(),
        });
    }
    if psi_x0.dim() == 0 {
        let c = psi_x0.eval(&[]);
        let i = i_x0.eval(&[]);
        let defect = match (c, i) {
            (Extended::Finite(c), Extended::Finite(i)) => Extended::Finite((-c - i).abs()),
            _ => Extended::Infinite,
        };
        return Ok(DualityReport {
            max_defect: defect,
            worst_point: None,
            compared: 1,
            unresolved: 0,
            both_unbounded: 0,
        });
    }
    let (lambda_grid, y_grid) =
        grids.ok_or_else(|| LdpError::InvalidParameter("duality check needs lambda and y grids".into()))?;
    let conj = conjugate(psi_x0, lambda_grid, y_grid)?;
    let cv = conj.field.table().expect("conjugates are tabulated");
    let mut report = DualityReport {
        max_defect: Extended::ZERO,
        worst_point: None,
        compared: 0,
        unresolved: 0,
        both_unbounded: 0,
    };
    let mut y = vec![0.0; y_grid.dim()];
    for (j, (&c, &sat)) in cv.iter().zip(&conj.saturated).enumerate() {
        if y_grid.boundary_layer(j) < 2 {
            continue;
        }
        y_grid.point_into(j, &mut y);
        let i = i_x0.eval(&y);
        let gap = match (c, i) {
            (_, Extended::Infinite) if sat => {
                report.both_unbounded += 1;
                continue;
            }
            (_, Extended::Finite(_)) if sat => {
                report.unresolved += 1;
                continue;
            }
            (Extended::Finite(c), Extended::Finite(i)) => Extended::Finite((c - i).abs()),
            _ => Extended::Infinite,
        };
        report.compared += 1;
        if gap > report.max_defect || report.worst_point.is_none() && gap == report.max_defect {
            report.max_defect = gap;
            report.worst_point = Some(y.clone());
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyStatus {
    Pass,
    Fail,
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// `inf I(A° ∩ B°)` on the grid.
    pub inf_interior: Extended,
    /// `inf I(A° ∩ closure(B))` on the grid.
    pub inf_closure: Extended,
    pub gap: Extended,
    pub tolerance: f64,
    pub lipschitz: f64,
    /// Grid surrogate of `closure(B°) = closure(B)`.
    pub regular: bool,
    pub status: ConsistencyStatus,
}

/// Grid check of `inf I(A° ∩ B°) = inf I(A° ∩ closure(B))`.
pub fn check_infimum_consistency(
    rate: &ScalarField,
    a: &ConditioningSet,
    b: &ConditioningSet,
    grid: &Grid,
) -> Result<ConsistencyReport> {
    rate.check_dim(grid.dim())?;
    let values = rate.values_on(grid);
    let a_int = a.membership_on_grid(grid, Mode::Interior);
    let b_int = b.membership_on_grid(grid, Mode::Interior);
    let b_clo = b.membership_on_grid(grid, Mode::Closure);

    // every closure node off the grid faces lies within one grid step of an
    // interior node
    let regular = (0..grid.len()).all(|i| {
        !b_clo[i] || b_int[i] || grid.boundary_layer(i) == 0 || grid.stencil(i).iter().any(|&j| b_int[j])
    });

    let both_int: Vec<bool> = a_int.iter().zip(&b_int).map(|(x, y)| *x && *y).collect();
    let int_clo: Vec<bool> = a_int.iter().zip(&b_clo).map(|(x, y)| *x && *y).collect();
    let inf_interior = Infimum::over(grid, &values, &both_int).value;
    let inf_closure = Infimum::over(grid, &values, &int_clo).value;
    let gap = match (inf_interior, inf_closure) {
        (Extended::Finite(u), Extended::Finite(v)) => Extended::Finite((u - v).abs()),
        (Extended::Infinite, Extended::Infinite) => Extended::ZERO,
        _ => Extended::Infinite,
    };
    let lipschitz = lipschitz_estimate(&values, grid, &int_clo);
    let tolerance = grid.max_step() * lipschitz * (1.0 + 1e-9) + 1e-12;
    let status = if !regular {
        ConsistencyStatus::HypothesisViolated
    } else if gap <= Extended::Finite(tolerance) {
        ConsistencyStatus::Pass
    } else {
        ConsistencyStatus::Fail
    };
    Ok(ConsistencyReport {
        inf_interior,
        inf_closure,
        gap,
        tolerance,
        lipschitz,
        regular,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMethod {
    Analytic,
    Grid,
}

/// Conditional-rate infima of an event `A`: `inf I_B(A°)` and
/// `inf I_B(closure(A))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTargets {
    pub inf_interior: Extended,
    pub inf_closure: Extended,
    pub method: TargetMethod,
}

fn interval_inf(model: &JointModel, s: Interval) -> Extended {
    let dom = model.x_rate_domain();
    let s = s.intersect(&dom.closure());
    if s.closure().is_empty() || s.is_empty() && !(s.lo == s.hi) {
        return Extended::Infinite;
    }
    let x_star = model.equilibrium().0[0];
    model.x_rate().eval(&[s.project(x_star)])
}

/// Exact for one-dimensional `X` and events constraining `x` only; otherwise
/// minimises the closed-form rate over `grid`.
pub fn conditional_event_infima(
    model: &JointModel,
    event: &Region,
    set: &ConditioningSet,
    min_rate: f64,
    grid: Option<&Grid>,
) -> Result<EventTargets> {
    let shift = |v: Extended| v.shift(min_rate).min(Extended::Infinite);
    if model.x_dim() == 1 {
        if let (Some(ia), Some(ib)) = (event.x_interval(), set.region().x_interval()) {
            let raw = ia.intersect(&ib);
            let closure = if raw.is_empty() {
                Extended::Infinite
            } else {
                interval_inf(model, raw.closure())
            };
            let open = ia.interior().intersect(&ib.interior());
            let interior = if open.is_empty() {
                Extended::Infinite
            } else {
                interval_inf(model, open.closure())
            };
            return Ok(EventTargets {
                inf_interior: shift(interior),
                inf_closure: shift(closure),
                method: TargetMethod::Analytic,
            });
        }
    }
    let grid = grid.ok_or_else(|| {
        LdpError::Unsupported("event constrains Y; a grid over (x, y) is required for targets".into())
    })?;
    let rate = model.rate_function();
    let a = ConditioningSet::new(event.clone())?;
    let values = rate.values_on(grid);
    let and = |u: Vec<bool>, v: Vec<bool>| u.into_iter().zip(v).map(|(p, q)| p && q).collect::<Vec<_>>();
    let interior = and(
        a.membership_on_grid(grid, Mode::Interior),
        set.membership_on_grid(grid, Mode::Interior),
    );
    let closure = and(
        a.membership_on_grid(grid, Mode::Closure),
        set.membership_on_grid(grid, Mode::Closure),
    );
    Ok(EventTargets {
        inf_interior: shift(Infimum::over(grid, &values, &interior).value),
        inf_closure: shift(Infimum::over(grid, &values, &closure).value),
        method: TargetMethod::Grid,
    })
}
