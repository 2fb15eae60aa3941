//! Seeded Monte Carlo checks of conditional large-deviation asymptotics:
//! estimates of `a_n⁻¹ log P_n(A | B)`, sandwich verdicts, canonical
//! expectations and sweeps over `n`.
//!
//! Replicas are generated in parallel from counter-based streams and every
//! sum goes through [`chunked_sum`], so results do not depend on the number
//! of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditional::{conditional_event_infima, solve_tilt, EventTargets, TiltSolution, DEFAULT_TILT_TOL};
use crate::error::{LdpError, Result};
use crate::grid::Grid;
use crate::models::{Draw, JointModel};
use crate::reduce::chunked_sum;
use crate::rng::derive_seed;
use crate::sets::{ConditioningSet, Interval, Region};
use crate::value::{Extended, LogValue};

pub const MIN_REPLICAS: usize = 100;
/// Effective sample sizes below this mark an estimate as low-confidence.
pub const LOW_CONFIDENCE_ESS: f64 = 100.0;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_RADIUS: f64 = 0.2;

const EVENT_STREAM: u64 = 0x0a;
const CONDITION_STREAM: u64 = 0x0b;

/// The event `A`, a predicate on the full draw `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventSet {
    region: Region,
}

impl EventSet {
    pub fn new(region: Region) -> Result<Self> {
        if matches!(region, Region::Mask(_)) {
            return Err(LdpError::Unsupported("grid masks cannot be used as events".into()));
        }
        ConditioningSet::new(region.clone())?;
        Ok(Self { region })
    }

    pub fn whole() -> Self {
        Self { region: Region::Whole }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn contains(&self, draw: &Draw) -> bool {
        self.region.contains(draw.coords())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Tilted,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Tilted => "tilted",
        })
    }
}

impl FromStr for Method {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "tilted" => Ok(Method::Tilted),
            other => Err(LdpError::InvalidParameter(format!(
                "unknown method `{other}`, expected direct or tilted"
            ))),
        }
    }
}

/// Finite-`n` estimate of `a_n⁻¹ log P_n(A | B)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpEstimate {
    pub n: u64,
    pub a_n: f64,
    pub replicas: usize,
    pub method: Method,
    pub estimate: LogValue,
    /// Delta-method standard error on the `a_n⁻¹ log` scale.
    pub stderr: f64,
    /// Draws in `A ∩ B` (under the event proposal when tilted).
    pub hits_ab: u64,
    /// Draws in `B` (under the conditioning proposal when tilted).
    pub hits_b: u64,
    /// Proposal tilt for `P_n(B)`.
    pub tilt: Vec<f64>,
    /// Proposal tilt for `P_n(A ∩ B)`.
    pub event_tilt: Vec<f64>,
    /// Effective sample size behind the numerator.
    pub ess: f64,
    pub low_confidence: bool,
}

fn in_both(a: &EventSet, b: &ConditioningSet, d: &Draw) -> bool {
    b.contains(d.coords()) && a.contains(d)
}

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < MIN_REPLICAS {
        return Err(LdpError::InvalidParameter(format!(
            "at least {MIN_REPLICAS} replicas are required, got {replicas}"
        )));
    }
    Ok(())
}

fn region_interval(model: &JointModel, region: &Region) -> Option<Interval> {
    if model.x_dim() != 1 {
        return None;
    }
    region.x_interval()
}

/// Tilt that recentres the sampler on the most likely point of an `x`-interval.
///
/// Targets on the edge of the gradient range (e.g. `x = 1` for a Bernoulli
/// mean) are pulled towards `x*` until the tilt equation is solvable.
fn dominating_tilt(model: &JointModel, interval: Interval) -> Result<Option<Vec<f64>>> {
    let s = interval.intersect(&model.x_rate_domain().closure());
    if s.is_empty() && !(s.lo == s.hi && s.lo_closed && s.hi_closed) {
        return Ok(None);
    }
    let x_star = model.equilibrium().0[0];
    let target = s.closure().project(x_star);
    if target == x_star {
        return Ok(Some(vec![0.0]));
    }
    let psi = model.free_energy();
    let mut last = None;
    let attempts = std::iter::once(target).chain((1..=40).rev().map(|j| target + (x_star - target) * 0.5_f64.powi(j)));
    for x in attempts {
        match solve_tilt(&psi, &[x], DEFAULT_TILT_TOL) {
            Ok(t) => return Ok(Some(t.lambda0)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Tilt for the conditioning event: the dominating point of `B` when `B` is
/// an `x`-interval, else the solution of the tilt equation at the anchor.
pub fn conditioning_tilt(model: &JointModel, b: &ConditioningSet) -> Result<Vec<f64>> {
    if let Some(i) = region_interval(model, b.region()) {
        return dominating_tilt(model, i)?.ok_or(LdpError::EmptyConditioningSet);
    }
    match b.region() {
        Region::HalfSpace { anchor, .. } | Region::Shell { anchor, .. } => {
            Ok(solve_tilt(&model.free_energy(), anchor, DEFAULT_TILT_TOL)?.lambda0)
        }
        _ => Err(LdpError::Unsupported(
            "tilted estimation needs a half-space or shell conditioning set".into(),
        )),
    }
}

/// Importance-sampling estimate of `log P_n(E)` from draws tilted by `tilt`.
struct LogProb {
    value: LogValue,
    /// Standard error of `value` (natural log scale).
    stderr: f64,
    hits: u64,
    ess: f64,
}

fn log_weights(model: &JointModel, n: u64, draws: &[Draw], tilt: &[f64]) -> Result<Vec<f64>> {
    let a = model.scale(n);
    let norm = model.log_mgf_x(n, tilt).finite().ok_or(LdpError::OutsideEffectiveDomain)?;
    Ok(draws
        .par_iter()
        .map(|d| norm - a * d.x().iter().zip(tilt).map(|(x, l)| x * l).sum::<f64>())
        .collect())
}

fn weighted_log_prob(log_w: &[f64], hit: &[bool]) -> LogProb {
    let r = log_w.len() as f64;
    let hits = hit.iter().filter(|&&h| h).count() as u64;
    if hits == 0 {
        return LogProb {
            value: LogValue::NegInfinite,
            stderr: 0.0,
            hits,
            ess: 0.0,
        };
    }
    let m = log_w
        .iter()
        .zip(hit)
        .filter(|(_, &h)| h)
        .map(|(&w, _)| w)
        .fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<f64> = log_w
        .iter()
        .zip(hit)
        .map(|(&w, &h)| if h { (w - m).exp() } else { 0.0 })
        .collect();
    let s = chunked_sum(&v);
    let s2 = chunked_sum(&v.iter().map(|x| x * x).collect::<Vec<_>>());
    let mean = s / r;
    let var = ((s2 / r - mean * mean) * r / (r - 1.0)).max(0.0);
    LogProb {
        value: LogValue::Finite(m + s.ln() - r.ln()),
        stderr: (var / r).sqrt() / mean,
        hits,
        ess: s * s / s2,
    }
}

/// Internal result carrying the `B`-conditioned draws for concentration checks.
struct Run {
    estimate: LdpEstimate,
    /// Conditioned draws and their (unnormalised) weights.
    conditioned: Vec<(Draw, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn finish(
    model: &JointModel,
    n: u64,
    replicas: usize,
    method: Method,
    log_ratio: LogValue,
    stderr_log: f64,
    counts: (u64, u64),
    tilts: (Vec<f64>, Vec<f64>),
    ess: f64,
) -> LdpEstimate {
    let a = model.scale(n);
    let estimate = match log_ratio {
        LogValue::Finite(v) => LogValue::Finite((v / a).min(0.0)),
        LogValue::NegInfinite => LogValue::NegInfinite,
    };
    LdpEstimate {
        n,
        a_n: a,
        replicas,
        method,
        estimate,
        stderr: stderr_log / a,
        hits_ab: counts.0,
        hits_b: counts.1,
        tilt: tilts.0,
        event_tilt: tilts.1,
        ess,
        low_confidence: ess < LOW_CONFIDENCE_ESS,
    }
}

fn run_direct(
    model: &JointModel,
    n: u64,
    a: &EventSet,
    b: &ConditioningSet,
    seed: u64,
    replicas: usize,
) -> Result<Run> {
    let draws = model.sample_batch(n, seed, replicas);
    let in_b: Vec<bool> = draws.par_iter().map(|d| b.contains(d.coords())).collect();
    let hits_b = in_b.iter().filter(|&&h| h).count() as u64;
    if hits_b == 0 {
        return Err(LdpError::ConditioningEventUnobserved);
    }
    let hits_ab = draws
        .iter()
        .zip(&in_b)
        .filter(|(d, &hb)| hb && a.contains(d))
        .count() as u64;
    let (log_ratio, se) = if hits_ab == 0 {
        (LogValue::NegInfinite, 0.0)
    } else {
        let p = hits_ab as f64 / hits_b as f64;
        (
            LogValue::Finite((hits_ab as f64).ln() - (hits_b as f64).ln()),
            ((1.0 - p) / hits_ab as f64).sqrt(),
        )
    };
    let zero = vec![0.0; model.x_dim()];
    let estimate = finish(
        model,
        n,
        replicas,
        Method::Direct,
        log_ratio,
        se,
        (hits_ab, hits_b),
        (zero.clone(), zero),
        hits_ab as f64,
    );
    let conditioned = draws
        .into_iter()
        .zip(&in_b)
        .filter(|(_, &h)| h)
        .map(|(d, _)| (d, 1.0))
        .collect();
    Ok(Run { estimate, conditioned })
}

fn run_tilted(
    model: &JointModel,
    n: u64,
    a: &EventSet,
    b: &ConditioningSet,
    seed: u64,
    replicas: usize,
) -> Result<Run> {
    let b_tilt = conditioning_tilt(model, b)?;
    // A ∩ B as an x-interval, when both sides constrain x only
    let ab_interval = match (region_interval(model, a.region()), region_interval(model, b.region())) {
        (Some(ia), Some(ib)) => Some(ia.intersect(&ib)),
        _ => None,
    };
    let ab_tilt = match ab_interval {
        Some(i) => dominating_tilt(model, i)?,
        None => Some(b_tilt.clone()),
    };

    if ab_tilt.as_ref() == Some(&b_tilt) {
        // shared proposal, self-normalised ratio
        let draws = model.sample_batch_tilted(n, seed, replicas, &b_tilt)?;
        let lw = log_weights(model, n, &draws, &b_tilt)?;
        let in_b: Vec<bool> = draws.par_iter().map(|d| b.contains(d.coords())).collect();
        let in_ab: Vec<bool> = draws
            .par_iter()
            .zip(&in_b)
            .map(|(d, &hb)| hb && a.contains(d))
            .collect();
        let hits_b = in_b.iter().filter(|&&h| h).count() as u64;
        if hits_b == 0 {
            return Err(LdpError::ConditioningEventUnobserved);
        }
        let hits_ab = in_ab.iter().filter(|&&h| h).count() as u64;
        let m = lw
            .iter()
            .zip(&in_b)
            .filter(|(_, &h)| h)
            .map(|(&w, _)| w)
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().zip(&in_b).map(|(&l, &h)| if h { (l - m).exp() } else { 0.0 }).collect();
        let w_ab: Vec<f64> = w.iter().zip(&in_ab).map(|(&x, &h)| if h { x } else { 0.0 }).collect();
        let s_b = chunked_sum(&w);
        let s_ab = chunked_sum(&w_ab);
        let (log_ratio, se, ess) = if hits_ab == 0 {
            (LogValue::NegInfinite, 0.0, 0.0)
        } else {
            let ratio = s_ab / s_b;
            let resid: Vec<f64> = w
                .iter()
                .zip(&in_ab)
                .map(|(&x, &h)| {
                    let e = x * (if h { 1.0 } else { 0.0 } - ratio);
                    e * e
                })
                .collect();
            let se = chunked_sum(&resid).sqrt() / s_ab;
            let s2_ab = chunked_sum(&w_ab.iter().map(|x| x * x).collect::<Vec<_>>());
            (LogValue::Finite(s_ab.ln() - s_b.ln()), se, s_ab * s_ab / s2_ab)
        };
        let estimate = finish(
            model,
            n,
            replicas,
            Method::Tilted,
            log_ratio,
            se,
            (hits_ab, hits_b),
            (b_tilt.clone(), b_tilt),
            ess,
        );
        let conditioned = draws
            .into_iter()
            .zip(w)
            .zip(&in_b)
            .filter(|(_, &h)| h)
            .map(|(dw, _)| dw)
            .collect();
        return Ok(Run { estimate, conditioned });
    }

    // separate proposals for P(B) and P(A ∩ B), each with its exact normaliser
    let b_seed = derive_seed(seed, CONDITION_STREAM);
    let draws_b = model.sample_batch_tilted(n, b_seed, replicas, &b_tilt)?;
    let lw_b = log_weights(model, n, &draws_b, &b_tilt)?;
    let in_b: Vec<bool> = draws_b.par_iter().map(|d| b.contains(d.coords())).collect();
    let pb = weighted_log_prob(&lw_b, &in_b);
    if pb.hits == 0 {
        return Err(LdpError::ConditioningEventUnobserved);
    }
    let (pab, ab_tilt) = match ab_tilt {
        None => (
            LogProb {
                value: LogValue::NegInfinite,
                stderr: 0.0,
                hits: 0,
                ess: 0.0,
            },
            Vec::new(),
        ),
        Some(t) => {
            let draws = model.sample_batch_tilted(n, derive_seed(seed, EVENT_STREAM), replicas, &t)?;
            let lw = log_weights(model, n, &draws, &t)?;
            let hit: Vec<bool> = draws.par_iter().map(|d| in_both(a, b, d)).collect();
            (weighted_log_prob(&lw, &hit), t)
        }
    };
    let log_ratio = match (pab.value, pb.value) {
        (LogValue::Finite(u), LogValue::Finite(v)) => LogValue::Finite(u - v),
        _ => LogValue::NegInfinite,
    };
    let se = if log_ratio.is_neg_infinite() {
        0.0
    } else {
        pab.stderr.hypot(pb.stderr)
    };
    let estimate = finish(
        model,
        n,
        replicas,
        Method::Tilted,
        log_ratio,
        se,
        (pab.hits, pb.hits),
        (b_tilt, ab_tilt),
        pab.ess,
    );
    let m = lw_b
        .iter()
        .zip(&in_b)
        .filter(|(_, &h)| h)
        .map(|(&w, _)| w)
        .fold(f64::NEG_INFINITY, f64::max);
    let conditioned = draws_b
        .into_iter()
        .zip(lw_b)
        .zip(&in_b)
        .filter(|(_, &h)| h)
        .map(|((d, l), _)| (d, (l - m).exp()))
        .collect();
    Ok(Run { estimate, conditioned })
}

fn run(
    model: &JointModel,
    n: u64,
    a: &EventSet,
    b: &ConditioningSet,
    method: Method,
    seed: u64,
    replicas: usize,
) -> Result<Run> {
    check_replicas(replicas)?;
    if n == 0 {
        return Err(LdpError::InvalidParameter("sample size must be positive".into()));
    }
    match method {
        Method::Direct => run_direct(model, n, a, b, seed, replicas),
        Method::Tilted => {
            if model.x_dim() != 1 {
                return Err(LdpError::Unsupported(
                    "tilted estimation is implemented for one-dimensional X".into(),
                ));
            }
            run_tilted(model, n, a, b, seed, replicas)
        }
    }
}

/// Estimates `a_n⁻¹ log P_n(A | B)`.
///
/// The direct method counts hits among plain draws. The tilted method draws
/// from `P_n` reweighted by `exp(a_n λ·X_n)` and undoes the tilt with the
/// exact finite-`n` normaliser. When `A ∩ B` and `B` share their dominating
/// point the ratio is self-normalised on one set of draws; otherwise each
/// probability gets its own proposal and stream.
pub fn estimate_conditional_logprob(
    model: &JointModel,
    n: u64,
    a: &EventSet,
    b: &ConditioningSet,
    method: Method,
    seed: u64,
    replicas: usize,
) -> Result<LdpEstimate> {
    run(model, n, a, b, method, seed, replicas).map(|r| r.estimate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalExpectation {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replicas: usize,
}

/// Mean of `Y_n` under `P_n` tilted by `exp(a_n λ₀·X_n)`.
///
/// The tilted sampler is exact, so the self-normalised weights are all equal
/// and the estimate is the plain mean of the tilted draws.
pub fn canonical_expectation(
    model: &JointModel,
    n: u64,
    lambda0: &[f64],
    seed: u64,
    replicas: usize,
) -> Result<CanonicalExpectation> {
    if model.y_dim() == 0 {
        return Err(LdpError::NoYComponent);
    }
    check_replicas(replicas)?;
    let draws = model.sample_batch_tilted(n, seed, replicas, lambda0)?;
    let r = replicas as f64;
    let (mut mean, mut stderr) = (Vec::new(), Vec::new());
    for k in 0..model.y_dim() {
        let ys: Vec<f64> = draws.iter().map(|d| d.y()[k]).collect();
        let m = chunked_sum(&ys) / r;
        let ss = chunked_sum(&ys.iter().map(|y| (y - m) * (y - m)).collect::<Vec<_>>());
        mean.push(m);
        stderr.push((ss / (r - 1.0) / r).sqrt());
    }
    Ok(CanonicalExpectation { mean, stderr, replicas })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichBranch {
    Regular,
    /// `inf I_B(A°) = 0`: the estimate must exceed `−ε − slack`.
    ZeroInterior,
    /// `inf I_B(closure A) = ∞`: no mass may be observed.
    InfiniteClosure,
    InvalidEpsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub branch: SandwichBranch,
    pub lower: LogValue,
    pub upper: LogValue,
    pub slack: f64,
}

/// Checks `−(1+ε)·inf_interior − slack ≤ estimate ≤ −(1−ε)·inf_closure + slack`
/// with `slack = 4·stderr`.
pub fn sandwich_check(est: &LdpEstimate, inf_closure: Extended, inf_interior: Extended, epsilon: f64) -> Verdict {
    let slack = 4.0 * est.stderr;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Verdict {
            pass: false,
            branch: SandwichBranch::InvalidEpsilon,
            lower: LogValue::NegInfinite,
            upper: LogValue::NegInfinite,
            slack,
        };
    }
    let Extended::Finite(closure) = inf_closure else {
        return Verdict {
            pass: est.estimate.is_neg_infinite(),
            branch: SandwichBranch::InfiniteClosure,
            lower: LogValue::NegInfinite,
            upper: LogValue::NegInfinite,
            slack,
        };
    };
    let upper = -(1.0 - epsilon) * closure + slack;
    let (branch, lower) = match inf_interior {
        Extended::Infinite => (SandwichBranch::Regular, LogValue::NegInfinite),
        Extended::Finite(0.0) => (SandwichBranch::ZeroInterior, LogValue::Finite(-epsilon - slack)),
        Extended::Finite(v) => (SandwichBranch::Regular, LogValue::Finite(-(1.0 + epsilon) * v - slack)),
    };
    let pass = match (est.estimate, lower) {
        (LogValue::NegInfinite, LogValue::NegInfinite) => true,
        (LogValue::NegInfinite, LogValue::Finite(_)) => false,
        (LogValue::Finite(e), lo) => {
            let above = match (branch, lo) {
                (SandwichBranch::ZeroInterior, LogValue::Finite(l)) => e > l,
                (_, LogValue::Finite(l)) => e >= l,
                (_, LogValue::NegInfinite) => true,
            };
            above && e <= upper
        }
    };
    Verdict {
        pass,
        branch,
        lower,
        upper: LogValue::Finite(upper),
        slack,
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub epsilon: f64,
    /// Radius of the ball around `(x₀, y₀)` for the concentration fraction.
    pub radius: f64,
    /// Grid over `(x, y)` for events that constrain `Y`.
    pub grid: Option<Grid>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            radius: DEFAULT_RADIUS,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    /// Each successive error is at most the previous one plus four combined
    /// standard errors.
    pub approaching: bool,
    pub final_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub ns: Vec<u64>,
    pub estimates: Vec<LdpEstimate>,
    pub targets: EventTargets,
    /// `−inf I_B(A°)`.
    pub target: LogValue,
    pub verdicts: Vec<Verdict>,
    /// The tilt solution at the dominating point of `B`.
    pub tilt: Option<TiltSolution>,
    pub centre: Vec<f64>,
    pub radius: f64,
    /// Weighted share of `B`-conditioned draws within `radius` of `centre`.
    pub concentration: Vec<f64>,
    pub trend: Option<Trend>,
}

fn dominating_point(model: &JointModel, b: &ConditioningSet) -> Result<TiltSolution> {
    let lambda = conditioning_tilt(model, b)?;
    let psi = model.free_energy();
    let mut full = lambda.clone();
    full.resize(model.dim(), 0.0);
    let g = psi.analytic_gradient(&full).ok_or(LdpError::OutsideEffectiveDomain)?;
    solve_tilt(&psi, &g[..model.x_dim()], DEFAULT_TILT_TOL)
}

fn inf_rate_of(model: &JointModel, b: &ConditioningSet, grid: Option<&Grid>) -> Result<f64> {
    let t = conditional_event_infima(model, &Region::Whole, b, 0.0, grid)?;
    t.inf_closure.finite().ok_or(LdpError::InfiniteConditioningRate)
}

/// Runs [`estimate_conditional_logprob`] for every `n` with the analytic
/// targets, sandwich verdicts and the conditional concentration around
/// `(x₀, y₀)`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_sweep(
    model: &JointModel,
    ns: &[u64],
    a: &EventSet,
    b: &ConditioningSet,
    method: Method,
    seed: u64,
    replicas: usize,
    options: &SweepOptions,
) -> Result<SweepResult> {
    if ns.is_empty() {
        return Err(LdpError::InvalidParameter("sample-size list is empty".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LdpError::InvalidParameter("sample sizes must be strictly increasing".into()));
    }
    let min_rate = inf_rate_of(model, b, options.grid.as_ref())?;
    let targets = conditional_event_infima(model, a.region(), b, min_rate, options.grid.as_ref())?;
    let target = match targets.inf_interior {
        Extended::Finite(v) => LogValue::Finite(-v),
        Extended::Infinite => LogValue::NegInfinite,
    };
    let tilt = dominating_point(model, b).ok();
    let centre = match &tilt {
        Some(t) => t.x0.iter().chain(&t.y0).copied().collect(),
        None => {
            let (x, y) = model.equilibrium();
            x.into_iter().chain(y).collect::<Vec<_>>()
        }
    };

    let mut estimates = Vec::with_capacity(ns.len());
    let mut verdicts = Vec::with_capacity(ns.len());
    let mut concentration = Vec::with_capacity(ns.len());
    for &n in ns {
        let r = run(model, n, a, b, method, seed, replicas)?;
        verdicts.push(sandwich_check(
            &r.estimate,
            targets.inf_closure,
            targets.inf_interior,
            options.epsilon,
        ));
        let (inside, total): (Vec<f64>, Vec<f64>) = r
            .conditioned
            .iter()
            .map(|(d, w)| {
                let dist = d
                    .coords()
                    .iter()
                    .zip(&centre)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                (if dist <= options.radius { *w } else { 0.0 }, *w)
            })
            .unzip();
        concentration.push(chunked_sum(&inside) / chunked_sum(&total));
        estimates.push(r.estimate);
    }

    let trend = match target {
        LogValue::Finite(t) if estimates.len() >= 2 => {
            let errs: Vec<Option<f64>> = estimates.iter().map(|e| e.estimate.finite().map(|v| (v - t).abs())).collect();
            let approaching = errs.windows(2).zip(estimates.windows(2)).all(|(e, est)| match (e[0], e[1]) {
                (Some(a), Some(b)) => b <= a + 4.0 * est[0].stderr.hypot(est[1].stderr),
                (None, Some(_)) => true,
                (_, None) => false,
            });
            errs.last().copied().flatten().map(|final_error| Trend {
                approaching,
                final_error,
            })
        }
        _ => None,
    };

    Ok(SweepResult {
        ns: ns.to_vec(),
        estimates,
        targets,
        target,
        verdicts,
        tilt,
        centre,
        radius: options.radius,
        concentration,
        trend,
    })
}
