//! Bundled joint models `(X_n, Y_n)` with closed-form free energies and
//! exact exponentially tilted samplers.
//!
//! All three models are sample means of `n` i.i.d. variables with speed
//! `a_n = n`. Draws are generated from sufficient statistics, which have
//! exactly the distribution of the corresponding sample means:
//!
//! - Gaussian mean: `X̄ ~ Normal(μ, σ²/n)`.
//! - Bernoulli mean: `n X̄ ~ Binomial(n, p)`.
//! - Gaussian pair: `X̄ ~ Normal(m, 1/n)` and, independently,
//!   `Σ (Z_i − X̄)² ~ χ²(n − 1)`, so `Y = X̄² + χ²(n − 1)/n`.
//!
//! [`JointModel::draw_by_summation`] sums `n` individual draws instead and
//! serves as the reference sampler in tests.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LdpError, Result};
use crate::field::ScalarField;
use crate::reduce::chunked_sum;
use crate::rng::replica_rng;
use crate::sets::Interval;
use crate::value::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelKind {
    GaussianCramer { mu: f64, sigma: f64 },
    BernoulliCramer { p: f64 },
    GaussianPair,
}

/// One draw of `(X_n, Y_n)`, stored as the concatenated coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    coords: Vec<f64>,
    x_dim: usize,
}

impl Draw {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let mut coords = x.to_vec();
        coords.extend_from_slice(y);
        Self {
            coords,
            x_dim: x.len(),
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.x_dim]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.x_dim..]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    kind: ModelKind,
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn xlogy_ratio(x: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / q).ln()
    }
}

/// Binary relative entropy `KL(x ‖ p)` on `[0, 1]`.
pub fn bernoulli_kl(x: f64, p: f64) -> Extended {
    if !(0.0..=1.0).contains(&x) {
        return Extended::Infinite;
    }
    Extended::Finite(xlogy_ratio(x, p) + xlogy_ratio(1.0 - x, 1.0 - p))
}

fn bernoulli_psi(p: f64, l: f64) -> f64 {
    if l <= 0.0 {
        (p * l.exp_m1()).ln_1p()
    } else {
        l + ((1.0 - p) * (-l).exp_m1()).ln_1p()
    }
}

fn pair_psi(l1: f64, l2: f64) -> Extended {
    let s = 1.0 - 2.0 * l2;
    if s <= 0.0 {
        return Extended::Infinite;
    }
    Extended::Finite(-0.5 * s.ln() + l1 * l1 / (2.0 * s))
}

fn pair_rate(x: f64, y: f64) -> Extended {
    let v = y - x * x;
    if v <= 0.0 {
        return Extended::Infinite;
    }
    Extended::Finite(0.5 * (y - 1.0 - v.ln()))
}

fn take(params: &BTreeMap<String, f64>, key: &str, model: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| LdpError::InvalidParameter(format!("model {model} needs parameter `{key}`")))
}

impl JointModel {
    pub fn new(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::GaussianCramer { mu, sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) || !mu.is_finite() {
                    return Err(LdpError::InvalidParameter(format!(
                        "gaussian_cramer needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
                    )));
                }
            }
            ModelKind::BernoulliCramer { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(LdpError::InvalidParameter(format!(
                        "bernoulli_cramer needs 0 < p < 1, got {p}"
                    )));
                }
            }
            ModelKind::GaussianPair => {}
        }
        Ok(Self { kind })
    }

    pub fn gaussian_cramer(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::GaussianCramer { mu, sigma })
    }

    pub fn bernoulli_cramer(p: f64) -> Result<Self> {
        Self::new(ModelKind::BernoulliCramer { p })
    }

    pub fn gaussian_pair() -> Self {
        Self {
            kind: ModelKind::GaussianPair,
        }
    }

    /// Builds a model from a name and a flat parameter map.
    pub fn from_spec(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "gaussian_cramer" => &["mu", "sigma"],
            "bernoulli_cramer" => &["p"],
            "gaussian_pair" => &[],
            other => return Err(LdpError::InvalidParameter(format!("unknown model `{other}`"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(LdpError::InvalidParameter(format!(
                "model {name} has no parameter `{k}`"
            )));
        }
        match name {
            "gaussian_cramer" => Self::gaussian_cramer(take(params, "mu", name)?, take(params, "sigma", name)?),
            "bernoulli_cramer" => Self::bernoulli_cramer(take(params, "p", name)?),
            _ => Ok(Self::gaussian_pair()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::GaussianCramer { .. } => "gaussian_cramer",
            ModelKind::BernoulliCramer { .. } => "bernoulli_cramer",
            ModelKind::GaussianPair => "gaussian_pair",
        }
    }

    pub fn x_dim(&self) -> usize {
        1
    }

    pub fn y_dim(&self) -> usize {
        match self.kind {
            ModelKind::GaussianPair => 1,
            _ => 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_dim() + self.y_dim()
    }

    /// Speed `a_n`.
    pub fn scale(&self, n: u64) -> f64 {
        n as f64
    }

    /// `Ψ(λ₁, λ₂)` with analytic gradient.
    pub fn free_energy(&self) -> ScalarField {
        match self.kind {
            ModelKind::GaussianCramer { mu, sigma } => {
                let s2 = sigma * sigma;
                ScalarField::closed_form(1, move |l| Extended::Finite(mu * l[0] + 0.5 * s2 * l[0] * l[0]))
                    .with_gradient(move |l| vec![mu + s2 * l[0]])
            }
            ModelKind::BernoulliCramer { p } => {
                let logit = (p / (1.0 - p)).ln();
                ScalarField::closed_form(1, move |l| Extended::Finite(bernoulli_psi(p, l[0])))
                    .with_gradient(move |l| vec![if l[0] == 0.0 { p } else { logistic(l[0] + logit) }])
            }
            ModelKind::GaussianPair => ScalarField::closed_form(2, |l| pair_psi(l[0], l[1]))
                .with_gradient(|l| {
                    let s = 1.0 - 2.0 * l[1];
                    vec![l[0] / s, 1.0 / s + l[0] * l[0] / (s * s)]
                })
                .with_domain(|l| l[1] < 0.5),
        }
    }

    /// Closed-form joint rate `I(x, y)`.
    pub fn rate_function(&self) -> ScalarField {
        match self.kind {
            ModelKind::GaussianCramer { mu, sigma } => {
                let s2 = sigma * sigma;
                ScalarField::closed_form(1, move |x| Extended::Finite((x[0] - mu).powi(2) / (2.0 * s2)))
            }
            ModelKind::BernoulliCramer { p } => {
                ScalarField::closed_form(1, move |x| bernoulli_kl(x[0], p)).with_domain(|x| (0.0..=1.0).contains(&x[0]))
            }
            ModelKind::GaussianPair => {
                ScalarField::closed_form(2, |p| pair_rate(p[0], p[1])).with_domain(|p| p[1] > p[0] * p[0])
            }
        }
    }

    /// Rate of `X_n` alone, `I_X(x) = inf_y I(x, y)`.
    pub fn x_rate(&self) -> ScalarField {
        match self.kind {
            ModelKind::GaussianPair => ScalarField::closed_form(1, |x| Extended::Finite(0.5 * x[0] * x[0])),
            _ => self.rate_function(),
        }
    }

    /// Effective domain of `I_X`.
    pub fn x_rate_domain(&self) -> Interval {
        match self.kind {
            ModelKind::BernoulliCramer { .. } => Interval::closed(0.0, 1.0),
            _ => Interval::REAL,
        }
    }

    /// `(x*, y*) = (∇₁Ψ(0, 0), ∇₂Ψ(0, 0))`.
    pub fn equilibrium(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self
            .free_energy()
            .analytic_gradient(&vec![0.0; self.dim()])
            .expect("bundled models carry gradients");
        let (x, y) = g.split_at(self.x_dim());
        (x.to_vec(), y.to_vec())
    }

    /// `log E[exp(a_n λ·X_n)]`, exact at every `n` for the bundled models.
    pub fn log_mgf_x(&self, n: u64, tilt: &[f64]) -> Extended {
        let mut l = tilt.to_vec();
        l.resize(self.dim(), 0.0);
        match self.free_energy().eval(&l) {
            Extended::Finite(v) => Extended::Finite(self.scale(n) * v),
            Extended::Infinite => Extended::Infinite,
        }
    }

    fn tilt_component(&self, tilt: &[f64]) -> Result<f64> {
        if tilt.len() == self.dim() && tilt[self.x_dim()..].iter().any(|&v| v != 0.0) {
            return Err(LdpError::UnsupportedTilt);
        }
        if tilt.len() != self.x_dim() && tilt.len() != self.dim() {
            return Err(LdpError::DimensionMismatch {
                expected: self.x_dim(),
                found: tilt.len(),
            });
        }
        Ok(tilt[0])
    }

    /// One draw of `(X_n, Y_n)` under `P_n`.
    pub fn draw(&self, n: u64, seed: u64, replica: u64) -> Draw {
        self.draw_with(n, seed, replica, 0.0)
    }

    /// One draw from `P_n` reweighted by `exp(a_n λ₀·X_n)`. Tilts act on the
    /// `X` component only; a full-length tilt must have zero `Y` part.
    pub fn draw_tilted(&self, n: u64, seed: u64, replica: u64, tilt: &[f64]) -> Result<Draw> {
        let l = self.tilt_component(tilt)?;
        Ok(self.draw_with(n, seed, replica, l))
    }

    fn draw_with(&self, n: u64, seed: u64, replica: u64, l: f64) -> Draw {
        assert!(n >= 1, "sample size must be positive");
        let mut rng = replica_rng(seed, n, replica);
        let nf = n as f64;
        match self.kind {
            ModelKind::GaussianCramer { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                Draw::new(&[mu + sigma * sigma * l + sigma * z / nf.sqrt()], &[])
            }
            ModelKind::BernoulliCramer { p } => {
                let k = Binomial::new(n, self.tilted_p(p, l))
                    .expect("tilted success probability lies in [0, 1]")
                    .sample(&mut rng);
                Draw::new(&[k as f64 / nf], &[])
            }
            ModelKind::GaussianPair => {
                let z: f64 = rng.sample(StandardNormal);
                let xbar = l + z / nf.sqrt();
                let ss = if n > 1 {
                    ChiSquared::new(nf - 1.0).expect("positive degrees of freedom").sample(&mut rng)
                } else {
                    0.0
                };
                Draw::new(&[xbar], &[xbar * xbar + ss / nf])
            }
        }
    }

    fn tilted_p(&self, p: f64, l: f64) -> f64 {
        if l == 0.0 {
            p
        } else {
            logistic(l + (p / (1.0 - p)).ln())
        }
    }

    /// Reference sampler: sums `n` individual tilted draws.
    pub fn draw_by_summation(&self, n: u64, seed: u64, replica: u64, tilt: &[f64]) -> Result<Draw> {
        let l = self.tilt_component(tilt)?;
        let mut rng = replica_rng(seed, n, replica);
        let nf = n as f64;
        Ok(match self.kind {
            ModelKind::GaussianCramer { mu, sigma } => {
                let m = mu + sigma * sigma * l;
                let s: f64 = (0..n).map(|_| m + sigma * rng.sample::<f64, _>(StandardNormal)).sum();
                Draw::new(&[s / nf], &[])
            }
            ModelKind::BernoulliCramer { p } => {
                let q = self.tilted_p(p, l);
                let k = (0..n).filter(|_| rng.random::<f64>() < q).count();
                Draw::new(&[k as f64 / nf], &[])
            }
            ModelKind::GaussianPair => {
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..n {
                    let z = l + rng.sample::<f64, _>(StandardNormal);
                    s1 += z;
                    s2 += z * z;
                }
                Draw::new(&[s1 / nf], &[s2 / nf])
            }
        })
    }

    /// Draws for replicas `0..count`.
    pub fn sample_batch(&self, n: u64, seed: u64, count: usize) -> Vec<Draw> {
        (0..count as u64)
            .into_par_iter()
            .map(|r| self.draw(n, seed, r))
            .collect()
    }

    pub fn sample_batch_tilted(&self, n: u64, seed: u64, count: usize, tilt: &[f64]) -> Result<Vec<Draw>> {
        let l = self.tilt_component(tilt)?;
        Ok((0..count as u64)
            .into_par_iter()
            .map(|r| self.draw_with(n, seed, r, l))
            .collect())
    }
}

/// Monte Carlo estimate of `a_n⁻¹ log E[exp(a_n λ·(X_n, Y_n))]` and its
/// delta-method standard error.
pub fn empirical_psi(model: &JointModel, n: u64, lambda: &[f64], seed: u64, replicas: usize) -> Result<(f64, f64)> {
    if replicas < 2 {
        return Err(LdpError::InvalidParameter("empirical_psi needs at least 2 replicas".into()));
    }
    if lambda.len() != model.dim() {
        return Err(LdpError::DimensionMismatch {
            expected: model.dim(),
            found: lambda.len(),
        });
    }
    if !model.free_energy().in_domain(lambda) {
        return Err(LdpError::OutsideEffectiveDomain);
    }
    let a = model.scale(n);
    let exponents: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let d = model.draw(n, seed, r);
            a * d.coords().iter().zip(lambda).map(|(c, l)| c * l).sum::<f64>()
        })
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(LdpError::Overflow);
    }
    let w: Vec<f64> = exponents.iter().map(|e| (e - shift).exp()).collect();
    let w2: Vec<f64> = w.iter().map(|v| v * v).collect();
    let r = replicas as f64;
    let mean = chunked_sum(&w) / r;
    let var = ((chunked_sum(&w2) / r - mean * mean) * r / (r - 1.0)).max(0.0);
    let estimate = (shift + mean.ln()) / a;
    let stderr = (var / r).sqrt() / mean / a;
    Ok((estimate, stderr))
}
