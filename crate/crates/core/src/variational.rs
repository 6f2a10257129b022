//! Factorized symmetric Bernoulli variational family in both the natural
//! (λ) and expectation (η = tanh λ) parameterizations, together with the
//! prior, KL divergence and its gradient, the λ⁰−λ identity, Fisher
//! information, and exact desk-scale ELBO oracles.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::model::{exact_log_partition, Dataset, EnumCaps};
use crate::math::ln_cosh;

/// λ is the authoritative parameter; η is a cached view kept equal to
/// tanh(λ) after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    lambda: Array2<f64>,
    eta: Array2<f64>,
}

impl VariationalState {
    pub fn zeros(m: usize, n: usize) -> Self {
        VariationalState {
            lambda: Array2::zeros((m, n)),
            eta: Array2::zeros((m, n)),
        }
    }

    pub fn from_lambda(lambda: Array2<f64>) -> Self {
        let eta = lambda.mapv(f64::tanh);
        VariationalState { lambda, eta }
    }

    /// Build from means; entries of exactly ±1 map to λ = ±∞.
    pub fn from_eta(eta: Array2<f64>) -> Self {
        let lambda = eta.mapv(f64::atanh);
        VariationalState { lambda, eta }
    }

    pub fn lambda(&self) -> &Array2<f64> {
        &self.lambda
    }

    pub fn eta(&self) -> &Array2<f64> {
        &self.eta
    }

    pub fn set_lambda(&mut self, lambda: Array2<f64>) {
        self.eta = lambda.mapv(f64::tanh);
        self.lambda = lambda;
    }

    pub fn dim(&self) -> (usize, usize) {
        self.lambda.dim()
    }
}

/// Factorized symmetric Bernoulli prior, stored in both coordinates:
/// nat = ½ log((1+mean)/(1−mean)).
#[derive(Debug, Clone)]
pub struct PriorSpec {
    pub mean: Array2<f64>,
    pub nat: Array2<f64>,
}

impl PriorSpec {
    pub fn from_mean(mean: Array2<f64>) -> Result<Self> {
        if let Some(m) = mean.iter().find(|m| m.abs() >= 1.0) {
            return Err(Error::Domain(format!(
                "prior mean must satisfy |m| < 1, found {m}"
            )));
        }
        let nat = mean.mapv(f64::atanh);
        Ok(PriorSpec { mean, nat })
    }

    /// Uninformative prior m = 0 everywhere.
    pub fn uniform(m: usize, n: usize) -> Self {
        PriorSpec {
            mean: Array2::zeros((m, n)),
            nat: Array2::zeros((m, n)),
        }
    }
}

/// λ ↦ η = tanh(λ).
pub fn nat_to_mean(lambda: f64) -> f64 {
    lambda.tanh()
}

/// η ↦ λ = ½ log((1+η)/(1−η)), computed as atanh for stability near ±1.
pub fn mean_to_nat(eta: f64) -> Result<f64> {
    if eta.abs() >= 1.0 || eta.is_nan() {
        return Err(Error::Domain(format!("mean_to_nat requires |eta| < 1, got {eta}")));
    }
    Ok(eta.atanh())
}

fn bernoulli_kl_term(eta: f64, m: f64) -> f64 {
    // Σ_{x=±1} ((1+xη)/2) log(((1+xη)/2)/((1+xm)/2)), with 0·log 0 := 0
    let mut total = 0.0;
    for x in [1.0, -1.0] {
        let q = (1.0 + x * eta) / 2.0;
        let p = (1.0 + x * m) / 2.0;
        if q == 0.0 {
            continue;
        }
        total += q * (q / p).ln();
    }
    total
}

/// KL(q_η ‖ p_m), summed over all synapses. η = ±1 is admitted (clipping
/// can produce it); if the prior puts zero mass there the result is +∞.
pub fn kl_to_prior(eta: &Array2<f64>, prior: &PriorSpec) -> f64 {
    eta.iter()
        .zip(prior.mean.iter())
        .map(|(&e, &m)| bernoulli_kl_term(e, m))
        .sum()
}

/// ∇_η KL(q‖p0), elementwise −Σ_{x=±1} (x/2)(log((1+xm)/(1+xη)) − 1).
/// The −1 inside the sum cancels over x = ±1.
pub fn kl_grad(eta: &Array2<f64>, prior: &PriorSpec) -> Result<Array2<f64>> {
    if let Some(e) = eta.iter().find(|e| e.abs() >= 1.0) {
        return Err(Error::Domain(format!("kl_grad requires |eta| < 1, got {e}")));
    }
    let mut out = Array2::zeros(eta.dim());
    for ((g, &e), &m) in out.iter_mut().zip(eta.iter()).zip(prior.mean.iter()) {
        *g = -kl_update_term(e, m);
    }
    Ok(out)
}

/// The verbatim expression Σ_{x=±1} (x/2)(log((1+xm)/(1+xη)) − 1) that the
/// expectation-parameter update adds; equals −∇_η KL and also λ⁰ − λ.
pub fn kl_update_term(eta: f64, m: f64) -> f64 {
    let mut total = 0.0;
    for x in [1.0, -1.0] {
        total += (x / 2.0) * (((1.0 + x * m) / (1.0 + x * eta)).ln() - 1.0);
    }
    total
}

/// λ⁰ − λ, elementwise.
pub fn nat_gap(state: &VariationalState, prior: &PriorSpec) -> Array2<f64> {
    &prior.nat - state.lambda()
}

/// Diagonal of the Fisher information matrix in λ coordinates:
/// 1 − tanh²(λ), evaluated as sech²(λ) so it stays positive far past the
/// point where tanh rounds to ±1.
pub fn fisher_diag(lambda: &Array2<f64>) -> Array2<f64> {
    lambda.mapv(|l| {
        let s = 1.0 / l.cosh();
        s * s
    })
}

/// Weight matrix of configuration index `idx` (bit k ⇒ entry k, row-major).
fn weight_config(idx: usize, m: usize, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |(mu, i)| {
        if (idx >> (mu * n + i)) & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    })
}

fn check_caps(m: usize, n: usize, caps: &EnumCaps) -> Result<()> {
    if m * n > caps.max_weights {
        return Err(Error::Capacity(format!(
            "weight enumeration: M*N={} exceeds cap {}",
            m * n,
            caps.max_weights
        )));
    }
    if n > caps.max_visible {
        return Err(Error::Capacity(format!(
            "visible enumeration: N={n} exceeds cap {}",
            caps.max_visible
        )));
    }
    Ok(())
}

/// log p(D|W) for every binary weight configuration, indexed as in
/// `weight_config`. Shared by the exact ELBO and its gradient.
fn all_log_likelihoods(
    dataset: &Dataset,
    m: usize,
    n: usize,
    beta: f64,
    caps: &EnumCaps,
) -> Result<Vec<f64>> {
    let scale = 1.0 / (n as f64).sqrt();
    let zeros = Array1::zeros(m);
    let d = dataset.len() as f64;
    let mut out = Vec::with_capacity(1 << (m * n));
    for idx in 0..(1usize << (m * n)) {
        let w = weight_config(idx, m, n);
        let log_z = exact_log_partition(&w, &zeros, beta, caps)?;
        let mut ll = -d * log_z;
        for sample in dataset.samples.rows() {
            for mu in 0..m {
                let x: f64 = w.row(mu).iter().zip(sample.iter()).map(|(wi, vi)| wi * vi).sum();
                ll += ln_cosh(beta * scale * x);
            }
        }
        out.push(ll);
    }
    Ok(out)
}

/// Per-entry q-factors (1 + w·η)/2 for one configuration.
fn config_factors(idx: usize, eta: &Array2<f64>) -> Vec<f64> {
    let (m, n) = eta.dim();
    (0..m * n)
        .map(|k| {
            let w = if (idx >> k) & 1 == 1 { 1.0 } else { -1.0 };
            (1.0 + w * eta[(k / n, k % n)]) / 2.0
        })
        .collect()
}

/// Exact ELBO E_q[log p(D|W)] − KL(q‖p0) by enumerating all 2^{MN} weight
/// matrices (desk-scale oracle).
pub fn exact_elbo(
    eta: &Array2<f64>,
    dataset: &Dataset,
    prior: &PriorSpec,
    beta: f64,
    caps: &EnumCaps,
) -> Result<f64> {
    let (m, n) = eta.dim();
    check_caps(m, n, caps)?;
    let lls = all_log_likelihoods(dataset, m, n, beta, caps)?;
    let mut expected = 0.0;
    for (idx, &ll) in lls.iter().enumerate() {
        let q: f64 = config_factors(idx, eta).iter().product();
        if q > 0.0 {
            expected += q * ll;
        }
    }
    Ok(expected - kl_to_prior(eta, prior))
}

/// Exact gradient of the ELBO with respect to η by enumeration:
/// ∂/∂η_{μi} E_q[log L] = Σ_W (w_{μi}/2) Π_{(ν,j)≠(μ,i)} q_{νj}(w_{νj}) · log L(W),
/// minus ∇_η KL.
pub fn exact_elbo_grad(
    eta: &Array2<f64>,
    dataset: &Dataset,
    prior: &PriorSpec,
    beta: f64,
    caps: &EnumCaps,
) -> Result<Array2<f64>> {
    let (m, n) = eta.dim();
    check_caps(m, n, caps)?;
    let lls = all_log_likelihoods(dataset, m, n, beta, caps)?;
    let mut grad = Array2::zeros((m, n));
    for (idx, &ll) in lls.iter().enumerate() {
        let factors = config_factors(idx, eta);
        let zeros = factors.iter().filter(|&&f| f == 0.0).count();
        if zeros >= 2 {
            continue;
        }
        let nonzero_prod: f64 = factors.iter().filter(|&&f| f != 0.0).product();
        for k in 0..m * n {
            // product of all factors except the k-th
            let excl = match zeros {
                0 => nonzero_prod / factors[k],
                _ => {
                    if factors[k] == 0.0 {
                        nonzero_prod
                    } else {
                        continue;
                    }
                }
            };
            let w = if (idx >> k) & 1 == 1 { 1.0 } else { -1.0 };
            grad[(k / n, k % n)] += (w / 2.0) * excl * ll;
        }
    }
    Ok(grad - kl_grad(eta, prior)?)
}

/// Exact likelihood part of the ELBO gradient (without the KL term);
/// comparison target for the Monte-Carlo estimator.
pub fn exact_loglik_grad(
    eta: &Array2<f64>,
    dataset: &Dataset,
    beta: f64,
    caps: &EnumCaps,
) -> Result<Array2<f64>> {
    let (m, n) = eta.dim();
    check_caps(m, n, caps)?;
    let prior = PriorSpec::uniform(m, n);
    let full = exact_elbo_grad(eta, dataset, &prior, beta, caps)?;
    Ok(full + kl_grad(eta, &prior)?)
}
