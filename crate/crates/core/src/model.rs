//! Binary-synapse RBM, exact desk-scale oracles for its partition function
//! and evidence, and synthetic teacher-student data generation.
//!
//! The energy of a configuration is
//! `E(v,h) = -(1/sqrt(N)) Σ_{μi} w_{μi} h_μ v_i - Σ_i b_i v_i - Σ_μ c_μ h_μ`,
//! with the 1/sqrt(N) coupling scale chosen so that marginalizing the hidden
//! layer gives `p(v) ∝ Π_μ cosh(β X_μ)` with the receptive field
//! `X_μ = (1/sqrt(N)) Σ_i w_{μi} v_i`.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{ln_cosh, logsumexp};
use crate::rng::{stream, stream_rng};

/// Cost caps for the exact enumeration oracles. Enumeration over visible
/// states costs 2^N and over weight matrices 2^{MN}.
#[derive(Debug, Clone, Copy)]
pub struct EnumCaps {
    pub max_visible: usize,
    pub max_weights: usize,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_visible: 20,
            max_weights: 16,
        }
    }
}

/// RBM with M hidden and N visible ±1 units. Weight entries are ±1 for a
/// true binary model; real entries are admitted so the same type serves the
/// equivalent RBM whose weights are posterior means.
#[derive(Debug, Clone)]
pub struct RbmModel {
    pub weights: Array2<f64>,
    pub beta: f64,
    pub hidden_bias: Array1<f64>,
    pub visible_bias: Array1<f64>,
}

impl RbmModel {
    pub fn new(weights: Array2<f64>, beta: f64) -> Result<Self> {
        let (m, n) = weights.dim();
        if m < 1 || n < 1 {
            return Err(Error::InvalidArgument(format!(
                "need M >= 1 and N >= 1, got M={m}, N={n}"
            )));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
        }
        Ok(RbmModel {
            hidden_bias: Array1::zeros(m),
            visible_bias: Array1::zeros(n),
            weights,
            beta,
        })
    }

    /// Construct a binary model, checking every weight is exactly ±1.
    pub fn binary(weights: Array2<f64>, beta: f64) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| w.abs() != 1.0) {
            return Err(Error::InvalidArgument(format!(
                "binary model requires weights in {{-1,+1}}, found {w}"
            )));
        }
        Self::new(weights, beta)
    }

    pub fn num_hidden(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_visible(&self) -> usize {
        self.weights.ncols()
    }
}

/// D samples of N visible units, entries exactly ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Array2<f64>,
}

impl Dataset {
    pub fn new(samples: Array2<f64>) -> Result<Self> {
        if let Some(v) = samples.iter().find(|v| v.abs() != 1.0) {
            return Err(Error::InvalidArgument(format!(
                "dataset entries must be ±1, found {v}"
            )));
        }
        Ok(Dataset { samples })
    }

    pub fn empty(n: usize) -> Self {
        Dataset {
            samples: Array2::zeros((0, n)),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_visible(&self) -> usize {
        self.samples.ncols()
    }
}

/// E(v,h) for one joint configuration.
pub fn energy(model: &RbmModel, v: &Array1<f64>, h: &Array1<f64>) -> Result<f64> {
    let (m, n) = model.weights.dim();
    if v.len() != n || h.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "energy: expected v of length {n} and h of length {m}, got {} and {}",
            v.len(),
            h.len()
        )));
    }
    let coupling: f64 = model.weights.dot(v).dot(h) / (n as f64).sqrt();
    Ok(-coupling - model.visible_bias.dot(v) - model.hidden_bias.dot(h))
}

/// log of the unnormalized marginal weight of `v` after summing out the
/// hidden layer: Σ_μ log cosh(β X_μ). Zero biases assumed.
pub fn unnormalized_log_marginal(model: &RbmModel, v: &Array1<f64>) -> Result<f64> {
    let n = model.num_visible();
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "log_marginal: expected v of length {n}, got {}",
            v.len()
        )));
    }
    let fields = model.weights.dot(v) / (n as f64).sqrt();
    Ok(fields.iter().map(|&x| ln_cosh(model.beta * x)).sum())
}

/// Fill ±1 spins for state index `idx` (bit k ⇒ spin k).
fn spins_from_index(idx: usize, out: &mut [f64]) {
    for (k, s) in out.iter_mut().enumerate() {
        *s = if (idx >> k) & 1 == 1 { 1.0 } else { -1.0 };
    }
}

/// log Σ_v Π_μ cosh(β((1/sqrt(N)) Σ_i w_{μi} v_i + H_μ)) by exhaustive
/// enumeration of the 2^N visible states, reduced in log-space.
///
/// Enumeration is chunked and the chunks processed in parallel; chunk
/// boundaries are fixed so the result is identical at any thread count.
pub fn exact_log_partition(
    weights: &Array2<f64>,
    hidden_fields: &Array1<f64>,
    beta: f64,
    caps: &EnumCaps,
) -> Result<f64> {
    let (m, n) = weights.dim();
    if hidden_fields.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "exact_log_partition: expected {m} hidden fields, got {}",
            hidden_fields.len()
        )));
    }
    if n > caps.max_visible {
        return Err(Error::Capacity(format!(
            "exact_log_partition: N={n} exceeds cap {}",
            caps.max_visible
        )));
    }
    let states = 1usize << n;
    let scale = 1.0 / (n as f64).sqrt();
    let log_term = |idx: usize| {
        let mut v = vec![0.0; n];
        spins_from_index(idx, &mut v);
        (0..m)
            .map(|mu| {
                let x: f64 = weights.row(mu).iter().zip(&v).map(|(w, s)| w * s).sum();
                ln_cosh(beta * (scale * x + hidden_fields[mu]))
            })
            .sum::<f64>()
    };
    const CHUNK: usize = 1 << 10;
    let chunk_sums: Vec<f64> = (0..states)
        .into_par_iter()
        .chunks(CHUNK)
        .map(|chunk| logsumexp(&chunk.into_iter().map(log_term).collect::<Vec<_>>()))
        .collect();
    Ok(logsumexp(&chunk_sums))
}

/// log likelihood of the dataset under one fixed weight matrix,
/// log p(D|W) = Σ_a Σ_μ log cosh(β X_μ^a) − D log Z(W).
pub fn log_likelihood(
    weights: &Array2<f64>,
    dataset: &Dataset,
    beta: f64,
    caps: &EnumCaps,
) -> Result<f64> {
    let model = RbmModel::new(weights.clone(), beta)?;
    let zeros = Array1::zeros(weights.nrows());
    let log_z = exact_log_partition(weights, &zeros, beta, caps)?;
    let mut total = 0.0;
    for sample in dataset.samples.rows() {
        total += unnormalized_log_marginal(&model, &sample.to_owned())?;
    }
    Ok(total - dataset.len() as f64 * log_z)
}

/// log p(D) = log Σ_W p(D|W) p0(W) by enumeration of all 2^{MN} binary
/// weight matrices, combined in log-space.
pub fn exact_log_evidence(
    dataset: &Dataset,
    prior_mean: &Array2<f64>,
    beta: f64,
    caps: &EnumCaps,
) -> Result<f64> {
    let (m, n) = prior_mean.dim();
    if dataset.num_visible() != n {
        return Err(Error::DimensionMismatch(format!(
            "exact_log_evidence: dataset has N={}, prior has N={n}",
            dataset.num_visible()
        )));
    }
    if m * n > caps.max_weights {
        return Err(Error::Capacity(format!(
            "exact_log_evidence: M*N={} exceeds cap {}",
            m * n,
            caps.max_weights
        )));
    }
    let configs = 1usize << (m * n);
    let mut terms = Vec::with_capacity(configs);
    let mut flat = vec![0.0; m * n];
    for idx in 0..configs {
        spins_from_index(idx, &mut flat);
        let w = Array2::from_shape_vec((m, n), flat.clone()).expect("shape");
        // prior mass Π (1 + w·m)/2 in log space; zero mass contributes -inf
        let log_prior: f64 = w
            .iter()
            .zip(prior_mean.iter())
            .map(|(wi, mi)| ((1.0 + wi * mi) / 2.0).ln())
            .sum();
        if log_prior == f64::NEG_INFINITY {
            terms.push(f64::NEG_INFINITY);
            continue;
        }
        terms.push(log_prior + log_likelihood(&w, dataset, beta, caps)?);
    }
    Ok(logsumexp(&terms))
}

/// Block-Gibbs sampler for a binary RBM: alternate h|v and v|h, each unit
/// flipped to +1 with probability (1+tanh(β·field))/2. Deterministic given
/// the seed.
pub fn gibbs_sample(
    model: &RbmModel,
    n_samples: usize,
    burn_in_sweeps: usize,
    thin: usize,
    seed: u64,
) -> Result<Dataset> {
    let (m, n) = model.weights.dim();
    let scale = 1.0 / (n as f64).sqrt();
    let beta = model.beta;
    let mut rng = stream_rng(seed, stream::GIBBS_CHAIN);
    let mut v = Array1::from_elem(n, 0.0);
    for vi in v.iter_mut() {
        *vi = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let mut h = Array1::zeros(m);
    let sweep = |v: &mut Array1<f64>, h: &mut Array1<f64>, rng: &mut rand_chacha::ChaCha12Rng| {
        let hidden_fields = model.weights.dot(&*v) * scale;
        for (hmu, &f) in h.iter_mut().zip(hidden_fields.iter()) {
            let p_up = 0.5 * (1.0 + (beta * f).tanh());
            *hmu = if rng.random::<f64>() < p_up { 1.0 } else { -1.0 };
        }
        let visible_fields = model.weights.t().dot(&*h) * scale;
        for (vi, &f) in v.iter_mut().zip(visible_fields.iter()) {
            let p_up = 0.5 * (1.0 + (beta * f).tanh());
            *vi = if rng.random::<f64>() < p_up { 1.0 } else { -1.0 };
        }
    };
    for _ in 0..burn_in_sweeps {
        sweep(&mut v, &mut h, &mut rng);
    }
    let mut samples = Array2::zeros((n_samples, n));
    for a in 0..n_samples {
        for _ in 0..thin.max(1) {
            sweep(&mut v, &mut h, &mut rng);
        }
        samples.row_mut(a).assign(&v);
    }
    Dataset::new(samples)
}

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_THIN: usize = 10;

/// Draw a random ±1 teacher and sample a dataset from it.
pub fn generate_teacher_student(
    n: usize,
    m: usize,
    d: usize,
    beta: f64,
    seed: u64,
) -> Result<(RbmModel, Dataset)> {
    if n < 1 || m < 1 || d < 1 {
        return Err(Error::InvalidArgument(format!(
            "generate_teacher_student: need N, M, D >= 1, got N={n}, M={m}, D={d}"
        )));
    }
    let mut rng = stream_rng(seed, stream::TEACHER_WEIGHTS);
    let weights = Array2::from_shape_fn((m, n), |_| if rng.random::<bool>() { 1.0 } else { -1.0 });
    let teacher = RbmModel::binary(weights, beta)?;
    let data = gibbs_sample(&teacher, d, DEFAULT_BURN_IN, DEFAULT_THIN, seed)?;
    Ok((teacher, data))
}

/// Exact single-site visible magnetizations of the model of
/// `exact_log_partition` (enumeration oracle for the message-passing tests).
pub fn exact_visible_magnetizations(
    weights: &Array2<f64>,
    hidden_fields: &Array1<f64>,
    beta: f64,
    caps: &EnumCaps,
) -> Result<Array1<f64>> {
    let (m, n) = weights.dim();
    if n > caps.max_visible {
        return Err(Error::Capacity(format!(
            "exact_visible_magnetizations: N={n} exceeds cap {}",
            caps.max_visible
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let log_z = exact_log_partition(weights, hidden_fields, beta, caps)?;
    let mut mags = Array1::zeros(n);
    let mut v = vec![0.0; n];
    for idx in 0..(1usize << n) {
        spins_from_index(idx, &mut v);
        let log_w: f64 = (0..m)
            .map(|mu| {
                let x: f64 = weights.row(mu).iter().zip(&v).map(|(w, s)| w * s).sum();
                ln_cosh(beta * (scale * x + hidden_fields[mu]))
            })
            .sum();
        let p = (log_w - log_z).exp();
        for (mi, &s) in mags.iter_mut().zip(&v) {
            *mi += p * s;
        }
    }
    Ok(mags)
}
