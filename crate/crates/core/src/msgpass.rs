//! Belief propagation on the equivalent RBM (weights η_{μi}/√N, hidden
//! fields H_μ), the derived magnetization block, and a Bethe estimate of
//! the log partition function.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::math::ln_cosh;

/// The surrogate model whose partition function the estimator needs:
/// p(v) ∝ Π_μ cosh(β((1/√N) Σ_i η_{μi} v_i + H_μ)).
#[derive(Debug, Clone)]
pub struct EquivalentRbm {
    pub eta: Array2<f64>,
    pub fields: Array1<f64>,
    pub beta: f64,
}

impl EquivalentRbm {
    pub fn new(eta: Array2<f64>, fields: Array1<f64>, beta: f64) -> Result<Self> {
        if fields.len() != eta.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "EquivalentRbm: {} hidden rows but {} fields",
                eta.nrows(),
                fields.len()
            )));
        }
        if let Some(e) = eta.iter().find(|e| e.abs() > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "EquivalentRbm: |eta| <= 1 required, found {e}"
            )));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
        }
        Ok(EquivalentRbm { eta, fields, beta })
    }
}

/// Directed messages on the dense bipartite graph. Entry (μ, i) of
/// `m_v2h` is m_{i→μ} and of `u_h2v` is u_{μ→i}.
#[derive(Debug, Clone)]
pub struct MessageState {
    pub m_v2h: Array2<f64>,
    pub u_h2v: Array2<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl MessageState {
    pub fn zeros(m: usize, n: usize) -> Self {
        MessageState {
            m_v2h: Array2::zeros((m, n)),
            u_h2v: Array2::zeros((m, n)),
            converged: false,
            iterations: 0,
            residual: f64::INFINITY,
        }
    }
}

/// Fixed-point controls: synchronous sweeps with damping on u.
#[derive(Debug, Clone, Copy)]
pub struct MpSettings {
    pub damping: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for MpSettings {
    fn default() -> Self {
        MpSettings {
            damping: 0.5,
            tol: 1e-8,
            max_iters: 500,
        }
    }
}

/// Iterate
///   m_{i→μ} = tanh(Σ_{ν≠μ} u_{ν→i}),
///   u_{μ→i} = atanh(tanh(β χ_{μ→i} + β H_μ) · tanh(β η_{μi}/√N)),
/// with χ_{μ→i} = (1/√N) Σ_{j≠i} η_{μj} m_{j→μ}, damping the u update,
/// until the max-abs message change drops below tol. Non-convergence is
/// reported in the returned state, not an error.
pub fn mp_fixed_point(
    rbm: &EquivalentRbm,
    settings: &MpSettings,
    init: Option<&MessageState>,
) -> MessageState {
    let (m, n) = rbm.eta.dim();
    let beta = rbm.beta;
    let scale = 1.0 / (n as f64).sqrt();
    let mut state = match init {
        Some(s) => s.clone(),
        None => MessageState::zeros(m, n),
    };
    let d = settings.damping;
    let mut m_new = Array2::zeros((m, n));
    for iter in 1..=settings.max_iters {
        // column sums of u give the full local field at each visible unit
        let mut u_col_sum = vec![0.0f64; n];
        for mu in 0..m {
            for i in 0..n {
                u_col_sum[i] += state.u_h2v[(mu, i)];
            }
        }
        let mut residual = 0.0f64;
        for mu in 0..m {
            for i in 0..n {
                let v = (u_col_sum[i] - state.u_h2v[(mu, i)]).tanh();
                residual = residual.max((v - state.m_v2h[(mu, i)]).abs());
                m_new[(mu, i)] = v;
            }
        }
        for mu in 0..m {
            let row_sum: f64 = rbm
                .eta
                .row(mu)
                .iter()
                .zip(m_new.row(mu).iter())
                .map(|(e, mm)| e * mm)
                .sum();
            for i in 0..n {
                let chi = scale * (row_sum - rbm.eta[(mu, i)] * m_new[(mu, i)]);
                let prod = (beta * chi + beta * rbm.fields[mu]).tanh()
                    * (beta * rbm.eta[(mu, i)] * scale).tanh();
                debug_assert!(prod.abs() < 1.0);
                let cand = prod.atanh();
                let u = (1.0 - d) * cand + d * state.u_h2v[(mu, i)];
                residual = residual.max((u - state.u_h2v[(mu, i)]).abs());
                state.u_h2v[(mu, i)] = u;
            }
        }
        state.m_v2h.assign(&m_new);
        state.iterations = iter;
        state.residual = residual;
        if residual <= settings.tol {
            state.converged = true;
            return state;
        }
    }
    state.converged = false;
    state
}

/// Probabilists' Gauss-Hermite rule for ∫ Dz f(a + b z),
/// Dz = e^{-z²/2}/√(2π) dz.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    rule: GaussHermite,
    pub nodes: usize,
}

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Self {
        QuadratureSpec {
            rule: GaussHermite::new(NonZeroUsize::new(nodes.max(1)).unwrap()),
            nodes,
        }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        // physicists' weight e^{-x²}: substitute z = √2 x
        let sqrt2 = std::f64::consts::SQRT_2;
        self.rule.integrate(|x| f(sqrt2 * x)) / std::f64::consts::PI.sqrt()
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::new(32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhIntegrand {
    Tanh,
    TanhSq,
}

/// ∫ Dz f(a + b·z) with f = tanh or tanh².
pub fn gauss_hermite_expect(a: f64, b: f64, which: GhIntegrand, quad: &QuadratureSpec) -> f64 {
    if b == 0.0 {
        return match which {
            GhIntegrand::Tanh => a.tanh(),
            GhIntegrand::TanhSq => a.tanh().powi(2),
        };
    }
    match which {
        GhIntegrand::Tanh => quad.expect(|z| (a + b * z).tanh()),
        GhIntegrand::TanhSq => quad.expect(|z| (a + b * z).tanh().powi(2)),
    }
}

/// Single-site quantities derived from a converged message state.
#[derive(Debug, Clone)]
pub struct Magnetizations {
    /// Visible magnetizations m_i = tanh(Σ_μ u_{μ→i}).
    pub m_i: Array1<f64>,
    /// Hidden magnetizations m̂_μ.
    pub m_hat: Array1<f64>,
    /// B_μ = 1 − ∫Dz tanh²(·).
    pub b: Array1<f64>,
    /// χ̃_μ = (1/√N) Σ_j η_{μj} m_j.
    pub chi_tilde: Array1<f64>,
    /// Λ̃_μ = (1/N) Σ_i η_{μi}² (1 − m_i²).
    pub lambda_tilde: Array1<f64>,
    /// C_{μi} = m̂_μ m_i + β (η_{μi}/√N)(1 − m_i²) B_μ.
    pub c: Array2<f64>,
}

/// Evaluate the magnetization block at a message fixed point. The Gaussian
/// integrals use the standard deviation √Λ̃_μ inside the argument.
pub fn magnetizations(
    rbm: &EquivalentRbm,
    state: &MessageState,
    quad: &QuadratureSpec,
) -> Magnetizations {
    let (m, n) = rbm.eta.dim();
    let beta = rbm.beta;
    let scale = 1.0 / (n as f64).sqrt();
    let mut m_i = Array1::zeros(n);
    for i in 0..n {
        let total: f64 = (0..m).map(|mu| state.u_h2v[(mu, i)]).sum();
        m_i[i] = total.tanh();
    }
    let mut m_hat = Array1::zeros(m);
    let mut b = Array1::zeros(m);
    let mut chi_tilde = Array1::zeros(m);
    let mut lambda_tilde = Array1::zeros(m);
    let mut c = Array2::zeros((m, n));
    for mu in 0..m {
        let chi: f64 = (0..n).map(|i| rbm.eta[(mu, i)] * m_i[i]).sum::<f64>() * scale;
        let lam: f64 = (0..n)
            .map(|i| rbm.eta[(mu, i)].powi(2) * (1.0 - m_i[i].powi(2)))
            .sum::<f64>()
            / n as f64;
        chi_tilde[mu] = chi;
        lambda_tilde[mu] = lam;
        let a = beta * chi + beta * rbm.fields[mu];
        let width = beta * lam.max(0.0).sqrt();
        m_hat[mu] = gauss_hermite_expect(a, width, GhIntegrand::Tanh, quad);
        b[mu] = 1.0 - gauss_hermite_expect(a, width, GhIntegrand::TanhSq, quad);
        for i in 0..n {
            c[(mu, i)] = m_hat[mu] * m_i[i]
                + beta * rbm.eta[(mu, i)] * scale * (1.0 - m_i[i].powi(2)) * b[mu];
        }
    }
    Magnetizations {
        m_i,
        m_hat,
        b,
        chi_tilde,
        lambda_tilde,
        c,
    }
}

/// Bethe log partition estimate with a warning flag carried over from the
/// message state.
#[derive(Debug, Clone, Copy)]
pub struct BetheEstimate {
    pub log_z: f64,
    pub converged: bool,
}

/// Bethe free-energy readout of the converged messages:
/// log Z = Σ_μ log Z_μ + Σ_i log Z_i − Σ_{(μ,i)} log Z_{μi}, where the
/// factor term closes the cavity average with a Gaussian,
/// ∫Dz cosh(a + bz) = e^{b²/2} cosh(a):
///   log Z_μ = log cosh(β χ_μ^cav + β H_μ) + β² Λ_μ^cav / 2,
///   log Z_i = log 2cosh(Σ_μ u_{μ→i}),
///   log Z_{μi} = log(cosh u_{μ→i} + m_{i→μ} sinh u_{μ→i}).
pub fn bethe_log_partition(rbm: &EquivalentRbm, state: &MessageState) -> BetheEstimate {
    let (m, n) = rbm.eta.dim();
    let beta = rbm.beta;
    let scale = 1.0 / (n as f64).sqrt();
    let mut log_z = 0.0;
    for mu in 0..m {
        let chi_cav: f64 = (0..n)
            .map(|i| rbm.eta[(mu, i)] * state.m_v2h[(mu, i)])
            .sum::<f64>()
            * scale;
        let lam_cav: f64 = (0..n)
            .map(|i| rbm.eta[(mu, i)].powi(2) * (1.0 - state.m_v2h[(mu, i)].powi(2)))
            .sum::<f64>()
            / n as f64;
        log_z += ln_cosh(beta * chi_cav + beta * rbm.fields[mu]) + 0.5 * beta * beta * lam_cav;
    }
    for i in 0..n {
        let field: f64 = (0..m).map(|mu| state.u_h2v[(mu, i)]).sum();
        log_z += std::f64::consts::LN_2 + ln_cosh(field);
    }
    for mu in 0..m {
        for i in 0..n {
            let u = state.u_h2v[(mu, i)];
            log_z -= ln_cosh(u) + (state.m_v2h[(mu, i)] * u.tanh()).ln_1p();
        }
    }
    BetheEstimate {
        log_z,
        converged: state.converged,
    }
}
