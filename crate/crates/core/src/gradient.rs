//! Monte-Carlo estimator of the expected log-likelihood and its gradient
//! with respect to the expectation parameters η, built on the Gaussian
//! approximation of the receptive fields and the message-passing
//! magnetizations, with a swappable exact mode for desk-scale checks.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::ln_cosh;
use crate::model::{exact_log_partition, Dataset, EnumCaps};
use crate::msgpass::{
    bethe_log_partition, magnetizations, mp_fixed_point, EquivalentRbm, Magnetizations,
    MessageState, MpSettings, QuadratureSpec,
};
use crate::rng::stream_rng;
use crate::variational::{kl_to_prior, PriorSpec};

/// Floor applied to Ξ_μ inside divisions; a saturated η row drives Ξ to 0.
pub const XI_FLOOR: f64 = 1e-6;

/// Gaussian summary of the receptive fields under q: per-sample means
/// G_μ^a = (1/√N) Σ_i η_{μi} v_i^a and shared variance
/// Ξ_μ² = (1/N) Σ_i (1 − η_{μi}²).
#[derive(Debug, Clone)]
pub struct ReceptiveFieldStats {
    pub g: Array2<f64>,
    pub xi: Array1<f64>,
    pub xi2: Array1<f64>,
}

pub fn receptive_stats(eta: &Array2<f64>, dataset: &Dataset) -> Result<ReceptiveFieldStats> {
    let (m, n) = eta.dim();
    if dataset.num_visible() != n {
        return Err(Error::DimensionMismatch(format!(
            "receptive_stats: dataset has N={}, eta has N={n}",
            dataset.num_visible()
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let g = dataset.samples.dot(&eta.t()) * scale;
    let xi2 = Array1::from_shape_fn(m, |mu| {
        eta.row(mu).iter().map(|e| 1.0 - e * e).sum::<f64>() / n as f64
    });
    let xi = xi2.mapv(f64::sqrt);
    Ok(ReceptiveFieldStats { g, xi, xi2 })
}

/// Standard-normal draws for the two Monte-Carlo terms, on independent
/// streams derived from the seed.
#[derive(Debug, Clone)]
pub struct NoiseDraws {
    pub z1: Array2<f64>,
    pub z2: Array2<f64>,
    pub seed: u64,
}

impl NoiseDraws {
    pub fn draw(s1: usize, s2: usize, m: usize, seed: u64, stream_id: u64) -> Self {
        let mut rng = stream_rng(seed, stream_id);
        let z1 = Array2::from_shape_fn((s1, m), |_| rng.sample(StandardNormal));
        let z2 = Array2::from_shape_fn((s2, m), |_| rng.sample(StandardNormal));
        NoiseDraws { z1, z2, seed }
    }

    pub fn s1(&self) -> usize {
        self.z1.nrows()
    }

    pub fn s2(&self) -> usize {
        self.z2.nrows()
    }
}

/// Backend used for the log partition function of the equivalent RBM.
#[derive(Debug, Clone)]
pub enum LogZBackend {
    /// Belief propagation plus the Bethe readout.
    Bethe {
        settings: MpSettings,
        quad: QuadratureSpec,
    },
    /// Exhaustive enumeration (desk scale only).
    Exact { caps: EnumCaps },
}

impl LogZBackend {
    pub fn bethe_default() -> Self {
        LogZBackend::Bethe {
            settings: MpSettings::default(),
            quad: QuadratureSpec::default(),
        }
    }
}

/// One message-passing solve per partition-term draw, warm-started from
/// previous states when provided. Solves run in parallel over s; results
/// are collected in draw order so reductions are deterministic.
pub fn solve_partition_draws(
    eta: &Array2<f64>,
    stats: &ReceptiveFieldStats,
    draws: &NoiseDraws,
    beta: f64,
    settings: &MpSettings,
    quad: &QuadratureSpec,
    warm: Option<&[MessageState]>,
) -> Result<Vec<(MessageState, Magnetizations)>> {
    let s2 = draws.s2();
    (0..s2)
        .into_par_iter()
        .map(|s| {
            let fields = Array1::from_shape_fn(stats.xi.len(), |mu| {
                stats.xi[mu] * draws.z2[(s, mu)]
            });
            let rbm = EquivalentRbm::new(eta.clone(), fields, beta)?;
            let init = warm.and_then(|w| w.get(s));
            let st = mp_fixed_point(&rbm, settings, init);
            let mags = magnetizations(&rbm, &st, quad);
            Ok((st, mags))
        })
        .collect()
}

/// Monte-Carlo ELBO estimate:
/// (1/S₁) Σ_{a,μ,s} log cosh(β G_μ^a + β Ξ_μ z_μ^s)
///   − (D/S₂) Σ_s log Z(η, Ξ⊙z₂ˢ) − KL(q‖p₀).
pub fn elbo_estimate(
    eta: &Array2<f64>,
    dataset: &Dataset,
    draws: &NoiseDraws,
    backend: &LogZBackend,
    prior: &PriorSpec,
    beta: f64,
) -> Result<f64> {
    let stats = receptive_stats(eta, dataset)?;
    let m = eta.nrows();
    let mut data_term = 0.0;
    for a in 0..dataset.len() {
        for mu in 0..m {
            for s in 0..draws.s1() {
                data_term +=
                    ln_cosh(beta * stats.g[(a, mu)] + beta * stats.xi[mu] * draws.z1[(s, mu)]);
            }
        }
    }
    data_term /= draws.s1() as f64;

    let d = dataset.len() as f64;
    let mut partition_term = 0.0;
    if d > 0.0 {
        let log_zs: Vec<f64> = match backend {
            LogZBackend::Bethe { settings, quad } => {
                let _ = quad;
                (0..draws.s2())
                    .into_par_iter()
                    .map(|s| {
                        let fields =
                            Array1::from_shape_fn(m, |mu| stats.xi[mu] * draws.z2[(s, mu)]);
                        let rbm = EquivalentRbm::new(eta.clone(), fields, beta)?;
                        let st = mp_fixed_point(&rbm, settings, None);
                        Ok(bethe_log_partition(&rbm, &st).log_z)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            LogZBackend::Exact { caps } => (0..draws.s2())
                .map(|s| {
                    let fields =
                        Array1::from_shape_fn(m, |mu| stats.xi[mu] * draws.z2[(s, mu)]);
                    exact_log_partition(eta, &fields, beta, caps)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        partition_term = d / draws.s2() as f64 * log_zs.iter().sum::<f64>();
    }
    Ok(data_term - partition_term - kl_to_prior(eta, prior))
}

/// The estimator split into the three blocks of the gradient formula;
/// total = term_data − term_variance − term_partition.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub total: Array2<f64>,
    pub term_data: Array2<f64>,
    pub term_variance: Array2<f64>,
    pub term_partition: Array2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMode {
    /// Partition term from the message-passing magnetizations.
    Mp,
    /// Partition term by central finite differences of the exact log
    /// partition function (oracle; captures the Ξ(η) path as well).
    Exact,
}

/// Gradient of the expected log-likelihood with respect to η.
///
/// In `Mp` mode `mags_per_s[s]` must come from the equivalent RBM with
/// fields Ξ ⊙ z₂ˢ. Ξ_μ is clamped below at `xi_floor` inside the division
/// of the partition term; the number of clamped rows is reported.
#[allow(clippy::too_many_arguments)]
pub fn loglik_grad(
    eta: &Array2<f64>,
    dataset: &Dataset,
    draws: &NoiseDraws,
    mags_per_s: Option<&[Magnetizations]>,
    stats: &ReceptiveFieldStats,
    beta: f64,
    mode: GradMode,
    caps: &EnumCaps,
    xi_floor: f64,
) -> Result<GradientEstimate> {
    let (m, n) = eta.dim();
    let d = dataset.len() as f64;
    let s1 = draws.s1() as f64;
    let s2 = draws.s2() as f64;

    let mut term_data = Array2::zeros((m, n));
    let mut term_variance = Array2::zeros((m, n));
    for a in 0..dataset.len() {
        for mu in 0..m {
            let mut t_sum = 0.0;
            let mut sech_sum = 0.0;
            for s in 0..draws.s1() {
                let arg = beta * stats.g[(a, mu)] + beta * stats.xi[mu] * draws.z1[(s, mu)];
                let t = arg.tanh();
                t_sum += t;
                sech_sum += 1.0 - t * t;
            }
            for i in 0..n {
                term_data[(mu, i)] += dataset.samples[(a, i)] * t_sum;
                term_variance[(mu, i)] += eta[(mu, i)] * sech_sum;
            }
        }
    }
    term_data *= beta / (s1 * (n as f64).sqrt());
    term_variance *= beta * beta / (s1 * n as f64);

    let term_partition = match mode {
        GradMode::Mp => {
            let mags = mags_per_s.ok_or_else(|| {
                Error::InvalidArgument("loglik_grad: Mp mode requires magnetizations".into())
            })?;
            if mags.len() != draws.s2() {
                return Err(Error::InvalidArgument(format!(
                    "loglik_grad: {} magnetization sets for S2={}",
                    mags.len(),
                    draws.s2()
                )));
            }
            let mut out = Array2::zeros((m, n));
            for (s, mg) in mags.iter().enumerate() {
                for mu in 0..m {
                    let xi = stats.xi[mu].max(xi_floor);
                    for i in 0..n {
                        out[(mu, i)] += mg.c[(mu, i)]
                            - eta[(mu, i)] * draws.z2[(s, mu)] / ((n as f64).sqrt() * xi)
                                * mg.m_hat[mu];
                    }
                }
            }
            out * (d * beta / (s2 * (n as f64).sqrt()))
        }
        GradMode::Exact => {
            // central differences of (D/S2) Σ_s log Z(η, Ξ(η)⊙z2[s]) in η
            let step = 1e-5;
            let eval = |eta_p: &Array2<f64>| -> Result<f64> {
                let xi = Array1::from_shape_fn(m, |mu| {
                    (eta_p.row(mu).iter().map(|e| 1.0 - e * e).sum::<f64>() / n as f64).sqrt()
                });
                let mut total = 0.0;
                for s in 0..draws.s2() {
                    let fields = Array1::from_shape_fn(m, |mu| xi[mu] * draws.z2[(s, mu)]);
                    total += exact_log_partition(eta_p, &fields, beta, caps)?;
                }
                Ok(d / s2 * total)
            };
            let mut out = Array2::zeros((m, n));
            if d > 0.0 {
                for mu in 0..m {
                    for i in 0..n {
                        let mut plus = eta.clone();
                        plus[(mu, i)] += step;
                        let mut minus = eta.clone();
                        minus[(mu, i)] -= step;
                        out[(mu, i)] = (eval(&plus)? - eval(&minus)?) / (2.0 * step);
                    }
                }
            }
            out
        }
    };
    let total = &term_data - &term_variance - &term_partition;
    Ok(GradientEstimate {
        total,
        term_data,
        term_variance,
        term_partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_teacher_student;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn receptive_stats_examples() {
        let data = Dataset::new(array![[1.0, 1.0, 1.0, 1.0]]).unwrap();
        let eta = Array2::zeros((2, 4));
        let st = receptive_stats(&eta, &data).unwrap();
        assert!(st.g.iter().all(|x| *x == 0.0));
        assert!(st.xi.iter().all(|x| *x == 1.0));

        let eta = array![[0.5, -0.5, 0.5, -0.5]];
        let st = receptive_stats(&eta, &data).unwrap();
        assert_abs_diff_eq!(st.g[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.xi2[0], 0.75, epsilon = 1e-15);

        let eta = array![[1.0, -1.0, 1.0, 1.0]];
        let st = receptive_stats(&eta, &data).unwrap();
        assert_abs_diff_eq!(st.xi[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.g[(0, 0)], 2.0 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn noise_draws_deterministic() {
        let a = NoiseDraws::draw(3, 4, 2, 5, 9);
        let b = NoiseDraws::draw(3, 4, 2, 5, 9);
        assert_eq!(a.z1, b.z1);
        assert_eq!(a.z2, b.z2);
        let c = NoiseDraws::draw(3, 4, 2, 5, 10);
        assert_ne!(a.z1, c.z1);
    }

    #[test]
    fn elbo_estimate_no_data_is_minus_kl() {
        let prior = PriorSpec::uniform(2, 3);
        let eta = array![[0.2, -0.1, 0.4], [0.0, 0.3, -0.5]];
        let draws = NoiseDraws::draw(5, 5, 2, 1, 2);
        let backend = LogZBackend::Exact {
            caps: EnumCaps::default(),
        };
        let v = elbo_estimate(&eta, &Dataset::empty(3), &draws, &backend, &prior, 1.0).unwrap();
        assert_abs_diff_eq!(v, -kl_to_prior(&eta, &prior), epsilon = 1e-12);
    }

    #[test]
    fn elbo_estimate_degenerate_eta_is_exact_likelihood() {
        // eta = ±1 kills the noise terms; estimate equals the plug-in likelihood
        let caps = EnumCaps::default();
        let (teacher, data) = generate_teacher_student(4, 1, 6, 1.0, 3).unwrap();
        let eta = teacher.weights.clone();
        let prior = PriorSpec::uniform(1, 4);
        let draws = NoiseDraws::draw(7, 7, 1, 2, 3);
        let backend = LogZBackend::Exact { caps };
        let v = elbo_estimate(&eta, &data, &draws, &backend, &prior, 1.0).unwrap();
        let ll = crate::model::log_likelihood(&teacher.weights, &data, 1.0, &caps).unwrap();
        let kl = kl_to_prior(&eta, &prior);
        assert_abs_diff_eq!(v, ll - kl, epsilon = 1e-10);
    }

    #[test]
    fn gradient_vanishes_at_zero_temperature() {
        let (_, data) = generate_teacher_student(5, 2, 4, 1.0, 1).unwrap();
        let eta = Array2::from_elem((2, 5), 0.2);
        let stats = receptive_stats(&eta, &data).unwrap();
        let draws = NoiseDraws::draw(4, 4, 2, 1, 2);
        let beta = 1e-300;
        let solves = solve_partition_draws(
            &eta,
            &stats,
            &draws,
            beta,
            &MpSettings::default(),
            &QuadratureSpec::default(),
            None,
        )
        .unwrap();
        let mags: Vec<_> = solves.into_iter().map(|(_, mg)| mg).collect();
        let g = loglik_grad(
            &eta,
            &data,
            &draws,
            Some(&mags),
            &stats,
            beta,
            GradMode::Mp,
            &EnumCaps::default(),
            XI_FLOOR,
        )
        .unwrap();
        assert!(g.term_data.iter().all(|x| x.abs() < 1e-250));
        assert!(g.term_variance.iter().all(|x| x.abs() < 1e-250));
        assert!(g.term_partition.iter().all(|x| x.abs() < 1e-250));
    }

    #[test]
    fn stein_identity_scalar() {
        // E[z tanh(a + bz)] = b E[1 - tanh²(a + bz)] within 3 MC standard errors
        let (a, b) = (0.4, 0.8);
        let n = 100_000usize;
        let mut rng = stream_rng(77, 1);
        let mut lhs = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let t = (a + b * z).tanh();
            lhs.push(z * t);
            rhs.push(b * (1.0 - t * t));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64], mu: f64| {
            v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let (ml, mr) = (mean(&lhs), mean(&rhs));
        let se = ((var(&lhs, ml) + var(&rhs, mr)) / n as f64).sqrt();
        assert!(
            (ml - mr).abs() <= 3.0 * se,
            "lhs {ml} rhs {mr} se {se}"
        );
    }

    #[test]
    fn data_term_correlates_with_teacher() {
        // at eta slightly aligned with the teacher the data term keeps
        // pointing toward it (at eta = 0 exactly the term is zero-mean noise,
        // since G vanishes and tanh(βΞz) is symmetric in z)
        let mut corr_sum = 0.0;
        for seed in 0..20 {
            let (teacher, data) = generate_teacher_student(20, 2, 100, 1.0, 200 + seed).unwrap();
            let eta = teacher.weights.mapv(|w| 0.2 * w);
            let stats = receptive_stats(&eta, &data).unwrap();
            let draws = NoiseDraws::draw(10, 10, 2, seed, 5);
            let solves = solve_partition_draws(
                &eta,
                &stats,
                &draws,
                1.0,
                &MpSettings::default(),
                &QuadratureSpec::default(),
                None,
            )
            .unwrap();
            let mags: Vec<_> = solves.into_iter().map(|(_, mg)| mg).collect();
            let g = loglik_grad(
                &eta,
                &data,
                &draws,
                Some(&mags),
                &stats,
                1.0,
                GradMode::Mp,
                &EnumCaps::default(),
                XI_FLOOR,
            )
            .unwrap();
            let corr: f64 = g
                .term_data
                .iter()
                .zip(teacher.weights.iter())
                .map(|(g, w)| g * w)
                .sum();
            corr_sum += corr / (2.0 * 20.0);
        }
        assert!(corr_sum / 20.0 > 0.0, "mean correlation {}", corr_sum / 20.0);
    }

    #[test]
    fn mp_mode_requires_magnetizations() {
        let data = Dataset::new(array![[1.0, -1.0]]).unwrap();
        let eta = Array2::zeros((1, 2));
        let stats = receptive_stats(&eta, &data).unwrap();
        let draws = NoiseDraws::draw(2, 2, 1, 1, 1);
        let err = loglik_grad(
            &eta,
            &data,
            &draws,
            None,
            &stats,
            1.0,
            GradMode::Mp,
            &EnumCaps::default(),
            XI_FLOOR,
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
