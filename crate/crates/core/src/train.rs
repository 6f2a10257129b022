//! The three optimizer variants — clipped expectation-parameter ascent,
//! natural-parameter updates (no clipping), and the first-order variant
//! that recovers the clipped method — plus the training loop, trace
//! recording, and the teacher-overlap metric.

use std::time::Instant;

use itertools::Itertools;
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::gradient::{
    loglik_grad, receptive_stats, solve_partition_draws, GradMode, NoiseDraws, XI_FLOOR,
};
use crate::math::ln_cosh;
use crate::model::{exact_log_partition, Dataset, EnumCaps, RbmModel};
use crate::msgpass::{bethe_log_partition, EquivalentRbm, MessageState, MpSettings, QuadratureSpec};
use crate::rng::stream;
use crate::variational::{kl_to_prior, kl_update_term, PriorSpec, VariationalState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Gradient ascent on η with clipping to [−1, 1].
    Huang,
    /// Bayesian learning rule on λ; no clipping anywhere.
    Bayes,
    /// The Huang formula applied to λ (first-order approximation of Bayes),
    /// clipped to [−1, 1].
    BayesFirstOrder,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "huang" => Ok(Variant::Huang),
            "bayes" => Ok(Variant::Bayes),
            "bayes_first_order" => Ok(Variant::BayesFirstOrder),
            other => Err(Error::Parse(format!("unknown variant '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Huang => "huang",
            Variant::Bayes => "bayes",
            Variant::BayesFirstOrder => "bayes_first_order",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Bethe,
    Exact,
}

#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub variant: Variant,
    pub alpha: f64,
    pub s1: usize,
    pub s2: usize,
    pub beta: f64,
    pub epochs: usize,
    pub seed: u64,
    pub damping: f64,
    pub mp_tol: f64,
    pub mp_max_iters: usize,
    pub clip_bound: f64,
    pub xi_floor: f64,
    pub logz_backend: Backend,
    pub quad_nodes: usize,
    pub caps: EnumCaps,
    /// Evaluate the trace ELBO with fresh draws instead of reusing the
    /// gradient's.
    pub fresh_elbo_draws: bool,
}

impl TrainerConfig {
    pub fn new(variant: Variant) -> Self {
        TrainerConfig {
            variant,
            alpha: 0.01,
            s1: 10,
            s2: 10,
            beta: 1.0,
            epochs: 100,
            seed: 0,
            damping: 0.5,
            mp_tol: 1e-8,
            mp_max_iters: 500,
            clip_bound: 1.0,
            xi_floor: XI_FLOOR,
            logz_backend: Backend::Bethe,
            quad_nodes: 32,
            caps: EnumCaps::default(),
            fresh_elbo_draws: false,
        }
    }

    fn mp_settings(&self) -> MpSettings {
        MpSettings {
            damping: self.damping,
            tol: self.mp_tol,
            max_iters: self.mp_max_iters,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub epoch: usize,
    pub elbo: f64,
    pub overlap: f64,
    pub clip_events: usize,
    pub max_abs_lambda: f64,
    pub max_abs_eta: f64,
    pub mp_failures: usize,
    pub wall_ms: f64,
}

/// Per-iteration training record; length is epochs + 1 (initial state
/// included).
#[derive(Debug, Clone, Default)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
}

/// One clipped expectation-parameter ascent step:
/// η' = clip(η + α·[Σ_{x=±1}(x/2)(log((1+xm)/(1+xη)) − 1)] + α·g, ±bound).
pub fn huang_step(
    eta: &Array2<f64>,
    grad_loglik: &Array2<f64>,
    prior: &PriorSpec,
    alpha: f64,
    bound: f64,
) -> (Array2<f64>, usize) {
    let mut clips = 0usize;
    let mut out = Array2::zeros(eta.dim());
    for (((o, &e), &m), &g) in out
        .iter_mut()
        .zip(eta.iter())
        .zip(prior.mean.iter())
        .zip(grad_loglik.iter())
    {
        // the KL term is defined on |η| < 1 only; at an entry parked on the
        // clip boundary evaluate it just inside, so the boundary exerts a
        // strong finite pull instead of an infinite sign flip
        let e_kl = e.clamp(-(1.0 - 1e-12), 1.0 - 1e-12);
        let raw = e + alpha * kl_update_term(e_kl, m) + alpha * g;
        if raw.abs() > bound || raw.is_nan() {
            clips += 1;
            *o = if raw.is_nan() { 0.0 } else { raw.clamp(-bound, bound) };
        } else {
            *o = raw;
        }
    }
    (out, clips)
}

/// Bayesian learning rule: λ' = (1−α)λ + α(g + λ⁰), η' = tanh(λ').
pub fn bayes_step(
    state: &VariationalState,
    grad_loglik_wrt_eta: &Array2<f64>,
    prior: &PriorSpec,
    alpha: f64,
) -> VariationalState {
    let lambda = state.lambda() * (1.0 - alpha) + (grad_loglik_wrt_eta + &prior.nat) * alpha;
    VariationalState::from_lambda(lambda)
}

/// First-order approximation of the Bayes step: the Huang formula with λ
/// substituted for η throughout, then clipped.
pub fn first_order_step(
    lambda: &Array2<f64>,
    grad_loglik_at_lambda: &Array2<f64>,
    prior: &PriorSpec,
    alpha: f64,
    bound: f64,
) -> (Array2<f64>, usize) {
    huang_step(lambda, grad_loglik_at_lambda, prior, alpha, bound)
}

/// Symmetry-maximized sign agreement with the teacher: maximum over
/// hidden-row permutations and per-row sign flips of the matched synapse
/// fraction. sign(0) breaks as +1.
pub fn overlap(eta: &Array2<f64>, teacher: &RbmModel) -> Result<f64> {
    let (m, n) = eta.dim();
    if teacher.weights.dim() != (m, n) {
        return Err(Error::DimensionMismatch(format!(
            "overlap: eta is {:?}, teacher is {:?}",
            eta.dim(),
            teacher.weights.dim()
        )));
    }
    if m > 8 {
        return Err(Error::Capacity(format!(
            "overlap: M={m} exceeds factorial-search cap 8"
        )));
    }
    let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
    // agreement[r][mu]: Σ_i sign(eta_r,i) * w*_mu,i
    let mut agreement = vec![vec![0.0f64; m]; m];
    for (r, row) in agreement.iter_mut().enumerate() {
        for (mu, cell) in row.iter_mut().enumerate() {
            *cell = (0..n)
                .map(|i| sign(eta[(r, i)]) * teacher.weights[(mu, i)])
                .sum();
        }
    }
    let best = (0..m)
        .permutations(m)
        .map(|perm| {
            perm.iter()
                .enumerate()
                // optimal per-row sign makes each term |·|
                .map(|(mu, &r)| agreement[r][mu].abs())
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max);
    Ok(best / (m * n) as f64)
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// (1/S₁) Σ_{a,μ,s} log cosh(β G_μ^a + β Ξ_μ z_μ^s).
fn mc_data_term(
    stats: &crate::gradient::ReceptiveFieldStats,
    draws: &NoiseDraws,
    beta: f64,
) -> f64 {
    let (d, m) = stats.g.dim();
    let mut total = 0.0;
    for a in 0..d {
        for mu in 0..m {
            for s in 0..draws.s1() {
                total += ln_cosh(beta * stats.g[(a, mu)] + beta * stats.xi[mu] * draws.z1[(s, mu)]);
            }
        }
    }
    total / draws.s1() as f64
}

/// Full-batch training loop. Per epoch: draw fresh noise, refresh the
/// receptive-field statistics, solve one message-passing fixed point per
/// partition draw (warm-started from the previous epoch), estimate the
/// gradient, and apply the configured step. Deterministic given the seed.
pub fn train(
    config: &TrainerConfig,
    dataset: &Dataset,
    prior: &PriorSpec,
    init: Option<VariationalState>,
    teacher: Option<&RbmModel>,
) -> Result<(VariationalState, TrainTrace)> {
    let (mp, np) = prior.mean.dim();
    if dataset.num_visible() != np {
        return Err(Error::DimensionMismatch(format!(
            "train: dataset has N={}, prior has N={np}",
            dataset.num_visible()
        )));
    }
    let mut state = match init {
        Some(s) => {
            if s.dim() != (mp, np) {
                return Err(Error::DimensionMismatch(format!(
                    "train: init is {:?}, prior is {:?}",
                    s.dim(),
                    (mp, np)
                )));
            }
            s
        }
        None => VariationalState::zeros(mp, np),
    };
    let settings = config.mp_settings();
    let quad = QuadratureSpec::new(config.quad_nodes);
    let d = dataset.len() as f64;
    let mut trace = TrainTrace::default();
    let mut warm: Option<Vec<MessageState>> = None;

    for epoch in 0..config.epochs {
        let start = Instant::now();
        // for the first-order variant the formula reads λ wherever the
        // others read η
        let eff_eta = match config.variant {
            Variant::BayesFirstOrder => state.lambda().clone(),
            _ => state.eta().clone(),
        };
        let draws = NoiseDraws::draw(
            config.s1,
            config.s2,
            mp,
            config.seed,
            stream::NOISE_BASE + epoch as u64,
        );
        let stats = receptive_stats(&eff_eta, dataset)?;

        let (grad, log_zs, mp_failures) = match config.logz_backend {
            Backend::Bethe => {
                let solves = if d > 0.0 {
                    solve_partition_draws(
                        &eff_eta,
                        &stats,
                        &draws,
                        config.beta,
                        &settings,
                        &quad,
                        warm.as_deref(),
                    )?
                } else {
                    Vec::new()
                };
                let failures = solves.iter().filter(|(st, _)| !st.converged).count();
                let log_zs: Vec<f64> = solves
                    .iter()
                    .enumerate()
                    .map(|(s, (st, _))| {
                        let fields =
                            Array1::from_shape_fn(mp, |mu| stats.xi[mu] * draws.z2[(s, mu)]);
                        let rbm = EquivalentRbm::new(eff_eta.clone(), fields, config.beta)?;
                        Ok(bethe_log_partition(&rbm, st).log_z)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mags: Vec<_> = solves.iter().map(|(_, mg)| mg.clone()).collect();
                warm = Some(solves.into_iter().map(|(st, _)| st).collect());
                let grad = loglik_grad(
                    &eff_eta,
                    dataset,
                    &draws,
                    Some(&mags),
                    &stats,
                    config.beta,
                    GradMode::Mp,
                    &config.caps,
                    config.xi_floor,
                )?;
                (grad, log_zs, failures)
            }
            Backend::Exact => {
                let log_zs: Vec<f64> = (0..config.s2)
                    .map(|s| {
                        let fields =
                            Array1::from_shape_fn(mp, |mu| stats.xi[mu] * draws.z2[(s, mu)]);
                        exact_log_partition(&eff_eta, &fields, config.beta, &config.caps)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let grad = loglik_grad(
                    &eff_eta,
                    dataset,
                    &draws,
                    None,
                    &stats,
                    config.beta,
                    GradMode::Exact,
                    &config.caps,
                    config.xi_floor,
                )?;
                (grad, log_zs, 0)
            }
        };

        // trace ELBO for the pre-step state, reusing the gradient's draws
        let elbo = {
            if config.fresh_elbo_draws {
                let eval_draws = NoiseDraws::draw(
                    config.s1,
                    config.s2,
                    mp,
                    config.seed,
                    stream::NOISE_BASE + 500_000 + epoch as u64,
                );
                crate::gradient::elbo_estimate(
                    state.eta(),
                    dataset,
                    &eval_draws,
                    &match config.logz_backend {
                        Backend::Bethe => crate::gradient::LogZBackend::Bethe {
                            settings,
                            quad: quad.clone(),
                        },
                        Backend::Exact => crate::gradient::LogZBackend::Exact { caps: config.caps },
                    },
                    prior,
                    config.beta,
                )?
            } else {
                let partition = if d > 0.0 {
                    d / config.s2 as f64 * log_zs.iter().sum::<f64>()
                } else {
                    0.0
                };
                mc_data_term(&stats, &draws, config.beta) - partition
                    - kl_to_prior(state.eta(), prior)
            }
        };

        let teacher_overlap = match teacher {
            Some(t) => overlap(state.eta(), t)?,
            None => f64::NAN,
        };
        let (new_state, clips) = match config.variant {
            Variant::Huang => {
                let (eta, clips) = huang_step(
                    state.eta(),
                    &grad.total,
                    prior,
                    config.alpha,
                    config.clip_bound,
                );
                (VariationalState::from_eta(eta), clips)
            }
            Variant::Bayes => {
                let s = bayes_step(&state, &grad.total, prior, config.alpha);
                // η = tanh(λ) is strictly interior in exact arithmetic, but
                // f64 rounds it to ±1.0 once |λ| > ~19; finiteness of λ is
                // the part of the invariant that survives rounding
                debug_assert!(s.lambda().iter().all(|l| l.is_finite()));
                debug_assert!(s.eta().iter().all(|e| e.abs() <= 1.0));
                (s, 0)
            }
            Variant::BayesFirstOrder => {
                let (lambda, clips) = first_order_step(
                    state.lambda(),
                    &grad.total,
                    prior,
                    config.alpha,
                    config.clip_bound,
                );
                (VariationalState::from_lambda(lambda), clips)
            }
        };
        trace.rows.push(TraceRow {
            epoch,
            elbo,
            overlap: teacher_overlap,
            clip_events: clips,
            max_abs_lambda: max_abs(state.lambda()),
            max_abs_eta: max_abs(state.eta()),
            mp_failures,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        state = new_state;
    }

    // closing record for the final state, with its own draw stream
    let final_draws = NoiseDraws::draw(
        config.s1,
        config.s2,
        mp,
        config.seed,
        stream::NOISE_BASE + config.epochs as u64,
    );
    let final_stats = receptive_stats(state.eta(), dataset)?;
    let final_elbo = {
        let partition = if d > 0.0 {
            let log_zs: Vec<f64> = match config.logz_backend {
                Backend::Bethe => solve_partition_draws(
                    state.eta(),
                    &final_stats,
                    &final_draws,
                    config.beta,
                    &settings,
                    &quad,
                    warm.as_deref(),
                )?
                .iter()
                .enumerate()
                .map(|(s, (st, _))| {
                    let fields =
                        Array1::from_shape_fn(mp, |mu| final_stats.xi[mu] * final_draws.z2[(s, mu)]);
                    let rbm = EquivalentRbm::new(state.eta().clone(), fields, config.beta)?;
                    Ok(bethe_log_partition(&rbm, st).log_z)
                })
                .collect::<Result<Vec<_>>>()?,
                Backend::Exact => (0..config.s2)
                    .map(|s| {
                        let fields = Array1::from_shape_fn(mp, |mu| {
                            final_stats.xi[mu] * final_draws.z2[(s, mu)]
                        });
                        exact_log_partition(state.eta(), &fields, config.beta, &config.caps)
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            d / config.s2 as f64 * log_zs.iter().sum::<f64>()
        } else {
            0.0
        };
        mc_data_term(&final_stats, &final_draws, config.beta) - partition
            - kl_to_prior(state.eta(), prior)
    };
    let final_overlap = match teacher {
        Some(t) => overlap(state.eta(), t)?,
        None => f64::NAN,
    };
    trace.rows.push(TraceRow {
        epoch: config.epochs,
        elbo: final_elbo,
        overlap: final_overlap,
        clip_events: 0,
        max_abs_lambda: max_abs(state.lambda()),
        max_abs_eta: max_abs(state.eta()),
        mp_failures: 0,
        wall_ms: 0.0,
    });
    Ok((state, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_teacher_student;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn huang_step_fixed_point_at_origin() {
        let prior = PriorSpec::uniform(1, 2);
        let eta = Array2::zeros((1, 2));
        let (out, clips) = huang_step(&eta, &Array2::zeros((1, 2)), &prior, 0.1, 1.0);
        assert!(out.iter().all(|x| *x == 0.0));
        assert_eq!(clips, 0);
    }

    #[test]
    fn huang_step_kl_pull_toward_prior() {
        // m = 0: the KL term reduces to -atanh(eta)
        let prior = PriorSpec::uniform(1, 1);
        let (out, _) = huang_step(&array![[0.5]], &Array2::zeros((1, 1)), &prior, 0.1, 1.0);
        assert_abs_diff_eq!(out[(0, 0)], 0.5 - 0.1 * 0.5f64.atanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(out[(0, 0)], 0.44507, epsilon = 1e-5);
    }

    #[test]
    fn huang_step_clips_at_boundary() {
        let prior = PriorSpec::uniform(1, 1);
        let (out, clips) = huang_step(&array![[0.99]], &array![[1e6]], &prior, 0.1, 1.0);
        assert_eq!(out[(0, 0)], 1.0);
        assert_eq!(clips, 1);
    }

    #[test]
    fn bayes_step_examples() {
        let prior = PriorSpec::uniform(1, 1);
        // zero gradient, zero prior: decay at rate (1 - alpha)
        let state = VariationalState::from_lambda(array![[2.0]]);
        let next = bayes_step(&state, &Array2::zeros((1, 1)), &prior, 0.25);
        assert_abs_diff_eq!(next.lambda()[(0, 0)], 1.5, epsilon = 1e-14);

        // fixed point at the prior
        let informative = PriorSpec::from_mean(array![[0.4]]).unwrap();
        let state = VariationalState::from_lambda(informative.nat.clone());
        let next = bayes_step(&state, &Array2::zeros((1, 1)), &informative, 0.3);
        assert_abs_diff_eq!(next.lambda()[(0, 0)], informative.nat[(0, 0)], epsilon = 1e-14);

        // direct arithmetic
        let state = VariationalState::from_lambda(array![[1.0]]);
        let next = bayes_step(&state, &array![[0.5]], &prior, 0.1);
        assert_abs_diff_eq!(next.lambda()[(0, 0)], 0.95, epsilon = 1e-14);
        assert_abs_diff_eq!(next.eta()[(0, 0)], 0.95f64.tanh(), epsilon = 1e-14);
        assert_abs_diff_eq!(next.eta()[(0, 0)], 0.73978, epsilon = 1e-5);
    }

    #[test]
    fn first_order_step_equals_huang_step() {
        let mut rng = stream_rng(42, 1);
        for _ in 0..1000 {
            let m = rng.random_range(-0.9..0.9);
            let x = rng.random_range(-0.95..0.95);
            let g = rng.random_range(-2.0..2.0);
            let alpha = rng.random_range(0.01..0.5);
            let prior = PriorSpec::from_mean(array![[m]]).unwrap();
            let (h, hc) = huang_step(&array![[x]], &array![[g]], &prior, alpha, 1.0);
            let (f, fc) = first_order_step(&array![[x]], &array![[g]], &prior, alpha, 1.0);
            assert!((h[(0, 0)] - f[(0, 0)]).abs() <= 1e-12);
            assert_eq!(hc, fc);
        }
    }

    #[test]
    fn bayes_prior_only_geometric_convergence() {
        let prior = PriorSpec::from_mean(array![[0.5, -0.3]]).unwrap();
        let mut state = VariationalState::from_lambda(array![[2.0, -1.0]]);
        let alpha = 0.2;
        let mut dists = Vec::new();
        for _ in 0..30 {
            let d: f64 = (state.lambda() - &prior.nat)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            dists.push(d);
            state = bayes_step(&state, &Array2::zeros((1, 2)), &prior, alpha);
        }
        // log-linear decay at rate (1 - alpha)
        for k in 1..dists.len() {
            let ratio = dists[k] / dists[k - 1];
            assert_abs_diff_eq!(ratio, 1.0 - alpha, epsilon = 1e-10);
        }
    }

    #[test]
    fn overlap_examples() {
        let (teacher, _) = generate_teacher_student(10, 3, 1, 1.0, 4).unwrap();
        assert_abs_diff_eq!(overlap(&teacher.weights.clone(), &teacher).unwrap(), 1.0, epsilon = 0.0);
        let negated = teacher.weights.mapv(|x| -x);
        assert_abs_diff_eq!(overlap(&negated, &teacher).unwrap(), 1.0, epsilon = 0.0);

        // row permutation is also gauge
        let mut permuted = teacher.weights.clone();
        for mu in 0..3 {
            permuted.row_mut(mu).assign(&teacher.weights.row((mu + 1) % 3));
        }
        assert_abs_diff_eq!(overlap(&permuted, &teacher).unwrap(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn overlap_null_distribution_is_small() {
        let (teacher, _) = generate_teacher_student(100, 2, 1, 1.0, 8).unwrap();
        let mut rng = stream_rng(3, 2);
        for _ in 0..20 {
            let random = Array2::from_shape_fn((2, 100), |_| rng.random_range(-1.0..1.0));
            let o = overlap(&random, &teacher).unwrap();
            assert!(o <= 0.3, "null overlap {o}");
        }
    }

    #[test]
    fn overlap_cap() {
        // M = 9 teacher cannot be scored
        let (t, _) = generate_teacher_student(2, 9, 1, 1.0, 4).unwrap();
        assert!(matches!(
            overlap(&t.weights.clone(), &t),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn train_zero_epochs_returns_init() {
        let (teacher, data) = generate_teacher_student(6, 2, 4, 1.0, 3).unwrap();
        let prior = PriorSpec::uniform(2, 6);
        let mut config = TrainerConfig::new(Variant::Bayes);
        config.epochs = 0;
        let (state, trace) = train(&config, &data, &prior, None, Some(&teacher)).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert!(state.lambda().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn train_deterministic() {
        let (teacher, data) = generate_teacher_student(8, 2, 10, 1.0, 5).unwrap();
        let prior = PriorSpec::uniform(2, 8);
        let mut config = TrainerConfig::new(Variant::Huang);
        config.epochs = 5;
        config.seed = 17;
        let (s1, t1) = train(&config, &data, &prior, None, Some(&teacher)).unwrap();
        let (s2, t2) = train(&config, &data, &prior, None, Some(&teacher)).unwrap();
        assert_eq!(s1.lambda(), s2.lambda());
        for (a, b) in t1.rows.iter().zip(t2.rows.iter()) {
            assert_eq!(a.elbo.to_bits(), b.elbo.to_bits());
            assert_eq!(a.overlap.to_bits(), b.overlap.to_bits());
        }
    }

    #[test]
    fn bayes_never_clips_and_stays_interior() {
        let (teacher, data) = generate_teacher_student(8, 2, 10, 1.0, 5).unwrap();
        let prior = PriorSpec::uniform(2, 8);
        let mut config = TrainerConfig::new(Variant::Bayes);
        config.epochs = 20;
        config.alpha = 0.2;
        let (state, trace) = train(&config, &data, &prior, None, Some(&teacher)).unwrap();
        assert!(trace.rows.iter().all(|r| r.clip_events == 0));
        assert!(state.eta().iter().all(|e| e.abs() < 1.0));
        assert!(trace.rows.iter().all(|r| r.max_abs_eta < 1.0));
    }

    #[test]
    fn huang_keeps_eta_in_range() {
        let (teacher, data) = generate_teacher_student(8, 2, 20, 1.0, 6).unwrap();
        let prior = PriorSpec::uniform(2, 8);
        let mut config = TrainerConfig::new(Variant::Huang);
        config.epochs = 20;
        config.alpha = 0.5;
        let (state, trace) = train(&config, &data, &prior, None, Some(&teacher)).unwrap();
        assert!(state.eta().iter().all(|e| e.abs() <= 1.0));
        assert!(trace.rows.iter().all(|r| r.max_abs_eta <= 1.0));
    }
}
