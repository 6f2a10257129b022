//! Training restricted Boltzmann machines with binary (±1) synapses via
//! mean-field variational inference.
//!
//! The library implements two optimizers over the factorized symmetric
//! Bernoulli posterior: clipped gradient ascent on the expectation
//! parameters η, and the Bayesian learning rule acting on the natural
//! parameters λ (no clipping needed). The intractable log partition
//! function of the equivalent RBM is estimated by belief propagation with
//! a Bethe free-energy readout, and everything is backed by exact
//! brute-force oracles at desk scale.

pub mod error;
pub mod gradient;
pub mod io;
pub mod math;
pub mod model;
pub mod msgpass;
pub mod rng;
pub mod train;
pub mod variational;

pub use error::{Error, Result};
pub use model::{Dataset, EnumCaps, RbmModel};
pub use msgpass::{EquivalentRbm, Magnetizations, MessageState, MpSettings, QuadratureSpec};
pub use train::{TrainTrace, TrainerConfig, Variant};
pub use variational::{PriorSpec, VariationalState};
