//! MAP sequence estimation for binary symmetric hidden Markov chains, studied
//! through the equivalent zero-temperature random-field Ising chain.
//!
//! * [`model`]: `(q, ε) -> (J, h)`, regime classification and boundaries.
//! * [`sampler`]: hidden chains and noisy observations with reproducible streams.
//! * [`viterbi`]: exact decoding with big-integer counts of all optimal paths.
//! * [`oracle`]: exhaustive minimization for short chains.
//! * [`recursion`]: the zero-temperature field recursion and its recurrent states.
//! * [`analytic`]: composite-chain stationary law and the observables `f, c, v, θ`.
//! * [`experiments`]: sweeps, Monte Carlo runs, validation suite and tables behind the CLI.

pub mod analytic;
pub mod config;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod recursion;
pub mod sampler;
pub mod viterbi;

pub use analytic::{analyze, Analysis, Observables, StationaryMarginals};
pub use energy::{ComparisonMode, LatticeEnergy};
pub use error::{Error, Result};
pub use model::{boundary_epsilon, couplings, regime_index, Couplings, ModelParams, RegimeIndex};
pub use sampler::SpinSequence;
pub use viterbi::{decode_count, decode_stats, DecodeResult, DecodeStats};
