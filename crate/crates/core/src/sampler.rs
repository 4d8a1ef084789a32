//! Sampling hidden chains and their noisy observations.
//!
//! Every trial draws from its own ChaCha8 stream: the 64-bit seed selects the
//! key and the trial's stream id selects the ChaCha stream, so trials can run
//! in any order or in parallel and still reproduce bit for bit.

use std::fmt;
use std::io::{self, Write};
use std::ops::Neg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// A sequence of ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinSequence(Vec<i8>);

impl SpinSequence {
    /// Build from raw values; every entry must be ±1 and the sequence non-empty.
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("spin sequence must be non-empty".into()));
        }
        if let Some(bad) = values.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("spin value {bad} is not ±1")));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<i8>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|&s| s == 1 || s == -1));
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().copied()
    }

    /// `Σ x_k x_{k+1}` over the open chain.
    pub fn bond_sum(&self) -> i64 {
        self.0.windows(2).map(|w| i64::from(w[0] * w[1])).sum()
    }

    /// `Σ y_k x_k`.
    pub fn overlap_sum(&self, other: &SpinSequence) -> Result<i64> {
        check_lengths(self, other)?;
        Ok(self.0.iter().zip(&other.0).map(|(&a, &b)| i64::from(a * b)).sum())
    }

    /// Number of sites where the two sequences disagree.
    pub fn hamming(&self, other: &SpinSequence) -> Result<usize> {
        check_lengths(self, other)?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }
}

impl Neg for &SpinSequence {
    type Output = SpinSequence;

    fn neg(self) -> SpinSequence {
        SpinSequence(self.0.iter().map(|&s| -s).collect())
    }
}

impl fmt::Display for SpinSequence {
    /// Space-separated ±1 integers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_lengths(a: &SpinSequence, b: &SpinSequence) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        })
    }
}

/// Length, number of trials and seed of a sampling experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl SampleConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sequence length n must be at least 1".into()));
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(Self { n, trials, seed })
    }
}

/// Deterministic generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stationary start, then flip with probability `q` at every step.
pub fn sample_hidden<R: Rng + ?Sized>(params: &ModelParams, n: usize, rng: &mut R) -> SpinSequence {
    assert!(n >= 1, "sequence length must be at least 1");
    let q = params.q();
    let mut x = Vec::with_capacity(n);
    let mut s: i8 = if rng.random_bool(0.5) { 1 } else { -1 };
    x.push(s);
    for _ in 1..n {
        if rng.random::<f64>() < q {
            s = -s;
        }
        x.push(s);
    }
    SpinSequence(x)
}

/// Memoryless symmetric channel: each spin flips independently with probability `ε`.
pub fn sample_observation<R: Rng + ?Sized>(
    x: &SpinSequence,
    params: &ModelParams,
    rng: &mut R,
) -> SpinSequence {
    let e = params.epsilon();
    SpinSequence(
        x.0.iter()
            .map(|&s| if rng.random::<f64>() < e { -s } else { s })
            .collect(),
    )
}

/// Hidden chain and observation for one trial.
pub fn sample_pair(params: &ModelParams, n: usize, seed: u64, stream: u64) -> (SpinSequence, SpinSequence) {
    let mut rng = stream_rng(seed, stream);
    let x = sample_hidden(params, n, &mut rng);
    let y = sample_observation(&x, params, &mut rng);
    (x, y)
}

/// Debug dump: one sequence per line as space-separated ±1 integers.
pub fn write_sequences<W: Write>(mut out: W, sequences: &[&SpinSequence]) -> io::Result<()> {
    for s in sequences {
        writeln!(out, "{s}")?;
    }
    Ok(())
}
