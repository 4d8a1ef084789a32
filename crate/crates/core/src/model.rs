//! Probabilistic parameters of the binary symmetric hidden Markov model and
//! their images as Ising couplings.

use crate::error::{Error, Result};

/// Default relative tolerance used to detect regime boundaries.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-12;

/// Flip probability `q` of the hidden chain and error probability `epsilon`
/// of the observation channel, both in the open interval (0, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    q: f64,
    epsilon: f64,
}

impl ModelParams {
    pub fn new(q: f64, epsilon: f64) -> Result<Self> {
        check_probability("q", q)?;
        check_probability("epsilon", epsilon)?;
        Ok(Self { q, epsilon })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn couplings(&self) -> Couplings {
        couplings(self)
    }

    /// `ε(1-ε)`.
    pub(crate) fn g(&self) -> f64 {
        self.epsilon * (1.0 - self.epsilon)
    }

    /// Nearest-neighbour correlator `1-2q` of the hidden chain.
    pub fn hidden_correlator(&self) -> f64 {
        1.0 - 2.0 * self.q
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

/// Spin-spin coupling `j` and field magnitude `h`, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub j: f64,
    pub h: f64,
}

impl Couplings {
    /// Couplings given directly; both must be finite and positive.
    pub fn new(j: f64, h: f64) -> Result<Self> {
        if !(j.is_finite() && j > 0.0) {
            return Err(Error::InvalidArgument(format!("coupling J = {j} must be positive")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!("field h = {h} must be positive")));
        }
        Ok(Self { j, h })
    }

    /// Observation error probability whose half-log-odds is `h`.
    pub fn epsilon(&self) -> f64 {
        1.0 / (1.0 + (2.0 * self.h).exp())
    }

    /// Flip probability whose half-log-odds is `j`.
    pub fn q(&self) -> f64 {
        1.0 / (1.0 + (2.0 * self.j).exp())
    }

    pub fn regime(&self) -> RegimeIndex {
        regime_index(self, DEFAULT_BOUNDARY_TOL)
    }
}

fn half_log_odds(p: f64) -> f64 {
    0.5 * ((1.0 - p) / p).ln()
}

/// `J = ½ ln((1-q)/q)`, `h = ½ ln((1-ε)/ε)`.
pub fn couplings(params: &ModelParams) -> Couplings {
    Couplings {
        j: half_log_odds(params.q),
        h: half_log_odds(params.epsilon),
    }
}

/// Regime label `m`, defined by `2J/(m-1) > h > 2J/m`.
///
/// On a boundary `h = 2J/k` the index reports `m = k` and `boundary_m = Some(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeIndex {
    pub m: u32,
    pub boundary_m: Option<u32>,
}

impl RegimeIndex {
    pub fn interior(m: u32) -> Self {
        Self { m, boundary_m: None }
    }

    pub fn boundary(m: u32) -> Self {
        Self {
            m,
            boundary_m: Some(m),
        }
    }

    pub fn on_boundary(&self) -> bool {
        self.boundary_m.is_some()
    }
}

/// Classify `h` relative to the ladder `2J/m`.
///
/// `tol` is relative to `h`. Every positive field classifies.
pub fn regime_index(c: &Couplings, tol: f64) -> RegimeIndex {
    let ratio = 2.0 * c.j / c.h;
    // The nearest candidate boundaries sit around ratio; check both neighbours.
    let lo = ratio.floor().max(1.0);
    for k in [lo, lo + 1.0] {
        let k_int = k as u32;
        if k_int >= 1 && (c.h - 2.0 * c.j / k).abs() <= tol * c.h {
            return RegimeIndex::boundary(k_int);
        }
    }
    // ratio in (m-1, m)  <=>  2J/(m-1) > h > 2J/m
    let m = if ratio < 1.0 { 1 } else { ratio.floor() as u32 + 1 };
    RegimeIndex::interior(m)
}

/// Error probability on the boundary `h = 2J(q)/m`.
pub fn boundary_epsilon(q: f64, m: u32) -> Result<f64> {
    check_probability("q", q)?;
    if m == 0 {
        return Err(Error::InvalidArgument("boundary index m must be at least 1".into()));
    }
    let odds = (1.0 - q) / q;
    Ok(1.0 / (1.0 + odds.powf(2.0 / f64::from(m))))
}

/// Open interval `(eps_lo, eps_hi)` of error probabilities in regime `m`.
pub fn regime_epsilon_range(q: f64, m: u32) -> Result<(f64, f64)> {
    let hi = boundary_epsilon(q, m)?;
    let lo = if m == 1 { 0.0 } else { boundary_epsilon(q, m - 1)? };
    Ok((lo, hi))
}
