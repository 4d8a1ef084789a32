//! Composite chain over (field state, observation, hidden spin) and the
//! zero-temperature observables derived from its stationary law.
//!
//! States are ordered as in the Kronecker construction: composite index
//! `(family·2 + z)·2m + bar·m + (i-1)` with family 0 for `a`, 1 for `b`,
//! `z` index 0 for `+1` and 1 for `-1`.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{boundary_epsilon, regime_index, Couplings, ModelParams, RegimeIndex, DEFAULT_BOUNDARY_TOL};
use crate::recursion::{b_fn, close_field_map, StateLabel, ZERO_TEMPERATURE};

/// Above this regime index the stationary law is found by power iteration.
pub const DENSE_SOLVE_MAX_M: u32 = 32;

const COLUMN_SUM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeState {
    pub label: StateLabel,
    pub z: i8,
}

impl fmt::Display for CompositeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, z={:+})", self.label, self.z)
    }
}

/// Column-stochastic transition matrix of the composite chain for regime `m`.
#[derive(Debug, Clone)]
pub struct CompositeChain {
    pub m: u32,
    pub states: Vec<CompositeState>,
    pub w: DMatrix<f64>,
}

fn z_index(z: i8) -> usize {
    usize::from(z < 0)
}

/// Canonical composite index of `(label, z)`.
pub fn composite_index(label: StateLabel, z: i8, m: u32) -> usize {
    let m = m as usize;
    let family = usize::from(!label.is_a_family());
    let bar = usize::from(label.is_barred());
    (family * 2 + z_index(z)) * 2 * m + bar * m + (label.index() as usize - 1)
}

fn canonical_states(m: u32) -> Vec<CompositeState> {
    let mut states = vec![
        CompositeState {
            label: StateLabel::A(1),
            z: 1
        };
        8 * m as usize
    ];
    for label in StateLabel::all(m) {
        for z in [1, -1] {
            states[composite_index(label, z, m)] = CompositeState { label, z };
        }
    }
    states
}

/// Hidden-chain and channel factors: `P[z][z'] = π(+1|z) p(z|z')`, `M` likewise for `y = -1`.
fn emission_blocks(params: &ModelParams) -> (nalgebra::Matrix2<f64>, nalgebra::Matrix2<f64>) {
    let (q, e) = (params.q(), params.epsilon());
    let p = |z: i8, zp: i8| if z == zp { 1.0 - q } else { q };
    let pi = |y: i8, z: i8| if y == z { 1.0 - e } else { e };
    let block = |y: i8| {
        nalgebra::Matrix2::from_fn(|r, c| {
            let z = if r == 0 { 1 } else { -1 };
            let zp = if c == 0 { 1 } else { -1 };
            pi(y, z) * p(z, zp)
        })
    };
    (block(1), block(-1))
}

/// Couplings whose field map has the transition graph of regime `m`.
fn structural_couplings(m: u32) -> Couplings {
    Couplings {
        j: 1.0,
        h: 2.0 / (f64::from(m) - 0.5),
    }
}

impl CompositeChain {
    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, label: StateLabel, z: i8) -> usize {
        composite_index(label, z, self.m)
    }

    /// Largest deviation of a column sum from one.
    pub fn column_sum_error(&self) -> f64 {
        self.w
            .column_iter()
            .map(|c| (c.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference to `other`, matching states by label.
    pub fn max_difference(&self, other: &CompositeChain) -> Result<f64> {
        if self.m != other.m || self.size() != other.size() {
            return Err(Error::InvalidArgument("chains of different regimes".into()));
        }
        let map: Vec<usize> = self
            .states
            .iter()
            .map(|s| {
                other
                    .states
                    .iter()
                    .position(|o| o == s)
                    .ok_or_else(|| Error::InvalidArgument(format!("state {s} missing")))
            })
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for r in 0..self.size() {
            for c in 0..self.size() {
                worst = worst.max((self.w[(r, c)] - other.w[(map[r], map[c])]).abs());
            }
        }
        Ok(worst)
    }

    /// Nonzero pattern between field states, ignoring the hidden spin.
    pub fn label_edges(&self) -> Vec<(StateLabel, StateLabel)> {
        let mut edges = Vec::new();
        for from in StateLabel::all(self.m) {
            for to in StateLabel::all(self.m) {
                let w = self.w[(self.index(to, 1), self.index(from, 1))]
                    + self.w[(self.index(to, -1), self.index(from, -1))]
                    + self.w[(self.index(to, 1), self.index(from, -1))]
                    + self.w[(self.index(to, -1), self.index(from, 1))];
                if w > 0.0 {
                    edges.push((from, to));
                }
            }
        }
        edges
    }

    fn from_field_map(params: &ModelParams, map_couplings: &Couplings, m: u32) -> Result<Self> {
        let fs = close_field_map(map_couplings, m)?;
        let (p, mm) = emission_blocks(params);
        let n = 8 * m as usize;
        let mut w = DMatrix::zeros(n, n);
        for (from_pos, from) in fs.labels.iter().enumerate() {
            for (yi, block) in [(0usize, &p), (1usize, &mm)] {
                let to = fs.labels[fs.successor[from_pos][yi]];
                for (zi, z) in [1i8, -1].into_iter().enumerate() {
                    for (zpi, zp) in [1i8, -1].into_iter().enumerate() {
                        w[(composite_index(to, z, m), composite_index(*from, zp, m))] += block[(zi, zpi)];
                    }
                }
            }
        }
        Ok(Self {
            m,
            states: canonical_states(m),
            w,
        })
    }
}

/// Chain for regime `m`, built by closing the field recursion at the model's couplings.
///
/// `m` must match the couplings' regime; on a boundary `h = 2J/k` both
/// `m = k` and `m = k + 1` are accepted.
pub fn build_chain(params: &ModelParams, m: u32) -> Result<CompositeChain> {
    if m == 0 {
        return Err(Error::InvalidArgument("regime index m must be at least 1".into()));
    }
    let c = params.couplings();
    let regime = regime_index(&c, DEFAULT_BOUNDARY_TOL);
    match regime.boundary_m {
        Some(k) if m == k || m == k + 1 => build_chain_for_regime(params, m),
        Some(k) => Err(Error::RegimeMismatch { requested: m, actual: k }),
        // Within the recursion's guard band of a boundary the closure is refused;
        // the graph of the classified regime is then taken from structural couplings.
        None if regime.m == m => match CompositeChain::from_field_map(params, &c, m) {
            Err(Error::OnBoundary { .. }) => build_chain_for_regime(params, m),
            other => other,
        },
        None => Err(Error::RegimeMismatch {
            requested: m,
            actual: regime.m,
        }),
    }
}

/// Chain with the transition graph of regime `m` and the weights of `params`,
/// whatever regime `params` itself falls in. Used to evaluate both sides of
/// a boundary.
pub fn build_chain_for_regime(params: &ModelParams, m: u32) -> Result<CompositeChain> {
    if m == 0 {
        return Err(Error::InvalidArgument("regime index m must be at least 1".into()));
    }
    CompositeChain::from_field_map(params, &structural_couplings(m), m)
}

/// The same chain assembled as a sum of Kronecker products of the 4×4
/// emission patterns with 2m×2m shift patterns built from
/// `E = e_1 e_1ᵀ`, `S = e_1 e_mᵀ`, the subdiagonal shift `L` and the
/// superdiagonal shift `U`.
pub fn build_chain_kronecker(params: &ModelParams, m: u32) -> Result<CompositeChain> {
    if m == 0 {
        return Err(Error::InvalidArgument("regime index m must be at least 1".into()));
    }
    let (p, mm) = emission_blocks(params);
    let k = m as usize;
    let zero2 = nalgebra::Matrix2::<f64>::zeros();
    let left = |b: [&nalgebra::Matrix2<f64>; 4]| {
        let mut out = DMatrix::zeros(4, 4);
        for (q, blk) in b.iter().enumerate() {
            out.view_mut((q / 2 * 2, q % 2 * 2), (2, 2)).copy_from(*blk);
        }
        out
    };
    let right = |b: [Option<&DMatrix<f64>>; 4]| {
        let mut out = DMatrix::zeros(2 * k, 2 * k);
        for (q, blk) in b.iter().enumerate() {
            if let Some(blk) = blk {
                out.view_mut((q / 2 * k, q % 2 * k), (k, k)).copy_from(*blk);
            }
        }
        out
    };
    let mut e = DMatrix::zeros(k, k);
    e[(0, 0)] = 1.0;
    let mut s = DMatrix::zeros(k, k);
    s[(0, k - 1)] = 1.0;
    // L moves i -> i+1, U moves i+1 -> i (columns are sources)
    let l = DMatrix::from_fn(k, k, |r, c| if r == c + 1 { 1.0 } else { 0.0 });
    let u = DMatrix::from_fn(k, k, |r, c| if c == r + 1 { 1.0 } else { 0.0 });

    // 2x2 block layout over (family, z): the named family is the source
    let from_a_mp = left([&mm, &zero2, &p, &zero2]);
    let from_a_pm = left([&p, &zero2, &mm, &zero2]);
    let from_b_pm = left([&zero2, &p, &zero2, &mm]);
    let from_b_mp = left([&zero2, &mm, &zero2, &p]);

    let w = from_a_mp.kronecker(&right([None, None, None, Some(&e)]))
        + from_b_pm.kronecker(&right([Some(&l), None, None, None]))
        + from_b_mp.kronecker(&right([None, None, Some(&s), Some(&l)]))
        + from_a_pm.kronecker(&right([Some(&u), None, None, None]))
        + from_a_mp.kronecker(&right([None, None, None, Some(&u)]))
        + from_a_pm.kronecker(&right([Some(&e), None, None, None]))
        + from_b_pm.kronecker(&right([None, Some(&s), None, None]));

    Ok(CompositeChain {
        m,
        states: canonical_states(m),
        w,
    })
}

/// The regime-one chain written out block by block in the order
/// `a_1, b_1, ā_1, b̄_1`; the emission block of each entry is fixed by
/// the observation carried by the target state.
pub fn build_chain_m1_blocks(params: &ModelParams) -> CompositeChain {
    use StateLabel::*;
    let (p, mm) = emission_blocks(params);
    let order = [A(1), B(1), ABar(1), BBar(1)];
    // (target, source) pairs allowed by the recursion
    let allowed = [
        (A(1), A(1)),
        (B(1), A(1)),
        (A(1), BBar(1)),
        (B(1), BBar(1)),
        (ABar(1), B(1)),
        (BBar(1), B(1)),
        (ABar(1), ABar(1)),
        (BBar(1), ABar(1)),
    ];
    let mut w = DMatrix::zeros(8, 8);
    let mut states = Vec::with_capacity(8);
    for label in order {
        for z in [1, -1] {
            states.push(CompositeState { label, z });
        }
    }
    for (to, from) in allowed {
        let r = order.iter().position(|&l| l == to).unwrap() * 2;
        let c = order.iter().position(|&l| l == from).unwrap() * 2;
        let block = if to.y() > 0 { &p } else { &mm };
        w.view_mut((r, c), (2, 2)).copy_from(block);
    }
    CompositeChain { m: 1, states, w }
}

/// Stationary probabilities of the field states, summed over the hidden spin.
/// Vectors are indexed by `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMarginals {
    pub m: u32,
    pub omega_alpha: Vec<f64>,
    pub omega_beta: Vec<f64>,
    pub omega_alpha_bar: Vec<f64>,
    pub omega_beta_bar: Vec<f64>,
}

impl StationaryMarginals {
    /// Largest absolute difference over all `4m` marginals; `m` must agree.
    pub fn max_difference(&self, other: &StationaryMarginals) -> Result<f64> {
        if self.m != other.m {
            return Err(Error::RegimeMismatch {
                requested: self.m,
                actual: other.m,
            });
        }
        let pairs = [
            (&self.omega_alpha, &other.omega_alpha),
            (&self.omega_beta, &other.omega_beta),
            (&self.omega_alpha_bar, &other.omega_alpha_bar),
            (&self.omega_beta_bar, &other.omega_beta_bar),
        ];
        Ok(pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    /// `ω(α_i)`, 1-based; zero for `i > m`.
    pub fn alpha(&self, i: u32) -> f64 {
        self.omega_alpha.get(i as usize - 1).copied().unwrap_or(0.0)
    }

    /// `ω(β_i)`, 1-based; zero for `i > m`.
    pub fn beta(&self, i: u32) -> f64 {
        self.omega_beta.get(i as usize - 1).copied().unwrap_or(0.0)
    }

    /// `Σ_i ω(α_i) + ω(β_i)`, which equals 1/2.
    pub fn half_mass(&self) -> f64 {
        self.omega_alpha.iter().sum::<f64>() + self.omega_beta.iter().sum::<f64>()
    }

    /// Largest violation of `ω(x) = ω(x̄)`.
    pub fn bar_asymmetry(&self) -> f64 {
        self.omega_alpha
            .iter()
            .zip(&self.omega_alpha_bar)
            .chain(self.omega_beta.iter().zip(&self.omega_beta_bar))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn of(&self, label: StateLabel) -> f64 {
        let i = label.index() as usize - 1;
        match label {
            StateLabel::A(_) => self.omega_alpha[i],
            StateLabel::B(_) => self.omega_beta[i],
            StateLabel::ABar(_) => self.omega_alpha_bar[i],
            StateLabel::BBar(_) => self.omega_beta_bar[i],
        }
    }

    fn symmetric(m: u32, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        Self {
            m,
            omega_alpha_bar: alpha.clone(),
            omega_beta_bar: beta.clone(),
            omega_alpha: alpha,
            omega_beta: beta,
        }
    }
}

/// Solve `W w = w`, `Σ w = 1` and marginalize over the hidden spin.
pub fn stationary(chain: &CompositeChain) -> Result<StationaryMarginals> {
    let err = chain.column_sum_error();
    if err > COLUMN_SUM_TOL * chain.size() as f64 {
        return Err(Error::Numeric(format!("transition matrix columns deviate from 1 by {err:e}")));
    }
    let w = if chain.m <= DENSE_SOLVE_MAX_M {
        dense_stationary(&chain.w)?
    } else {
        power_stationary(&chain.w)?
    };
    let residual = (&chain.w * &w - &w).amax();
    if !residual.is_finite() || residual > 1e-10 {
        return Err(Error::Numeric(format!("stationary residual {residual:e}")));
    }
    let m = chain.m;
    let marginal = |label: StateLabel| w[chain.index(label, 1)] + w[chain.index(label, -1)];
    let collect = |f: fn(u32) -> StateLabel| (1..=m).map(|i| marginal(f(i))).collect::<Vec<_>>();
    Ok(StationaryMarginals {
        m,
        omega_alpha: collect(StateLabel::A),
        omega_beta: collect(StateLabel::B),
        omega_alpha_bar: collect(StateLabel::ABar),
        omega_beta_bar: collect(StateLabel::BBar),
    })
}

/// Gaussian elimination on `(W - I) w = 0` with the last row replaced by `Σ w = 1`.
fn dense_stationary(w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = w.nrows();
    let mut a = w - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    a.lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular stationary system".into()))
}

fn power_stationary(w: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = w.nrows();
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..1_000_000 {
        let mut next = w * &v;
        let total = next.sum();
        next /= total;
        let delta = (&next - &v).lp_norm(1);
        v = next;
        if delta < 1e-12 {
            return Ok(v);
        }
    }
    Err(Error::Numeric("power iteration did not converge".into()))
}

/// Zero-temperature free energy, correlator, overlap and entropy per site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub f: f64,
    pub c: f64,
    pub v: f64,
    pub theta: f64,
}

/// Observables from the marginals of regime `marg.m`.
///
/// On a boundary the frustrated states `β_m = -J` add to the entropy.
pub fn observables(marg: &StationaryMarginals, c: &Couplings, at_boundary: bool) -> Observables {
    let m = marg.m;
    let beta_m = marg.beta(m);
    let alpha_1 = marg.alpha(1);
    let alpha_2 = marg.alpha(2);
    let minus_half_f = c.h * (alpha_1 + f64::from(m) * beta_m) + c.j * (0.5 - 2.0 * beta_m);
    let theta = if at_boundary {
        (alpha_2 + beta_m) * LN_2
    } else {
        alpha_2 * LN_2
    };
    Observables {
        f: -2.0 * minus_half_f,
        c: 1.0 - 4.0 * beta_m,
        // For m = 1 the unbarred states are exactly α_1, β_1, holding half the mass.
        v: if m == 1 {
            1.0
        } else {
            2.0 * alpha_1 + 2.0 * f64::from(m) * beta_m
        },
        theta,
    }
}

/// `-Σ_ξ ω(ξ) B(ξ)` summed state by state over all `4m` field states.
pub fn free_energy_direct(marg: &StationaryMarginals, c: &Couplings) -> f64 {
    -StateLabel::all(marg.m)
        .into_iter()
        .map(|l| marg.of(l) * b_fn(l.xi_state().value(c), c.j, ZERO_TEMPERATURE))
        .sum::<f64>()
}

/// Closed-form marginals of regime one.
pub fn closed_form_m1(params: &ModelParams) -> StationaryMarginals {
    let q = params.q();
    let g = params.g();
    let alpha = (1.0 - q) / 2.0 + g * (2.0 * q - 1.0);
    let beta = q / 2.0 - g * (2.0 * q - 1.0);
    StationaryMarginals::symmetric(1, vec![alpha], vec![beta])
}

/// Closed-form marginals of regime two.
pub fn closed_form_m2(params: &ModelParams) -> StationaryMarginals {
    let g = params.g();
    let u = params.hidden_correlator();
    let den = 3.0 - (1.0 + 2.0 * g) * u;
    let alpha1 = (0.5 + (0.5 - 3.0 * g) * u) / den;
    let beta1 = (0.5 + (g - 0.5) * u) / den;
    let alpha2 = (0.25 + 0.5 * (3.0 * g - 1.0) * u + 0.25 * (1.0 - 2.0 * g * (4.0 * g + 1.0)) * u * u) / den;
    let beta2 = (0.25 - 0.5 * g * u + 0.25 * (8.0 * g * g + 2.0 * g - 1.0) * u * u) / den;
    StationaryMarginals::symmetric(2, vec![alpha1, alpha2], vec![beta1, beta2])
}

/// Everything the analytic solver knows about one parameter point.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub params: ModelParams,
    pub couplings: Couplings,
    pub regime: RegimeIndex,
    pub marginals: StationaryMarginals,
    pub observables: Observables,
}

/// Classify the point, solve its chain and evaluate the observables.
pub fn analyze(params: &ModelParams) -> Result<Analysis> {
    let couplings = params.couplings();
    let regime = regime_index(&couplings, DEFAULT_BOUNDARY_TOL);
    let chain = build_chain(params, regime.m)?;
    let marginals = stationary(&chain)?;
    let observables = observables(&marginals, &couplings, regime.on_boundary());
    Ok(Analysis {
        params: *params,
        couplings,
        regime,
        marginals,
        observables,
    })
}

/// Observables of regime `m` evaluated at `params` regardless of its own regime.
pub fn analyze_as_regime(params: &ModelParams, m: u32, at_boundary: bool) -> Result<(StationaryMarginals, Observables)> {
    let marg = stationary(&build_chain_for_regime(params, m)?)?;
    let obs = observables(&marg, &params.couplings(), at_boundary);
    Ok((marg, obs))
}

/// One side-by-side comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            tol,
        }
    }

    pub fn passed(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.tol
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {:.15} vs {:.15} (|diff| = {:.3e}, tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            self.rhs,
            (self.lhs - self.rhs).abs(),
            self.tol
        )
    }
}

/// Identities that tie regimes `m` and `m+1` together at their shared boundary.
#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub q: f64,
    pub m: u32,
    pub epsilon: f64,
    pub checks: Vec<IdentityCheck>,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            let failed: Vec<String> = self
                .checks
                .iter()
                .filter(|c| !c.passed())
                .map(ToString::to_string)
                .collect();
            Err(Error::Numeric(format!(
                "continuity violated at q = {}, m = {}: {}",
                self.q,
                self.m,
                failed.join("; ")
            )))
        }
    }
}

pub const CONTINUITY_TOL: f64 = 1e-10;

/// Evaluate both regimes at `ε = boundary_epsilon(q, m)` and compare free
/// energy, the `α_1` balance and the boundary entropy.
pub fn continuity_checks(q: f64, m: u32) -> Result<ContinuityReport> {
    let epsilon = boundary_epsilon(q, m)?;
    let params = ModelParams::new(q, epsilon)?;
    let c = params.couplings();
    let (lo, lo_obs) = analyze_as_regime(&params, m, true)?;
    let (hi, hi_obs) = analyze_as_regime(&params, m + 1, true)?;
    let checks = vec![
        IdentityCheck::new(format!("f_{m} = f_{}", m + 1), lo_obs.f, hi_obs.f, CONTINUITY_TOL),
        IdentityCheck::new(
            format!("w{m}(a1) = w{}(a1) + w{}(b{})", m + 1, m + 1, m + 1),
            lo.alpha(1),
            hi.alpha(1) + hi.beta(m + 1),
            CONTINUITY_TOL,
        ),
        IdentityCheck::new(
            format!("w{m}(a2) + w{m}(b{m}) = w{}(a2) + w{}(b{m})", m + 1, m + 1),
            lo.alpha(2) + lo.beta(m),
            hi.alpha(2) + hi.beta(m),
            CONTINUITY_TOL,
        ),
        IdentityCheck::new(
            format!("f_{m} direct = f_{m} closed"),
            free_energy_direct(&lo, &c),
            lo_obs.f,
            CONTINUITY_TOL,
        ),
    ];
    Ok(ContinuityReport { q, m, epsilon, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, e: f64) -> ModelParams {
        ModelParams::new(q, e).unwrap()
    }

    #[test]
    fn m1_block_entry() {
        let p = params(0.24, 0.05);
        let chain = build_chain(&p, 1).unwrap();
        let a1 = chain.index(StateLabel::A(1), 1);
        assert!((chain.w[(a1, a1)] - 0.722).abs() < 1e-15);
    }

    #[test]
    fn three_constructions_agree_for_m1() {
        let p = params(0.24, 0.05);
        let closure = build_chain(&p, 1).unwrap();
        let kron = build_chain_kronecker(&p, 1).unwrap();
        let blocks = build_chain_m1_blocks(&p);
        assert_eq!(closure.max_difference(&kron).unwrap(), 0.0);
        assert_eq!(closure.max_difference(&blocks).unwrap(), 0.0);
    }

    #[test]
    fn kronecker_matches_closure() {
        for m in 1..=6 {
            let (lo, hi) = crate::model::regime_epsilon_range(0.24, m).unwrap();
            let p = params(0.24, if m == 1 { hi / 2.0 } else { 0.5 * (lo + hi) });
            let a = build_chain(&p, m).unwrap();
            let b = build_chain_kronecker(&p, m).unwrap();
            assert!(a.max_difference(&b).unwrap() <= 1e-15, "m={m}");
            assert!(b.column_sum_error() <= 1e-14);
        }
    }

    #[test]
    fn emission_blocks_sum_to_hidden_transitions() {
        let p = params(0.3, 0.2);
        let (pp, mm) = emission_blocks(&p);
        let t = pp + mm;
        assert!((t[(0, 0)] - 0.7).abs() < 1e-15 && (t[(1, 0)] - 0.3).abs() < 1e-15);
        assert!((t[(0, 1)] - 0.3).abs() < 1e-15 && (t[(1, 1)] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn regime_mismatch_rejected() {
        let p = params(0.24, 0.15);
        assert!(matches!(build_chain(&p, 1), Err(Error::RegimeMismatch { requested: 1, actual: 2 })));
        assert!(build_chain_for_regime(&p, 1).is_ok());
        let b = params(0.24, boundary_epsilon(0.24, 1).unwrap());
        assert!(build_chain(&b, 1).is_ok());
        assert!(build_chain(&b, 2).is_ok());
        assert!(build_chain(&b, 3).is_err());
    }

    #[test]
    fn m1_marginals() {
        let p = params(0.24, 0.05);
        let s = stationary(&build_chain(&p, 1).unwrap()).unwrap();
        assert!((s.alpha(1) - 0.35530).abs() < 1e-5);
        assert!((s.beta(1) - 0.14470).abs() < 1e-5);
        let o = observables(&s, &p.couplings(), false);
        assert!((o.v - 1.0).abs() < 1e-12);
        assert!((o.c - 0.4212).abs() < 1e-12);
        assert_eq!(o.theta, 0.0);
    }

    #[test]
    fn m2_marginals_and_observables() {
        let p = params(0.24, 0.15);
        let s = stationary(&build_chain(&p, 2).unwrap()).unwrap();
        for (got, want) in [
            (s.alpha(1), 0.23903),
            (s.beta(1), 0.13049),
            (s.alpha(2), 0.05581),
            (s.beta(2), 0.07467),
        ] {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
        assert!((s.half_mass() - 0.5).abs() < 1e-12);
        assert!(s.bar_asymmetry() < 1e-12);
        let o = observables(&s, &p.couplings(), false);
        assert!((o.c - 0.70132).abs() < 1e-5);
        assert!((o.v - 0.77674).abs() < 1e-5);
        assert!((o.theta / LN_2 - 0.05581).abs() < 1e-5);
        assert!((o.f + 1.077866).abs() < 1e-6);
        assert!((free_energy_direct(&s, &p.couplings()) - o.f).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        for (q, e) in [(0.1, 0.01), (0.24, 0.05), (0.4, 0.3)] {
            let m1 = closed_form_m1(&params(q, e));
            assert!((m1.half_mass() - 0.5).abs() < 1e-15);
            let m2 = closed_form_m2(&params(q, e));
            assert!((m2.half_mass() - 0.5).abs() < 1e-14);
        }
        let m2 = closed_form_m2(&params(0.24, 0.24));
        assert!((m2.alpha(2) - 0.068646).abs() < 1e-6);
        assert!((m2.beta(2) - 0.077557).abs() < 1e-6);
        assert!((m2.alpha(2) + m2.beta(2) - 0.146202).abs() < 1e-6);
    }

    #[test]
    fn boundary_entropy_anchor() {
        let e = boundary_epsilon(0.24, 1).unwrap();
        let a = analyze(&params(0.24, e)).unwrap();
        assert_eq!(a.regime, RegimeIndex::boundary(1));
        assert!((a.observables.theta / LN_2 - 0.1629).abs() < 2e-4);
    }

    #[test]
    fn continuity_at_q024() {
        for m in 1..=4 {
            let r = continuity_checks(0.24, m).unwrap();
            assert!(r.passed(), "{:?}", r.checks);
        }
        let r = continuity_checks(0.24, 1).unwrap();
        assert!((r.checks[1].lhs - 0.3371222).abs() < 1e-6);
        assert!((r.checks[2].lhs - 0.1628778).abs() < 1e-6);
    }

    #[test]
    fn power_iteration_matches_dense() {
        let p = params(0.3, 0.45);
        let chain = build_chain_for_regime(&p, 5).unwrap();
        let dense = dense_stationary(&chain.w).unwrap();
        let power = power_stationary(&chain.w).unwrap();
        assert!((dense - power).amax() < 1e-12);
    }

    #[test]
    fn large_regime_uses_power_iteration() {
        let q = 0.24;
        let m = DENSE_SOLVE_MAX_M + 3;
        let (lo, hi) = crate::model::regime_epsilon_range(q, m).unwrap();
        let a = analyze(&params(q, 0.5 * (lo + hi))).unwrap();
        assert_eq!(a.regime.m, m);
        assert!((a.marginals.half_mass() - 0.5).abs() < 1e-10);
        assert!(a.observables.theta >= 0.0);
    }
}
