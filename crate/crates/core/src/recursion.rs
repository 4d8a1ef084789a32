//! The random field recursion `ξ_k = h·y_k + A(ξ_{k-1})`, `ξ_0 = 0`.
//!
//! At zero temperature every field value has the form `n1·h + n2·J` with
//! `n2 ∈ {-1, 0, 1}`. States are keyed by the integer pair, and the clipping
//! of `A` acts on those coordinates, so long runs accumulate no float drift.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{regime_index, Couplings, DEFAULT_BOUNDARY_TOL};
use crate::sampler::SpinSequence;

/// Inverse temperature of the ground-state limit.
pub const ZERO_TEMPERATURE: f64 = f64::INFINITY;

/// Relative guard used when deciding which side of `±J` a lattice field lies on.
const CLIP_GUARD: f64 = 1e-9;

fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - LN_2
}

/// Effective field passed on after summing out one spin.
///
/// `beta = ZERO_TEMPERATURE` gives `u` clipped to `[-J, J]`.
pub fn a_fn(u: f64, j: f64, beta: f64) -> f64 {
    debug_assert!(j > 0.0 && beta > 0.0);
    if beta.is_infinite() {
        u.clamp(-j, j)
    } else {
        (ln_cosh(beta * (j + u)) - ln_cosh(beta * (j - u))) / (2.0 * beta)
    }
}

/// Free-energy contribution of one summed-out spin.
///
/// `beta = ZERO_TEMPERATURE` gives `max(J, |u|)`.
pub fn b_fn(u: f64, j: f64, beta: f64) -> f64 {
    debug_assert!(j > 0.0 && beta > 0.0);
    if beta.is_infinite() {
        j.max(u.abs())
    } else {
        (2.0 * LN_2 + ln_cosh(beta * (j + u)) + ln_cosh(beta * (j - u))) / (2.0 * beta)
    }
}

/// Field value `n1·h + n2·J` together with the observation that produced it
/// (`y = 0` only for the initial field `ξ_0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XiState {
    pub n1: i64,
    pub n2: i8,
    pub y: i8,
}

impl XiState {
    pub const INITIAL: XiState = XiState { n1: 0, n2: 0, y: 0 };

    pub fn value(&self, c: &Couplings) -> f64 {
        self.n1 as f64 * c.h + f64::from(self.n2) * c.j
    }

    pub fn is_recurrent(&self) -> bool {
        self.n2 != 0
    }

    /// `ξ = ±J`: a frustrated site.
    pub fn is_frustrated(&self) -> bool {
        self.n1 == 0 && self.n2 != 0
    }

    /// `A(ξ)` at zero temperature, in lattice coordinates.
    pub fn clipped(&self, c: &Couplings) -> Result<(i64, i8)> {
        if self.n1 == 0 {
            return Ok((0, self.n2));
        }
        let scale = CLIP_GUARD * c.j.max(c.h);
        let above = self.n1 as f64 * c.h + f64::from(self.n2 - 1) * c.j;
        if above.abs() <= scale {
            return Err(boundary_error(c));
        }
        if above > 0.0 {
            return Ok((0, 1));
        }
        let below = self.n1 as f64 * c.h + f64::from(self.n2 + 1) * c.j;
        if below.abs() <= scale {
            return Err(boundary_error(c));
        }
        if below < 0.0 {
            return Ok((0, -1));
        }
        Ok((self.n1, self.n2))
    }

    /// Field after observing `y`.
    pub fn step(&self, y: i8, c: &Couplings) -> Result<XiState> {
        let (n1, n2) = self.clipped(c)?;
        Ok(XiState { n1: n1 + i64::from(y), n2, y })
    }
}

fn boundary_error(c: &Couplings) -> Error {
    let m = regime_index(c, 1e-6).m;
    Error::OnBoundary { h: c.h, m }
}

/// Names of the `4m` recurrent states of regime `m`:
/// `a_i = [(2-i)h + J, +1]`, `b_i = [-ih + J, -1]` and their negations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    A(u32),
    B(u32),
    ABar(u32),
    BBar(u32),
}

impl StateLabel {
    pub fn index(&self) -> u32 {
        match *self {
            StateLabel::A(i) | StateLabel::B(i) | StateLabel::ABar(i) | StateLabel::BBar(i) => i,
        }
    }

    pub fn is_barred(&self) -> bool {
        matches!(self, StateLabel::ABar(_) | StateLabel::BBar(_))
    }

    pub fn is_a_family(&self) -> bool {
        matches!(self, StateLabel::A(_) | StateLabel::ABar(_))
    }

    pub fn bar(&self) -> StateLabel {
        match *self {
            StateLabel::A(i) => StateLabel::ABar(i),
            StateLabel::ABar(i) => StateLabel::A(i),
            StateLabel::B(i) => StateLabel::BBar(i),
            StateLabel::BBar(i) => StateLabel::B(i),
        }
    }

    pub fn xi_state(&self) -> XiState {
        let i = i64::from(self.index());
        match *self {
            StateLabel::A(_) => XiState { n1: 2 - i, n2: 1, y: 1 },
            StateLabel::B(_) => XiState { n1: -i, n2: 1, y: -1 },
            StateLabel::ABar(_) => XiState { n1: i - 2, n2: -1, y: -1 },
            StateLabel::BBar(_) => XiState { n1: i, n2: -1, y: 1 },
        }
    }

    /// Observation carried by the state.
    pub fn y(&self) -> i8 {
        self.xi_state().y
    }

    /// Position in the canonical order `a_1..a_m, ā_1..ā_m, b_1..b_m, b̄_1..b̄_m`.
    pub fn position(&self, m: u32) -> usize {
        let family = if self.is_a_family() { 0 } else { 1 };
        let bar = usize::from(self.is_barred());
        (family * 2 + bar) * m as usize + (self.index() as usize - 1)
    }

    /// All `4m` labels in canonical order.
    pub fn all(m: u32) -> Vec<StateLabel> {
        let mut v = Vec::with_capacity(4 * m as usize);
        v.extend((1..=m).map(StateLabel::A));
        v.extend((1..=m).map(StateLabel::ABar));
        v.extend((1..=m).map(StateLabel::B));
        v.extend((1..=m).map(StateLabel::BBar));
        v
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::A(i) => write!(f, "a{i}"),
            StateLabel::B(i) => write!(f, "b{i}"),
            StateLabel::ABar(i) => write!(f, "abar{i}"),
            StateLabel::BBar(i) => write!(f, "bbar{i}"),
        }
    }
}

/// States reachable from `ξ_0 = 0` under the zero-temperature recursion.
#[derive(Debug, Clone)]
pub struct FieldStates {
    pub m: u32,
    /// Recurrent states in canonical label order.
    pub labels: Vec<StateLabel>,
    pub recurrent: Vec<XiState>,
    pub transient: Vec<XiState>,
    /// `successor[i] = [next on y=+1, next on y=-1]`, as indices into `recurrent`.
    pub successor: Vec<[usize; 2]>,
}

impl FieldStates {
    pub fn position(&self, s: &XiState) -> Option<usize> {
        self.recurrent.iter().position(|r| r == s)
    }
}

/// Close `{ξ_0}` under `ξ -> ±h + A(ξ)` and split it into transient and recurrent parts.
///
/// `m_hint`, when given, must agree with the couplings' regime. Boundary
/// couplings are rejected: their ties need exact arithmetic.
pub fn discover_states(c: &Couplings, m_hint: Option<u32>) -> Result<FieldStates> {
    let regime = regime_index(c, DEFAULT_BOUNDARY_TOL);
    if let Some(m) = regime.boundary_m {
        return Err(Error::OnBoundary { h: c.h, m });
    }
    if let Some(hint) = m_hint {
        if hint != regime.m {
            return Err(Error::RegimeMismatch {
                requested: hint,
                actual: regime.m,
            });
        }
    }
    close_field_map(c, regime.m)
}

/// Closure of the field map under couplings whose regime is known to be `m`.
pub(crate) fn close_field_map(c: &Couplings, m: u32) -> Result<FieldStates> {
    let budget = 10 * m as usize;
    let mut seen: HashMap<XiState, [Option<XiState>; 2]> = HashMap::new();
    let mut queue = VecDeque::from([XiState::INITIAL]);
    seen.insert(XiState::INITIAL, [None, None]);
    while let Some(s) = queue.pop_front() {
        let next = [s.step(1, c)?, s.step(-1, c)?];
        for t in next {
            if !seen.contains_key(&t) {
                if seen.len() >= budget {
                    return Err(Error::StateBudget { budget });
                }
                seen.insert(t, [None, None]);
                queue.push_back(t);
            }
        }
        seen.insert(s, [Some(next[0]), Some(next[1])]);
    }

    let labels = StateLabel::all(m);
    let recurrent: Vec<XiState> = labels.iter().map(StateLabel::xi_state).collect();
    let found = seen.keys().filter(|s| s.is_recurrent()).count();
    if found != recurrent.len() || !recurrent.iter().all(|s| seen.contains_key(s)) {
        return Err(Error::Numeric(format!(
            "recurrent set has {found} states, expected {} for regime m = {m}",
            recurrent.len()
        )));
    }
    let mut transient: Vec<XiState> = seen
        .keys()
        .filter(|s| !s.is_recurrent() && **s != XiState::INITIAL)
        .copied()
        .collect();
    transient.sort();

    let index: HashMap<XiState, usize> = recurrent.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut successor = Vec::with_capacity(recurrent.len());
    for s in &recurrent {
        let [up, down] = seen[s];
        let lookup = |t: Option<XiState>| -> Result<usize> {
            let t = t.expect("expanded");
            index
                .get(&t)
                .copied()
                .ok_or(Error::UnexpectedState { n1: t.n1, n2: t.n2 })
        };
        successor.push([lookup(up)?, lookup(down)?]);
    }

    Ok(FieldStates {
        m,
        labels,
        recurrent,
        transient,
        successor,
    })
}

/// Visit counts of recurrent states along one run of the recursion.
#[derive(Debug, Clone)]
pub struct Tally {
    pub m: u32,
    pub labels: Vec<StateLabel>,
    pub states: Vec<XiState>,
    pub counts: Vec<u64>,
    /// Number of steps taken (the sequence length).
    pub total: u64,
    /// Transient steps before the first recurrent state.
    pub discarded: u64,
    /// Σ B(ξ_k) at zero temperature over the tallied steps.
    pub b_sum: f64,
}

impl Tally {
    pub fn tallied(&self) -> u64 {
        self.total - self.discarded
    }

    pub fn frequency(&self, label: StateLabel) -> f64 {
        let i = label.position(self.m);
        self.counts[i] as f64 / self.tallied() as f64
    }

    /// Frequency of `label` and its bar image together.
    pub fn folded_frequency(&self, label: StateLabel) -> f64 {
        self.frequency(label) + self.frequency(label.bar())
    }

    /// `-(1/N) Σ B(ξ_k)`, an estimate of the free energy per site.
    pub fn free_energy(&self) -> f64 {
        -self.b_sum / self.tallied() as f64
    }
}

/// Iterate the recursion along `y` from `ξ_0 = 0` and tally recurrent visits.
pub fn run_recursion(y: &SpinSequence, c: &Couplings) -> Result<Tally> {
    let states = discover_states(c, None)?;
    let index: HashMap<XiState, usize> = states
        .recurrent
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i))
        .collect();
    let mut counts = vec![0u64; states.recurrent.len()];
    let mut discarded = 0u64;
    let mut b_sum = 0.0;
    let mut xi = XiState::INITIAL;
    let mut entered = false;
    for yk in y.iter() {
        xi = xi.step(yk, c)?;
        if !xi.is_recurrent() {
            if entered {
                return Err(Error::UnexpectedState { n1: xi.n1, n2: xi.n2 });
            }
            discarded += 1;
            continue;
        }
        entered = true;
        let i = *index
            .get(&xi)
            .ok_or(Error::UnexpectedState { n1: xi.n1, n2: xi.n2 })?;
        counts[i] += 1;
        b_sum += b_fn(xi.value(c), c.j, ZERO_TEMPERATURE);
    }
    Ok(Tally {
        m: states.m,
        labels: states.labels,
        states: states.recurrent,
        counts,
        total: y.len() as u64,
        discarded,
        b_sum,
    })
}

/// `(ln 2)·(freq(ξ=+J) + freq(ξ=-J))/2` over the tallied steps.
pub fn empirical_entropy(tally: &Tally) -> f64 {
    if tally.tallied() == 0 {
        return 0.0;
    }
    let frustrated: u64 = tally
        .states
        .iter()
        .zip(&tally.counts)
        .filter(|(s, _)| s.is_frustrated())
        .map(|(_, &k)| k)
        .sum();
    LN_2 * frustrated as f64 / tally.tallied() as f64 / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn cp(q: f64, e: f64) -> Couplings {
        ModelParams::new(q, e).unwrap().couplings()
    }

    #[test]
    fn a_and_b_zero_temperature() {
        let j = 0.7;
        assert!((a_fn(0.3 * j, j, ZERO_TEMPERATURE) - 0.3 * j).abs() < 1e-15);
        assert_eq!(a_fn(2.0 * j, j, ZERO_TEMPERATURE), j);
        assert_eq!(a_fn(-5.0 * j, j, ZERO_TEMPERATURE), -j);
        assert_eq!(b_fn(0.0, j, ZERO_TEMPERATURE), j);
        assert!((b_fn(-3.0 * j, j, ZERO_TEMPERATURE) - 3.0 * j).abs() < 1e-15);
        assert_eq!(b_fn(1.7 * j, j, ZERO_TEMPERATURE), b_fn(-1.7 * j, j, ZERO_TEMPERATURE));
    }

    #[test]
    fn finite_beta_approaches_limit() {
        let j = 0.5763;
        let beta = 50.0 / j;
        let a = a_fn(2.0 * j, j, beta);
        assert!((a - j).abs() <= LN_2 / beta);
        for u in [-3.0, -1.0, -0.2, 0.0, 0.4, 0.9, 2.5] {
            for beta in [10.0, 100.0, 1e4] {
                assert!((a_fn(u, j, beta) - a_fn(u, j, ZERO_TEMPERATURE)).abs() <= LN_2 / beta + 1e-12);
                assert!((b_fn(u, j, beta) - b_fn(u, j, ZERO_TEMPERATURE)).abs() <= LN_2 / beta + 1e-12);
            }
        }
        // no overflow deep in the saturated region
        assert!(a_fn(1e6, j, 1e6).is_finite());
        assert!(b_fn(-1e6, j, 1e6).is_finite());
    }

    #[test]
    fn finite_beta_matches_direct_formula() {
        let (j, beta) = (0.8f64, 1.3f64);
        for u in [-1.5, -0.3, 0.0, 0.6, 2.0] {
            let (p, m) = ((beta * (j + u)).cosh(), (beta * (j - u)).cosh());
            let a = (p / m).ln() / (2.0 * beta);
            let b = (4.0 * p * m).ln() / (2.0 * beta);
            assert!((a_fn(u, j, beta) - a).abs() < 1e-14);
            assert!((b_fn(u, j, beta) - b).abs() < 1e-14);
        }
    }

    #[test]
    fn regime_one_recurrent_set() {
        let c = cp(0.24, 0.05);
        let fs = discover_states(&c, Some(1)).unwrap();
        assert_eq!(fs.recurrent.len(), 4);
        let values: Vec<f64> = fs.recurrent.iter().map(|s| s.value(&c)).collect();
        let want = [c.h + c.j, -c.h - c.j, -c.h + c.j, c.h - c.j];
        for (v, w) in values.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
        let tags: Vec<i8> = fs.recurrent.iter().map(|s| s.y).collect();
        assert_eq!(tags, vec![1, -1, -1, 1]);
        // a1 --(y=-1)--> b1
        let a1 = StateLabel::A(1).position(1);
        let b1 = StateLabel::B(1).position(1);
        assert_eq!(fs.successor[a1], [a1, b1]);
    }

    #[test]
    fn regime_three_graph() {
        let c = cp(0.24, 0.30);
        let fs = discover_states(&c, Some(3)).unwrap();
        assert_eq!(fs.recurrent.len(), 12);
        let pos = |l: StateLabel| l.position(3);
        use StateLabel::*;
        let edges = [
            (A(1), [A(1), B(1)]),
            (A(2), [A(1), B(1)]),
            (A(3), [A(2), B(2)]),
            (B(1), [A(2), B(2)]),
            (B(2), [A(3), B(3)]),
            (B(3), [BBar(1), ABar(1)]),
        ];
        for (from, [up, down]) in edges {
            assert_eq!(fs.successor[pos(from)], [pos(up), pos(down)], "{from}");
            // the barred half mirrors with y flipped
            assert_eq!(
                fs.successor[pos(from.bar())],
                [pos(down.bar()), pos(up.bar())],
                "{}",
                from.bar()
            );
        }
        for s in &fs.recurrent {
            let neg = XiState { n1: -s.n1, n2: -s.n2, y: -s.y };
            assert!(fs.recurrent.contains(&neg));
        }
    }

    #[test]
    fn recurrent_set_size_for_many_regimes() {
        let q = 0.24;
        for m in 1..=12u32 {
            let (lo, hi) = crate::model::regime_epsilon_range(q, m).unwrap();
            let e = if m == 1 { hi / 2.0 } else { 0.5 * (lo + hi) };
            let fs = discover_states(&cp(q, e), Some(m)).unwrap();
            assert_eq!(fs.recurrent.len(), 4 * m as usize);
            assert!(fs.transient.iter().all(|s| s.n2 == 0));
        }
    }

    #[test]
    fn boundary_and_mismatch_rejected() {
        let q = 0.24;
        let e = crate::model::boundary_epsilon(q, 2).unwrap();
        assert!(matches!(discover_states(&cp(q, e), None), Err(Error::OnBoundary { .. })));
        assert!(matches!(
            discover_states(&cp(q, 0.15), Some(3)),
            Err(Error::RegimeMismatch { requested: 3, actual: 2 })
        ));
    }

    #[test]
    fn single_steps() {
        let c = cp(0.24, 0.05);
        let a1 = StateLabel::A(1).xi_state();
        assert_eq!(a1.step(-1, &c).unwrap(), StateLabel::B(1).xi_state());
        let first = XiState::INITIAL.step(1, &c).unwrap();
        assert_eq!(first, XiState { n1: 1, n2: 0, y: 1 });
        assert!(!first.is_recurrent());
    }

    #[test]
    fn ml_regime_has_no_frustration() {
        let p = ModelParams::new(0.24, 0.05).unwrap();
        let (_, y) = crate::sampler::sample_pair(&p, 20_000, 4, 0);
        let t = run_recursion(&y, &p.couplings()).unwrap();
        assert_eq!(t.counts.iter().sum::<u64>(), t.tallied());
        assert_eq!(empirical_entropy(&t), 0.0);
    }
}
