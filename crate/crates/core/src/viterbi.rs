//! Exact MAP decoding with degeneracy counting.
//!
//! The forward pass keeps, for each prefix and terminal spin, the optimal
//! lattice energy, the number of optimal prefixes and the totals of the bond
//! and overlap sums over those prefixes. Equal lattice points merge by adding
//! counts and totals, so the final cell describes the uniform distribution on
//! all optimal paths exactly.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::energy::{ComparisonMode, EnergyOrder, LatticeEnergy};
use crate::error::Result;
use crate::model::Couplings;
use crate::sampler::{check_lengths, SpinSequence};

const SPINS: [i8; 2] = [1, -1];
const FROM_PLUS: u8 = 0b01;
const FROM_MINUS: u8 = 0b10;

/// Minimal energy, number of minimizers and exact totals over all minimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// In commensurate mode distinct lattice points can share the minimal
    /// energy; the largest `(a, b)` over all optimal paths is reported.
    pub energy: LatticeEnergy,
    pub count: BigUint,
    /// Σ over optimal paths of Σ x_k x_{k+1}.
    pub sum_xx: BigInt,
    /// Σ over optimal paths of Σ y_k x_k.
    pub sum_xy: BigInt,
    /// One optimal path, preferring `+1` wherever several predecessors tie.
    pub witness: SpinSequence,
}

impl DecodeResult {
    pub fn len(&self) -> usize {
        self.witness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witness.is_empty()
    }

    pub fn ln_count(&self) -> f64 {
        ln_biguint(&self.count)
    }
}

/// Per-site statistics averaged uniformly over all optimal paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeStats {
    /// `sum_xy / (count·N)`.
    pub v_hat: f64,
    /// `sum_xx / (count·(N-1))`; NaN for a single site.
    pub c_hat: f64,
    /// `ln(count) / N`.
    pub theta_hat: f64,
    /// Minimal energy per site, `-(aJ + bh)/N`.
    pub energy_per_site: f64,
}

#[derive(Clone)]
struct Cell {
    energy: LatticeEnergy,
    count: BigInt,
    sum_xx: BigInt,
    sum_xy: BigInt,
}

impl Cell {
    fn start(y0: i8, s: i8) -> Self {
        let ys = i64::from(y0 * s);
        Cell {
            energy: LatticeEnergy::new(0, ys),
            count: BigInt::from(1u8),
            sum_xx: BigInt::zero(),
            sum_xy: BigInt::from(ys),
        }
    }

    /// This prefix extended by one site: bond `bond`, field term `field`.
    fn accumulate_into(&self, bond: i8, field: i8, out: &mut Option<Cell>) {
        match out {
            None => {
                let mut sum_xx = self.sum_xx.clone();
                add_signed(&mut sum_xx, &self.count, bond);
                let mut sum_xy = self.sum_xy.clone();
                add_signed(&mut sum_xy, &self.count, field);
                *out = Some(Cell {
                    energy: self.energy.shifted(i64::from(bond), i64::from(field)),
                    count: self.count.clone(),
                    sum_xx,
                    sum_xy,
                });
            }
            Some(acc) => {
                acc.energy = acc.energy.max(self.energy.shifted(i64::from(bond), i64::from(field)));
                acc.count += &self.count;
                acc.sum_xx += &self.sum_xx;
                add_signed(&mut acc.sum_xx, &self.count, bond);
                acc.sum_xy += &self.sum_xy;
                add_signed(&mut acc.sum_xy, &self.count, field);
            }
        }
    }
}

fn add_signed(target: &mut BigInt, value: &BigInt, sign: i8) {
    if sign > 0 {
        *target += value;
    } else {
        *target -= value;
    }
}

/// Bitmask of optimal choices among two candidates (bit 0: `+1`, bit 1: `-1`).
fn best_mask(order: &EnergyOrder, plus: LatticeEnergy, minus: LatticeEnergy) -> Result<u8> {
    Ok(match order.compare(plus, minus)? {
        Ordering::Less => FROM_PLUS,
        Ordering::Greater => FROM_MINUS,
        Ordering::Equal => FROM_PLUS | FROM_MINUS,
    })
}

struct Forward {
    last: [Cell; 2],
    /// masks[k][s]: optimal predecessors of spin s at site k (k ≥ 1).
    masks: Vec<[u8; 2]>,
    terminal: u8,
    /// Path counts per site and spin, kept only when sampling.
    counts: Option<Vec<[BigInt; 2]>>,
}

fn forward(y: &SpinSequence, order: &EnergyOrder, keep_counts: bool) -> Result<Forward> {
    let ys = y.as_slice();
    let n = ys.len();
    let mut cells = [Cell::start(ys[0], 1), Cell::start(ys[0], -1)];
    let mut masks = Vec::with_capacity(n);
    masks.push([0u8; 2]);
    let mut counts = keep_counts.then(|| {
        let mut v = Vec::with_capacity(n);
        v.push([cells[0].count.clone(), cells[1].count.clone()]);
        v
    });

    for &yk in &ys[1..] {
        let mut step_masks = [0u8; 2];
        let mut next: [Option<Cell>; 2] = [None, None];
        for (si, &s) in SPINS.iter().enumerate() {
            let via_plus = cells[0].energy.shifted(i64::from(s), i64::from(yk * s));
            let via_minus = cells[1].energy.shifted(i64::from(-s), i64::from(yk * s));
            let mask = best_mask(order, via_plus, via_minus)?;
            step_masks[si] = mask;
            for (pi, &p) in SPINS.iter().enumerate() {
                if mask & (1 << pi) != 0 {
                    cells[pi].accumulate_into(s * p, yk * s, &mut next[si]);
                }
            }
        }
        let [plus, minus] = next;
        cells = [plus.expect("nonempty"), minus.expect("nonempty")];
        masks.push(step_masks);
        if let Some(c) = counts.as_mut() {
            c.push([cells[0].count.clone(), cells[1].count.clone()]);
        }
    }

    let terminal = best_mask(order, cells[0].energy, cells[1].energy)?;
    Ok(Forward {
        last: cells,
        masks,
        terminal,
        counts,
    })
}

fn spin_index(s: i8) -> usize {
    usize::from(s < 0)
}

/// Exact minimum of `H(y, x)` over all `2^N` configurations, the number of
/// minimizers, and exact totals of the bond and overlap sums over them.
pub fn decode_count(y: &SpinSequence, c: &Couplings, mode: ComparisonMode) -> Result<DecodeResult> {
    let order = EnergyOrder::new(c, mode)?;
    decode_with_order(y, &order)
}

pub fn decode_with_order(y: &SpinSequence, order: &EnergyOrder) -> Result<DecodeResult> {
    let fw = forward(y, order, false)?;
    let [plus, minus] = fw.last;
    let (energy, count, sum_xx, sum_xy) = match fw.terminal {
        FROM_PLUS => (plus.energy, plus.count, plus.sum_xx, plus.sum_xy),
        FROM_MINUS => (minus.energy, minus.count, minus.sum_xx, minus.sum_xy),
        _ => (
            plus.energy.max(minus.energy),
            plus.count + minus.count,
            plus.sum_xx + minus.sum_xx,
            plus.sum_xy + minus.sum_xy,
        ),
    };

    let n = y.len();
    let mut witness = vec![0i8; n];
    let mut s: i8 = if fw.terminal & FROM_PLUS != 0 { 1 } else { -1 };
    witness[n - 1] = s;
    for k in (1..n).rev() {
        let mask = fw.masks[k][spin_index(s)];
        s = if mask & FROM_PLUS != 0 { 1 } else { -1 };
        witness[k - 1] = s;
    }

    Ok(DecodeResult {
        energy,
        count: count.to_biguint().expect("path counts are positive"),
        sum_xx,
        sum_xy,
        witness: SpinSequence::from_vec_unchecked(witness),
    })
}

/// Overlap, correlator and entropy estimates averaged over all optima.
pub fn decode_stats(y: &SpinSequence, c: &Couplings, mode: ComparisonMode) -> Result<DecodeStats> {
    let r = decode_count(y, c, mode)?;
    Ok(stats_of(&r, c))
}

pub fn stats_of(r: &DecodeResult, c: &Couplings) -> DecodeStats {
    let n = r.len();
    let v_hat = big_ratio(&r.sum_xy, &r.count) / n as f64;
    let c_hat = if n > 1 {
        big_ratio(&r.sum_xx, &r.count) / (n - 1) as f64
    } else {
        f64::NAN
    };
    DecodeStats {
        v_hat,
        c_hat,
        theta_hat: r.ln_count() / n as f64,
        energy_per_site: r.energy.value(c) / n as f64,
    }
}

/// Overlap and correlator of the single witness path.
pub fn witness_stats(y: &SpinSequence, r: &DecodeResult) -> Result<(f64, f64)> {
    let n = r.len();
    let v = r.witness.overlap_sum(y)? as f64 / n as f64;
    let c = if n > 1 {
        r.witness.bond_sum() as f64 / (n - 1) as f64
    } else {
        f64::NAN
    };
    Ok((v, c))
}

/// Fraction of sites where the witness differs from the true sequence.
pub fn error_rate(x_true: &SpinSequence, result: &DecodeResult) -> Result<f64> {
    check_lengths(x_true, &result.witness)?;
    Ok(x_true.hamming(&result.witness)? as f64 / x_true.len() as f64)
}

/// Draw one optimal path uniformly at random from all optima.
///
/// Sampling runs backwards, choosing among tied predecessors with
/// probability proportional to their exact path counts.
pub fn sample_optimum<R: Rng + ?Sized>(
    y: &SpinSequence,
    c: &Couplings,
    mode: ComparisonMode,
    rng: &mut R,
) -> Result<SpinSequence> {
    let order = EnergyOrder::new(c, mode)?;
    let fw = forward(y, &order, true)?;
    let counts = fw.counts.expect("counts requested");
    let n = y.len();
    let mut path = vec![0i8; n];

    let pick = |mask: u8, weights: &[BigInt; 2], rng: &mut R| -> i8 {
        match mask {
            FROM_PLUS => 1,
            FROM_MINUS => -1,
            _ => {
                let plus = weights[0].magnitude();
                let total = plus + weights[1].magnitude();
                if uniform_below(&total, rng) < *plus {
                    1
                } else {
                    -1
                }
            }
        }
    };

    let mut s = pick(fw.terminal, &counts[n - 1], rng);
    path[n - 1] = s;
    for k in (1..n).rev() {
        s = pick(fw.masks[k][spin_index(s)], &counts[k - 1], rng);
        path[k - 1] = s;
    }
    Ok(SpinSequence::from_vec_unchecked(path))
}

/// Uniform integer in `[0, bound)` by rejection on random bytes.
fn uniform_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero());
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64) * 8 - bits;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        // little-endian: mask the most significant byte
        buf[bytes - 1] &= 0xffu8 >> excess;
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *bound {
            return candidate;
        }
    }
}

/// `num / den` in floating point without overflowing on huge operands.
pub fn big_ratio(num: &BigInt, den: &BigUint) -> f64 {
    let shift = den.bits().max(num.magnitude().bits()).saturating_sub(960);
    let n = BigInt::from_biguint(num.sign(), num.magnitude() >> shift);
    let d = den >> shift;
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if b != 0.0 => a / b,
        _ => {
            if num.sign() == Sign::NoSign {
                0.0
            } else {
                f64::NAN
            }
        }
    }
}

/// Natural logarithm of a positive big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let mantissa = (x >> shift).to_f64().unwrap_or(f64::NAN);
    mantissa.ln() + shift as f64 * std::f64::consts::LN_2
}
