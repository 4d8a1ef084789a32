//! Exhaustive minimizer for short chains.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};

use crate::energy::{ComparisonMode, EnergyOrder, LatticeEnergy};
use crate::error::{Error, Result};
use crate::model::Couplings;
use crate::sampler::SpinSequence;

pub const MAX_BRUTE_FORCE_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub energy: LatticeEnergy,
    pub count: BigUint,
    pub sum_xx: BigInt,
    pub sum_xy: BigInt,
    /// Every minimizer, in enumeration order.
    pub witnesses: Vec<SpinSequence>,
}

/// Configuration number `mask` of length `n`: bit k set means `x_k = -1`.
pub fn configuration(mask: u32, n: usize) -> SpinSequence {
    SpinSequence::from_vec_unchecked(
        (0..n)
            .map(|k| if mask >> k & 1 == 1 { -1 } else { 1 })
            .collect(),
    )
}

/// Enumerate all `2^N` configurations and keep every minimizer.
pub fn brute_force(y: &SpinSequence, c: &Couplings, mode: ComparisonMode) -> Result<OracleResult> {
    let n = y.len();
    if n > MAX_BRUTE_FORCE_LEN {
        return Err(Error::TooLarge {
            n,
            max: MAX_BRUTE_FORCE_LEN,
        });
    }
    let order = EnergyOrder::new(c, mode)?;
    let mut best: Option<LatticeEnergy> = None;
    let mut witnesses = Vec::new();
    for mask in 0..(1u32 << n) {
        let x = configuration(mask, n);
        let e = LatticeEnergy::new(x.bond_sum(), x.overlap_sum(y)?);
        let ord = match best {
            None => Ordering::Less,
            Some(b) => order.compare(e, b)?,
        };
        match ord {
            Ordering::Less => {
                best = Some(e);
                witnesses.clear();
                witnesses.push(x);
            }
            Ordering::Equal => {
                best = best.max(Some(e));
                witnesses.push(x);
            }
            Ordering::Greater => {}
        }
    }
    let energy = best.expect("at least one configuration");
    let mut sum_xx = BigInt::default();
    let mut sum_xy = BigInt::default();
    for w in &witnesses {
        sum_xx += w.bond_sum();
        sum_xy += w.overlap_sum(y)?;
    }
    Ok(OracleResult {
        energy,
        count: BigUint::from(witnesses.len()),
        sum_xx,
        sum_xy,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn seq(v: &[i8]) -> SpinSequence {
        SpinSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn frustrated_pair() {
        let c = ModelParams::new(0.24, 0.32).unwrap().couplings();
        let r = brute_force(&seq(&[1, -1]), &c, ComparisonMode::Incommensurate).unwrap();
        assert_eq!(r.count, BigUint::from(2u8));
        assert_eq!(r.witnesses, vec![seq(&[1, 1]), seq(&[-1, -1])]);
    }

    #[test]
    fn ml_regime_unique() {
        let c = ModelParams::new(0.24, 0.05).unwrap().couplings();
        let y = seq(&[1, -1, 1]);
        let r = brute_force(&y, &c, ComparisonMode::Incommensurate).unwrap();
        assert_eq!(r.witnesses, vec![y]);
    }

    #[test]
    fn single_site() {
        let c = ModelParams::new(0.3, 0.4).unwrap().couplings();
        for s in [1, -1] {
            let r = brute_force(&seq(&[s]), &c, ComparisonMode::Incommensurate).unwrap();
            assert_eq!(r.witnesses, vec![seq(&[s])]);
        }
    }

    #[test]
    fn size_limit() {
        let c = ModelParams::new(0.3, 0.4).unwrap().couplings();
        let y = SpinSequence::new(vec![1; 21]).unwrap();
        assert!(matches!(
            brute_force(&y, &c, ComparisonMode::Incommensurate),
            Err(Error::TooLarge { n: 21, .. })
        ));
    }
}
