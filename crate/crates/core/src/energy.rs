//! Exact energies on the integer lattice `(a, b)`.
//!
//! A configuration with bond sum `a = Σ x_k x_{k+1}` and field sum
//! `b = Σ y_k x_k` has energy `-(aJ + bh)`. Ties between configurations are
//! decided on the lattice, never on rounded floats.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Couplings, RegimeIndex};

/// Default absolute guard band for incommensurate comparisons (nats).
pub const DEFAULT_GUARD: f64 = 1e-9;

/// Relative tolerance with which a commensurate mode must match the couplings.
const MODE_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LatticeEnergy {
    pub a: i64,
    pub b: i64,
}

impl LatticeEnergy {
    pub fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    /// Realized energy `-(aJ + bh)`.
    pub fn value(&self, c: &Couplings) -> f64 {
        -(self.a as f64 * c.j + self.b as f64 * c.h)
    }

    pub(crate) fn shifted(self, da: i64, db: i64) -> Self {
        Self {
            a: self.a + da,
            b: self.b + db,
        }
    }
}

/// How ties between lattice points are decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonMode {
    /// Generic field: distinct lattice points never tie.
    Incommensurate,
    /// Exactly `h = 2J/m`: order by the integer key `m·a + 2·b`.
    Commensurate(u32),
}

impl ComparisonMode {
    /// Commensurate on a detected boundary, incommensurate otherwise.
    pub fn for_regime(regime: &RegimeIndex) -> Self {
        match regime.boundary_m {
            Some(m) => ComparisonMode::Commensurate(m),
            None => ComparisonMode::Incommensurate,
        }
    }
}

/// Total preorder of lattice energies under a comparison mode.
#[derive(Debug, Clone, Copy)]
pub struct EnergyOrder {
    mode: ComparisonMode,
    j: f64,
    h: f64,
    guard: f64,
}

impl EnergyOrder {
    pub fn new(c: &Couplings, mode: ComparisonMode) -> Result<Self> {
        Self::with_guard(c, mode, DEFAULT_GUARD)
    }

    pub fn with_guard(c: &Couplings, mode: ComparisonMode, guard: f64) -> Result<Self> {
        if let ComparisonMode::Commensurate(m) = mode {
            if m == 0 {
                return Err(Error::InvalidArgument("commensurate index must be at least 1".into()));
            }
            let expected = 2.0 * c.j / f64::from(m);
            if (c.h - expected).abs() > MODE_CHECK_TOL * c.h {
                return Err(Error::ModeMismatch { m, h: c.h, expected });
            }
        }
        if !(guard.is_finite() && guard >= 0.0) {
            return Err(Error::InvalidArgument(format!("guard band {guard} must be non-negative")));
        }
        Ok(Self {
            mode,
            j: c.j,
            h: c.h,
            guard,
        })
    }

    pub fn mode(&self) -> ComparisonMode {
        self.mode
    }

    /// `Less` when `p` has strictly lower energy than `q`, `Equal` on an exact tie.
    pub fn compare(&self, p: LatticeEnergy, q: LatticeEnergy) -> Result<Ordering> {
        if p == q {
            return Ok(Ordering::Equal);
        }
        let da = p.a - q.a;
        let db = p.b - q.b;
        match self.mode {
            ComparisonMode::Commensurate(m) => {
                // larger m·a + 2·b means lower energy
                let key = i128::from(m) * i128::from(da) + 2 * i128::from(db);
                Ok(0.cmp(&key))
            }
            ComparisonMode::Incommensurate => {
                let gap = da as f64 * self.j + db as f64 * self.h;
                if gap.abs() <= self.guard {
                    return Err(Error::Ambiguous {
                        a1: p.a,
                        b1: p.b,
                        a2: q.a,
                        b2: q.b,
                        gap,
                    });
                }
                Ok(if gap > 0.0 { Ordering::Less } else { Ordering::Greater })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::boundary_epsilon;
    use crate::model::ModelParams;

    #[test]
    fn commensurate_ties_distinct_points() {
        let q = 0.24;
        let e = boundary_epsilon(q, 2).unwrap();
        let c = ModelParams::new(q, e).unwrap().couplings();
        let order = EnergyOrder::new(&c, ComparisonMode::Commensurate(2)).unwrap();
        // h = J: (a, b) = (1, 0) and (0, 1) have the same energy
        let p = LatticeEnergy::new(1, 0);
        let r = LatticeEnergy::new(0, 1);
        assert_eq!(order.compare(p, r).unwrap(), Ordering::Equal);
        assert_eq!(order.compare(LatticeEnergy::new(2, 0), r).unwrap(), Ordering::Less);

        let inc = EnergyOrder::new(&c, ComparisonMode::Incommensurate).unwrap();
        assert!(matches!(inc.compare(p, r), Err(Error::Ambiguous { .. })));
    }

    #[test]
    fn incommensurate_orders_by_value() {
        let c = ModelParams::new(0.24, 0.15).unwrap().couplings();
        let order = EnergyOrder::new(&c, ComparisonMode::Incommensurate).unwrap();
        let p = LatticeEnergy::new(1, 0);
        let r = LatticeEnergy::new(0, 1);
        // h > J here
        assert_eq!(order.compare(r, p).unwrap(), Ordering::Less);
        assert_eq!(order.compare(p, r).unwrap(), Ordering::Greater);
        assert_eq!(order.compare(p, p).unwrap(), Ordering::Equal);
    }

    #[test]
    fn commensurate_mode_must_match_couplings() {
        let c = ModelParams::new(0.24, 0.15).unwrap().couplings();
        assert!(matches!(
            EnergyOrder::new(&c, ComparisonMode::Commensurate(2)),
            Err(Error::ModeMismatch { m: 2, .. })
        ));
    }
}
