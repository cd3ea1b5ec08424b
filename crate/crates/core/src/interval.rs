use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::precondition(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// The affine map `ℓ(t) = lo + (hi − lo) t` taking `[0, 1]` onto `[lo, hi]`.
///
/// Every place that maps unit-interval fractions into a window goes through
/// [`AffineMap::apply`], so M-set endpoints and normalized-measure lookups
/// land on bit-identical abscissae.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    lo: f64,
    width: f64,
    hi: f64,
}

impl AffineMap {
    pub fn onto(window: Interval) -> Self {
        AffineMap {
            lo: window.lo,
            width: window.hi - window.lo,
            hi: window.hi,
        }
    }

    pub fn apply(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return self.hi;
        }
        (self.lo + self.width * t).clamp(self.lo, self.hi)
    }

    pub fn window(&self) -> Interval {
        Interval {
            lo: self.lo,
            hi: self.hi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_map_hits_both_endpoints() {
        let map = AffineMap::onto(Interval::new(0.1, 0.7).unwrap());
        assert_eq!(map.apply(0.0), 0.1);
        assert_eq!(map.apply(1.0), 0.7);
        assert!(map.apply(0.5) > 0.1 && map.apply(0.5) < 0.7);
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(0.0, f64::NAN).is_err());
    }
}
