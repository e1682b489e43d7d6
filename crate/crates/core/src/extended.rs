//! Extended-real energy values.
//!
//! `+∞` is a sentinel variant, never an IEEE infinity inside arithmetic;
//! sums and comparisons short-circuit on it.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// Unwraps a finite value or reports which quantity was unexpectedly infinite.
    pub fn expect_finite(self, what: &str) -> Result<f64> {
        self.finite()
            .ok_or_else(|| Error::InvalidState(format!("{what} is infinite")))
    }

    pub fn add_finite(self, rhs: f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::Finite(v + rhs),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended::Finite(v)
    }
}

impl std::ops::Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use Extended::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinite) => Some(std::cmp::Ordering::Less),
            (Infinite, Finite(_)) => Some(std::cmp::Ordering::Greater),
            (Infinite, Infinite) => Some(std::cmp::Ordering::Equal),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_sums() {
        let s = Extended::Finite(1.0) + Extended::Infinite;
        assert_eq!(s, Extended::Infinite);
        assert_eq!(Extended::Infinite.add_finite(-5.0), Extended::Infinite);
    }

    #[test]
    fn ordering_short_circuits() {
        assert!(Extended::Finite(1e300) < Extended::Infinite);
        assert!(Extended::Infinite >= Extended::Finite(f64::MAX));
    }
}
