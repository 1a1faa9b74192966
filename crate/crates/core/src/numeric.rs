//! Compensated summation for long reductions.

use std::iter::Sum;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl Sum<f64> for Compensated {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        iter.for_each(|x| acc.add(x));
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let s: Compensated = [1.0, 1e100, 1.0, -1e100].into_iter().sum();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn many_small_increments() {
        let mut acc = Compensated::default();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-22);
    }
}
