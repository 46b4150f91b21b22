//! Error-compensated floating-point accumulation.

use serde::{Deserialize, Serialize};

/// Running sum with a separate error term (TwoSum / Neumaier).
///
/// Every addition captures its exact rounding error, so the represented value
/// `sum + comp` tracks the true sum to about one rounding of the result even
/// when the terms cancel heavily.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub const ZERO: Compensated = Compensated { sum: 0.0, comp: 0.0 };

    #[inline(always)]
    pub fn add(&mut self, x: f64) {
        two_sum(&mut self.sum, &mut self.comp, x);
    }

    pub fn from_parts(sum: f64, comp: f64) -> Self {
        Compensated { sum, comp }
    }

    /// Folds `other` in as if its terms had been added here.
    #[inline]
    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.comp)
    }
}

/// One Neumaier step on a split `(sum, comp)` pair.
#[inline(always)]
pub(crate) fn two_sum(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    let bp = t - *sum;
    *comp += (*sum - (t - bp)) + (x - bp);
    *sum = t;
}

impl FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Compensated::ZERO;
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
