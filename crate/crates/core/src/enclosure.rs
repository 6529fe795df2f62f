use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A computed value together with a certified absolute error bound.
///
/// The true value lies within `bound` of `value`. Bounds come from analytic
/// tail estimates; floating-point rounding is not tracked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure<T = f64> {
    pub value: T,
    pub bound: f64,
}

impl<T> Enclosure<T> {
    pub fn new(value: T, bound: f64) -> Self {
        debug_assert!(bound >= 0.0 && bound.is_finite());
        Enclosure { value, bound }
    }
}

impl Enclosure<f64> {
    pub fn exact(value: f64) -> Self {
        Enclosure { value, bound: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.bound
    }

    pub fn hi(&self) -> f64 {
        self.value + self.bound
    }

    /// Whether `x` lies in the enclosure widened by `slack`.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x - self.value).abs() <= self.bound + slack
    }

    /// Whether two enclosures can describe the same number.
    pub fn overlaps(&self, other: &Enclosure<f64>, slack: f64) -> bool {
        (self.value - other.value).abs() <= self.bound + other.bound + slack
    }
}

impl Enclosure<Complex64> {
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        (z - self.value).norm() <= self.bound + slack
    }
}
