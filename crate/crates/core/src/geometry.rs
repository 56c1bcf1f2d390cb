//! Flat pseudo-Riemannian kernels.
//!
//! Everything here works on a `(1, n_x)` submanifold: a single time
//! displacement `dt` and a spatial displacement `dx`. Multi-time points are
//! reduced to one time axis by [`crate::relmaps::time_project`] first.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Metric signature: `n_t` timelike and `n_x` spacelike dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    n_t: usize,
    n_x: usize,
}

impl Signature {
    pub fn new(n_t: usize, n_x: usize) -> Result<Self> {
        if n_t == 0 || n_x == 0 {
            return Err(invalid("signature needs n_t >= 1 and n_x >= 1"));
        }
        Ok(Self { n_t, n_x })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Embedding dimension `n_t + n_x`.
    pub fn dim(&self) -> usize {
        self.n_t + self.n_x
    }

    /// Dimension of a projected `(1, n_x)` point.
    pub fn projected_dim(&self) -> usize {
        1 + self.n_x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub signature: Signature,
    /// Circumference of the compact time direction; `None` for ordinary
    /// (non-compact) time.
    cylinder: Option<f64>,
}

impl GeometryConfig {
    pub fn new(signature: Signature, cylinder: Option<f64>) -> Result<Self> {
        if let Some(c) = cylinder {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid("cylinder circumference must be positive and finite"));
            }
        }
        Ok(Self { signature, cylinder })
    }

    pub fn flat(n_t: usize, n_x: usize) -> Result<Self> {
        Self::new(Signature::new(n_t, n_x)?, None)
    }

    pub fn cylinder(&self) -> Option<f64> {
        self.cylinder
    }

    /// Time displacement as seen on the submanifold: wrapped onto
    /// `[-C/2, C/2)` when time is compact, unchanged otherwise.
    #[inline]
    pub fn displacement(&self, dt: f64) -> f64 {
        match self.cylinder {
            Some(c) => wrap_unchecked(dt, c),
            None => dt,
        }
    }
}

/// A point with `n_t` time and `n_x` space coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimePoint {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

impl SpacetimePoint {
    pub fn new(t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if t.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(invalid("spacetime coordinates must be finite"));
        }
        Ok(Self { t, x })
    }

    /// Splits a row laid out as `[t_0..t_{n_t}, x_0..x_{n_x}]`.
    pub fn from_row(row: &[f64], n_t: usize) -> Self {
        Self {
            t: row[..n_t].to_vec(),
            x: row[n_t..].to_vec(),
        }
    }
}

/// Representative of `t` modulo `c` in the half-open interval `[-c/2, c/2)`.
pub fn wrap_time(t: f64, c: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(invalid("wrap_time: t must be finite"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid("wrap_time: circumference must be positive"));
    }
    Ok(wrap_unchecked(t, c))
}

#[inline]
pub(crate) fn wrap_unchecked(t: f64, c: f64) -> f64 {
    let half = 0.5 * c;
    let mut r = t - c * libm::floor((t + half) / c);
    // rounding can land exactly on an endpoint
    if r >= half {
        r -= c;
    } else if r < -half {
        r += c;
    }
    r
}

/// Squared interval `-dt^2 + |dx|^2`. Negative for timelike, zero for
/// lightlike and positive for spacelike separation.
#[inline]
pub fn squared_interval(dt: f64, dx: &[f64]) -> f64 {
    -dt * dt + norm_sq(dx)
}

/// Squared distance under the Wick-rotated (Euclidean) metric.
#[inline]
pub fn wick_squared_distance(dt: f64, dx: &[f64]) -> f64 {
    dt * dt + norm_sq(dx)
}

/// Wick rotation of a diagonal metric: element-wise absolute value.
pub fn wick_rotate_metric(diag: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = diag.iter().position(|&a| a == 0.0) {
        return Err(Error::DegenerateMetric { index });
    }
    Ok(diag.iter().map(|a| a.abs()).collect())
}

#[inline]
pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_wrap(t: f64, c: f64) -> f64 {
        // smallest |t - a c| over a window of integers, ties to the negative side
        let mut best = f64::INFINITY;
        for a in -400..=400 {
            let r = t - a as f64 * c;
            if r >= -c / 2.0 && r < c / 2.0 {
                best = r;
            }
        }
        best
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_time(0.0, 8.0).unwrap(), 0.0);
        assert_eq!(wrap_time(7.0, 8.0).unwrap(), -1.0);
        assert_eq!(wrap_time(-4.0, 8.0).unwrap(), -4.0);
        assert_eq!(wrap_time(4.0, 8.0).unwrap(), -4.0);
        assert_eq!(brute_wrap(7.0, 8.0), -1.0);
        assert_eq!(brute_wrap(-4.0, 8.0), -4.0);
    }

    #[test]
    fn wrap_errors() {
        assert!(wrap_time(f64::NAN, 8.0).is_err());
        assert!(wrap_time(f64::INFINITY, 8.0).is_err());
        assert!(wrap_time(1.0, 0.0).is_err());
        assert!(wrap_time(1.0, -2.0).is_err());
    }

    #[test]
    fn interval_examples() {
        assert_eq!(squared_interval(0.0, &[0.0, 0.0]), 0.0);
        assert_eq!(squared_interval(1.0, &[0.0]), -1.0);
        assert_eq!(squared_interval(1.0, &[2.0]), 3.0);
        assert_eq!(wick_squared_distance(0.0, &[0.0]), 0.0);
        assert_eq!(wick_squared_distance(1.0, &[0.0]), 1.0);
        assert_eq!(wick_squared_distance(1.0, &[2.0]), 5.0);
    }

    #[test]
    fn wick_metric() {
        assert_eq!(wick_rotate_metric(&[-1.0, 1.0]).unwrap(), [1.0, 1.0]);
        assert_eq!(wick_rotate_metric(&[-1.0, -1.0, 1.0]).unwrap(), [1.0, 1.0, 1.0]);
        assert_eq!(wick_rotate_metric(&[-2.0, 3.0]).unwrap(), [2.0, 3.0]);
        assert_eq!(
            wick_rotate_metric(&[-1.0, 0.0]),
            Err(Error::DegenerateMetric { index: 1 })
        );
    }

    #[test]
    fn config_validation() {
        assert!(Signature::new(0, 3).is_err());
        assert!(Signature::new(1, 0).is_err());
        let sig = Signature::new(2, 3).unwrap();
        assert_eq!(sig.dim(), 5);
        assert_eq!(sig.projected_dim(), 4);
        assert!(GeometryConfig::new(sig, Some(0.0)).is_err());
        assert!(GeometryConfig::new(sig, Some(f64::NAN)).is_err());
        let g = GeometryConfig::new(sig, Some(8.0)).unwrap();
        assert_eq!(g.displacement(7.0), -1.0);
        assert_eq!(GeometryConfig::flat(1, 1).unwrap().displacement(7.0), 7.0);
    }

    proptest! {
        #[test]
        fn interval_relations(dt in -1e3..1e3f64, dx in proptest::collection::vec(-1e3..1e3f64, 1..6)) {
            let s2 = squared_interval(dt, &dx);
            let w2 = wick_squared_distance(dt, &dx);
            prop_assert!((s2 - (w2 - 2.0 * dt * dt)).abs() <= 1e-9 * w2.max(1.0));
            prop_assert!(w2 >= 0.0);
            prop_assert!(w2 >= s2);
            let neg: Vec<f64> = dx.iter().map(|v| -v).collect();
            prop_assert_eq!(squared_interval(-dt, &neg), s2);
            prop_assert_eq!(wick_squared_distance(-dt, &neg), w2);
        }

        #[test]
        fn wrap_periodic(t in -100.0..100.0f64, c in 0.1..20.0f64, k in -3i32..=3) {
            let w = wrap_time(t, c).unwrap();
            prop_assert!(w >= -c / 2.0 && w < c / 2.0);
            let shifted = wrap_time(t + k as f64 * c, c).unwrap();
            // equal modulo c up to rounding of the shift itself
            let d = (shifted - w).abs();
            prop_assert!(d < 1e-9 || (d - c).abs() < 1e-9, "w={} shifted={}", w, shifted);
        }

        #[test]
        fn wrap_matches_brute_force(t in -50.0..50.0f64, c in 0.5..10.0f64) {
            let w = wrap_time(t, c).unwrap();
            let b = brute_wrap(t, c);
            prop_assert!((w - b).abs() < 1e-9 || ((w - b).abs() - c).abs() < 1e-9);
        }
    }
}
