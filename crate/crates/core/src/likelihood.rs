//! Fermi-Dirac likelihoods, all in the log domain.
//!
//! With Table-scale temperatures the exponent `(a x - u) / tau` easily reaches
//! the thousands, so nothing here ever forms a probability directly.

use crate::error::{invalid, Error, Result};

/// Parameters of the Triple Fermi-Dirac likelihood and the Wick mixing weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfdParams {
    pub tau1: f64,
    pub tau2: f64,
    /// Radius (margin) of the interval term.
    pub u: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    /// Prefactor `k`; only `1` is accepted so the likelihood stays in `(0, 1)`.
    pub k_scale: f64,
    /// Weight of the Wick-rotated term: 0 is pure Minkowski, 1 pure Euclidean.
    pub beta: f64,
}

impl TfdParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.tau1,
            self.tau2,
            self.u,
            self.alpha,
            self.alpha_prime,
            self.k_scale,
            self.beta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("likelihood parameters must be finite"));
        }
        if self.tau1 <= 0.0 || self.tau2 <= 0.0 {
            return Err(invalid("temperatures tau1, tau2 must be positive"));
        }
        if self.u < 0.0 {
            return Err(invalid("radius u must be non-negative"));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("alpha_prime", self.alpha_prime),
            ("beta", self.beta),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.k_scale != 1.0 {
            return Err(invalid("k_scale is fixed to 1"));
        }
        Ok(())
    }
}

impl Default for TfdParams {
    fn default() -> Self {
        Self {
            tau1: 1.0,
            tau2: 1.0,
            u: 0.0,
            alpha: 0.0,
            alpha_prime: 0.0,
            k_scale: 1.0,
            beta: 0.0,
        }
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `log(1 - e^a)` for `a < 0`.
#[inline]
pub(crate) fn log1mexp(a: f64) -> f64 {
    if a > -core::f64::consts::LN_2 {
        libm::log(-libm::expm1(a))
    } else {
        libm::log1p(-libm::exp(a))
    }
}

/// Log of the Fermi-Dirac function `1 / (exp((alpha x - u) / tau) + 1)`.
pub fn log_fd(x: f64, tau: f64, u: f64, alpha: f64) -> Result<f64> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(invalid("log_fd: tau must be positive"));
    }
    Ok(log_fd_unchecked(x, tau, u, alpha))
}

#[inline]
pub(crate) fn log_fd_unchecked(x: f64, tau: f64, u: f64, alpha: f64) -> f64 {
    -softplus((alpha * x - u) / tau)
}

/// Log of the Triple Fermi-Dirac likelihood for squared interval `s2` and
/// time displacement `dt` (head minus tail).
pub fn log_tfd(s2: f64, dt: f64, params: &TfdParams) -> Result<f64> {
    params.validate()?;
    Ok(log_tfd_unchecked(s2, dt, params))
}

#[inline]
pub(crate) fn log_tfd_unchecked(s2: f64, dt: f64, p: &TfdParams) -> f64 {
    let f1 = log_fd_unchecked(s2, p.tau1, p.u, 1.0);
    let f2 = log_fd_unchecked(-dt, p.tau2, 0.0, p.alpha);
    let f3 = log_fd_unchecked(dt, p.tau2, 0.0, p.alpha_prime);
    libm::log(p.k_scale) + (f1 + f2 + f3) / 3.0
}

/// Log of the interval term evaluated on the Wick-rotated squared distance.
#[inline]
pub fn log_wick_fd(wick_s2: f64, params: &TfdParams) -> f64 {
    log_fd_unchecked(wick_s2, params.tau1, params.u, 1.0)
}

/// Weighted geometric mean of the two likelihoods, in log form.
pub fn log_interpolated(log_tfd_val: f64, log_wick_fd_val: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid("beta must lie in [0, 1]"));
    }
    Ok(mix(log_tfd_val, log_wick_fd_val, beta))
}

#[inline]
pub(crate) fn mix(log_tfd_val: f64, log_wick_fd_val: f64, beta: f64) -> f64 {
    // exact at the endpoints
    if beta == 0.0 {
        log_tfd_val
    } else if beta == 1.0 {
        log_wick_fd_val
    } else {
        (1.0 - beta) * log_tfd_val + beta * log_wick_fd_val
    }
}

/// `logit(p)` given `log p`.
pub fn logit_from_log(log_p: f64) -> Result<f64> {
    if log_p.is_nan() || log_p >= 0.0 {
        return Err(Error::Domain(log_p));
    }
    Ok(log_p - log1mexp(log_p))
}
