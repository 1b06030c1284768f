//! The radial constant `C(p) = ∫₀¹ (4 artanh r / (π r))^p r dr` and its
//! closed-form upper bound `(4^{p-1}/π^p)(2^p + (2 - 2^{-p}) Γ(1+p))`.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_ur};
use std::f64::consts::{LN_2, PI};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Where the substituted panel `r = 1 - e^{-u}` starts its cutoff search;
/// `u = 12 ln 10` is `r = 1 - 1e-12`.
const MIN_CUTOFF_U: f64 = 27.631_021_115_928_547;
const MAX_CUTOFF_U: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantReport {
    pub p: f64,
    pub c_value: f64,
    pub upper_bound: f64,
    /// Quadrature error plus the analytic bound on the truncated tail.
    pub error: f64,
    pub tail_bound: f64,
    /// `upper_bound - c_value`.
    pub margin: f64,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent(p))
    }
}

/// `(4^{p-1}/π^p)(2^p + (2 - 2^{-p}) Γ(1+p))`.
pub fn c_upper_bound(p: f64) -> Result<f64> {
    check_exponent(p)?;
    let g = gamma(1.0 + p);
    let inner = 2f64.powf(p) + (2.0 - 2f64.powf(-p)) * g;
    let log = (p - 1.0) * 4f64.ln() - p * PI.ln() + inner.ln();
    let value = log.exp();
    if !g.is_finite() || !inner.is_finite() || !value.is_finite() {
        return Err(Error::Overflow(format!("C(p) upper bound at p = {p}")));
    }
    Ok(value)
}

/// Integrand `(4 artanh r / (π r))^p r` on `[0, 1/2]`.
fn near_integrand(r: f64, p: f64) -> f64 {
    let ratio = if r == 0.0 { 1.0 } else { r.atanh() / r };
    (4.0 / PI * ratio).powf(p) * r
}

/// Integrand after `r = 1 - e^{-u}`, `dr = e^{-u} du`, on `u ≥ ln 2`.
/// `artanh r = (ln(2 - e^{-u}) + u) / 2` avoids cancellation in `1 - r`.
fn far_integrand(u: f64, p: f64) -> f64 {
    let e = (-u).exp();
    let r = 1.0 - e;
    let atanh = 0.5 * ((2.0 - e).ln() + u);
    (4.0 * atanh / (PI * r)).powf(p) * r * e
}

/// Bound on `∫_U^∞ far_integrand(u) du`, from `artanh r ≤ (u + ln 2)/2` and
/// `r ≥ r_U`: `(2/(π r_U))^p · 2 · Γ(p+1, U + ln 2)`.
fn tail_bound(u: f64, p: f64) -> f64 {
    let r = 1.0 - (-u).exp();
    let upper_gamma = gamma(p + 1.0) * gamma_ur(p + 1.0, u + LN_2);
    (2.0 / (PI * r)).powf(p) * 2.0 * upper_gamma
}

fn cutoff(p: f64, tol: f64) -> f64 {
    let mut u = MIN_CUTOFF_U;
    while tail_bound(u, p) > 0.01 * tol && u < MAX_CUTOFF_U {
        u *= 1.25;
    }
    u.min(MAX_CUTOFF_U)
}

/// `C(p)` with absolute error at most `tol` (quadrature plus tail).
pub fn c_of_p_with_tolerance(p: f64, tol: f64) -> Result<ConstantReport> {
    check_exponent(p)?;
    let upper_bound = c_upper_bound(p)?;
    let half = 0.45 * tol;
    let near = integrate(
        |r| near_integrand(r, p),
        &[0.0, 0.25, 0.5],
        Tolerance::absolute(half),
        4000,
    )?;
    let u_max = cutoff(p, tol);
    let mut breaks = vec![LN_2];
    let mut b = 2.0;
    while b < u_max {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(u_max);
    let far = integrate(
        |u| far_integrand(u, p),
        &breaks,
        Tolerance::absolute(half),
        4000,
    )?;
    let tail = tail_bound(u_max, p);
    let c_value = near.value + far.value;
    Ok(ConstantReport {
        p,
        c_value,
        upper_bound,
        error: near.error + far.error + tail,
        tail_bound: tail,
        margin: upper_bound - c_value,
    })
}

pub fn c_of_p(p: f64) -> Result<ConstantReport> {
    c_of_p_with_tolerance(p, DEFAULT_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_closed_forms() {
        assert!((c_upper_bound(1.0).unwrap() - 3.5 / PI).abs() < 1e-14);
        assert!((c_upper_bound(2.0).unwrap() - 30.0 / (PI * PI)).abs() < 1e-13);
    }

    #[test]
    fn c_of_one() {
        let r = c_of_p(1.0).unwrap();
        assert!((r.c_value - 4.0 * LN_2 / PI).abs() < 1e-10, "{}", r.c_value);
        assert!(r.error < 1e-8);
    }

    #[test]
    fn c_of_two_from_zeta() {
        // ∫₀¹ artanh²(r)/r dr = 7ζ(3)/8, so C(2) = 14ζ(3)/π².
        let n = 100_000u64;
        let zeta3: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64).powi(3)).sum::<f64>()
            + 1.0 / (2.0 * (n as f64).powi(2));
        let r = c_of_p(2.0).unwrap();
        assert!(
            (r.c_value - 14.0 * zeta3 / (PI * PI)).abs() < 1e-9,
            "{}",
            r.c_value
        );
    }

    #[test]
    fn below_bound_for_many_p() {
        for p in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 25.0] {
            let r = c_of_p(p).unwrap();
            assert!(r.c_value + r.error < r.upper_bound, "p={p}");
            assert!(r.error < 1e-8 * r.c_value.max(1.0), "p={p} err={}", r.error);
        }
    }

    #[test]
    fn stable_under_tighter_tolerance() {
        for p in [1.0, 2.5, 7.0] {
            let a = c_of_p_with_tolerance(p, 1e-9).unwrap();
            let b = c_of_p_with_tolerance(p, 5e-10).unwrap();
            assert!((a.c_value - b.c_value).abs() < a.error);
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(matches!(
            c_of_p(f64::INFINITY),
            Err(Error::UnsupportedExponent(_))
        ));
        assert!(matches!(c_of_p(0.5), Err(Error::UnsupportedExponent(_))));
        assert!(matches!(c_upper_bound(400.0), Err(Error::Overflow(_))));
    }
}
