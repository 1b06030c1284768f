//! Harmonic extension `f = P[F]` of boundary data to the disk.
//!
//! The extension is the series `f(re^{it}) = Σ c_n r^{|n|} e^{int}`, stored
//! as a [`HolomorphicPair`] `f = h + conj(g)`. [`extend_oracle`] evaluates the
//! Poisson integral directly by adaptive quadrature and exists only to
//! cross-check the series.

use crate::boundary::{fourier_coefficients, BoundarySpec, FourierCoefficients, Tail};
use crate::error::{Error, Result};
use crate::fft;
use crate::quadrature::{integrate, Tolerance};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Terms with `n r^{n-1}` below this are dropped when folding onto a circle.
const NEGLIGIBLE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionOptions {
    /// Base truncation `N` of the series.
    pub truncation: usize,
    /// Hard cap for adaptive refinement near the boundary.
    pub max_truncation: usize,
    /// Target for the per-point truncation error bound.
    pub tail_tolerance: f64,
    /// Radius beyond which the truncation is increased adaptively.
    pub near_boundary: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            truncation: 2048,
            max_truncation: 1 << 16,
            tail_tolerance: 1e-8,
            near_boundary: 0.99,
        }
    }
}

/// Power-series coefficients of `h` and `g` with `f = h + conj(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicPair {
    /// `a_0..a_N`, `a_n = c_n`.
    h: Vec<Complex64>,
    /// `b_0..b_N` with `b_0 = 0`, `b_n = conj(c_{-n})`.
    g: Vec<Complex64>,
    tail: Tail,
}

impl HolomorphicPair {
    pub fn from_coefficients(coeffs: &FourierCoefficients) -> Self {
        let n_max = coeffs.truncation() as i64;
        let h = (0..=n_max).map(|n| coeffs.get(n)).collect();
        let g = (0..=n_max)
            .map(|n| if n == 0 { C0 } else { coeffs.get(-n).conj() })
            .collect();
        HolomorphicPair {
            h,
            g,
            tail: coeffs.tail().clone(),
        }
    }

    pub fn truncation(&self) -> usize {
        self.h.len() - 1
    }

    pub fn h_coefficients(&self) -> &[Complex64] {
        &self.h
    }

    pub fn g_coefficients(&self) -> &[Complex64] {
        &self.g
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// True when `g ≡ 0`, i.e. `f` is holomorphic.
    pub fn is_analytic(&self) -> bool {
        self.g.iter().all(|b| *b == C0)
    }

    /// True when `h ≡ 0`, i.e. `f` is antiholomorphic.
    pub fn is_antianalytic(&self) -> bool {
        self.h.iter().all(|a| *a == C0)
    }

    pub fn h(&self, z: Complex64) -> Complex64 {
        horner(&self.h, z)
    }

    pub fn g(&self, z: Complex64) -> Complex64 {
        horner(&self.g, z)
    }

    pub fn h_prime(&self, z: Complex64) -> Complex64 {
        horner_derivative(&self.h, z)
    }

    pub fn g_prime(&self, z: Complex64) -> Complex64 {
        horner_derivative(&self.g, z)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.h(z) + self.g(z).conj()
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(C0, |acc, &a| acc * z + a)
}

fn horner_derivative(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C0, |acc, (n, &a)| acc * z + a * n as f64)
}

/// A value together with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation<T> {
    pub value: T,
    pub bound: f64,
    pub degraded: bool,
    pub truncation: usize,
}

/// `f_z` and `f_z̄` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wirtinger {
    pub f_z: Complex64,
    pub f_zbar: Complex64,
    pub bound: f64,
    pub degraded: bool,
    pub truncation: usize,
}

/// Uniform samples of `f`, `f_z`, `f_z̄` on the circle `|z| = r`, at
/// `θ_j = 2πj/m`.
#[derive(Debug, Clone)]
pub struct CircleSamples {
    pub r: f64,
    pub f: Option<Vec<Complex64>>,
    pub f_z: Vec<Complex64>,
    pub f_zbar: Vec<Complex64>,
    /// Truncation bound on each value of `f`.
    pub bound_f: f64,
    /// Truncation bound on each derivative value.
    pub bound_derivative: f64,
    pub degraded: bool,
    pub truncation: usize,
}

impl CircleSamples {
    pub fn len(&self) -> usize {
        self.f_z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_z.is_empty()
    }

    pub fn point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.r, TAU * j as f64 / self.len() as f64)
    }
}

/// The Poisson extension of a boundary function, evaluable anywhere in `D`.
///
/// Near the boundary the series truncation is raised adaptively; the
/// coefficient ladder is built lazily and shared, so evaluation is pure.
#[derive(Debug)]
pub struct DiskField {
    spec: BoundarySpec,
    options: ExtensionOptions,
    ladder: Vec<OnceLock<Result<Arc<HolomorphicPair>>>>,
    truncations: Vec<usize>,
}

/// Build the series extension of `spec` truncated at `options.truncation`.
pub fn extend(spec: &BoundarySpec, options: ExtensionOptions) -> Result<DiskField> {
    DiskField::new(spec.clone(), options)
}

impl DiskField {
    pub fn new(spec: BoundarySpec, options: ExtensionOptions) -> Result<Self> {
        if options.truncation == 0 || options.tail_tolerance <= 0.0 {
            return Err(Error::Config(
                "truncation and tail tolerance must be positive".into(),
            ));
        }
        let mut truncations = vec![options.truncation];
        let finite = spec.bandwidth();
        let mut n = options.truncation;
        while n < options.max_truncation && finite.is_none_or(|b| n < b) {
            n = (2 * n).min(options.max_truncation);
            truncations.push(n);
        }
        let ladder = truncations.iter().map(|_| OnceLock::new()).collect();
        let field = DiskField {
            spec,
            options,
            ladder,
            truncations,
        };
        // Surface coefficient errors eagerly.
        field.level(0)?;
        Ok(field)
    }

    pub fn spec(&self) -> &BoundarySpec {
        &self.spec
    }

    pub fn options(&self) -> &ExtensionOptions {
        &self.options
    }

    /// The base-truncation pair.
    pub fn pair(&self) -> Arc<HolomorphicPair> {
        self.level(0)
            .expect("base level is validated at construction")
    }

    fn level(&self, i: usize) -> Result<Arc<HolomorphicPair>> {
        self.ladder[i]
            .get_or_init(|| {
                fourier_coefficients(&self.spec, self.truncations[i])
                    .map(|c| Arc::new(HolomorphicPair::from_coefficients(&c)))
            })
            .clone()
    }

    /// Pair used at radius `r` for derivative `order`, with its tail bound.
    fn select(&self, r: f64, order: u32) -> Result<(Arc<HolomorphicPair>, f64, bool)> {
        let tol = self.options.tail_tolerance;
        let base = self.level(0)?;
        let bound = base.tail().bound(r, order);
        if r <= self.options.near_boundary || bound <= tol {
            return Ok((base, bound, bound > tol));
        }
        let mut best = (base, bound);
        for i in 1..self.truncations.len() {
            let pair = match self.level(i) {
                Ok(p) => p,
                // Sampled data cannot supply more coefficients.
                Err(Error::InvalidInput(_)) => break,
                Err(e) => return Err(e),
            };
            let b = pair.tail().bound(r, order);
            best = (pair, b);
            if b <= tol {
                break;
            }
        }
        let degraded = best.1 > tol;
        Ok((best.0, best.1, degraded))
    }

    fn check_point(z: Complex64) -> Result<f64> {
        let r = z.norm();
        if r.is_nan() || r >= 1.0 {
            return Err(Error::Domain { z });
        }
        Ok(r)
    }

    pub fn eval(&self, z: Complex64) -> Result<Evaluation<Complex64>> {
        let r = Self::check_point(z)?;
        let (pair, bound, degraded) = self.select(r, 0)?;
        Ok(Evaluation {
            value: pair.eval(z),
            bound,
            degraded,
            truncation: pair.truncation(),
        })
    }

    /// `f_z = h'(z)` and `f_z̄ = conj(g'(z))` by termwise differentiation.
    pub fn wirtinger(&self, z: Complex64) -> Result<Wirtinger> {
        let r = Self::check_point(z)?;
        let (pair, bound, degraded) = self.select(r, 1)?;
        Ok(Wirtinger {
            f_z: pair.h_prime(z),
            f_zbar: pair.g_prime(z).conj(),
            bound,
            degraded,
            truncation: pair.truncation(),
        })
    }

    /// Sample `f_z`, `f_z̄` (and `f` when `with_values`) on `|z| = r` at `m`
    /// equispaced angles using folded inverse FFTs.
    pub fn circle(&self, r: f64, m: usize, with_values: bool) -> Result<CircleSamples> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain {
                z: Complex64::new(r, 0.0),
            });
        }
        if m == 0 {
            return Err(Error::InvalidInput(
                "circle needs at least one angle".into(),
            ));
        }
        let (pair, bound_derivative, degraded) = self.select(r, 1)?;
        let bound_f = pair.tail().bound(r, 0);
        let mm = m as i64;
        let slot = |n: i64| n.rem_euclid(mm) as usize;
        let h = pair.h_coefficients();
        let g = pair.g_coefficients();

        let mut dz = vec![C0; m];
        let mut dzbar = vec![C0; m];
        let mut vals = with_values.then(|| vec![C0; m]);
        if let Some(v) = vals.as_mut() {
            v[0] += h[0];
        }
        let mut r_prev = 1.0; // r^{n-1}
        for n in 1..h.len() {
            let weight = n as f64 * r_prev;
            let rn = r_prev * r;
            if weight < NEGLIGIBLE && rn < NEGLIGIBLE {
                break;
            }
            let ni = n as i64;
            dz[slot(ni - 1)] += h[n] * weight;
            dzbar[slot(1 - ni)] += g[n].conj() * weight;
            if let Some(v) = vals.as_mut() {
                v[slot(ni)] += h[n] * rn;
                v[slot(-ni)] += g[n].conj() * rn;
            }
            r_prev = rn;
        }
        Ok(CircleSamples {
            r,
            f: vals.map(fft::synthesize_folded),
            f_z: fft::synthesize_folded(dz),
            f_zbar: fft::synthesize_folded(dzbar),
            bound_f,
            bound_derivative,
            degraded,
            truncation: pair.truncation(),
        })
    }

    /// Truncation the field uses for derivatives at radius `r`.
    pub fn truncation_at(&self, r: f64) -> Result<usize> {
        Ok(self.select(r, 1)?.0.truncation())
    }
}

/// `P(z, e^{iθ}) = (1/2π)(1 - |z|²)/|1 - z e^{-iθ}|²`.
pub fn poisson_kernel(z: Complex64, theta: f64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2.is_nan() || r2 >= 1.0 {
        return Err(Error::Domain { z });
    }
    let d = Complex64::new(1.0, 0.0) - z * Complex64::from_polar(1.0, -theta);
    Ok((1.0 - r2) / (TAU * d.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBudget {
    pub tolerance: f64,
    pub max_panels: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            tolerance: 1e-11,
            max_panels: 20_000,
        }
    }
}

/// `P[F](z)` by adaptive Gauss-Kronrod quadrature of the Poisson integral,
/// with panels split at the corners of `F` and at the kernel peak `arg z`.
pub fn extend_oracle(
    spec: &BoundarySpec,
    z: Complex64,
    budget: OracleBudget,
) -> Result<OracleValue> {
    if z.norm().is_nan() || z.norm() >= 1.0 {
        return Err(Error::Domain { z });
    }
    let mut breaks = vec![0.0, TAU];
    breaks.extend(spec.corners());
    if z.norm() > 0.0 {
        breaks.push(z.arg().rem_euclid(TAU));
        // Split the peak panel once more on either side of the peak.
        let width = (1.0 - z.norm()).max(1e-6);
        let peak = z.arg().rem_euclid(TAU);
        breaks.push((peak - width).rem_euclid(TAU));
        breaks.push((peak + width).rem_euclid(TAU));
    }
    breaks.retain(|t| (0.0..=TAU).contains(t));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let r2 = z.norm_sqr();
    let integral = integrate(
        |t: f64| {
            let d = Complex64::new(1.0, 0.0) - z * Complex64::from_polar(1.0, -t);
            spec.eval(t) * ((1.0 - r2) / (TAU * d.norm_sqr()))
        },
        &breaks,
        Tolerance::absolute(budget.tolerance),
        budget.max_panels,
    )?;
    Ok(OracleValue {
        value: integral.value,
        error: integral.error,
        panels: integral.panels,
    })
}

/// Mean value of the kernel over the circle; equals 1 up to quadrature error.
pub fn kernel_mass(z: Complex64) -> Result<f64> {
    poisson_kernel(z, 0.0)?;
    let mut breaks = vec![0.0, TAU];
    if z.norm() > 0.0 {
        breaks.push(z.arg().rem_euclid(TAU));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let i = integrate(
        |t: f64| poisson_kernel(z, t).unwrap_or(0.0),
        &breaks,
        Tolerance::absolute(1e-14),
        2000,
    )?;
    Ok(i.value)
}
