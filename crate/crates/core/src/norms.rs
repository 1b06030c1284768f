//! Circle means `M_p(r, s)`, Hardy norms `sup_r M_p(r, s)` and Bergman area
//! norms `(∫_D |s|^p dσ)^{1/p}` of scalar fields on the disk.
//!
//! Angular integrals use the trapezoid rule on a uniform grid, refined by
//! doubling. Radial integrals use 15-point Kronrod panels: two on `[0, 1/2]`
//! and one on each geometric shell `[1 - 2^{-k}, 1 - 2^{-k-1}]`, with a
//! geometric extrapolation of the remaining shells.

use crate::error::{Error, Result};
use crate::extension::DiskField;
use crate::par;
use crate::quadrature::{embedded_gauss_weights, kronrod_nodes};
use crate::sum;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_LEVELS: usize = 12;
pub const MAX_ANGULAR: usize = 1 << 20;

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Exponent::Finite(p) if p.is_finite() && p >= 1.0 => Ok(()),
            Exponent::Finite(p) => Err(Error::UnsupportedExponent(p)),
            Exponent::Infinity => Ok(()),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Parse a comma separated list such as `1,1.5,inf`.
    pub fn parse_list(s: &str) -> Result<Vec<Exponent>> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let e = match t {
            "inf" | "infinity" | "∞" => Exponent::Infinity,
            _ => Exponent::Finite(
                t.parse()
                    .map_err(|_| Error::InvalidInput(format!("bad exponent `{t}`")))?,
            ),
        };
        e.validate()?;
        Ok(e)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent::Finite(p)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    CircleMean { r: f64 },
    Hardy,
    Bergman,
    CircleLp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct GridMeta {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub refinement_level: usize,
}

/// Area integrals `∫ |s|^p dσ` over `D_{1/2}` and `D \ D_{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSplit {
    pub inner: f64,
    pub inner_error: f64,
    pub outer: f64,
    pub outer_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    #[serde(flatten)]
    pub kind: NormKind,
    pub p: Exponent,
    pub value: f64,
    pub error_estimate: f64,
    /// The `+∞` marker: the refining sequence was classified as divergent.
    pub divergent: bool,
    /// Extrapolated limit of the radial sequence, when it converges
    /// geometrically.
    pub extrapolated: Option<f64>,
    /// Circle means were verified nondecreasing in `r` for a modulus of an
    /// analytic function, so the last grid node dominates.
    pub monotone_certificate: bool,
    pub degraded: bool,
    pub trend: Vec<f64>,
    pub grid: GridMeta,
}

impl NormReport {
    /// Extrapolated value when available, else the grid value.
    pub fn best_value(&self) -> f64 {
        self.extrapolated.unwrap_or(self.value).max(self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormOptions {
    /// Radial levels `k = 1..=levels` of the grid `r_k = 1 - 2^{-k}`.
    pub levels: usize,
    /// Relative tolerance of the angular doubling.
    pub circle_tol: f64,
    pub max_angular: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            levels: DEFAULT_LEVELS,
            circle_tol: 1e-10,
            max_angular: MAX_ANGULAR,
        }
    }
}

/// Scalar quantities derived from a disk field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldQuantity {
    /// `|f|`
    Value,
    /// `|f_z|`
    Fz,
    /// `|f_z̄|`
    Fzbar,
    /// `‖D_f‖`
    OpNorm,
    /// `l(D_f)`
    MinStretch,
    /// `|f_t|`
    Ft,
    /// `|f_r|`
    Fr,
    /// `|f_t| / r`
    FtOverR,
}

impl FromStr for FieldQuantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "f" | "value" => FieldQuantity::Value,
            "fz" => FieldQuantity::Fz,
            "fzbar" => FieldQuantity::Fzbar,
            "opnorm" => FieldQuantity::OpNorm,
            "min-stretch" => FieldQuantity::MinStretch,
            "ft" => FieldQuantity::Ft,
            "fr" => FieldQuantity::Fr,
            "ft-over-r" => FieldQuantity::FtOverR,
            _ => return Err(Error::InvalidInput(format!("unknown scalar `{s}`"))),
        })
    }
}

type PointFn<'a> = Box<dyn Fn(Complex64) -> f64 + Send + Sync + 'a>;

/// A nonnegative scalar on the disk whose norms can be computed.
pub struct Scalar<'a> {
    source: Source<'a>,
}

enum Source<'a> {
    Field {
        field: &'a DiskField,
        quantity: FieldQuantity,
        scale: f64,
    },
    Function {
        f: PointFn<'a>,
        analytic_modulus: bool,
    },
}

/// Samples of a scalar on one circle.
#[derive(Debug, Clone)]
pub struct ScalarCircle {
    pub values: Vec<f64>,
    /// Bound on the absolute error of each value from series truncation.
    pub bound: f64,
    pub degraded: bool,
    /// Signed values when the scalar is the modulus of a real quantity;
    /// `values` is then `|signed|`.
    pub signed: Option<Vec<f64>>,
}

/// `w` as signed reals if it lies on the real or the imaginary axis up to
/// rounding.
fn real_part(w: &[Complex64]) -> Option<Vec<f64>> {
    let scale = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if w.iter().all(|x| x.im.abs() <= 1e-12 * scale) {
        Some(w.iter().map(|x| x.re).collect())
    } else if w.iter().all(|x| x.re.abs() <= 1e-12 * scale) {
        Some(w.iter().map(|x| x.im).collect())
    } else {
        None
    }
}

impl<'a> Scalar<'a> {
    pub fn of(field: &'a DiskField, quantity: FieldQuantity) -> Self {
        Scalar {
            source: Source::Field {
                field,
                quantity,
                scale: 1.0,
            },
        }
    }

    /// Scalar given pointwise. `analytic_modulus` declares `s = |φ|` for a
    /// holomorphic `φ`, which enables the Hardy monotonicity certificate.
    pub fn function<F>(f: F, analytic_modulus: bool) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'a,
    {
        Scalar {
            source: Source::Function {
                f: Box::new(f),
                analytic_modulus,
            },
        }
    }

    /// `λ·s` for `λ ≥ 0`.
    pub fn scaled(self, lambda: f64) -> Self {
        match self.source {
            Source::Field {
                field,
                quantity,
                scale,
            } => Scalar {
                source: Source::Field {
                    field,
                    quantity,
                    scale: scale * lambda.abs(),
                },
            },
            Source::Function {
                f,
                analytic_modulus,
            } => Scalar {
                source: Source::Function {
                    f: Box::new(move |z| lambda.abs() * f(z)),
                    analytic_modulus,
                },
            },
        }
    }

    pub fn analytic_modulus(&self) -> bool {
        match &self.source {
            Source::Field {
                field, quantity, ..
            } => match quantity {
                FieldQuantity::Fz | FieldQuantity::Fzbar => true,
                FieldQuantity::Value => {
                    field.pair().is_analytic() || field.pair().is_antianalytic()
                }
                FieldQuantity::OpNorm | FieldQuantity::Fr => {
                    field.pair().is_analytic() || field.pair().is_antianalytic()
                }
                _ => false,
            },
            Source::Function {
                analytic_modulus, ..
            } => *analytic_modulus,
        }
    }

    /// Number of Fourier modes that matter on the circle of radius `r`.
    fn bandwidth(&self, r: f64) -> Result<usize> {
        match &self.source {
            Source::Field { field, .. } => {
                let trunc = field.truncation_at(r)?;
                let finite = field.spec().bandwidth().unwrap_or(usize::MAX);
                let decay = if r > 0.0 {
                    (40.0 / -r.ln()).ceil() as usize
                } else {
                    1
                };
                Ok(trunc.min(finite).min(decay.max(1)))
            }
            Source::Function { .. } => Ok(16),
        }
    }

    pub fn sample(&self, r: f64, m: usize) -> Result<ScalarCircle> {
        match &self.source {
            Source::Function { f, .. } => {
                let values = (0..m)
                    .map(|j| f(Complex64::from_polar(r, TAU * j as f64 / m as f64)))
                    .collect();
                Ok(ScalarCircle {
                    values,
                    bound: 0.0,
                    degraded: false,
                    signed: None,
                })
            }
            Source::Field {
                field,
                quantity,
                scale,
            } => {
                let with_values = *quantity == FieldQuantity::Value;
                let s = field.circle(r, m, with_values)?;
                let bd = s.bound_derivative;
                let rot = |j: usize| Complex64::from_polar(1.0, TAU * j as f64 / m as f64);
                let moduli = |w: Vec<Complex64>| -> (Vec<f64>, Option<Vec<f64>>) {
                    let signed = real_part(&w);
                    (w.iter().map(|x| x.norm()).collect(), signed)
                };
                let ((values, signed), bound): ((Vec<f64>, Option<Vec<f64>>), f64) = match quantity
                {
                    FieldQuantity::Value => (moduli(s.f.clone().unwrap_or_default()), s.bound_f),
                    FieldQuantity::Fz => ((s.f_z.iter().map(|x| x.norm()).collect(), None), bd),
                    FieldQuantity::Fzbar => {
                        ((s.f_zbar.iter().map(|x| x.norm()).collect(), None), bd)
                    }
                    FieldQuantity::OpNorm => (
                        (
                            s.f_z
                                .iter()
                                .zip(&s.f_zbar)
                                .map(|(a, b)| a.norm() + b.norm())
                                .collect(),
                            None,
                        ),
                        2.0 * bd,
                    ),
                    FieldQuantity::MinStretch => (
                        (
                            s.f_z
                                .iter()
                                .zip(&s.f_zbar)
                                .map(|(a, b)| (a.norm() - b.norm()).abs())
                                .collect(),
                            None,
                        ),
                        2.0 * bd,
                    ),
                    FieldQuantity::Ft => (
                        moduli(
                            (0..m)
                                .map(|j| r * (s.f_z[j] * rot(j) - s.f_zbar[j] * rot(j).conj()))
                                .collect(),
                        ),
                        2.0 * r * bd,
                    ),
                    FieldQuantity::Fr => (
                        moduli(
                            (0..m)
                                .map(|j| s.f_z[j] * rot(j) + s.f_zbar[j] * rot(j).conj())
                                .collect(),
                        ),
                        2.0 * bd,
                    ),
                    FieldQuantity::FtOverR => (
                        moduli(
                            (0..m)
                                .map(|j| s.f_z[j] * rot(j) - s.f_zbar[j] * rot(j).conj())
                                .collect(),
                        ),
                        2.0 * bd,
                    ),
                };
                let scaled = |v: Vec<f64>| {
                    if *scale == 1.0 {
                        v
                    } else {
                        v.into_iter().map(|x| x * scale).collect()
                    }
                };
                Ok(ScalarCircle {
                    values: scaled(values),
                    bound: bound * scale,
                    degraded: s.degraded,
                    signed: signed.map(scaled),
                })
            }
        }
    }
}

/// Angular mean of `|s|^p` (or the maximum for `p = ∞`) on one circle.
#[derive(Debug, Clone)]
pub struct AngularMean {
    /// `(1/2π)∫|s|^p dθ`, or `max |s|` for `p = ∞`.
    pub power_mean: f64,
    /// `M_p(r, s)`.
    pub value: f64,
    pub error: f64,
    pub truncation_bound: f64,
    pub angular_nodes: usize,
    pub refinements: usize,
    pub degraded: bool,
    pub trend: Vec<f64>,
}

fn reduce(circle: &ScalarCircle, p: Exponent) -> f64 {
    let values = &circle.values;
    match p {
        Exponent::Infinity => sum::max(values).max(0.0),
        Exponent::Finite(1.0) => match &circle.signed {
            Some(g) => kink_mean(g, 1.0),
            None => sum::mean(values),
        },
        Exponent::Finite(2.0) => sum::mean(&values.iter().map(|v| v * v).collect::<Vec<_>>()),
        Exponent::Finite(p) => match &circle.signed {
            Some(g) if p.fract() != 0.0 || p % 2.0 != 0.0 => kink_mean(g, p),
            _ => sum::mean(&values.iter().map(|v| v.powf(p)).collect::<Vec<_>>()),
        },
    }
}

/// Periodic mean of `|g|^p` from equispaced samples of a smooth real `g`.
///
/// The plain trapezoid rule loses its spectral accuracy at sign changes of
/// `g`, where `|g|^p` has a kink. Here each sign-change cell is integrated
/// from the local cubic interpolant split at its root, and the smooth runs
/// between them get fourth-order Gregory end corrections.
fn kink_mean(g: &[f64], p: f64) -> f64 {
    let m = g.len();
    let pw = |v: f64| v.abs().powf(p);
    let neg = |v: f64| v < 0.0;
    let kinks: Vec<usize> = (0..m)
        .filter(|&j| neg(g[j]) != neg(g[(j + 1) % m]))
        .collect();
    let gaps = kinks.len();
    let run = |i: usize| -> usize {
        if gaps == 1 {
            m - 1
        } else {
            (kinks[(i + 1) % gaps] + m - kinks[i] - 1) % m
        }
    };
    if gaps == 0 || m < 16 || (0..gaps).any(|i| run(i) < 6) {
        return sum::mean(&g.iter().map(|&v| pw(v)).collect::<Vec<_>>());
    }
    let at = |j: usize| g[j % m];
    let mut parts = Vec::with_capacity(m + 2 * gaps);
    for (i, &k) in kinks.iter().enumerate() {
        parts.push(kink_cell([at(k + m - 1), at(k), at(k + 1), at(k + 2)], p));
        let n = run(i);
        let start = k + 1;
        for q in 0..=n {
            let w = match q.min(n - q) {
                0 => 3.0 / 8.0,
                1 => 7.0 / 6.0,
                2 => 23.0 / 24.0,
                _ => 1.0,
            };
            parts.push(w * pw(at(start + q)));
        }
    }
    sum::pairwise(&parts) / m as f64
}

/// `∫_0^1 |P(t)|^p dt` for the cubic through `(-1, y0), (0, y1), (1, y2), (2, y3)`,
/// which changes sign on `[0, 1]`.
fn kink_cell(y: [f64; 4], p: f64) -> f64 {
    let cubic = |t: f64| {
        -y[0] * t * (t - 1.0) * (t - 2.0) / 6.0 + y[1] * (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
            - y[2] * (t + 1.0) * t * (t - 2.0) / 2.0
            + y[3] * (t + 1.0) * t * (t - 1.0) / 6.0
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let left_neg = cubic(0.0) < 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (cubic(mid) < 0.0) == left_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    [(0.0, root), (root, 1.0)]
        .iter()
        .flat_map(|&(a, b)| kronrod_nodes(a, b))
        .map(|(t, w)| w * cubic(t).abs().powf(p))
        .sum()
}

fn root(power_mean: f64, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => power_mean,
        Exponent::Finite(1.0) => power_mean,
        Exponent::Finite(p) => power_mean.powf(1.0 / p),
    }
}

pub fn angular_mean(
    scalar: &Scalar<'_>,
    r: f64,
    p: Exponent,
    opts: &NormOptions,
) -> Result<AngularMean> {
    let tol = match p {
        Exponent::Infinity => crate::boundary::SUP_REFINEMENT_TOL,
        _ => opts.circle_tol,
    };
    angular_mean_to(scalar, r, p, tol, opts)
}

fn angular_mean_to(
    scalar: &Scalar<'_>,
    r: f64,
    p: Exponent,
    tol: f64,
    opts: &NormOptions,
) -> Result<AngularMean> {
    let mut means = angular_means_to(scalar, r, &[p], tol, opts)?;
    Ok(means.remove(0))
}

/// Angular means for several exponents from shared samples. Each exponent
/// keeps the result of the first doubling at which it converged, so the
/// values do not depend on which other exponents are requested.
fn angular_means_to(
    scalar: &Scalar<'_>,
    r: f64,
    ps: &[Exponent],
    tol: f64,
    opts: &NormOptions,
) -> Result<Vec<AngularMean>> {
    for p in ps {
        p.validate()?;
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain {
            z: Complex64::new(r, 0.0),
        });
    }
    let bw = scalar.bandwidth(r)?;
    let resolve = (32.0 / (1.0 - r)).min((4 * bw + 4) as f64) as usize;
    let mut m = resolve.next_power_of_two().clamp(64, opts.max_angular / 2);
    let first = scalar.sample(r, m)?;
    let mut coarse: Vec<f64> = ps.iter().map(|&p| reduce(&first, p)).collect();
    let mut bound = first.bound;
    let mut degraded = first.degraded;
    let mut trends: Vec<Vec<f64>> = ps
        .iter()
        .zip(&coarse)
        .map(|(&p, &c)| vec![root(c, p)])
        .collect();
    let mut done: Vec<Option<AngularMean>> = vec![None; ps.len()];
    let mut refinements = 0;
    loop {
        let next = scalar.sample(r, 2 * m)?;
        bound = bound.max(next.bound);
        degraded |= next.degraded;
        m *= 2;
        refinements += 1;
        let last = 2 * m > opts.max_angular;
        for (i, &p) in ps.iter().enumerate() {
            if done[i].is_some() {
                continue;
            }
            let fine = reduce(&next, p);
            let value = root(fine, p);
            let diff = (value - root(coarse[i], p)).abs();
            trends[i].push(value);
            let converged = diff <= tol * value.abs() + 1e-15;
            if converged || last {
                done[i] = Some(AngularMean {
                    power_mean: fine,
                    value,
                    error: diff + bound,
                    truncation_bound: bound,
                    angular_nodes: m,
                    refinements,
                    degraded: degraded || !converged,
                    trend: std::mem::take(&mut trends[i]),
                });
            }
            coarse[i] = fine;
        }
        if done.iter().all(Option::is_some) {
            return Ok(done.into_iter().flatten().collect());
        }
    }
}

/// `M_p(r, s) = ((1/2π)∫|s(re^{iθ})|^p dθ)^{1/p}`; the maximum for `p = ∞`.
pub fn circle_mean(
    scalar: &Scalar<'_>,
    r: f64,
    p: Exponent,
    opts: &NormOptions,
) -> Result<NormReport> {
    let a = angular_mean(scalar, r, p, opts)?;
    Ok(NormReport {
        kind: NormKind::CircleMean { r },
        p,
        value: a.value,
        error_estimate: a.error,
        divergent: false,
        extrapolated: None,
        monotone_certificate: false,
        degraded: a.degraded,
        trend: a.trend,
        grid: GridMeta {
            radial_nodes: 1,
            angular_nodes: a.angular_nodes,
            refinement_level: a.refinements,
        },
    })
}

/// Radii `1 - 2^{-k}`, `k = 1..=levels`.
pub fn radial_grid(levels: usize) -> Vec<f64> {
    (1..=levels).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}

/// Divergence rules for refining sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRule {
    /// Minimum growth per level.
    pub growth: f64,
    /// Number of consecutive levels that must show the growth.
    pub run: usize,
    /// Magnitude beyond which sustained growth alone means divergence.
    pub magnitude: f64,
    /// For sup-type sequences: successive increments shrinking by no more
    /// than this factor also mean divergence (increments of a convergent
    /// sequence on the grid `1 - 2^{-k}` shrink geometrically).
    pub stall_ratio: Option<f64>,
}

impl DivergenceRule {
    /// Rule for cumulative area integrals.
    pub const INTEGRAL: DivergenceRule = DivergenceRule {
        growth: 0.05,
        run: 4,
        magnitude: 1e3,
        stall_ratio: None,
    };

    /// Rule for sequences of suprema along the radial grid.
    pub const SUPREMUM: DivergenceRule = DivergenceRule {
        growth: 0.05,
        run: 4,
        magnitude: 1e3,
        stall_ratio: Some(0.8),
    };

    pub fn diverges(&self, seq: &[f64]) -> bool {
        if seq.len() < self.run + 1 {
            return false;
        }
        let tail = &seq[seq.len() - self.run - 1..];
        let growing = tail
            .windows(2)
            .all(|w| w[0] > 0.0 && w[1] >= (1.0 + self.growth) * w[0]);
        if !growing {
            return false;
        }
        if tail[tail.len() - 1] >= self.magnitude {
            return true;
        }
        match self.stall_ratio {
            Some(ratio) => {
                let inc: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
                inc.windows(2).all(|w| w[1] >= ratio * w[0])
            }
            None => false,
        }
    }
}

/// Richardson extrapolation of a sequence converging like `2^{-k}`.
/// Returns `None` unless the last increments shrink at a rate near 1/2.
pub fn extrapolate_geometric(seq: &[f64]) -> Option<f64> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let d1 = seq[n - 1] - seq[n - 2];
    let d0 = seq[n - 2] - seq[n - 3];
    if d1 == 0.0 && d0 == 0.0 {
        return Some(seq[n - 1]);
    }
    if d0 == 0.0 {
        return None;
    }
    let ratio = d1 / d0;
    (0.3..=0.7)
        .contains(&ratio)
        .then(|| 2.0 * seq[n - 1] - seq[n - 2])
}

/// `‖s‖_p = sup_{0<r<1} M_p(r, s)`, evidenced on the grid `1 - 2^{-k}`.
pub fn hardy_norm(scalar: &Scalar<'_>, p: Exponent, opts: &NormOptions) -> Result<NormReport> {
    p.validate()?;
    let radii = radial_grid(opts.levels);
    let means = par::try_map(&radii, |&r| angular_mean(scalar, r, p, opts))?;
    let trend: Vec<f64> = means.iter().map(|a| a.value).collect();
    let value = sum::max(&trend).max(0.0);
    let error = means.iter().map(|a| a.error).fold(0.0, f64::max);
    let degraded = means.iter().any(|a| a.degraded);
    let certificate = scalar.analytic_modulus()
        && means
            .windows(2)
            .all(|w| w[1].value >= w[0].value - (w[0].error + w[1].error));
    let divergent = DivergenceRule::SUPREMUM.diverges(&trend);
    let extrapolated = if divergent {
        None
    } else {
        extrapolate_geometric(&trend).filter(|_| certificate || p.is_infinite())
    };
    Ok(NormReport {
        kind: NormKind::Hardy,
        p,
        value,
        error_estimate: error,
        divergent,
        extrapolated,
        monotone_certificate: certificate,
        degraded,
        grid: GridMeta {
            radial_nodes: radii.len(),
            angular_nodes: means.iter().map(|a| a.angular_nodes).max().unwrap_or(0),
            refinement_level: opts.levels,
        },
        trend,
    })
}

/// Region of the disk for an area integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `D_{1/2}`
    Inner,
    /// `D \ D_{1/2}`
    Outer,
    Whole,
}

/// `∫_region |s|^p dσ` with its error estimate and per-shell sequence.
#[derive(Debug, Clone, Serialize)]
pub struct AreaIntegral {
    pub value: f64,
    pub error: f64,
    pub split: RegionSplit,
    /// Cumulative integral after each outer shell.
    pub cumulative: Vec<f64>,
    pub divergent: bool,
    pub degraded: bool,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub truncation_bound: f64,
}

/// Kronrod panels of the radial grid: two on `[0, 1/2]`, then one shell per level.
type Panels = Vec<(f64, f64)>;

fn radial_panels(levels: usize) -> (Panels, Panels) {
    let inner = vec![(0.0, 0.25), (0.25, 0.5)];
    let outer = (1..=levels)
        .map(|k| (1.0 - 0.5f64.powi(k as i32), 1.0 - 0.5f64.powi(k as i32 + 1)))
        .collect();
    (inner, outer)
}

/// `∫ |s|^p dσ` over a region, `dσ = dx dy / π = (1/π) r dr dθ`, for finite `p`.
pub fn area_integral(
    scalar: &Scalar<'_>,
    p: f64,
    region: Region,
    opts: &NormOptions,
) -> Result<AreaIntegral> {
    Ok(area_integrals(scalar, &[p], region, opts)?.remove(0))
}

/// [`area_integral`] for several exponents from shared circle samples.
pub fn area_integrals(
    scalar: &Scalar<'_>,
    ps: &[f64],
    region: Region,
    opts: &NormOptions,
) -> Result<Vec<AreaIntegral>> {
    let exponents: Vec<Exponent> = ps.iter().map(|&p| Exponent::Finite(p)).collect();
    for e in &exponents {
        e.validate()?;
    }
    let (inner, outer) = radial_panels(opts.levels.max(2));
    let mut panels = Vec::new();
    if region != Region::Outer {
        panels.extend(inner.iter().copied());
    }
    if region != Region::Inner {
        panels.extend(outer.iter().copied());
    }
    // A panel of width w carries about a share w of the integral, so its
    // nodes need proportionally less relative accuracy.
    let node_tol = |i: usize| {
        let (a, b) = panels[i];
        (opts.circle_tol / (2.0 * (b - a))).clamp(opts.circle_tol, 1e-7)
    };
    let nodes: Vec<(usize, f64, f64, f64)> = panels
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| {
            kronrod_nodes(a, b)
                .into_iter()
                .zip(embedded_gauss_weights(a, b))
                .map(move |((r, wk), wg)| (i, r, wk, wg))
        })
        .collect();
    let all = par::try_map(&nodes, |&(i, r, _, _)| {
        angular_means_to(scalar, r, &exponents, node_tol(i), opts)
    })?;
    let n_inner = if region == Region::Outer {
        0
    } else {
        inner.len()
    };
    Ok(ps
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let means: Vec<&AngularMean> = all.iter().map(|v| &v[j]).collect();
            assemble_area(&panels, n_inner, &nodes, &means, p)
        })
        .collect())
}

fn assemble_area(
    panels: &[(f64, f64)],
    n_inner: usize,
    nodes: &[(usize, f64, f64, f64)],
    means: &[&AngularMean],
    p: f64,
) -> AreaIntegral {
    // Per-panel Kronrod and Gauss sums of 2 r A(r).
    let mut kron = vec![Vec::with_capacity(15); panels.len()];
    let mut gauss = vec![Vec::with_capacity(15); panels.len()];
    let mut angular_err = vec![Vec::with_capacity(15); panels.len()];
    for (&(i, r, wk, wg), a) in nodes.iter().zip(means) {
        kron[i].push(2.0 * r * wk * a.power_mean);
        gauss[i].push(2.0 * r * wg * a.power_mean);
        // d(A) ≈ p A^{(p-1)/p} d(M_p)
        let da = p * a.value.powf(p - 1.0) * (a.error - a.truncation_bound).max(0.0);
        angular_err[i].push(2.0 * r * wk * da);
    }
    let panel_values: Vec<f64> = kron.iter().map(|v| sum::pairwise(v)).collect();
    let panel_errors: Vec<f64> = (0..panels.len())
        .map(|i| {
            (panel_values[i] - sum::pairwise(&gauss[i])).abs() + sum::pairwise(&angular_err[i])
        })
        .collect();
    let inner_value = sum::pairwise(&panel_values[..n_inner]);
    let inner_error = sum::pairwise(&panel_errors[..n_inner]);

    let shells = &panel_values[n_inner..];
    let mut cumulative = Vec::with_capacity(shells.len());
    let mut acc = inner_value;
    for &s in shells {
        acc += s;
        cumulative.push(acc);
    }
    let (outer_value, outer_error, divergent) = if shells.is_empty() {
        (0.0, 0.0, false)
    } else {
        let shell_sum = sum::pairwise(shells);
        let shell_err = sum::pairwise(&panel_errors[n_inner..]);
        let (tail, tail_err, stalled) = shell_tail(shells);
        let divergent = stalled || DivergenceRule::INTEGRAL.diverges(&cumulative);
        (shell_sum + tail, shell_err + tail_err, divergent)
    };
    let truncation_bound = means.iter().map(|a| a.truncation_bound).fold(0.0, f64::max);
    let degraded = means.iter().any(|a| a.degraded);
    AreaIntegral {
        value: inner_value + outer_value,
        error: inner_error + outer_error,
        split: RegionSplit {
            inner: inner_value,
            inner_error,
            outer: outer_value,
            outer_error,
        },
        cumulative,
        divergent,
        degraded,
        radial_nodes: nodes.len(),
        angular_nodes: means.iter().map(|a| a.angular_nodes).max().unwrap_or(0),
        truncation_bound,
    }
}

/// Estimate of the shells beyond the last one, its uncertainty, and whether
/// the shell contributions have stopped decaying.
///
/// Shell `k` has width `x = 2^{-k-1}`, so for integrands smooth up to the
/// boundary `s_k = αx + βx² + O(x³)`. Fitting the last two shells and summing
/// the model gives a tail of `(5 s_K - s_{K-1}) / 3`; the same estimate made
/// one shell earlier measures its uncertainty.
fn shell_tail(shells: &[f64]) -> (f64, f64, bool) {
    let n = shells.len();
    let stalled = n >= 4
        && shells[n - 4..]
            .windows(2)
            .all(|w| w[0] > 0.0 && w[1] >= w[0]);
    let tail_from = |k: usize| -> f64 {
        if k == 0 {
            shells[0]
        } else {
            ((5.0 * shells[k] - shells[k - 1]) / 3.0).max(0.0)
        }
    };
    if stalled {
        return (tail_from(n - 1), f64::INFINITY, true);
    }
    let t = tail_from(n - 1);
    if n < 3 {
        return (t, t, false);
    }
    let earlier = tail_from(n - 2) - shells[n - 1];
    (t, (t - earlier).abs(), false)
}

/// `‖s‖_{b^p} = (∫_D |s|^p dσ)^{1/p}`; for `p = ∞` the supremum over the
/// radial grid, as for the Hardy norm.
pub fn bergman_norm(scalar: &Scalar<'_>, p: Exponent, opts: &NormOptions) -> Result<NormReport> {
    p.validate()?;
    let p = match p {
        Exponent::Infinity => {
            let mut r = hardy_norm(scalar, Exponent::Infinity, opts)?;
            r.kind = NormKind::Bergman;
            return Ok(r);
        }
        Exponent::Finite(p) => p,
    };
    let area = bergman_area(scalar, p, opts)?;
    Ok(area.0)
}

/// Bergman norm together with the underlying area integral and region split.
pub fn bergman_area(
    scalar: &Scalar<'_>,
    p: f64,
    opts: &NormOptions,
) -> Result<(NormReport, AreaIntegral)> {
    Ok(bergman_areas(scalar, &[p], opts)?.remove(0))
}

/// [`bergman_area`] for several exponents from shared circle samples.
pub fn bergman_areas(
    scalar: &Scalar<'_>,
    ps: &[f64],
    opts: &NormOptions,
) -> Result<Vec<(NormReport, AreaIntegral)>> {
    let areas = area_integrals(scalar, ps, Region::Whole, opts)?;
    Ok(ps
        .iter()
        .zip(areas)
        .map(|(&p, area)| {
            let value = area.value.max(0.0).powf(1.0 / p);
            let error = if area.value > 0.0 {
                value / (p * area.value) * area.error
            } else {
                area.error.powf(1.0 / p)
            } + area.truncation_bound;
            let report = NormReport {
                kind: NormKind::Bergman,
                p: Exponent::Finite(p),
                value,
                error_estimate: error,
                divergent: area.divergent,
                extrapolated: None,
                monotone_certificate: false,
                degraded: area.degraded,
                trend: area
                    .cumulative
                    .iter()
                    .map(|c| c.max(0.0).powf(1.0 / p))
                    .collect(),
                grid: GridMeta {
                    radial_nodes: area.radial_nodes,
                    angular_nodes: area.angular_nodes,
                    refinement_level: opts.levels,
                },
            };
            (report, area)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundarySpec, Preset};
    use crate::extension::{extend, ExtensionOptions};

    fn field(p: Preset) -> DiskField {
        extend(&BoundarySpec::preset(p), ExtensionOptions::default()).unwrap()
    }

    fn opts() -> NormOptions {
        NormOptions::default()
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(
            Exponent::parse_list("1, 1.5,inf").unwrap(),
            vec![
                Exponent::Finite(1.0),
                Exponent::Finite(1.5),
                Exponent::Infinity
            ]
        );
        assert!(matches!(
            "0.5".parse::<Exponent>(),
            Err(Error::UnsupportedExponent(_))
        ));
        assert_eq!(
            serde_json::to_string(&Exponent::Infinity).unwrap(),
            "\"inf\""
        );
        assert_eq!(
            serde_json::from_str::<Exponent>("2.0").unwrap(),
            Exponent::Finite(2.0)
        );
    }

    #[test]
    fn constant_scalar_norms() {
        let s = Scalar::function(|_| 2.5, true);
        for p in [
            Exponent::Finite(1.0),
            Exponent::Finite(3.0),
            Exponent::Infinity,
        ] {
            assert!((circle_mean(&s, 0.4, p, &opts()).unwrap().value - 2.5).abs() < 1e-14);
            assert!((bergman_norm(&s, p, &opts()).unwrap().value - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_map_means() {
        let f = field(Preset::Mode(1));
        let s = Scalar::of(&f, FieldQuantity::Value);
        let m = circle_mean(&s, 0.7, Exponent::Finite(2.0), &opts()).unwrap();
        assert!((m.value - 0.7).abs() < 1e-14);
        let b = bergman_norm(&s, Exponent::Finite(2.0), &opts()).unwrap();
        assert!((b.value - 0.5f64.sqrt()).abs() < 1e-8, "{}", b.value);
        let h = hardy_norm(&s, Exponent::Finite(3.0), &opts()).unwrap();
        assert!(h.monotone_certificate);
        assert!((h.value - (1.0 - 2f64.powi(-12))).abs() < 1e-12);
        assert!((h.extrapolated.unwrap() - 1.0).abs() < 1e-12);
        assert!(!h.divergent);
    }

    #[test]
    fn fz_of_identity_is_one() {
        let f = field(Preset::Mode(1));
        let h = hardy_norm(
            &Scalar::of(&f, FieldQuantity::Fz),
            Exponent::Finite(2.0),
            &opts(),
        )
        .unwrap();
        assert!((h.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn elliptic_opnorm_sup_extrapolates_to_two() {
        let f = field(Preset::EllipticTrace);
        let h = hardy_norm(
            &Scalar::of(&f, FieldQuantity::OpNorm),
            Exponent::Infinity,
            &opts(),
        )
        .unwrap();
        assert!((h.value - (2.0 - 2f64.powi(-12))).abs() < 1e-9);
        assert!((h.extrapolated.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn parseval_route() {
        let spec = BoundarySpec::fourier([
            (0, Complex64::new(0.3, 0.1)),
            (2, Complex64::new(-1.0, 0.5)),
            (5, Complex64::new(0.25, 0.0)),
        ])
        .unwrap();
        let f = extend(&spec, ExtensionOptions::default()).unwrap();
        let s = Scalar::of(&f, FieldQuantity::Value);
        for &r in &[0.2, 0.6, 0.95] {
            let m2 = circle_mean(&s, r, Exponent::Finite(2.0), &opts())
                .unwrap()
                .value;
            let want: f64 = [(0, 0.1f64), (2, 1.25), (5, 0.0625)]
                .iter()
                .map(|&(n, a2)| a2 * r.powi(2 * n))
                .sum();
            assert!((m2 * m2 - want).abs() <= 1e-10 * want, "r={r}");
        }
    }

    #[test]
    fn bergman_bounded_by_hardy() {
        let f = field(Preset::TrigPoly { seed: 9, degree: 5 });
        for q in [
            FieldQuantity::Fz,
            FieldQuantity::Fzbar,
            FieldQuantity::Value,
        ] {
            let s = Scalar::of(&f, q);
            let p = Exponent::Finite(2.0);
            let b = bergman_norm(&s, p, &opts()).unwrap();
            let h = hardy_norm(&s, p, &opts()).unwrap();
            assert!(
                b.value <= h.best_value() + b.error_estimate + h.error_estimate,
                "{q:?}"
            );
        }
    }

    #[test]
    fn bergman_of_fr_matches_coefficient_sum_for_abs_sin() {
        // ∫|f_r|² dσ = Σ |n| |c_n|² for real-coefficient harmonic extensions.
        let f = field(Preset::AbsSin);
        let b = bergman_norm(
            &Scalar::of(&f, FieldQuantity::Fr),
            Exponent::Finite(2.0),
            &opts(),
        )
        .unwrap();
        let want: f64 = (1..200_000u64)
            .map(|k| {
                let c = (2.0 / std::f64::consts::PI) / (4.0 * (k * k) as f64 - 1.0);
                2.0 * (2 * k) as f64 * c * c
            })
            .sum();
        assert!(
            (b.value * b.value - want).abs() < 1e-6,
            "{} vs {want}",
            b.value * b.value
        );
        assert!(!b.divergent);
    }

    #[test]
    fn homogeneity() {
        let f = field(Preset::EllipticTrace);
        let p = Exponent::Finite(1.5);
        let base = bergman_norm(&Scalar::of(&f, FieldQuantity::OpNorm), p, &opts())
            .unwrap()
            .value;
        let scaled = bergman_norm(
            &Scalar::of(&f, FieldQuantity::OpNorm).scaled(3.0),
            p,
            &opts(),
        )
        .unwrap()
        .value;
        assert!((scaled - 3.0 * base).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn divergence_rules() {
        let log_growth: Vec<f64> = (1..=12).map(|k| k as f64 * 0.22).collect();
        assert!(DivergenceRule::SUPREMUM.diverges(&log_growth));
        assert!(!DivergenceRule::INTEGRAL.diverges(&log_growth));
        let convergent: Vec<f64> = (1..=12).map(|k| 2.0 - 0.5f64.powi(k)).collect();
        assert!(!DivergenceRule::SUPREMUM.diverges(&convergent));
        let blowup: Vec<f64> = (1..=12).map(|k| 2f64.powi(k)).collect();
        assert!(DivergenceRule::INTEGRAL.diverges(&blowup));
    }

    #[test]
    fn abs_sin_fz_sup_is_flagged_divergent() {
        let f = field(Preset::AbsSin);
        let h = hardy_norm(
            &Scalar::of(&f, FieldQuantity::Fz),
            Exponent::Infinity,
            &opts(),
        )
        .unwrap();
        assert!(h.divergent, "{:?}", h.trend);
    }

    #[test]
    fn region_split_adds_up() {
        let f = field(Preset::EllipticTrace);
        let s = Scalar::of(&f, FieldQuantity::OpNorm);
        let whole = area_integral(&s, 2.0, Region::Whole, &opts()).unwrap();
        let inner = area_integral(&s, 2.0, Region::Inner, &opts()).unwrap();
        let outer = area_integral(&s, 2.0, Region::Outer, &opts()).unwrap();
        assert!((whole.value - inner.value - outer.value).abs() < 1e-12);
        // ∫_D (1+r)² dσ = 2∫ r(1+r)² dr = 17/6
        assert!((whole.value - 17.0 / 6.0).abs() < 1e-7, "{}", whole.value);
        // Inner: 2∫_0^{1/2} r(1+r)² dr
        let want_inner = 2.0 * (0.125 + 0.25 / 3.0 + 0.015625);
        assert!((inner.value - want_inner).abs() < 1e-13);
    }

    #[test]
    fn p_below_one_rejected() {
        let s = Scalar::function(|_| 1.0, false);
        assert!(circle_mean(&s, 0.5, Exponent::Finite(0.9), &opts()).is_err());
    }
}
