//! Boundary functions on the unit circle.
//!
//! A [`BoundarySpec`] is one of three sources (a named preset, a finite list
//! of Fourier coefficients, or uniform samples) together with a derivative
//! order. Presets know their exact Fourier coefficients and their corner
//! points, which the quadrature routines use as panel breakpoints.

use crate::error::{Error, Result};
use crate::fft;
use crate::norms::{Exponent, GridMeta, NormKind, NormReport};
use crate::quadrature::{integrate, Tolerance};
use crate::sum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

/// Minimum number of samples accepted for a sampled boundary function.
pub const MIN_SAMPLES: usize = 16;

/// Default size of the discrete transform applied to sampled data.
pub const DEFAULT_TRANSFORM_SIZE: usize = 4096;

/// Relative tolerance for the refining-grid estimate of an ess-sup.
pub const SUP_REFINEMENT_TOL: f64 = 1e-6;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Built-in boundary functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `F ≡ c`.
    Constant(Complex64),
    /// `F(e^{iθ}) = e^{ikθ}`.
    Mode(i64),
    /// `F(e^{iθ}) = |sin θ|`; corners at `0` and `π`.
    AbsSin,
    /// Trace of `z + conj(z)²/2`: `e^{iθ} + e^{-2iθ}/2`.
    EllipticTrace,
    /// Trace of `z + a·conj(z)`: `e^{iθ} + a e^{-iθ}`.
    Affine(f64),
    /// Seeded random trigonometric polynomial of the given degree, with
    /// complex coefficients damped by `1/(1+n²)`.
    TrigPoly { seed: u64, degree: usize },
}

impl Preset {
    /// The presets exercised by the verification suite.
    pub fn catalogue() -> Vec<Preset> {
        vec![
            Preset::Constant(Complex64::new(1.0, 0.0)),
            Preset::Mode(1),
            Preset::Mode(-1),
            Preset::AbsSin,
            Preset::EllipticTrace,
            Preset::Affine(0.5),
            Preset::TrigPoly {
                seed: 42,
                degree: 6,
            },
        ]
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Exact Fourier coefficients when the preset is a trigonometric
    /// polynomial.
    pub fn finite_terms(&self) -> Option<Vec<(i64, Complex64)>> {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Preset::Constant(c) => Some(vec![(0, c)]),
            Preset::Mode(k) => Some(vec![(k, one)]),
            Preset::AbsSin => None,
            Preset::EllipticTrace => Some(vec![(-2, Complex64::new(0.5, 0.0)), (1, one)]),
            Preset::Affine(a) => Some(vec![(-1, Complex64::new(a, 0.0)), (1, one)]),
            Preset::TrigPoly { seed, degree } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = degree as i64;
                Some(
                    (-d..=d)
                        .map(|n| {
                            let re: f64 = rng.gen_range(-1.0..1.0);
                            let im: f64 = rng.gen_range(-1.0..1.0);
                            (n, Complex64::new(re, im) / (1.0 + (n * n) as f64))
                        })
                        .collect(),
                )
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match *self {
            Preset::Constant(c) => c.im == 0.0,
            Preset::Mode(k) => k == 0,
            Preset::AbsSin => true,
            _ => false,
        }
    }

    /// Points in `[0, 2π)` where the preset or its derivative is not smooth.
    pub fn corners(&self) -> Vec<f64> {
        match self {
            Preset::AbsSin => vec![0.0, PI],
            _ => Vec::new(),
        }
    }

    /// Highest derivative order for which the preset is still absolutely
    /// continuous data (`None` means unbounded).
    fn max_order(&self) -> Option<u32> {
        match self {
            Preset::AbsSin => Some(1),
            _ => None,
        }
    }

    fn coefficient(&self, n: i64, order: u32) -> Complex64 {
        match self {
            Preset::AbsSin => {
                let c = if n == 0 {
                    2.0 / PI
                } else if n % 2 == 0 {
                    -(2.0 / PI) / ((n * n) as f64 - 1.0)
                } else {
                    0.0
                };
                Complex64::new(c, 0.0) * derivative_factor(n, order)
            }
            _ => self
                .finite_terms()
                .unwrap_or_default()
                .into_iter()
                .filter(|&(m, _)| m == n)
                .map(|(_, c)| c * derivative_factor(n, order))
                .fold(C0, |a, b| a + b),
        }
    }

    fn eval(&self, theta: f64, order: u32) -> Complex64 {
        match self {
            Preset::AbsSin => {
                let (s, c) = theta.sin_cos();
                match order {
                    0 => Complex64::new(s.abs(), 0.0),
                    // One-sided value at the jumps θ = 0, π.
                    _ => Complex64::new(if s >= 0.0 { c } else { -c }, 0.0),
                }
            }
            _ => self
                .finite_terms()
                .unwrap_or_default()
                .into_iter()
                .map(|(n, c)| {
                    c * derivative_factor(n, order) * Complex64::from_polar(1.0, n as f64 * theta)
                })
                .fold(C0, |a, b| a + b),
        }
    }
}

fn derivative_factor(n: i64, order: u32) -> Complex64 {
    Complex64::new(0.0, n as f64).powu(order)
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Constant(c) if c.im == 0.0 => write!(f, "constant:{}", c.re),
            Preset::Constant(c) => write!(f, "constant:{},{}", c.re, c.im),
            Preset::Mode(k) => write!(f, "mode:{k}"),
            Preset::AbsSin => write!(f, "abs-sin"),
            Preset::EllipticTrace => write!(f, "elliptic-trace"),
            Preset::Affine(a) => write!(f, "affine:{a}"),
            Preset::TrigPoly { seed, degree } => write!(f, "trig-poly:{seed}:{degree}"),
        }
    }
}

impl serde::Serialize for Preset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `constant[:re[,im]]`, `mode:k`, `abs-sin`, `elliptic-trace`,
    /// `affine[:a]` and `trig-poly[:seed[:degree]]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("bad preset `{s}`: {what}"));
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        let mut parts = s.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let arg = parts.next();
        match head {
            "constant" => match arg {
                None => Ok(Preset::Constant(Complex64::new(1.0, 0.0))),
                Some(a) => {
                    let mut it = a.split(',');
                    let re = num(it.next().unwrap_or_default())?;
                    let im = it.next().map(num).transpose()?.unwrap_or(0.0);
                    Ok(Preset::Constant(Complex64::new(re, im)))
                }
            },
            "mode" => {
                let k = arg
                    .ok_or_else(|| bad("mode needs an index"))?
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| bad("mode index must be an integer"))?;
                Ok(Preset::Mode(k))
            }
            "abs-sin" if arg.is_none() => Ok(Preset::AbsSin),
            "elliptic-trace" if arg.is_none() => Ok(Preset::EllipticTrace),
            "affine" => Ok(Preset::Affine(arg.map(num).transpose()?.unwrap_or(0.5))),
            "trig-poly" => {
                let mut seed = 42;
                let mut degree = 6;
                if let Some(a) = arg {
                    let mut it = a.split(':');
                    if let Some(t) = it.next() {
                        seed = t
                            .trim()
                            .parse()
                            .map_err(|_| bad("seed must be an integer"))?;
                    }
                    if let Some(t) = it.next() {
                        degree = t
                            .trim()
                            .parse()
                            .map_err(|_| bad("degree must be an integer"))?;
                    }
                }
                Ok(Preset::TrigPoly { seed, degree })
            }
            _ => Err(bad("unknown preset")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Preset(Preset),
    Fourier(BTreeMap<i64, Complex64>),
    Sampled(Sampled),
}

#[derive(Debug, Clone, PartialEq)]
struct Sampled {
    values: Vec<Complex64>,
    /// Symmetric trigonometric interpolant; Nyquist term split over `±m/2`.
    terms: Vec<(i64, Complex64)>,
    smooth: bool,
}

/// A boundary function `F: T → C`, or one of its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    source: Source,
    order: u32,
    explicit_derivative: Option<Box<BoundarySpec>>,
}

impl BoundarySpec {
    pub fn preset(p: Preset) -> Self {
        BoundarySpec {
            source: Source::Preset(p),
            order: 0,
            explicit_derivative: None,
        }
    }

    /// Finite Fourier series `Σ c_n e^{inθ}`. Repeated indices are summed.
    pub fn fourier<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (n, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "coefficient c_{n} is not finite"
                )));
            }
            *map.entry(n).or_insert(C0) += c;
        }
        Ok(BoundarySpec {
            source: Source::Fourier(map),
            order: 0,
            explicit_derivative: None,
        })
    }

    /// Uniform samples at `θ_j = 2πj/m`. `smooth` declares that the data come
    /// from an absolutely continuous function whose derivative may be taken
    /// spectrally.
    pub fn sampled(values: Vec<Complex64>, smooth: bool) -> Result<Self> {
        let m = values.len();
        if m < MIN_SAMPLES || !m.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "sampled data needs a power-of-two count >= {MIN_SAMPLES}, got {m}"
            )));
        }
        if let Some(j) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidInput(format!("sample {j} is not finite")));
        }
        let dft = fft::analyze(&values);
        let mut terms = Vec::with_capacity(m + 1);
        for (k, &c) in dft.iter().enumerate() {
            let n = fft::signed_frequency(k, m);
            if k == m / 2 {
                terms.push((n, c * 0.5));
                terms.push((-n, c * 0.5));
            } else {
                terms.push((n, c));
            }
        }
        Ok(BoundarySpec {
            source: Source::Sampled(Sampled {
                values,
                terms,
                smooth,
            }),
            order: 0,
            explicit_derivative: None,
        })
    }

    /// Attach a user-supplied derivative, returned by [`boundary_derivative`].
    pub fn with_derivative(mut self, derivative: BoundarySpec) -> Self {
        self.explicit_derivative = Some(Box::new(derivative));
        self
    }

    pub fn derivative_order(&self) -> u32 {
        self.order
    }

    pub fn as_preset(&self) -> Option<&Preset> {
        match &self.source {
            Source::Preset(p) => Some(p),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        let base = match &self.source {
            Source::Preset(p) => p.to_string(),
            Source::Fourier(map) => format!("fourier[{} terms]", map.len()),
            Source::Sampled(s) => format!("sampled[{}]", s.values.len()),
        };
        match self.order {
            0 => base,
            1 => format!("d/dθ {base}"),
            k => format!("d^{k}/dθ^{k} {base}"),
        }
    }

    /// Points in `[0, 2π)` at which `F` (or `Ḟ`) may fail to be smooth.
    pub fn corners(&self) -> Vec<f64> {
        match &self.source {
            Source::Preset(p) => p.corners(),
            _ => Vec::new(),
        }
    }

    /// Whether the function is known to be real valued.
    pub fn is_real(&self) -> bool {
        match &self.source {
            Source::Preset(p) => p.is_real() && (self.order == 0 || matches!(p, Preset::AbsSin)),
            Source::Fourier(map) => map.iter().all(|(&n, &c)| {
                (map.get(&-n).copied().unwrap_or(C0) - c.conj()).norm() <= 1e-15 * (1.0 + c.norm())
            }),
            Source::Sampled(s) => s.values.iter().all(|v| v.im == 0.0),
        }
    }

    /// Largest |n| with a nonzero coefficient, when finite.
    pub fn bandwidth(&self) -> Option<usize> {
        match &self.source {
            Source::Preset(p) => p.finite_terms().map(|t| {
                t.iter()
                    .map(|(n, _)| n.unsigned_abs() as usize)
                    .max()
                    .unwrap_or(0)
            }),
            Source::Fourier(map) => Some(
                map.keys()
                    .map(|n| n.unsigned_abs() as usize)
                    .max()
                    .unwrap_or(0),
            ),
            Source::Sampled(s) => Some(s.values.len() / 2),
        }
    }

    /// `F(e^{iθ})` (or its derivative of the stored order).
    pub fn eval(&self, theta: f64) -> Complex64 {
        match &self.source {
            Source::Preset(p) => p.eval(theta, self.order),
            Source::Fourier(map) => map
                .iter()
                .map(|(&n, &c)| c * Complex64::from_polar(1.0, n as f64 * theta))
                .fold(C0, |a, b| a + b),
            Source::Sampled(s) => s
                .terms
                .iter()
                .map(|&(n, c)| {
                    c * derivative_factor(n, self.order)
                        * Complex64::from_polar(1.0, n as f64 * theta)
                })
                .fold(C0, |a, b| a + b),
        }
    }

    /// Values at `θ_j = 2πj/m`.
    pub fn eval_grid(&self, m: usize) -> Vec<Complex64> {
        match &self.source {
            Source::Preset(p) => match p.finite_terms() {
                Some(terms) => fft::synthesize(
                    terms
                        .into_iter()
                        .map(|(n, c)| (n, c * derivative_factor(n, self.order))),
                    m,
                ),
                None => (0..m)
                    .map(|j| self.eval(TAU * j as f64 / m as f64))
                    .collect(),
            },
            Source::Fourier(map) => fft::synthesize(map.iter().map(|(&n, &c)| (n, c)), m),
            Source::Sampled(s) if self.order == 0 && m == s.values.len() => s.values.clone(),
            Source::Sampled(s) => fft::synthesize(
                s.terms
                    .iter()
                    .map(|&(n, c)| (n, c * derivative_factor(n, self.order))),
                m,
            ),
        }
    }
}

/// How the coefficients beyond the truncation are controlled.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    /// Nothing was discarded.
    None,
    /// `|c_n| ≤ amplitude · |n|^{-exponent}` for `|n| ≥ first`, nonzero only
    /// on every `stride`-th index, on both sides of zero.
    PowerLaw {
        amplitude: f64,
        exponent: i32,
        first: u64,
        stride: u64,
    },
    /// The discarded coefficients, kept verbatim.
    Explicit { terms: Vec<(i64, Complex64)> },
}

impl Tail {
    /// Upper bound for `Σ_{|n|>N} |c_n| |n|^order r^{|n|-order}`, the error
    /// of a truncated series for `f` (order 0) or its first derivatives
    /// (order 1) on the circle of radius `r`.
    pub fn bound(&self, r: f64, order: u32) -> f64 {
        match self {
            Tail::None => 0.0,
            Tail::PowerLaw {
                amplitude,
                exponent,
                first,
                stride,
            } => {
                let d = order as i32;
                if d > *exponent || r >= 1.0 {
                    return f64::INFINITY;
                }
                let n0 = *first as f64;
                2.0 * amplitude * n0.powi(d - exponent) * r.powf(n0 - d as f64)
                    / (1.0 - r.powi(*stride as i32))
            }
            Tail::Explicit { terms } => {
                let vals: Vec<f64> = terms
                    .iter()
                    .map(|&(n, c)| {
                        let k = n.unsigned_abs() as f64;
                        c.norm() * k.powi(order as i32) * r.powf(k - order as f64)
                    })
                    .collect();
                sum::pairwise(&vals)
            }
        }
    }

    /// Energy `Σ_{|n|>N} |c_n|²` of the discarded part (an upper bound for
    /// power-law tails).
    pub fn energy(&self) -> f64 {
        match self {
            Tail::None => 0.0,
            Tail::PowerLaw {
                amplitude,
                exponent,
                first,
                stride,
            } => {
                // Σ_{j≥0} (first + j·stride)^{-2s} ≤ first^{-2s} + ∫ ... dx / stride
                let s2 = 2 * exponent;
                let n0 = *first as f64;
                let head = n0.powi(-s2);
                let integral = n0.powi(1 - s2) / ((s2 - 1) as f64 * *stride as f64);
                2.0 * amplitude * amplitude * (head + integral)
            }
            Tail::Explicit { terms } => {
                let vals: Vec<f64> = terms.iter().map(|(_, c)| c.norm_sqr()).collect();
                sum::pairwise(&vals)
            }
        }
    }

    fn differentiate(&self) -> Tail {
        match self {
            Tail::None => Tail::None,
            Tail::PowerLaw {
                amplitude,
                exponent,
                first,
                stride,
            } => Tail::PowerLaw {
                amplitude: *amplitude,
                exponent: exponent - 1,
                first: *first,
                stride: *stride,
            },
            Tail::Explicit { terms } => Tail::Explicit {
                terms: terms
                    .iter()
                    .map(|&(n, c)| (n, c * derivative_factor(n, 1)))
                    .collect(),
            },
        }
    }
}

/// Coefficients `c_n`, `-N ≤ n ≤ N`, of a boundary function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCoefficients {
    truncation: usize,
    values: Vec<Complex64>,
    tail: Tail,
}

impl FourierCoefficients {
    pub fn new(truncation: usize, values: Vec<Complex64>, tail: Tail) -> Result<Self> {
        if values.len() != 2 * truncation + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for truncation {truncation}, got {}",
                2 * truncation + 1,
                values.len()
            )));
        }
        if values
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite Fourier coefficient".into()));
        }
        Ok(FourierCoefficients {
            truncation,
            values,
            tail,
        })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `c_n`, zero outside the stored range.
    pub fn get(&self, n: i64) -> Complex64 {
        let n_max = self.truncation as i64;
        if n.abs() > n_max {
            C0
        } else {
            self.values[(n + n_max) as usize]
        }
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Energy of the discarded coefficients.
    pub fn tail_energy(&self) -> f64 {
        self.tail.energy()
    }

    /// `(n, c_n)` for `n = -N..=N`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_max = self.truncation as i64;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - n_max, c))
    }

    /// `Σ |c_n|²` over the stored range.
    pub fn energy(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().map(|c| c.norm_sqr()).collect();
        sum::pairwise(&v)
    }

    /// Termwise derivative: `c_n ↦ i n c_n`.
    pub fn differentiate(&self) -> FourierCoefficients {
        FourierCoefficients {
            truncation: self.truncation,
            values: self
                .iter()
                .map(|(n, c)| c * derivative_factor(n, 1))
                .collect(),
            tail: self.tail.differentiate(),
        }
    }
}

/// Fourier coefficients of `spec` up to `|n| ≤ truncation`.
///
/// Presets use their exact coefficients; finite Fourier data is copied;
/// samples go through a discrete transform of their own length, which must
/// be at least `2·truncation + 2`.
pub fn fourier_coefficients(spec: &BoundarySpec, truncation: usize) -> Result<FourierCoefficients> {
    let n_max = truncation as i64;
    let order = spec.order;
    let (values, tail) = match &spec.source {
        Source::Preset(Preset::AbsSin) => {
            let values = (-n_max..=n_max)
                .map(|n| Preset::AbsSin.coefficient(n, order))
                .collect();
            // |c_n| = (2/π) |n|^order / (n² - 1) on even n; first even index past N.
            let first = (n_max + 1 + (n_max + 1) % 2) as u64;
            let n0 = first as f64;
            let tail = Tail::PowerLaw {
                amplitude: (2.0 / PI) * n0 * n0 / (n0 * n0 - 1.0),
                exponent: 2 - order as i32,
                first,
                stride: 2,
            };
            (values, tail)
        }
        Source::Preset(p) => {
            let terms = p.finite_terms().unwrap_or_default();
            split_terms(
                terms
                    .into_iter()
                    .map(|(n, c)| (n, c * derivative_factor(n, order))),
                n_max,
            )
        }
        Source::Fourier(map) => split_terms(map.iter().map(|(&n, &c)| (n, c)), n_max),
        Source::Sampled(s) => {
            let m = s.values.len();
            if 2 * truncation + 2 > m {
                return Err(Error::InvalidInput(format!(
                    "{m} samples cannot resolve truncation {truncation}"
                )));
            }
            split_terms(
                s.terms
                    .iter()
                    .map(|&(n, c)| (n, c * derivative_factor(n, order))),
                n_max,
            )
        }
    };
    FourierCoefficients::new(truncation, values, tail)
}

fn split_terms<I>(terms: I, n_max: i64) -> (Vec<Complex64>, Tail)
where
    I: IntoIterator<Item = (i64, Complex64)>,
{
    let mut values = vec![C0; (2 * n_max + 1) as usize];
    let mut discarded: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (n, c) in terms {
        if n.abs() <= n_max {
            values[(n + n_max) as usize] += c;
        } else if c != C0 {
            *discarded.entry(n).or_insert(C0) += c;
        }
    }
    let tail = if discarded.is_empty() {
        Tail::None
    } else {
        Tail::Explicit {
            terms: discarded.into_iter().collect(),
        }
    };
    (values, tail)
}

/// Coefficients from a uniform `m`-point discrete transform of `spec`,
/// whatever its source. Used to cross-check exact preset coefficients.
pub fn discrete_coefficients(
    spec: &BoundarySpec,
    m: usize,
    truncation: usize,
) -> Result<FourierCoefficients> {
    if 2 * truncation + 2 > m {
        return Err(Error::InvalidInput(format!(
            "{m} samples cannot resolve truncation {truncation}"
        )));
    }
    let samples = spec.eval_grid(m);
    if samples
        .iter()
        .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::InvalidInput("non-finite sample value".into()));
    }
    let dft = fft::analyze(&samples);
    let n_max = truncation as i64;
    let mut values = vec![C0; 2 * truncation + 1];
    let mut discarded = Vec::new();
    for (k, &c) in dft.iter().enumerate() {
        let n = fft::signed_frequency(k, m);
        if n.abs() <= n_max {
            values[(n + n_max) as usize] = c;
        } else if c.norm() > 0.0 {
            discarded.push((n, c));
        }
    }
    discarded.sort_by_key(|t| t.0);
    let tail = if discarded.is_empty() {
        Tail::None
    } else {
        Tail::Explicit { terms: discarded }
    };
    FourierCoefficients::new(truncation, values, tail)
}

/// The derivative `Ḟ = dF/dθ`.
///
/// Presets are differentiated in closed form (the a.e. derivative for
/// presets with corners), Fourier data termwise. Samples are differentiated
/// spectrally only when declared smooth.
pub fn boundary_derivative(spec: &BoundarySpec) -> Result<BoundarySpec> {
    if let Some(d) = &spec.explicit_derivative {
        return Ok((**d).clone());
    }
    match &spec.source {
        Source::Preset(p) => {
            if let Some(max) = p.max_order() {
                if spec.order >= max {
                    return Err(Error::Refused(format!(
                        "derivative of order {} of `{p}` is not absolutely continuous",
                        spec.order + 1
                    )));
                }
            }
            Ok(BoundarySpec {
                source: spec.source.clone(),
                order: spec.order + 1,
                explicit_derivative: None,
            })
        }
        Source::Fourier(map) => {
            BoundarySpec::fourier(map.iter().map(|(&n, &c)| (n, c * derivative_factor(n, 1))))
        }
        Source::Sampled(s) => {
            if !s.smooth {
                return Err(Error::Refused(
                    "sampled boundary data without declared smoothness cannot be differentiated"
                        .into(),
                ));
            }
            Ok(BoundarySpec {
                source: spec.source.clone(),
                order: spec.order + 1,
                explicit_derivative: None,
            })
        }
    }
}

/// `‖F‖_{L^p(T)}` with respect to normalised arc length.
pub fn lp_circle_norm(spec: &BoundarySpec, p: Exponent) -> Result<NormReport> {
    p.validate()?;
    match p {
        Exponent::Infinity => sup_norm(spec),
        Exponent::Finite(p) => match spec.source {
            Source::Preset(_) => lp_by_quadrature(spec, p),
            _ => lp_by_trapezoid(spec, p),
        },
    }
}

fn lp_by_quadrature(spec: &BoundarySpec, p: f64) -> Result<NormReport> {
    let mut breaks = vec![0.0];
    breaks.extend(spec.corners().into_iter().filter(|&c| c > 0.0 && c < TAU));
    breaks.push(TAU);
    let integral = integrate(
        |t: f64| spec.eval(t).norm().powf(p),
        &breaks,
        Tolerance {
            abs: 1e-14,
            rel: 1e-13,
        },
        4000,
    )?;
    let mean = integral.value / TAU;
    let value = mean.powf(1.0 / p);
    let error = if mean > 0.0 {
        value / (p * mean) * integral.error / TAU
    } else {
        (integral.error / TAU).powf(1.0 / p)
    };
    Ok(NormReport {
        kind: NormKind::CircleLp,
        p: Exponent::Finite(p),
        value,
        error_estimate: error,
        divergent: false,
        extrapolated: None,
        monotone_certificate: false,
        degraded: false,
        trend: Vec::new(),
        grid: GridMeta {
            radial_nodes: 0,
            angular_nodes: integral.panels * 15,
            refinement_level: integral.panels,
        },
    })
}

fn lp_by_trapezoid(spec: &BoundarySpec, p: f64) -> Result<NormReport> {
    let m0 = (4 * spec.bandwidth().unwrap_or(16) + 4)
        .next_power_of_two()
        .max(64);
    let mean_at = |m: usize| {
        let vals: Vec<f64> = spec.eval_grid(m).iter().map(|v| v.norm().powf(p)).collect();
        sum::mean(&vals)
    };
    let mut m = m0;
    let mut coarse = mean_at(m);
    let mut trend = vec![coarse.powf(1.0 / p)];
    let mut level = 0;
    loop {
        let fine = mean_at(2 * m);
        trend.push(fine.powf(1.0 / p));
        level += 1;
        let diff = (fine - coarse).abs();
        m *= 2;
        if diff <= 1e-13 * fine.abs().max(1e-300) || m >= 1 << 20 {
            let value = fine.powf(1.0 / p);
            let error = if fine > 0.0 {
                value / (p * fine) * diff
            } else {
                diff.powf(1.0 / p)
            };
            return Ok(NormReport {
                kind: NormKind::CircleLp,
                p: Exponent::Finite(p),
                value,
                error_estimate: error,
                divergent: false,
                extrapolated: None,
                monotone_certificate: false,
                degraded: diff > 1e-8 * fine.abs(),
                trend,
                grid: GridMeta {
                    radial_nodes: 0,
                    angular_nodes: m,
                    refinement_level: level,
                },
            });
        }
        coarse = fine;
    }
}

fn sup_norm(spec: &BoundarySpec) -> Result<NormReport> {
    let corners = spec.corners();
    let corner_max = corners
        .iter()
        .map(|&t| spec.eval(t).norm())
        .fold(0.0, f64::max);
    let grid_max = |m: usize| {
        sum::max(
            &spec
                .eval_grid(m)
                .iter()
                .map(|v| v.norm())
                .collect::<Vec<_>>(),
        )
        .max(corner_max)
    };
    let m0 = (4 * spec.bandwidth().unwrap_or(16) + 4)
        .next_power_of_two()
        .max(64);
    let mut m = m0;
    let mut prev = grid_max(m);
    let mut trend = vec![prev];
    let mut level = 0;
    // Nested grids: the sequence of maxima is nondecreasing.
    loop {
        m *= 2;
        level += 1;
        let cur = grid_max(m).max(prev);
        trend.push(cur);
        let diff = cur - prev;
        if (level >= 2 && diff <= SUP_REFINEMENT_TOL * cur.max(1e-300)) || m >= 1 << 20 {
            return Ok(NormReport {
                kind: NormKind::CircleLp,
                p: Exponent::Infinity,
                value: cur,
                error_estimate: diff,
                divergent: false,
                extrapolated: None,
                monotone_certificate: true,
                degraded: diff > SUP_REFINEMENT_TOL * cur,
                trend,
                grid: GridMeta {
                    radial_nodes: 0,
                    angular_nodes: m,
                    refinement_level: level,
                },
            });
        }
        prev = cur;
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryDoc {
    kind: String,
    name: Option<String>,
    coefficients: Option<Vec<(i64, f64, f64)>>,
    samples: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    smooth: bool,
    derivative: Option<Box<BoundaryDoc>>,
}

impl BoundaryDoc {
    fn into_spec(self) -> Result<BoundarySpec> {
        let spec = match self.kind.as_str() {
            "preset" => {
                let name = self
                    .name
                    .ok_or_else(|| Error::InvalidInput("preset document needs `name`".into()))?;
                BoundarySpec::preset(name.parse()?)
            }
            "fourier" => {
                let coeffs = self.coefficients.ok_or_else(|| {
                    Error::InvalidInput("fourier document needs `coefficients`".into())
                })?;
                BoundarySpec::fourier(
                    coeffs
                        .into_iter()
                        .map(|(n, re, im)| (n, Complex64::new(re, im))),
                )?
            }
            "sampled" => {
                let samples = self.samples.ok_or_else(|| {
                    Error::InvalidInput("sampled document needs `samples`".into())
                })?;
                BoundarySpec::sampled(
                    samples
                        .into_iter()
                        .map(|(re, im)| Complex64::new(re, im))
                        .collect(),
                    self.smooth,
                )?
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown boundary kind `{other}`"
                )))
            }
        };
        match self.derivative {
            Some(d) => Ok(spec.with_derivative(d.into_spec()?)),
            None => Ok(spec),
        }
    }
}

impl BoundarySpec {
    /// Parse the JSON boundary document described in the README.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BoundaryDoc = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("boundary document: {e}")))?;
        doc.into_spec()
    }
}

/// Checks `c_{-n} = conj(c_n)` for `|n| ≤ truncation`, the Fourier signature
/// of a real-valued function.
pub fn is_conjugate_symmetric(coeffs: &FourierCoefficients, tol: f64) -> bool {
    let n_max = coeffs.truncation() as i64;
    (0..=n_max).all(|n| (coeffs.get(-n) - coeffs.get(n).conj()).norm() <= tol)
}
