//! Adaptive Gauss-Kronrod (7/15) quadrature on user-split intervals.
//!
//! Used by the Poisson-integral oracle, the `C(p)` constant and the radial
//! part of area integrals. Panels are bisected largest-error-first; the
//! accepted panels are summed left to right with pairwise reduction.

use crate::error::{Error, Result};
use crate::sum::pairwise;
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd-indexed Kronrod nodes, plus the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PanelEstimate<T> {
    pub a: f64,
    pub b: f64,
    pub value: T,
    pub error: f64,
    /// Round-off level of the panel; bisecting below it gains nothing.
    pub floor: f64,
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
pub fn kronrod_panel<T, F>(f: &F, a: f64, b: f64) -> PanelEstimate<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.magnitude() * WGK[7];
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let scale = half.abs();
    let value = kronrod * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((kronrod - gauss) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    PanelEstimate {
        a,
        b,
        value,
        error: err,
        floor,
    }
}

/// Integrate `f` over `[breakpoints[0], breakpoints.last()]`, never letting a
/// panel straddle an interior breakpoint. Breakpoints must be increasing.
pub fn integrate<T, F>(
    f: F,
    breakpoints: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Result<Integral<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidInput(
            "integration needs at least two breakpoints".into(),
        ));
    }
    if breakpoints
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidInput(
            "integration breakpoints must be strictly increasing".into(),
        ));
    }
    let mut panels: Vec<PanelEstimate<T>> = breakpoints
        .windows(2)
        .map(|w| kronrod_panel(&f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * panels.len();
    loop {
        let (value, error) = totals(&mut panels);
        if error <= tol.target(value.magnitude()) {
            return Ok(Integral {
                value,
                error,
                panels: panels.len(),
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::Convergence {
                best: value.magnitude(),
                residual: error,
            });
        }
        let worst = panels.iter().enumerate().fold(0, |best, (i, p)| {
            if p.error > panels[best].error {
                i
            } else {
                best
            }
        });
        if panels[worst].error <= 1.000_001 * panels[worst].floor {
            // Every panel is at round-off level.
            return Ok(Integral {
                value,
                error,
                panels: panels.len(),
                evaluations,
            });
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Panel cannot be split further in floating point.
            return Err(Error::Convergence {
                best: value.magnitude(),
                residual: error,
            });
        }
        panels.push(kronrod_panel(&f, p.a, mid));
        panels.push(kronrod_panel(&f, mid, p.b));
        evaluations += 30;
    }
}

fn totals<T: QuadValue>(panels: &mut [PanelEstimate<T>]) -> (T, f64) {
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<T> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    (pairwise(&values), pairwise(&errors))
}

/// Kronrod abscissae mapped to `[a, b]`, with weights, in increasing order.
pub fn kronrod_nodes(a: f64, b: f64) -> Vec<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(15);
    for j in 0..7 {
        nodes.push((center - half * XGK[j], half * WGK[j]));
    }
    nodes.push((center, half * WGK[7]));
    for j in (0..7).rev() {
        nodes.push((center + half * XGK[j], half * WGK[j]));
    }
    nodes
}

/// Gauss weights aligned with [`kronrod_nodes`]; zero on Kronrod-only nodes.
pub fn embedded_gauss_weights(a: f64, b: f64) -> Vec<f64> {
    let half = 0.5 * (b - a);
    let mut w = vec![0.0; 15];
    for j in 0..7 {
        if j % 2 == 1 {
            w[j] = half * WG[j / 2];
            w[14 - j] = half * WG[j / 2];
        }
    }
    w[7] = half * WG[3];
    w
}
