//! Grid estimates of ellipticity constants `(K, K')` with
//! `‖D_f‖² ≤ K J_f + K'`, of `sup |ω|`, and a combined classification.
//!
//! The grid at level `L` is the polar grid with radii `1 - 2^{-k}`,
//! `k = 1..=L`, and `base_angles · 2^{L-1}` angles. Grids are nested, so every
//! per-level supremum is nondecreasing in `L`.

use crate::calculus::DILATATION_CUTOFF;
use crate::error::{Error, Result};
use crate::extension::DiskField;
use crate::norms::{extrapolate_geometric, radial_grid};
use crate::par;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// `sup |ω|` extrapolating to at least this flags "not quasiregular".
pub const QR_TREND_THRESHOLD: f64 = 1.0 - 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridOptions {
    pub levels: usize,
    pub base_angles: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            levels: 12,
            base_angles: 64,
        }
    }
}

impl GridOptions {
    fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > 30 || self.base_angles == 0 {
            return Err(Error::Config(format!(
                "grid needs 1..=30 levels and a positive angle count, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn finest_angles(&self) -> usize {
        self.base_angles << (self.levels - 1)
    }

    pub fn points(&self) -> usize {
        self.levels * self.finest_angles()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    Preserving,
    Reversing,
    Mixed,
}

/// `K'` estimate for one `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KprimeScan {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Kprime_estimate")]
    pub kprime: f64,
    /// Extrapolated limit of the per-level trend, when it converges
    /// geometrically.
    pub extrapolated: Option<f64>,
    pub trend: Vec<f64>,
}

impl KprimeScan {
    /// Larger of the grid value and its extrapolation.
    pub fn best(&self) -> f64 {
        self.extrapolated.unwrap_or(self.kprime).max(self.kprime)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Classification {
    /// `sup |ω| = q` bounded away from 1. `K = (1+q)/(1-q)` is derived by this
    /// implementation as a convenience.
    Quasiregular {
        #[serde(rename = "K")]
        k: f64,
        q: f64,
    },
    /// `sup |ω|` trends to 1; the listed `(K, K')` pairs are grid estimates.
    EllipticCandidate { pairs: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityGrid {
    pub levels: usize,
    pub base_angles: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "Kprime_estimate")]
    pub kprime_estimate: Option<f64>,
    pub scan: Vec<KprimeScan>,
    pub qr_constant: f64,
    pub qr_extrapolated: Option<f64>,
    pub qr_trend: Vec<f64>,
    /// Grid points where `|f_z|` is too small for `ω` to be defined.
    pub undefined_count: usize,
    /// `sup |ω|` trends to 1, so no `K` makes the field `K`-quasiregular.
    pub not_quasiregular: bool,
    pub sense: Sense,
    pub classification: Option<Classification>,
    pub degraded: bool,
    pub grid: EllipticityGrid,
}

/// Per-radius reductions over the finest angular grid.
struct RadiusSweep {
    /// `[level][k_index]` maxima of `‖D‖² - K J` at this radius.
    kprime: Vec<Vec<f64>>,
    /// `[level]` maxima of `|ω|`.
    omega: Vec<f64>,
    undefined: usize,
    min_jacobian: (f64, Complex64),
    max_jacobian: f64,
    degraded: bool,
}

struct Sweep {
    kprime_trend: Vec<Vec<f64>>,
    qr_trend: Vec<f64>,
    undefined: usize,
    min_jacobian: (f64, Complex64),
    max_jacobian: f64,
    degraded: bool,
    grid: EllipticityGrid,
}

fn sweep(field: &DiskField, ks: &[f64], opts: &GridOptions) -> Result<Sweep> {
    opts.validate()?;
    if let Some(&k) = ks.iter().find(|&&k| !(k >= 1.0 && k.is_finite())) {
        return Err(Error::Config(format!(
            "K must be a finite number ≥ 1, got {k}"
        )));
    }
    let levels = opts.levels;
    let m = opts.finest_angles();
    let radii = radial_grid(levels);
    let idx: Vec<usize> = (0..levels).collect();
    let per_radius = par::try_map(&idx, |&ri| -> Result<RadiusSweep> {
        let r = radii[ri];
        let s = field.circle(r, m, false)?;
        let mut kprime = vec![vec![f64::NEG_INFINITY; ks.len()]; levels];
        let mut omega = vec![f64::NEG_INFINITY; levels];
        let mut undefined = 0;
        let mut min_j = (f64::INFINITY, Complex64::new(0.0, 0.0));
        let mut max_j = f64::NEG_INFINITY;
        for j in 0..m {
            let a = s.f_z[j].norm();
            let b = s.f_zbar[j].norm();
            let op2 = (a + b) * (a + b);
            let jac = (a - b) * (a + b);
            if jac < min_j.0 {
                min_j = (jac, Complex64::from_polar(r, TAU * j as f64 / m as f64));
            }
            max_j = max_j.max(jac);
            let w = (a > DILATATION_CUTOFF * (1.0 + b)).then(|| b / a);
            if w.is_none() {
                undefined += 1;
            }
            // Coarsest level containing index j: angles at level L have stride 2^{levels-L}.
            let tz = if j == 0 {
                levels - 1
            } else {
                (j.trailing_zeros() as usize).min(levels - 1)
            };
            let first_level = (levels - 1 - tz).max(ri);
            for ki in 0..ks.len() {
                let v = op2 - ks[ki] * jac;
                let slot = &mut kprime[first_level][ki];
                *slot = slot.max(v);
            }
            if let Some(w) = w {
                omega[first_level] = omega[first_level].max(w);
            }
        }
        // Nested grids: carry maxima forward.
        for l in 1..levels {
            let (done, rest) = kprime.split_at_mut(l);
            for (cur, prev) in rest[0].iter_mut().zip(&done[l - 1]) {
                *cur = cur.max(*prev);
            }
            omega[l] = omega[l].max(omega[l - 1]);
        }
        Ok(RadiusSweep {
            kprime,
            omega,
            undefined,
            min_jacobian: min_j,
            max_jacobian: max_j,
            degraded: s.degraded,
        })
    })?;
    let mut kprime_trend = vec![vec![0.0; levels]; ks.len()];
    let mut qr_trend = vec![0.0; levels];
    for l in 0..levels {
        for (ki, trend) in kprime_trend.iter_mut().enumerate() {
            let v = per_radius[..=l]
                .iter()
                .map(|s| s.kprime[l][ki])
                .fold(f64::NEG_INFINITY, f64::max);
            trend[l] = v.max(0.0);
        }
        qr_trend[l] = per_radius[..=l]
            .iter()
            .map(|s| s.omega[l])
            .fold(0.0, f64::max);
    }
    let min_jacobian = per_radius.iter().map(|s| s.min_jacobian).fold(
        (f64::INFINITY, Complex64::new(0.0, 0.0)),
        |acc, x| if x.0 < acc.0 { x } else { acc },
    );
    Ok(Sweep {
        kprime_trend,
        qr_trend,
        undefined: per_radius.iter().map(|s| s.undefined).sum(),
        min_jacobian,
        max_jacobian: per_radius
            .iter()
            .map(|s| s.max_jacobian)
            .fold(f64::NEG_INFINITY, f64::max),
        degraded: per_radius.iter().any(|s| s.degraded),
        grid: EllipticityGrid {
            levels,
            base_angles: opts.base_angles,
            radial_nodes: levels,
            angular_nodes: m,
            points: levels * m,
        },
    })
}

impl Sweep {
    fn sense(&self) -> Sense {
        if self.min_jacobian.0 > 0.0 {
            Sense::Preserving
        } else if self.max_jacobian < 0.0 {
            Sense::Reversing
        } else {
            Sense::Mixed
        }
    }

    fn require_preserving(&self) -> Result<()> {
        let (jacobian, z) = self.min_jacobian;
        if jacobian > 0.0 {
            Ok(())
        } else {
            Err(Error::SenseViolation { z, jacobian })
        }
    }

    fn into_report(self, ks: &[f64]) -> EllipticityReport {
        let scan: Vec<KprimeScan> = ks
            .iter()
            .zip(&self.kprime_trend)
            .map(|(&k, trend)| KprimeScan {
                k,
                kprime: *trend.last().unwrap_or(&0.0),
                extrapolated: extrapolate_geometric(trend),
                trend: trend.clone(),
            })
            .collect();
        let qr_constant = *self.qr_trend.last().unwrap_or(&0.0);
        let qr_extrapolated = extrapolate_geometric(&self.qr_trend);
        let not_quasiregular =
            qr_extrapolated.unwrap_or(qr_constant).max(qr_constant) >= QR_TREND_THRESHOLD;
        EllipticityReport {
            k: ks.first().copied(),
            kprime_estimate: scan.first().map(|s| s.kprime),
            qr_constant,
            qr_extrapolated,
            qr_trend: self.qr_trend.clone(),
            undefined_count: self.undefined,
            not_quasiregular,
            sense: self.sense(),
            classification: None,
            degraded: self.degraded,
            grid: self.grid.clone(),
            scan,
        }
    }
}

/// `K' = max over the grid of ‖D_f‖² - K J_f`, clamped at 0, with the
/// per-level trend.
pub fn min_kprime(field: &DiskField, k: f64, opts: &GridOptions) -> Result<EllipticityReport> {
    let s = sweep(field, &[k], opts)?;
    s.require_preserving()?;
    Ok(s.into_report(&[k]))
}

/// `sup |ω|` over grid points where `ω` is defined.
pub fn qr_constant(field: &DiskField, opts: &GridOptions) -> Result<EllipticityReport> {
    let s = sweep(field, &[], opts)?;
    s.require_preserving()?;
    Ok(s.into_report(&[]))
}

/// Sense of the field on the grid, without requiring it to be preserving.
pub fn sense(field: &DiskField, opts: &GridOptions) -> Result<Sense> {
    Ok(sweep(field, &[], opts)?.sense())
}

/// Combined report: quasiregular when `sup |ω|` stays away from 1,
/// otherwise an elliptic candidate with the `(K, K')` scan.
pub fn classify(field: &DiskField, ks: &[f64], opts: &GridOptions) -> Result<EllipticityReport> {
    let ks: Vec<f64> = if ks.is_empty() {
        vec![1.0]
    } else {
        ks.to_vec()
    };
    let s = sweep(field, &ks, opts)?;
    s.require_preserving()?;
    let mut report = s.into_report(&ks);
    let q = report.qr_constant;
    report.classification = Some(if !report.not_quasiregular && q < 1.0 {
        Classification::Quasiregular {
            k: (1.0 + q) / (1.0 - q),
            q,
        }
    } else {
        Classification::EllipticCandidate {
            pairs: report.scan.iter().map(|s| (s.k, s.best())).collect(),
        }
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundarySpec, Preset};
    use crate::extension::{extend, ExtensionOptions};

    fn field(p: Preset) -> DiskField {
        extend(&BoundarySpec::preset(p), ExtensionOptions::default()).unwrap()
    }

    fn small() -> GridOptions {
        GridOptions {
            levels: 8,
            base_angles: 16,
        }
    }

    #[test]
    fn elliptic_example_kprime_tends_to_four() {
        let opts = GridOptions::default();
        let r = min_kprime(&field(Preset::EllipticTrace), 1.0, &opts).unwrap();
        let eps = 2f64.powi(-12);
        let kp = r.kprime_estimate.unwrap();
        assert!(kp <= 4.0 && kp >= 4.0 - 8.0 * eps, "{kp}");
        assert!(r.scan[0].trend.windows(2).all(|w| w[1] >= w[0]));
        // 2r + 2r² at r = 1 - 2^{-k}
        for (k, v) in r.scan[0].trend.iter().enumerate() {
            let rk = 1.0 - 0.5f64.powi(k as i32 + 1);
            assert!((v - (2.0 * rk + 2.0 * rk * rk)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_and_scaled_identity_need_no_kprime() {
        let r = min_kprime(&field(Preset::Mode(1)), 1.0, &small()).unwrap();
        assert_eq!(r.kprime_estimate, Some(0.0));
        let two = BoundarySpec::fourier([(1, Complex64::new(2.0, 0.0))]).unwrap();
        let f = extend(&two, ExtensionOptions::default()).unwrap();
        assert!(
            min_kprime(&f, 1.0, &small())
                .unwrap()
                .kprime_estimate
                .unwrap()
                < 1e-10
        );
    }

    #[test]
    fn qr_constants() {
        let r = qr_constant(&field(Preset::Affine(0.5)), &small()).unwrap();
        assert!((r.qr_constant - 0.5).abs() < 1e-10);
        assert!(!r.not_quasiregular);
        let e = qr_constant(&field(Preset::EllipticTrace), &GridOptions::default()).unwrap();
        assert!((e.qr_constant - (1.0 - 2f64.powi(-12))).abs() < 1e-12);
        assert!(e.not_quasiregular);
        assert_eq!(
            qr_constant(&field(Preset::Mode(1)), &small())
                .unwrap()
                .qr_constant,
            0.0
        );
    }

    #[test]
    fn classification() {
        let a = classify(&field(Preset::Affine(0.5)), &[1.0, 3.0], &small()).unwrap();
        match a.classification.unwrap() {
            Classification::Quasiregular { k, q } => {
                assert!((q - 0.5).abs() < 1e-10);
                assert!((k - 3.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        let e = classify(
            &field(Preset::EllipticTrace),
            &[1.0],
            &GridOptions::default(),
        )
        .unwrap();
        match e.classification.unwrap() {
            Classification::EllipticCandidate { pairs } => {
                assert_eq!(pairs[0].0, 1.0);
                assert!((pairs[0].1 - 4.0).abs() < 1e-3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conjugate_is_a_sense_violation() {
        let f = field(Preset::Mode(-1));
        assert!(matches!(
            classify(&f, &[1.0], &small()),
            Err(Error::SenseViolation { .. })
        ));
        assert_eq!(sense(&f, &small()).unwrap(), Sense::Reversing);
    }

    #[test]
    fn kprime_is_monotone_in_k() {
        let f = field(Preset::EllipticTrace);
        let r = classify(&f, &[1.0, 1.5, 2.0, 4.0], &small()).unwrap();
        assert!(r.scan.windows(2).all(|w| w[0].kprime >= w[1].kprime));
    }

    #[test]
    fn rejects_k_below_one() {
        let f = field(Preset::Mode(1));
        assert!(matches!(
            min_kprime(&f, 0.5, &small()),
            Err(Error::Config(_))
        ));
    }
}
