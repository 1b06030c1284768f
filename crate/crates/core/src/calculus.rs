//! Wirtinger and polar derivatives, stretch extremes, Jacobian and
//! dilatation of a harmonic extension.

use crate::error::{Error, Result};
use crate::extension::DiskField;
use num_complex::Complex64;
use serde::Serialize;

/// `|f_z|` below this fraction of `1 + |f_z̄|` leaves the dilatation undefined.
pub const DILATATION_CUTOFF: f64 = 1e-14;

/// `f_z`, `f_z̄` and the polar derivatives at `z = re^{it}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativePack {
    pub at: Complex64,
    pub f_z: Complex64,
    pub f_zbar: Complex64,
    /// `∂f/∂t = i(z f_z - z̄ f_z̄)`.
    pub f_t: Complex64,
    /// `∂f/∂r = f_z e^{it} + f_z̄ e^{-it}`.
    pub f_r: Complex64,
    pub bound: f64,
    pub degraded: bool,
}

impl DerivativePack {
    /// Polar derivatives from the Wirtinger pair. At `z = 0` the angle is
    /// taken as `t = 0`.
    pub fn from_wirtinger(z: Complex64, f_z: Complex64, f_zbar: Complex64) -> Self {
        let e = unit(z);
        DerivativePack {
            at: z,
            f_z,
            f_zbar,
            f_t: Complex64::i() * (z * f_z - z.conj() * f_zbar),
            f_r: f_z * e + f_zbar * e.conj(),
            bound: 0.0,
            degraded: false,
        }
    }

    /// `f_t / r`, singular at the origin.
    pub fn f_t_over_r(&self) -> Result<Complex64> {
        let r = self.at.norm();
        if r == 0.0 {
            return Err(Error::SingularPoint("f_t / r at z = 0".into()));
        }
        Ok(self.f_t / r)
    }

    /// `f_z = (e^{-it}/2)(f_r - (i/r) f_t)`, recovered from the polar pair.
    pub fn f_z_from_polar(&self) -> Result<Complex64> {
        let e = unit(self.at);
        Ok(e.conj() * 0.5 * (self.f_r - Complex64::i() * self.f_t_over_r()?))
    }

    /// `conj(f_z̄) = (e^{-it}/2)(conj(f_r) - (i/r) conj(f_t))`.
    pub fn conj_f_zbar_from_polar(&self) -> Result<Complex64> {
        let e = unit(self.at);
        let ft_r = self.f_t_over_r()?;
        Ok(e.conj() * 0.5 * (self.f_r.conj() - Complex64::i() * ft_r.conj()))
    }
}

fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Directional derivative `∂_α f = f_z e^{iα} + f_z̄ e^{-iα}`.
pub fn directional(f_z: Complex64, f_zbar: Complex64, alpha: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, alpha);
    f_z * e + f_zbar * e.conj()
}

/// Pointwise geometry of the differential `D_f(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalGeometry {
    /// `‖D_f‖ = |f_z| + |f_z̄|`.
    pub op_norm: f64,
    /// `l(D_f) = ||f_z| - |f_z̄||`.
    pub min_stretch: f64,
    /// `J_f = |f_z|² - |f_z̄|²`.
    pub jacobian: f64,
    /// Second complex dilatation; `None` where `f_z` vanishes.
    pub dilatation: Option<Complex64>,
}

impl LocalGeometry {
    /// Geometry from the Wirtinger pair, with `ω = conj(f_z̄)/f_z`.
    pub fn from_wirtinger(f_z: Complex64, f_zbar: Complex64) -> Self {
        let a = f_z.norm();
        let b = f_zbar.norm();
        let dilatation = (a > DILATATION_CUTOFF * (1.0 + b)).then(|| f_zbar.conj() / f_z);
        LocalGeometry {
            op_norm: a + b,
            min_stretch: (a - b).abs(),
            jacobian: (a - b) * (a + b),
            dilatation,
        }
    }

    pub fn sense_preserving(&self) -> bool {
        self.jacobian > 0.0
    }
}

/// `(f_z, f_z̄)` at `z`.
pub fn wirtinger(field: &DiskField, z: Complex64) -> Result<(Complex64, Complex64)> {
    let w = field.wirtinger(z)?;
    Ok((w.f_z, w.f_zbar))
}

/// Full derivative pack at `z`, carrying the truncation bound and the
/// degraded-accuracy flag of the extension.
pub fn polar(field: &DiskField, z: Complex64) -> Result<DerivativePack> {
    let w = field.wirtinger(z)?;
    let mut pack = DerivativePack::from_wirtinger(z, w.f_z, w.f_zbar);
    pack.bound = w.bound;
    pack.degraded = w.degraded;
    Ok(pack)
}

/// Geometry at `z`; the dilatation is computed as `g'/h'` from the series.
pub fn local_geometry(field: &DiskField, z: Complex64) -> Result<LocalGeometry> {
    let w = field.wirtinger(z)?;
    let mut geo = LocalGeometry::from_wirtinger(w.f_z, w.f_zbar);
    if geo.dilatation.is_some() {
        // h' = f_z, g' = conj(f_z̄) from the same pair.
        let g_prime = w.f_zbar.conj();
        geo.dilatation = Some(g_prime / w.f_z);
    }
    Ok(geo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundarySpec, Preset};
    use crate::extension::{extend, ExtensionOptions};
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(p: Preset) -> DiskField {
        extend(&BoundarySpec::preset(p), ExtensionOptions::default()).unwrap()
    }

    #[test]
    fn identity_map() {
        let f = field(Preset::Mode(1));
        let z = c(0.3, 0.5);
        let (fz, fzb) = wirtinger(&f, z).unwrap();
        assert!((fz - c(1.0, 0.0)).norm() < 1e-15 && fzb.norm() == 0.0);
        let pack = polar(&f, z).unwrap();
        let e = z / z.norm();
        assert!((pack.f_t - Complex64::i() * z).norm() < 1e-15);
        assert!((pack.f_r - e).norm() < 1e-15);
        let g = local_geometry(&f, z).unwrap();
        assert_eq!((g.op_norm, g.min_stretch, g.jacobian), (1.0, 1.0, 1.0));
        assert_eq!(g.dilatation, Some(c(0.0, 0.0)));
    }

    #[test]
    fn conjugate_map_is_sense_reversing() {
        let f = field(Preset::Mode(-1));
        let (fz, fzb) = wirtinger(&f, c(0.2, -0.1)).unwrap();
        assert_eq!(fz, c(0.0, 0.0));
        assert!((fzb - c(1.0, 0.0)).norm() < 1e-15);
        let g = local_geometry(&f, c(0.2, -0.1)).unwrap();
        assert_eq!(g.jacobian, -1.0);
        assert_eq!(g.op_norm, 1.0);
        assert!(g.dilatation.is_none());
    }

    #[test]
    fn elliptic_example_geometry() {
        let f = field(Preset::EllipticTrace);
        for &(r, t) in &[(0.3, 0.0), (0.6, 1.0), (0.95, 4.0)] {
            let z = Complex64::from_polar(r, t);
            let (fz, fzb) = wirtinger(&f, z).unwrap();
            assert!((fz - c(1.0, 0.0)).norm() < 1e-14);
            assert!((fzb - z.conj()).norm() < 1e-14);
            let g = local_geometry(&f, z).unwrap();
            assert!((g.op_norm - (1.0 + r)).abs() < 1e-14);
            assert!((g.min_stretch - (1.0 - r)).abs() < 1e-14);
            assert!((g.jacobian - (1.0 - r * r)).abs() < 1e-14);
            // ω = g'/h' = z, so |ω| = r.
            assert!((g.dilatation.unwrap() - z).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_has_zero_polar_derivatives() {
        let f = field(Preset::Constant(c(2.0, 1.0)));
        let pack = polar(&f, c(0.4, 0.4)).unwrap();
        assert_eq!(pack.f_t, c(0.0, 0.0));
        assert_eq!(pack.f_r, c(0.0, 0.0));
    }

    #[test]
    fn polar_inversion_matches_wirtinger_for_abs_sin() {
        let f = field(Preset::AbsSin);
        let z = c(0.5, 0.0);
        let pack = polar(&f, z).unwrap();
        assert!((pack.f_z_from_polar().unwrap() - pack.f_z).norm() < 1e-10);
        assert!((pack.conj_f_zbar_from_polar().unwrap() - pack.f_zbar.conj()).norm() < 1e-10);
        let at_zero = polar(&f, c(0.0, 0.0)).unwrap();
        assert_eq!(at_zero.f_t, c(0.0, 0.0));
        assert!(matches!(
            at_zero.f_z_from_polar(),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn directional_derivative_within_stretch_bounds() {
        let f = field(Preset::TrigPoly {
            seed: 11,
            degree: 6,
        });
        let z = c(-0.4, 0.35);
        let (fz, fzb) = wirtinger(&f, z).unwrap();
        let g = LocalGeometry::from_wirtinger(fz, fzb);
        let mods: Vec<f64> = (0..32)
            .map(|k| directional(fz, fzb, TAU * k as f64 / 32.0).norm())
            .collect();
        let tol = 1e-13 * g.op_norm;
        assert!(mods
            .iter()
            .all(|&m| m >= g.min_stretch - tol && m <= g.op_norm + tol));
    }

    #[test]
    fn dilatation_routes_agree() {
        let f = field(Preset::TrigPoly { seed: 5, degree: 4 });
        for &z in &[c(0.1, 0.2), c(-0.6, 0.1), c(0.0, -0.8)] {
            let g = local_geometry(&f, z).unwrap();
            let (fz, fzb) = wirtinger(&f, z).unwrap();
            let alt = LocalGeometry::from_wirtinger(fz, fzb);
            match (g.dilatation, alt.dilatation) {
                (Some(a), Some(b)) => assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm())),
                (None, None) => {}
                other => panic!("mismatch {other:?}"),
            }
        }
    }
}
