//! Property tests over random trigonometric polynomials.

use diskharm::boundary::{boundary_derivative, fourier_coefficients, lp_circle_norm, BoundarySpec};
use diskharm::calculus::{directional, local_geometry};
use diskharm::constants::{c_of_p, c_upper_bound};
use diskharm::ellipticity::{min_kprime, GridOptions};
use diskharm::extension::{DiskField, ExtensionOptions};
use diskharm::norms::{
    bergman_norm, circle_mean, hardy_norm, radial_grid, Exponent, FieldQuantity, NormOptions,
    Scalar,
};
use diskharm::verify::{check_lemma_ft, VerifyOptions};
use diskharm::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

type Terms = Vec<(i64, Complex64)>;

fn terms(max_degree: i64) -> impl Strategy<Value = Terms> {
    (1..=max_degree).prop_flat_map(|d| {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), (2 * d + 1) as usize).prop_map(
            move |cs| {
                cs.into_iter()
                    .enumerate()
                    .map(|(i, (re, im))| (i as i64 - d, Complex64::new(re, im)))
                    .collect()
            },
        )
    })
}

fn point(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn spec(t: &Terms) -> BoundarySpec {
    BoundarySpec::fourier(t.iter().copied()).unwrap()
}

fn field(t: &Terms) -> DiskField {
    DiskField::new(spec(t), ExtensionOptions::default()).unwrap()
}

fn scaled(t: &Terms, a: Complex64) -> Terms {
    t.iter().map(|&(n, c)| (n, a * c)).collect()
}

fn size(t: &Terms) -> f64 {
    t.iter().map(|(_, c)| c.norm()).sum::<f64>().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extension_is_linear(f in terms(5), g in terms(5), a in complex(), b in complex(), z in point(0.95)) {
        let mut mix = scaled(&f, a);
        mix.extend(scaled(&g, b));
        let lhs = field(&mix).eval(z).unwrap().value;
        let rhs = a * field(&f).eval(z).unwrap().value + b * field(&g).eval(z).unwrap().value;
        let scale = a.norm() * size(&f) + b.norm() * size(&g);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn boundary_norm_is_homogeneous(f in terms(4), lambda in complex(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY])) {
        let p = if p.is_infinite() { Exponent::Infinity } else { Exponent::Finite(p) };
        let base = lp_circle_norm(&spec(&f), p).unwrap().value;
        let scaled = lp_circle_norm(&spec(&scaled(&f, lambda)), p).unwrap().value;
        let tol = match p { Exponent::Infinity => 1e-6, _ => 1e-12 };
        prop_assert!((scaled - lambda.norm() * base).abs() <= tol * (lambda.norm() * base).max(1e-300));
    }

    #[test]
    fn boundary_norm_grows_with_p(f in terms(4)) {
        let s = spec(&f);
        let values: Vec<f64> = [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Infinity]
            .iter()
            .map(|&p| lp_circle_norm(&s, p).unwrap().value)
            .collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-9), "{values:?}");
        }
    }

    #[test]
    fn plancherel(f in terms(6)) {
        let energy: f64 = f.iter().map(|(_, c)| c.norm_sqr()).sum();
        let l2 = lp_circle_norm(&spec(&f), Exponent::Finite(2.0)).unwrap().value;
        prop_assert!((l2 * l2 - energy).abs() <= 1e-10 * energy);
    }

    #[test]
    fn derivative_multiplies_by_in(f in terms(6)) {
        let d = boundary_derivative(&spec(&f)).unwrap();
        let coeffs = fourier_coefficients(&d, 16).unwrap();
        for &(n, c) in &f {
            prop_assert_eq!(coeffs.get(n), Complex64::new(0.0, n as f64) * c);
        }
    }

    #[test]
    fn wirtinger_matches_central_differences(f in terms(6), z in point(0.9)) {
        let field = field(&f);
        let h = 1e-5;
        let at = |w: Complex64| field.eval(w).unwrap().value;
        let fx = (at(z + h) - at(z - h)) / (2.0 * h);
        let iy = Complex64::new(0.0, h);
        let fy = (at(z + iy) - at(z - iy)) / (2.0 * h);
        let w = field.wirtinger(z).unwrap();
        let i = Complex64::i();
        prop_assert!((w.f_z - 0.5 * (fx - i * fy)).norm() <= 1e-6);
        prop_assert!((w.f_zbar - 0.5 * (fx + i * fy)).norm() <= 1e-6);
    }

    #[test]
    fn extension_is_harmonic(f in terms(6), z in point(0.9)) {
        let field = field(&f);
        let h = 1e-3;
        let at = |w: Complex64| field.eval(w).unwrap().value;
        let iy = Complex64::new(0.0, h);
        let lap = (at(z + h) + at(z - h) + at(z + iy) + at(z - iy) - 4.0 * at(z)) / (h * h);
        prop_assert!(lap.norm() <= 1e-4 * size(&f).max(1.0));
    }

    #[test]
    fn directional_derivatives_lie_between_stretches(f in terms(6), z in point(0.9)) {
        let field = field(&f);
        let w = field.wirtinger(z).unwrap();
        let geo = local_geometry(&field, z).unwrap();
        for k in 0..32 {
            let d = directional(w.f_z, w.f_zbar, TAU * k as f64 / 32.0).norm();
            prop_assert!(d >= geo.min_stretch * (1.0 - 1e-12) - 1e-15);
            prop_assert!(d <= geo.op_norm * (1.0 + 1e-12) + 1e-15);
        }
        if geo.jacobian > 0.0 {
            let product = geo.op_norm * geo.min_stretch;
            prop_assert!((geo.jacobian - product).abs() <= 1e-10 * product);
        }
    }

    #[test]
    fn constant_stays_below_its_bound(p in 1.0..10.0f64) {
        let c = c_of_p(p).unwrap();
        prop_assert!(c.c_value > 0.0);
        prop_assert!(c.c_value <= c_upper_bound(p).unwrap() + c.error);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn norms_are_homogeneous(f in terms(4), lambda in 0.0..5.0f64, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let field = field(&f);
        let opts = NormOptions { levels: 6, ..NormOptions::default() };
        let p = Exponent::Finite(p);
        let norm = |s: Scalar<'_>| (hardy_norm(&s, p, &opts).unwrap().value, bergman_norm(&s, p, &opts).unwrap().value);
        let (h, b) = norm(Scalar::of(&field, FieldQuantity::OpNorm));
        let (hs, bs) = norm(Scalar::of(&field, FieldQuantity::OpNorm).scaled(lambda));
        prop_assert!((hs - lambda * h).abs() <= 1e-12 * (lambda * h).max(1e-300));
        prop_assert!((bs - lambda * b).abs() <= 1e-12 * (lambda * b).max(1e-300));
    }

    #[test]
    fn bergman_is_dominated_by_hardy(f in terms(4), p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let field = field(&f);
        let opts = NormOptions { levels: 8, ..NormOptions::default() };
        let p = Exponent::Finite(p);
        for q in [FieldQuantity::Fz, FieldQuantity::OpNorm, FieldQuantity::Fr] {
            let s = Scalar::of(&field, q);
            let h = hardy_norm(&s, p, &opts).unwrap();
            let b = bergman_norm(&s, p, &opts).unwrap();
            prop_assert!(b.value <= h.best_value() + h.error_estimate + b.error_estimate + 1e-12, "{q:?}: {} > {}", b.value, h.value);
        }
    }

    #[test]
    fn analytic_circle_means_increase(f in terms(5), p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let field = field(&f);
        let opts = NormOptions::default();
        let s = Scalar::of(&field, FieldQuantity::Fz);
        let means: Vec<f64> = radial_grid(10)
            .iter()
            .map(|&r| circle_mean(&s, r, Exponent::Finite(p), &opts).unwrap().value)
            .collect();
        for w in means.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12), "{means:?}");
        }
    }

    #[test]
    fn kprime_is_monotone_in_k_and_level(f in terms(3), k1 in 1.0..4.0f64, dk in 0.0..4.0f64) {
        // f = z + (small anti-analytic part) keeps the field sense-preserving.
        let mut t: Terms = f.iter().filter(|(n, _)| *n < 0).map(|&(n, c)| (n, 0.1 * c)).collect();
        t.push((1, Complex64::new(1.0, 0.0)));
        let field = field(&t);
        let grid = GridOptions { levels: 6, base_angles: 32 };
        let a = min_kprime(&field, k1, &grid).unwrap();
        let b = min_kprime(&field, k1 + dk, &grid).unwrap();
        prop_assert!(a.scan[0].kprime >= b.scan[0].kprime);
        for w in a.scan[0].trend.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn pass_follows_the_margin_rule(f in terms(4), factor in 0.5..1.5f64) {
        let field = field(&f);
        let opts = VerifyOptions::default().with_levels(6);
        let base = check_lemma_ft(&field, Exponent::Finite(2.0), &radial_grid(6), &opts).unwrap();
        let r = base.with_rhs_scaled(factor);
        prop_assert_eq!(r.margin, r.rhs - r.lhs);
        let allowed = -(r.tolerances.error_estimate + r.tolerances.slack * (1.0 + r.rhs.abs()));
        let checks = r.checks.iter().all(|c| c.pass);
        prop_assert_eq!(r.pass, r.margin >= allowed && checks);
    }
}
