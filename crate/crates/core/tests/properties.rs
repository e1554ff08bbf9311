use geodesy::curve::grid;
use geodesy::geodesics::{integrate_explicit, integrate_geodesic_with, GeodesicState, Support};
use geodesy::geometry::{curvature_at, ChartPoint, Family, GeometrySpec, Method};
use geodesy::reconstruct::{invert_to_geodesic, reconstruct_basis, BasisCheck, InversionSource};
use geodesy::sampling::{random_points, Bounds};
use geodesy::{Expression, Mode};
use num_complex::Complex64 as C;
use proptest::prelude::*;

/// Source text of a random expression in variable `v`, built from
/// entire functions so every point is in its domain.
fn source(v: &'static str) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just(v.to_string()),
        (1u32..40).prop_map(|k| format!("{}", k as f64 / 8.0)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})+({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.prop_map(|a| format!("({a})^2")),
        ]
    })
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn render_parse_round_trip(s in source("x")) {
        let e = Expression::parse(&s, Mode::Real).unwrap();
        let again = Expression::parse(&e.render(), Mode::Real).unwrap();
        prop_assert_eq!(again.root(), e.root());
        prop_assert_eq!(again.render(), e.render());
    }

    #[test]
    fn real_jets_match_differences(s in source("x"), x in -1.5f64..1.5) {
        let e = Expression::parse(&s, Mode::Real).unwrap();
        let h = 1e-4;
        let f = |t: f64| e.jet(t).unwrap();
        let j = f(x);
        let d1 = (f(x + h).value - f(x - h).value) / (2.0 * h);
        let d1s = (f(x + h).d1 - f(x - h).d1) / (2.0 * h);
        prop_assert!(close(C::from(j.d1), C::from(d1), 1e-5), "{} vs {}", j.d1, d1);
        prop_assert!(close(C::from(j.d2), C::from(d1s), 1e-5), "{} vs {}", j.d2, d1s);
    }

    #[test]
    fn complex_jets_are_holomorphic(s in source("z"), re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let e = Expression::parse(&s, Mode::Complex).unwrap();
        let z = C::new(re, im);
        let h = 1e-4;
        let f = |w: C| e.jet(w).unwrap().value;
        let along_re = (f(z + h) - f(z - h)) / (2.0 * h);
        let along_im = (f(z + C::i() * h) - f(z - C::i() * h)) / (2.0 * h * C::i());
        let d = e.jet(z).unwrap().d1;
        prop_assert!(close(d, along_re, 1e-5));
        prop_assert!(close(d, along_im, 1e-5));
    }

    #[test]
    fn real_families_have_constant_curvature(s in source("x"), fam in 0usize..3, seed in 0u64..1000) {
        let family = [Family::Hyperbolic, Family::AntiDeSitterPlus, Family::AntiDeSitterMinus][fam];
        let spec = GeometrySpec::parse(family, &s).unwrap();
        let k0 = if family == Family::AntiDeSitterMinus { 1.0 } else { -1.0 };
        for p in random_points(&spec, 3, seed, Bounds::default()) {
            let r = curvature_at(&spec, &p).unwrap();
            prop_assert!((r.sectional_or_holomorphic_k - k0).norm() <= 1e-6, "{s} {family} {p:?}");
        }
    }

    #[test]
    fn complex_family_has_constant_curvature(s in source("z"), seed in 0u64..1000) {
        let spec = GeometrySpec::parse(Family::ComplexSphere, &s).unwrap();
        for p in random_points(&spec, 3, seed, Bounds::default()) {
            let r = curvature_at(&spec, &p).unwrap();
            prop_assert!((r.sectional_or_holomorphic_k + 1.0).norm() <= 1e-6);
        }
    }

    #[test]
    fn ads_pair_shares_geodesics(
        a in 1.0f64..3.0, x0 in -0.5f64..0.5, q0 in 0.5f64..2.0, vx in -1.0f64..1.0, vq in -1.0f64..1.0,
    ) {
        let h = format!("{a}+sin(x)");
        let plus = GeometrySpec::parse(Family::AntiDeSitterPlus, &h).unwrap();
        let minus = GeometrySpec::parse(Family::AntiDeSitterMinus, &h).unwrap();
        let init = GeodesicState { coords: ChartPoint::real(x0, q0), velocity: ChartPoint::real(vx, vq), s: 0.0 };
        let p = integrate_geodesic_with(&plus, &init, (0.0, 0.5), 1e-12, Method::FromJets);
        let m = integrate_geodesic_with(&minus, &init, (0.0, 0.5), 1e-12, Method::FromJets);
        prop_assume!(p.is_ok() && m.is_ok());
        let (p, m) = (p.unwrap(), m.unwrap());
        prop_assert_eq!(p.s_range(), m.s_range());
        for s in grid(p.s_range().0, p.s_range().1, 20) {
            prop_assert_eq!(p.state_at(s).unwrap().coords, m.state_at(s).unwrap().coords);
        }
    }

    #[test]
    fn theta_product_and_round_trip(
        ads in any::<bool>(), a in 1.0f64..3.0, v in 0.8f64..2.5, d in -0.4f64..0.4,
    ) {
        let (family, h) = if ads {
            (Family::AntiDeSitterPlus, format!("{a}+x^2"))
        } else {
            (Family::Hyperbolic, format!("-{a}-x^2"))
        };
        let spec = GeometrySpec::parse(family, &h).unwrap();
        let g = integrate_explicit(&spec, C::from(v), C::from(d), &Support::Interval { x0: 0.0, lo: -0.3, hi: 0.3 }, 1e-12);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let b = reconstruct_basis(&spec, &g, 0.0, None, 1e-12, BasisCheck::Residual).unwrap();
        let back = invert_to_geodesic(InversionSource::Basis(&b), family).unwrap();
        let sign = if ads { 1.0 } else { -1.0 };
        let (lo, hi) = g.support();
        for t in grid(lo, hi, 50) {
            let q = g.at(t).unwrap().value;
            let prod = b.theta.top.eval(t).unwrap().value * b.theta.bot.eval(t).unwrap().value;
            prop_assert!(close(prod, sign * q * q, 1e-9));
            prop_assert!((back.at(t).unwrap().value - q).norm() <= 1e-7);
            let w = b.wronskian_at(t).unwrap();
            prop_assert!(close(w, b.wronskian_at(0.0).unwrap(), 1e-6));
        }
    }
}
