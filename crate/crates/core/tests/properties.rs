use num_complex::Complex64;
use oblique_paraxial::io::{decode_field, encode_field};
use oblique_paraxial::model::*;
use oblique_paraxial::solvers::Propagator;
use oblique_paraxial::spectral::{l2_norm_sq, Dft};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn line(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n)
}

fn params() -> impl Strategy<Value = PhysicalParams> {
    (0.01..1.0f64, -1.5..1.5f64, 0.01..5.0f64)
        .prop_filter("oblique", |(_, theta, _)| theta.abs() > 0.05)
        .prop_map(|(e, theta, nu)| PhysicalParams::from_angle(e, theta, nu).unwrap())
}

fn ygrid() -> Grid1D {
    Grid1D::centered(256, 32.0).unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn combine(a: Complex64, u: &[Complex64], b: Complex64, v: &[Complex64]) -> Vec<Complex64> {
    u.iter().zip(v).map(|(x, y)| a * x + b * y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dft_round_trip(u in line(256)) {
        let dft = Dft::new(&ygrid());
        let back = dft.inverse(&dft.forward(&u).unwrap());
        prop_assert!(max_diff(&back, &u) <= 1e-13);
    }

    #[test]
    fn parseval(u in line(256)) {
        let g = ygrid();
        let s = Dft::new(&g).forward(&u).unwrap();
        let direct = l2_norm_sq(&u, g.dx());
        prop_assert!((s.l2_norm_sq() - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn halfspace_is_linear(p in params(), u in line(256), v in line(256), a in complex(), b in complex()) {
        let (yg, xg) = (ygrid(), Grid1D::new(8, 0.0, 0.5).unwrap());
        let prop = Propagator::new(&p, &yg).unwrap();
        let solve = |s: Vec<Complex64>| prop.halfspace(&BoundaryData::new(yg, s, BoundaryKind::G).unwrap(), &xg).unwrap().field;
        let (fu, fv) = (solve(u.clone()), solve(v.clone()));
        let fw = solve(combine(a, &u, b, &v));
        let expected = combine(a, fu.values(), b, fv.values());
        let scale = expected.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        prop_assert!(max_diff(fw.values(), &expected) <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn quadrant_is_linear(p in params(), u in line(256), v in line(256), a in complex(), b in complex()) {
        let (yg, xg) = (ygrid(), Grid1D::new(8, 0.0, 0.5).unwrap());
        let prop = Propagator::new(&p, &yg).unwrap();
        let solve = |mut s: Vec<Complex64>| {
            s.iter_mut().enumerate().filter(|(i, _)| yg.point(*i) <= 0.0).for_each(|(_, z)| *z = Complex64::new(0.0, 0.0));
            prop.quadrant(&BoundaryData::new(yg, s, BoundaryKind::GPlus).unwrap(), &xg).unwrap().field
        };
        let (fu, fv) = (solve(u.clone()), solve(v.clone()));
        let fw = solve(combine(a, &u, b, &v));
        let expected = combine(a, fu.values(), b, fv.values());
        let scale = expected.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        prop_assert!(max_diff(fw.values(), &expected) <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn grid_points_map_back_to_their_index(exp in 3u32..14, x0 in -100.0..100.0f64, dx in 1e-3..10.0f64) {
        let g = Grid1D::new(1 << exp, x0, dx).unwrap();
        for i in [0, 1, g.len() / 2, g.len() - 1] {
            prop_assert_eq!(g.index_of(g.point(i)), Some(i));
        }
    }

    #[test]
    fn field_encoding_round_trip(values in line(64), x0 in -10.0..10.0f64, dy in 1e-3..1.0f64) {
        let f = ComplexField2D::new(Grid1D::new(8, x0, 0.25).unwrap(), Grid1D::new(8, -1.0, dy).unwrap(), values).unwrap();
        let bytes = encode_field(&f);
        prop_assert_eq!(encode_field(&decode_field(&bytes).unwrap()), bytes);
    }
}
