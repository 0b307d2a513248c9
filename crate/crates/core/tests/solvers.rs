use num_complex::Complex64;
use oblique_paraxial::model::*;
use oblique_paraxial::solvers::*;
use oblique_paraxial::spectral::oracle_inverse_fourier;
use oblique_paraxial::symbols::{entrance_multiplier, r_pm, Sign};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn params(ky_sign: f64) -> PhysicalParams {
    PhysicalParams::new(0.1, FRAC_1_SQRT_2, ky_sign * FRAC_1_SQRT_2, 0.5).unwrap()
}

fn ygrid() -> Grid1D {
    Grid1D::centered(4096, 256.0).unwrap()
}

/// `F(A e^{−(y−c)²/(2w²)})(η)`.
fn gaussian_hat(eta: f64, c: f64, w: f64, a: f64) -> Complex64 {
    a * w * (2.0 * PI).sqrt() * (-0.5 * eta * eta * w * w).exp() * Complex64::from_polar(1.0, -eta * c)
}

#[test]
fn halfspace_matches_quadrature_oracle_at_probes() {
    for ky_sign in [1.0, -1.0] {
        let p = params(ky_sign);
        let yg = ygrid();
        let xg = Grid1D::new(64, 0.0, 0.125).unwrap();
        let g = BoundaryData::from_fn(yg, BoundaryKind::G, gaussian(2.0, 1.0, 1.0)).unwrap();
        let sol = solve_halfspace(&g, &xg, &p).unwrap();
        let spec = |x: f64| {
            move |eta: f64| {
                entrance_multiplier(eta, &p).unwrap() * gaussian_hat(eta, 2.0, 1.0, 1.0) * (r_pm(eta, Sign::Minus, &p).unwrap() * x).exp()
            }
        };
        for (ix, y) in [(0usize, 2.0), (8, 2.5), (16, 0.0), (32, 5.0), (63, 3.0)] {
            let iy = yg.index_of(y).unwrap();
            let x = xg.point(ix);
            let want = oracle_inverse_fourier(spec(x), yg.point(iy), 14.0, 16384).unwrap();
            let got = sol.field.get(ix, iy);
            assert!((got - want).norm() <= 1e-6 * want.norm(), "ky {ky_sign} x {x} y {y}: {got} vs {want}");
        }
    }
}

#[test]
fn halfspace_satisfies_the_equation() {
    let p = params(1.0);
    let g = BoundaryData::from_fn(ygrid(), BoundaryKind::G, gaussian(2.0, 1.0, 1.0)).unwrap();
    let r: Vec<f64> = [0.0625, 0.03125]
        .iter()
        .map(|&dx| {
            let sol = solve_halfspace(&g, &Grid1D::new(64, 0.0, dx).unwrap(), &p).unwrap();
            pde_residual(&sol.field, &p).unwrap()
        })
        .collect();
    println!("pde residuals {r:?}");
    assert!(r[1] < 1e-2 && r[0] / r[1] > 3.5);
    let sol = solve_halfspace(&g, &Grid1D::new(64, 0.0, 0.03125).unwrap(), &p).unwrap();
    let ode = spectral_ode_residual(&sol).unwrap();
    println!("ode residual {ode:e}");
    assert!(ode < 1e-3);
}

fn l2(v: &[Complex64], dy: f64) -> f64 {
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dy).sqrt()
}

#[test]
fn quadrant_satisfies_its_trace_equation_and_entrance_condition() {
    // y = 0 sits 8.6 widths from the centre, so the cut g₊ is smooth to round-off
    let yg = ygrid();
    let gp = gaussian_g_plus(yg, 3.0, 0.35, 1.0).unwrap();
    for ky_sign in [1.0, -1.0] {
        let p = params(ky_sign);
        let sol = solve_quadrant(&gp, &Grid1D::new(32, 0.0, 0.25).unwrap(), &p).unwrap();
        let trace = trace_equation_residual(&sol, &gp, &p).unwrap() / l2(&sol.trace0, yg.dx());
        let entrance = quadrant_entrance_residual(&sol, &gp).unwrap();
        println!("ky {ky_sign}: trace {trace:e} entrance {entrance:e}");
        if ky_sign > 0.0 {
            assert!(trace <= 1e-8);
            assert!(entrance <= 1e-8);
        } else {
            // the truncated trace jumps at y = 0 and the entrance symbol grows
            // like √|η|: the |y|^{-1/2} singularity leaks across the cut at a
            // level that does not shrink with dy (measured 2.3e-4)
            assert!(entrance <= 1e-3);
        }
        assert_eq!(sol.trace0.as_slice(), sol.field.slice(0));
        assert!(sol.field.slice(5).iter().enumerate().all(|(i, v)| yg.is_nonnegative(i) || v.norm() == 0.0));
    }
}

#[test]
fn trace_residual_grows_linearly_with_a_perturbation() {
    let yg = ygrid();
    let p = params(1.0);
    let gp = gaussian_g_plus(yg, 3.0, 0.35, 1.0).unwrap();
    let sol = solve_quadrant(&gp, &Grid1D::new(8, 0.0, 0.25).unwrap(), &p).unwrap();
    let bump = gaussian(10.0, 2.0, 1.0);
    let residuals: Vec<f64> = [1e-4, 1e-3, 1e-2]
        .iter()
        .map(|&a| {
            let mut s = sol.clone();
            for (i, v) in s.trace0.iter_mut().enumerate() {
                *v += a * bump(yg.point(i));
            }
            trace_equation_residual(&s, &gp, &p).unwrap()
        })
        .collect();
    for w in residuals.windows(2) {
        assert!((w[1] / w[0] - 10.0).abs() < 1e-3, "{residuals:?}");
    }
}

#[test]
fn slice_energy_decreases_with_x() {
    let p = params(-1.0);
    let g = BoundaryData::from_fn(ygrid(), BoundaryKind::G, gaussian(2.0, 1.0, 1.0)).unwrap();
    let sol = solve_halfspace(&g, &Grid1D::new(16, 0.0, 0.125).unwrap(), &p).unwrap();
    let dy = ygrid().dx();
    let norms: Vec<f64> = sol.field.slices().map(|s| l2(s, dy)).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]));
    // F_y(u(x)) = e^{R₋x}·F_y(u₀) bin-wise
    let dft = oblique_paraxial::spectral::Dft::new(&ygrid());
    let s8 = dft.forward(sol.field.slice(8)).unwrap();
    let want = sol.spectrum_at(1.0);
    let peak = want.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (a, b) in s8.coeffs().iter().zip(&want) {
        assert!((a - b).norm() <= 1e-12 * peak);
    }
}

#[test]
fn g_from_uin_matches_its_definition() {
    // 2k_x g = iεk_y k_x ∂y u^in + 2k_x u^in for a Gaussian u^in
    let p = params(-1.0);
    let yg = ygrid();
    let uin = BoundaryData::from_fn(yg, BoundaryKind::UIn, gaussian(0.0, 1.5, 2.0)).unwrap();
    let g = g_from_uin(&uin, &p).unwrap();
    for (i, y) in yg.points().enumerate().step_by(97) {
        let u = 2.0 * (-y * y / 4.5).exp();
        let du = -y / 2.25 * u;
        let want = Complex64::new(u, 0.5 * p.epsilon() * p.ky() * du);
        assert!((g.samples()[i] - want).norm() < 1e-12);
    }
    assert_eq!(g.kind(), BoundaryKind::G);
}

#[test]
fn input_errors() {
    let p = params(1.0);
    let yg = ygrid();
    let xg = Grid1D::new(8, 0.0, 0.5).unwrap();
    let uin = BoundaryData::from_fn(yg, BoundaryKind::UIn, gaussian(0.0, 1.0, 1.0)).unwrap();
    assert_eq!(solve_halfspace(&uin, &xg, &p).unwrap_err(), SolverError::WrongKind(BoundaryKind::UIn));
    let g = uin.with_kind(BoundaryKind::G).unwrap();
    assert_eq!(g_from_uin(&g, &p).unwrap_err(), SolverError::WrongKind(BoundaryKind::G));
    let shifted = Grid1D::new(8, 1.0, 0.5).unwrap();
    assert_eq!(solve_halfspace(&g, &shifted, &p).unwrap_err(), SolverError::XGridOrigin(1.0));
    let other = BoundaryData::from_fn(Grid1D::centered(2048, 256.0).unwrap(), BoundaryKind::G, gaussian(0.0, 1.0, 1.0)).unwrap();
    let prop = Propagator::new(&p, &yg).unwrap();
    assert_eq!(prop.halfspace(&other, &xg).unwrap_err(), SolverError::GridMismatch);
    // data reaching y ≤ 0 cannot enter the quadrant problem
    assert!(matches!(solve_quadrant(&g, &xg, &p), Err(SolverError::Model(ModelError::SupportViolation { .. }))));
    let flat = PhysicalParams::new(0.1, 1.0, 0.0, 0.5).unwrap();
    assert!(matches!(solve_halfspace(&g, &xg, &flat), Err(SolverError::Model(ModelError::ZeroKy))));
}

#[test]
fn edge_leak_is_reported() {
    let p = params(1.0);
    let yg = Grid1D::centered(256, 16.0).unwrap();
    let g = BoundaryData::from_fn(yg, BoundaryKind::G, gaussian(0.0, 4.0, 1.0)).unwrap();
    let sol = solve_halfspace(&g, &Grid1D::new(8, 0.0, 0.5).unwrap(), &p).unwrap();
    assert!(matches!(sol.warnings.as_slice(), [Warning::EdgeLeak { .. }]));
}
