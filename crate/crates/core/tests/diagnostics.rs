use num_complex::Complex64;
use oblique_paraxial::diagnostics::*;
use oblique_paraxial::model::*;
use oblique_paraxial::solvers::{solve_halfspace, solve_quadrant};
use oblique_paraxial::symbols::r_pm;
use oblique_paraxial::symbols::Sign;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn params(ky_sign: f64) -> PhysicalParams {
    PhysicalParams::new(0.1, FRAC_1_SQRT_2, ky_sign * FRAC_1_SQRT_2, 0.5).unwrap()
}

fn energy(nx: usize) -> EnergyReport {
    let yg = Grid1D::centered(1024, 128.0).unwrap();
    let xg = Grid1D::with_length(nx, 0.0, 64.0).unwrap();
    let uin = BoundaryData::from_fn(yg, BoundaryKind::UIn, gaussian(0.0, 2.0, 1.0)).unwrap();
    energy_balance_for_uin(&uin, &xg, &params(1.0)).unwrap()
}

#[test]
fn energy_identities_on_a_resolved_grid() {
    let r = energy(2048);
    println!("{r:?}");
    assert!(r.absorbed > 0.0 && r.outgoing > 0.0 && r.incoming > 0.0);
    assert!(r.residual1 <= 1e-3 && r.residual2 <= 1e-3);
    assert!(r.consistency_gap() <= 1e-10);
    assert!(r.tail <= MAX_TAIL_FRACTION * r.absorbed);
}

#[test]
fn energy_residual_is_the_x_trapezoid_error() {
    // y is spectrally resolved, so only dx matters; the trapezoid error of
    // e^{-ax} refines by 4(1 − (ah)²/80), just under 4
    let (coarse, fine) = (energy(1024), energy(2048));
    let ratio = coarse.residual1 / fine.residual1;
    println!("ratio {ratio}");
    assert!((3.9..4.0).contains(&ratio));
    assert!((coarse.residual2 / fine.residual2 - ratio).abs() < 1e-2);
}

fn gaussian_g(yg: Grid1D) -> BoundaryData {
    BoundaryData::from_fn(yg, BoundaryKind::G, gaussian(2.0, 1.0, 1.0)).unwrap()
}

#[test]
fn stability_bound_holds_and_is_grid_independent() {
    for p in [
        params(1.0),
        PhysicalParams::new(0.5, 0.6, -0.8, 0.05).unwrap(),
        PhysicalParams::from_angle(0.02, 0.3, 2.0).unwrap(),
    ] {
        let ratio = |ny: usize, nx: usize| {
            let yg = Grid1D::centered(ny, 128.0).unwrap();
            let g = gaussian_g(yg);
            let sol = solve_halfspace(&g, &Grid1D::with_length(nx, 0.0, 16.0).unwrap(), &p).unwrap();
            stability_ratio(&sol, &g, &p).unwrap()
        };
        let (a, b) = (ratio(1024, 64), ratio(2048, 128));
        println!("{p:?}: ratio {} bound {} margin {}", a.ratio, a.bound, a.margin());
        assert!(a.holds() && b.holds());
        assert!((a.ratio - b.ratio).abs() < 1e-3);
    }
}

#[test]
fn transparency_and_its_failure_for_negative_ky() {
    let yg = Grid1D::centered(2048, 128.0).unwrap();
    let xg = Grid1D::new(64, 0.0, 0.25).unwrap();
    let far = gaussian_g_plus(yg, 9.0, 1.0, 1.0).unwrap();
    let p = params(1.0);
    let t = transparency_error(&solve_quadrant(&far, &xg, &p).unwrap(), &solve_halfspace(&far, &xg, &p).unwrap()).unwrap();
    assert!(t <= 1e-8, "{t:e}");

    let near = gaussian_g_plus(yg, 2.0, 1.0, 1.0).unwrap();
    let p = params(-1.0);
    let t = transparency_error(&solve_quadrant(&near, &xg, &p).unwrap(), &solve_halfspace(&near, &xg, &p).unwrap()).unwrap();
    println!("ky < 0 transparency error {t:e}");
    assert!(t > 1e-6);

    let zero = BoundaryData::new(yg, vec![Complex64::new(0.0, 0.0); yg.len()], BoundaryKind::GPlus).unwrap();
    let t = transparency_error(&solve_quadrant(&zero, &xg, &p).unwrap(), &solve_halfspace(&zero, &xg, &p).unwrap()).unwrap();
    assert_eq!(t, 0.0);
}

#[test]
fn absorbing_error_decays_under_its_bound() {
    let yg = Grid1D::centered(2048, 128.0).unwrap();
    let h = gaussian_g_plus(yg, 9.0, 1.0, 1.0).unwrap();
    let table = absorbing_decay(&h, &[2.0, 4.0, 8.0, 16.0], &params(-1.0), &Grid1D::new(64, 0.0, 0.25).unwrap()).unwrap();
    for r in &table.rows {
        println!("A {} err {:e} bound {:e}", r.a, r.err, r.bound);
    }
    assert!(table.dominated(0.0));
    assert!(table.nonincreasing(1e-6));
    assert!(table.rows[3].err < table.rows[0].err);
}

fn paraxiality(p: &PhysicalParams) -> f64 {
    let g = gaussian_g(Grid1D::centered(2048, 128.0).unwrap());
    paraxiality_measure(&solve_halfspace(&g, &Grid1D::new(8, 0.0, 1.0).unwrap(), p).unwrap(), p)
}

#[test]
fn paraxiality_scales_with_epsilon_and_nu() {
    let p = params(1.0);
    let ratio = paraxiality(&p) / paraxiality(&p.rescaled(0.05, 0.25).unwrap());
    println!("halving (ε, ν): {ratio}");
    assert!((1.5..=2.5).contains(&ratio));

    let q = PhysicalParams::new(1e-4, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.5).unwrap();
    let nu_only = paraxiality(&q) / paraxiality(&q.rescaled(1e-4, 0.25).unwrap());
    println!("halving ν at ε = 1e-4: {nu_only}");
    assert!((1.9..=2.1).contains(&nu_only));
}

#[test]
fn hardy_support_of_the_trace() {
    let yg = Grid1D::centered(2048, 128.0).unwrap();
    let xg = Grid1D::new(8, 0.0, 1.0).unwrap();
    // width 0.5 keeps the cut at y = 0 at e^{-32}; width 1 leaves a jump whose
    // discrete leak is 2.8e-6
    let g = gaussian_g_plus(yg, 4.0, 0.5, 1.0).unwrap().with_kind(BoundaryKind::G).unwrap();
    let p = params(1.0);
    let leak = hardy_support_check(&solve_halfspace(&g, &xg, &p).unwrap().trace0, &p).unwrap();
    assert!(leak <= 1e-6, "{leak:e}");
    let contrast = support_leakage(&solve_halfspace(&g, &xg, &params(-1.0)).unwrap().trace0);
    println!("ky > 0 leakage {leak:e}, ky < 0 {contrast:e}");
    assert!(contrast > leak);
}

fn weighted_oracle(p: &PhysicalParams) -> f64 {
    // ĝ of the width-1 Gaussian centred at 2 in closed form, trapezoid in η
    let (lo, n) = (-40.0, 160_000);
    let h = 80.0 / n as f64;
    (0..=n)
        .map(|j| {
            let eta = lo + j as f64 * h;
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            let g2 = 2.0 * PI * (-eta * eta).exp();
            let r = r_pm(eta, Sign::Minus, p).unwrap();
            w * g2 * (1.0 + eta * eta) / r.re.abs()
        })
        .sum::<f64>()
        * h
        / (2.0 * PI)
}

#[test]
fn weighted_norm_matches_quadrature_and_blows_up_as_nu_vanishes() {
    let g = gaussian_g(Grid1D::centered(2048, 128.0).unwrap());
    let p = params(1.0);
    let got = weighted_spectrum_norms(&g, &p, 1.0, 0).unwrap();
    let want = weighted_oracle(&p);
    assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");

    let values: Vec<f64> = [0.5, 0.05, 5e-3, 5e-4]
        .iter()
        .map(|&nu| weighted_spectrum_norms(&g, &p.rescaled(0.1, nu).unwrap(), 1.0, 0).unwrap())
        .collect();
    println!("{values:?}");
    for w in values.windows(2) {
        assert!(w[1] > 5.0 * w[0]);
    }
}

#[test]
fn truncation_too_short_is_an_error() {
    let yg = Grid1D::centered(1024, 128.0).unwrap();
    let uin = BoundaryData::from_fn(yg, BoundaryKind::UIn, gaussian(0.0, 2.0, 1.0)).unwrap();
    let err = energy_balance_for_uin(&uin, &Grid1D::new(16, 0.0, 0.25).unwrap(), &params(1.0)).unwrap_err();
    match err {
        DiagnosticError::TruncationTooShort { tail_fraction } => assert!(tail_fraction > MAX_TAIL_FRACTION),
        e => panic!("{e}"),
    }
}
