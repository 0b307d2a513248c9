//! Exact half-space solution and the quadrant solution under the
//! transparent/absorbing condition on `y = 0`.
//!
//! Both solvers work slice by slice in x: the y-spectrum of every slice is
//! the entrance spectrum times `e^{R₋(iη)x}`, so slices are independent and
//! computed in parallel without any cross-slice reduction.

use crate::model::{BoundaryData, BoundaryKind, ComplexField2D, Grid1D, ModelError, PhysicalParams};
use crate::spectral::{edge_leak, l2_norm_sq, Dft, SpectralError, Spectrum};
use crate::symbols::{SymbolError, SymbolTable};
use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("x-grid must start at x = 0, starts at {0}")]
    XGridOrigin(f64),
    #[error("boundary data of kind {0:?} cannot be used here")]
    WrongKind(BoundaryKind),
    #[error("boundary data lives on a different y-grid than the solver")]
    GridMismatch,
}

/// Non-fatal conditions found while solving.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Boundary data does not decay at the periodic y-edges; `ratio` is
    /// the edge magnitude over the peak magnitude.
    EdgeLeak { ratio: f64 },
}

fn check_edges(samples: &[Complex64], warnings: &mut Vec<Warning>) {
    if let Some(ratio) = edge_leak(samples) {
        warn!("boundary data reaches the y-grid edge (edge/max = {ratio:.3e}); periodic wrap-around will pollute the solution");
        warnings.push(Warning::EdgeLeak { ratio });
    }
}

/// Solution of the half-space problem on `x ≥ 0, y ∈ ℝ`.
#[derive(Debug, Clone)]
pub struct HalfSpaceSolution {
    pub field: ComplexField2D,
    /// `u₀(y) = u(0, y)`.
    pub trace0: BoundaryData,
    /// `F(g)` of the entrance datum.
    pub g_spectrum: Spectrum,
    /// `F(u₀) = M·F(g)`.
    pub trace_spectrum: Spectrum,
    pub symbols: SymbolTable,
    pub warnings: Vec<Warning>,
}

impl HalfSpaceSolution {
    /// `F_y(u)(x, ·)` at an arbitrary `x ≥ 0`.
    pub fn spectrum_at(&self, x: f64) -> Vec<Complex64> {
        self.trace_spectrum
            .coeffs()
            .iter()
            .zip(self.symbols.r_minus())
            .map(|(c, r)| c * (r * x).exp())
            .collect()
    }

    pub fn params(&self) -> &PhysicalParams {
        self.symbols.params()
    }
}

/// Solution of the quadrant problem; `field` holds `U·1_{y≥0}` on the full
/// y-grid used for the transforms.
#[derive(Debug, Clone)]
pub struct QuadrantSolution {
    pub field: ComplexField2D,
    /// `U₀(y) = U(0, y)` for `y ≥ 0`, zero below.
    pub trace0: Vec<Complex64>,
    /// `K̂·F(u₀·1_{y≥0}) + Ĝ`: the spectrum propagated by `e^{R₋x}`.
    pub base_spectrum: Spectrum,
    pub symbols: SymbolTable,
    pub warnings: Vec<Warning>,
}

impl QuadrantSolution {
    pub fn params(&self) -> &PhysicalParams {
        self.symbols.params()
    }
}

/// Transform plans and symbol table for one `(params, y-grid)` pair,
/// shared across any number of solves.
#[derive(Debug, Clone)]
pub struct Propagator {
    dft: Dft,
    symbols: SymbolTable,
}

impl Propagator {
    pub fn new(p: &PhysicalParams, ygrid: &Grid1D) -> Result<Self, SolverError> {
        p.require_oblique()?;
        let dft = Dft::new(ygrid);
        let symbols = SymbolTable::new(*p, *dft.spectral_grid())?;
        Ok(Self { dft, symbols })
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    fn check_grid(&self, data: &BoundaryData) -> Result<(), SolverError> {
        if data.grid().approx_eq(self.dft.grid()) {
            Ok(())
        } else {
            Err(SolverError::GridMismatch)
        }
    }

    /// Slices `inverse(base · e^{R₋x})` for every x of the grid, optionally
    /// restricted to `y ≥ 0`.
    fn propagate(&self, base: &Spectrum, xgrid: &Grid1D, restrict: bool) -> Result<ComplexField2D, SolverError> {
        let ygrid = *self.dft.grid();
        let slices: Vec<Vec<Complex64>> = (0..xgrid.len())
            .into_par_iter()
            .map(|ix| {
                let x = xgrid.point(ix);
                let s = base.scaled_by(&self.symbols.propagator(x));
                let mut line = self.dft.inverse(&s);
                if restrict {
                    restrict_to_half_line(&mut line, &ygrid);
                }
                line
            })
            .collect();
        Ok(ComplexField2D::from_slices(*xgrid, ygrid, slices)?)
    }

    pub fn halfspace(&self, g: &BoundaryData, xgrid: &Grid1D) -> Result<HalfSpaceSolution, SolverError> {
        if !matches!(g.kind(), BoundaryKind::G | BoundaryKind::GPlus) {
            return Err(SolverError::WrongKind(g.kind()));
        }
        self.check_grid(g)?;
        check_x_origin(xgrid)?;
        let mut warnings = Vec::new();
        check_edges(g.samples(), &mut warnings);

        let g_spectrum = self.dft.forward(g.samples())?;
        let trace_spectrum = g_spectrum.scaled_by(self.symbols.m_entrance());
        let field = self.propagate(&trace_spectrum, xgrid, false)?;
        let trace0 = BoundaryData::new(*g.grid(), field.slice(0).to_vec(), BoundaryKind::Trace)?;
        Ok(HalfSpaceSolution {
            field,
            trace0,
            g_spectrum,
            trace_spectrum,
            symbols: self.symbols.clone(),
            warnings,
        })
    }

    pub fn quadrant(&self, gp: &BoundaryData, xgrid: &Grid1D) -> Result<QuadrantSolution, SolverError> {
        if !matches!(gp.kind(), BoundaryKind::G | BoundaryKind::GPlus) {
            return Err(SolverError::WrongKind(gp.kind()));
        }
        self.check_grid(gp)?;
        check_x_origin(xgrid)?;
        // re-checks the y > 0 support whatever the declared kind
        let g = gp.with_kind(BoundaryKind::GPlus)?.extended_by_zero();
        let mut warnings = Vec::new();
        check_edges(g.samples(), &mut warnings);

        let g_spectrum = self.dft.forward(g.samples())?;
        let trace_spectrum = g_spectrum.scaled_by(self.symbols.m_entrance());
        let mut truncated = self.dft.inverse(&trace_spectrum);
        restrict_to_half_line(&mut truncated, self.dft.grid());
        let w_spectrum = self.dft.forward(&truncated)?;
        let base = self.base_spectrum(&w_spectrum, &g_spectrum);

        let field = self.propagate(&base, xgrid, true)?;
        let trace0 = field.slice(0).to_vec();
        Ok(QuadrantSolution {
            field,
            trace0,
            base_spectrum: base,
            symbols: self.symbols.clone(),
            warnings,
        })
    }

    /// `K̂·F(w) + Ĝ(F(g))`.
    fn base_spectrum(&self, w: &Spectrum, g: &Spectrum) -> Spectrum {
        let gh = self.symbols.g_hat(g);
        let coeffs = w
            .coeffs()
            .iter()
            .zip(self.symbols.k_hat())
            .zip(&gh)
            .map(|((wc, k), gc)| k * wc + gc)
            .collect();
        Spectrum::new(*w.grid(), coeffs).expect("same grid")
    }
}

fn check_x_origin(xgrid: &Grid1D) -> Result<(), SolverError> {
    if xgrid.x0() != 0.0 {
        return Err(SolverError::XGridOrigin(xgrid.x0()));
    }
    Ok(())
}

/// Sharp cutoff `·1_{y≥0}`; the grid point at `y = 0` is kept.
pub fn restrict_to_half_line(line: &mut [Complex64], grid: &Grid1D) {
    for (i, v) in line.iter_mut().enumerate() {
        if !grid.is_nonnegative(i) {
            *v = ZERO;
        }
    }
}

/// Converts an incoming amplitude `u^in(y)` into the entrance datum
/// `g = u^in + (iεk_y/2)∂_y u^in` (the incoming wave does not depend on x).
pub fn g_from_uin(uin: &BoundaryData, p: &PhysicalParams) -> Result<BoundaryData, SolverError> {
    if uin.kind() != BoundaryKind::UIn {
        return Err(SolverError::WrongKind(uin.kind()));
    }
    let dft = Dft::new(uin.grid());
    let s = dft.forward(uin.samples())?;
    let half_eps_ky = 0.5 * p.epsilon() * p.ky();
    let coeffs = s.iter().map(|(eta, c)| c * (1.0 - half_eps_ky * eta)).collect();
    let g = dft.inverse(&Spectrum::new(*s.grid(), coeffs)?);
    Ok(BoundaryData::new(*uin.grid(), g, BoundaryKind::G)?)
}

pub fn solve_halfspace(g: &BoundaryData, xgrid: &Grid1D, p: &PhysicalParams) -> Result<HalfSpaceSolution, SolverError> {
    Propagator::new(p, g.grid())?.halfspace(g, xgrid)
}

pub fn solve_quadrant(gp: &BoundaryData, xgrid: &Grid1D, p: &PhysicalParams) -> Result<QuadrantSolution, SolverError> {
    Propagator::new(p, gp.grid())?.quadrant(gp, xgrid)
}

/// Discrete L² norm over `y ≥ 0` of `U₀ − F⁻¹(K̂·F(U₀·1_{y≥0}) + Ĝ)`.
pub fn trace_equation_residual(sol: &QuadrantSolution, gp: &BoundaryData, p: &PhysicalParams) -> Result<f64, SolverError> {
    let prop = Propagator::new(p, gp.grid())?;
    let ygrid = *gp.grid();
    let mut u0 = sol.trace0.clone();
    restrict_to_half_line(&mut u0, &ygrid);
    let w = prop.dft.forward(&u0)?;
    let g = prop.dft.forward(gp.samples())?;
    let mut rhs = prop.dft.inverse(&prop.base_spectrum(&w, &g));
    restrict_to_half_line(&mut rhs, &ygrid);
    let diff: Vec<Complex64> = u0.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    Ok(l2_norm_sq(&diff, ygrid.dx()).sqrt())
}

/// Relative residual of the entrance condition
/// `iεk_y(k_x∂_y − k_y∂_x)U + 2k_x U = 2k_x g₊` on `y > 0`, with both
/// derivatives at `x = 0` taken spectrally.
pub fn quadrant_entrance_residual(sol: &QuadrantSolution, gp: &BoundaryData) -> Result<f64, SolverError> {
    let p = sol.params();
    let (e, kx, ky) = (p.epsilon(), p.kx(), p.ky());
    let grid = *gp.grid();
    let dft = Dft::new(&grid);
    let base = &sol.base_spectrum;
    let coeffs = base
        .iter()
        .zip(sol.symbols.r_minus())
        .map(|((eta, c), r)| (I * e * ky * (kx * I * eta - ky * r) + 2.0 * kx) * c)
        .collect();
    let lhs = dft.inverse(&Spectrum::new(*base.grid(), coeffs)?);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (l, g)) in lhs.iter().zip(gp.samples()).enumerate() {
        if grid.point(i) > 1e-9 * grid.dx() {
            num += (l - 2.0 * kx * g).norm_sqr();
            den += (2.0 * kx * g).norm_sqr();
        }
    }
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}

/// Residual of `(∂x − R₋(iη))F_y(u) = 0` with the x-derivative taken by
/// centered differences of the slice spectra; max over interior slices,
/// relative to the largest slice spectrum.
pub fn spectral_ode_residual(sol: &HalfSpaceSolution) -> Result<f64, SolverError> {
    let dft = Dft::new(sol.field.ygrid());
    let dx = sol.field.xgrid().dx();
    let spectra = sol
        .field
        .slices()
        .map(|s| dft.forward(s))
        .collect::<Result<Vec<_>, _>>()?;
    let scale = spectra.iter().map(|s| s.l2_norm_sq().sqrt()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let r = sol.symbols.r_minus();
    let worst = (1..spectra.len() - 1)
        .map(|ix| {
            let d: Vec<Complex64> = (0..r.len())
                .map(|k| {
                    (spectra[ix + 1].coeffs()[k] - spectra[ix - 1].coeffs()[k]) / (2.0 * dx) - r[k] * spectra[ix].coeffs()[k]
                })
                .collect();
            Spectrum::new(*spectra[ix].grid(), d).unwrap().l2_norm_sq().sqrt()
        })
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Residual of `i(k_x∂x + k_y∂y)u + (ε/2)(k_x²∂yy − 2k_xk_y∂xy + k_y²∂xx)u + iνu`
/// on interior slices: spectral in y, centered differences in x. Returns the
/// max slice L² norm of the residual over the max slice L² norm of `u`.
pub fn pde_residual(field: &ComplexField2D, p: &PhysicalParams) -> Result<f64, SolverError> {
    let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
    let ygrid = *field.ygrid();
    let dft = Dft::new(&ygrid);
    let dx = field.xgrid().dx();
    let nx = field.nx();
    if nx < 3 {
        return Ok(0.0);
    }
    let scale = field
        .slices()
        .map(|s| l2_norm_sq(s, ygrid.dx()).sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = (1..nx - 1)
        .into_par_iter()
        .map(|ix| -> Result<f64, SolverError> {
            let (um, u, up) = (field.slice(ix - 1), field.slice(ix), field.slice(ix + 1));
            let ux: Vec<Complex64> = up.iter().zip(um).map(|(a, b)| (a - b) / (2.0 * dx)).collect();
            let uxx: Vec<Complex64> = (0..u.len()).map(|k| (up[k] - 2.0 * u[k] + um[k]) / (dx * dx)).collect();
            let su = dft.forward(u)?;
            let sux = dft.forward(&ux)?;
            // spectral y-derivatives: ∂y ↦ iη
            let uy = dft.inverse(&crate::spectral::apply_multiplier(&su, |eta| I * eta)?);
            let uyy = dft.inverse(&crate::spectral::apply_multiplier(&su, |eta| Complex64::new(-eta * eta, 0.0))?);
            let uxy = dft.inverse(&crate::spectral::apply_multiplier(&sux, |eta| I * eta)?);
            let res: Vec<Complex64> = (0..u.len())
                .map(|k| {
                    I * (kx * ux[k] + ky * uy[k])
                        + 0.5 * e * (kx * kx * uyy[k] - 2.0 * kx * ky * uxy[k] + ky * ky * uxx[k])
                        + I * nu * u[k]
                })
                .collect();
            Ok(l2_norm_sq(&res, ygrid.dx()).sqrt())
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst / scale)
}
