//! Numerical checks of the energy identities, the stability estimate, the
//! transparency and absorption properties of the `y = 0` condition, and the
//! a-posteriori paraxiality measure.
//!
//! The x-integrals over solved fields use the trapezoid rule on the slices;
//! y-integrals are plain sums over the periodic grid.

use crate::model::{BoundaryData, BoundaryKind, Grid1D, ModelError, PhysicalParams};
use crate::solvers::{g_from_uin, HalfSpaceSolution, Propagator, QuadrantSolution, SolverError};
use crate::spectral::{l2_norm_sq, Dft, SpectralError, Spectrum};
use crate::symbols::{stability_constant, SymbolError, SymbolTable};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest admissible tail energy past `xmax`, relative to the total.
pub const MAX_TAIL_FRACTION: f64 = 1e-4;

/// Target decay `e^{Re R₋·xmax}` of the slowest significant bin.
pub const XMAX_DECAY: f64 = 1e-4;

/// Bins with `|ĝ|` below this fraction of the peak are ignored when picking `xmax`.
pub const SIGNIFICANT_BIN: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticError {
    #[error("energy past xmax is {tail_fraction:.3e} of the total, above {MAX_TAIL_FRACTION:e}")]
    TruncationTooShort { tail_fraction: f64 },
    #[error("this check needs the opposite sign of k_y (got {ky})")]
    WrongSignKy { ky: f64 },
    #[error("solutions live on different grids")]
    GridMismatch,
    #[error("shift {0} is not a whole number of y-steps or pushes data off the grid")]
    ShiftOffGrid(f64),
    #[error("shifts must be increasing")]
    ShiftsNotIncreasing,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Both energy identities evaluated on a solved field, with `n = (−1, 0)`.
///
/// Identity 1: `absorbed + outgoing = k_x‖u₀‖² + incoming`.
/// Identity 2: `absorbed + k_x‖u₀‖² = −Im ∫ ū₀ (εD − 2ik_x) u^in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `∬ 2ν|u|²` over `[0, xmax] × ℝ`.
    pub absorbed: f64,
    /// `∫ (k_x/2)|(iεD − 2k_x)u₀/(2k_x)|²`.
    pub outgoing: f64,
    /// `∫ (k_x/2)|(iεD + 2k_x)u^in/(2k_x)|²`.
    pub incoming: f64,
    /// `∫ k_x|u₀|²`.
    pub trace_energy: f64,
    /// Continuous tail `∫_{xmax}^∞∬2ν|u|²`, not included in `absorbed`.
    pub tail: f64,
    pub xmax: f64,
    pub lhs1: f64,
    pub rhs1: f64,
    pub residual1: f64,
    pub lhs2: f64,
    pub rhs2: f64,
    pub residual2: f64,
}

impl EnergyReport {
    /// `|(lhs1 − rhs1) − (lhs2 − rhs2)|` relative to `rhs1`; zero up to
    /// round-off because the entrance condition holds exactly per bin.
    pub fn consistency_gap(&self) -> f64 {
        let gap = ((self.lhs1 - self.rhs1) - (self.lhs2 - self.rhs2)).abs();
        if self.rhs1 == 0.0 {
            gap
        } else {
            gap / self.rhs1
        }
    }
}

fn relative(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        (lhs - rhs).abs()
    } else {
        ((lhs - rhs) / rhs).abs()
    }
}

/// Trapezoid weights for the slices with `x ≤ xmax`.
fn trapezoid_weights(xgrid: &Grid1D, xmax: f64) -> Vec<f64> {
    let last = (0..xgrid.len())
        .take_while(|&i| xgrid.point(i) <= xmax + 1e-9 * xgrid.dx())
        .last()
        .unwrap_or(0);
    (0..=last)
        .map(|i| if i == 0 || i == last { 0.5 * xgrid.dx() } else { xgrid.dx() })
        .collect()
}

/// `ln(1/XMAX_DECAY)/min|Re R₋|` over the bins where `|ĝ|` is significant.
pub fn truncation_length(symbols: &SymbolTable, g_spectrum: &Spectrum) -> f64 {
    let weight: Vec<f64> = g_spectrum.coeffs().iter().map(|c| c.norm()).collect();
    let rate = symbols.slowest_decay(&weight, SIGNIFICANT_BIN);
    if rate.is_finite() {
        (1.0 / XMAX_DECAY).ln() / rate
    } else {
        0.0
    }
}

/// Symbol of `iεD = iεk_y(k_x∂y − k_y∂x)` on the entrance, `∂x ↦ R₋`.
fn ieps_d(eta: f64, r: Complex64, p: &PhysicalParams) -> Complex64 {
    I * p.epsilon() * p.ky() * (p.kx() * I * eta - p.ky() * r)
}

pub fn energy_balance(sol: &HalfSpaceSolution, uin: &BoundaryData, p: &PhysicalParams, xmax: f64) -> Result<EnergyReport, DiagnosticError> {
    if !uin.grid().approx_eq(sol.field.ygrid()) {
        return Err(DiagnosticError::GridMismatch);
    }
    let ygrid = *sol.field.ygrid();
    let dy = ygrid.dx();
    let kx = p.kx();
    let dft = Dft::new(&ygrid);
    let weights = trapezoid_weights(sol.field.xgrid(), xmax);
    let x_end = sol.field.xgrid().point(weights.len() - 1);

    // per-slice terms in parallel, summed in order so the result does not
    // depend on the thread count
    let per_slice: Vec<f64> = weights
        .par_iter()
        .enumerate()
        .map(|(ix, w)| w * l2_norm_sq(sol.field.slice(ix), dy))
        .collect();
    let absorbed = 2.0 * p.nu() * per_slice.iter().sum::<f64>();

    // ∫_{x_end}^∞ 2ν|û|² per bin, summed with Parseval
    let spectral_sum = |s: &[Complex64]| s.iter().map(|c| c.norm_sqr()).sum::<f64>() * sol.symbols.grid().deta() / (2.0 * PI);
    let tail_density: Vec<Complex64> = sol
        .spectrum_at(x_end)
        .iter()
        .zip(sol.symbols.r_minus())
        .map(|(c, r)| c * (p.nu() / -r.re).sqrt())
        .collect();
    let tail = spectral_sum(&tail_density);
    let total = absorbed + tail;
    if total > 0.0 && tail / total > MAX_TAIL_FRACTION {
        return Err(DiagnosticError::TruncationTooShort { tail_fraction: tail / total });
    }

    let u0 = sol.field.slice(0);
    let out_spec: Vec<Complex64> = sol
        .trace_spectrum
        .iter()
        .zip(sol.symbols.r_minus())
        .map(|((eta, c), r)| c * (ieps_d(eta, *r, p) - 2.0 * kx) / (2.0 * kx))
        .collect();
    let out_line = dft.inverse(&Spectrum::new(*sol.trace_spectrum.grid(), out_spec)?);
    let outgoing = 0.5 * kx * l2_norm_sq(&out_line, dy);

    // D u^in = k_y k_x ∂y u^in since u^in does not depend on x
    let uin_spec = dft.forward(uin.samples())?;
    let e_ky_kx = p.epsilon() * p.ky() * kx;
    let plus: Vec<Complex64> = uin_spec
        .iter()
        .map(|(eta, c)| c * (I * e_ky_kx * I * eta + 2.0 * kx))
        .collect();
    let plus_line = dft.inverse(&Spectrum::new(*uin_spec.grid(), plus)?);
    let incoming = 0.5 * kx * l2_norm_sq(&plus_line, dy) / (4.0 * kx * kx);
    // (εD − 2ik_x)u^in = −i(iεD + 2k_x)u^in
    let cross: Complex64 = u0.iter().zip(&plus_line).map(|(u, v)| u.conj() * (-I * v)).sum::<Complex64>() * dy;

    let trace_energy = kx * l2_norm_sq(u0, dy);
    let (lhs1, rhs1) = (absorbed + outgoing, trace_energy + incoming);
    let (lhs2, rhs2) = (absorbed + trace_energy, -cross.im);
    Ok(EnergyReport {
        absorbed,
        outgoing,
        incoming,
        trace_energy,
        tail,
        xmax: x_end,
        lhs1,
        rhs1,
        residual1: relative(lhs1, rhs1),
        lhs2,
        rhs2,
        residual2: relative(lhs2, rhs2),
    })
}

/// Solves the half-space problem for an incoming wave and evaluates both
/// identities up to [`truncation_length`].
pub fn energy_balance_for_uin(uin: &BoundaryData, xgrid: &Grid1D, p: &PhysicalParams) -> Result<EnergyReport, DiagnosticError> {
    let g = g_from_uin(uin, p)?;
    let sol = Propagator::new(p, uin.grid())?.halfspace(&g, xgrid)?;
    let xmax = truncation_length(&sol.symbols, &sol.g_spectrum);
    energy_balance(&sol, uin, p, xmax)
}

/// Measured stability ratio and the constant `2√(1 + k_x²/(ε|k_y|))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub ratio: f64,
    pub bound: f64,
}

impl StabilityReport {
    pub fn holds(&self) -> bool {
        self.ratio <= self.bound
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.ratio
    }
}

/// `sup_x ‖û(x,·)‖ / ‖ĝ(1+η²)^{-1/4}‖` with both norms as discrete sums over the bins.
pub fn stability_ratio(sol: &HalfSpaceSolution, g: &BoundaryData, p: &PhysicalParams) -> Result<StabilityReport, DiagnosticError> {
    let bound = stability_constant(p);
    let dft = Dft::new(g.grid());
    let gs = dft.forward(g.samples())?;
    let denom: f64 = gs.iter().map(|(eta, c)| c.norm_sqr() / (1.0 + eta * eta).sqrt()).sum::<f64>() * gs.grid().deta();
    if denom == 0.0 {
        return Ok(StabilityReport { ratio: 0.0, bound });
    }
    let field_dft = Dft::new(sol.field.ygrid());
    let sup = sol
        .field
        .slices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|s| field_dft.forward(s).map(|sp| sp.l2_norm_sq()))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let num = sup * gs.grid().deta();
    Ok(StabilityReport {
        ratio: (num / denom).sqrt(),
        bound,
    })
}

fn half_line_norm(line: &[Complex64], grid: &Grid1D) -> f64 {
    let s: f64 = line
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.is_nonnegative(*i))
        .map(|(_, v)| v.norm_sqr())
        .sum();
    (s * grid.dx()).sqrt()
}

/// `max_x ‖(U − u)(x,·)‖_{L²(y≥0)} / max_x ‖u(x,·)‖_{L²(y≥0)}`.
pub fn transparency_error(quad: &QuadrantSolution, half: &HalfSpaceSolution) -> Result<f64, DiagnosticError> {
    let (qf, hf) = (&quad.field, &half.field);
    if !qf.xgrid().approx_eq(hf.xgrid()) || !qf.ygrid().approx_eq(hf.ygrid()) {
        return Err(DiagnosticError::GridMismatch);
    }
    let ygrid = *hf.ygrid();
    let (diff, scale) = (0..hf.nx())
        .into_par_iter()
        .map(|ix| {
            let d: Vec<Complex64> = qf.slice(ix).iter().zip(hf.slice(ix)).map(|(a, b)| a - b).collect();
            (half_line_norm(&d, &ygrid), half_line_norm(hf.slice(ix), &ygrid))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub a: f64,
    pub err: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    /// `err ≤ bound·(1 + tol)` on every row.
    pub fn dominated(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.err <= r.bound * (1.0 + tol))
    }

    /// `err(A_{i+1}) ≤ err(A_i)·(1 + tol)`.
    pub fn nonincreasing(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].err <= w[0].err * (1.0 + tol))
    }
}

fn shift_steps(a: f64, grid: &Grid1D) -> Result<usize, DiagnosticError> {
    let k = (a / grid.dx()).round();
    if k < 0.0 || (k * grid.dx() - a).abs() > 1e-9 * grid.dx() {
        return Err(DiagnosticError::ShiftOffGrid(a));
    }
    Ok(k as usize)
}

/// For each `A`, compares the half-space and quadrant solutions for
/// `g^A(y) = h(y − A)` on `y ≥ 0` and bounds the difference by
/// `sup|K̂|·‖H·1_{y<−A}‖` with `H = F⁻¹(M·F(h))`, so that `u₀^A = H(· − A)`.
///
/// Shifts must be whole multiples of `dy`; `H(· − A)` is then an exact
/// circular shift of `H` on the grid.
pub fn absorbing_decay(h: &BoundaryData, shifts: &[f64], p: &PhysicalParams, xgrid: &Grid1D) -> Result<DecayTable, DiagnosticError> {
    if p.ky() >= 0.0 {
        return Err(DiagnosticError::WrongSignKy { ky: p.ky() });
    }
    if shifts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DiagnosticError::ShiftsNotIncreasing);
    }
    let h = h.with_kind(BoundaryKind::GPlus)?;
    let ygrid = *h.grid();
    let n = ygrid.len();
    let prop = Propagator::new(p, &ygrid)?;
    let big_h = prop.dft().inverse(&prop.dft().forward(h.samples())?.scaled_by(prop.symbols().m_entrance()));
    let c_k = prop.symbols().k_hat_sup();

    let rows = shifts
        .par_iter()
        .map(|&a| -> Result<DecayRow, DiagnosticError> {
            let k = shift_steps(a, &ygrid)?;
            if h.samples()[n.saturating_sub(k)..].iter().any(|v| v.norm() != 0.0) {
                return Err(DiagnosticError::ShiftOffGrid(a));
            }
            let shifted: Vec<Complex64> = (0..n).map(|i| if i >= k { h.samples()[i - k] } else { Complex64::new(0.0, 0.0) }).collect();
            let ga = BoundaryData::new(ygrid, shifted, BoundaryKind::GPlus)?;
            let half = prop.halfspace(&ga, xgrid)?;
            let quad = prop.quadrant(&ga, xgrid)?;
            let err = (0..xgrid.len())
                .map(|ix| {
                    let d: Vec<Complex64> = quad.field.slice(ix).iter().zip(half.field.slice(ix)).map(|(a, b)| a - b).collect();
                    half_line_norm(&d, &ygrid)
                })
                .fold(0.0, f64::max);
            let below: f64 = (0..n)
                .filter(|&i| !ygrid.is_nonnegative(i))
                .map(|i| big_h[(i + n - k % n) % n].norm_sqr())
                .sum();
            Ok(DecayRow {
                a,
                err,
                bound: c_k * (below * ygrid.dx()).sqrt(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DecayTable { rows })
}

/// `‖k·∇u‖_{L²} / ‖u‖_{L²}` over `ℝ₊ × ℝ`, with `k·∇ ↦ k_xR₋ + ik_yη` and the
/// x-integral of each bin done in closed form.
pub fn paraxiality_measure(sol: &HalfSpaceSolution, p: &PhysicalParams) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((eta, c), r) in sol.trace_spectrum.iter().zip(sol.symbols.r_minus()) {
        let w = c.norm_sqr() / (-2.0 * r.re);
        num += w * (p.kx() * r + I * p.ky() * eta).norm_sqr();
        den += w;
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// `‖trace·1_{y<0}‖ / ‖trace‖` with no condition on `k_y`.
pub fn support_leakage(trace: &BoundaryData) -> f64 {
    let grid = trace.grid();
    let (mut below, mut total) = (0.0, 0.0);
    for (i, v) in trace.samples().iter().enumerate() {
        total += v.norm_sqr();
        if !grid.is_nonnegative(i) {
            below += v.norm_sqr();
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (below / total).sqrt()
    }
}

/// [`support_leakage`] of a half-space trace when `k_y > 0`, where data
/// supported in `y > 0` must give a trace supported in `y ≥ 0`.
pub fn hardy_support_check(trace: &BoundaryData, p: &PhysicalParams) -> Result<f64, DiagnosticError> {
    if p.ky() <= 0.0 {
        return Err(DiagnosticError::WrongSignKy { ky: p.ky() });
    }
    Ok(support_leakage(trace))
}

/// `(1/2π) Σ_j |ĝ_j|² (1+η_j²)^s |R₋(iη_j)|^{2m} / |Re R₋(iη_j)| Δη`.
pub fn weighted_spectrum_norms(g: &BoundaryData, p: &PhysicalParams, s: f64, m: u32) -> Result<f64, DiagnosticError> {
    let dft = Dft::new(g.grid());
    let gs = dft.forward(g.samples())?;
    let symbols = SymbolTable::new(*p, *gs.grid())?;
    let sum: f64 = gs
        .iter()
        .zip(symbols.r_minus())
        .map(|((eta, c), r)| c.norm_sqr() * (1.0 + eta * eta).powf(s) * r.norm().powi(2 * m as i32) / r.re.abs())
        .sum();
    Ok(sum * gs.grid().deta() / (2.0 * PI))
}
