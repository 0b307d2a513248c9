//! Complex symbols of the oblique advection-Schrödinger operator.
//!
//! With `S(η) = √(1 − 2εk_yη/k_x² + 2iνεk_y²/k_x²)` (principal branch):
//!
//! ```text
//! R±(iη) = i(kx/ky)η − i kx/(ε ky²) (1 ± S(η))       roots in Dx
//! A±(iξ) = i(ky/kx)ξ − i ky/(ε kx²) (1 ± T(ξ))       roots in Dy
//! M(η)   = 2 / (1 + S(η))                           entrance multiplier
//! K̂(η)   = −(R₋ − i(kx/ky)η)/(R₊ − R₋) = (1 − 1/S)/2
//! Ĝ(η)   = −(2ikx/(ε ky²)) ĝ/(R₊ − R₋)  = ĝ/S
//! ```
//!
//! where `T(ξ) = √(1 − 2εk_xξ/k_y² + 2iενk_x²/k_y²)`. Absorption `ν > 0`
//! keeps every root argument off the branch cut.

use crate::model::{ModelError, PhysicalParams, SpectralGrid};
use crate::spectral::Spectrum;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("square root argument {0} lies on the branch cut (-inf, 0]")]
    BranchCut(Complex64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which root of a factorized quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Square root with positive real part, defined off the closed negative real axis.
pub fn principal_sqrt(z: Complex64) -> Result<Complex64, SymbolError> {
    if z.im == 0.0 && z.re <= 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(SymbolError::BranchCut(z));
    }
    let r = z.norm();
    // stable half-angle form: the larger component first, the other by division
    let w = if z.re >= 0.0 {
        let a = (0.5 * (r + z.re)).sqrt();
        Complex64::new(a, z.im / (2.0 * a))
    } else {
        let b = (0.5 * (r - z.re)).sqrt().copysign(z.im);
        Complex64::new(z.im / (2.0 * b), b)
    };
    Ok(w)
}

/// `1 − 2εk_yη/k_x² + 2iνεk_y²/k_x²`, the argument of `S(η)`.
pub fn y_root_argument(eta: f64, p: &PhysicalParams) -> Complex64 {
    let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
    let kx2 = kx * kx;
    Complex64::new(1.0 - 2.0 * e * ky * eta / kx2, 2.0 * nu * e * ky * ky / kx2)
}

/// `1 − 2εk_xξ/k_y² + 2iενk_x²/k_y²`, the argument of `T(ξ)`.
pub fn x_root_argument(xi: f64, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    p.require_oblique()?;
    let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
    let ky2 = ky * ky;
    Ok(Complex64::new(1.0 - 2.0 * e * kx * xi / ky2, 2.0 * e * nu * kx * kx / ky2))
}

/// `S(η)`, the root appearing in the entrance multiplier.
pub fn entrance_root(eta: f64, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    principal_sqrt(y_root_argument(eta, p))
}

fn r_from_root(eta: f64, sign: Sign, s: Complex64, p: &PhysicalParams) -> Complex64 {
    let (e, kx, ky) = (p.epsilon(), p.kx(), p.ky());
    I * (kx / ky) * eta - I * (kx / (e * ky * ky)) * (1.0 + sign.value() * s)
}

/// `R±(iη)`, the roots of `P_ν(·, iη)` in the x-derivative.
pub fn r_pm(eta: f64, sign: Sign, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    p.require_oblique()?;
    Ok(r_from_root(eta, sign, entrance_root(eta, p)?, p))
}

/// `A±(iξ)`, the roots of `P_ν(iξ, ·)` in the y-derivative.
pub fn a_pm(xi: f64, sign: Sign, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    let t = principal_sqrt(x_root_argument(xi, p)?)?;
    let (e, kx, ky) = (p.epsilon(), p.kx(), p.ky());
    Ok(I * (ky / kx) * xi - I * (ky / (e * kx * kx)) * (1.0 + sign.value() * t))
}

/// `M(η) = 2/(1 + S(η))`: maps `F(g)` to the spectrum of the trace `u(0, ·)`.
pub fn entrance_multiplier(eta: f64, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    p.require_oblique()?;
    Ok(2.0 / (1.0 + entrance_root(eta, p)?))
}

/// The geometric constant `C = 2√(1 + k_x²/(ε|k_y|))` bounding
/// `(1+η²)^{1/4}|M(η)|` uniformly in `ν`.
pub fn stability_constant(p: &PhysicalParams) -> f64 {
    2.0 * (1.0 + p.kx() * p.kx() / (p.epsilon() * p.ky().abs())).sqrt()
}

/// `K̂(η) = −(R₋ − i(kx/ky)η)/(R₊ − R₋)`, evaluated from the roots.
pub fn k_hat(eta: f64, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    p.require_oblique()?;
    let rp = r_pm(eta, Sign::Plus, p)?;
    let rm = r_pm(eta, Sign::Minus, p)?;
    Ok(-(rm - I * (p.kx() / p.ky()) * eta) / (rp - rm))
}

/// `Ĝ(η) = −(2ikx/(ε ky²))·ĝ/(R₊ − R₋)` for one Fourier coefficient `ĝ`.
pub fn g_hat(gcoeff: Complex64, eta: f64, p: &PhysicalParams) -> Result<Complex64, SymbolError> {
    p.require_oblique()?;
    let rp = r_pm(eta, Sign::Plus, p)?;
    let rm = r_pm(eta, Sign::Minus, p)?;
    let (e, kx, ky) = (p.epsilon(), p.kx(), p.ky());
    Ok(-(2.0 * I * kx / (e * ky * ky)) * gcoeff / (rp - rm))
}

/// `P_ν(iξ, iη)`, the symbol of the full second-order operator.
pub fn characteristic_poly(xi: f64, eta: f64, p: &PhysicalParams) -> Complex64 {
    let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
    let dx = I * xi;
    let dy = I * eta;
    I * (kx * dx + ky * dy) + 0.5 * e * (ky * ky * dx * dx - 2.0 * kx * ky * dx * dy + kx * kx * dy * dy) + I * nu
}

/// Symbols evaluated once per `(params, grid)` and reused on every x-slice.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    params: PhysicalParams,
    grid: SpectralGrid,
    root: Vec<Complex64>,
    r_minus: Vec<Complex64>,
    r_plus: Vec<Complex64>,
    m_entrance: Vec<Complex64>,
    k_hat: Vec<Complex64>,
}

impl SymbolTable {
    pub fn new(params: PhysicalParams, grid: SpectralGrid) -> Result<Self, SymbolError> {
        params.require_oblique()?;
        let rows = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let eta = grid.frequency(k);
                let s = entrance_root(eta, &params)?;
                let rp = r_from_root(eta, Sign::Plus, s, &params);
                let rm = r_from_root(eta, Sign::Minus, s, &params);
                let kh = -(rm - I * (params.kx() / params.ky()) * eta) / (rp - rm);
                Ok((s, rm, rp, 2.0 / (1.0 + s), kh))
            })
            .collect::<Result<Vec<_>, SymbolError>>()?;
        let mut t = Self {
            params,
            grid,
            root: Vec::with_capacity(rows.len()),
            r_minus: Vec::with_capacity(rows.len()),
            r_plus: Vec::with_capacity(rows.len()),
            m_entrance: Vec::with_capacity(rows.len()),
            k_hat: Vec::with_capacity(rows.len()),
        };
        for (s, rm, rp, m, kh) in rows {
            t.root.push(s);
            t.r_minus.push(rm);
            t.r_plus.push(rp);
            t.m_entrance.push(m);
            t.k_hat.push(kh);
        }
        Ok(t)
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `S(η_j)`.
    pub fn root(&self) -> &[Complex64] {
        &self.root
    }

    pub fn r_minus(&self) -> &[Complex64] {
        &self.r_minus
    }

    pub fn r_plus(&self) -> &[Complex64] {
        &self.r_plus
    }

    pub fn m_entrance(&self) -> &[Complex64] {
        &self.m_entrance
    }

    pub fn k_hat(&self) -> &[Complex64] {
        &self.k_hat
    }

    /// `e^{R₋(iη_j)x}` for every bin.
    pub fn propagator(&self, x: f64) -> Vec<Complex64> {
        self.r_minus.iter().map(|r| (r * x).exp()).collect()
    }

    /// `Ĝ` for every bin of a boundary spectrum.
    pub fn g_hat(&self, g: &Spectrum) -> Vec<Complex64> {
        let (e, kx, ky) = (self.params.epsilon(), self.params.kx(), self.params.ky());
        let c = -(2.0 * I * kx / (e * ky * ky));
        g.coeffs()
            .iter()
            .zip(self.r_plus.iter().zip(&self.r_minus))
            .map(|(gc, (rp, rm))| c * gc / (rp - rm))
            .collect()
    }

    /// `sup_j |K̂(η_j)|`.
    pub fn k_hat_sup(&self) -> f64 {
        self.k_hat.iter().map(|k| k.norm()).fold(0.0, f64::max)
    }

    /// Smallest `|Re R₋|` over the bins where `weight` exceeds `cutoff·max(weight)`.
    pub fn slowest_decay(&self, weight: &[f64], cutoff: f64) -> f64 {
        let wmax = weight.iter().cloned().fold(0.0, f64::max);
        self.r_minus
            .iter()
            .zip(weight)
            .filter(|(_, w)| **w > cutoff * wmax)
            .map(|(r, _)| -r.re)
            .fold(f64::INFINITY, f64::min)
    }
}
