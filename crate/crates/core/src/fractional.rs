//! Half-order derivatives of signals supported in `ℝ₊`.
//!
//! Two independent formulations are provided for each operator:
//!
//! * convolution: `(d/dx)^{1/2} f = d/dx (Y_{-1/2} ⋆ f)` with
//!   `Y_a(x) = x₊^a/Γ(1+a)`, the Abel integral done by product integration
//!   (exact moments of `1/√(x−s)` against piecewise-linear data) and the
//!   outer derivative by centered differences;
//! * spectral: multiplication of `F(f)` by `√(iξ) = e^{i·sign(ξ)π/4}√|ξ|` on
//!   a line zero-padded to twice its length.
//!
//! The same pair is used for `√(−k_y² − 2iεk_x∂x − 2iενk_x²)`, the operator
//! of the `y = 0` boundary condition.

use crate::model::{Grid1D, ModelError, PhysicalParams};
use crate::spectral::{edge_leak, Dft, SpectralError, Spectrum};
use crate::symbols::principal_sqrt;
use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("Y_a is only defined pointwise for a > -1, got a = {0}")]
    PointwiseUndefined(f64),
    #[error("half-line signals start at x = 0, grid starts at {0}")]
    NotHalfLine(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Samples on `[0, L)`; the signal is zero for `x < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineSignal {
    grid: Grid1D,
    samples: Vec<Complex64>,
}

impl HalfLineSignal {
    pub fn new(grid: Grid1D, samples: Vec<Complex64>) -> Result<Self, FracError> {
        if grid.x0() != 0.0 {
            return Err(FracError::NotHalfLine(grid.x0()));
        }
        if samples.len() != grid.len() {
            return Err(ModelError::FieldShape {
                expected: grid.len(),
                got: samples.len(),
            }
            .into());
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self, FracError> {
        let samples = grid.points().map(f).collect();
        Self::new(grid, samples)
    }

    pub fn from_real_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self, FracError> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Sample value at `x`, zero on `x < 0` and beyond the grid.
    pub fn value_at(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            return ZERO;
        }
        self.grid.index_of(x).map_or(ZERO, |i| self.samples[i])
    }

    /// Discrete L² norm `(Σ|f_k|² dx)^{1/2}` over the indices in `range`.
    pub fn l2_norm(&self, range: std::ops::Range<usize>) -> f64 {
        (self.samples[range].iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().enumerate().map(|(i, v)| f(i, *v)).collect(),
        }
    }
}

/// Relative L² distance `‖a − b‖/‖b‖` restricted to the indices in `range`.
pub fn relative_l2(a: &HalfLineSignal, b: &HalfLineSignal, range: std::ops::Range<usize>) -> f64 {
    let num: f64 = range.clone().map(|i| (a.samples[i] - b.samples[i]).norm_sqr()).sum();
    let den: f64 = range.map(|i| b.samples[i].norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// `Y_a(x) = x₊^a / Γ(1+a)`.
pub fn y_a(x: f64, a: f64) -> Result<f64, FracError> {
    if !(a > -1.0) {
        return Err(FracError::PointwiseUndefined(a));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(x.powf(a) / gamma(1.0 + a))
}

/// Product-integration weights for `∫ u^{-1/2} φ(u) du` over cell
/// `[m−1, m]` with `φ` linear: `(far, near)` multiply `φ(m)` and `φ(m−1)`.
fn abel_weights(m: usize) -> (f64, f64) {
    let (s, t) = ((m as f64).sqrt(), (m as f64 - 1.0).sqrt());
    // ∫ u^{-1/2}(u − t²) du and ∫ u^{-1/2}(s² − u) du, factored to avoid cancellation
    let q = (2.0 / 3.0) / ((s + t) * (s + t));
    ((s + 2.0 * t) * q, (2.0 * s + t) * q)
}

/// `(Y_{-1/2} ⋆ f)(x_n) = (1/√π) ∫₀^{x_n} f(s)/√(x_n − s) ds` at every grid point.
pub fn abel_integral(samples: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = samples.len();
    let weights: Vec<(f64, f64)> = (1..n.max(1)).map(abel_weights).collect();
    let scale = (dx / PI).sqrt();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = ZERO;
            // cell [s_{k-m}, s_{k-m+1}] sits at distance [m-1, m]·dx from x_k
            for m in 1..=k {
                let (far, near) = weights[m - 1];
                acc += samples[k - m] * far + samples[k - m + 1] * near;
            }
            acc * scale
        })
        .collect()
}

/// Centered differences inside, second-order one-sided at both ends.
fn differentiate(h: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = h.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dx)
            } else if i == n - 1 {
                (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2.0 * dx)
            } else {
                (h[i + 1] - h[i - 1]) / (2.0 * dx)
            }
        })
        .collect()
}

/// `(d/dx)^{1/2} f` through the Abel integral.
pub fn half_derivative_abel(f: &HalfLineSignal) -> HalfLineSignal {
    let dx = f.grid.dx();
    let h = abel_integral(&f.samples, dx);
    HalfLineSignal {
        grid: f.grid,
        samples: differentiate(&h, dx),
    }
}

/// `√(iξ)` on the principal branch; the `ξ = 0` bin is set to zero.
pub fn sqrt_i_xi(xi: f64) -> Complex64 {
    if xi == 0.0 {
        return ZERO;
    }
    Complex64::from_polar(xi.abs().sqrt(), FRAC_PI_4.copysign(xi))
}

/// A half-line signal zero-padded to twice its length and transformed.
///
/// Multipliers compose exactly here; truncating back to `[0, L)` between
/// two operators discards the tail the first one produced past `L`.
#[derive(Debug, Clone)]
pub struct PaddedLine {
    grid: Grid1D,
    dft: Dft,
    spectrum: Spectrum,
}

impl PaddedLine {
    pub fn new(f: &HalfLineSignal) -> Result<Self, FracError> {
        if let Some(ratio) = edge_leak(&f.samples) {
            warn!("half-line signal does not decay at the far edge (edge/max = {ratio:.3e})");
        }
        let n = f.grid.len();
        let padded_grid = Grid1D::new(2 * n, 0.0, f.grid.dx())?;
        let dft = Dft::new(&padded_grid);
        let mut data = f.samples.clone();
        data.resize(2 * n, ZERO);
        let spectrum = dft.forward(&data)?;
        Ok(Self {
            grid: f.grid,
            dft,
            spectrum,
        })
    }

    pub fn apply(&self, m: impl Fn(f64) -> Complex64) -> Result<Self, FracError> {
        Ok(Self {
            spectrum: crate::spectral::apply_multiplier(&self.spectrum, m)?,
            ..self.clone()
        })
    }

    pub fn half_derivative(&self) -> Self {
        self.apply(sqrt_i_xi).expect("finite multiplier")
    }

    pub fn derivative(&self) -> Self {
        self.apply(|xi| Complex64::new(0.0, xi)).expect("finite multiplier")
    }

    /// Back to `[0, L)`.
    pub fn to_signal(&self) -> HalfLineSignal {
        let mut line = self.dft.inverse(&self.spectrum);
        line.truncate(self.grid.len());
        HalfLineSignal {
            grid: self.grid,
            samples: line,
        }
    }
}

/// `(d/dx)^{1/2} f` as the Fourier multiplier `√(iξ)`.
pub fn half_derivative_spectral(f: &HalfLineSignal) -> Result<HalfLineSignal, FracError> {
    Ok(PaddedLine::new(f)?.half_derivative().to_signal())
}

/// How [`sqrt_operator`] realizes the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtMode {
    Spectral,
    Convolution,
}

/// Symbol of `√(−k_y² − 2iεk_x∂x − 2iενk_x²)` at `∂x ↦ iξ`:
/// `e^{−iπ/4}√(−ik_y² + 2iεk_xξ + 2ενk_x²)`. The root argument has real
/// part `2ενk_x² > 0`, so the principal branch is analytic in `Im ξ < 0`
/// and the operator is causal.
pub fn sqrt_operator_symbol(xi: f64, p: &PhysicalParams) -> Complex64 {
    let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
    let arg = Complex64::new(2.0 * e * nu * kx * kx, 2.0 * e * kx * xi - ky * ky);
    Complex64::from_polar(1.0, -FRAC_PI_4) * principal_sqrt(arg).expect("positive real part")
}

/// Symbol of `−k_y² − 2iεk_x∂x − 2iενk_x²`, the square of [`sqrt_operator_symbol`].
pub fn squared_operator_symbol(xi: f64, p: &PhysicalParams) -> Complex64 {
    let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
    Complex64::new(-ky * ky + 2.0 * e * kx * xi, -2.0 * e * nu * kx * kx)
}

/// `√(−k_y² − 2iεk_x∂x − 2iενk_x²) u` for `u` supported in `ℝ₊`.
///
/// The convolution mode uses
/// `√(2εk_x) e^{−iπ/4} e^{−cx} (d/dx)^{1/2}(e^{cs}u)` with
/// `c = νk_x − ik_y²/(2εk_x)`.
pub fn sqrt_operator(u: &HalfLineSignal, p: &PhysicalParams, mode: SqrtMode) -> Result<HalfLineSignal, FracError> {
    match mode {
        SqrtMode::Spectral => Ok(PaddedLine::new(u)?.apply(|xi| sqrt_operator_symbol(xi, p))?.to_signal()),
        SqrtMode::Convolution => {
            let (e, kx, ky, nu) = (p.epsilon(), p.kx(), p.ky(), p.nu());
            let c = Complex64::new(nu * kx, -ky * ky / (2.0 * e * kx));
            let grid = u.grid;
            let modulated = u.map(|i, v| v * (c * grid.point(i)).exp());
            let d = half_derivative_abel(&modulated);
            let front = (2.0 * e * kx).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);
            Ok(d.map(|i, v| front * (-c * grid.point(i)).exp() * v))
        }
    }
}

/// Discretized `F(Y_{-1/2})(ξ)`: product integration of `e^{-iξx}` against
/// `x^{-1/2}/√π` over `n` cells of width `dx`, plus a two-term asymptotic
/// tail past `X = n·dx`. Accurate when `ξ·dx ≪ 1` and `ξ·X ≫ 1`.
pub fn kernel_transform(xi: f64, dx: f64, n: usize) -> Complex64 {
    let phase = |x: f64| Complex64::from_polar(1.0, -xi * x);
    let mut acc = ZERO;
    for m in 1..=n {
        let (far, near) = abel_weights(m);
        acc += phase(m as f64 * dx) * far + phase((m - 1) as f64 * dx) * near;
    }
    let body = acc * (dx / PI).sqrt();
    let big_x = n as f64 * dx;
    let ixx = Complex64::new(0.0, xi * big_x);
    // ∫_X^∞ x^{-1/2} e^{-iξx} dx ≈ e^{-iξX} X^{-1/2}/(iξ) · (1 − 1/(2iξX))
    let tail = phase(big_x) / (Complex64::new(0.0, xi) * (PI * big_x).sqrt()) * (1.0 - 0.5 / ixx);
    body + tail
}

/// Exact `F(Y_{-1/2})(ξ) = e^{−i·sign(ξ)π/4}/√|ξ|`.
pub fn kernel_transform_exact(xi: f64) -> Complex64 {
    Complex64::from_polar(1.0 / xi.abs().sqrt(), -FRAC_PI_4.copysign(xi))
}
