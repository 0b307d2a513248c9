//! Continuous-convention Fourier transforms on uniform grids.
//!
//! The transform is `F(f)(η) = ∫ f(y) e^{-iηy} dy` with the `1/2π` on the
//! inverse. On a grid `y_k = y0 + k·dy` this becomes
//!
//! ```text
//! F(f)(η_j) ≈ dy · e^{-iη_j y0} · Σ_k f_k e^{-2πi jk/n}
//! ```
//!
//! and the inverse is exact up to round-off. Spectra are stored with the
//! most negative frequency first (see [`SpectralGrid`]).

use crate::model::{Grid1D, SpectralGrid};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Data is considered to leak through the periodic edges above this ratio.
pub const EDGE_LEAK_RATIO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("non-finite input sample at index {0}")]
    NonFiniteInput(usize),
    #[error("input has {got} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("multiplier is not finite at frequency {eta}")]
    NonFiniteMultiplier { eta: f64 },
    #[error("quadrature oracle needs at least 1024 steps, got {0}")]
    TooFewSteps(usize),
}

/// Fourier coefficients on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `(η_j, ĉ_j)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(k, c)| (self.grid.frequency(k), *c))
    }

    /// Bin-wise product with precomputed multiplier values.
    pub fn scaled_by(&self, values: &[Complex64]) -> Spectrum {
        assert_eq!(values.len(), self.coeffs.len(), "multiplier table length");
        Spectrum {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(values).map(|(c, m)| c * m).collect(),
        }
    }

    /// `(1/2π) Σ |ĉ_j|² Δη`, the L² norm squared via Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        sobolev_norm_sq(self, 0.0)
    }
}

/// Forward and inverse transforms for one grid, with the FFT plans cached.
#[derive(Clone)]
pub struct Dft {
    grid: Grid1D,
    spectral: SpectralGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // e^{-iη_j y0} per storage index
    phase: Vec<Complex64>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("grid", &self.grid).finish()
    }
}

impl Dft {
    pub fn new(grid: &Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.len();
        let spectral = SpectralGrid::new(grid);
        let phase = spectral
            .frequencies()
            .map(|eta| Complex64::from_polar(1.0, -eta * grid.x0()))
            .collect();
        Self {
            grid: *grid,
            spectral,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            phase,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn spectral_grid(&self) -> &SpectralGrid {
        &self.spectral
    }

    pub fn forward(&self, data: &[Complex64]) -> Result<Spectrum, SpectralError> {
        let n = self.grid.len();
        if data.len() != n {
            return Err(SpectralError::LengthMismatch {
                expected: n,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SpectralError::NonFiniteInput(i));
        }
        let mut buf = data.to_vec();
        self.forward.process(&mut buf);
        let dy = self.grid.dx();
        let half = n / 2;
        // storage index k holds wavenumber k - n/2, i.e. DFT bin (k + n/2) mod n
        let coeffs = (0..n)
            .map(|k| buf[(k + half) % n] * self.phase[k] * dy)
            .collect();
        Ok(Spectrum {
            grid: self.spectral,
            coeffs,
        })
    }

    pub fn inverse(&self, s: &Spectrum) -> Vec<Complex64> {
        let n = self.grid.len();
        assert_eq!(s.coeffs.len(), n, "spectrum does not match this transform");
        let half = n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            buf[(k + half) % n] = s.coeffs[k] * self.phase[k].conj();
        }
        self.inverse.process(&mut buf);
        // (1/2π)·Δη = 1/(n·dy)
        let scale = 1.0 / (n as f64 * self.grid.dx());
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }
}

/// One-shot forward transform. Prefer [`Dft`] when transforming repeatedly.
pub fn forward_dft(data: &[Complex64], grid: &Grid1D) -> Result<Spectrum, SpectralError> {
    Dft::new(grid).forward(data)
}

/// One-shot inverse transform onto the grid the spectrum was built from.
pub fn inverse_dft(s: &Spectrum) -> Vec<Complex64> {
    Dft::new(s.grid().space()).inverse(s)
}

/// Multiplies every bin by `m(η_j)`.
pub fn apply_multiplier(s: &Spectrum, m: impl Fn(f64) -> Complex64) -> Result<Spectrum, SpectralError> {
    let coeffs = s
        .iter()
        .map(|(eta, c)| {
            let v = m(eta);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v * c)
            } else {
                Err(SpectralError::NonFiniteMultiplier { eta })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Spectrum { grid: s.grid, coeffs })
}

/// Discrete `‖·‖²_{H^s} = (1/2π) Σ_j |ĉ_j|² (1+η_j²)^s Δη`.
pub fn sobolev_norm_sq(s: &Spectrum, order: f64) -> f64 {
    let sum: f64 = s
        .iter()
        .map(|(eta, c)| c.norm_sqr() * (1.0 + eta * eta).powf(order))
        .sum();
    sum * s.grid.deta() / (2.0 * PI)
}

/// Brute-force inverse transform: composite trapezoid of
/// `(1/2π) ∫_{-W}^{W} spec_fn(η) e^{iηy} dη` with `steps` intervals.
///
/// Deliberately shares nothing with the FFT path so it can serve as an
/// independent check of it.
pub fn oracle_inverse_fourier(
    spec_fn: impl Fn(f64) -> Complex64,
    y: f64,
    window: f64,
    steps: usize,
) -> Result<Complex64, SpectralError> {
    if steps < 1024 {
        return Err(SpectralError::TooFewSteps(steps));
    }
    let h = 2.0 * window / steps as f64;
    let term = |i: usize| {
        let eta = -window + i as f64 * h;
        spec_fn(eta) * Complex64::from_polar(1.0, eta * y)
    };
    let mut sum = (term(0) + term(steps)) * 0.5;
    for i in 1..steps {
        sum += term(i);
    }
    Ok(sum * h / (2.0 * PI))
}

/// Largest sample magnitude at the two grid ends relative to the overall
/// maximum, or `None` if the data is below [`EDGE_LEAK_RATIO`] there.
pub fn edge_leak(samples: &[Complex64]) -> Option<f64> {
    let max = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let edge = samples[0].norm().max(samples[samples.len() - 1].norm());
    let ratio = edge / max;
    (ratio > EDGE_LEAK_RATIO).then_some(ratio)
}

/// Trapezoid sum `Σ |f_k|² dy` (exact on the periodic grid).
pub fn l2_norm_sq(samples: &[Complex64], dy: f64) -> f64 {
    samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * dy
}
